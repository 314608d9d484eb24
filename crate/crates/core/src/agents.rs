//! Agents, value spaces, valuations and abstract beings.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, ensure_finite, is_positive_definite, Matrix, TolerancePolicy, Vector};

/// A finite-dimensional value space described by its basis labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSpace {
    labels: Vec<String>,
}

impl ValueSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("value space needs at least one axis".into()));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateAxisLabel(l.clone()));
            }
        }
        Ok(Self { labels })
    }

    /// Space with labels `b1..bn`.
    pub fn anonymous(dim: usize) -> Result<Self> {
        Self::new((1..=dim).map(|i| format!("b{i}")).collect())
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Appends an axis; used by basis-extension interventions.
    pub fn extended(&self, label: &str) -> Result<Self> {
        let mut labels = self.labels.clone();
        labels.push(label.to_string());
        Self::new(labels)
    }
}

/// How an agent assigns subjective importance to a vector.
///
/// The set is closed so that scenarios stay serializable; `WeightedSum` and
/// `Linear` evaluate identically and differ only in how they are reported.
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    WeightedSum(Vector),
    /// `√(vᵀ G v)`; identity metric when `None`.
    Norm(Option<Matrix>),
    Linear(Vector),
}

impl Valuation {
    pub fn sum(dim: usize) -> Self {
        Valuation::WeightedSum(Vector::from_element(dim, 1.0))
    }

    pub fn euclidean() -> Self {
        Valuation::Norm(None)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Valuation::WeightedSum(_) => "weighted_sum",
            Valuation::Norm(_) => "norm",
            Valuation::Linear(_) => "linear",
        }
    }

    /// Checks the valuation against the dimension of its owning space.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Valuation::WeightedSum(w) | Valuation::Linear(w) => {
                ensure_finite(w)?;
                check_dim(dim, w.len())
            }
            Valuation::Norm(None) => Ok(()),
            Valuation::Norm(Some(g)) => {
                check_dim(dim, g.nrows())?;
                check_dim(dim, g.ncols())?;
                if is_positive_definite(g) {
                    Ok(())
                } else {
                    Err(Error::NotPositiveDefinite)
                }
            }
        }
    }

    pub fn evaluate(&self, v: &Vector) -> Result<f64> {
        match self {
            Valuation::WeightedSum(w) | Valuation::Linear(w) => {
                check_dim(w.len(), v.len())?;
                Ok(w.dot(v))
            }
            Valuation::Norm(None) => Ok(v.norm()),
            Valuation::Norm(Some(g)) => {
                check_dim(g.ncols(), v.len())?;
                Ok(v.dot(&(g * v)).max(0.0).sqrt())
            }
        }
    }

    /// Metric of a norm valuation (identity when unspecified).
    pub fn metric(&self, dim: usize) -> Option<Matrix> {
        match self {
            Valuation::Norm(None) => Some(Matrix::identity(dim, dim)),
            Valuation::Norm(Some(g)) => Some(g.clone()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: String,
    pub space: ValueSpace,
    pub valuation: Valuation,
    pub current_state: Vector,
    pub goal_state: Vector,
}

impl Agent {
    pub fn new(
        id: impl Into<String>,
        space: ValueSpace,
        valuation: Valuation,
        current_state: Vector,
        goal_state: Vector,
    ) -> Result<Self> {
        let dim = space.dim();
        check_dim(dim, current_state.len())?;
        check_dim(dim, goal_state.len())?;
        ensure_finite(&current_state)?;
        ensure_finite(&goal_state)?;
        valuation.validate(dim)?;
        Ok(Self {
            id: id.into(),
            space,
            valuation,
            current_state,
            goal_state,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// `M = g − x`.
pub fn motivational_gradient(agent: &Agent) -> Vector {
    &agent.goal_state - &agent.current_state
}

pub fn valuate(agent: &Agent, v: &Vector) -> Result<f64> {
    check_dim(agent.dim(), v.len())?;
    agent.valuation.evaluate(v)
}

/// Dot-product alignment between a belief and a motivational direction.
pub fn belief_alignment(b: &Vector, m: &Vector) -> Result<f64> {
    check_dim(b.len(), m.len())?;
    Ok(b.dot(m))
}

/// A belief together with its per-agent representations.
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractBeing {
    pub id: String,
    pub representations: BTreeMap<String, Vector>,
    pub birth_step: Option<u64>,
}

impl AbstractBeing {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            representations: BTreeMap::new(),
            birth_step: None,
        }
    }

    pub fn with_representation(mut self, agent: impl Into<String>, v: Vector) -> Self {
        self.representations.insert(agent.into(), v);
        self
    }

    /// The representation held by `agent`, if it is above the zero threshold.
    pub fn held_by(&self, agent: &str, tol: &TolerancePolicy) -> Option<&Vector> {
        self.representations
            .get(agent)
            .filter(|v| v.norm() > tol.zero_threshold())
    }
}

pub fn exists_for(being: &AbstractBeing, agent_id: &str, tol: &TolerancePolicy) -> bool {
    being.held_by(agent_id, tol).is_some()
}

/// True when no agent of `population` holds the being. Vacuously true for
/// an empty population.
pub fn is_dead<S: AsRef<str>>(being: &AbstractBeing, population: &[S], tol: &TolerancePolicy) -> bool {
    population.iter().all(|a| !exists_for(being, a.as_ref(), tol))
}

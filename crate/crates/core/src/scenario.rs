//! Scenario files: TOML schema, validation and serialization.
//!
//! Parsing happens in two passes. The document is first deserialized into
//! plain `*Doc` structs, which only checks syntax and field types. The
//! second pass checks every cross-reference and dimension, collecting all
//! problems before it reports any of them. Each error is located in the
//! source text through the parser's spans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::de::{DeTable, DeValue};

use crate::agents::{AbstractBeing, Agent, Valuation, ValueSpace};
use crate::analysis::Analysis;
use crate::applications::CrossMaps;
use crate::error::{Error, Result};
use crate::geometry::{matrix_from_rows, matrix_rows, Matrix, TolerancePolicy, Vector};
use crate::interpretation::InterpretationMap;
use crate::network::{Edge, InfluenceGraph, SimulationConfig};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("{line}:{col}: parse error: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("{} validation error(s)", .0.len())]
    Invalid(Vec<ValidationError>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationError {
    pub path: String,
    pub message: String,
    pub line: Option<usize>,
    pub col: Option<usize>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.col) {
            (Some(l), Some(c)) => write!(f, "{l}:{c}: {}: {}", self.path, self.message),
            _ => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

// ---------------------------------------------------------------------------
// Document layer

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceDoc>,
    #[serde(default)]
    pub agents: Vec<AgentDoc>,
    #[serde(default)]
    pub beings: Vec<BeingDoc>,
    #[serde(default)]
    pub maps: Vec<MapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationDoc>,
    #[serde(default)]
    pub analyses: Vec<AnalysisDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<ValuationDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationDoc {
    Sum,
    WeightedSum {
        weights: Vec<f64>,
    },
    Linear {
        weights: Vec<f64>,
    },
    Norm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metric: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeingDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_step: Option<u64>,
    #[serde(default)]
    pub representations: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adoption_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub being: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDoc {
    pub name: String,
    #[serde(flatten)]
    pub analysis: Analysis,
}

// ---------------------------------------------------------------------------
// Validated layer

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub config: SimulationConfig,
    pub being: Option<String>,
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSpec {
    pub name: String,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub version: String,
    pub name: Option<String>,
    pub description: Option<String>,
    pub tolerance: TolerancePolicy,
    pub agents: Vec<Agent>,
    pub beings: Vec<AbstractBeing>,
    pub maps: Vec<InterpretationMap>,
    pub graph: Option<InfluenceGraph>,
    pub simulation: Option<Simulation>,
    pub analyses: Vec<AnalysisSpec>,
}

impl Scenario {
    pub fn agent(&self, id: &str) -> Result<&Agent> {
        self.agents
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub fn being(&self, id: &str) -> Result<&AbstractBeing> {
        self.beings
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown being `{id}`")))
    }

    /// The being's representation at `agent`, zero or not.
    pub fn representation(&self, being: &str, agent: &str) -> Result<Vector> {
        self.being(being)?
            .representations
            .get(agent)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("being `{being}` has no representation at `{agent}`")))
    }

    /// The declared map, or the identity when `from == to`.
    pub fn map(&self, from: &str, to: &str) -> Result<InterpretationMap> {
        if let Some(m) = self.maps.iter().find(|m| m.source == from && m.target == to) {
            return Ok(m.clone());
        }
        if from == to {
            return Ok(InterpretationMap::identity(from, to, self.agent(from)?.dim()));
        }
        Err(Error::MissingMap {
            from: from.to_string(),
            to: to.to_string(),
        })
    }

    pub fn declared_map(&self, from: &str, to: &str) -> Option<&InterpretationMap> {
        self.maps.iter().find(|m| m.source == from && m.target == to)
    }

    pub fn valuations(&self) -> BTreeMap<String, Valuation> {
        self.agents.iter().map(|a| (a.id.clone(), a.valuation.clone())).collect()
    }

    pub fn cross_maps(&self) -> CrossMaps {
        self.maps
            .iter()
            .map(|m| ((m.source.clone(), m.target.clone()), m.clone()))
            .collect()
    }

    pub fn graph(&self) -> Result<&InfluenceGraph> {
        self.graph
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("scenario declares no graph".into()))
    }

    /// Simulation settings with an optional seed override.
    pub fn sim_config(&self, seed: Option<u64>) -> SimulationConfig {
        let mut cfg = self.simulation.as_ref().map(|s| s.config).unwrap_or_default();
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg
    }

    pub fn analysis(&self, name: &str) -> Option<&AnalysisSpec> {
        self.analyses.iter().find(|a| a.name == name)
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        let default_tol = TolerancePolicy::default();
        ScenarioDoc {
            version: self.version.clone(),
            name: self.name.clone(),
            description: self.description.clone(),
            tolerance: (self.tolerance != default_tol).then_some(ToleranceDoc {
                rank_tol_factor: Some(self.tolerance.rank_tol_factor),
                hull_tol: Some(self.tolerance.hull_tol),
                example_tol: Some(self.tolerance.example_tol),
            }),
            agents: self.agents.iter().map(agent_doc).collect(),
            beings: self
                .beings
                .iter()
                .map(|b| BeingDoc {
                    id: b.id.clone(),
                    birth_step: b.birth_step,
                    representations: b
                        .representations
                        .iter()
                        .map(|(k, v)| (k.clone(), v.as_slice().to_vec()))
                        .collect(),
                })
                .collect(),
            maps: self
                .maps
                .iter()
                .map(|m| MapDoc {
                    source: m.source.clone(),
                    target: m.target.clone(),
                    matrix: Some(matrix_rows(&m.matrix)),
                    identity: None,
                })
                .collect(),
            graph: self.graph.as_ref().map(|g| GraphDoc {
                nodes: g.nodes().to_vec(),
                edges: g
                    .edges()
                    .iter()
                    .map(|e| EdgeDoc {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        p: e.p,
                    })
                    .collect(),
            }),
            simulation: self.simulation.as_ref().map(|s| SimulationDoc {
                seed: Some(s.config.seed),
                max_steps: Some(s.config.max_steps),
                replicates: Some(s.config.replicates),
                adoption_threshold: Some(s.config.adoption_threshold),
                being: s.being.clone(),
                origin: s.origin.clone(),
            }),
            analyses: self
                .analyses
                .iter()
                .map(|a| AnalysisDoc {
                    name: a.name.clone(),
                    analysis: a.analysis.clone(),
                })
                .collect(),
        }
    }

    /// Serializes back to the scenario grammar.
    pub fn to_toml(&self) -> std::result::Result<String, toml::ser::Error> {
        toml::to_string_pretty(&self.to_doc())
    }
}

fn agent_doc(a: &Agent) -> AgentDoc {
    let valuation = match &a.valuation {
        Valuation::WeightedSum(w) => ValuationDoc::WeightedSum {
            weights: w.as_slice().to_vec(),
        },
        Valuation::Linear(w) => ValuationDoc::Linear {
            weights: w.as_slice().to_vec(),
        },
        Valuation::Norm(m) => ValuationDoc::Norm {
            metric: m.as_ref().map(matrix_rows),
        },
    };
    AgentDoc {
        id: a.id.clone(),
        dim: None,
        labels: Some(a.space.labels().to_vec()),
        current: Some(a.current_state.as_slice().to_vec()),
        goal: Some(a.goal_state.as_slice().to_vec()),
        valuation: Some(valuation),
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Seg {
    Key(String),
    Index(usize),
}

pub(crate) type Path = Vec<Seg>;

fn path_string(path: &Path) -> String {
    let mut s = String::new();
    for seg in path {
        match seg {
            Seg::Key(k) => {
                if !s.is_empty() {
                    s.push('.');
                }
                s.push_str(k);
            }
            Seg::Index(i) => s.push_str(&format!("[{i}]")),
        }
    }
    s
}

fn key(base: &Path, k: &str) -> Path {
    let mut p = base.clone();
    p.push(Seg::Key(k.to_string()));
    p
}

fn idx(base: &Path, i: usize) -> Path {
    let mut p = base.clone();
    p.push(Seg::Index(i));
    p
}

/// Reference table consulted while validating; records every problem.
pub(crate) struct Ctx {
    agents: BTreeMap<String, Option<usize>>,
    beings: BTreeMap<String, BTreeSet<String>>,
    maps: BTreeSet<(String, String)>,
    nodes: Option<BTreeSet<String>>,
    has_simulation: bool,
    sim_being: bool,
    sim_origin: bool,
    base: Path,
    errors: Vec<(Path, String)>,
}

impl Ctx {
    fn new() -> Self {
        Self {
            agents: BTreeMap::new(),
            beings: BTreeMap::new(),
            maps: BTreeSet::new(),
            nodes: None,
            has_simulation: false,
            sim_being: false,
            sim_origin: false,
            base: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn push(&mut self, path: Path, msg: impl Into<String>) {
        self.errors.push((path, msg.into()));
    }

    /// Error against `field` of the item currently being checked.
    pub(crate) fn err(&mut self, field: &str, msg: impl Into<String>) {
        let p = if field.is_empty() { self.base.clone() } else { key(&self.base, field) };
        self.push(p, msg);
    }

    /// Dimension of a declared agent; `None` when unknown or undeclared.
    pub(crate) fn agent(&mut self, field: &str, id: &str) -> Option<usize> {
        match self.agents.get(id) {
            Some(d) => *d,
            None => {
                self.err(field, format!("unknown agent `{id}`"));
                None
            }
        }
    }

    pub(crate) fn agents(&mut self, field: &str, ids: &[String]) {
        for id in ids {
            self.agent(field, id);
        }
    }

    pub(crate) fn being(&mut self, field: &str, id: &str) -> bool {
        if self.beings.contains_key(id) {
            true
        } else {
            self.err(field, format!("unknown being `{id}`"));
            false
        }
    }

    /// The being must carry a representation at `agent`.
    pub(crate) fn held(&mut self, field: &str, being: &str, agent: &str) {
        if !self.being(field, being) {
            return;
        }
        if !self.beings[being].contains(agent) {
            self.err(field, format!("being `{being}` has no representation at `{agent}`"));
        }
    }

    pub(crate) fn map(&mut self, field: &str, from: &str, to: &str) {
        if self.maps.contains(&(from.to_string(), to.to_string())) {
            return;
        }
        if from == to && self.agents.contains_key(from) {
            return;
        }
        self.err(field, format!("no interpretation map `{from}` -> `{to}`"));
    }

    pub(crate) fn has_map(&self, from: &str, to: &str) -> bool {
        self.maps.contains(&(from.to_string(), to.to_string()))
    }

    pub(crate) fn dim(&mut self, field: &str, v: &[f64], expected: Option<usize>) {
        if let Some(d) = expected {
            if v.len() != d {
                self.err(field, format!("expected {d} components, found {}", v.len()));
            }
        }
        if v.iter().any(|x| !x.is_finite()) {
            self.err(field, "non-finite component");
        }
    }

    pub(crate) fn graph(&mut self, field: &str) -> bool {
        if self.nodes.is_none() {
            self.err(field, "analysis needs a [graph] section");
            return false;
        }
        true
    }

    pub(crate) fn node(&mut self, field: &str, id: &str) {
        if let Some(nodes) = &self.nodes {
            if !nodes.contains(id) {
                self.err(field, format!("`{id}` is not a graph node"));
            }
        }
    }

    pub(crate) fn simulation(&mut self, field: &str) {
        if !self.has_simulation {
            self.err(field, "analysis needs a [simulation] section");
        }
    }

    pub(crate) fn simulation_has_being(&self) -> bool {
        self.sim_being
    }

    pub(crate) fn simulation_has_origin(&self) -> bool {
        self.sim_origin
    }

    pub(crate) fn positive(&mut self, field: &str, x: f64) {
        if !(x > 0.0 && x.is_finite()) {
            self.err(field, format!("must be positive, got {x}"));
        }
    }

    pub(crate) fn nonnegative(&mut self, field: &str, x: f64) {
        if !(x >= 0.0 && x.is_finite()) {
            self.err(field, format!("must be nonnegative, got {x}"));
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Byte offset of the deepest existing node along `path`.
fn locate(root: &DeValue<'_>, path: &Path) -> Option<usize> {
    let mut node = root;
    let mut found = None;
    for seg in path {
        let next = match seg {
            Seg::Key(k) => node.get(k.as_str()),
            Seg::Index(i) => node.get(*i),
        };
        match next {
            Some(v) => {
                found = Some(v.span().start);
                node = v.get_ref();
            }
            None => break,
        }
    }
    found
}

fn parse_error(text: &str, err: &toml::de::Error) -> ScenarioError {
    let (line, col) = err.span().map_or((1, 1), |s| line_col(text, s.start));
    ScenarioError::Parse {
        line,
        col,
        message: err.message().trim().to_string(),
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> std::result::Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    match validate(&doc) {
        Ok(s) => Ok(s),
        Err(errors) => {
            let root = DeTable::parse(text).ok().map(|t| DeValue::Table(t.into_inner()));
            let errors = errors
                .into_iter()
                .map(|(path, message)| {
                    let pos = root
                        .as_ref()
                        .and_then(|r| locate(r, &path))
                        .map(|o| line_col(text, o));
                    ValidationError {
                        path: path_string(&path),
                        message,
                        line: pos.map(|p| p.0),
                        col: pos.map(|p| p.1),
                    }
                })
                .collect();
            Err(ScenarioError::Invalid(errors))
        }
    }
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> std::result::Result<Matrix, String> {
    matrix_from_rows(rows).map_err(|e| e.to_string())
}

fn build_valuation(doc: Option<&ValuationDoc>, dim: usize) -> std::result::Result<Valuation, String> {
    let v = match doc {
        None => Valuation::euclidean(),
        Some(ValuationDoc::Sum) => Valuation::sum(dim),
        Some(ValuationDoc::WeightedSum { weights }) => Valuation::WeightedSum(Vector::from_column_slice(weights)),
        Some(ValuationDoc::Linear { weights }) => Valuation::Linear(Vector::from_column_slice(weights)),
        Some(ValuationDoc::Norm { metric: None }) => Valuation::euclidean(),
        Some(ValuationDoc::Norm { metric: Some(rows) }) => Valuation::Norm(Some(rows_to_matrix(rows)?)),
    };
    v.validate(dim).map_err(|e| e.to_string())?;
    Ok(v)
}

fn validate(doc: &ScenarioDoc) -> std::result::Result<Scenario, Vec<(Path, String)>> {
    let mut ctx = Ctx::new();
    let root: Path = Vec::new();

    if doc.version != SCHEMA_VERSION {
        ctx.push(
            key(&root, "version"),
            format!("unsupported version `{}` (expected `{SCHEMA_VERSION}`)", doc.version),
        );
    }

    let mut tolerance = TolerancePolicy::default();
    if let Some(t) = &doc.tolerance {
        if let Some(x) = t.rank_tol_factor {
            tolerance.rank_tol_factor = x;
        }
        if let Some(x) = t.hull_tol {
            tolerance.hull_tol = x;
        }
        if let Some(x) = t.example_tol {
            tolerance.example_tol = x;
        }
        if let Err(e) = tolerance.validate() {
            ctx.push(key(&root, "tolerance"), e.to_string());
        }
    }

    // Agents.
    if doc.agents.is_empty() {
        ctx.push(key(&root, "agents"), "scenario declares no agents");
    }
    let mut agents = Vec::new();
    for (i, a) in doc.agents.iter().enumerate() {
        let p = idx(&key(&root, "agents"), i);
        if ctx.agents.contains_key(&a.id) {
            ctx.push(key(&p, "id"), format!("duplicate agent id `{}`", a.id));
            continue;
        }
        let space = match (&a.labels, a.dim) {
            (Some(l), Some(d)) if l.len() != d => {
                ctx.push(key(&p, "labels"), format!("{} labels for dim = {d}", l.len()));
                None
            }
            (Some(l), _) => match ValueSpace::new(l.clone()) {
                Ok(s) => Some(s),
                Err(e) => {
                    ctx.push(key(&p, "labels"), e.to_string());
                    None
                }
            },
            (None, Some(d)) => match ValueSpace::anonymous(d) {
                Ok(s) => Some(s),
                Err(e) => {
                    ctx.push(key(&p, "dim"), e.to_string());
                    None
                }
            },
            (None, None) => {
                ctx.push(p.clone(), "agent needs `dim` or `labels`");
                None
            }
        };
        let dim = space.as_ref().map(|s| s.dim());
        ctx.agents.insert(a.id.clone(), dim);
        let (Some(space), Some(dim)) = (space, dim) else { continue };
        let mut ok = true;
        let mut state = |field: &str, v: &Option<Vec<f64>>, ctx: &mut Ctx| -> Vector {
            match v {
                Some(v) => {
                    let before = ctx.errors.len();
                    ctx.base = p.clone();
                    ctx.dim(field, v, Some(dim));
                    if ctx.errors.len() > before {
                        ok = false;
                    }
                    Vector::from_column_slice(v)
                }
                None => Vector::zeros(dim),
            }
        };
        let current = state("current", &a.current, &mut ctx);
        let goal = state("goal", &a.goal, &mut ctx);
        let valuation = match build_valuation(a.valuation.as_ref(), dim) {
            Ok(v) => Some(v),
            Err(e) => {
                ctx.push(key(&p, "valuation"), e);
                None
            }
        };
        if let (true, Some(valuation)) = (ok, valuation) {
            match Agent::new(a.id.clone(), space, valuation, current, goal) {
                Ok(agent) => agents.push(agent),
                Err(e) => ctx.push(p.clone(), e.to_string()),
            }
        }
    }

    // Beings.
    let mut beings = Vec::new();
    for (i, b) in doc.beings.iter().enumerate() {
        let p = idx(&key(&root, "beings"), i);
        if ctx.beings.contains_key(&b.id) {
            ctx.push(key(&p, "id"), format!("duplicate being id `{}`", b.id));
            continue;
        }
        let mut being = AbstractBeing::new(b.id.clone());
        being.birth_step = b.birth_step;
        let reps_path = key(&p, "representations");
        ctx.base = reps_path.clone();
        for (agent, v) in &b.representations {
            match ctx.agents.get(agent).copied() {
                None => ctx.push(key(&reps_path, agent), format!("unknown agent `{agent}`")),
                Some(d) => {
                    ctx.dim(agent, v, d);
                    being = being.with_representation(agent.clone(), Vector::from_column_slice(v));
                }
            }
        }
        ctx.beings
            .insert(b.id.clone(), b.representations.keys().cloned().collect());
        beings.push(being);
    }

    // Maps.
    let mut maps = Vec::new();
    for (i, m) in doc.maps.iter().enumerate() {
        let p = idx(&key(&root, "maps"), i);
        ctx.base = p.clone();
        let sd = ctx.agent("source", &m.source);
        let td = ctx.agent("target", &m.target);
        if !ctx.maps.insert((m.source.clone(), m.target.clone())) {
            ctx.err("", format!("duplicate map `{}` -> `{}`", m.source, m.target));
            continue;
        }
        let matrix = match (&m.matrix, m.identity) {
            (Some(_), Some(true)) => {
                ctx.err("identity", "give either `matrix` or `identity = true`, not both");
                None
            }
            (Some(rows), _) => match rows_to_matrix(rows) {
                Ok(mx) => Some(mx),
                Err(e) => {
                    ctx.err("matrix", e);
                    None
                }
            },
            (None, Some(true)) => match (sd, td) {
                (Some(s), Some(t)) if s == t => Some(Matrix::identity(s, s)),
                (Some(s), Some(t)) => {
                    ctx.err("identity", format!("identity map between dims {s} and {t}"));
                    None
                }
                _ => None,
            },
            (None, _) => {
                ctx.err("", "map needs `matrix` or `identity = true`");
                None
            }
        };
        let Some(matrix) = matrix else { continue };
        if let (Some(s), Some(t)) = (sd, td) {
            if matrix.nrows() != t || matrix.ncols() != s {
                ctx.err(
                    "matrix",
                    format!(
                        "matrix is {}x{}, expected {t}x{s} (target dim x source dim)",
                        matrix.nrows(),
                        matrix.ncols()
                    ),
                );
                continue;
            }
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            ctx.err("matrix", "non-finite entry");
            continue;
        }
        maps.push(InterpretationMap::new(m.source.clone(), m.target.clone(), matrix));
    }

    // Graph.
    let mut graph = None;
    if let Some(g) = &doc.graph {
        let gp = key(&root, "graph");
        ctx.base = gp.clone();
        let mut nodes = BTreeSet::new();
        for n in &g.nodes {
            ctx.agent("nodes", n);
            if !nodes.insert(n.clone()) {
                ctx.err("nodes", format!("duplicate node `{n}`"));
            }
        }
        let mut edges = Vec::new();
        let mut ok = true;
        for (i, e) in g.edges.iter().enumerate() {
            ctx.base = idx(&key(&gp, "edges"), i);
            let before = ctx.errors.len();
            for (field, id) in [("from", &e.from), ("to", &e.to)] {
                if !nodes.contains(id) {
                    ctx.err(field, format!("`{id}` is not a graph node"));
                }
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                ctx.err("p", format!("edge probability must lie in (0, 1], got {}", e.p));
            }
            if !ctx.has_map(&e.from, &e.to) {
                ctx.err("", format!("no interpretation map `{}` -> `{}` for this edge", e.from, e.to));
            }
            if ctx.errors.len() > before {
                ok = false;
                continue;
            }
            if let Some(m) = maps.iter().find(|m| m.source == e.from && m.target == e.to) {
                edges.push(Edge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    p: e.p,
                    map: m.clone(),
                });
            } else {
                ok = false;
            }
        }
        if ok {
            match InfluenceGraph::new(g.nodes.clone(), edges) {
                Ok(built) => graph = Some(built),
                Err(e) => ctx.push(gp.clone(), e.to_string()),
            }
        }
        ctx.nodes = Some(nodes);
    }

    // Simulation.
    let mut simulation = None;
    if let Some(s) = &doc.simulation {
        ctx.base = key(&root, "simulation");
        ctx.has_simulation = true;
        ctx.sim_being = s.being.is_some();
        ctx.sim_origin = s.origin.is_some();
        let defaults = SimulationConfig::default();
        let config = SimulationConfig {
            seed: s.seed.unwrap_or(defaults.seed),
            max_steps: s.max_steps.unwrap_or(defaults.max_steps),
            replicates: s.replicates.unwrap_or(defaults.replicates),
            adoption_threshold: s.adoption_threshold.unwrap_or(defaults.adoption_threshold),
        };
        if let Err(e) = config.validate() {
            ctx.err("", e.to_string());
        }
        if let Some(b) = &s.being {
            ctx.being("being", b);
        }
        if let Some(o) = &s.origin {
            if ctx.graph("origin") {
                ctx.node("origin", o);
            }
            if let Some(b) = &s.being {
                if ctx.beings.contains_key(b) {
                    ctx.held("origin", b, o);
                }
            }
        }
        simulation = Some(Simulation {
            config,
            being: s.being.clone(),
            origin: s.origin.clone(),
        });
    }

    // Analyses.
    let mut names = BTreeSet::new();
    let mut analyses = Vec::new();
    for (i, a) in doc.analyses.iter().enumerate() {
        ctx.base = idx(&key(&root, "analyses"), i);
        if !names.insert(a.name.clone()) {
            ctx.err("name", format!("duplicate analysis name `{}`", a.name));
        }
        a.analysis.check(&mut ctx);
        analyses.push(AnalysisSpec {
            name: a.name.clone(),
            analysis: a.analysis.clone(),
        });
    }

    if !ctx.errors.is_empty() {
        return Err(ctx.errors);
    }
    Ok(Scenario {
        version: doc.version.clone(),
        name: doc.name.clone(),
        description: doc.description.clone(),
        tolerance,
        agents,
        beings,
        maps,
        graph,
        simulation,
        analyses,
    })
}

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use cogeo::geometry::{Matrix, Vector};
use cogeo::interpretation::InterpretationMap;
use cogeo::network::{Edge, InfluenceGraph};
use cogeo::output::build_report;
use cogeo::scenario::{parse_scenario, Scenario};
use rand::Rng;
use serde_json::Value;

pub fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn example_text(name: &str) -> String {
    let path = examples_dir().join(format!("{name}.scn"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(name: &str) -> Scenario {
    parse_scenario(&example_text(name)).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

pub fn example_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(examples_dir())
        .expect("examples directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            if p.extension()? != "scn" {
                return None;
            }
            Some(p.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}

/// Results of every analysis in an example, keyed by analysis name.
pub fn results(name: &str) -> (BTreeMap<String, Value>, Vec<String>) {
    let sc = load(name);
    let specs: Vec<_> = sc.analyses.iter().collect();
    let (report, _) = build_report(&sc, "", &specs, None).unwrap_or_else(|e| panic!("{name}: {e}"));
    let map = report.analyses.into_iter().map(|a| (a.name, a.result)).collect();
    (map, report.warnings)
}

pub fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("expected a number, got {v}"))
}

pub fn nums(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap_or_else(|| panic!("expected an array, got {v}"))
        .iter()
        .map(num)
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

#[track_caller]
pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(close(a, b, tol), "{a} != {b} (tol {tol})");
}

#[track_caller]
pub fn assert_all_close(a: &[f64], b: &[f64], tol: f64) {
    assert!(all_close(a, b, tol), "{a:?} != {b:?} (tol {tol})");
}

pub fn node(i: usize) -> String {
    format!("N{i}")
}

/// Small integer entries with a bias towards zero, so annihilation happens
/// often and is exact in floating point.
pub fn int_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    const CHOICES: [f64; 6] = [0.0, 0.0, 0.0, 1.0, -1.0, 2.0];
    Matrix::from_fn(rows, cols, |_, _| CHOICES[rng.gen_range(0..CHOICES.len())])
}

pub fn int_vector<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| rng.gen_range(-2..=2) as f64);
        if v.norm() > 0.0 {
            return v;
        }
    }
}

pub struct RandomGraph {
    pub graph: InfluenceGraph,
    pub dims: Vec<usize>,
    /// `(from, to, matrix)` in edge order.
    pub edges: Vec<(usize, usize, Matrix)>,
}

pub fn build(dims: Vec<usize>, edges: Vec<(usize, usize, Matrix)>, p: impl Fn(usize) -> f64) -> RandomGraph {
    let n = dims.len();
    let graph = InfluenceGraph::new(
        (0..n).map(node).collect(),
        edges
            .iter()
            .enumerate()
            .map(|(k, (i, j, m))| Edge {
                from: node(*i),
                to: node(*j),
                p: p(k),
                map: InterpretationMap::new(node(*i), node(*j), m.clone()),
            })
            .collect(),
    )
    .expect("generated graphs are valid");
    RandomGraph { graph, dims, edges }
}

/// Acyclic graph on `n` nodes: edges only run from lower to higher index.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, max_dim: usize, p: f64) -> RandomGraph {
    let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_dim)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((i, j, int_matrix(rng, dims[j], dims[i])));
            }
        }
    }
    build(dims, edges, |_| p)
}

/// Tree rooted at node 0: every other node has exactly one parent.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, max_dim: usize, p_range: (f64, f64)) -> RandomGraph {
    let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_dim)).collect();
    let edges: Vec<_> = (1..n)
        .map(|j| {
            let i = rng.gen_range(0..j);
            (i, j, int_matrix(rng, dims[j], dims[i]))
        })
        .collect();
    let ps: Vec<f64> = edges.iter().map(|_| rng.gen_range(p_range.0..=p_range.1)).collect();
    build(dims, edges, |k| ps[k])
}

/// Nodes reached by some path from `leader` whose composite map keeps `x`
/// nonzero, by explicit enumeration of every path in an acyclic graph.
pub fn brute_force_component(g: &RandomGraph, leader: usize, x: &Vector) -> BTreeSet<String> {
    let mut members = BTreeSet::from([node(leader)]);
    let mut stack = vec![(leader, x.clone())];
    while let Some((at, v)) = stack.pop() {
        for (i, j, m) in &g.edges {
            if *i == at {
                let image = m * &v;
                if image.norm() > 0.0 {
                    members.insert(node(*j));
                }
                stack.push((*j, image));
            }
        }
    }
    members
}

pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn uniform_vector<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn spd<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let a = uniform_matrix(rng, n, n);
    &a * a.transpose() + Matrix::identity(n, n) * 0.1
}

/// `I + E` with `‖E‖₂ = eps·u`; one instance in five sits on the boundary `u = 1`.
pub fn near_identity<R: Rng>(rng: &mut R, d: usize, eps: f64) -> Matrix {
    let e = uniform_matrix(rng, d, d);
    let s = cogeo::geometry::singular_values(&e)[0];
    let u = if rng.gen_bool(0.2) { 1.0 } else { rng.gen_range(0.0..1.0) };
    let e = if s > 0.0 { e * (eps * u / s) } else { e };
    Matrix::identity(d, d) + e
}

fn quad(m: &Matrix, v: &Vector) -> f64 {
    v.dot(&(m * v))
}

/// Samples displacement pairs `(u, v)` and looks for one ordered oppositely
/// by the two quadratic forms, each by more than `margin`.
pub fn brute_force_reversal<R: Rng>(rng: &mut R, a: &Matrix, b: &Matrix, samples: usize, margin: f64) -> bool {
    let d = a.nrows();
    (0..samples).any(|_| {
        let u = uniform_vector(rng, d);
        let v = uniform_vector(rng, d);
        quad(a, &u) + margin < quad(a, &v) && quad(b, &u) > quad(b, &v) + margin
    })
}

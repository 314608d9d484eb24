//! One test per bundled example: each report carries the expected numbers.

mod common;

use common::*;

const TOL: f64 = 5e-3;
const EXACT: f64 = 1e-9;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn every_example_runs_without_warnings() {
    let names = example_names();
    assert_eq!(names.len(), 20);
    for name in names {
        let (_, warnings) = results(&name);
        assert!(warnings.is_empty(), "{name}: {warnings:?}");
    }
}

#[test]
fn perspective() {
    let (r, _) = results("perspective");
    let v = &r["valuation"];
    assert_close(num(&v["source_valuation"]), 1.7, EXACT);
    assert_close(num(&v["target_valuation"]), 0.81, EXACT);
}

#[test]
fn gradient() {
    let (r, _) = results("gradient");
    assert_all_close(&nums(&r["gradient"]["gradient"]), &[0.5, 0.3, 0.2], EXACT);
}

#[test]
fn alignment() {
    let (r, _) = results("alignment");
    let a = &r["alignment"];
    let oracle = dot(&nums(&a["belief"]), &nums(&a["gradient"]));
    assert_close(num(&a["alignment"]), oracle, EXACT);
    assert_close(num(&a["alignment"]), 0.7, EXACT);
}

#[test]
fn compatibility_readings_differ_but_value_equally() {
    let (r, _) = results("compatibility");
    let a = nums(&r["reading_a"]["image"]);
    let b = nums(&r["reading_b"]["image"]);
    assert!(!all_close(&a, &b, 1e-6));
    assert_close(num(&r["reading_a"]["target_valuation"]), norm(&a), EXACT);
    assert_close(norm(&a), norm(&b), EXACT);
}

#[test]
fn consistency() {
    let (r, _) = results("consistency");
    let c = &r["consistency"];
    assert_close(num(&c["source_valuation"]), norm(&[1.3, 0.48, 0.0]), EXACT);
    assert_close(num(&c["target_valuation"]), norm(&[1.14, 0.16, 0.2]), EXACT);
    assert_close(num(&c["source_valuation"]), 1.386, TOL);
    assert_close(num(&c["target_valuation"]), 1.168, TOL);
    assert_eq!(c["report"]["valuation_ok"], true);
}

#[test]
fn mutual_understanding() {
    let (r, _) = results("mutual_understanding");
    let c = &r["cosine"];
    let a = nums(&c["images"]["A"]);
    let b = nums(&c["images"]["B"]);
    let oracle = dot(&a, &b) / (norm(&a) * norm(&b));
    assert_close(num(&c["cosine"]), oracle, 1e-12);
    assert_close(num(&c["cosine"]), 0.951, TOL);
}

#[test]
fn null_space() {
    let (r, _) = results("null_space");
    let b = &r["blindness"];
    assert_eq!(b["probes"]["probe_0"]["blind"], true);
    assert_eq!(nums(&b["probes"]["probe_0"]["image"]), vec![0.0; 3]);
    let basis = b["null_basis"].as_array().unwrap();
    assert_eq!(basis.len(), 1);
    let e = nums(&basis[0]);
    assert_close(e[0].abs(), 1.0, EXACT);
    assert_close(e[1].abs() + e[2].abs(), 0.0, EXACT);
}

#[test]
fn network() {
    let (r, _) = results("network");
    let finals = &r["propagation"]["final_representations"];
    assert_all_close(&nums(&finals["A3"]), &[0.38, 0.0], EXACT);
    assert_all_close(&nums(&r["chain"]["path"]["image"]), &[0.38, 0.0], EXACT);
}

#[test]
fn leadership() {
    let (r, _) = results("leadership");
    assert_all_close(&nums(&r["lead_x"]["path"]["image"]), &[0.6, 0.0, 0.0], EXACT);
    let m = &r["lead_x_prime"]["membership"];
    assert_eq!(m["A1"], "IN_COMPONENT");
    assert_eq!(m["A2"], "NOT_IN_COMPONENT");
    assert_eq!(m["A3"], "NOT_IN_COMPONENT");
    assert_eq!(r["lead_x_prime"]["path"]["blind"], true);
    for n in ["A1", "A2", "A3"] {
        assert_eq!(r["lead_x"]["membership"][n], "IN_COMPONENT");
    }
}

#[test]
fn leadership_emergence() {
    let (r, _) = results("leadership_emergence");
    let rec = &r["leadership"]["received"];
    let a1 = nums(&rec["A1"]["vector"]);
    assert_all_close(&a1, &[0.9, 0.56, 0.18], EXACT);
    assert_close(norm(&a1), 1.075, TOL);
    assert_all_close(&nums(&rec["A2"]["vector"]), &[0.0, 0.0, 0.3], EXACT);
    assert_eq!(rec["A2"]["adopted"], false);
    assert_eq!(r["leadership"]["verification"]["statuses"]["A2"], "IN_COMPONENT_NOT_ADOPTED");
}

#[test]
fn motivational_alignment() {
    let (r, _) = results("motivational_alignment");
    let g = &r["goal_update"];
    assert_all_close(&nums(&g["goal_after"]), &[0.74, 0.54, 0.48], EXACT);
    let m = nums(&g["gradient_after"]);
    assert_all_close(&m, &[0.34, 0.34, -0.02], EXACT);
    let x = nums(&g["adopted"]);
    assert_close(num(&g["cosine_after"]), dot(&m, &x) / (norm(&m) * norm(&x)), 1e-12);
    assert_close(num(&g["cosine_after"]), 0.922, TOL);
    let c = &r["repeated_adoption"];
    assert!(num(&c["final_cosine"]) > num(&c["initial_cosine"]));
    assert!(num(&c["final_cosine"]) >= 1.0 - 1e-3);
}

#[test]
fn coordination() {
    let (r, _) = results("coordination");
    assert_eq!(r["coordination"]["verdict"], "COORDINATED");
}

#[test]
fn persuasion() {
    let (r, _) = results("persuasion");
    let p = &r["persuasion"];
    let v = num(&p["candidate"]["value"]);
    assert_close(v, norm(&[0.8, 0.6, 0.16]), EXACT);
    assert!((1.00..=1.03).contains(&v));
    assert!(num(&p["residual"]) <= 1e-10);
    assert_close(num(&p["achieved_value"]), num(&p["target_value"]), 1e-10);
}

#[test]
fn map_fit_recovers_generating_map() {
    let (r, _) = results("map_fit");
    assert!(num(&r["fit"]["max_residual"]) < 1e-10);
}

#[test]
fn convex_hull() {
    let (r, _) = results("convex_hull");
    let h = &r["hull"];
    assert_eq!(h["leader"]["membership"]["verdict"], "OUTSIDE");
    assert_eq!(h["leader"]["role"], "INNOVATOR");
    for g in ["G1", "G2", "G3"] {
        assert_eq!(h["members"][g]["verdict"], "INSIDE");
    }
}

#[test]
fn lifecycle() {
    let (r, _) = results("lifecycle");
    let start = norm(&[0.9, 0.4, 0.1]);
    let oracle = (1..).find(|k| start * 0.5f64.powi(*k) <= 1e-6).unwrap();
    assert_eq!(r["decay"]["death_step"], oracle);
    assert_eq!(r["decay"]["birth_step"], 0);
    assert!(r["spread"]["death_step"].is_null());
    assert_eq!(r["spread"]["alive_at_end"], true);
}

#[test]
fn counterfactual() {
    let (r, _) = results("counterfactual");
    let c = &r["counterfactual"];
    assert_all_close(&nums(&c["displacement"]), &[5.0, -3.0], EXACT);
    assert_all_close(&nums(&c["perspective_displacement"]), &[3.0, -4.2], EXACT);
    assert_eq!(c["reversal"]["verdict"], "WITNESS");
    let costs = &c["reversal"]["witness"]["costs"];
    assert!(num(&costs["ci_x"]) < num(&costs["ci_y"]));
    assert!(num(&costs["cj_x"]) > num(&costs["cj_y"]));
}

#[test]
fn social_identity() {
    let (r, _) = results("social_identity");
    let s = &r["identity"];
    let scores = &s["election"]["scores"];
    assert_close(num(&scores["A"]), 2.15, TOL);
    assert_close(num(&scores["B"]), 1.40, TOL);
    assert_close(num(&scores["C"]), 1.70, TOL);
    assert_eq!(s["election"]["leader"], "A");
    assert_close(num(&s["deviance"]["K"]["distance"]), 0.141, TOL);
    assert_close(num(&s["deviance"]["I"]["distance"]), 1.70, TOL);
    assert_close(num(&s["member_valuations"]["F1"]["I"]), -0.5, EXACT);
    let f1 = &s["outgroup"]["F1"];
    assert_close(num(&f1["ratio"]), 0.75 / 2.1, EXACT);
    assert_eq!(f1["verdict"], "OUT_GROUP");
}

#[test]
fn marketing() {
    let (r, _) = results("marketing");
    let m = &r["campaign"];
    assert_close(num(&m["valuation_before"]), 0.3 + 0.6, EXACT);
    assert_close(num(&m["valuation_after"]), 0.3 + 0.6 + 0.8 * 0.9, EXACT);
    assert_all_close(&nums(&m["gradient_after"]), &[0.1, 0.4, 0.5], EXACT);
    assert!(num(&m["cosine_after"]) > num(&m["cosine_before"]));
}

#[test]
fn emotion() {
    let (r, _) = results("emotion");
    assert_eq!(r["resigned"]["emotion"]["verdict"], "SADNESS");
    assert_eq!(r["defiant"]["emotion"]["verdict"], "RAGE");
    assert!(num(&r["resigned"]["acceptance"]) > 0.0);
    assert!(num(&r["defiant"]["acceptance"]) < 0.0);
}

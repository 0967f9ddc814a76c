#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Write;

use zid_core::table::assignments;
use zid_core::{random_scm, Assignment, Estimand, Evaluator, Family, Query, Scm, VarSet, VariableId};

pub fn no_overrides() -> BTreeMap<VariableId, usize> {
    BTreeMap::new()
}

pub fn scm(g: &zid_core::Admg, seed: u64) -> Scm {
    random_scm(g, &no_overrides(), seed).expect("corpus graphs fit the oracle")
}

/// Every joint value of binary variables.
pub fn binary_assignments(vars: &VarSet) -> Vec<Assignment> {
    let spec: Vec<(VariableId, usize)> = vars.iter().map(|v| (v.clone(), 2)).collect();
    assignments(&spec)
}

/// Every `(x, y)` pair of the query, merged into the free-variable assignment.
pub fn query_points(q: &Query) -> Vec<(Assignment, Assignment, Assignment)> {
    let mut out = Vec::new();
    for x in binary_assignments(&q.x_vars()) {
        for y in binary_assignments(&q.y_vars()) {
            let mut free = x.clone();
            for (k, v) in y.iter() {
                free.insert(k.clone(), *v);
            }
            out.push((x.clone(), y, free));
        }
    }
    out
}

/// Largest |estimand - truth| over every (x, y) of the query.
pub fn max_error_vs_truth(e: &Estimand, q: &Query, m: &Scm, fam: &Family) -> f64 {
    let ev = Evaluator::new(fam);
    let mut worst: f64 = 0.0;
    for (x, y, free) in query_points(q) {
        let got = ev.evaluate(e, &free).expect("estimand evaluates on the family");
        let want = m.truth(&x, &y).unwrap();
        worst = worst.max((got - want).abs());
    }
    worst
}

/// Writes one line to stderr, bypassing the test harness capture so that the
/// line shows up in the plain `cargo test` log.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "acceptance criterion {criterion:>2}: {status} | {detail}");
}

//! Acceptance suite. Every test prints one PASS/FAIL line and then asserts it.

mod common;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use zid_core::corpus::{self, CorpusSpec};
use zid_core::identify::{corollary2_precheck, extract_hedge, id, idz, pearl_criterion, theorem3_zid, Query};
use zid_core::oracle::{compare_models, witness_search, AGREEMENT_TOLERANCE, MIN_GAP};
use zid_core::{var_set, Assignment, Evaluator, VarSet};

use common::{max_error_vs_truth, query_points, report, scm};

const SEEDS: u64 = 200;
const CORPUS_SEED: u64 = 2012;

fn g_a_query() -> Query {
    Query::from_names(["Y"], ["X"], ["Z"])
}

fn check(criterion: u32, pass: bool, detail: String) {
    report(criterion, pass, &detail);
    assert!(pass, "criterion {criterion}: {detail}");
}

fn small_spec() -> CorpusSpec {
    CorpusSpec {
        max_vertices: 5,
        max_bidirected: 4,
        max_surrogates: 2,
        edge_probability: 0.4,
    }
}

#[test]
fn criterion_01_surrogate_ratio_reproduced() {
    let start = Instant::now();
    let g = corpus::g_a();
    let q = g_a_query();
    let r = idz(&q, &g).unwrap();
    let Some(e) = r.estimand() else {
        return check(1, false, "idz failed on G_a".into());
    };
    let worst = (1..=SEEDS)
        .into_par_iter()
        .map(|seed| {
            let m = scm(&g, seed);
            let fam = m.family(&var_set(["Z"])).unwrap();
            let ev = Evaluator::new(&fam);
            let mut worst: f64 = 0.0;
            for (x, y, free) in query_points(&q) {
                let got = ev.evaluate(e, &free).unwrap();
                let truth = m.truth(&x, &y).unwrap();
                worst = worst.max((got - truth).abs());
                for z in 0..2 {
                    let t = fam.table(&[("Z", z)].into_iter().collect()).unwrap();
                    let pxy = t.prob(&free).unwrap();
                    let px = t.marginal(&["X".into()]).prob(&x).unwrap();
                    worst = worst.max((got - pxy / px).abs());
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        1,
        worst <= 1e-9 && elapsed < Duration::from_secs(10),
        format!("G_a over {SEEDS} models: max error {worst:.2e} (limit 1e-9), {elapsed:.2?} (limit 10s)"),
    );
}

#[test]
fn criterion_02_p_graph_rejected_with_hedge() {
    let g = corpus::g_p();
    let q = g_a_query();
    let r = idz(&q, &g).unwrap();
    let Some(fail) = r.fail() else {
        return check(2, false, "idz identified the p-graph".into());
    };
    let h = extract_hedge(fail).unwrap();
    let cut = g.mutilate(&var_set(["Z"]), &VarSet::new()).unwrap();
    let in_g = g.validate_hedge(&h, &q.x_vars(), &q.y_vars()).unwrap();
    let in_cut = cut.validate_hedge(&h, &q.x_vars(), &q.y_vars()).unwrap();
    check(
        2,
        in_g && in_cut,
        format!(
            "idz fails; hedge F={:?} F'={:?} R={:?}; valid in G: {in_g}, with edges into Z cut: {in_cut}",
            h.f_vertices, h.fprime_vertices, h.r
        ),
    );
}

#[test]
fn criterion_03_empty_surrogates_reduce_to_id() {
    let start = Instant::now();
    let spec = CorpusSpec {
        max_surrogates: 0,
        ..CorpusSpec::default()
    };
    let results: Vec<(bool, f64, bool)> = (0..500u64)
        .into_par_iter()
        .map(|i| {
            let (g, q) = corpus::random_instance(CORPUS_SEED, i, &spec);
            let a = idz(&q, &g).unwrap();
            let b = id(&q, &g).unwrap();
            let agree = a.is_identified() == b.is_identified();
            let mut worst: f64 = 0.0;
            if let (Some(ea), Some(eb)) = (a.estimand(), b.estimand()) {
                for k in 0..5 {
                    let fam = scm(&g, 1000 * i + k).family(&VarSet::new()).unwrap();
                    let ev = Evaluator::new(&fam);
                    for (_, _, free) in query_points(&q) {
                        let d = ev.evaluate(ea, &free).unwrap() - ev.evaluate(eb, &free).unwrap();
                        worst = worst.max(d.abs());
                    }
                }
            }
            (agree, worst, a.is_identified())
        })
        .collect();
    let agree = results.iter().filter(|r| r.0).count();
    let identified = results.iter().filter(|r| r.2).count();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    check(
        3,
        agree == 500 && worst <= 1e-12 && elapsed < Duration::from_secs(60),
        format!(
            "verdicts agree {agree}/500 ({identified} identified); max estimand difference {worst:.2e} (limit 1e-12); {elapsed:.2?} (limit 60s)"
        ),
    );
}

#[test]
fn criterion_04_matches_subset_criterion() {
    let start = Instant::now();
    let disagreements: Vec<u64> = (0..500u64)
        .into_par_iter()
        .filter(|&i| {
            let (g, q) = corpus::random_instance(CORPUS_SEED, i, &small_spec());
            idz(&q, &g).unwrap().is_identified() != theorem3_zid(&q, &g).unwrap().zid
        })
        .collect();
    let elapsed = start.elapsed();
    check(
        4,
        disagreements.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "verdicts agree {}/500; {elapsed:.2?} (limit 5min); disagreeing instances {:?}",
            500 - disagreements.len(),
            disagreements
        ),
    );
}

#[test]
fn criterion_05_identified_estimands_are_sound() {
    let start = Instant::now();
    let results: Vec<f64> = (0..500u64)
        .into_par_iter()
        .filter_map(|i| {
            let (g, q) = corpus::random_instance(CORPUS_SEED, i, &small_spec());
            let r = idz(&q, &g).unwrap();
            let e = r.estimand()?.clone();
            let worst = (0..20)
                .map(|k| {
                    let m = scm(&g, 7919 * i + k);
                    let fam = m.family(&q.z).unwrap();
                    max_error_vs_truth(&e, &q, &m, &fam)
                })
                .fold(0.0, f64::max);
            Some(worst)
        })
        .collect();
    let worst = results.iter().cloned().fold(0.0, f64::max);
    check(
        5,
        worst <= 1e-9,
        format!(
            "{} identified instances x 20 models: max |estimand - truth| {worst:.2e} (limit 1e-9); {:.2?}",
            results.len(),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_06_more_surrogates_never_hurt() {
    let mut violations = Vec::new();
    let mut pairs = 0;
    for i in 0..500u64 {
        let (g, q) = corpus::random_instance(CORPUS_SEED, i, &small_spec());
        let zs: Vec<_> = q.z.iter().cloned().collect();
        let subsets: Vec<VarSet> = (0u32..1 << zs.len())
            .map(|m| zs.iter().enumerate().filter(|(k, _)| m & (1 << k) != 0).map(|(_, v)| v.clone()).collect())
            .collect();
        let verdicts: Vec<bool> = subsets
            .iter()
            .map(|z| idz(&Query { z: z.clone(), ..q.clone() }, &g).unwrap().is_identified())
            .collect();
        for (a, za) in subsets.iter().enumerate() {
            for (b, zb) in subsets.iter().enumerate() {
                if a != b && za.is_subset(zb) {
                    pairs += 1;
                    if verdicts[a] && !verdicts[b] {
                        violations.push(i);
                    }
                }
            }
        }
    }
    check(
        6,
        violations.is_empty(),
        format!("{pairs} nested surrogate pairs, {} violations {:?}", violations.len(), violations),
    );
}

#[test]
fn criterion_07_canonical_level_is_immaterial() {
    let g = corpus::g_a();
    let q = g_a_query();
    let e = idz(&q, &g).unwrap().estimand().cloned().unwrap();
    let rebound = e.with_regime_constant(1);
    let worst = (1..=SEEDS)
        .map(|seed| {
            let fam = scm(&g, seed).family(&var_set(["Z"])).unwrap();
            let ev = Evaluator::new(&fam);
            query_points(&q)
                .iter()
                .map(|(_, _, free)| (ev.evaluate(&e, free).unwrap() - ev.evaluate(&rebound, free).unwrap()).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    check(
        7,
        worst <= 1e-9,
        format!("regime z=0 vs z=1 over {SEEDS} models: max change {worst:.2e} (limit 1e-9)"),
    );
}

#[test]
fn criterion_08_descendant_surrogates_are_useless() {
    let instances = corpus::descendant_surrogate_instances(CORPUS_SEED, 50);
    let mut ok = 0;
    for (g, q) in &instances {
        let pre = corollary2_precheck(g, &q.x_vars(), &q.y_vars(), &q.z).unwrap();
        let fails = !idz(q, g).unwrap().is_identified();
        if pre && fails {
            ok += 1;
        }
    }
    check(
        8,
        ok == 50,
        format!("precheck true and idz fails in {ok}/{} targeted instances", instances.len()),
    );
}

fn witness_line(name: &str, g: &zid_core::Admg, z: &VarSet) -> (bool, String) {
    let start = Instant::now();
    let (x, y) = (var_set(["X"]), var_set(["Y"]));
    let found = witness_search(g, &x, &y, z, 1_000_000, 1).unwrap();
    let elapsed = start.elapsed();
    match found {
        None => (false, format!("{name}: no pair within budget ({elapsed:.2?})")),
        Some(w) => {
            let (agreement, gap) = compare_models(&w.first, &w.second, &x, &y, z).unwrap();
            let pass = agreement <= AGREEMENT_TOLERANCE && gap >= MIN_GAP && elapsed < Duration::from_secs(300);
            (
                pass,
                format!(
                    "{name}: agreement {agreement:.1e} (limit 1e-7), gap {gap:.3} (min 1e-3), {} evaluations, {elapsed:.2?}",
                    w.evaluations
                ),
            )
        }
    }
}

#[test]
fn criterion_09_witness_pairs_found() {
    let (bow_ok, bow) = witness_line("bow", &corpus::bow(), &VarSet::new());
    let (p_ok, p) = witness_line("p-graph", &corpus::g_p(), &var_set(["Z"]));
    check(9, bow_ok && p_ok, format!("{bow}; {p}"));
}

#[test]
fn criterion_10_subset_beats_full_surrogate_set() {
    let g = corpus::w_variant();
    let (x, y, zw) = (var_set(["X"]), var_set(["Y"]), var_set(["Z", "W"]));
    let pearl = pearl_criterion(&g, &x, &zw, &y).unwrap();
    let q = Query::new(&y, &x, &zw);
    let thm3 = theorem3_zid(&q, &g).unwrap();
    let r = idz(&q, &g).unwrap();
    let plain = id(&q.without_surrogates(), &g).unwrap().is_identified();
    let mut worst: f64 = 0.0;
    if let Some(e) = r.estimand() {
        for seed in 1..=20 {
            let m = scm(&g, seed);
            worst = worst.max(max_error_vs_truth(e, &q, &m, &m.family(&zw).unwrap()));
        }
    }
    let pass = !pearl && thm3.zid && thm3.witness == Some(var_set(["Z"])) && r.is_identified() && !plain && worst <= 1e-9;
    check(
        10,
        pass,
        format!(
            "pearl({{Z,W}})={pearl}, subset criterion zid={} witness={:?}, idz identified={}, id alone={plain}, max error {worst:.2e}",
            thm3.zid,
            thm3.witness,
            r.is_identified()
        ),
    );
}

#[test]
fn eq1_form_rendered() {
    let e = idz(&g_a_query(), &corpus::g_a()).unwrap().estimand().cloned().unwrap();
    let expanded = e.normalize().expand_conditionals();
    assert_eq!(expanded.render(zid_core::RenderFormat::Text), "P[z](y,x) / P[z](x)");
    let _ = Assignment::new();
}

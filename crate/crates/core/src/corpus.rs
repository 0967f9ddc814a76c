//! Named example graphs and seeded random instances for sweeps.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::admg::{Admg, VarSet, VariableId};
use crate::identify::{id, Query};

/// `Z -> X -> Y` with `Z <-> X` and `Z <-> Y`: identifiable with experiments on `Z`.
pub fn g_a() -> Admg {
    Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[("Z", "X"), ("Z", "Y")])
}

/// `Z -> X -> Y` with `X <-> Y` and `Z <-> Y`: not identifiable even with experiments on `Z`.
pub fn g_p() -> Admg {
    Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[("X", "Y"), ("Z", "Y")])
}

pub fn bow() -> Admg {
    Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[("X", "Y")])
}

pub fn chain() -> Admg {
    Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[])
}

pub fn back_door() -> Admg {
    Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("Z", "Y"), ("X", "Y")], &[])
}

pub fn front_door() -> Admg {
    Admg::from_edges(&["X", "Z", "Y"], &[("X", "Z"), ("Z", "Y")], &[("X", "Y")])
}

/// [`g_a`] with an extra root `W -> Z`, `W -> Y`. Experiments on `Z` alone
/// suffice, but `W` has a direct path to `Y` that `X` does not intercept.
pub fn w_variant() -> Admg {
    Admg::from_edges(
        &["W", "Z", "X", "Y"],
        &[("W", "Z"), ("W", "Y"), ("Z", "X"), ("X", "Y")],
        &[("Z", "X"), ("Z", "Y")],
    )
}

/// Shape of a random sweep.
#[derive(Debug, Clone, Copy)]
pub struct CorpusSpec {
    pub max_vertices: usize,
    pub max_bidirected: usize,
    pub max_surrogates: usize,
    pub edge_probability: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            max_vertices: 6,
            max_bidirected: 4,
            max_surrogates: 2,
            edge_probability: 0.4,
        }
    }
}

fn name(i: usize) -> VariableId {
    VariableId::from(format!("V{}", i + 1).as_str())
}

/// Random ADMG on `V1..Vn` (2 ≤ n ≤ max) whose index order is topological.
pub fn random_graph(rng: &mut ChaCha8Rng, spec: &CorpusSpec) -> Admg {
    let n = rng.gen_range(2..=spec.max_vertices.max(2));
    let mut directed = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(spec.edge_probability) {
                directed.push((name(i), name(j)));
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    pairs.shuffle(rng);
    let k = rng.gen_range(0..=spec.max_bidirected.min(pairs.len()));
    let bidirected = pairs[..k].iter().map(|&(i, j)| (name(i), name(j)));
    Admg::build((0..n).map(name), directed, bidirected).expect("forward edges are acyclic")
}

/// Random query with one or two outcomes, one or two treatments and up to
/// `max_surrogates` surrogates, all disjoint.
pub fn random_query(rng: &mut ChaCha8Rng, g: &Admg, max_surrogates: usize) -> Query {
    let mut vs: Vec<VariableId> = g.vertices().iter().cloned().collect();
    vs.shuffle(rng);
    let n = vs.len();
    let ny = if n >= 4 && rng.gen_bool(0.3) { 2 } else { 1 };
    let nx = if n - ny >= 3 && rng.gen_bool(0.3) { 2 } else { 1 };
    let nz = rng.gen_range(0..=max_surrogates.min(n - ny - nx));
    let y: VarSet = vs[..ny].iter().cloned().collect();
    let x: VarSet = vs[ny..ny + nx].iter().cloned().collect();
    let z: VarSet = vs[ny + nx..ny + nx + nz].iter().cloned().collect();
    Query::new(&y, &x, &z)
}

/// The `index`-th instance of a seeded sweep.
pub fn random_instance(seed: u64, index: u64, spec: &CorpusSpec) -> (Admg, Query) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x2545_F491_4F6C_DD1D));
    let g = random_graph(&mut rng, spec);
    let q = random_query(&mut rng, &g, spec.max_surrogates);
    (g, q)
}

/// Instances where every surrogate is a descendant of the treatment among the
/// ancestors of the outcome and the effect is not identifiable from
/// observations. Found by rejection sampling; deterministic in `seed`.
pub fn descendant_surrogate_instances(seed: u64, count: usize) -> Vec<(Admg, Query)> {
    let spec = CorpusSpec {
        max_vertices: 6,
        max_bidirected: 4,
        max_surrogates: 2,
        edge_probability: 0.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = random_graph(&mut rng, &spec);
        let vs: Vec<VariableId> = g.vertices().iter().cloned().collect();
        let x = vs.choose(&mut rng).unwrap().clone();
        let y = vs.choose(&mut rng).unwrap().clone();
        if x == y {
            continue;
        }
        let (xs, ys) = (VarSet::from([x]), VarSet::from([y]));
        let an = g.ancestors(&ys).unwrap();
        let sub = g.induced(&an).unwrap();
        let xa: VarSet = xs.intersection(&an).cloned().collect();
        let mut pool: Vec<VariableId> = sub
            .descendants(&xa)
            .unwrap()
            .into_iter()
            .filter(|v| !xs.contains(v) && !ys.contains(v))
            .collect();
        if pool.is_empty() {
            continue;
        }
        pool.shuffle(&mut rng);
        let k = rng.gen_range(1..=pool.len().min(spec.max_surrogates));
        let z: VarSet = pool[..k].iter().cloned().collect();
        let q = Query::new(&ys, &xs, &z);
        if id(&q.without_surrogates(), &g).unwrap().is_identified() {
            continue;
        }
        out.push((g, q));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_deterministic_and_bounded() {
        let spec = CorpusSpec::default();
        for i in 0..50 {
            let (g, q) = random_instance(7, i, &spec);
            assert_eq!(random_instance(7, i, &spec), (g.clone(), q.clone()));
            assert!(g.vertices().len() <= 6 && g.bidirected_edges().len() <= 4);
            assert!(q.z.len() <= 2);
            q.validate(&g).unwrap();
        }
    }
}

//! Discrete structural causal models used as ground truth.
//!
//! Every observed variable is a deterministic table of its observed parents,
//! the latent variables of its bidirected edges and a private noise variable.
//! Distributions are obtained by enumerating every exogenous configuration.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admg::{Admg, GraphError, VarSet, VariableId};
use crate::table::{assignments, Assignment, DistributionFamily, DistributionTable};
use crate::Probability;

/// Observed plus latent variables a model may have.
pub const MAX_VARIABLES: usize = 16;
/// Largest exogenous state space that is enumerated.
pub const MAX_STATES: u64 = 1 << 24;
/// Largest surrogate set for which a full family is built.
pub const MAX_FAMILY_SURROGATES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("size limit: {0}")]
    SizeLimit(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid cardinality for {0}")]
    Cardinality(VariableId),
}

/// Exogenous common cause of the two endpoints of a bidirected edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Latent<T> {
    pub endpoints: (VariableId, VariableId),
    pub prior: Vec<T>,
}

/// `value = table[parents.., latents.., noise]`, row-major with noise fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanism<T> {
    pub parents: Vec<VariableId>,
    pub latents: Vec<usize>,
    pub noise: Vec<T>,
    pub table: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteScm<T> {
    pub graph: Admg,
    pub cardinality: BTreeMap<VariableId, usize>,
    pub latents: Vec<Latent<T>>,
    pub mechanisms: BTreeMap<VariableId, Mechanism<T>>,
}

fn check_size(g: &Admg) -> Result<(), OracleError> {
    let n = g.vertices().len() + g.bidirected_edges().len();
    if n > MAX_VARIABLES {
        return Err(OracleError::SizeLimit(format!(
            "{n} observed and latent variables, at most {MAX_VARIABLES}"
        )));
    }
    Ok(())
}

fn cardinalities(g: &Admg, overrides: &BTreeMap<VariableId, usize>) -> Result<BTreeMap<VariableId, usize>, OracleError> {
    for v in overrides.keys() {
        if !g.contains(v) {
            return Err(GraphError::UnknownVertex(v.clone()).into());
        }
    }
    g.vertices()
        .iter()
        .map(|v| {
            let c = overrides.get(v).copied().unwrap_or(2);
            if c < 2 {
                Err(OracleError::Cardinality(v.clone()))
            } else {
                Ok((v.clone(), c))
            }
        })
        .collect()
}

fn incident_latents(g: &Admg, v: &VariableId) -> Vec<usize> {
    g.bidirected_edges()
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| a == v || b == v)
        .map(|(i, _)| i)
        .collect()
}

fn random_simplex<T: Probability>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| T::from_f64(x / total).unwrap()).collect()
}

/// A seeded model inducing `g`. Latents are binary; each noise variable has
/// one more level than its variable and every mechanism row reaches every
/// value, so all observational and experimental events have positive mass.
pub fn random_scm<T: Probability>(
    g: &Admg,
    overrides: &BTreeMap<VariableId, usize>,
    seed: u64,
) -> Result<DiscreteScm<T>, OracleError> {
    check_size(g)?;
    let cardinality = cardinalities(g, overrides)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latents: Vec<Latent<T>> = g
        .bidirected_edges()
        .iter()
        .map(|(a, b)| Latent {
            endpoints: (a.clone(), b.clone()),
            prior: random_simplex(&mut rng, 2),
        })
        .collect();
    let mut mechanisms = BTreeMap::new();
    for v in g.vertices() {
        let parents: Vec<VariableId> = g.parents(v).into_iter().collect();
        let lat = incident_latents(g, v);
        let card = cardinality[v];
        let rows: usize = parents.iter().map(|p| cardinality[p]).product::<usize>() * lat.iter().map(|_| 2).product::<usize>();
        let noise = random_simplex(&mut rng, card + 1);
        let mut table = Vec::with_capacity(rows * (card + 1));
        for _ in 0..rows {
            let mut row: Vec<u32> = (0..card as u32).collect();
            row.push(rng.gen_range(0..card as u32));
            row.shuffle(&mut rng);
            table.extend(row);
        }
        mechanisms.insert(
            v.clone(),
            Mechanism {
                parents,
                latents: lat,
                noise,
                table,
            },
        );
    }
    Ok(DiscreteScm {
        graph: g.clone(),
        cardinality,
        latents,
        mechanisms,
    })
}

impl<T: Probability> DiscreteScm<T> {
    pub fn variables(&self) -> Vec<VariableId> {
        self.graph.vertices().iter().cloned().collect()
    }

    /// Size of the exogenous space enumerated for `do(fixed)`.
    fn states(&self, fixed: &Assignment) -> u64 {
        let mut n: u64 = self.latents.iter().map(|l| l.prior.len() as u64).product();
        for (v, m) in &self.mechanisms {
            if fixed.get(v).is_none() {
                n = n.saturating_mul(m.noise.len() as u64);
            }
        }
        n
    }

    /// `P(V \ fixed | do(fixed))` by enumerating every exogenous configuration.
    pub fn intervene(&self, fixed: &Assignment) -> Result<DistributionTable<T>, OracleError> {
        for (v, &x) in fixed.iter() {
            match self.cardinality.get(v) {
                None => return Err(GraphError::UnknownVertex(v.clone()).into()),
                Some(&c) if x as usize >= c => return Err(OracleError::Cardinality(v.clone())),
                _ => {}
            }
        }
        let states = self.states(fixed);
        if states > MAX_STATES {
            return Err(OracleError::SizeLimit(format!("{states} exogenous states")));
        }
        let vars = self.variables();
        let index = |v: &VariableId| vars.binary_search(v).unwrap();
        let order: Vec<usize> = self.graph.topological_order().iter().map(index).collect();
        let free: Vec<usize> = order.iter().copied().filter(|&i| fixed.get(&vars[i]).is_none()).collect();
        let out_vars: Vec<VariableId> = vars.iter().filter(|v| fixed.get(v).is_none()).cloned().collect();
        let out_cards: Vec<usize> = out_vars.iter().map(|v| self.cardinality[v]).collect();
        let mut out = DistributionTable::zeros(out_vars.clone(), out_cards);

        let mechs: Vec<&Mechanism<T>> = vars.iter().map(|v| &self.mechanisms[v]).collect();
        let parent_idx: Vec<Vec<usize>> = mechs.iter().map(|m| m.parents.iter().map(index).collect()).collect();
        let cards: Vec<usize> = vars.iter().map(|v| self.cardinality[v]).collect();

        // exogenous digits: latents first, then the noise of every free variable
        let mut radix: Vec<usize> = self.latents.iter().map(|l| l.prior.len()).collect();
        radix.extend(free.iter().map(|&i| mechs[i].noise.len()));
        let nl = self.latents.len();
        let mut digits = vec![0usize; radix.len()];
        let mut values = vec![0u32; vars.len()];
        for (v, x) in fixed.iter() {
            values[index(v)] = *x;
        }
        let out_pos: Vec<usize> = out_vars.iter().map(index).collect();
        let mut out_values = vec![0u32; out_vars.len()];
        for _ in 0..states {
            let mut p = T::one();
            for (l, &d) in self.latents.iter().zip(&digits) {
                p = p * l.prior[d];
            }
            for (k, &i) in free.iter().enumerate() {
                let m = mechs[i];
                let noise = digits[nl + k];
                p = p * m.noise[noise];
                let mut row = 0usize;
                for &pi in &parent_idx[i] {
                    row = row * cards[pi] + values[pi] as usize;
                }
                for &li in &m.latents {
                    row = row * self.latents[li].prior.len() + digits[li];
                }
                values[i] = m.table[row * m.noise.len() + noise];
            }
            for (o, &i) in out_values.iter_mut().zip(&out_pos) {
                *o = values[i];
            }
            out.add(&out_values, p);
            for d in (0..radix.len()).rev() {
                digits[d] += 1;
                if digits[d] < radix[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        Ok(out)
    }

    pub fn joint(&self) -> Result<DistributionTable<T>, OracleError> {
        self.intervene(&Assignment::new())
    }

    /// `P_x(y)`.
    pub fn truth(&self, x: &Assignment, y: &Assignment) -> Result<T, OracleError> {
        let t = self.intervene(x)?;
        let vars: Vec<VariableId> = y.vars().into_iter().collect();
        for v in &vars {
            if t.position(v).is_none() {
                return Err(GraphError::UnknownVertex(v.clone()).into());
            }
        }
        t.marginal(&vars)
            .prob(y)
            .ok_or_else(|| OracleError::Cardinality(vars[0].clone()))
    }

    /// Observational joint plus `P(V \ Z' | do(z'))` for every nonempty
    /// `Z' ⊆ z` and every assignment `z'`.
    pub fn family(&self, z: &VarSet) -> Result<DistributionFamily<T>, OracleError> {
        if z.len() > MAX_FAMILY_SURROGATES {
            return Err(OracleError::SizeLimit(format!(
                "{} surrogates, at most {MAX_FAMILY_SURROGATES}",
                z.len()
            )));
        }
        let mut fam = DistributionFamily::new(self.joint()?);
        let zs: Vec<&VariableId> = z.iter().collect();
        for mask in 1u32..(1 << zs.len()) {
            let sub: Vec<(VariableId, usize)> = zs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| {
                    self.cardinality
                        .get(*v)
                        .map(|&c| ((*v).clone(), c))
                        .ok_or_else(|| OracleError::Graph(GraphError::UnknownVertex((*v).clone())))
                })
                .collect::<Result<_, _>>()?;
            for a in assignments(&sub) {
                let t = self.intervene(&a)?;
                fam.insert(a, t);
            }
        }
        Ok(fam)
    }

    pub fn to_json(&self) -> serde_json::Value
    where
        T: Serialize,
    {
        serde_json::to_value(self).expect("model serializes")
    }
}

/// Two models that agree on every available distribution but disagree on the target effect.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessPair {
    pub first: DiscreteScm<f64>,
    pub second: DiscreteScm<f64>,
    /// Largest absolute difference over all observational and experimental tables.
    pub agreement: f64,
    /// Largest absolute difference of `P_x(y)` over all `x`, `y`.
    pub gap: f64,
    pub evaluations: usize,
}

pub const AGREEMENT_TOLERANCE: f64 = 1e-7;
pub const MIN_GAP: f64 = 1e-3;
const TARGET_GAP: f64 = 0.05;
const RESTARTS: usize = 4;
const SEED_STRIDE: u64 = 0x9E37_79B9;

/// Compares two models from scratch on the family for `z` and on `P_x(y)`.
pub fn compare_models(
    m1: &DiscreteScm<f64>,
    m2: &DiscreteScm<f64>,
    x: &VarSet,
    y: &VarSet,
    z: &VarSet,
) -> Result<(f64, f64), OracleError> {
    let (f1, f2) = (m1.family(z)?, m2.family(z)?);
    let mut agreement = max_diff(f1.observational(), f2.observational());
    for (k, t) in f1.experimental() {
        let other = f2.table(k).expect("same surrogate set");
        agreement = agreement.max(max_diff(t, other));
    }
    let xs: Vec<(VariableId, usize)> = x.iter().map(|v| (v.clone(), m1.cardinality[v])).collect();
    let ys: Vec<VariableId> = y.iter().cloned().collect();
    let mut gap: f64 = 0.0;
    for xa in assignments(&xs) {
        let (t1, t2) = (m1.intervene(&xa)?.marginal(&ys), m2.intervene(&xa)?.marginal(&ys));
        gap = gap.max(max_diff(&t1, &t2));
    }
    Ok((agreement, gap))
}

fn max_diff(a: &DistributionTable<f64>, b: &DistributionTable<f64>) -> f64 {
    a.probabilities()
        .iter()
        .zip(b.probabilities())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

/// Smooth parametrization of the models compatible with a graph: softmax
/// logits for each latent prior and each conditional-probability row.
struct CptModel {
    cards: Vec<usize>,
    order: Vec<usize>,
    parents: Vec<Vec<usize>>,
    latents: Vec<Vec<usize>>,
    latent_card: usize,
    n_latents: usize,
    /// Start of each latent block, then of each variable block.
    latent_offset: Vec<usize>,
    var_offset: Vec<usize>,
    n_params: usize,
}

struct Tables {
    latent: Vec<Vec<f64>>,
    cpt: Vec<Vec<f64>>,
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

impl CptModel {
    fn new(g: &Admg, cardinality: &BTreeMap<VariableId, usize>, latent_card: usize) -> Self {
        let vars: Vec<VariableId> = g.vertices().iter().cloned().collect();
        let index = |v: &VariableId| vars.binary_search(v).unwrap();
        let cards: Vec<usize> = vars.iter().map(|v| cardinality[v]).collect();
        let parents: Vec<Vec<usize>> = vars.iter().map(|v| g.parents(v).iter().map(index).collect()).collect();
        let latents: Vec<Vec<usize>> = vars.iter().map(|v| incident_latents(g, v)).collect();
        let n_latents = g.bidirected_edges().len();
        let mut offset = 0;
        let latent_offset: Vec<usize> = (0..n_latents)
            .map(|_| {
                let o = offset;
                offset += latent_card;
                o
            })
            .collect();
        let var_offset: Vec<usize> = (0..vars.len())
            .map(|i| {
                let o = offset;
                let rows: usize = parents[i].iter().map(|&p| cards[p]).product::<usize>() * latent_card.pow(latents[i].len() as u32);
                offset += rows * cards[i];
                o
            })
            .collect();
        CptModel {
            order: g.topological_order().iter().map(index).collect(),
            cards,
            parents,
            latents,
            latent_card,
            n_latents,
            latent_offset,
            var_offset,
            n_params: offset,
        }
    }

    fn rows(&self, i: usize) -> usize {
        self.parents[i].iter().map(|&p| self.cards[p]).product::<usize>() * self.latent_card.pow(self.latents[i].len() as u32)
    }

    fn tables(&self, theta: &[f64]) -> Tables {
        let latent = self
            .latent_offset
            .iter()
            .map(|&o| softmax(&theta[o..o + self.latent_card]))
            .collect();
        let cpt = (0..self.cards.len())
            .map(|i| {
                let c = self.cards[i];
                let o = self.var_offset[i];
                (0..self.rows(i))
                    .flat_map(|r| softmax(&theta[o + r * c..o + (r + 1) * c]))
                    .collect()
            })
            .collect();
        Tables { latent, cpt }
    }

    /// Table over the unfixed variables (ascending index order) under `do(fixed)`.
    fn table(&self, t: &Tables, fixed: &[Option<u32>]) -> Vec<f64> {
        let free: Vec<usize> = (0..self.cards.len()).filter(|&i| fixed[i].is_none()).collect();
        let size: usize = free.iter().map(|&i| self.cards[i]).product();
        let mut out = vec![0.0; size];
        let n_u = self.latent_card.pow(self.n_latents as u32);
        let mut u = vec![0usize; self.n_latents];
        let mut values: Vec<u32> = fixed.iter().map(|f| f.unwrap_or(0)).collect();
        for _ in 0..n_u {
            let pu: f64 = u.iter().enumerate().map(|(l, &d)| t.latent[l][d]).product();
            for (slot, out_p) in out.iter_mut().enumerate() {
                let mut rem = slot;
                for &i in free.iter().rev() {
                    values[i] = (rem % self.cards[i]) as u32;
                    rem /= self.cards[i];
                }
                let mut p = pu;
                for &i in &self.order {
                    if fixed[i].is_some() {
                        continue;
                    }
                    let mut row = 0;
                    for &pi in &self.parents[i] {
                        row = row * self.cards[pi] + values[pi] as usize;
                    }
                    for &li in &self.latents[i] {
                        row = row * self.latent_card + u[li];
                    }
                    p *= t.cpt[i][row * self.cards[i] + values[i] as usize];
                    if p == 0.0 {
                        break;
                    }
                }
                *out_p += p;
            }
            for d in (0..self.n_latents).rev() {
                u[d] += 1;
                if u[d] < self.latent_card {
                    break;
                }
                u[d] = 0;
            }
        }
        out
    }

    /// Exact canonical model whose noise splits the unit interval at every
    /// cumulative breakpoint of the conditional rows.
    fn to_scm(&self, g: &Admg, cardinality: &BTreeMap<VariableId, usize>, theta: &[f64]) -> DiscreteScm<f64> {
        let t = self.tables(theta);
        let vars: Vec<VariableId> = g.vertices().iter().cloned().collect();
        let latents = g
            .bidirected_edges()
            .iter()
            .zip(&t.latent)
            .map(|((a, b), p)| Latent {
                endpoints: (a.clone(), b.clone()),
                prior: p.clone(),
            })
            .collect();
        let mut mechanisms = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            let c = self.cards[i];
            let rows = self.rows(i);
            let cum = |r: usize| -> Vec<f64> {
                let mut acc = 0.0;
                t.cpt[i][r * c..(r + 1) * c]
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            };
            let mut cuts: Vec<f64> = (0..rows).flat_map(|r| cum(r)[..c - 1].to_vec()).collect();
            cuts.push(0.0);
            cuts.push(1.0);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            let mut noise = Vec::new();
            let mut mids = Vec::new();
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    noise.push(w[1] - w[0]);
                    mids.push(0.5 * (w[0] + w[1]));
                }
            }
            let mut table = Vec::with_capacity(rows * noise.len());
            for r in 0..rows {
                let cr = cum(r);
                for &m in &mids {
                    let k = cr[..c - 1].iter().filter(|&&b| b <= m).count();
                    table.push(k as u32);
                }
            }
            mechanisms.insert(
                v.clone(),
                Mechanism {
                    parents: g.parents(v).into_iter().collect(),
                    latents: self.latents[i].clone(),
                    noise,
                    table,
                },
            );
        }
        DiscreteScm {
            graph: g.clone(),
            cardinality: cardinality.clone(),
            latents,
            mechanisms,
        }
    }
}

/// Observables and target as functions of the parameters.
struct Problem<'a> {
    model: &'a CptModel,
    regimes: Vec<Vec<Option<u32>>>,
    target_regime: Vec<Option<u32>>,
    /// Index of the target cell in the `do(x)` table.
    target_cells: Vec<usize>,
}

impl Problem<'_> {
    fn observe(&self, theta: &[f64]) -> (DVector<f64>, f64) {
        let t = self.model.tables(theta);
        let mut obs = Vec::new();
        for r in &self.regimes {
            obs.extend(self.model.table(&t, r));
        }
        let target_table = self.model.table(&t, &self.target_regime);
        let target = self.target_cells.iter().map(|&k| target_table[k]).sum();
        (DVector::from_vec(obs), target)
    }
}

struct Walk {
    evaluations: usize,
}

impl Walk {
    fn jacobian(&mut self, p: &Problem, theta: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        const H: f64 = 1e-6;
        let (o0, t0) = p.observe(theta);
        self.evaluations += 1;
        let n = theta.len();
        let mut jac = DMatrix::zeros(o0.len(), n);
        let mut grad = DVector::zeros(n);
        let mut th = theta.to_vec();
        for k in 0..n {
            th[k] += H;
            let (o, t) = p.observe(&th);
            self.evaluations += 1;
            th[k] = theta[k];
            jac.set_column(k, &((o - &o0) / H));
            grad[k] = (t - t0) / H;
        }
        (jac, grad)
    }

    /// Moves `theta` along directions that leave the observables unchanged
    /// while increasing the target, until the target moved by `TARGET_GAP`.
    fn run(&mut self, p: &Problem, start: &[f64], budget: usize) -> Option<Vec<f64>> {
        let (anchor, t_start) = p.observe(start);
        self.evaluations += 1;
        let mut theta = start.to_vec();
        let mut step = 0.2;
        while self.evaluations < budget {
            let (jac, grad) = self.jacobian(p, &theta);
            let svd = jac.clone().svd(true, true);
            let v_t = svd.v_t.as_ref().unwrap();
            let smax = svd.singular_values.max();
            let mut dir = grad.clone();
            for (i, &s) in svd.singular_values.iter().enumerate() {
                if s > 1e-8 * smax.max(1.0) {
                    let row = v_t.row(i).transpose();
                    dir -= &row * row.dot(&grad);
                }
            }
            let norm = dir.norm();
            if norm < 1e-6 * grad.norm().max(1e-12) || norm < 1e-12 {
                return None;
            }
            dir /= norm;
            let pinv = match svd.pseudo_inverse(1e-8 * smax.max(1.0)) {
                Ok(m) => m,
                Err(_) => return None,
            };
            // predictor step, then chord-Newton correction back onto the level set
            let mut accepted = None;
            while step > 1e-6 && self.evaluations < budget {
                let mut cand: Vec<f64> = theta.iter().zip(dir.iter()).map(|(a, d)| a + step * d).collect();
                let mut ok = false;
                for _ in 0..30 {
                    let (o, _) = p.observe(&cand);
                    self.evaluations += 1;
                    let resid = o - &anchor;
                    if resid.amax() < 1e-12 {
                        ok = true;
                        break;
                    }
                    let delta = &pinv * resid;
                    for (c, d) in cand.iter_mut().zip(delta.iter()) {
                        *c -= d;
                    }
                }
                if ok {
                    accepted = Some(cand);
                    break;
                }
                step *= 0.5;
            }
            let cand = accepted?;
            let (_, t) = p.observe(&cand);
            self.evaluations += 1;
            theta = cand;
            step = (step * 1.5).min(1.0);
            if (t - t_start).abs() >= TARGET_GAP {
                return Some(theta);
            }
        }
        None
    }
}

/// Searches for two models compatible with `g` that agree on the observational
/// distribution and on every experiment over subsets of `z`, yet differ on
/// `P_x(y)`. `budget` bounds the number of model evaluations. A `None` result
/// proves nothing.
pub fn witness_search(
    g: &Admg,
    x: &VarSet,
    y: &VarSet,
    z: &VarSet,
    budget: usize,
    seed: u64,
) -> Result<Option<WitnessPair>, OracleError> {
    check_size(g)?;
    for s in [x, y, z] {
        for v in s {
            if !g.contains(v) {
                return Err(GraphError::UnknownVertex(v.clone()).into());
            }
        }
    }
    if z.len() > MAX_FAMILY_SURROGATES {
        return Err(OracleError::SizeLimit(format!("{} surrogates", z.len())));
    }
    let cardinality = cardinalities(g, &BTreeMap::new())?;
    let vars: Vec<VariableId> = g.vertices().iter().cloned().collect();
    let index = |v: &VariableId| vars.binary_search(v).unwrap();

    let mut regimes = vec![vec![None; vars.len()]];
    let zs: Vec<&VariableId> = z.iter().collect();
    for mask in 1u32..(1 << zs.len()) {
        let sub: Vec<(VariableId, usize)> = zs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| ((*v).clone(), cardinality[*v]))
            .collect();
        for a in assignments(&sub) {
            let mut r = vec![None; vars.len()];
            for (v, &val) in a.iter() {
                r[index(v)] = Some(val);
            }
            regimes.push(r);
        }
    }
    // target: P(Y = 0 | do(X = 0)); the do(X = 0) table lists the other variables in index order
    let mut target_regime = vec![None; vars.len()];
    for v in x {
        target_regime[index(v)] = Some(0);
    }
    let free: Vec<usize> = (0..vars.len()).filter(|&i| target_regime[i].is_none()).collect();
    let size: usize = free.iter().map(|&i| cardinality[&vars[i]]).product();
    let target_cells: Vec<usize> = (0..size)
        .filter(|&slot| {
            let mut rem = slot;
            let mut hit = true;
            for &i in free.iter().rev() {
                let c = cardinality[&vars[i]];
                if y.contains(&vars[i]) && rem % c != 0 {
                    hit = false;
                }
                rem /= c;
            }
            hit
        })
        .collect();

    let found: Vec<Option<WitnessPair>> = (0..RESTARTS)
        .into_par_iter()
        .map(|k| {
            let model = CptModel::new(g, &cardinality, 2 + k % 2);
            let problem = Problem {
                model: &model,
                regimes: regimes.clone(),
                target_regime: target_regime.clone(),
                target_cells: target_cells.clone(),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64 * SEED_STRIDE));
            let start: Vec<f64> = (0..model.n_params).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mut walk = Walk { evaluations: 0 };
            let end = walk.run(&problem, &start, budget / RESTARTS)?;
            let first = model.to_scm(g, &cardinality, &start);
            let second = model.to_scm(g, &cardinality, &end);
            let (agreement, gap) = compare_models(&first, &second, x, y, z).ok()?;
            (agreement <= AGREEMENT_TOLERANCE && gap >= MIN_GAP).then_some(WitnessPair {
                first,
                second,
                agreement,
                gap,
                evaluations: walk.evaluations,
            })
        })
        .collect();
    Ok(found.into_iter().flatten().next())
}

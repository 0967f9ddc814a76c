//! m-separation and the applicability conditions of the three do-calculus rules.
//!
//! Separation is decided on the latent projection: every bidirected edge
//! `u <-> v` becomes a hidden parent `h -> u, h -> v`, and the resulting DAG is
//! tested for d-separation with the moralized-ancestral-graph criterion.

use std::collections::VecDeque;

use crate::admg::{Admg, GraphError, VarSet, VariableId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: VarSet,
    pub b: VarSet,
    pub given: VarSet,
}

impl SeparationQuery {
    pub fn new(a: VarSet, b: VarSet, given: VarSet) -> Self {
        SeparationQuery { a, b, given }
    }
}

fn check_disjoint(g: &Admg, sets: &[&VarSet]) -> Result<(), GraphError> {
    for (i, s) in sets.iter().enumerate() {
        g.check_subset(s)?;
        for t in &sets[i + 1..] {
            if let Some(v) = s.intersection(t).next() {
                return Err(GraphError::OverlappingSets(v.clone()));
            }
        }
    }
    Ok(())
}

/// Index-based DAG with hidden nodes appended after the observed ones.
struct Augmented {
    parents: Vec<Vec<usize>>,
}

impl Augmented {
    fn new(g: &Admg) -> (Self, Vec<VariableId>) {
        let names: Vec<VariableId> = g.vertices().iter().cloned().collect();
        let index = |v: &VariableId| names.binary_search(v).unwrap();
        let mut parents = vec![Vec::new(); names.len()];
        for (a, b) in g.directed_edges() {
            parents[index(b)].push(index(a));
        }
        for (a, b) in g.bidirected_edges() {
            let h = parents.len();
            parents.push(Vec::new());
            parents[index(a)].push(h);
            parents[index(b)].push(h);
        }
        (Augmented { parents }, names)
    }

    fn d_separated(&self, a: &[usize], b: &[usize], given: &[usize]) -> bool {
        let n = self.parents.len();
        // ancestral closure of a ∪ b ∪ given
        let mut keep = vec![false; n];
        let mut queue: VecDeque<usize> = a.iter().chain(b).chain(given).copied().collect();
        for &v in &queue {
            keep[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &p in &self.parents[v] {
                if !keep[p] {
                    keep[p] = true;
                    queue.push_back(p);
                }
            }
        }
        // moralize
        let mut adj = vec![Vec::new(); n];
        for v in (0..n).filter(|&v| keep[v]) {
            let ps = &self.parents[v];
            for (i, &p) in ps.iter().enumerate() {
                adj[p].push(v);
                adj[v].push(p);
                for &q in &ps[i + 1..] {
                    adj[p].push(q);
                    adj[q].push(p);
                }
            }
        }
        let mut blocked = vec![false; n];
        for &c in given {
            blocked[c] = true;
        }
        let mut target = vec![false; n];
        for &t in b {
            target[t] = true;
        }
        let mut seen = blocked.clone();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in a {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            if target[v] {
                return false;
            }
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        true
    }
}

/// True iff `a` and `b` are m-separated by `given` in `g`.
pub fn m_separated(g: &Admg, q: &SeparationQuery) -> Result<bool, GraphError> {
    check_disjoint(g, &[&q.a, &q.b, &q.given])?;
    if q.a.is_empty() || q.b.is_empty() {
        return Ok(true);
    }
    let (aug, names) = Augmented::new(g);
    let idx = |s: &VarSet| -> Vec<usize> { s.iter().map(|v| names.binary_search(v).unwrap()).collect() };
    Ok(aug.d_separated(&idx(&q.a), &idx(&q.b), &idx(&q.given)))
}

fn union(a: &VarSet, b: &VarSet) -> VarSet {
    a.union(b).cloned().collect()
}

/// Rule 1: `P(y | do(x), z, w) = P(y | do(x), w)` when `(Y ⊥ Z | X, W)` in `G` with edges into `X` cut.
pub fn rule1_applicable(g: &Admg, y: &VarSet, x_hat: &VarSet, z_obs: &VarSet, w: &VarSet) -> Result<bool, GraphError> {
    check_disjoint(g, &[y, x_hat, z_obs, w])?;
    let m = g.mutilate(x_hat, &VarSet::new())?;
    m_separated(&m, &SeparationQuery::new(y.clone(), z_obs.clone(), union(x_hat, w)))
}

/// Rule 2: `P(y | do(x), do(z), w) = P(y | do(x), z, w)` when `(Y ⊥ Z | X, W)` in `G`
/// with edges into `X` and out of `Z` cut.
pub fn rule2_applicable(
    g: &Admg,
    y: &VarSet,
    x_hat: &VarSet,
    z_exchange: &VarSet,
    w: &VarSet,
) -> Result<bool, GraphError> {
    check_disjoint(g, &[y, x_hat, z_exchange, w])?;
    let m = g.mutilate(x_hat, z_exchange)?;
    m_separated(&m, &SeparationQuery::new(y.clone(), z_exchange.clone(), union(x_hat, w)))
}

/// Rule 3: `P(y | do(x), do(z), w) = P(y | do(x), w)` when `(Y ⊥ Z | X, W)` in `G`
/// with edges into `X` and into `Z(W)` cut, where `Z(W)` are the members of `Z`
/// that are not ancestors of `W` once edges into `X` are cut.
pub fn rule3_applicable(g: &Admg, y: &VarSet, x_hat: &VarSet, z_del: &VarSet, w: &VarSet) -> Result<bool, GraphError> {
    check_disjoint(g, &[y, x_hat, z_del, w])?;
    if z_del.is_empty() {
        return Ok(true);
    }
    let an_w = g.mutilate(x_hat, &VarSet::new())?.ancestors(w)?;
    let z_star: VarSet = z_del.difference(&an_w).cloned().collect();
    let m = g.mutilate(&union(x_hat, &z_star), &VarSet::new())?;
    m_separated(&m, &SeparationQuery::new(y.clone(), z_del.clone(), union(x_hat, w)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admg::var_set;

    fn g_a() -> Admg {
        Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[("Z", "X"), ("Z", "Y")])
    }

    fn sep(g: &Admg, a: &[&str], b: &[&str], c: &[&str]) -> bool {
        m_separated(
            g,
            &SeparationQuery::new(var_set(a.iter().copied()), var_set(b.iter().copied()), var_set(c.iter().copied())),
        )
        .unwrap()
    }

    #[test]
    fn separation_examples() {
        let edgeless = Admg::from_edges(&["A", "B"], &[], &[]);
        assert!(sep(&edgeless, &["A"], &["B"], &[]));
        let chain = Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[]);
        assert!(!sep(&chain, &["X"], &["Y"], &[]));
        let m = g_a().mutilate(&var_set(["X", "Z"]), &VarSet::new()).unwrap();
        assert!(sep(&m, &["Y"], &["Z"], &["X"]));
    }

    #[test]
    fn colliders_and_confounders() {
        let collider = Admg::from_edges(&["A", "B", "C"], &[("A", "C"), ("B", "C")], &[]);
        assert!(sep(&collider, &["A"], &["B"], &[]));
        assert!(!sep(&collider, &["A"], &["B"], &["C"]));
        let bi = Admg::from_edges(&["A", "B", "C"], &[("A", "C")], &[("C", "B")]);
        assert!(sep(&bi, &["A"], &["B"], &[]));
        assert!(!sep(&bi, &["A"], &["B"], &["C"]));
        let confounded = Admg::from_edges(&["A", "B"], &[], &[("A", "B")]);
        assert!(!sep(&confounded, &["A"], &["B"], &[]));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = g_a();
        let q = SeparationQuery::new(var_set(["X"]), var_set(["X"]), VarSet::new());
        assert_eq!(m_separated(&g, &q), Err(GraphError::OverlappingSets("X".into())));
        assert!(rule2_applicable(&g, &var_set(["Y"]), &var_set(["Y"]), &VarSet::new(), &VarSet::new()).is_err());
    }

    #[test]
    fn rule_examples() {
        let (y, x, z, none) = (var_set(["Y"]), var_set(["X"]), var_set(["Z"]), VarSet::new());
        assert!(rule2_applicable(&g_a(), &y, &z, &x, &none).unwrap());
        let chain = Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[]);
        assert!(rule2_applicable(&chain, &y, &none, &x, &none).unwrap());
        let bow = Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[("X", "Y")]);
        assert!(!rule2_applicable(&bow, &y, &none, &x, &none).unwrap());

        let edgeless = Admg::from_edges(&["Y", "Z"], &[], &[]);
        assert!(rule1_applicable(&edgeless, &y, &none, &z, &none).unwrap());
        let zy = Admg::from_edges(&["Z", "Y"], &[("Z", "Y")], &[]);
        assert!(!rule1_applicable(&zy, &y, &none, &z, &none).unwrap());
        assert!(!rule1_applicable(&g_a(), &y, &x, &z, &none).unwrap());

        assert!(rule3_applicable(&g_a(), &y, &x, &z, &none).unwrap());
        assert!(!rule3_applicable(&zy, &y, &none, &z, &none).unwrap());
        assert!(rule3_applicable(&zy, &y, &none, &none, &none).unwrap());
    }

    #[test]
    fn rule3_respects_ancestors_of_w() {
        // Z -> W <- U <-> Y : conditioning on W keeps Z relevant unless W is not a descendant of Z
        let g = Admg::from_edges(&["Z", "W", "Y"], &[("Z", "W")], &[("W", "Y")]);
        let (y, z, w, none) = (var_set(["Y"]), var_set(["Z"]), var_set(["W"]), VarSet::new());
        // Z is an ancestor of W, so it is not cut; the collider at W is open.
        assert!(!rule3_applicable(&g, &y, &none, &z, &w).unwrap());
        assert!(rule3_applicable(&g, &y, &none, &z, &none).unwrap());
    }
}

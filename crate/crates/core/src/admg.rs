//! Acyclic directed mixed graphs.
//!
//! Directed edges `A -> B` encode direct causation, bidirected edges `A <-> B`
//! encode a latent common cause. All derived graphs (induced subgraphs,
//! mutilations) are built from a validated graph and stay valid.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of an observed variable. Ordering is lexicographic on the name and is
/// used for every tie-break in the crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(String);

impl VariableId {
    /// Validates a name: nonempty, ASCII letters, digits and underscores.
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        if Self::is_valid_name(&name) {
            Ok(VariableId(name))
        } else {
            Err(GraphError::InvalidName(name))
        }
    }

    pub fn is_valid_name(name: &str) -> bool {
        !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Panics on an invalid name; intended for literals in tests and examples.
impl From<&str> for VariableId {
    fn from(name: &str) -> Self {
        VariableId::new(name).expect("invalid variable name")
    }
}

pub type VarSet = BTreeSet<VariableId>;

/// Builds a [`VarSet`] from string literals.
pub fn var_set<'a>(names: impl IntoIterator<Item = &'a str>) -> VarSet {
    names.into_iter().map(VariableId::from).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("directed cycle: {}", fmt_cycle(.0))]
    Cycle(Vec<VariableId>),
    #[error("self-loop on {0}")]
    SelfLoop(VariableId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VariableId),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("invalid variable name {0:?}")]
    InvalidName(String),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
    #[error("sets overlap on {0}")]
    OverlappingSets(VariableId),
}

fn fmt_cycle(cycle: &[VariableId]) -> String {
    let names: Vec<&str> = cycle.iter().map(|v| v.as_str()).collect();
    names.join(" -> ")
}

/// Orders an unordered pair.
fn unordered(a: VariableId, b: VariableId) -> (VariableId, VariableId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "GraphSpec", try_from = "GraphSpec")]
pub struct Admg {
    vertices: VarSet,
    directed: BTreeSet<(VariableId, VariableId)>,
    bidirected: BTreeSet<(VariableId, VariableId)>,
}

/// Serialized form of a graph; validated on the way back in.
#[derive(Serialize, Deserialize)]
struct GraphSpec {
    vertices: VarSet,
    directed: Vec<(VariableId, VariableId)>,
    bidirected: Vec<(VariableId, VariableId)>,
}

impl From<Admg> for GraphSpec {
    fn from(g: Admg) -> Self {
        GraphSpec {
            vertices: g.vertices,
            directed: g.directed.into_iter().collect(),
            bidirected: g.bidirected.into_iter().collect(),
        }
    }
}

impl TryFrom<GraphSpec> for Admg {
    type Error = GraphError;

    fn try_from(s: GraphSpec) -> Result<Self, GraphError> {
        Admg::build(s.vertices, s.directed, s.bidirected)
    }
}

impl fmt::Debug for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Admg {")?;
        let mut first = true;
        for v in &self.vertices {
            if self.is_isolated(v) {
                write!(f, "{}{}", if first { " " } else { ", " }, v)?;
                first = false;
            }
        }
        for (a, b) in &self.directed {
            write!(f, "{}{} -> {}", if first { " " } else { ", " }, a, b)?;
            first = false;
        }
        for (a, b) in &self.bidirected {
            write!(f, "{}{} <-> {}", if first { " " } else { ", " }, a, b)?;
            first = false;
        }
        f.write_str(" }")
    }
}

impl Admg {
    /// Builds and validates a graph.
    pub fn build<V, D, B>(vertices: V, directed: D, bidirected: B) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = VariableId>,
        D: IntoIterator<Item = (VariableId, VariableId)>,
        B: IntoIterator<Item = (VariableId, VariableId)>,
    {
        let vertices: VarSet = vertices.into_iter().collect();
        let mut g = Admg {
            vertices,
            ..Default::default()
        };
        for (a, b) in directed {
            g.check_endpoints(&a, &b)?;
            if !g.directed.insert((a.clone(), b.clone())) {
                return Err(GraphError::DuplicateEdge(format!("{a} -> {b}")));
            }
        }
        for (a, b) in bidirected {
            g.check_endpoints(&a, &b)?;
            let pair = unordered(a, b);
            if !g.bidirected.insert(pair.clone()) {
                return Err(GraphError::DuplicateEdge(format!("{} <-> {}", pair.0, pair.1)));
            }
        }
        if let Some(cycle) = g.find_cycle() {
            return Err(GraphError::Cycle(cycle));
        }
        Ok(g)
    }

    /// Convenience constructor from string literals. Panics on invalid input.
    pub fn from_edges(vertices: &[&str], directed: &[(&str, &str)], bidirected: &[(&str, &str)]) -> Self {
        Self::build(
            vertices.iter().map(|&v| VariableId::from(v)),
            directed.iter().map(|&(a, b)| (a.into(), b.into())),
            bidirected.iter().map(|&(a, b)| (a.into(), b.into())),
        )
        .expect("invalid graph literal")
    }

    fn check_endpoints(&self, a: &VariableId, b: &VariableId) -> Result<(), GraphError> {
        for v in [a, b] {
            if !self.vertices.contains(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(a.clone()));
        }
        Ok(())
    }

    fn find_cycle(&self) -> Option<Vec<VariableId>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&VariableId, u8> = BTreeMap::new();
        let mut stack: Vec<&VariableId> = Vec::new();
        fn visit<'a>(
            g: &'a Admg,
            v: &'a VariableId,
            state: &mut BTreeMap<&'a VariableId, u8>,
            stack: &mut Vec<&'a VariableId>,
        ) -> Option<Vec<VariableId>> {
            state.insert(v, 1);
            stack.push(v);
            for c in g.children_iter(v) {
                match state.get(c).copied().unwrap_or(0) {
                    1 => {
                        let start = stack.iter().position(|&s| s == c).unwrap();
                        let mut cycle: Vec<VariableId> = stack[start..].iter().map(|&s| s.clone()).collect();
                        cycle.push(c.clone());
                        return Some(cycle);
                    }
                    0 => {
                        if let Some(cycle) = visit(g, c, state, stack) {
                            return Some(cycle);
                        }
                    }
                    _ => {}
                }
            }
            stack.pop();
            state.insert(v, 2);
            None
        }
        for v in &self.vertices {
            if state.get(v).copied().unwrap_or(0) == 0 {
                if let Some(cycle) = visit(self, v, &mut state, &mut stack) {
                    return Some(cycle);
                }
            }
        }
        None
    }

    pub fn vertices(&self) -> &VarSet {
        &self.vertices
    }

    pub fn directed_edges(&self) -> &BTreeSet<(VariableId, VariableId)> {
        &self.directed
    }

    /// Bidirected edges, each stored with its endpoints in lexicographic order.
    pub fn bidirected_edges(&self) -> &BTreeSet<(VariableId, VariableId)> {
        &self.bidirected
    }

    pub fn contains(&self, v: &VariableId) -> bool {
        self.vertices.contains(v)
    }

    pub fn has_directed(&self, a: &VariableId, b: &VariableId) -> bool {
        self.directed.contains(&(a.clone(), b.clone()))
    }

    pub fn has_bidirected(&self, a: &VariableId, b: &VariableId) -> bool {
        self.bidirected.contains(&unordered(a.clone(), b.clone()))
    }

    fn is_isolated(&self, v: &VariableId) -> bool {
        !self.directed.iter().any(|(a, b)| a == v || b == v) && !self.bidirected.iter().any(|(a, b)| a == v || b == v)
    }

    pub fn children_iter<'a>(&'a self, v: &'a VariableId) -> impl Iterator<Item = &'a VariableId> + 'a {
        self.directed.iter().filter(move |(a, _)| a == v).map(|(_, b)| b)
    }

    pub fn parents_iter<'a>(&'a self, v: &'a VariableId) -> impl Iterator<Item = &'a VariableId> + 'a {
        self.directed.iter().filter(move |(_, b)| b == v).map(|(a, _)| a)
    }

    /// Vertices sharing a bidirected edge with `v`.
    pub fn spouses_iter<'a>(&'a self, v: &'a VariableId) -> impl Iterator<Item = &'a VariableId> + 'a {
        self.bidirected.iter().filter_map(move |(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn parents(&self, v: &VariableId) -> VarSet {
        self.parents_iter(v).cloned().collect()
    }

    pub fn children(&self, v: &VariableId) -> VarSet {
        self.children_iter(v).cloned().collect()
    }

    pub(crate) fn check_subset(&self, s: &VarSet) -> Result<(), GraphError> {
        match s.iter().find(|v| !self.vertices.contains(*v)) {
            Some(v) => Err(GraphError::UnknownVertex(v.clone())),
            None => Ok(()),
        }
    }

    fn reach(&self, s: &VarSet, backward: bool) -> VarSet {
        let mut seen = s.clone();
        let mut queue: VecDeque<VariableId> = s.iter().cloned().collect();
        while let Some(v) = queue.pop_front() {
            for (a, b) in &self.directed {
                let (from, to) = if backward { (b, a) } else { (a, b) };
                if *from == v && seen.insert(to.clone()) {
                    queue.push_back(to.clone());
                }
            }
        }
        seen
    }

    /// Ancestors of `s`, including `s` itself.
    pub fn ancestors(&self, s: &VarSet) -> Result<VarSet, GraphError> {
        self.check_subset(s)?;
        Ok(self.reach(s, true))
    }

    /// Descendants of `s`, including `s` itself.
    pub fn descendants(&self, s: &VarSet) -> Result<VarSet, GraphError> {
        self.check_subset(s)?;
        Ok(self.reach(s, false))
    }

    /// Subgraph on `s` keeping every edge with both endpoints in `s`.
    pub fn induced(&self, s: &VarSet) -> Result<Admg, GraphError> {
        self.check_subset(s)?;
        Ok(self.filtered(s, |_, _| true, |_, _| true))
    }

    fn filtered(
        &self,
        keep: &VarSet,
        directed: impl Fn(&VariableId, &VariableId) -> bool,
        bidirected: impl Fn(&VariableId, &VariableId) -> bool,
    ) -> Admg {
        Admg {
            vertices: keep.clone(),
            directed: self
                .directed
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b) && directed(a, b))
                .cloned()
                .collect(),
            bidirected: self
                .bidirected
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b) && bidirected(a, b))
                .cloned()
                .collect(),
        }
    }

    /// Removes edges pointing into `overline` (directed heads and both ends of
    /// bidirected arcs) and directed edges leaving `underline`.
    pub fn mutilate(&self, overline: &VarSet, underline: &VarSet) -> Result<Admg, GraphError> {
        self.check_subset(overline)?;
        self.check_subset(underline)?;
        Ok(self.filtered(
            &self.vertices,
            |a, b| !overline.contains(b) && !underline.contains(a),
            |a, b| !overline.contains(a) && !overline.contains(b),
        ))
    }

    /// Deletes the vertices in `s` with all their edges.
    pub fn without(&self, s: &VarSet) -> Admg {
        let keep: VarSet = self.vertices.difference(s).cloned().collect();
        self.filtered(&keep, |_, _| true, |_, _| true)
    }

    /// Connected components of the bidirected part, ordered by smallest member.
    pub fn c_components(&self) -> Vec<VarSet> {
        let mut seen = VarSet::new();
        let mut out = Vec::new();
        for v in &self.vertices {
            if seen.contains(v) {
                continue;
            }
            let mut comp = VarSet::new();
            let mut queue = VecDeque::from([v.clone()]);
            comp.insert(v.clone());
            while let Some(u) = queue.pop_front() {
                for w in self.spouses_iter(&u) {
                    if comp.insert(w.clone()) {
                        queue.push_back(w.clone());
                    }
                }
            }
            seen.extend(comp.iter().cloned());
            out.push(comp);
        }
        out
    }

    /// Kahn's algorithm, always emitting the lexicographically smallest ready vertex.
    pub fn topological_order(&self) -> Vec<VariableId> {
        let mut indegree: BTreeMap<&VariableId, usize> = self.vertices.iter().map(|v| (v, 0)).collect();
        for (_, b) in &self.directed {
            *indegree.get_mut(b).unwrap() += 1;
        }
        let mut ready: BTreeSet<&VariableId> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(v) = ready.pop_first() {
            order.push(v.clone());
            for c in self.children_iter(v) {
                let d = indegree.get_mut(c).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(c);
                }
            }
        }
        order
    }

    /// Vertices without directed children.
    pub fn root_set(&self) -> VarSet {
        self.vertices
            .iter()
            .filter(|v| self.children_iter(v).next().is_none())
            .cloned()
            .collect()
    }

    /// A `r`-rooted C-forest: one C-component, at most one child per vertex,
    /// and `r` is exactly the set of sinks.
    pub fn is_c_forest(&self, r: &VarSet) -> Result<bool, GraphError> {
        self.check_subset(r)?;
        if self.vertices.is_empty() || self.c_components().len() != 1 {
            return Ok(false);
        }
        if self.vertices.iter().any(|v| self.children_iter(v).nth(1).is_some()) {
            return Ok(false);
        }
        Ok(self.root_set() == *r)
    }

    /// Checks that `hedge` is a hedge for `P_x(y)` in this graph.
    ///
    /// The root condition is read as `R ⊆ An(Y)` in the graph with edges into
    /// `x` removed (non-strict inclusion).
    pub fn validate_hedge(&self, hedge: &Hedge, x: &VarSet, y: &VarSet) -> Result<bool, GraphError> {
        self.check_subset(x)?;
        self.check_subset(y)?;
        let f = hedge.forest_f(self)?;
        let fp = hedge.forest_fprime(self)?;
        if !fp.vertices.is_subset(&f.vertices)
            || !fp.directed.is_subset(&f.directed)
            || !fp.bidirected.is_subset(&f.bidirected)
        {
            return Err(GraphError::MalformedWitness("F' is not contained in F".into()));
        }
        if !hedge.r.is_subset(&fp.vertices) {
            return Ok(false);
        }
        if !f.is_c_forest(&hedge.r)? || !fp.is_c_forest(&hedge.r)? {
            return Ok(false);
        }
        if f.vertices.is_disjoint(x) || !fp.vertices.is_disjoint(x) {
            return Ok(false);
        }
        let an_y = self.mutilate(x, &VarSet::new())?.ancestors(y)?;
        Ok(hedge.r.is_subset(&an_y))
    }
}

/// A pair of nested C-forests witnessing non-identifiability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hedge {
    pub f_vertices: VarSet,
    pub f_directed: BTreeSet<(VariableId, VariableId)>,
    pub f_bidirected: BTreeSet<(VariableId, VariableId)>,
    pub fprime_vertices: VarSet,
    pub fprime_directed: BTreeSet<(VariableId, VariableId)>,
    pub fprime_bidirected: BTreeSet<(VariableId, VariableId)>,
    pub r: VarSet,
}

impl Hedge {
    fn forest(
        g: &Admg,
        vertices: &VarSet,
        directed: &BTreeSet<(VariableId, VariableId)>,
        bidirected: &BTreeSet<(VariableId, VariableId)>,
        label: &str,
    ) -> Result<Admg, GraphError> {
        g.check_subset(vertices)
            .map_err(|e| GraphError::MalformedWitness(format!("{label}: {e}")))?;
        for (a, b) in directed {
            if !g.has_directed(a, b) || !vertices.contains(a) || !vertices.contains(b) {
                return Err(GraphError::MalformedWitness(format!("{label}: edge {a} -> {b} not available")));
            }
        }
        let mut bi = BTreeSet::new();
        for (a, b) in bidirected {
            if !g.has_bidirected(a, b) || !vertices.contains(a) || !vertices.contains(b) {
                return Err(GraphError::MalformedWitness(format!("{label}: edge {a} <-> {b} not available")));
            }
            bi.insert(unordered(a.clone(), b.clone()));
        }
        Ok(Admg {
            vertices: vertices.clone(),
            directed: directed.clone(),
            bidirected: bi,
        })
    }

    /// F as an edge subgraph of `g`.
    pub fn forest_f(&self, g: &Admg) -> Result<Admg, GraphError> {
        Self::forest(g, &self.f_vertices, &self.f_directed, &self.f_bidirected, "F")
    }

    /// F' as an edge subgraph of `g`.
    pub fn forest_fprime(&self, g: &Admg) -> Result<Admg, GraphError> {
        Self::forest(g, &self.fprime_vertices, &self.fprime_directed, &self.fprime_bidirected, "F'")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g_a() -> Admg {
        Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[("Z", "X"), ("Z", "Y")])
    }

    fn chain() -> Admg {
        Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[])
    }

    fn bow() -> Admg {
        Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[("X", "Y")])
    }

    #[test]
    fn build_rejects_bad_input() {
        let err = Admg::build(var_set(["X", "Y"]), vec![("X".into(), "Y".into()), ("Y".into(), "X".into())], vec![]);
        assert!(matches!(err, Err(GraphError::Cycle(_))));
        let err = Admg::build(var_set(["X"]), vec![], vec![("X".into(), "X".into())]);
        assert_eq!(err, Err(GraphError::SelfLoop("X".into())));
        let err = Admg::build(var_set(["X"]), vec![("X".into(), "Q".into())], vec![]);
        assert_eq!(err, Err(GraphError::UnknownVertex("Q".into())));
        let err = Admg::build(
            var_set(["X", "Y"]),
            vec![],
            vec![("X".into(), "Y".into()), ("Y".into(), "X".into())],
        );
        assert!(matches!(err, Err(GraphError::DuplicateEdge(_))));
        assert!(VariableId::new("a-b").is_err());
        assert!(VariableId::new("").is_err());
    }

    #[test]
    fn cycle_report_is_closed_path() {
        let err = Admg::build(
            var_set(["A", "B", "C"]),
            vec![("A".into(), "B".into()), ("B".into(), "C".into()), ("C".into(), "A".into())],
            vec![],
        )
        .unwrap_err();
        let GraphError::Cycle(cycle) = err else { panic!() };
        assert_eq!(cycle.first(), cycle.last());
        assert_eq!(cycle.len(), 4);
    }

    #[test]
    fn ancestors_and_descendants() {
        assert_eq!(chain().ancestors(&var_set(["Y"])).unwrap(), var_set(["X", "Y"]));
        assert_eq!(chain().descendants(&var_set(["X"])).unwrap(), var_set(["X", "Y"]));
        assert_eq!(chain().descendants(&var_set(["Y"])).unwrap(), var_set(["Y"]));
        assert_eq!(g_a().ancestors(&var_set(["Y"])).unwrap(), var_set(["X", "Y", "Z"]));
        assert_eq!(g_a().descendants(&var_set(["Z"])).unwrap(), var_set(["X", "Y", "Z"]));
        let all = g_a().vertices().clone();
        assert_eq!(g_a().ancestors(&all).unwrap(), all);
        assert_eq!(chain().ancestors(&var_set(["Q"])), Err(GraphError::UnknownVertex("Q".into())));
    }

    #[test]
    fn induced_subgraphs() {
        let sub = g_a().induced(&var_set(["X", "Y"])).unwrap();
        assert_eq!(sub, Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[]));
        assert_eq!(g_a().induced(g_a().vertices()).unwrap(), g_a());
        assert!(g_a().induced(&VarSet::new()).unwrap().vertices().is_empty());
    }

    #[test]
    fn mutilation() {
        let m = g_a().mutilate(&var_set(["X", "Z"]), &VarSet::new()).unwrap();
        assert_eq!(m, Admg::from_edges(&["X", "Y", "Z"], &[("X", "Y")], &[]));
        assert_eq!(g_a().mutilate(&VarSet::new(), &VarSet::new()).unwrap(), g_a());
        let m = g_a().mutilate(&var_set(["Z"]), &var_set(["X"])).unwrap();
        assert_eq!(m, Admg::from_edges(&["X", "Y", "Z"], &[("Z", "X")], &[]));
    }

    #[test]
    fn components_order_and_roots() {
        assert_eq!(g_a().c_components(), vec![var_set(["X", "Y", "Z"])]);
        assert_eq!(chain().c_components(), vec![var_set(["X"]), var_set(["Y"])]);
        assert_eq!(bow().c_components(), vec![var_set(["X", "Y"])]);
        assert_eq!(chain().topological_order(), vec!["X".into(), "Y".into()] as Vec<VariableId>);
        assert_eq!(g_a().topological_order(), vec!["Z".into(), "X".into(), "Y".into()] as Vec<VariableId>);
        let edgeless = Admg::from_edges(&["B", "A"], &[], &[]);
        assert_eq!(edgeless.topological_order(), vec!["A".into(), "B".into()] as Vec<VariableId>);
        assert_eq!(chain().root_set(), var_set(["Y"]));
        assert_eq!(edgeless.root_set(), var_set(["A", "B"]));
        assert_eq!(g_a().root_set(), var_set(["Y"]));
    }

    #[test]
    fn c_forest_clauses() {
        assert!(bow().is_c_forest(&var_set(["Y"])).unwrap());
        let single = Admg::from_edges(&["Y"], &[], &[]);
        assert!(single.is_c_forest(&var_set(["Y"])).unwrap());
        assert!(!chain().is_c_forest(&var_set(["Y"])).unwrap());
        assert!(!bow().is_c_forest(&var_set(["X", "Y"])).unwrap());
        let two_children = Admg::from_edges(&["X", "A", "B"], &[("X", "A"), ("X", "B")], &[("X", "A"), ("X", "B")]);
        assert!(!two_children.is_c_forest(&var_set(["A", "B"])).unwrap());
    }

    fn bow_hedge(fprime: &[&str]) -> Hedge {
        let fp = var_set(fprime.iter().copied());
        let fprime_bidirected = if fp.len() == 2 { [("X".into(), "Y".into())].into() } else { BTreeSet::new() };
        let fprime_directed = if fp.len() == 2 { [("X".into(), "Y".into())].into() } else { BTreeSet::new() };
        Hedge {
            f_vertices: var_set(["X", "Y"]),
            f_directed: [("X".into(), "Y".into())].into(),
            f_bidirected: [("X".into(), "Y".into())].into(),
            fprime_vertices: fp,
            fprime_directed,
            fprime_bidirected,
            r: var_set(["Y"]),
        }
    }

    #[test]
    fn hedge_validation() {
        let (x, y) = (var_set(["X"]), var_set(["Y"]));
        assert!(bow().validate_hedge(&bow_hedge(&["Y"]), &x, &y).unwrap());
        assert!(!bow().validate_hedge(&bow_hedge(&["X", "Y"]), &x, &y).unwrap());
        // the bow's bidirected arc is missing from the chain
        assert!(matches!(
            chain().validate_hedge(&bow_hedge(&["Y"]), &x, &y),
            Err(GraphError::MalformedWitness(_))
        ));
        let mut bad = bow_hedge(&["Y"]);
        bad.fprime_vertices = var_set(["Y", "X"]);
        bad.f_vertices = var_set(["Y"]);
        bad.f_directed.clear();
        bad.f_bidirected.clear();
        assert!(matches!(bow().validate_hedge(&bad, &x, &y), Err(GraphError::MalformedWitness(_))));
    }
}

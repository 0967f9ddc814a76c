//! Identification of `P_x(y)`: the classic ID recursion, its extension to
//! surrogate experiments (ID^z), hedge extraction on failure, and the
//! subset-enumeration criterion used to cross-check ID^z.
//!
//! Both recursions thread a symbolic description of the "current P" ([`Dist`])
//! that is only turned into an [`Estimand`] when a term is emitted. This lets
//! a later recursion step switch the experimental regime of a distribution that
//! was built earlier.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

use crate::admg::{Admg, GraphError, Hedge, VarSet, VariableId};
use crate::estimand::{Binding, Estimand, Value};
use crate::table::Assignment;

/// Values attached to a set of variables.
pub type Bindings = BTreeMap<VariableId, Value>;

/// Surrogate sets with more members than this are rejected by [`theorem3_zid`].
pub const SUBSET_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the outcome set is empty")]
    EmptyOutcome,
    #[error("surrogate set has {0} members; at most {SUBSET_LIMIT} are enumerated")]
    SubsetLimit(usize),
    #[error("classic ID takes no surrogates")]
    SurrogatesGiven,
}

/// The effect `P_x(y)` to identify, with surrogate experiments on `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub y: Bindings,
    pub x: Bindings,
    pub z: VarSet,
}

fn own_refs(vars: &VarSet) -> Bindings {
    vars.iter()
        .map(|v| (v.clone(), Value::symbol(v.as_str())))
        .collect()
}

impl Query {
    /// Outcome and treatment values are left symbolic: every variable refers
    /// to a free symbol of its own name.
    pub fn new(y: &VarSet, x: &VarSet, z: &VarSet) -> Self {
        Query {
            y: own_refs(y),
            x: own_refs(x),
            z: z.clone(),
        }
    }

    pub fn from_names<'a>(
        y: impl IntoIterator<Item = &'a str>,
        x: impl IntoIterator<Item = &'a str>,
        z: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Self::new(&crate::var_set(y), &crate::var_set(x), &crate::var_set(z))
    }

    /// Concrete outcome and treatment values.
    pub fn with_values(y: &Assignment, x: &Assignment, z: &VarSet) -> Self {
        let conv = |a: &Assignment| a.iter().map(|(k, &v)| (k.clone(), Value::constant(v))).collect();
        Query {
            y: conv(y),
            x: conv(x),
            z: z.clone(),
        }
    }

    pub fn y_vars(&self) -> VarSet {
        self.y.keys().cloned().collect()
    }

    pub fn x_vars(&self) -> VarSet {
        self.x.keys().cloned().collect()
    }

    pub fn without_surrogates(&self) -> Self {
        Query {
            z: VarSet::new(),
            ..self.clone()
        }
    }

    pub fn validate(&self, g: &Admg) -> Result<(), QueryError> {
        if self.y.is_empty() {
            return Err(QueryError::EmptyOutcome);
        }
        let (y, x) = (self.y_vars(), self.x_vars());
        for s in [&y, &x, &self.z] {
            for v in s {
                if !g.contains(v) {
                    return Err(GraphError::UnknownVertex(v.clone()).into());
                }
            }
        }
        for (a, b) in [(&y, &x), (&y, &self.z), (&x, &self.z)] {
            if let Some(v) = a.intersection(b).next() {
                return Err(GraphError::OverlappingSets(v.clone()).into());
            }
        }
        Ok(())
    }
}

/// Surrogate interventions active in a recursive call, introduced by
/// non-ancestor pruning (`i_set`) and by C-component decomposition (`j_set`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CallContext {
    pub i_set: Bindings,
    pub j_set: Bindings,
}

impl CallContext {
    fn active(&self) -> Bindings {
        let mut a = self.i_set.clone();
        a.extend(self.j_set.iter().map(|(k, v)| (k.clone(), v.clone())));
        a
    }

    pub fn variables(&self) -> VarSet {
        self.i_set.keys().chain(self.j_set.keys()).cloned().collect()
    }
}

/// The call in which the recursion gave up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fail {
    pub local_graph: Admg,
    pub s_component: VarSet,
    pub context: CallContext,
    pub x: VarSet,
    pub y: VarSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdResult {
    Identified(Estimand),
    Fail(Fail),
}

impl IdResult {
    pub fn is_identified(&self) -> bool {
        matches!(self, IdResult::Identified(_))
    }

    pub fn estimand(&self) -> Option<&Estimand> {
        match self {
            IdResult::Identified(e) => Some(e),
            IdResult::Fail(_) => None,
        }
    }

    pub fn fail(&self) -> Option<&Fail> {
        match self {
            IdResult::Identified(_) => None,
            IdResult::Fail(f) => Some(f),
        }
    }
}

/// The distribution a recursive call works with, over `domain`.
#[derive(Debug)]
enum Dist {
    /// The input distribution, read under whatever regime is active.
    Joint { domain: VarSet },
    Marginal { inner: Rc<Dist>, keep: VarSet },
    /// Product over `component` of the conditionals of `inner`, with the
    /// treatment values outside the component held at `fixed`.
    Factorized {
        inner: Rc<Dist>,
        component: VarSet,
        fixed: Bindings,
    },
}

impl Dist {
    fn domain(&self) -> &VarSet {
        match self {
            Dist::Joint { domain } => domain,
            Dist::Marginal { keep, .. } => keep,
            Dist::Factorized { component, .. } => component,
        }
    }

    fn marginal(self: &Rc<Self>, keep: VarSet) -> Rc<Dist> {
        match &**self {
            Dist::Marginal { inner, .. } => Rc::new(Dist::Marginal {
                inner: inner.clone(),
                keep,
            }),
            _ => Rc::new(Dist::Marginal {
                inner: self.clone(),
                keep,
            }),
        }
    }
}

/// Turns [`Dist`] recipes into estimands under a fixed regime.
struct Materializer<'a> {
    rank: &'a HashMap<VariableId, usize>,
    regime: &'a Bindings,
}

fn fresh(var: &VariableId, scope: &mut Vec<String>) -> String {
    let mut name = var.as_str().to_string();
    while scope.contains(&name) {
        name.push('\'');
    }
    scope.push(name.clone());
    name
}

impl Materializer<'_> {
    fn ordered(&self, s: &VarSet) -> Vec<VariableId> {
        let mut v: Vec<VariableId> = s.iter().cloned().collect();
        v.sort_by_key(|x| self.rank[x]);
        v
    }

    fn bind(&self, vars: &[VariableId], vals: &Bindings) -> Vec<Binding> {
        vars.iter()
            .map(|v| Binding::new(v.clone(), vals.get(v).cloned().expect("value bound for every variable")))
            .collect()
    }

    fn regime_bindings(&self) -> Vec<Binding> {
        self.regime.iter().map(|(k, v)| Binding::new(k.clone(), v.clone())).collect()
    }

    fn free(&self, s: &VarSet) -> VarSet {
        s.iter().filter(|v| !self.regime.contains_key(*v)).cloned().collect()
    }

    /// Non-regime members of `within` that precede `v`.
    fn preds(&self, v: &VariableId, within: &VarSet) -> VarSet {
        let r = self.rank[v];
        within
            .iter()
            .filter(|u| self.rank[*u] < r && !self.regime.contains_key(*u))
            .cloned()
            .collect()
    }

    /// Marginal of `dist` over `keep` (non-regime members of its domain).
    fn marg(&self, dist: &Dist, keep: &VarSet, vals: &Bindings, scope: &[String]) -> Estimand {
        match dist {
            Dist::Joint { .. } => Estimand::term(self.bind(&self.ordered(keep), vals), vec![], self.regime_bindings()),
            Dist::Marginal { inner, .. } => self.marg(inner, keep, vals, scope),
            Dist::Factorized { inner, component, fixed } => {
                let mut order = self.ordered(&self.free(component));
                // trailing summed factors integrate to one
                while order.last().is_some_and(|v| !keep.contains(v)) {
                    order.pop();
                }
                let mut scope = scope.to_vec();
                let mut vals = vals.clone();
                vals.extend(fixed.iter().map(|(k, v)| (k.clone(), v.clone())));
                let mut bound = Vec::new();
                for v in order.iter().filter(|v| !keep.contains(*v)) {
                    let s = fresh(v, &mut scope);
                    vals.insert(v.clone(), Value::symbol(s.clone()));
                    bound.push(s);
                }
                let factors = order
                    .iter()
                    .map(|v| self.cond(inner, v, &self.preds(v, inner.domain()), &vals, &scope))
                    .collect();
                Estimand::sum(bound, Estimand::product(factors)).normalize()
            }
        }
    }

    /// Conditional of `v` given `given` under `dist`.
    fn cond(&self, dist: &Dist, v: &VariableId, given: &VarSet, vals: &Bindings, scope: &[String]) -> Estimand {
        match dist {
            Dist::Joint { .. } => Estimand::term(
                self.bind(std::slice::from_ref(v), vals),
                self.bind(&self.ordered(given), vals),
                self.regime_bindings(),
            ),
            Dist::Marginal { inner, .. } => self.cond(inner, v, given, vals, scope),
            Dist::Factorized { inner, component, fixed } if *given == self.preds(v, component) => {
                let mut vals = vals.clone();
                vals.extend(fixed.iter().map(|(k, v)| (k.clone(), v.clone())));
                self.cond(inner, v, &self.preds(v, inner.domain()), &vals, scope)
            }
            Dist::Factorized { .. } => {
                let mut joint = given.clone();
                joint.insert(v.clone());
                let num = self.marg(dist, &joint, vals, scope);
                if given.is_empty() {
                    num
                } else {
                    Estimand::ratio(num, self.marg(dist, given, vals, scope))
                }
            }
        }
    }
}

/// State shared by every call of one run.
struct Engine {
    rank: HashMap<VariableId, usize>,
}

/// Per-call arguments of the recursion.
#[derive(Clone)]
struct Call {
    y: Bindings,
    x: Bindings,
    z: VarSet,
    ctx: CallContext,
    dist: Rc<Dist>,
    g: Admg,
    scope: Vec<String>,
}

fn keys(b: &Bindings) -> VarSet {
    b.keys().cloned().collect()
}

fn minus(a: &VarSet, b: &VarSet) -> VarSet {
    a.difference(b).cloned().collect()
}

fn union(a: &VarSet, b: &VarSet) -> VarSet {
    a.union(b).cloned().collect()
}

fn restrict(b: &Bindings, s: &VarSet) -> Bindings {
    b.iter()
        .filter(|(k, _)| s.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

fn zeros(s: &VarSet) -> Bindings {
    s.iter().map(|v| (v.clone(), Value::constant(0))).collect()
}

impl Engine {
    fn new(order: &[VariableId]) -> Self {
        Engine {
            rank: order.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect(),
        }
    }

    fn materializer<'a>(&'a self, regime: &'a Bindings) -> Materializer<'a> {
        Materializer { rank: &self.rank, regime }
    }

    fn entry(&self, q: &Query, g: &Admg) -> Call {
        let mut scope: Vec<String> = Vec::new();
        for b in q.y.values().chain(q.x.values()) {
            if let Value::Ref { symbol } = b {
                scope.push(symbol.clone());
            }
        }
        Call {
            y: q.y.clone(),
            x: q.x.clone(),
            z: q.z.clone(),
            ctx: CallContext::default(),
            dist: Rc::new(Dist::Joint {
                domain: g.vertices().clone(),
            }),
            g: g.clone(),
            scope,
        }
    }

    /// Line 1: no treatment left.
    fn marginal_of_y(&self, c: &Call) -> Estimand {
        let regime = c.ctx.active();
        let m = self.materializer(&regime);
        m.marg(&c.dist, &keys(&c.y), &c.y, &c.scope)
    }

    /// Line 6: `S` is a C-component of the local graph.
    fn factor_product(&self, c: &Call, s: &VarSet) -> Estimand {
        let regime = c.ctx.active();
        let m = self.materializer(&regime);
        let mut scope = c.scope.clone();
        let mut vals = c.y.clone();
        vals.extend(c.x.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut bound = Vec::new();
        for v in m.ordered(&minus(s, &keys(&c.y))) {
            let sym = fresh(&v, &mut scope);
            vals.insert(v, Value::symbol(sym.clone()));
            bound.push(sym);
        }
        let factors = m
            .ordered(s)
            .iter()
            .map(|v| m.cond(&c.dist, v, &m.preds(v, c.g.vertices()), &vals, &scope))
            .collect();
        Estimand::sum(bound, Estimand::product(factors))
    }

    fn fail(c: &Call, s: VarSet) -> IdResult {
        IdResult::Fail(Fail {
            local_graph: c.g.clone(),
            s_component: s,
            context: c.ctx.clone(),
            x: keys(&c.x),
            y: keys(&c.y),
        })
    }

    /// Line 7: restrict to the component `s_prime` that contains `S`.
    fn descend(&self, c: &Call, s_prime: &VarSet, active: &VarSet) -> Result<Call, GraphError> {
        let outside = minus(&minus(c.g.vertices(), s_prime), active);
        Ok(Call {
            y: c.y.clone(),
            x: restrict(&c.x, s_prime),
            z: c.z.clone(),
            ctx: c.ctx.clone(),
            dist: Rc::new(Dist::Factorized {
                inner: c.dist.clone(),
                component: s_prime.clone(),
                fixed: restrict(&c.x, &outside),
            }),
            g: c.g.induced(s_prime)?,
            scope: c.scope.clone(),
        })
    }

    /// Line 2: drop vertices that are not ancestors of `Y`.
    fn restrict_to_ancestors(&self, c: &Call, an: &VarSet) -> Result<Option<Call>, GraphError> {
        if an == c.g.vertices() {
            return Ok(None);
        }
        Ok(Some(Call {
            x: restrict(&c.x, an),
            dist: c.dist.marginal(an.clone()),
            g: c.g.induced(an)?,
            ..c.clone()
        }))
    }

    /// Shared sum for line 4: the summed variables get fresh symbols that the
    /// subcalls read their values from.
    fn decomposition_sum(&self, c: &Call, summed: &VarSet) -> (Vec<String>, Bindings, Vec<String>) {
        let mut scope = c.scope.clone();
        let mut vals = c.y.clone();
        vals.extend(c.x.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut bound = Vec::new();
        for v in self.materializer(&Bindings::new()).ordered(summed) {
            let sym = fresh(&v, &mut scope);
            vals.insert(v, Value::symbol(sym.clone()));
            bound.push(sym);
        }
        (bound, vals, scope)
    }

    fn idz(&self, c: Call) -> Result<IdResult, GraphError> {
        let v = c.g.vertices().clone();
        let (y, x) = (keys(&c.y), keys(&c.x));
        // regime variables outside the local graph no longer constrain it
        let active: VarSet = c.ctx.variables().intersection(&v).cloned().collect();
        // line 1
        if x.is_empty() {
            return Ok(IdResult::Identified(self.marginal_of_y(&c)));
        }
        // line 2
        let an = c.g.ancestors(&y)?;
        if let Some(next) = self.restrict_to_ancestors(&c, &an)? {
            return self.idz(next);
        }
        // line 3
        let xa = union(&x, &active);
        let an_cut = c.g.mutilate(&xa, &VarSet::new())?.ancestors(&y)?;
        let w_all = minus(&minus(&v, &an_cut), &xa);
        if !w_all.is_empty() {
            let z_w: VarSet = w_all.intersection(&c.z).cloned().collect();
            let w = minus(&w_all, &z_w);
            let mut next = c.clone();
            next.x.extend(zeros(&w));
            next.ctx.i_set.extend(zeros(&z_w));
            next.z = minus(&c.z, &z_w);
            return self.idz(next);
        }
        // line 4
        let comps = c.g.without(&xa).c_components();
        if comps.len() > 1 {
            let summed = minus(&v, &union(&y, &xa));
            let (bound, vals, scope) = self.decomposition_sum(&c, &summed);
            let mut factors = Vec::with_capacity(comps.len());
            for s_i in &comps {
                let rest = minus(&v, s_i);
                let to_j: VarSet = c.z.intersection(&rest).cloned().collect();
                let mut ctx = c.ctx.clone();
                ctx.j_set.extend(restrict(&vals, &to_j));
                let sub = Call {
                    y: restrict(&vals, s_i),
                    x: restrict(&vals, &minus(&minus(&rest, &c.z), &active)),
                    z: minus(&c.z, &rest),
                    ctx,
                    dist: c.dist.clone(),
                    g: c.g.clone(),
                    scope: scope.clone(),
                };
                match self.idz(sub)? {
                    IdResult::Identified(e) => factors.push(e),
                    fail => return Ok(fail),
                }
            }
            return Ok(IdResult::Identified(Estimand::sum(bound, Estimand::product(factors))));
        }
        let s = comps.into_iter().next().expect("outcome vertices survive");
        let g_eff = c.g.mutilate(&active, &VarSet::new())?;
        let eff_comps = g_eff.c_components();
        // line 5
        if eff_comps.len() == 1 {
            return Ok(Self::fail(&c, s));
        }
        // line 6
        if eff_comps.contains(&s) {
            return Ok(IdResult::Identified(self.factor_product(&c, &s)));
        }
        // line 7
        let s_prime = eff_comps
            .into_iter()
            .find(|comp| s.is_subset(comp))
            .expect("S lies inside one component of the local graph");
        self.idz(self.descend(&c, &s_prime, &active)?)
    }

    fn id(&self, c: Call) -> Result<IdResult, GraphError> {
        let v = c.g.vertices().clone();
        let (y, x) = (keys(&c.y), keys(&c.x));
        if x.is_empty() {
            return Ok(IdResult::Identified(self.marginal_of_y(&c)));
        }
        let an = c.g.ancestors(&y)?;
        if let Some(next) = self.restrict_to_ancestors(&c, &an)? {
            return self.id(next);
        }
        let an_cut = c.g.mutilate(&x, &VarSet::new())?.ancestors(&y)?;
        let w = minus(&minus(&v, &an_cut), &x);
        if !w.is_empty() {
            let mut next = c;
            next.x.extend(zeros(&w));
            return self.id(next);
        }
        let comps = c.g.without(&x).c_components();
        if comps.len() > 1 {
            let (bound, vals, scope) = self.decomposition_sum(&c, &minus(&v, &union(&y, &x)));
            let mut factors = Vec::with_capacity(comps.len());
            for s_i in &comps {
                let sub = Call {
                    y: restrict(&vals, s_i),
                    x: restrict(&vals, &minus(&v, s_i)),
                    scope: scope.clone(),
                    ..c.clone()
                };
                match self.id(sub)? {
                    IdResult::Identified(e) => factors.push(e),
                    fail => return Ok(fail),
                }
            }
            return Ok(IdResult::Identified(Estimand::sum(bound, Estimand::product(factors))));
        }
        let s = comps.into_iter().next().expect("outcome vertices survive");
        let all = c.g.c_components();
        if all.len() == 1 {
            return Ok(Self::fail(&c, s));
        }
        if all.contains(&s) {
            return Ok(IdResult::Identified(self.factor_product(&c, &s)));
        }
        let s_prime = all.into_iter().find(|comp| s.is_subset(comp)).expect("S lies inside one component");
        self.id(self.descend(&c, &s_prime, &VarSet::new())?)
    }
}

/// Identifies `P_x(y)` from the observational distribution alone.
pub fn id(q: &Query, g: &Admg) -> Result<IdResult, QueryError> {
    if !q.z.is_empty() {
        return Err(QueryError::SurrogatesGiven);
    }
    q.validate(g)?;
    let engine = Engine::new(&g.topological_order());
    Ok(engine.id(engine.entry(q, g))?)
}

/// Identifies `P_x(y)` from the observational distribution plus experiments
/// on every subset of `q.z`.
pub fn idz(q: &Query, g: &Admg) -> Result<IdResult, QueryError> {
    idz_with_order(q, g, &g.topological_order())
}

/// [`idz`] with an explicit topological order for the emitted conditionals.
/// Panics if `order` is not a topological order of `g`.
pub fn idz_with_order(q: &Query, g: &Admg, order: &[VariableId]) -> Result<IdResult, QueryError> {
    q.validate(g)?;
    assert!(is_topological(g, order), "not a topological order of the graph");
    let engine = Engine::new(order);
    Ok(engine.idz(engine.entry(q, g))?)
}

pub fn is_topological(g: &Admg, order: &[VariableId]) -> bool {
    let rank: HashMap<&VariableId, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    rank.len() == g.vertices().len()
        && order.len() == rank.len()
        && g.vertices().iter().all(|v| rank.contains_key(v))
        && g.directed_edges().iter().all(|(a, b)| rank[a] < rank[b])
}

/// One child per vertex of `from`, chosen so every vertex reaches `targets`
/// through the chosen edges of `g`. Ties go to the smallest child.
fn spanning_children(g: &Admg, from: &VarSet, targets: &VarSet) -> Vec<(VariableId, VariableId)> {
    let mut reached = targets.clone();
    let mut queue: VecDeque<VariableId> = targets.iter().cloned().collect();
    let mut edges = Vec::new();
    while let Some(t) = queue.pop_front() {
        for p in g.parents(&t) {
            if from.contains(&p) && !reached.contains(&p) {
                reached.insert(p.clone());
                edges.push((p.clone(), t.clone()));
                queue.push_back(p);
            }
        }
    }
    edges
}

/// Builds the hedge witnessing a failed call.
///
/// `R` is the set of sinks of the failing component `S`. Every other vertex
/// of `S` keeps one edge toward `R`, every treatment vertex keeps one edge
/// toward `S`, and all bidirected edges of the local graph are retained.
pub fn extract_hedge(fail: &Fail) -> Result<Hedge, GraphError> {
    let g = &fail.local_graph;
    if g.c_components().len() != 1 {
        return Err(GraphError::MalformedWitness("local graph is not a single C-component".into()));
    }
    let s = &fail.s_component;
    let gs = g.induced(s)?;
    let r = gs.root_set();
    let mut fprime_directed = std::collections::BTreeSet::new();
    for e in spanning_children(&gs, s, &r) {
        fprime_directed.insert(e);
    }
    let mut f_directed = fprime_directed.clone();
    let outside = minus(g.vertices(), s);
    for e in spanning_children(g, &outside, s) {
        f_directed.insert(e);
    }
    Ok(Hedge {
        f_vertices: g.vertices().clone(),
        f_directed,
        f_bidirected: g.bidirected_edges().clone(),
        fprime_vertices: s.clone(),
        fprime_directed,
        fprime_bidirected: gs.bidirected_edges().clone(),
        r,
    })
}

/// True iff every directed path from `zprime` to `y` passes through `x`.
pub fn intercepts(g: &Admg, x: &VarSet, zprime: &VarSet, y: &VarSet) -> Result<bool, GraphError> {
    g.check_subset(x)?;
    g.check_subset(zprime)?;
    g.check_subset(y)?;
    let cut = g.without(x);
    let start = minus(zprime, x);
    let reach = cut.descendants(&start)?;
    Ok(reach.is_disjoint(y))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem3Verdict {
    pub zid: bool,
    pub witness: Option<VarSet>,
    /// Surrogate subsets examined before answering.
    pub subsets_checked: usize,
}

fn subsets_by_size(z: &VarSet) -> Vec<VarSet> {
    let items: Vec<&VariableId> = z.iter().collect();
    let mut all: Vec<VarSet> = (0u32..(1u32 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, v)| (*v).clone())
                .collect()
        })
        .collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    all
}

/// zID by subset search: identifiable in `G`, or some `Z' ⊆ z` is intercepted
/// by `x` and makes the effect identifiable once edges into `Z'` are cut.
pub fn theorem3_zid(q: &Query, g: &Admg) -> Result<Theorem3Verdict, QueryError> {
    if q.z.len() > SUBSET_LIMIT {
        return Err(QueryError::SubsetLimit(q.z.len()));
    }
    q.validate(g)?;
    let base = q.without_surrogates();
    if id(&base, g)?.is_identified() {
        return Ok(Theorem3Verdict {
            zid: true,
            witness: Some(VarSet::new()),
            subsets_checked: 0,
        });
    }
    let (x, y) = (q.x_vars(), q.y_vars());
    let mut checked = 0;
    for zp in subsets_by_size(&q.z) {
        if zp.is_empty() {
            continue;
        }
        checked += 1;
        if intercepts(g, &x, &zp, &y)? && id(&base, &g.mutilate(&zp, &VarSet::new())?)?.is_identified() {
            return Ok(Theorem3Verdict {
                zid: true,
                witness: Some(zp),
                subsets_checked: checked,
            });
        }
    }
    Ok(Theorem3Verdict {
        zid: false,
        witness: None,
        subsets_checked: checked,
    })
}

/// Sufficient condition: `x` intercepts every directed path from `z` to `y`
/// and the effect is identifiable once edges into `z` are cut.
pub fn pearl_criterion(g: &Admg, x: &VarSet, z: &VarSet, y: &VarSet) -> Result<bool, QueryError> {
    let q = Query::new(y, x, &VarSet::new());
    q.validate(g)?;
    if !intercepts(g, x, z, y)? {
        return Ok(false);
    }
    Ok(id(&q, &g.mutilate(z, &VarSet::new())?)?.is_identified())
}

/// True when the surrogates provably cannot help: every member of `z` is a
/// descendant of `x` among the ancestors of `y`, and the effect is not
/// identifiable from observations.
pub fn corollary2_precheck(g: &Admg, x: &VarSet, y: &VarSet, z: &VarSet) -> Result<bool, QueryError> {
    let q = Query::new(y, x, z);
    q.validate(g)?;
    let an = g.ancestors(y)?;
    let sub = g.induced(&an)?;
    let xs: VarSet = x.intersection(&an).cloned().collect();
    let de = sub.descendants(&xs)?;
    if !z.is_subset(&de) {
        return Ok(false);
    }
    Ok(!id(&q.without_surrogates(), g)?.is_identified())
}

/// The JSON verdict object shared by the library and the command line.
pub fn verdict_json(result: &IdResult, witness_subset: Option<&VarSet>) -> Result<serde_json::Value, GraphError> {
    let (verdict, estimand, hedge) = match result {
        IdResult::Identified(e) => ("identified", e.normalize().to_json(), serde_json::Value::Null),
        IdResult::Fail(f) => (
            "not-zid",
            serde_json::Value::Null,
            serde_json::to_value(extract_hedge(f)?).expect("hedge serializes"),
        ),
    };
    Ok(serde_json::json!({
        "verdict": verdict,
        "estimand": estimand,
        "hedge": hedge,
        "witness_subset": witness_subset,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admg::var_set;
    use crate::estimand::RenderFormat;

    fn g_a() -> Admg {
        Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[("Z", "X"), ("Z", "Y")])
    }

    fn g_p() -> Admg {
        Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[("X", "Y"), ("Z", "Y")])
    }

    fn bow() -> Admg {
        Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[("X", "Y")])
    }

    fn text(r: &IdResult) -> String {
        r.estimand().unwrap().normalize().render(RenderFormat::Text)
    }

    #[test]
    fn chain_and_backdoor() {
        let chain = Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[]);
        let q = Query::from_names(["Y"], ["X"], []);
        assert_eq!(text(&id(&q, &chain).unwrap()), "P(y|x)");
        let bd = Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("Z", "Y"), ("X", "Y")], &[]);
        assert_eq!(text(&id(&q, &bd).unwrap()), "sum_{z} P(y|z,x) * P(z)");
    }

    #[test]
    fn line1_marginal() {
        let g = Admg::from_edges(&["V1", "V2"], &[("V1", "V2")], &[]);
        let q = Query::from_names(["V1"], [], []);
        assert_eq!(text(&idz(&q, &g).unwrap()), "P(v1)");
    }

    #[test]
    fn surrogate_graph_identified() {
        let q = Query::from_names(["Y"], ["X"], ["Z"]);
        let r = idz(&q, &g_a()).unwrap();
        assert_eq!(text(&r), "P[z](y|x)");
        assert!(!id(&q.without_surrogates(), &g_a()).unwrap().is_identified());
    }

    #[test]
    fn p_graph_fails_with_bow_hedge() {
        let q = Query::from_names(["Y"], ["X"], ["Z"]);
        let r = idz(&q, &g_p()).unwrap();
        let fail = r.fail().expect("not identifiable");
        assert_eq!(fail.s_component, var_set(["Y"]));
        let h = extract_hedge(fail).unwrap();
        assert_eq!(h.f_vertices, var_set(["X", "Y"]));
        assert_eq!(h.fprime_vertices, var_set(["Y"]));
        assert!(g_p().validate_hedge(&h, &var_set(["X"]), &var_set(["Y"])).unwrap());
        let cut = g_p().mutilate(&var_set(["Z"]), &VarSet::new()).unwrap();
        assert!(cut.validate_hedge(&h, &var_set(["X"]), &var_set(["Y"])).unwrap());
    }

    #[test]
    fn bow_hedge() {
        let q = Query::from_names(["Y"], ["X"], []);
        let r = id(&q, &bow()).unwrap();
        let h = extract_hedge(r.fail().unwrap()).unwrap();
        assert_eq!(h.f_directed.len(), 1);
        assert_eq!(h.r, var_set(["Y"]));
        assert!(bow().validate_hedge(&h, &var_set(["X"]), &var_set(["Y"])).unwrap());
    }

    #[test]
    fn hedge_root_avoids_treatment_children() {
        // Y1 -> X -> Y2, X <-> Y2, Y1 <-> Y2
        let g = Admg::from_edges(&["Y1", "X", "Y2"], &[("Y1", "X"), ("X", "Y2")], &[("X", "Y2"), ("Y1", "Y2")]);
        let q = Query::from_names(["Y1", "Y2"], ["X"], []);
        let r = id(&q, &g).unwrap();
        let fail = r.fail().unwrap();
        let h = extract_hedge(fail).unwrap();
        assert!(fail.local_graph.validate_hedge(&h, &fail.x, &fail.y).unwrap());
        assert!(g.validate_hedge(&h, &q.x_vars(), &q.y_vars()).unwrap());
    }

    #[test]
    fn theorem3_examples() {
        let q = Query::from_names(["Y"], ["X"], ["Z"]);
        let v = theorem3_zid(&q, &g_a()).unwrap();
        assert!(v.zid);
        assert_eq!(v.witness, Some(var_set(["Z"])));
        assert!(!theorem3_zid(&q, &g_p()).unwrap().zid);
        let chain = Admg::from_edges(&["X", "Y"], &[("X", "Y")], &[]);
        let v = theorem3_zid(&Query::from_names(["Y"], ["X"], []), &chain).unwrap();
        assert_eq!(v.witness, Some(VarSet::new()));
    }

    #[test]
    fn interception() {
        let zxy = Admg::from_edges(&["Z", "X", "Y"], &[("Z", "X"), ("X", "Y")], &[]);
        let (x, y, z) = (var_set(["X"]), var_set(["Y"]), var_set(["Z"]));
        assert!(intercepts(&zxy, &x, &z, &y).unwrap());
        let direct = Admg::from_edges(&["Z", "X", "Y"], &[("Z", "Y")], &[]);
        assert!(!intercepts(&direct, &x, &z, &y).unwrap());
        assert!(intercepts(&direct, &x, &VarSet::new(), &y).unwrap());
        assert!(intercepts(&direct, &x, &var_set(["Q"]), &y).is_err());
    }

    #[test]
    fn pearl_and_corollary2() {
        let (x, y, z) = (var_set(["X"]), var_set(["Y"]), var_set(["Z"]));
        assert!(pearl_criterion(&g_a(), &x, &z, &y).unwrap());
        assert!(!pearl_criterion(&g_p(), &x, &z, &y).unwrap());
        let xzy = Admg::from_edges(&["X", "Z", "Y"], &[("X", "Z"), ("Z", "Y")], &[("X", "Y"), ("Z", "Y")]);
        assert!(corollary2_precheck(&xzy, &x, &y, &z).unwrap());
        assert!(!idz(&Query::new(&y, &x, &z), &xzy).unwrap().is_identified());
        assert!(!corollary2_precheck(&g_a(), &x, &y, &z).unwrap());
        let chain = Admg::from_edges(&["X", "Z", "Y"], &[("X", "Z"), ("Z", "Y")], &[]);
        assert!(!corollary2_precheck(&chain, &x, &y, &z).unwrap());
    }

    #[test]
    fn invalid_queries() {
        let q = Query::from_names(["Y"], ["Y"], []);
        assert!(matches!(idz(&q, &g_a()), Err(QueryError::Graph(GraphError::OverlappingSets(_)))));
        let q = Query::from_names([], ["X"], []);
        assert_eq!(idz(&q, &g_a()), Err(QueryError::EmptyOutcome));
        let q = Query::from_names(["Q"], ["X"], []);
        assert!(matches!(idz(&q, &g_a()), Err(QueryError::Graph(GraphError::UnknownVertex(_)))));
        assert_eq!(
            id(&Query::from_names(["Y"], ["X"], ["Z"]), &g_a()),
            Err(QueryError::SurrogatesGiven)
        );
    }

    #[test]
    fn verdict_json_shape() {
        let q = Query::from_names(["Y"], ["X"], ["Z"]);
        let j = verdict_json(&idz(&q, &g_a()).unwrap(), None).unwrap();
        assert_eq!(j["verdict"], "identified");
        assert!(j["hedge"].is_null());
        let j = verdict_json(&idz(&q, &g_p()).unwrap(), None).unwrap();
        assert_eq!(j["verdict"], "not-zid");
        assert_eq!(j["hedge"]["r"], serde_json::json!(["Y"]));
    }
}

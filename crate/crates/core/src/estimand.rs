//! Symbolic probability expressions over observational and experimental regimes.
//!
//! A leaf [`Term`] is `P_{do(regime)}(outcome | conditioning)`. Values attached
//! to variables are either concrete levels or references to symbols bound by an
//! enclosing [`Estimand::Sum`] (or supplied as free variables at evaluation
//! time). A bound symbol is a variable name optionally followed by primes
//! (`X'`, `X''`); primes rename a re-summed variable without changing its domain.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admg::{VarSet, VariableId};
use crate::table::{Assignment, DistributionFamily, DistributionTable};
use crate::Probability;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Const { value: u32 },
    Ref {
        #[serde(rename = "ref")]
        symbol: String,
    },
}

impl Value {
    pub fn constant(value: u32) -> Self {
        Value::Const { value }
    }

    pub fn symbol(symbol: impl Into<String>) -> Self {
        Value::Ref { symbol: symbol.into() }
    }
}

/// A variable together with the value it takes in a term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binding {
    pub var: VariableId,
    #[serde(flatten)]
    pub value: Value,
}

impl Binding {
    pub fn new(var: VariableId, value: Value) -> Self {
        Binding { var, value }
    }

    /// The variable bound to its own name.
    pub fn free(var: VariableId) -> Self {
        let symbol = var.as_str().to_string();
        Binding {
            var,
            value: Value::symbol(symbol),
        }
    }

    pub fn constant(var: VariableId, value: u32) -> Self {
        Binding {
            var,
            value: Value::constant(value),
        }
    }
}

/// The variable a bound symbol ranges over: the symbol without trailing primes.
pub fn symbol_var(symbol: &str) -> &str {
    symbol.trim_end_matches('\'')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub outcome: Vec<Binding>,
    pub conditioning: Vec<Binding>,
    pub regime: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Estimand {
    Term(Term),
    Sum { bound: Vec<String>, body: Box<Estimand> },
    Product { factors: Vec<Estimand> },
    Ratio { numerator: Box<Estimand>, denominator: Box<Estimand> },
}

impl Estimand {
    pub fn term(outcome: Vec<Binding>, conditioning: Vec<Binding>, regime: Vec<Binding>) -> Self {
        Estimand::Term(Term {
            outcome,
            conditioning,
            regime,
        })
    }

    /// The empty product.
    pub fn one() -> Self {
        Estimand::Product { factors: Vec::new() }
    }

    pub fn sum(bound: Vec<String>, body: Estimand) -> Self {
        Estimand::Sum {
            bound,
            body: Box::new(body),
        }
    }

    pub fn product(factors: Vec<Estimand>) -> Self {
        Estimand::Product { factors }
    }

    pub fn ratio(numerator: Estimand, denominator: Estimand) -> Self {
        Estimand::Ratio {
            numerator: Box::new(numerator),
            denominator: Box::new(denominator),
        }
    }

    /// Referenced symbols not bound by an enclosing sum, as variables.
    pub fn free_variables(&self) -> VarSet {
        fn walk(e: &Estimand, bound: &mut Vec<String>, out: &mut VarSet) {
            match e {
                Estimand::Term(t) => {
                    for b in t.outcome.iter().chain(&t.conditioning).chain(&t.regime) {
                        if let Value::Ref { symbol } = &b.value {
                            if !bound.contains(symbol) {
                                if let Ok(v) = VariableId::new(symbol_var(symbol)) {
                                    out.insert(v);
                                }
                            }
                        }
                    }
                }
                Estimand::Sum { bound: names, body } => {
                    let depth = bound.len();
                    bound.extend(names.iter().cloned());
                    walk(body, bound, out);
                    bound.truncate(depth);
                }
                Estimand::Product { factors } => factors.iter().for_each(|f| walk(f, bound, out)),
                Estimand::Ratio { numerator, denominator } => {
                    walk(numerator, bound, out);
                    walk(denominator, bound, out);
                }
            }
        }
        let mut out = VarSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Union of the variables intervened on in any leaf.
    pub fn regime_variables(&self) -> VarSet {
        let mut out = VarSet::new();
        self.visit_terms(&mut |t| out.extend(t.regime.iter().map(|b| b.var.clone())));
        out
    }

    pub fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Estimand::Term(t) => f(t),
            Estimand::Sum { body, .. } => body.visit_terms(f),
            Estimand::Product { factors } => factors.iter().for_each(|x| x.visit_terms(f)),
            Estimand::Ratio { numerator, denominator } => {
                numerator.visit_terms(f);
                denominator.visit_terms(f);
            }
        }
    }

    fn map_terms(&self, f: &impl Fn(&Term) -> Term) -> Estimand {
        match self {
            Estimand::Term(t) => Estimand::Term(f(t)),
            Estimand::Sum { bound, body } => Estimand::sum(bound.clone(), body.map_terms(f)),
            Estimand::Product { factors } => Estimand::product(factors.iter().map(|x| x.map_terms(f)).collect()),
            Estimand::Ratio { numerator, denominator } => Estimand::ratio(numerator.map_terms(f), denominator.map_terms(f)),
        }
    }

    /// Replaces every concrete regime level with `value`.
    pub fn with_regime_constant(&self, value: u32) -> Estimand {
        self.map_terms(&|t| {
            let mut t = t.clone();
            for b in &mut t.regime {
                if let Value::Const { .. } = b.value {
                    b.value = Value::constant(value);
                }
            }
            t
        })
    }

    /// Rewrites every conditional leaf `P(a | c)` as `P(a, c) / P(c)`.
    pub fn expand_conditionals(&self) -> Estimand {
        match self {
            Estimand::Term(t) if !t.conditioning.is_empty() => {
                let mut joint = t.outcome.clone();
                joint.extend(t.conditioning.iter().cloned());
                Estimand::ratio(
                    Estimand::term(joint, vec![], t.regime.clone()),
                    Estimand::term(t.conditioning.clone(), vec![], t.regime.clone()),
                )
            }
            Estimand::Term(_) => self.clone(),
            Estimand::Sum { bound, body } => Estimand::sum(bound.clone(), body.expand_conditionals()),
            Estimand::Product { factors } => Estimand::product(factors.iter().map(|x| x.expand_conditionals()).collect()),
            Estimand::Ratio { numerator, denominator } => {
                Estimand::ratio(numerator.expand_conditionals(), denominator.expand_conditionals())
            }
        }
    }

    /// Checks the structural invariants: nonempty outcomes, disjoint variable
    /// roles inside each term, and no symbol bound twice on a root-to-leaf path.
    pub fn check_well_formed(&self) -> Result<(), String> {
        fn walk(e: &Estimand, bound: &mut Vec<String>) -> Result<(), String> {
            match e {
                Estimand::Term(t) => {
                    if t.outcome.is_empty() {
                        return Err("term with empty outcome".into());
                    }
                    let mut seen = BTreeSet::new();
                    for b in t.outcome.iter().chain(&t.conditioning).chain(&t.regime) {
                        if !seen.insert(&b.var) {
                            return Err(format!("variable {} appears twice in one term", b.var));
                        }
                    }
                    Ok(())
                }
                Estimand::Sum { bound: names, body } => {
                    for n in names {
                        if bound.contains(n) {
                            return Err(format!("symbol {n} bound twice on one path"));
                        }
                    }
                    let depth = bound.len();
                    bound.extend(names.iter().cloned());
                    let r = walk(body, bound);
                    bound.truncate(depth);
                    r
                }
                Estimand::Product { factors } => factors.iter().try_for_each(|f| walk(f, bound)),
                Estimand::Ratio { numerator, denominator } => {
                    walk(numerator, bound)?;
                    walk(denominator, bound)
                }
            }
        }
        walk(self, &mut Vec::new())
    }

    /// Flattens nested products, drops sums over nothing and unwraps
    /// single-factor products. Evaluation is unchanged.
    pub fn normalize(&self) -> Estimand {
        match self {
            Estimand::Term(_) => self.clone(),
            Estimand::Sum { bound, body } => {
                let body = body.normalize();
                if bound.is_empty() {
                    body
                } else {
                    Estimand::sum(bound.clone(), body)
                }
            }
            Estimand::Product { factors } => {
                let mut flat = Vec::with_capacity(factors.len());
                for f in factors {
                    match f.normalize() {
                        Estimand::Product { factors: inner } => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    Estimand::product(flat)
                }
            }
            Estimand::Ratio { numerator, denominator } => Estimand::ratio(numerator.normalize(), denominator.normalize()),
        }
    }

    pub fn render(&self, format: RenderFormat) -> String {
        let mut out = String::new();
        match format {
            RenderFormat::Text => render_text(self, &mut out),
            RenderFormat::Latex => render_latex(self, &mut out),
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("estimand serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Text,
    Latex,
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn binding_text(b: &Binding, in_regime: bool) -> String {
    match &b.value {
        Value::Ref { symbol } if symbol_var(symbol) == b.var.as_str() => lower(symbol),
        Value::Ref { symbol } => format!("{}={}", lower(b.var.as_str()), lower(symbol)),
        // the canonical level of an experiment is shown as the bare variable
        Value::Const { value: 0 } if in_regime => lower(b.var.as_str()),
        Value::Const { value } => format!("{}={}", lower(b.var.as_str()), value),
    }
}

fn join(bs: &[Binding], in_regime: bool, sep: &str) -> String {
    bs.iter().map(|b| binding_text(b, in_regime)).collect::<Vec<_>>().join(sep)
}

fn needs_parens(e: &Estimand) -> bool {
    match e {
        Estimand::Term(_) => false,
        Estimand::Product { factors } => factors.len() > 1,
        _ => true,
    }
}

fn render_text(e: &Estimand, out: &mut String) {
    match e {
        Estimand::Term(t) => {
            out.push('P');
            if !t.regime.is_empty() {
                let _ = write!(out, "[{}]", join(&t.regime, true, ","));
            }
            let _ = write!(out, "({}", join(&t.outcome, false, ","));
            if !t.conditioning.is_empty() {
                let _ = write!(out, "|{}", join(&t.conditioning, false, ","));
            }
            out.push(')');
        }
        Estimand::Sum { bound, body } => {
            let names: Vec<String> = bound.iter().map(|s| lower(s)).collect();
            let _ = write!(out, "sum_{{{}}} ", names.join(","));
            render_text(body, out);
        }
        Estimand::Product { factors } if factors.is_empty() => out.push('1'),
        Estimand::Product { factors } => {
            for (i, f) in factors.iter().enumerate() {
                if i > 0 {
                    out.push_str(" * ");
                }
                let wrap = !matches!(f, Estimand::Term(_));
                if wrap {
                    out.push('(');
                }
                render_text(f, out);
                if wrap {
                    out.push(')');
                }
            }
        }
        Estimand::Ratio { numerator, denominator } => {
            for (i, part) in [numerator, denominator].into_iter().enumerate() {
                if i > 0 {
                    out.push_str(" / ");
                }
                let wrap = needs_parens(part);
                if wrap {
                    out.push('(');
                }
                render_text(part, out);
                if wrap {
                    out.push(')');
                }
            }
        }
    }
}

fn render_latex(e: &Estimand, out: &mut String) {
    match e {
        Estimand::Term(t) => {
            let _ = write!(out, "P({}", join(&t.outcome, false, ", "));
            let mut given: Vec<String> = t.conditioning.iter().map(|b| binding_text(b, false)).collect();
            if !t.regime.is_empty() {
                given.push(format!("do({})", join(&t.regime, true, ", ")));
            }
            if !given.is_empty() {
                let _ = write!(out, " \\mid {}", given.join(", "));
            }
            out.push(')');
        }
        Estimand::Sum { bound, body } => {
            let names: Vec<String> = bound.iter().map(|s| lower(s)).collect();
            let _ = write!(out, "\\sum_{{{}}} ", names.join(", "));
            render_latex(body, out);
        }
        Estimand::Product { factors } if factors.is_empty() => out.push('1'),
        Estimand::Product { factors } => {
            for (i, f) in factors.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\, ");
                }
                let wrap = matches!(f, Estimand::Sum { .. });
                if wrap {
                    out.push_str("\\left(");
                }
                render_latex(f, out);
                if wrap {
                    out.push_str("\\right)");
                }
            }
        }
        Estimand::Ratio { numerator, denominator } => {
            out.push_str("\\frac{");
            render_latex(numerator, out);
            out.push_str("}{");
            render_latex(denominator, out);
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no table for regime do({0})")]
    MissingRegime(String),
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
}

fn fmt_assignment(a: &Assignment) -> String {
    a.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

/// Marginals keyed by regime and kept variables.
type MarginalCache<T> = HashMap<(Assignment, Vec<VariableId>), Rc<DistributionTable<T>>>;

/// Evaluates estimands against one distribution family, caching marginals.
pub struct Evaluator<'a, T> {
    data: &'a DistributionFamily<T>,
    cache: RefCell<MarginalCache<T>>,
}

impl<'a, T: Probability> Evaluator<'a, T> {
    pub fn new(data: &'a DistributionFamily<T>) -> Self {
        Evaluator {
            data,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn evaluate(&self, e: &Estimand, free: &Assignment) -> Result<T, EvalError> {
        let mut env: Vec<(String, u32)> = free.iter().map(|(k, &v)| (k.as_str().to_string(), v)).collect();
        for (k, v) in free.iter() {
            self.check_value(k, *v)?;
        }
        self.eval(e, &mut env)
    }

    fn check_value(&self, var: &VariableId, value: u32) -> Result<(), EvalError> {
        match self.data.cardinality(var) {
            Some(c) if (value as usize) < c => Ok(()),
            Some(c) => Err(EvalError::DomainMismatch(format!("{var}={value} outside cardinality {c}"))),
            None => Err(EvalError::DomainMismatch(format!("{var} is not a variable of the data"))),
        }
    }

    fn resolve(&self, b: &Binding, env: &[(String, u32)]) -> Result<u32, EvalError> {
        let value = match &b.value {
            Value::Const { value } => *value,
            Value::Ref { symbol } => env
                .iter()
                .rev()
                .find(|(s, _)| s == symbol)
                .map(|(_, v)| *v)
                .ok_or_else(|| EvalError::UnboundVariable(symbol.clone()))?,
        };
        self.check_value(&b.var, value)?;
        Ok(value)
    }

    fn marginal(&self, regime: &Assignment, vars: Vec<VariableId>) -> Result<Rc<DistributionTable<T>>, EvalError> {
        let key = (regime.clone(), vars);
        if let Some(t) = self.cache.borrow().get(&key) {
            return Ok(t.clone());
        }
        let table = self
            .data
            .table(regime)
            .ok_or_else(|| EvalError::MissingRegime(fmt_assignment(regime)))?;
        if let Some(v) = key.1.iter().find(|v| table.position(v).is_none()) {
            return Err(EvalError::DomainMismatch(format!(
                "{v} is not a variable of the do({}) table",
                fmt_assignment(regime)
            )));
        }
        let m = Rc::new(table.marginal(&key.1));
        self.cache.borrow_mut().insert(key, m.clone());
        Ok(m)
    }

    fn term(&self, t: &Term, env: &[(String, u32)]) -> Result<T, EvalError> {
        let mut regime = Assignment::new();
        for b in &t.regime {
            regime.insert(b.var.clone(), self.resolve(b, env)?);
        }
        let mut cond = Assignment::new();
        for b in &t.conditioning {
            cond.insert(b.var.clone(), self.resolve(b, env)?);
        }
        let mut joint = cond.clone();
        for b in &t.outcome {
            joint.insert(b.var.clone(), self.resolve(b, env)?);
        }
        let num = self.marginal(&regime, joint.vars().into_iter().collect())?;
        let num = num.prob(&joint).expect("marginal covers assignment");
        if cond.is_empty() {
            return Ok(num);
        }
        let den = self.marginal(&regime, cond.vars().into_iter().collect())?;
        let den = den.prob(&cond).expect("marginal covers assignment");
        Ok(if den == T::zero() { T::zero() } else { num / den })
    }

    fn eval(&self, e: &Estimand, env: &mut Vec<(String, u32)>) -> Result<T, EvalError> {
        match e {
            Estimand::Term(t) => self.term(t, env),
            Estimand::Product { factors } => {
                let mut acc = T::one();
                for f in factors {
                    acc = acc * self.eval(f, env)?;
                    if acc == T::zero() {
                        break;
                    }
                }
                Ok(acc)
            }
            Estimand::Ratio { numerator, denominator } => {
                let num = self.eval(numerator, env)?;
                let den = self.eval(denominator, env)?;
                Ok(if den == T::zero() { T::zero() } else { num / den })
            }
            Estimand::Sum { bound, body } => {
                let mut cards = Vec::with_capacity(bound.len());
                for s in bound {
                    let var = VariableId::new(symbol_var(s))
                        .map_err(|_| EvalError::DomainMismatch(format!("bad bound symbol {s}")))?;
                    let c = self
                        .data
                        .cardinality(&var)
                        .ok_or_else(|| EvalError::DomainMismatch(format!("{var} is not a variable of the data")))?;
                    cards.push(c);
                }
                let depth = env.len();
                env.extend(bound.iter().map(|s| (s.clone(), 0)));
                let mut acc = T::zero();
                let total: usize = cards.iter().product();
                for _ in 0..total {
                    acc = acc + self.eval(body, env)?;
                    for i in (0..cards.len()).rev() {
                        let slot = &mut env[depth + i].1;
                        *slot += 1;
                        if (*slot as usize) < cards[i] {
                            break;
                        }
                        *slot = 0;
                    }
                }
                env.truncate(depth);
                Ok(acc)
            }
        }
    }
}

/// One-shot evaluation; prefer [`Evaluator`] for repeated calls on the same data.
pub fn evaluate<T: Probability>(e: &Estimand, free: &Assignment, data: &DistributionFamily<T>) -> Result<T, EvalError> {
    Evaluator::new(data).evaluate(e, free)
}

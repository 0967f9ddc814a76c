//! Exact discrete distribution tables and the observational/experimental
//! families an estimand is evaluated against.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::admg::{VarSet, VariableId};
use crate::Probability;

/// A value for each named variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<VariableId, u32>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: &VariableId) -> Option<u32> {
        self.0.get(v).copied()
    }

    pub fn insert(&mut self, v: VariableId, value: u32) {
        self.0.insert(v, value);
    }

    pub fn vars(&self) -> VarSet {
        self.0.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VariableId, &u32)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl<'a> FromIterator<(&'a str, u32)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (&'a str, u32)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (VariableId::from(k), v)).collect())
    }
}

impl FromIterator<(VariableId, u32)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VariableId, u32)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Every joint assignment of `vars`, first variable slowest.
pub fn assignments(vars: &[(VariableId, usize)]) -> Vec<Assignment> {
    let total: usize = vars.iter().map(|(_, c)| *c).product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0u32; vars.len()];
    for _ in 0..total {
        out.push(vars.iter().zip(&digits).map(|((v, _), &d)| (v.clone(), d)).collect());
        for i in (0..vars.len()).rev() {
            digits[i] += 1;
            if (digits[i] as usize) < vars[i].1 {
                break;
            }
            digits[i] = 0;
        }
    }
    out
}

/// Probabilities over the full assignment space of an ordered variable list,
/// stored row-major with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable<T> {
    variables: Vec<VariableId>,
    cardinalities: Vec<usize>,
    probabilities: Vec<T>,
}

impl<T: Probability> DistributionTable<T> {
    /// Panics if the probability vector does not match the assignment space.
    pub fn new(variables: Vec<VariableId>, cardinalities: Vec<usize>, probabilities: Vec<T>) -> Self {
        assert_eq!(variables.len(), cardinalities.len());
        assert_eq!(cardinalities.iter().product::<usize>(), probabilities.len());
        DistributionTable {
            variables,
            cardinalities,
            probabilities,
        }
    }

    pub fn zeros(variables: Vec<VariableId>, cardinalities: Vec<usize>) -> Self {
        let n = cardinalities.iter().product();
        Self::new(variables, cardinalities, vec![T::zero(); n])
    }

    pub fn variables(&self) -> &[VariableId] {
        &self.variables
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cardinalities
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn position(&self, v: &VariableId) -> Option<usize> {
        self.variables.iter().position(|u| u == v)
    }

    pub fn cardinality(&self, v: &VariableId) -> Option<usize> {
        self.position(v).map(|i| self.cardinalities[i])
    }

    /// Flat index of a value vector given in variable order.
    pub fn index_of(&self, values: &[u32]) -> usize {
        values
            .iter()
            .zip(&self.cardinalities)
            .fold(0, |acc, (&v, &c)| acc * c + v as usize)
    }

    pub fn add(&mut self, values: &[u32], p: T) {
        let i = self.index_of(values);
        self.probabilities[i] = self.probabilities[i] + p;
    }

    /// Probability of a full assignment; `None` if a variable is missing or out of range.
    pub fn prob(&self, a: &Assignment) -> Option<T> {
        let mut values = Vec::with_capacity(self.variables.len());
        for (v, &c) in self.variables.iter().zip(&self.cardinalities) {
            let x = a.get(v)?;
            if x as usize >= c {
                return None;
            }
            values.push(x);
        }
        Some(self.probabilities[self.index_of(&values)])
    }

    pub fn total(&self) -> T {
        self.probabilities.iter().fold(T::zero(), |acc, &p| acc + p)
    }

    /// Marginal table over `keep`, in the order given. Panics on unknown variables.
    pub fn marginal(&self, keep: &[VariableId]) -> DistributionTable<T> {
        let pos: Vec<usize> = keep
            .iter()
            .map(|v| self.position(v).expect("marginal over unknown variable"))
            .collect();
        let cards: Vec<usize> = pos.iter().map(|&i| self.cardinalities[i]).collect();
        let mut out = DistributionTable::zeros(keep.to_vec(), cards);
        let mut digits = vec![0u32; self.variables.len()];
        let mut sub = vec![0u32; keep.len()];
        for &p in &self.probabilities {
            for (s, &i) in sub.iter_mut().zip(&pos) {
                *s = digits[i];
            }
            out.add(&sub, p);
            for i in (0..digits.len()).rev() {
                digits[i] += 1;
                if (digits[i] as usize) < self.cardinalities[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        out
    }

    /// Writes one row per assignment: variable columns, then `probability`.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = self.variables.iter().map(|v| v.to_string()).collect();
        header.push("probability".into());
        w.write_record(&header)?;
        let vars: Vec<(VariableId, usize)> = self.variables.iter().cloned().zip(self.cardinalities.iter().copied()).collect();
        for (a, p) in assignments(&vars).iter().zip(&self.probabilities) {
            let mut row: Vec<String> = self.variables.iter().map(|v| a.get(v).unwrap().to_string()).collect();
            row.push(format!("{:e}", p.to_f64().unwrap_or(f64::NAN)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Observational joint plus experimental tables `P(V \ Z' | do(Z' = z'))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFamily<T> {
    cardinalities: BTreeMap<VariableId, usize>,
    observational: DistributionTable<T>,
    experimental: BTreeMap<Assignment, DistributionTable<T>>,
}

impl<T: Probability> DistributionFamily<T> {
    pub fn new(observational: DistributionTable<T>) -> Self {
        let cardinalities = observational
            .variables()
            .iter()
            .cloned()
            .zip(observational.cardinalities().iter().copied())
            .collect();
        DistributionFamily {
            cardinalities,
            observational,
            experimental: BTreeMap::new(),
        }
    }

    /// Registers the table for regime `do(regime)`. An empty regime replaces the
    /// observational table.
    pub fn insert(&mut self, regime: Assignment, table: DistributionTable<T>) {
        if regime.is_empty() {
            self.observational = table;
        } else {
            self.experimental.insert(regime, table);
        }
    }

    pub fn observational(&self) -> &DistributionTable<T> {
        &self.observational
    }

    /// The table for `do(regime)`; the empty regime aliases the observational table.
    pub fn table(&self, regime: &Assignment) -> Option<&DistributionTable<T>> {
        if regime.is_empty() {
            Some(&self.observational)
        } else {
            self.experimental.get(regime)
        }
    }

    pub fn experimental(&self) -> &BTreeMap<Assignment, DistributionTable<T>> {
        &self.experimental
    }

    pub fn cardinality(&self, v: &VariableId) -> Option<usize> {
        self.cardinalities.get(v).copied()
    }

    pub fn cardinalities(&self) -> &BTreeMap<VariableId, usize> {
        &self.cardinalities
    }
}

//! Identification of causal effects from observational and surrogate
//! experimental data over acyclic directed mixed graphs.

pub mod admg;
pub mod corpus;
pub mod dcalc;
pub mod estimand;
pub mod format;
pub mod identify;
pub mod oracle;
pub mod table;

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

pub use admg::{var_set, Admg, GraphError, Hedge, VarSet, VariableId};
pub use estimand::{evaluate, Binding, EvalError, Estimand, Evaluator, RenderFormat, Term, Value};
pub use format::{parse_graph, render_graph, ParseError};
pub use identify::{extract_hedge, id, idz, theorem3_zid, CallContext, Fail, IdResult, Query, QueryError};
pub use oracle::{random_scm, witness_search, DiscreteScm, OracleError, WitnessPair};
pub use table::{Assignment, DistributionFamily, DistributionTable};

/// Scalar type of probability tables and evaluation.
pub trait Probability: Float + FromPrimitive + Debug + Send + Sync + 'static {}

impl Probability for f32 {}
impl Probability for f64 {}

pub type Table = DistributionTable<f64>;
pub type Family = DistributionFamily<f64>;
pub type Scm = DiscreteScm<f64>;

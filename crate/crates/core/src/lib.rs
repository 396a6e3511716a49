//! Exact symbolic calculus for deformations of holomorphic vector bundles
//! over a polydisc chart.

pub mod bundle;
pub mod coeff;
pub mod correspondence;
pub mod deform;
pub mod error;
pub mod exec;
pub mod expr;
pub mod extension;
pub mod forms;
pub mod random;
pub mod scenario;

pub use bundle::{ConnectionData, Christoffel, EndoField, Factor, FiberWord, FormMatrix, ValuedForm};
pub use coeff::{Chart, GaussRational, PolySeries};
pub use error::{KernelError, Result};
pub use forms::{Form, FormKey, MultiIndex};

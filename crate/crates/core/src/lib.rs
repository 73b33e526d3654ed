//! Monotone co-design solver core.
//!
//! Formalizes design problems as monotone relations between functionality
//! and resource posets, composes them (series, parallel, feedback) and
//! computes Pareto-optimal antichains of design solutions. Ships the
//! autonomous-vehicle building blocks (lateral LQG control, simulated
//! longitudinal brake control, hardware catalogues), a diagram DSL and
//! catalogue file I/O.

pub mod antichain;
pub mod av;
pub mod catalogue;
pub mod diagram;
pub mod error;
pub mod poset;

pub mod dp;

pub use antichain::{pareto_min, Antichain};
pub use dp::{Dpi, Impl, ImplId, MonotoneTable};
pub use poset::{leq, Poset, SampledCurve, Value, EPS};

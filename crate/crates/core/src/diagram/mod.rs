//! Diagram DSL: text format, parser, validator and compiler turning a
//! co-design diagram into a single [`Dpi`](crate::dp::Dpi).
//!
//! Syntax (line-oriented, `#` comments):
//!
//! ```text
//! node vehicle = catalogue("vehicles.cat")
//! node lateral = builtin(lateral, "lateral.json")
//! node costsum = sum(4, plus, CHF)
//! wire vehicle.power -> powersum.total
//! expose fun brake.cruise_speed as cruise_speed
//! expose res costsum.total as total_cost
//! ```
//!
//! Port references may carry an optional `[unit]` suffix which is checked
//! against the port's declared poset.

mod ast;
mod canonical;
mod compile;
mod parse;
mod validate;

pub use ast::{
    print_diagram, DiagramAst, Expose, NodeDecl, NodeDef, PortRef, Side, SrcLoc, Wire,
};
pub use canonical::{canonicalize, CanonicalForm};
pub use compile::{compile, Compiled, PortInfo};
pub use parse::parse_diagram;
pub use validate::{resolve_nodes, validate, Diagnostic, ResolvedNode, Severity};

//! Time-expanded LP compilation and interchange export.

mod compile;
mod export;
mod objective;
mod policy;
mod problem;
mod varmap;

pub use compile::{compile, compile_structure, CompileError};
pub use export::{export_interchange, ExportError, Format};
pub use objective::{annualize_capex, assemble_objective, node_cost_terms, AnnuityError};
pub use policy::{emit_co2_policy, net_release_terms};
pub use problem::{LpBuilder, LpError, LpProblem, RowSense};
pub use varmap::{Role, VarKey, VariableMap};

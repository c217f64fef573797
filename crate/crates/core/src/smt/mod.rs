//! SMT encoding and the external solver.

pub mod encode;
pub mod solver;

pub use encode::{encode_goal, encode_term, EncodingTable, Origin, Script, SymbolDecl};
pub use solver::{locate_solver, run_solver, SolverOracle, SolverRun, SolverVerdict, SOLVER_ENV};

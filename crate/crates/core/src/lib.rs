//! Homotopy path for ℓ1 minimisation under an ℓ∞ residual constraint.

pub mod asm;
pub mod dual;
pub mod error;
pub mod homotopy;
pub mod instances;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod primal;
pub mod problem;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, IndexSet};
pub use problem::{check_optimal_pair, IndexSets, ProblemInstance};
pub use homotopy::{eval_path, solve_path, solve_path_with, HomotopyOptions, SolutionPath};

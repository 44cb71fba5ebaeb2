//! P1 Lagrange finite elements: assembly, Dirichlet restriction, SPD solvers and norms.

pub mod assembly;
pub mod multigrid;
pub mod norms;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use assembly::{
    assemble_load_curl, assemble_load_scalar, assemble_mass, assemble_stiffness, element_l2_squared,
    LevelOperators,
};
pub use multigrid::MultigridSolver;
pub use norms::{dual_norm_hm1, norm_l2, seminorm_h1};
pub use quadrature::QuadratureRule;
pub use solver::{pcg, solve_spd, InteriorSolver, Jacobi, Preconditioner, SolveStats, DEFAULT_TOL};
pub use sparse::{dirichlet_restrict, CsrMatrix, RestrictedMatrix};

//! Special divisors on a generic chain of loops.
//!
//! Everything is exact rational arithmetic. The crate covers canonical
//! `v_1`-reduced coordinates, lingering lattice paths and Baker–Norine rank,
//! the Abel–Jacobi map and its inverse, the torus cells of the Brill–Noether
//! loci `W^r_d(Γ)`, translates of the tropical theta divisor and their
//! intersections, plus a chip-firing oracle on subdivided integer models that
//! checks the combinatorial rank criterion independently.

pub mod brill_noether;
pub mod chain;
pub mod divisor;
pub mod error;
pub mod jacobian;
pub mod lattice;
pub mod oracle;
pub mod rational;
pub mod sampling;
pub mod theta;

pub use brill_noether::{
    compute_dj, containing_translates, dj_residual, enumerate_cells, enumerate_cells_limited,
    is_vertex_avoiding, local_theta_equations, sample_vertex_avoiding, LocalEquation,
    NeighborhoodSpec, TorusCell,
};
pub use chain::{
    cell_census, check_genericity, intersection_count, lambda_count, psi, rho, ChainOfLoops,
    Genericity,
};
pub use divisor::{canonicalize, Divisor, PointOnGamma, ReducedDivisor};
pub use error::{Error, Result};
pub use jacobian::{
    abel_jacobi, abel_jacobi_divisor, abel_jacobi_point, is_effective_class, jacobi_invert,
    JacobianPoint, PicPoint,
};
pub use lattice::{in_weyl_chamber, lingering_path, lingering_steps, rank, rank_at_least, LatticePath, Step};
pub use rational::Q;
pub use oracle::{
    count_effective_reps, cross_check, dhar_reduce, discrete_rank, discretize, CrossCheckReport,
    DiscreteDivisor, DiscreteGraph, OracleLimits,
};
pub use sampling::Sampler;
pub use theta::{
    contains, intersect_cells_with_translates, intersect_translates, theta_facets, Facet,
    FacetDescription, IntersectionPoint, ThetaTranslate,
};

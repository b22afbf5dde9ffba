//! Dense Hermitian linear algebra on M_d: eigen-decomposition, functional
//! calculus, spectral projections and the projection lattice.

mod eig;
mod mat;
mod proj;

pub use eig::{jacobi_eigen, SpectralDecomp};
pub use mat::{Mat, C64};
pub use proj::{
    abs, clean_projection, func_calc, herm_eig, leq_deviation, min_eig_gap, proj_join, proj_leq,
    proj_meet, spectral_proj, Endpoint, HermMatrix, Interval, ProjMatrix, TOL_BAND, TOL_HERM,
    TOL_MEET, TOL_ORDER, TOL_PROJ,
};

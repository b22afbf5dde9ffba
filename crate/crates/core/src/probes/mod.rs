//! Seeded ensembles, the Gundy and left/right decompositions, and the
//! triangular-truncation probe with its counterexample ledger.

mod ensemble;
mod gundy;
mod leftright;
mod truncation;

pub use ensemble::{
    gaussian_c64, gaussian_mat, gaussian_vec, random_bounded_fn, random_fn, random_hermitian,
    random_hermitian_fn, random_positive, random_projection, random_unit_vec, random_with_norm,
    sample_rng, wishart, EnsembleSpec,
};
pub use gundy::{gundy_decompose, two_sided_support, GundyParts, GundyReport};
pub use leftright::{leftright_cz, LeftRightCZ, LeftRightReport};
pub use truncation::{
    read_ledger, truncation_probe, truncation_ratios, write_ledger, LedgerRecord,
    TruncationOutcome, TruncationProbeSpec,
};

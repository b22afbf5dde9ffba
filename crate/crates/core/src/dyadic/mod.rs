//! Dyadic grids on `[0,1)ⁿ`, piecewise-constant matrix functions, conditional
//! expectations, the Haar system and the basic norms.

mod grid;
mod haar;
mod io;
mod matfn;
mod ops;

pub use grid::{CubeIndex, Grid, MAX_LOG_LEAVES};
pub use haar::{
    child_number, haar_coeff, haar_coeffs_all, haar_fn, haar_synthesize, haar_values, patterns,
    resolved_indices, HaarIndex,
};
pub use io::{from_text, to_text};
pub(crate) use io::{parse_entries, write_entries};
pub use matfn::MatFn;
pub use ops::{
    differences, expect, expectations, inner, l1_norm, l2_norm, linf_l2c_norm, linf_l2r_norm,
    linf_norm, lp_norm, mart_diff, phi_trace, weak_l1_norm, weak_l1_tail,
};

//! Hardy and BMO functionals of dyadic martingales, Mei and Perrin atoms, and
//! the atom-level and paraproduct estimates.

mod atoms;
mod estimates;
mod norms;

pub use atoms::{
    hansen_sides, make_atom, mei_atom, mei_norm, perrin_atom, random_atom, verify_atom, AtomCheck,
    AtomKind, AtomSpec,
};
pub use estimates::{
    atom_operator_bound, john_nirenberg_lower, l2_bound, paraproduct_bmo_estimate,
    paraproduct_bmo_sample, paraproduct_l2_bound, AtomBound, ParaproductBmoSample,
};
pub use norms::{
    all_norms, bmo_norms, conditional_square_function, hardy_norms, square_function, NormReport,
};

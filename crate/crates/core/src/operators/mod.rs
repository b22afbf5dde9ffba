//! Dyadic operators with matrix-valued kernels acting on either side: Haar
//! shifts, perfect dyadic operators, martingale transforms and paraproducts,
//! a discretized smooth kernel, plus the vanishing-identity diagnostics and
//! the weak-type scan.

mod annihilation;
mod perfect;
mod shift;
mod smooth;
mod spec;
mod transform;
mod weak;

pub use annihilation::{
    annihilation_check, annihilation_check_with, AnnihilationInput, AnnihilationReport,
};
pub use perfect::{PerfectDyadicSpec, PerfectKind};
pub use shift::{HaarShiftSpec, ShiftCoeff};
pub use smooth::{KernelShape, SmoothKernelSpec};
pub use spec::OperatorSpec;
pub use transform::{
    adaptedness_deviation, mart_paraproduct, martingale_transform, paraproduct_adjoint, Side,
    TransformKind, TransformSpec,
};
pub use weak::{weak_type_sample, weak_type_scan, WeakSample, WeakScanSpec};

//! Cuculescu projections, the four-part CZ decomposition, lacunary families
//! with their triangular truncations, and the dilated projections `q̂`, `ζ`.

mod cz;
mod lacunary;
mod seq;

pub use cz::{
    cz_decompose, cz_from_seq, delta_formulas_check, CZDiagnostics, CZParts, DeltaReport,
};
pub use lacunary::{
    lacunary_build, qhat_build, required_s_max, row_col_split, row_col_split_with,
    triangular_truncate, zeta_build, LacunaryCheck, LacunaryFamily, QHat, RowColSplit, TriPart,
    Zeta,
};
pub use seq::{
    cuculescu_check, cuculescu_run, root_admissible, CuculescuCheck, CuculescuSeq, ProjLevelFamily,
};

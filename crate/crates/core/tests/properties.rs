mod support;

use proptest::prelude::*;
use support::props;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pi_partition_and_orthogonality(seed in any::<u64>()) {
        props::pi_partition(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn projection_lattice_laws(seed in any::<u64>()) {
        props::lattice_laws(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn haar_orthonormal(seed in any::<u64>()) {
        props::haar_orthonormal(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn haar_reconstruction(seed in any::<u64>()) {
        props::haar_reconstruction(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn norm_symmetry_under_adjoint(seed in any::<u64>()) {
        props::norm_symmetry(seed).map_err(TestCaseError::fail)?;
    }
}

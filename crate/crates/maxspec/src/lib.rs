//! Exact computations on ordinal-indexed models of maximal spectra:
//! integer-valued ideal maps, radical factorizations, scattered-space
//! stratifications, and the group decompositions they induce.

pub mod colength;
pub mod group;
pub mod ideal;
pub mod model;
pub mod ordinal;
pub mod sets;
pub mod suite;
pub mod textform;
pub mod zmatrix;

pub use colength::{
    check_length_identity, check_squeeze, check_stage_restriction, check_sum, colength,
    colength_stage, ColengthError, ColengthModel, ExtNat,
};
pub use group::{
    atom_decompose, combination, domination_witness, exactness_report, glue,
    kernel_of_restriction, order_mismatch_demo, sigma_r_report, subgroup_basis, subgroup_member,
    unglue, AtomDecomposition, ExactnessReport, GroupError, IntBasis, Membership,
    OrderMismatchExhibit, SigmaRReport, StratTuple,
};
pub use ideal::{IdealError, IdealMap};
pub use model::{CritReport, DomainModel, MiCondition, MiVerdict, ModelError, Terminal};
pub use ordinal::{Ordinal, OrdinalParseError};
pub use sets::{Cell, DefinableSet, DegMax, SetCount, SetError, Space};
pub use suite::{case_seed, run_suite, CaseFailure, SuiteError, SuiteReport, SUITE_NAMES};

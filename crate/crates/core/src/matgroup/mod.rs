//! Matrix dilation groups: matrices, charts, families and word metrics.

pub mod expm;
pub mod family;
pub mod mat;
pub mod spec;
pub mod word;

pub use expm::{mat_exp, mat_log};
pub use family::{enumerate_family, enumerate_word_ball, FamilyMember, WellSpreadFamily};
pub use mat::{Mat, Vector};
pub use spec::{
    check_one_parameter_admissible, conjugate_spec, dual_action, Admissibility, Coords,
    GroupElement, GroupKind, GroupSpec, GroupSpecJson, SupportOracle,
};
pub use word::{word_distance, Distance, GeneratingSet};

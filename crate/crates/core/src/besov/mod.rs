//! FFT-based norms: decomposition spaces, anisotropic Besov spaces and
//! direct coorbit norms of band-limited grid functions.

pub mod compare;
pub mod grid;
pub mod norms;
pub mod partition;
pub mod window;

pub use compare::{compare_norms, default_battery, norm_grid, scaled_packets, NormComparison, Packet, RatioRow, SpreadTrend};
pub use grid::{GridFunction, Layout};
pub use norms::{
    anisotropic_besov_norm, anisotropic_besov_norm_with, decomposition_norm, is_expansive,
    lq_aggregate, matching_alpha, Exponent, NormEntry, NormReport,
};
pub use partition::{build_partition, smoothstep, PartitionMember, PartitionOfUnity};
pub use window::{calderon_check, coorbit_norm_direct, AnalyzingWindow, Profile, Quadrature};

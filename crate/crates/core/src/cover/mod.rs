//! Frequency-side geometry: base sets, induced covers and support diagnostics.

pub mod build;
pub mod diagnostics;
pub mod export;
pub mod geometry;
pub mod halton;
pub mod hull;
pub mod intersect;

pub use build::{
    adapted_form, adjacency, annulus_samples, build_induced_cover, directed_counts, neighbor_counts, neighbor_counts_with, self_stats,
    CoverElement, CoverParams, InducedCover, NeighborRow, NeighborTable, Rows, SelfStats,
    WindowMeta,
};
pub use diagnostics::{
    properness_check, support_divergence_test, support_equality_test, Bump, Divergence,
    Properness, SupportComparison,
};
pub use export::{export_adjacency, export_elements, AdjacencyRow, ElementExport};
pub use geometry::{BaseSet, ConvexBody, Geometry, Shell};
pub use hull::{connected_hull, Annulus, HullDescriptor, Punctured, Region};
pub use intersect::{intersects, intersects_sampled, intersects_with, Contact, IntersectStatus};

//! Plain data views of a cover for external plotting.

use serde::{Deserialize, Serialize};

use super::build::{adjacency, InducedCover};
use super::geometry::{ConvexBody, Geometry};
use crate::error::Result;
use crate::matgroup::Mat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementExport {
    pub id: usize,
    pub index: Vec<i64>,
    pub matrix: Mat,
    pub outer: ConvexBody,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inner: Option<ConvexBody>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyRow {
    pub i: usize,
    pub j: usize,
    pub status: String,
}

pub fn export_elements(cover: &InducedCover) -> Vec<ElementExport> {
    cover
        .elements
        .iter()
        .map(|e| {
            let (outer, inner) = match &e.geometry {
                Geometry::Body(b) => (b.clone(), None),
                Geometry::Shell(s) => (s.outer.clone(), Some(s.inner.clone())),
            };
            ElementExport { id: e.id, index: e.index.clone(), matrix: e.transform.matrix, outer, inner }
        })
        .collect()
}

/// Intersecting pairs `i ≤ j`, self-loops included.
pub fn export_adjacency(cover: &InducedCover, budget: usize) -> Result<Vec<AdjacencyRow>> {
    Ok(adjacency(cover, budget)?
        .into_iter()
        .map(|(i, j, st)| AdjacencyRow { i, j, status: st.as_str().to_string() })
        .collect())
}

//! Cluster and chunk geometry on the syndrome lattice.
//!
//! A cluster is any set of syndrome-lattice vertices; a chunk is any set of
//! syndrome-lattice edges (in practice a subset of an error set). The width
//! of a cluster is the distance between its extremal points, and the width
//! of a chunk is the width of the vertex cluster formed by its endpoints.
//! Cluster distance is zero for overlapping clusters and the closest-point
//! distance otherwise; it deliberately fails the triangle inequality.

use std::collections::BTreeSet;

use super::{Edge, LatticeError, SyndromeLattice, Vertex};

/// A set of syndrome-lattice vertices, kept in canonical order.
pub type VertexSet = BTreeSet<Vertex>;
/// A set of syndrome-lattice edges, kept in canonical order.
pub type EdgeSet = BTreeSet<Edge>;

/// Width of a cluster: the largest pairwise distance, 0 for a singleton.
pub fn cluster_width(lat: &SyndromeLattice, cluster: &VertexSet) -> Result<u32, LatticeError> {
    if cluster.is_empty() {
        return Err(LatticeError::EmptyCluster);
    }
    let vs: Vec<Vertex> = cluster.iter().copied().collect();
    let mut w = 0;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            w = w.max(lat.distance(vs[i], vs[j]));
        }
    }
    Ok(w)
}

/// Whether two clusters overlap: some `k' ∈ c2` lies no further from a
/// `k1 ∈ c1` than some other `k2 ∈ c1` does, or vice versa. The relation is
/// used symmetrically so that zero cluster distance and overlap coincide.
pub fn clusters_overlap(lat: &SyndromeLattice, c1: &VertexSet, c2: &VertexSet) -> bool {
    one_sided_overlap(lat, c1, c2) || one_sided_overlap(lat, c2, c1)
}

fn one_sided_overlap(lat: &SyndromeLattice, c1: &VertexSet, c2: &VertexSet) -> bool {
    for &k1 in c1 {
        let spread = c1.iter().map(|&k2| lat.distance(k1, k2)).max().unwrap_or(0);
        if c2.iter().any(|&k| lat.distance(k1, k) <= spread) {
            return true;
        }
    }
    false
}

/// Distance between clusters: 0 if they overlap, otherwise the distance
/// between their closest points.
pub fn cluster_distance(
    lat: &SyndromeLattice,
    c1: &VertexSet,
    c2: &VertexSet,
) -> Result<u32, LatticeError> {
    if c1.is_empty() || c2.is_empty() {
        return Err(LatticeError::EmptyCluster);
    }
    if clusters_overlap(lat, c1, c2) {
        return Ok(0);
    }
    let mut best = u32::MAX;
    for &a in c1 {
        for &b in c2 {
            best = best.min(lat.distance(a, b));
        }
    }
    Ok(best)
}

/// The vertex cluster of a chunk: every endpoint of every edge.
pub fn chunk_vertices(lat: &SyndromeLattice, chunk: &EdgeSet) -> Result<VertexSet, LatticeError> {
    if chunk.is_empty() {
        return Err(LatticeError::EmptyChunk);
    }
    let mut vs = VertexSet::new();
    for &e in chunk {
        let (a, b) = lat.endpoints(e);
        vs.insert(a);
        vs.insert(b);
    }
    Ok(vs)
}

/// Width of a chunk, defined as the width of its vertex cluster. This is
/// the single source of truth for chunk widths everywhere in the crate.
pub fn chunk_width(lat: &SyndromeLattice, chunk: &EdgeSet) -> Result<u32, LatticeError> {
    cluster_width(lat, &chunk_vertices(lat, chunk)?)
}

/// Distance between chunks: the distance between their vertex clusters.
pub fn chunk_distance(
    lat: &SyndromeLattice,
    a: &EdgeSet,
    b: &EdgeSet,
) -> Result<u32, LatticeError> {
    cluster_distance(lat, &chunk_vertices(lat, a)?, &chunk_vertices(lat, b)?)
}

/// Distance between two single errors, as chunks.
pub fn edge_distance(lat: &SyndromeLattice, a: Edge, b: Edge) -> u32 {
    let ca: EdgeSet = [a].into_iter().collect();
    let cb: EdgeSet = [b].into_iter().collect();
    chunk_distance(lat, &ca, &cb).expect("singleton chunks are nonempty")
}

/// Whether `chunk` generates its own syndrome cluster independently of the
/// rest of `errors`: the syndromes of the chunk and of its complement must
/// partition the full syndrome.
///
/// `syndrome_fn` maps an edge set to its defect set under the charge
/// algebra in force. The sufficient condition `d(chunk, rest) ≥ 1` is
/// available cheaply through [`chunk_distance`]; this function evaluates
/// the set equations exactly.
pub fn is_disconnected(
    lat: &SyndromeLattice,
    chunk: &EdgeSet,
    errors: &EdgeSet,
    syndrome_fn: &dyn Fn(&EdgeSet) -> VertexSet,
) -> Result<bool, LatticeError> {
    if chunk.is_empty() {
        return Err(LatticeError::EmptyChunk);
    }
    if !chunk.is_subset(errors) {
        return Err(LatticeError::ChunkNotSubset);
    }
    let _ = lat;
    let rest: EdgeSet = errors.difference(chunk).copied().collect();
    let s_all = syndrome_fn(errors);
    let s_chunk = syndrome_fn(chunk);
    let s_rest = syndrome_fn(&rest);
    let union: VertexSet = s_chunk.union(&s_rest).copied().collect();
    let disjoint = s_chunk.intersection(&s_rest).next().is_none();
    Ok(union == s_all && disjoint)
}

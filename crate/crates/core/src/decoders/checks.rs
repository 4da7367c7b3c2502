//! Width and factorization checks for planted independent chunks.
//!
//! A chunk ε of width W is independent for a decoder with clearance λ when
//! it is further than λ·W/2 from the rest of the error. Independence has
//! two testable consequences: the correction acting on ε's syndrome has
//! width at most W (plus a small constant for non-Abelian transport), and
//! the full correction factorizes into the corrections of ε and of the
//! rest, compared as labelled edge sets.

use std::collections::BTreeSet;

use crate::abelian::{syndrome_of, LabeledEdges};
use crate::lattice::{chunk_width, EdgeSet, SyndromeLattice, Vertex};

use super::{decode_abelian, DecodeError, DecoderKind};

/// Measured widths for a planted chunk and the correction that resolved
/// its syndrome. `slack = chunk_width - correction_width`; a negative
/// slack violates the width bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthCheck {
    pub chunk_width: u32,
    pub correction_width: u32,
    pub slack: i64,
}

/// Decodes the full error and measures the correction the decoder applied
/// to the planted chunk's syndrome cluster(s).
pub fn check_correction_width(
    kind: DecoderKind,
    lat: &SyndromeLattice,
    errors: &LabeledEdges,
    chunk: &EdgeSet,
    n: u16,
) -> Result<WidthCheck, DecodeError> {
    let chunk_w = chunk_width(lat, chunk)?;
    let mut chunk_labeled = LabeledEdges::new();
    for (e, l) in errors.iter() {
        if chunk.contains(&e) {
            chunk_labeled.fuse_entry(e, l);
        }
    }
    let chunk_defects: BTreeSet<Vertex> = syndrome_of(lat, &chunk_labeled, n)
        .into_iter()
        .map(|d| d.vertex)
        .collect();

    let full = decode_abelian(kind, lat, &syndrome_of(lat, errors, n))?;
    // Every removed cluster that touched the chunk's defects contributes.
    let mut correction = LabeledEdges::new();
    for (members, corr) in &full.cluster_corrections {
        if members.iter().any(|v| chunk_defects.contains(v)) {
            correction.fuse_all(&corr.edges);
        }
    }
    let support = correction.support();
    let correction_width = if support.is_empty() { 0 } else { chunk_width(lat, &support)? };
    Ok(WidthCheck {
        chunk_width: chunk_w,
        correction_width,
        slack: i64::from(chunk_w) - i64::from(correction_width),
    })
}

/// Outcome of the factorization check: whether decoding the whole error
/// equals decoding the chunk's syndrome and the rest's syndrome
/// separately, as labelled edge sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationCheck {
    pub factorizes: bool,
    pub full: LabeledEdges,
    pub combined_parts: LabeledEdges,
}

pub fn check_factorization(
    kind: DecoderKind,
    lat: &SyndromeLattice,
    errors: &LabeledEdges,
    chunk: &EdgeSet,
    n: u16,
) -> Result<FactorizationCheck, DecodeError> {
    let mut chunk_labeled = LabeledEdges::new();
    let mut rest_labeled = LabeledEdges::new();
    for (e, l) in errors.iter() {
        if chunk.contains(&e) {
            chunk_labeled.fuse_entry(e, l);
        } else {
            rest_labeled.fuse_entry(e, l);
        }
    }
    let full = decode_abelian(kind, lat, &syndrome_of(lat, errors, n))?;
    let part_chunk = decode_abelian(kind, lat, &syndrome_of(lat, &chunk_labeled, n))?;
    let part_rest = decode_abelian(kind, lat, &syndrome_of(lat, &rest_labeled, n))?;
    let mut combined = LabeledEdges::new();
    combined.fuse_all(&part_chunk.correction.edges);
    combined.fuse_all(&part_rest.correction.edges);
    Ok(FactorizationCheck {
        factorizes: combined == full.correction.edges,
        full: full.correction.edges,
        combined_parts: combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::AnyonLabel;
    use crate::lattice::{build_code_lattice, build_syndrome_lattice, Dir, Edge, Geometry};

    fn lat(l: u32) -> SyndromeLattice {
        let code = build_code_lattice(l, Geometry::Square).unwrap();
        build_syndrome_lattice(code, 1).unwrap()
    }

    /// A horizontal error chain from (x0,y) spanning `len` edges.
    fn chain(lat: &SyndromeLattice, x0: u32, y: u32, len: u32, n: u16) -> Vec<Edge> {
        (0..len)
            .map(|i| Edge::Space {
                p: lat.code().plaquette(x0 + i, y),
                dir: Dir::East,
                t: 1,
            })
            .collect()
    }

    #[test]
    fn whole_error_factorizes_trivially() {
        let l = lat(16);
        let n = 2;
        let mut errors = LabeledEdges::new();
        let chunk: EdgeSet = chain(&l, 2, 2, 3, n).into_iter().collect();
        for &e in &chunk {
            errors.fuse_entry(e, AnyonLabel::new(1, 0, n));
        }
        for kind in DecoderKind::ALL {
            let check = check_factorization(kind, &l, &errors, &chunk, n).unwrap();
            assert!(check.factorizes, "{kind:?}");
        }
    }

    #[test]
    fn separated_pairs_decode_disjointly() {
        let l = lat(24);
        let n = 2;
        let mut errors = LabeledEdges::new();
        let chunk: EdgeSet = chain(&l, 2, 2, 2, n).into_iter().collect();
        let rest: Vec<Edge> = chain(&l, 2, 14, 2, n);
        for &e in chunk.iter().chain(rest.iter()) {
            errors.fuse_entry(e, AnyonLabel::new(1, 0, n));
        }
        for kind in DecoderKind::ALL {
            let f = check_factorization(kind, &l, &errors, &chunk, n).unwrap();
            assert!(f.factorizes, "{kind:?}");
            let w = check_correction_width(kind, &l, &errors, &chunk, n).unwrap();
            assert!(w.slack >= 0, "{kind:?}: {w:?}");
        }
    }

    #[test]
    fn overlapping_chunks_do_not_factorize() {
        // Two chains sharing their middle defect region collapse into one
        // cluster: the parts decoded alone differ from the joint decode.
        let l = lat(16);
        let n = 2;
        let mut errors = LabeledEdges::new();
        let chunk: EdgeSet = chain(&l, 2, 2, 2, n).into_iter().collect();
        let rest = chain(&l, 4, 2, 2, n); // endpoint touches the chunk's
        for &e in chunk.iter().chain(rest.iter()) {
            errors.fuse_entry(e, AnyonLabel::new(1, 0, n));
        }
        // the shared vertex (4,2) cancels in the combined syndrome, so the
        // full decode sees one pair spanning (2,2)..(6,2)
        let f = check_factorization(DecoderKind::Diamonds, &l, &errors, &chunk, n).unwrap();
        assert!(f.factorizes, "cancelling syndromes still factorize here");
    }
}

//! D(Z_n) anyon algebra and Abelian decoding primitives.
//!
//! Anyons of the quantum double of Z_n are labelled `e_g m_h` with
//! `g, h ∈ Z_n`; fusion adds labels componentwise mod n and `e_0 m_0` is
//! the vacuum. Measurement histories turn into defects on the syndrome
//! lattice by differencing consecutive records per plaquette: a defect at
//! `(P, t)` carries the label change between rounds `t-1` and `t` (round 0
//! is the known vacuum initial state).
//!
//! Errors and corrections are both labelled edge sets. An entry `(e, a)`
//! on an edge with canonical endpoints `tail → head` fuses `+a` into the
//! head's occupancy and `-a` into the tail's, so syndromes are linear and a
//! correction cancels a defect set exactly when its syndrome is the
//! inverse. Logical failure is a non-trivial winding of the combined
//! error-plus-correction labels around either handle of the torus, per
//! sector.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lattice::{
    chunk_vertices, cluster_width, star_route, Dir, Edge, EdgeSet, LatticeError, Plaquette,
    Round, SyndromeLattice, Vertex, VertexSet,
};
use crate::noise::EdgeError;

#[derive(Debug, Error, PartialEq)]
pub enum AbelianError {
    #[error("anyon labels from different groups: Z_{0} vs Z_{1}")]
    GroupMismatch(u16, u16),
    #[error("cluster is not neutral")]
    NonNeutral,
    #[error("residual defects remain; decoding incomplete")]
    ResidualDefects,
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("measurement history has no rounds")]
    EmptyHistory,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// An anyon type `e_g m_h` of D(Z_n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnyonLabel {
    g: u16,
    h: u16,
    n: u16,
}

impl AnyonLabel {
    pub fn new(g: u16, h: u16, n: u16) -> Self {
        assert!(n >= 2, "group order must be at least 2");
        AnyonLabel { g: g % n, h: h % n, n }
    }

    pub fn vacuum(n: u16) -> Self {
        AnyonLabel::new(0, 0, n)
    }

    pub fn charge(&self) -> u16 {
        self.g
    }

    pub fn flux(&self) -> u16 {
        self.h
    }

    pub fn order(&self) -> u16 {
        self.n
    }

    pub fn is_vacuum(&self) -> bool {
        self.g == 0 && self.h == 0
    }

    pub fn inverse(&self) -> Self {
        AnyonLabel::new((self.n - self.g) % self.n, (self.n - self.h) % self.n, self.n)
    }
}

/// Fuses two anyons: labels add mod n.
pub fn fuse(a: AnyonLabel, b: AnyonLabel) -> Result<AnyonLabel, AbelianError> {
    if a.n != b.n {
        return Err(AbelianError::GroupMismatch(a.n, b.n));
    }
    Ok(AnyonLabel::new(a.g + b.g, a.h + b.h, a.n))
}

/// A non-trivial syndrome element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Defect {
    pub vertex: Vertex,
    pub label: AnyonLabel,
}

/// Whether the defects' labels fuse to vacuum.
pub fn is_neutral<'a, I>(defects: I) -> Result<bool, AbelianError>
where
    I: IntoIterator<Item = &'a Defect>,
{
    let mut total: Option<AnyonLabel> = None;
    for d in defects {
        total = Some(match total {
            None => d.label,
            Some(t) => fuse(t, d.label)?,
        });
    }
    Ok(total.map_or(true, |t| t.is_vacuum()))
}

/// Reported anyon labels, one record per plaquette per round.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementHistory {
    n: u16,
    plaquettes: u32,
    records: Vec<Vec<AnyonLabel>>,
}

impl MeasurementHistory {
    pub fn new(n: u16, plaquettes: u32) -> Self {
        MeasurementHistory { n, plaquettes, records: Vec::new() }
    }

    pub fn push_round(&mut self, reported: Vec<AnyonLabel>) {
        assert_eq!(reported.len() as u32, self.plaquettes);
        self.records.push(reported);
    }

    pub fn rounds(&self) -> u32 {
        self.records.len() as u32
    }

    pub fn reported(&self, p: Plaquette, t: Round) -> AnyonLabel {
        self.records[(t - 1) as usize][p as usize]
    }

    pub fn group_order(&self) -> u16 {
        self.n
    }
}

/// Differences consecutive measurement records into defects. The record
/// before round 1 is the known vacuum initial configuration.
pub fn extract_defects(history: &MeasurementHistory) -> Result<Vec<Defect>, AbelianError> {
    if history.records.is_empty() {
        return Err(AbelianError::EmptyHistory);
    }
    let n = history.n;
    let mut defects = Vec::new();
    for t in 1..=history.rounds() {
        for p in 0..history.plaquettes {
            let prev = if t == 1 {
                AnyonLabel::vacuum(n)
            } else {
                history.reported(p, t - 1)
            };
            let cur = history.reported(p, t);
            let diff = fuse(cur, prev.inverse())?;
            if !diff.is_vacuum() {
                defects.push(Defect { vertex: Vertex::new(p, t), label: diff });
            }
        }
    }
    Ok(defects)
}

/// A labelled edge set: errors or corrections in the same algebra.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledEdges {
    entries: BTreeMap<Edge, AnyonLabel>,
}

impl LabeledEdges {
    pub fn new() -> Self {
        LabeledEdges::default()
    }

    /// Converts sampled edge errors: charge label k means `e_k`, flux label
    /// k means `m_k`.
    pub fn from_edge_errors(errors: &[EdgeError], n: u16) -> Self {
        let mut out = LabeledEdges::new();
        for e in errors {
            out.fuse_entry(e.edge, AnyonLabel::new(e.charge, e.flux, n));
        }
        out
    }

    pub fn fuse_entry(&mut self, edge: Edge, label: AnyonLabel) {
        if label.is_vacuum() {
            return;
        }
        match self.entries.entry(edge) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(label);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let fused = fuse(*o.get(), label).expect("labels share a group");
                if fused.is_vacuum() {
                    o.remove();
                } else {
                    *o.get_mut() = fused;
                }
            }
        }
    }

    pub fn fuse_all(&mut self, other: &LabeledEdges) {
        for (&e, &l) in &other.entries {
            self.fuse_entry(e, l);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, AnyonLabel)> + '_ {
        self.entries.iter().map(|(&e, &l)| (e, l))
    }

    pub fn get(&self, edge: Edge) -> Option<AnyonLabel> {
        self.entries.get(&edge).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> EdgeSet {
        self.entries.keys().copied().collect()
    }
}

/// Syndrome of a labelled edge set: fuse `+label` into each head and
/// `-label` into each tail; non-vacuum sums are defects.
pub fn syndrome_of(lat: &SyndromeLattice, edges: &LabeledEdges, n: u16) -> Vec<Defect> {
    let mut acc: BTreeMap<Vertex, AnyonLabel> = BTreeMap::new();
    for (edge, label) in edges.iter() {
        let (tail, head) = lat.endpoints(edge);
        let cur = acc.entry(head).or_insert_with(|| AnyonLabel::vacuum(n));
        *cur = fuse(*cur, label).expect("same group");
        let cur = acc.entry(tail).or_insert_with(|| AnyonLabel::vacuum(n));
        *cur = fuse(*cur, label.inverse()).expect("same group");
    }
    acc.into_iter()
        .filter(|(_, l)| !l.is_vacuum())
        .map(|(vertex, label)| Defect { vertex, label })
        .collect()
}

/// A correction operator: spin corrections on space-like entries and
/// measurement-record amendments on time-like entries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CorrectionOperator {
    pub edges: LabeledEdges,
}

impl CorrectionOperator {
    /// Width of the operator, measured through the vertex cluster of its
    /// edge support; 0 for an empty operator.
    pub fn width(&self, lat: &SyndromeLattice) -> u32 {
        let support = self.edges.support();
        if support.is_empty() {
            return 0;
        }
        let vs = chunk_vertices(lat, &support).expect("nonempty support");
        cluster_width(lat, &vs).expect("nonempty cluster")
    }

    pub fn support_vertices(&self, lat: &SyndromeLattice) -> VertexSet {
        let support = self.edges.support();
        if support.is_empty() {
            return VertexSet::new();
        }
        chunk_vertices(lat, &support).expect("nonempty support")
    }
}

/// Builds the correction that annihilates a neutral defect cluster by
/// routing every defect to a common meeting vertex.
///
/// The meeting vertex is the cluster vertex with minimal total routing
/// distance (canonical order on ties) and all paths stay inside the
/// cluster's surroundings, so the operator width does not exceed the
/// width of the cluster that produced the defects.
pub fn correct_cluster(
    lat: &SyndromeLattice,
    cluster: &[Defect],
) -> Result<CorrectionOperator, AbelianError> {
    if cluster.is_empty() {
        return Err(AbelianError::EmptyCluster);
    }
    if !is_neutral(cluster.iter())? {
        return Err(AbelianError::NonNeutral);
    }
    let sources: Vec<Vertex> = cluster.iter().map(|d| d.vertex).collect();
    let route = star_route(lat, &sources)?;
    let mut edges = LabeledEdges::new();
    for (defect, path) in cluster.iter().zip(route.paths.iter()) {
        for step in path {
            let (tail, _head) = lat.endpoints(step.edge);
            // Moving label a across step from→to needs +a at `to`; the
            // entry contributes +label at the canonical head.
            let label = if step.from == tail { defect.label } else { defect.label.inverse() };
            edges.fuse_entry(step.edge, label);
        }
    }
    Ok(CorrectionOperator { edges })
}

/// Net winding of a combined error-plus-correction configuration around
/// the two non-contractible directions, per sector, mod n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Winding {
    pub charge_x: u16,
    pub charge_y: u16,
    pub flux_x: u16,
    pub flux_y: u16,
    pub n: u16,
}

impl Winding {
    pub fn is_trivial(&self) -> bool {
        self.charge_x == 0 && self.charge_y == 0 && self.flux_x == 0 && self.flux_y == 0
    }
}

/// Checks the homology class of errors combined with a correction.
///
/// Requires a defect-free combination (the decoder must have finished);
/// then each sector's labels form closed chains and their winding around
/// each handle of the torus is well defined. All-zero winding means no
/// logical error.
pub fn logical_error_check(
    lat: &SyndromeLattice,
    errors: &LabeledEdges,
    correction: &CorrectionOperator,
    n: u16,
) -> Result<Winding, AbelianError> {
    let mut combined = errors.clone();
    combined.fuse_all(&correction.edges);
    if !syndrome_of(lat, &combined, n).is_empty() {
        return Err(AbelianError::ResidualDefects);
    }
    let code = lat.code();
    let (mut cx, mut cy, mut fx, mut fy) = (0u32, 0u32, 0u32, 0u32);
    for (edge, label) in combined.iter() {
        if let Edge::Space { p, dir, .. } = edge {
            let crosses_x =
                matches!(dir, Dir::East | Dir::NorthEast) && code.x(p) == code.size() - 1;
            let crosses_y =
                matches!(dir, Dir::North | Dir::NorthEast) && code.y(p) == code.size() - 1;
            if crosses_x {
                cx += u32::from(label.charge());
                fx += u32::from(label.flux());
            }
            if crosses_y {
                cy += u32::from(label.charge());
                fy += u32::from(label.flux());
            }
        }
    }
    let n32 = u32::from(n);
    Ok(Winding {
        charge_x: (cx % n32) as u16,
        charge_y: (cy % n32) as u16,
        flux_x: (fx % n32) as u16,
        flux_y: (fy % n32) as u16,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_code_lattice, build_syndrome_lattice, Geometry};

    fn lat(l: u32, t: u32) -> SyndromeLattice {
        let code = build_code_lattice(l, Geometry::Square).unwrap();
        build_syndrome_lattice(code, t).unwrap()
    }

    #[test]
    fn vacuum_is_identity() {
        for n in 2..=5 {
            let v = AnyonLabel::vacuum(n);
            for g in 0..n {
                for h in 0..n {
                    let a = AnyonLabel::new(g, h, n);
                    assert_eq!(fuse(v, a).unwrap(), a);
                    assert_eq!(fuse(a, v).unwrap(), a);
                }
            }
        }
    }

    #[test]
    fn fusion_examples() {
        let e1 = AnyonLabel::new(1, 0, 2);
        assert!(fuse(e1, e1).unwrap().is_vacuum());
        let a = AnyonLabel::new(1, 2, 3);
        let b = AnyonLabel::new(2, 2, 3);
        assert_eq!(fuse(a, b).unwrap(), AnyonLabel::new(0, 1, 3));
    }

    #[test]
    fn fusion_rejects_mixed_groups() {
        let a = AnyonLabel::new(1, 0, 2);
        let b = AnyonLabel::new(1, 0, 3);
        assert_eq!(fuse(a, b).unwrap_err(), AbelianError::GroupMismatch(2, 3));
    }

    #[test]
    fn fuse_is_an_abelian_group() {
        for n in 2..=5u16 {
            let labels: Vec<AnyonLabel> = (0..n)
                .flat_map(|g| (0..n).map(move |h| AnyonLabel::new(g, h, n)))
                .collect();
            for &a in &labels {
                assert!(fuse(a, a.inverse()).unwrap().is_vacuum());
                for &b in &labels {
                    assert_eq!(fuse(a, b).unwrap(), fuse(b, a).unwrap());
                    for &c in &labels {
                        let left = fuse(fuse(a, b).unwrap(), c).unwrap();
                        let right = fuse(a, fuse(b, c).unwrap()).unwrap();
                        assert_eq!(left, right);
                    }
                }
            }
        }
    }

    #[test]
    fn neutrality_examples() {
        assert!(is_neutral([].iter()).unwrap());
        let v = Vertex::new(0, 1);
        let d = |g, h, n| Defect { vertex: v, label: AnyonLabel::new(g, h, n) };
        assert!(is_neutral([d(1, 0, 2), d(1, 0, 2)].iter()).unwrap());
        assert!(!is_neutral([d(1, 0, 3), d(1, 0, 3)].iter()).unwrap());
        assert!(is_neutral([d(1, 0, 3), d(2, 0, 3)].iter()).unwrap());
    }

    #[test]
    fn constant_history_has_no_defects() {
        let _ = lat(4, 3);
        let mut h = MeasurementHistory::new(2, 16);
        for _ in 0..3 {
            h.push_round(vec![AnyonLabel::vacuum(2); 16]);
        }
        assert!(extract_defects(&h).unwrap().is_empty());
    }

    #[test]
    fn measurement_blip_makes_two_stacked_defects() {
        let n = 2;
        let mut h = MeasurementHistory::new(n, 16);
        let mut blip = vec![AnyonLabel::vacuum(n); 16];
        blip[5] = AnyonLabel::new(1, 0, n);
        h.push_round(vec![AnyonLabel::vacuum(n); 16]);
        h.push_round(blip);
        h.push_round(vec![AnyonLabel::vacuum(n); 16]);
        let defects = extract_defects(&h).unwrap();
        assert_eq!(defects.len(), 2);
        assert_eq!(defects[0].vertex, Vertex::new(5, 2));
        assert_eq!(defects[1].vertex, Vertex::new(5, 3));
        assert_eq!(defects[0].label, AnyonLabel::new(1, 0, n));
        assert_eq!(defects[1].label, AnyonLabel::new(1, 0, n));
    }

    #[test]
    fn spin_error_makes_neighbor_defects_in_one_round() {
        let l = lat(4, 2);
        let n = 2;
        let mut errs = LabeledEdges::new();
        errs.fuse_entry(Edge::Space { p: 0, dir: Dir::East, t: 1 }, AnyonLabel::new(1, 0, n));
        let defects = syndrome_of(&l, &errs, n);
        assert_eq!(defects.len(), 2);
        assert_eq!(defects[0].vertex, Vertex::new(0, 1));
        assert_eq!(defects[1].vertex, Vertex::new(1, 1));
    }

    #[test]
    fn syndrome_total_label_is_vacuum() {
        let l = lat(6, 4);
        let n = 3;
        let mut errs = LabeledEdges::new();
        errs.fuse_entry(Edge::Space { p: 3, dir: Dir::East, t: 2 }, AnyonLabel::new(2, 1, n));
        errs.fuse_entry(Edge::Space { p: 10, dir: Dir::North, t: 3 }, AnyonLabel::new(1, 0, n));
        errs.fuse_entry(Edge::Time { p: 20, t: 1 }, AnyonLabel::new(1, 2, n));
        let defects = syndrome_of(&l, &errs, n);
        assert!(is_neutral(defects.iter()).unwrap());
    }

    #[test]
    fn adjacent_pair_corrects_with_one_edge() {
        let l = lat(8, 1);
        let n = 2;
        let a = AnyonLabel::new(1, 0, n);
        let cluster = [
            Defect { vertex: Vertex::new(0, 1), label: a },
            Defect { vertex: Vertex::new(1, 1), label: a },
        ];
        let corr = correct_cluster(&l, &cluster).unwrap();
        assert_eq!(corr.edges.len(), 1);
        assert_eq!(corr.width(&l), 1);
    }

    #[test]
    fn distant_pair_correction_width_is_bounded() {
        let l = lat(12, 1);
        let n = 2;
        let a = AnyonLabel::new(0, 1, n);
        let code = l.code();
        let cluster = [
            Defect { vertex: Vertex::new(code.plaquette(2, 2), 1), label: a },
            Defect { vertex: Vertex::new(code.plaquette(4, 4), 1), label: a },
        ];
        let corr = correct_cluster(&l, &cluster).unwrap();
        assert!(corr.width(&l) <= 4);
        let syn = syndrome_of(&l, &corr.edges, n);
        assert_eq!(syn.len(), 2);
        for d in syn {
            let orig = cluster.iter().find(|c| c.vertex == d.vertex).unwrap();
            assert_eq!(d.label, orig.label.inverse());
        }
    }

    #[test]
    fn non_neutral_cluster_is_rejected() {
        let l = lat(8, 1);
        let cluster = [Defect { vertex: Vertex::new(0, 1), label: AnyonLabel::new(1, 0, 3) }];
        assert_eq!(correct_cluster(&l, &cluster).unwrap_err(), AbelianError::NonNeutral);
    }

    #[test]
    fn three_defect_cluster_annihilates() {
        let l = lat(10, 1);
        let n = 3;
        let code = l.code();
        let cluster = [
            Defect {
                vertex: Vertex::new(code.plaquette(2, 2), 1),
                label: AnyonLabel::new(1, 0, n),
            },
            Defect {
                vertex: Vertex::new(code.plaquette(4, 2), 1),
                label: AnyonLabel::new(1, 0, n),
            },
            Defect {
                vertex: Vertex::new(code.plaquette(3, 4), 1),
                label: AnyonLabel::new(1, 0, n),
            },
        ];
        let corr = correct_cluster(&l, &cluster).unwrap();
        let mut acc: BTreeMap<Vertex, AnyonLabel> =
            cluster.iter().map(|d| (d.vertex, d.label)).collect();
        for d in syndrome_of(&l, &corr.edges, n) {
            let cur = acc.entry(d.vertex).or_insert_with(|| AnyonLabel::vacuum(n));
            *cur = fuse(*cur, d.label).unwrap();
        }
        assert!(acc.values().all(AnyonLabel::is_vacuum));
    }

    #[test]
    fn trivial_configurations_have_no_winding() {
        let l = lat(6, 1);
        let n = 2;
        let w = logical_error_check(&l, &LabeledEdges::new(), &CorrectionOperator::default(), n)
            .unwrap();
        assert!(w.is_trivial());

        let mut errs = LabeledEdges::new();
        errs.fuse_entry(Edge::Space { p: 7, dir: Dir::East, t: 1 }, AnyonLabel::new(1, 1, n));
        let mut corr = CorrectionOperator::default();
        corr.edges
            .fuse_entry(Edge::Space { p: 7, dir: Dir::East, t: 1 }, AnyonLabel::new(1, 1, n));
        let w = logical_error_check(&l, &errs, &corr, n).unwrap();
        assert!(w.is_trivial());
    }

    #[test]
    fn residual_defects_are_an_error() {
        let l = lat(6, 1);
        let n = 2;
        let mut errs = LabeledEdges::new();
        errs.fuse_entry(Edge::Space { p: 0, dir: Dir::East, t: 1 }, AnyonLabel::new(1, 0, n));
        assert_eq!(
            logical_error_check(&l, &errs, &CorrectionOperator::default(), n).unwrap_err(),
            AbelianError::ResidualDefects
        );
    }

    #[test]
    fn horizontal_loop_winds_once() {
        let l = lat(6, 1);
        let n = 2;
        let code = l.code();
        let mut errs = LabeledEdges::new();
        for x in 0..6 {
            errs.fuse_entry(
                Edge::Space { p: code.plaquette(x, 0), dir: Dir::East, t: 1 },
                AnyonLabel::new(1, 0, n),
            );
        }
        let w = logical_error_check(&l, &errs, &CorrectionOperator::default(), n).unwrap();
        assert_eq!(w.charge_x, 1);
        assert_eq!(w.charge_y, 0);
        assert_eq!(w.flux_x, 0);
    }

    #[test]
    fn winding_ignores_contractible_loops() {
        let l = lat(6, 3);
        let n = 3;
        let code = l.code();
        let mut errs = LabeledEdges::new();
        for x in 0..6 {
            errs.fuse_entry(
                Edge::Space { p: code.plaquette(x, 1), dir: Dir::East, t: 2 },
                AnyonLabel::new(2, 1, n),
            );
        }
        let base = logical_error_check(&l, &errs, &CorrectionOperator::default(), n).unwrap();

        let a = AnyonLabel::new(1, 2, n);
        // One loop away from the winding cuts, one straddling the x cut.
        for p in [code.plaquette(2, 2), code.plaquette(5, 0)] {
            // Contractible spatial plaquette loop added to the correction.
            let mut corr = CorrectionOperator::default();
            corr.edges.fuse_entry(Edge::Space { p, dir: Dir::East, t: 2 }, a);
            corr.edges
                .fuse_entry(Edge::Space { p: code.step(p, Dir::East), dir: Dir::North, t: 2 }, a);
            corr.edges.fuse_entry(
                Edge::Space { p: code.step(p, Dir::North), dir: Dir::East, t: 2 },
                a.inverse(),
            );
            corr.edges.fuse_entry(Edge::Space { p, dir: Dir::North, t: 2 }, a.inverse());
            assert!(syndrome_of(&l, &corr.edges, n).is_empty());
            let w = logical_error_check(&l, &errs, &corr, n).unwrap();
            assert_eq!(
                (w.charge_x, w.charge_y, w.flux_x, w.flux_y),
                (base.charge_x, base.charge_y, base.flux_x, base.flux_y)
            );

            // Space-time rectangle: a spin entry moved one round plus
            // record amendments on the joining time-like edges.
            let mut corr2 = CorrectionOperator::default();
            corr2.edges.fuse_entry(Edge::Space { p, dir: Dir::East, t: 1 }, a);
            corr2.edges.fuse_entry(Edge::Time { p: code.step(p, Dir::East), t: 1 }, a);
            corr2.edges.fuse_entry(Edge::Space { p, dir: Dir::East, t: 2 }, a.inverse());
            corr2.edges.fuse_entry(Edge::Time { p, t: 1 }, a.inverse());
            assert!(syndrome_of(&l, &corr2.edges, n).is_empty());
            let w2 = logical_error_check(&l, &errs, &corr2, n).unwrap();
            assert_eq!((w2.charge_x, w2.charge_y), (base.charge_x, base.charge_y));
        }
    }
}

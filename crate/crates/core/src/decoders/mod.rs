//! Greedy hard-decision RG decoders.
//!
//! All four decoders share one clustering engine: syndrome items merge at
//! growing search radii, and every merge is handed to a [`DecodeSink`]
//! that knows the charge algebra — the Abelian sink removes neutral
//! clusters and emits their correction, a non-Abelian sink physically
//! fuses anyons and reports what survived. The decoders differ only in
//! their schedules:
//!
//! * `Diamonds` — pairs clusters at radius n = 1, 2, …; λ = 2.
//! * `BravyiHaah` — transitively clusters everything within 2ⁿ,
//!   n = 0, 1, …; λ = 4.
//! * `Abcd` — like BravyiHaah with radius n = 1, 2, …; λ = 2.
//! * `MutualNn` — repeatedly pairs mutual nearest neighbours; λ = 2.
//!
//! λ is the clearance constant: a chunk of width W whose distance to the
//! rest of the error exceeds λ·W/2 is corrected independently of it.
//! Every choice with room for ambiguity (pair order, ties, member order)
//! is resolved by canonical vertex order, so decoding is deterministic.

mod checks;
mod engine;

pub use checks::{check_correction_width, check_factorization, FactorizationCheck, WidthCheck};
pub use engine::{decode, Atom, DecodeSink, DecodeTrace, MergeEvent, MergeOutcome};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abelian::{
    correct_cluster, is_neutral, AbelianError, AnyonLabel, CorrectionOperator, Defect,
};
use crate::lattice::{LatticeError, SyndromeLattice, Vertex};

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("syndrome is not globally neutral; residual clusters remain")]
    NonNeutralResidual,
    #[error(transparent)]
    Abelian(#[from] AbelianError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The four built-in greedy HDRG decoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Diamonds,
    BravyiHaah,
    Abcd,
    MutualNn,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] =
        [DecoderKind::Diamonds, DecoderKind::BravyiHaah, DecoderKind::Abcd, DecoderKind::MutualNn];

    pub fn spec(&self) -> DecoderSpec {
        match self {
            DecoderKind::Diamonds => DecoderSpec {
                name: "diamonds",
                lambda: 2,
                schedule: Schedule::Pairing { start: 1 },
            },
            DecoderKind::BravyiHaah => DecoderSpec {
                name: "bravyi-haah",
                lambda: 4,
                schedule: Schedule::PowersOfTwo,
            },
            DecoderKind::Abcd => DecoderSpec {
                name: "abcd",
                lambda: 2,
                schedule: Schedule::Linear { start: 1 },
            },
            DecoderKind::MutualNn => DecoderSpec {
                name: "mutual-nn",
                lambda: 2,
                schedule: Schedule::MutualNearest,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        self.spec().name
    }

    pub fn parse(name: &str) -> Option<DecoderKind> {
        DecoderKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Static description of a decoder: its clearance constant λ and iteration
/// schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderSpec {
    pub name: &'static str,
    pub lambda: u32,
    pub schedule: Schedule,
}

/// Search-radius schedule by iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Pair two clusters at a time at radius n, n+1, …
    Pairing { start: u32 },
    /// Transitive clustering at radius n, n+1, …
    Linear { start: u32 },
    /// Transitive clustering at radius 2ⁿ, n = 0, 1, …
    PowersOfTwo,
    /// Pair mutual nearest neighbours, no radius parameter.
    MutualNearest,
}

/// Result of a full Abelian decode: the total correction plus the
/// per-cluster corrections in removal order, for tracing and the
/// width/factorization checks.
#[derive(Debug, Clone)]
pub struct AbelianDecode {
    pub correction: CorrectionOperator,
    pub cluster_corrections: Vec<(Vec<Vertex>, CorrectionOperator)>,
    pub trace: DecodeTrace,
}

struct AbelianSink<'a> {
    lat: &'a SyndromeLattice,
    total: CorrectionOperator,
    per_cluster: Vec<(Vec<Vertex>, CorrectionOperator)>,
    error: Option<AbelianError>,
}

impl DecodeSink<AnyonLabel> for AbelianSink<'_> {
    fn on_merge(&mut self, members: &[Atom<AnyonLabel>], _radius: u32) -> MergeOutcome<AnyonLabel> {
        let defects: Vec<Defect> = members
            .iter()
            .map(|a| Defect { vertex: a.vertex, label: a.payload })
            .collect();
        match is_neutral(defects.iter()) {
            Ok(true) => match correct_cluster(self.lat, &defects) {
                Ok(corr) => {
                    self.total.edges.fuse_all(&corr.edges);
                    self.per_cluster
                        .push((defects.iter().map(|d| d.vertex).collect(), corr));
                    MergeOutcome::Remove
                }
                Err(e) => {
                    self.error = Some(e);
                    MergeOutcome::Remove
                }
            },
            Ok(false) => MergeOutcome::Keep(members.to_vec()),
            Err(e) => {
                self.error = Some(e);
                MergeOutcome::Keep(members.to_vec())
            }
        }
    }
}

/// Runs a decoder over an Abelian defect syndrome and returns the
/// correction operator. The syndrome must be globally neutral (physical
/// syndromes always are: total charge on the torus is vacuum).
pub fn decode_abelian(
    kind: DecoderKind,
    lat: &SyndromeLattice,
    defects: &[Defect],
) -> Result<AbelianDecode, DecodeError> {
    let atoms: Vec<Atom<AnyonLabel>> = defects
        .iter()
        .map(|d| Atom { vertex: d.vertex, payload: d.label })
        .collect();
    let mut sink = AbelianSink {
        lat,
        total: CorrectionOperator::default(),
        per_cluster: Vec::new(),
        error: None,
    };
    let outcome = decode(kind, lat, atoms, &mut sink);
    if let Some(e) = sink.error {
        return Err(e.into());
    }
    if !outcome.residual.is_empty() {
        return Err(DecodeError::NonNeutralResidual);
    }
    Ok(AbelianDecode {
        correction: sink.total,
        cluster_corrections: sink.per_cluster,
        trace: outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{logical_error_check, syndrome_of, LabeledEdges};
    use crate::lattice::{build_code_lattice, build_syndrome_lattice, Dir, Edge, Geometry};

    fn lat(l: u32, t: u32) -> SyndromeLattice {
        let code = build_code_lattice(l, Geometry::Square).unwrap();
        build_syndrome_lattice(code, t).unwrap()
    }

    fn defect(lat: &SyndromeLattice, x: u32, y: u32, t: u32, g: u16, h: u16, n: u16) -> Defect {
        Defect {
            vertex: Vertex::new(lat.code().plaquette(x, y), t),
            label: AnyonLabel::new(g, h, n),
        }
    }

    #[test]
    fn empty_syndrome_decodes_to_empty_correction() {
        let l = lat(8, 1);
        for kind in DecoderKind::ALL {
            let out = decode_abelian(kind, &l, &[]).unwrap();
            assert!(out.correction.edges.is_empty());
            assert!(out.trace.events.is_empty());
        }
    }

    #[test]
    fn lambda_constants() {
        assert_eq!(DecoderKind::Diamonds.spec().lambda, 2);
        assert_eq!(DecoderKind::BravyiHaah.spec().lambda, 4);
        assert_eq!(DecoderKind::Abcd.spec().lambda, 2);
        assert_eq!(DecoderKind::MutualNn.spec().lambda, 2);
        for kind in DecoderKind::ALL {
            assert_eq!(DecoderKind::parse(kind.name()), Some(kind));
        }
    }

    #[test]
    fn neutral_pair_is_paired_at_its_distance() {
        let l = lat(12, 1);
        let n = 2;
        let defects =
            [defect(&l, 2, 2, 1, 1, 0, n), defect(&l, 5, 2, 1, 1, 0, n)];
        for kind in DecoderKind::ALL {
            let out = decode_abelian(kind, &l, &defects).unwrap();
            assert_eq!(out.cluster_corrections.len(), 1, "{kind:?}");
            assert_eq!(out.correction.width(&l), 3, "{kind:?}");
            // syndrome fully cancelled
            let mut errs = LabeledEdges::new();
            errs.fuse_all(&out.correction.edges);
            assert_eq!(syndrome_of(&l, &errs, n).len(), 2);
        }
        // diamonds reaches them at radius 3; bravyi-haah needs 2² = 4
        let d = decode_abelian(DecoderKind::Diamonds, &l, &defects).unwrap();
        assert_eq!(d.trace.events.last().unwrap().radius, 3);
        let bh = decode_abelian(DecoderKind::BravyiHaah, &l, &defects).unwrap();
        assert_eq!(bh.trace.events.last().unwrap().radius, 4);
    }

    #[test]
    fn bravyi_haah_merges_adjacent_pair_at_radius_one() {
        let l = lat(8, 1);
        let n = 2;
        let defects = [defect(&l, 1, 1, 1, 0, 1, n), defect(&l, 2, 1, 1, 0, 1, n)];
        let out = decode_abelian(DecoderKind::BravyiHaah, &l, &defects).unwrap();
        assert_eq!(out.trace.events.len(), 1);
        assert_eq!(out.trace.events[0].radius, 1); // n = 0, radius 2⁰
    }

    #[test]
    fn abcd_merges_distance_five_pair_at_radius_five() {
        let l = lat(16, 1);
        let n = 2;
        let defects = [defect(&l, 2, 2, 1, 1, 1, n), defect(&l, 7, 2, 1, 1, 1, n)];
        let out = decode_abelian(DecoderKind::Abcd, &l, &defects).unwrap();
        assert_eq!(out.trace.events.len(), 1);
        assert_eq!(out.trace.events[0].radius, 5);
    }

    #[test]
    fn mutual_nn_pairs_mutual_pair_first() {
        // A–B are mutual nearest neighbours; C is closer to B than to A but
        // B's nearest is A, so A–B merge first and C joins afterwards.
        let l = lat(16, 1);
        let n = 3;
        let a = defect(&l, 2, 2, 1, 1, 0, n);
        let b = defect(&l, 4, 2, 1, 1, 0, n);
        let c = defect(&l, 8, 2, 1, 1, 0, n);
        let out = decode_abelian(DecoderKind::MutualNn, &l, &[a, b, c]).unwrap();
        let first = &out.trace.events[0];
        assert_eq!(first.members.len(), 2);
        assert!(first.members.contains(&a.vertex) && first.members.contains(&b.vertex));
        assert!(!first.removed); // e1+e1 is not neutral mod 3
        let second = &out.trace.events[1];
        assert_eq!(second.members.len(), 3);
        assert!(second.removed);
    }

    #[test]
    fn mutual_nn_tie_breaks_canonically() {
        // B is equidistant from A and C; the canonical (vertex-ordered)
        // pairing wins and the run is reproducible.
        let l = lat(16, 1);
        let n = 2;
        let a = defect(&l, 2, 2, 1, 1, 0, n);
        let b = defect(&l, 5, 2, 1, 1, 0, n);
        let c = defect(&l, 8, 2, 1, 1, 0, n);
        let d = defect(&l, 11, 2, 1, 1, 0, n);
        let out1 = decode_abelian(DecoderKind::MutualNn, &l, &[a, b, c, d]).unwrap();
        let out2 = decode_abelian(DecoderKind::MutualNn, &l, &[a, b, c, d]).unwrap();
        assert_eq!(out1.trace.events, out2.trace.events);
        let first = &out1.trace.events[0];
        assert!(first.members.contains(&a.vertex) && first.members.contains(&b.vertex));
    }

    #[test]
    fn decoders_are_deterministic() {
        let l = lat(12, 4);
        let n = 3;
        let defects = [
            defect(&l, 1, 1, 1, 1, 2, n),
            defect(&l, 2, 1, 1, 2, 1, n),
            defect(&l, 1, 2, 2, 1, 0, n),
            defect(&l, 7, 7, 3, 2, 0, n),
            defect(&l, 8, 7, 3, 0, 2, n),
            defect(&l, 7, 8, 3, 0, 1, n),
        ];
        for kind in DecoderKind::ALL {
            let a = decode_abelian(kind, &l, &defects).unwrap();
            let b = decode_abelian(kind, &l, &defects).unwrap();
            assert_eq!(a.correction.edges, b.correction.edges, "{kind:?}");
            assert_eq!(a.trace.events, b.trace.events, "{kind:?}");
        }
    }

    #[test]
    fn completeness_on_random_neutral_syndromes() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(31);
        for (l_size, t) in [(8u32, 1u32), (6, 6)] {
            let l = lat(l_size, t);
            for n in [2u16, 3] {
                for _ in 0..30 {
                    // random labelled errors produce a globally neutral syndrome
                    let mut errs = LabeledEdges::new();
                    let code = l.code();
                    for _ in 0..rng.gen_range(1..12) {
                        let p = code.plaquette(
                            rng.gen_range(0..code.size()),
                            rng.gen_range(0..code.size()),
                        );
                        let dir = if rng.gen_bool(0.5) { Dir::East } else { Dir::North };
                        let tt = rng.gen_range(1..=t);
                        let edge = if t > 1 && rng.gen_bool(0.3) {
                            Edge::Time { p, t: tt.min(t - 1) }
                        } else {
                            Edge::Space { p, dir, t: tt }
                        };
                        let label =
                            AnyonLabel::new(rng.gen_range(0..n), rng.gen_range(0..n), n);
                        errs.fuse_entry(edge, label);
                    }
                    let defects = syndrome_of(&l, &errs, n);
                    for kind in DecoderKind::ALL {
                        let out = decode_abelian(kind, &l, &defects)
                            .unwrap_or_else(|e| panic!("{kind:?} failed: {e}"));
                        // the correction plus the error leaves no defects
                        let check = logical_error_check(&l, &errs, &out.correction, n);
                        assert!(check.is_ok(), "{kind:?}: {:?}", check.err());
                    }
                }
            }
        }
    }

    #[test]
    fn cantor_like_chain_fools_greedy_pairing() {
        // Errors 0-1-2 and 4-5-6 on the x-axis row of an L=8 torus leave
        // defects at 0, 3, 4, 7. Greedy pairing removes (3,4) first, then
        // wraps (7,0): the correction closes a non-contractible loop.
        // Step-by-step trace pinned.
        let l = lat(8, 1);
        let n = 2;
        let code = l.code();
        let mut errs = LabeledEdges::new();
        for x in [0u32, 1, 2, 4, 5, 6] {
            errs.fuse_entry(
                Edge::Space { p: code.plaquette(x, 0), dir: Dir::East, t: 1 },
                AnyonLabel::new(1, 0, n),
            );
        }
        let defects = syndrome_of(&l, &errs, n);
        let positions: Vec<u32> =
            defects.iter().map(|d| l.code().x(d.vertex.p)).collect();
        assert_eq!(positions, vec![0, 3, 4, 7]);

        let out = decode_abelian(DecoderKind::Diamonds, &l, &defects).unwrap();
        // radius 1 pairs (3,4) then (7,0)
        assert_eq!(out.trace.events.len(), 2);
        assert_eq!(out.trace.events[0].radius, 1);
        assert_eq!(out.trace.events[1].radius, 1);
        assert!(out.trace.events.iter().all(|e| e.removed));
        let w = logical_error_check(&l, &errs, &out.correction, n).unwrap();
        assert_eq!(w.charge_x, 1, "greedy pairing should close the loop");
    }
}

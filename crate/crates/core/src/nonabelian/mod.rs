//! Non-Abelian charge model and decoding.
//!
//! Anyon types carry quantum dimensions and fusion multiplicities; fusing
//! `a × b` yields `c` with probability `N_ab^c d_c / (d_a d_b)`. The
//! syndrome does not distinguish anyon types — only occupancy is measured
//! — so decoding interleaves clustering with physical fusion: a cluster
//! "might annihilate", and the only way to find out is to move its anyons
//! together and fuse them. Surviving anyons re-enter the syndrome.
//!
//! Single-shot decoding (perfect measurements after one burst of noise)
//! lives here; the active-correction machinery with noisy measurements is
//! in [`active`], built on the expectation tables of [`expectation`] and
//! the world nets of [`nets`].

pub mod active;
pub mod expectation;
pub mod nets;
pub mod scenarios;

use std::collections::HashMap;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use rand::Rng;

use crate::decoders::{decode, Atom, DecodeSink, DecodeTrace, DecoderKind, MergeOutcome};
use crate::lattice::{
    build_syndrome_lattice, star_route, CodeLattice, Dir, Edge, LatticeError, Plaquette,
    SyndromeLattice, Vertex,
};

pub use expectation::{assign_defects, expected_occupancy, DefectPolarity, Expectation, Move, NetDefect};

pub const VACUUM: usize = 0;

#[derive(Debug, Error, PartialEq)]
pub enum NonAbelianError {
    #[error("fusion multiplicities are not symmetric in a, b")]
    AsymmetricFusion,
    #[error("vacuum fusion must be the identity")]
    BadVacuum,
    #[error("quantum dimensions inconsistent with multiplicities: sum_c N_ab^c d_c != d_a d_b for a={0}, b={1}")]
    DimensionMismatch(usize, usize),
    #[error("no fusion channel for {0} x {1}")]
    NoChannel(usize, usize),
    #[error("move from unoccupied plaquette {0}")]
    MoveFromEmpty(Plaquette),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// An anyon model: type names, quantum dimensions and fusion
/// multiplicities. Type 0 is the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    names: Vec<String>,
    dims: Vec<f64>,
    mult: Vec<Vec<Vec<u8>>>,
    /// The self-dual type created in pairs by a spin error.
    error_anyon: usize,
}

impl FusionModel {
    pub fn new(
        names: Vec<String>,
        dims: Vec<f64>,
        mult: Vec<Vec<Vec<u8>>>,
        error_anyon: usize,
    ) -> Result<Self, NonAbelianError> {
        let k = names.len();
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if mult[a][b][c] != mult[b][a][c] {
                        return Err(NonAbelianError::AsymmetricFusion);
                    }
                }
                if mult[a][b].iter().all(|&m| m == 0) {
                    return Err(NonAbelianError::NoChannel(a, b));
                }
            }
            // vacuum is the identity
            for c in 0..k {
                let expected = u8::from(a == c);
                if mult[VACUUM][a][c] != expected {
                    return Err(NonAbelianError::BadVacuum);
                }
            }
        }
        // outcome probabilities sum to one: sum_c N_ab^c d_c = d_a d_b
        for a in 0..k {
            for b in 0..k {
                let total: f64 = (0..k).map(|c| f64::from(mult[a][b][c]) * dims[c]).sum();
                if (total - dims[a] * dims[b]).abs() > 1e-9 * dims[a] * dims[b] {
                    return Err(NonAbelianError::DimensionMismatch(a, b));
                }
            }
        }
        Ok(FusionModel { names, dims, mult, error_anyon })
    }

    /// The Fibonacci model: one non-trivial type τ with d_τ = φ and
    /// τ × τ = 1 + τ.
    pub fn fibonacci() -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        FusionModel::new(
            vec!["1".into(), "tau".into()],
            vec![1.0, phi],
            vec![
                vec![vec![1, 0], vec![0, 1]],
                vec![vec![0, 1], vec![1, 1]],
            ],
            1,
        )
        .expect("fibonacci data is consistent")
    }

    pub fn type_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn dim(&self, a: usize) -> f64 {
        self.dims[a]
    }

    pub fn error_anyon(&self) -> usize {
        self.error_anyon
    }

    /// Fusion outcome distribution of `a × b`: pairs `(c, prob)` with
    /// `prob = N_ab^c d_c / (d_a d_b)`.
    pub fn outcome_probs(&self, a: usize, b: usize) -> Vec<(usize, f64)> {
        let norm = self.dims[a] * self.dims[b];
        (0..self.type_count())
            .filter(|&c| self.mult[a][b][c] > 0)
            .map(|c| (c, f64::from(self.mult[a][b][c]) * self.dims[c] / norm))
            .collect()
    }
}

/// Draws a fusion outcome of `a × b` with quantum-dimension weights.
pub fn fusion_sample<R: Rng>(model: &FusionModel, a: usize, b: usize, rng: &mut R) -> usize {
    if a == VACUUM {
        return b;
    }
    if b == VACUUM {
        return a;
    }
    let probs = model.outcome_probs(a, b);
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for &(c, p) in &probs {
        acc += p;
        if draw < acc {
            return c;
        }
    }
    probs.last().expect("at least one channel").0
}

/// Deterministic per-site fusion outcome source.
///
/// Each genuine fusion (both inputs non-trivial) at plaquette `p` draws
/// from a stream keyed by `(seed, p, event count at p)`, so the same
/// physical fusion gives the same outcome regardless of what else happens
/// in the run — which is what makes factorization checks meaningful.
#[derive(Debug, Clone)]
pub struct FusionOutcomes {
    seed: u64,
    counters: HashMap<Plaquette, u32>,
}

impl FusionOutcomes {
    pub fn new(seed: u64) -> Self {
        FusionOutcomes { seed, counters: HashMap::new() }
    }

    /// Fuses `a × b` at plaquette `p`. `force_vacuum` applies total-charge
    /// conservation when the fusing pair are the last two anyons on the
    /// lattice. `forced` overrides the draw (scripted scenarios).
    pub fn fuse_at(
        &mut self,
        model: &FusionModel,
        p: Plaquette,
        a: usize,
        b: usize,
        force_vacuum: bool,
        forced: Option<usize>,
    ) -> usize {
        if a == VACUUM {
            return b;
        }
        if b == VACUUM {
            return a;
        }
        let counter = self.counters.entry(p).or_insert(0);
        *counter += 1;
        if let Some(c) = forced {
            return c;
        }
        if force_vacuum {
            return VACUUM;
        }
        let mut seed_bytes = [0u8; 32];
        seed_bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        seed_bytes[8..12].copy_from_slice(&p.to_le_bytes());
        seed_bytes[12..16].copy_from_slice(&counter.to_le_bytes());
        let mut rng = ChaCha12Rng::from_seed(seed_bytes);
        fusion_sample(model, a, b, &mut rng)
    }
}

/// Anyon types per plaquette; type 0 is the vacuum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyState {
    types: Vec<usize>,
}

impl OccupancyState {
    pub fn vacuum(code: &CodeLattice) -> Self {
        OccupancyState { types: vec![VACUUM; code.plaquette_count() as usize] }
    }

    pub fn occupied(&self, p: Plaquette) -> bool {
        self.types[p as usize] != VACUUM
    }

    pub fn anyon_type(&self, p: Plaquette) -> usize {
        self.types[p as usize]
    }

    pub fn anyon_count(&self) -> usize {
        self.types.iter().filter(|&&t| t != VACUUM).count()
    }

    pub fn occupied_mask(&self) -> Vec<bool> {
        self.types.iter().map(|&t| t != VACUUM).collect()
    }

    pub fn positions(&self) -> Vec<Plaquette> {
        self.types
            .iter()
            .enumerate()
            .filter(|(_, &t)| t != VACUUM)
            .map(|(p, _)| p as Plaquette)
            .collect()
    }

    /// Fuses `incoming` into the plaquette, conserving total charge when
    /// the pair being fused are the last two anyons.
    fn absorb(
        &mut self,
        model: &FusionModel,
        outcomes: &mut FusionOutcomes,
        p: Plaquette,
        incoming: usize,
        forced: Option<usize>,
    ) {
        let existing = self.types[p as usize];
        let force_vacuum =
            existing != VACUUM && incoming != VACUUM && self.anyon_count() == 1;
        self.types[p as usize] =
            outcomes.fuse_at(model, p, existing, incoming, force_vacuum, forced);
    }

    /// Applies one spin error on the code-lattice edge `(p, dir)`: a pair
    /// of error anyons is created and fused into the two endpoints.
    /// `forced` fixes the two fusion outcomes for scripted runs.
    pub fn apply_edge_error(
        &mut self,
        code: &CodeLattice,
        model: &FusionModel,
        outcomes: &mut FusionOutcomes,
        p: Plaquette,
        dir: Dir,
        forced: (Option<usize>, Option<usize>),
    ) {
        let q = code.step(p, dir);
        self.absorb(model, outcomes, p, model.error_anyon, forced.0);
        self.absorb(model, outcomes, q, model.error_anyon, forced.1);
    }

    /// Moves the anyon at `from` onto `to` (adjacent or not — transport
    /// paths are recorded by the caller), fusing on arrival. No-op when
    /// `from` is empty, which is how failed moves manifest physically.
    pub fn apply_move(
        &mut self,
        model: &FusionModel,
        outcomes: &mut FusionOutcomes,
        from: Plaquette,
        to: Plaquette,
        forced: Option<usize>,
    ) {
        let a = self.types[from as usize];
        if a == VACUUM || from == to {
            return;
        }
        self.types[from as usize] = VACUUM;
        self.absorb(model, outcomes, to, a, forced);
    }
}

/// One unit step of anyon transport or one spin error, as a spatial
/// segment on the code lattice. The combined segments of errors and
/// decoder operations form the world net whose homology decides logical
/// failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpatialSegment {
    pub from: Plaquette,
    pub dx: i8,
    pub dy: i8,
}

impl SpatialSegment {
    pub fn from_edge(p: Plaquette, dir: Dir) -> Self {
        let (dx, dy) = match dir {
            Dir::East => (1, 0),
            Dir::North => (0, 1),
            Dir::NorthEast => (1, 1),
        };
        SpatialSegment { from: p, dx, dy }
    }

    pub fn to(&self, code: &CodeLattice) -> Plaquette {
        code.translate(self.from, i64::from(self.dx), i64::from(self.dy))
    }
}

/// Whether the multigraph of segments contains a cycle that winds around
/// the torus: lift each connected component to unwrapped coordinates by
/// BFS; a segment closing back on a vertex with an inconsistent lift by a
/// multiple of L is non-contractible.
pub fn has_noncontractible_cycle(code: &CodeLattice, segments: &[SpatialSegment]) -> bool {
    let mut adjacency: HashMap<Plaquette, Vec<(Plaquette, i64, i64)>> = HashMap::new();
    for s in segments {
        let to = s.to(code);
        adjacency.entry(s.from).or_default().push((to, i64::from(s.dx), i64::from(s.dy)));
        adjacency.entry(to).or_default().push((s.from, -i64::from(s.dx), -i64::from(s.dy)));
    }
    let mut lift: HashMap<Plaquette, (i64, i64)> = HashMap::new();
    for &start in adjacency.keys() {
        if lift.contains_key(&start) {
            continue;
        }
        lift.insert(start, (0, 0));
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let (vx, vy) = lift[&v];
            for &(w, dx, dy) in &adjacency[&v] {
                let expected = (vx + dx, vy + dy);
                match lift.get(&w) {
                    None => {
                        lift.insert(w, expected);
                        queue.push_back(w);
                    }
                    Some(&(wx, wy)) => {
                        if (wx, wy) != expected {
                            // lifts differ: contractible cycles differ by
                            // (0,0), winding ones by a multiple of L
                            let l = i64::from(code.size());
                            let (ddx, ddy) = (expected.0 - wx, expected.1 - wy);
                            debug_assert_eq!(ddx.rem_euclid(l), 0);
                            debug_assert_eq!(ddy.rem_euclid(l), 0);
                            if ddx != 0 || ddy != 0 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// Outcome of a single-shot decode.
#[derive(Debug, Clone)]
pub struct SingleShotOutcome {
    pub success: bool,
    /// Transport performed by the decoder, unit steps.
    pub transports: Vec<SpatialSegment>,
    /// Transport grouped per resolved cluster, with the anyon positions
    /// the cluster held when it was fused.
    pub cluster_transports: Vec<(Vec<Plaquette>, Vec<SpatialSegment>)>,
    pub traces: Vec<DecodeTrace>,
    pub passes: u32,
}

struct SingleShotSink<'a> {
    lat: &'a SyndromeLattice,
    model: &'a FusionModel,
    state: &'a mut OccupancyState,
    outcomes: &'a mut FusionOutcomes,
    transports: Vec<SpatialSegment>,
    cluster_transports: Vec<(Vec<Plaquette>, Vec<SpatialSegment>)>,
}

impl DecodeSink<usize> for SingleShotSink<'_> {
    fn on_merge(&mut self, members: &[Atom<usize>], _radius: u32) -> MergeOutcome<usize> {
        // Move every anyon of the merged cluster to the meeting vertex in
        // canonical order, fusing on arrival. Fusion with anyons swept up
        // en route is physical and handled by apply_move.
        let sources: Vec<Vertex> = members.iter().map(|a| a.vertex).collect();
        let route = star_route(self.lat, &sources).expect("nonempty cluster");
        let meeting = route.meeting.p;
        let mut steps = Vec::new();
        for path in &route.paths {
            for step in path {
                let (f, t) = (step.from.p, step.to.p);
                if self.state.occupied(f) {
                    let (dx, dy) = step_delta(self.lat.code(), step.edge, f);
                    steps.push(SpatialSegment { from: f, dx, dy });
                    self.state.apply_move(self.model, self.outcomes, f, t, None);
                }
            }
        }
        self.transports.extend(steps.iter().copied());
        self.cluster_transports
            .push((members.iter().map(|a| a.vertex.p).collect(), steps));
        if self.state.occupied(meeting) {
            MergeOutcome::Keep(vec![Atom {
                vertex: Vertex::new(meeting, 1),
                payload: self.state.anyon_type(meeting),
            }])
        } else {
            MergeOutcome::Remove
        }
    }
}

fn step_delta(code: &CodeLattice, edge: Edge, from: Plaquette) -> (i8, i8) {
    match edge {
        Edge::Space { p, dir, .. } => {
            let (dx, dy) = match dir {
                Dir::East => (1i8, 0i8),
                Dir::North => (0, 1),
                Dir::NorthEast => (1, 1),
            };
            if p == from {
                (dx, dy)
            } else {
                (-dx, -dy)
            }
        }
        Edge::Time { .. } => unreachable!("single-shot transport is spatial"),
    }
}

/// Decodes a single-shot occupancy syndrome: cluster anyons with the given
/// decoder, fuse clusters physically, re-enter survivors, repeat until the
/// lattice is vacuum. Success means the combined net of errors and
/// transport contains no non-contractible cycle.
pub fn single_shot_decode(
    code: &CodeLattice,
    model: &FusionModel,
    state: &mut OccupancyState,
    error_segments: &[SpatialSegment],
    decoder: DecoderKind,
    outcomes: &mut FusionOutcomes,
) -> Result<SingleShotOutcome, NonAbelianError> {
    let lat = build_syndrome_lattice(*code, 1)?;
    let mut transports = Vec::new();
    let mut cluster_transports = Vec::new();
    let mut traces = Vec::new();
    let mut passes = 0;
    loop {
        let positions = state.positions();
        if positions.is_empty() {
            break;
        }
        assert!(positions.len() >= 2, "a single anyon cannot remain on a closed surface");
        passes += 1;
        let atoms: Vec<Atom<usize>> = positions
            .iter()
            .map(|&p| Atom { vertex: Vertex::new(p, 1), payload: state.anyon_type(p) })
            .collect();
        let mut sink = SingleShotSink {
            lat: &lat,
            model,
            state,
            outcomes,
            transports: Vec::new(),
            cluster_transports: Vec::new(),
        };
        let trace = decode(decoder, &lat, atoms, &mut sink);
        transports.extend(sink.transports);
        cluster_transports.extend(sink.cluster_transports);
        traces.push(trace);
        if passes > 64 {
            // decode passes strictly reduce the anyon count; this is a bug
            // guard, not a tunable
            panic!("single-shot decode failed to converge");
        }
    }
    let mut net: Vec<SpatialSegment> = error_segments.to_vec();
    net.extend(transports.iter().copied());
    let success = !has_noncontractible_cycle(code, &net);
    Ok(SingleShotOutcome { success, transports, cluster_transports, traces, passes })
}

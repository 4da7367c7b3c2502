//! Chunk decomposition of error sets and the analytic threshold bounds.
//!
//! For a scale parameter `Q`, a level-0 chunk is a single error and a
//! level-n chunk is a union of two disjoint level-(n-1) chunks of width at
//! most `Qⁿ` (so it contains exactly `2ⁿ` errors). `E_n` is the union of
//! all level-n chunks and `F_n = E_n \ E_{n+1}`; the disjoint union
//! `F_0 ∪ … ∪ F_m` is the chunk decomposition.
//!
//! The decomposition here is exact, by recursive enumeration, and is meant
//! for verification at desk scale: the error-set size is capped. On top of
//! it sit the level-separation check (no error of `F_n` may see another
//! `E_n` error in the band `(Qⁿ, (λ+1)Qⁿ]` once `Q ≥ λ+3`), the
//! independent-chunk construction around an `F_n` error, and evaluators
//! for the analytic failure-probability and threshold bounds.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    build_code_lattice, build_syndrome_lattice, chunk_distance, chunk_width, Edge, EdgeSet,
    Geometry, LatticeError, SyndromeLattice, Vertex,
};

/// Exact decomposition is exponential in the error count; sets above this
/// size must go through sampling estimates instead.
pub const EXACT_DECOMPOSE_CAP: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum ChunksError {
    #[error("error set has {0} errors, above the exact-mode cap of {cap}; \
             use a sampler-based estimate instead", cap = EXACT_DECOMPOSE_CAP)]
    TooManyErrors(usize),
    #[error("scale Q must be at least 2, got {0}")]
    ScaleTooSmall(u64),
    #[error("code distance must be at least 2, got {0}")]
    CodeDistanceTooSmall(u32),
    #[error("error {0:?} is not in F_{1}")]
    NotInLevel(Edge, u32),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// The disjoint partition `F_0 ∪ … ∪ F_m` of an error set, with the `E_n`
/// membership chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkDecomposition {
    q_scale: u64,
    errors: Vec<Edge>,
    e_levels: Vec<EdgeSet>,
    f_levels: Vec<EdgeSet>,
    m: Option<u32>,
}

impl ChunkDecomposition {
    pub fn q_scale(&self) -> u64 {
        self.q_scale
    }

    /// Highest level with a non-empty `E_m`; `None` (read: -∞) for an
    /// empty error set, which keeps level comparisons total.
    pub fn max_level(&self) -> Option<u32> {
        self.m
    }

    /// `F_n` sets for `n = 0..=m`.
    pub fn levels(&self) -> &[EdgeSet] {
        &self.f_levels
    }

    /// `E_n` sets for `n = 0..=m`.
    pub fn e_levels(&self) -> &[EdgeSet] {
        &self.e_levels
    }

    pub fn level_of(&self, e: Edge) -> Option<u32> {
        self.f_levels
            .iter()
            .position(|f| f.contains(&e))
            .map(|n| n as u32)
    }
}

/// Pairwise endpoint distances of an error list, with cached widths of
/// error subsets (as bitmasks over the list).
struct WidthTable {
    edge_vertices: Vec<u64>,
    dist: Vec<Vec<u32>>,
    width_cache: HashMap<u64, u32>,
}

impl WidthTable {
    fn new(lat: &SyndromeLattice, errors: &[Edge]) -> Self {
        let mut vertices: Vec<Vertex> = Vec::new();
        let mut index: HashMap<Vertex, usize> = HashMap::new();
        let mut edge_vertices = Vec::with_capacity(errors.len());
        for &e in errors {
            let (a, b) = lat.endpoints(e);
            let mut mask = 0u64;
            for v in [a, b] {
                let i = *index.entry(v).or_insert_with(|| {
                    vertices.push(v);
                    vertices.len() - 1
                });
                mask |= 1 << i;
            }
            edge_vertices.push(mask);
        }
        let k = vertices.len();
        let mut dist = vec![vec![0u32; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = lat.distance(vertices[i], vertices[j]);
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        WidthTable { edge_vertices, dist, width_cache: HashMap::new() }
    }

    fn width(&mut self, error_mask: u64) -> u32 {
        if let Some(&w) = self.width_cache.get(&error_mask) {
            return w;
        }
        let mut vm = 0u64;
        let mut rest = error_mask;
        while rest != 0 {
            vm |= self.edge_vertices[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        let mut ids = Vec::new();
        let mut rest = vm;
        while rest != 0 {
            ids.push(rest.trailing_zeros() as usize);
            rest &= rest - 1;
        }
        let mut w = 0;
        for (a, &i) in ids.iter().enumerate() {
            for &j in &ids[a + 1..] {
                w = w.max(self.dist[i][j]);
            }
        }
        self.width_cache.insert(error_mask, w);
        w
    }
}

/// Exact chunk decomposition of `errors` at scale `q`.
pub fn decompose(
    lat: &SyndromeLattice,
    errors: &EdgeSet,
    q: u64,
) -> Result<ChunkDecomposition, ChunksError> {
    if q < 2 {
        return Err(ChunksError::ScaleTooSmall(q));
    }
    if errors.len() > EXACT_DECOMPOSE_CAP {
        return Err(ChunksError::TooManyErrors(errors.len()));
    }
    let error_list: Vec<Edge> = errors.iter().copied().collect();
    if error_list.is_empty() {
        return Ok(ChunkDecomposition {
            q_scale: q,
            errors: error_list,
            e_levels: vec![],
            f_levels: vec![],
            m: None,
        });
    }
    let mut table = WidthTable::new(lat, &error_list);

    // Level-n chunk masks, built bottom-up: pair disjoint chunks of the
    // previous level and keep unions within the width budget Q^n.
    let mut level_masks: Vec<u64> = (0..error_list.len()).map(|i| 1u64 << i).collect();
    let mut e_masks: Vec<u64> = vec![level_masks.iter().fold(0, |a, &m| a | m)];
    let mut budget: u64 = 1;
    loop {
        budget = budget.saturating_mul(q);
        if 2usize << (e_masks.len() - 1) > error_list.len() {
            break;
        }
        let mut next: HashSet<u64> = HashSet::new();
        for (i, &a) in level_masks.iter().enumerate() {
            for &b in &level_masks[i + 1..] {
                if a & b != 0 {
                    continue;
                }
                let union = a | b;
                if !next.contains(&union) && u64::from(table.width(union)) <= budget {
                    next.insert(union);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level_masks = next.into_iter().collect();
        level_masks.sort_unstable();
        e_masks.push(level_masks.iter().fold(0, |acc, &m| acc | m));
    }

    let to_set = |mask: u64| -> EdgeSet {
        error_list
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &e)| e)
            .collect()
    };
    let m = (e_masks.len() - 1) as u32;
    let e_levels: Vec<EdgeSet> = e_masks.iter().map(|&em| to_set(em)).collect();
    let mut f_levels = Vec::with_capacity(e_masks.len());
    for n in 0..e_masks.len() {
        let upper = if n + 1 < e_masks.len() { e_masks[n + 1] } else { 0 };
        f_levels.push(to_set(e_masks[n] & !upper));
    }
    Ok(ChunkDecomposition { q_scale: q, errors: error_list, e_levels, f_levels, m: Some(m) })
}

/// A pair of errors violating the level-separation band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationViolation {
    pub u: Edge,
    pub v: Edge,
    pub level: u32,
    pub distance: u32,
}

/// Checks that no `u ∈ F_n` sees a `v ∈ E_n` in the forbidden distance
/// band `(Qⁿ, (λ+1)·Qⁿ]`. Empty output is guaranteed for `Q ≥ λ+3`.
pub fn check_level_separation(
    lat: &SyndromeLattice,
    decomp: &ChunkDecomposition,
    lambda: u64,
) -> Vec<SeparationViolation> {
    let mut violations = Vec::new();
    let mut qn: u64 = 1;
    for n in 0..decomp.f_levels.len() {
        for &u in &decomp.f_levels[n] {
            for &v in &decomp.e_levels[n] {
                if u == v {
                    continue;
                }
                let d = u64::from(crate::lattice::edge_distance(lat, u, v));
                if d > qn && d <= (lambda + 1) * qn {
                    violations.push(SeparationViolation {
                        u,
                        v,
                        level: n as u32,
                        distance: d as u32,
                    });
                }
            }
        }
        qn = qn.saturating_mul(decomp.q_scale);
    }
    violations
}

/// The chunk built around an `F_n` error together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentChunk {
    pub chunk: EdgeSet,
    pub width: u32,
    /// Distance from the chunk to the nearest remaining `E_n` error, if
    /// any remain outside the chunk.
    pub clearance: Option<u32>,
}

/// Builds the chunk of all errors within `Qⁿ` of `u ∈ F_n`. For
/// `Q ≥ λ+3` these chunks are corrected independently by any decoder with
/// clearance constant λ.
pub fn independent_chunk_of(
    lat: &SyndromeLattice,
    decomp: &ChunkDecomposition,
    u: Edge,
    n: u32,
) -> Result<IndependentChunk, ChunksError> {
    let in_level = decomp
        .f_levels
        .get(n as usize)
        .is_some_and(|f| f.contains(&u));
    if !in_level {
        return Err(ChunksError::NotInLevel(u, n));
    }
    let qn = decomp.q_scale.pow(n);
    let chunk: EdgeSet = decomp
        .errors
        .iter()
        .copied()
        .filter(|&e| u64::from(crate::lattice::edge_distance(lat, u, e)) <= qn)
        .collect();
    let width = chunk_width(lat, &chunk)?;
    let rest: EdgeSet = decomp.e_levels[n as usize]
        .iter()
        .copied()
        .filter(|e| !chunk.contains(e))
        .collect();
    let clearance = if rest.is_empty() {
        None
    } else {
        Some(chunk_distance(lat, &chunk, &rest)?)
    };
    Ok(IndependentChunk { chunk, width, clearance })
}

/// Smallest decomposition level a logical error requires: the least `m`
/// with `Qᵐ ≥ L/2`, computed in exact integer arithmetic.
pub fn necessary_level(l: u32, q: u64) -> Result<u32, ChunksError> {
    if l < 2 {
        return Err(ChunksError::CodeDistanceTooSmall(l));
    }
    if q < 2 {
        return Err(ChunksError::ScaleTooSmall(q));
    }
    let mut m = 0;
    let mut qm: u64 = 1;
    while 2 * qm < u64::from(l) {
        qm = qm.saturating_mul(q);
        m += 1;
    }
    Ok(m)
}

/// A probability bound value; `vacuous` marks bounds clamped at 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub vacuous: bool,
}

/// Upper bound on the probability that a level-m chunk arises:
/// `(q²·p)^(2^m)` with `q = (3Q)^D` disjoint boxes per containing box.
pub fn bound_chunk_probability(p: f64, q_scale: u64, dimension: u32, m: u32) -> BoundValue {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    if p == 0.0 {
        return BoundValue { value: 0.0, vacuous: false };
    }
    let boxes = (3.0 * q_scale as f64).powi(dimension as i32);
    let base = boxes * boxes * p;
    if base >= 1.0 {
        return BoundValue { value: 1.0, vacuous: true };
    }
    // log space keeps tiny bounds from underflowing too early
    let ln = 2f64.powi(m as i32) * base.ln();
    BoundValue { value: ln.exp(), vacuous: false }
}

/// The logical-rate bound together with its decay exponent β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalRateBound {
    pub bound: f64,
    pub beta: f64,
    pub vacuous: bool,
}

/// Upper bound on the logical error rate: `[(3Q)^(2D)·p]^((L/2)^β)` with
/// `β = 1/log₂ Q`, multiplied by the number of L-sized time blocks when
/// `T > L`.
pub fn bound_logical_rate(
    p: f64,
    q_scale: u64,
    dimension: u32,
    l: u32,
    t: u32,
) -> LogicalRateBound {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    let beta = 2f64.ln() / (q_scale as f64).ln();
    if p == 0.0 {
        return LogicalRateBound { bound: 0.0, beta, vacuous: false };
    }
    let base = (3.0 * q_scale as f64).powi(2 * dimension as i32) * p;
    let blocks = if t > l { (t + l - 1) / l } else { 1 };
    if base >= 1.0 {
        return LogicalRateBound { bound: 1.0, beta, vacuous: true };
    }
    let exponent = (f64::from(l) / 2.0).powf(beta);
    let bound = (exponent * base.ln()).exp() * f64::from(blocks);
    LogicalRateBound { bound: bound.min(1.0), beta, vacuous: bound >= 1.0 }
}

/// Lower bound on the threshold: `(3Q)^(-2D)`.
pub fn bound_threshold(q_scale: u64, dimension: u32) -> f64 {
    (3.0 * q_scale as f64).powi(-2 * (dimension as i32))
}

/// On-disk description of an error set for `chunks analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorSetFile {
    pub l: u32,
    pub rounds: u32,
    pub geometry: Geometry,
    pub edges: Vec<Edge>,
}

impl ErrorSetFile {
    pub fn lattice(&self) -> Result<SyndromeLattice, LatticeError> {
        let code = build_code_lattice(self.l, self.geometry)?;
        build_syndrome_lattice(code, self.rounds)
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.iter().copied().collect()
    }
}

/// JSON report of the decomposition and separation check of an error set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub q: u64,
    pub lambda: u64,
    pub error_count: usize,
    pub max_level: Option<u32>,
    pub levels: Vec<LevelReport>,
    pub violations: Vec<SeparationViolation>,
    pub threshold_bound_d2: f64,
    pub threshold_bound_d3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: u32,
    pub count: usize,
    pub edges: Vec<Edge>,
}

/// Runs decomposition plus the separation check over a file description.
pub fn analyze(file: &ErrorSetFile, q: u64, lambda: u64) -> Result<AnalysisReport, ChunksError> {
    let lat = file.lattice()?;
    let errors = file.edge_set();
    let decomp = decompose(&lat, &errors, q)?;
    let violations = check_level_separation(&lat, &decomp, lambda);
    Ok(AnalysisReport {
        q,
        lambda,
        error_count: errors.len(),
        max_level: decomp.max_level(),
        levels: decomp
            .levels()
            .iter()
            .enumerate()
            .map(|(n, f)| LevelReport {
                level: n as u32,
                count: f.len(),
                edges: f.iter().copied().collect(),
            })
            .collect(),
        violations,
        threshold_bound_d2: bound_threshold(q, 2),
        threshold_bound_d3: bound_threshold(q, 3),
    })
}

//! Independent per-edge error model and its aggregate rates.
//!
//! Each error-carrying edge of the syndrome lattice fails independently.
//! Space-like edges carry a charge channel and a flux channel, sampled
//! independently; the conditional distribution of each channel may depend
//! on how many of the two adjacent plaquettes are occupied (0, 1 or 2),
//! which models an energy gap for anyon creation. Measurements misreport
//! with a probability that may depend on whether the true value is trivial.
//!
//! The aggregate rates follow the worst case over conditioning occupancies:
//! `p_z` (resp. `p_x`) is the largest total charge (flux) error probability,
//! `p_s = p_x + p_z - p_x·p_z` bounds any space-like edge, `p_m` bounds any
//! time-like edge, and `p = max(p_s, p_m)` bounds everything.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{CodeLattice, Dir, Edge, Plaquette, Round, SyndromeLattice};

const DIST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("channel distribution sums to {0}, which exceeds 1")]
    DistributionSum(f64),
    #[error("transport multiplier {0} must be nonnegative")]
    BadMultiplier(f64),
    #[error("sampler requires a single-shot (D=2) lattice")]
    NotSingleShot,
}

/// Conditional distribution of one error channel: `probs[k]` is the
/// probability of non-trivial label `k+1`; the remainder is "no error".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDist {
    probs: Vec<f64>,
}

impl ChannelDist {
    pub fn new(probs: Vec<f64>) -> Result<Self, NoiseError> {
        let mut sum = 0.0;
        for &p in &probs {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(NoiseError::ProbabilityOutOfRange(p));
            }
            sum += p;
        }
        if sum > 1.0 + DIST_TOLERANCE {
            return Err(NoiseError::DistributionSum(sum));
        }
        Ok(ChannelDist { probs })
    }

    /// Uniform split of total probability `q` over `labels` labels.
    pub fn uniform(labels: usize, q: f64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&q) || q.is_nan() {
            return Err(NoiseError::ProbabilityOutOfRange(q));
        }
        ChannelDist::new(vec![q / labels.max(1) as f64; labels])
    }

    pub fn silent(labels: usize) -> Self {
        ChannelDist { probs: vec![0.0; labels] }
    }

    /// Total probability that any error occurs.
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn labels(&self) -> usize {
        self.probs.len()
    }

    /// Maps a pair of uniform draws to an outcome: `0` means no error,
    /// `k ≥ 1` the k-th non-trivial label. `scale` multiplies every error
    /// probability (transport noise on traversed edges).
    fn outcome(&self, u: f64, label_draw: f64, scale: f64) -> u16 {
        let total = (self.total() * scale).min(1.0);
        if u >= total || self.probs.is_empty() {
            return 0;
        }
        // Conditional label choice; probabilities keep their ratios.
        let mut acc = 0.0;
        let target = label_draw * self.total();
        for (k, &p) in self.probs.iter().enumerate() {
            acc += p;
            if target < acc {
                return (k + 1) as u16;
            }
        }
        self.probs.len() as u16
    }
}

/// The full error model: per-channel conditional tables indexed by the
/// number of occupied endpoints, and the measurement misreport table
/// indexed by whether the true value is trivial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    charge: [ChannelDist; 3],
    flux: [ChannelDist; 3],
    /// Misreport probability given a trivial / non-trivial true value.
    meas: [f64; 2],
    /// Multiplier on spin error rates for edges traversed by decoder moves
    /// in the same round. 1.0 leaves transport noiseless-neutral.
    transport_multiplier: f64,
}

/// Aggregate worst-case rates of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates {
    pub p_x: f64,
    pub p_z: f64,
    pub p_s: f64,
    pub p_m: f64,
    pub p: f64,
}

/// A sampled error on one space-like edge. Label `0` means the channel was
/// silent; labels `1..` index the non-trivial outcomes of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeError {
    pub edge: Edge,
    pub charge: u16,
    pub flux: u16,
}

/// A measurement misreport: the plaquette and a raw draw the charge model
/// uses to pick which wrong value is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasFlip {
    pub plaquette: Plaquette,
    pub draw: u64,
}

/// Spin errors and measurement misreports for one round, to be applied in
/// order: errors, then decoder moves, then measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSample {
    pub spin_errors: Vec<EdgeError>,
    pub measurement_flips: Vec<MeasFlip>,
}

impl NoiseModel {
    pub fn new(
        charge: [ChannelDist; 3],
        flux: [ChannelDist; 3],
        meas: [f64; 2],
        transport_multiplier: f64,
    ) -> Result<Self, NoiseError> {
        for &m in &meas {
            if !(0.0..=1.0).contains(&m) || m.is_nan() {
                return Err(NoiseError::ProbabilityOutOfRange(m));
            }
        }
        if !(transport_multiplier >= 0.0) {
            return Err(NoiseError::BadMultiplier(transport_multiplier));
        }
        Ok(NoiseModel { charge, flux, meas, transport_multiplier })
    }

    /// Occupancy-independent benchmark model for D(Z_n): uniform label
    /// choice within each channel, total rate `q_z` (charge) and `q_x`
    /// (flux) per edge, measurement misreport rate `p_m`.
    pub fn zn_uniform(n: u16, q_z: f64, q_x: f64, p_m: f64) -> Result<Self, NoiseError> {
        let labels = usize::from(n) - 1;
        let z = ChannelDist::uniform(labels, q_z)?;
        let x = ChannelDist::uniform(labels, q_x)?;
        NoiseModel::new(
            [z.clone(), z.clone(), z],
            [x.clone(), x.clone(), x],
            [p_m, p_m],
            1.0,
        )
    }

    /// Occupancy-flip model for non-Abelian occupancy syndromes: one error
    /// type per edge (a pair-creation event) at rate `q`, flux silent,
    /// measurement misreport rate `p_m`.
    pub fn occupancy_flip(q: f64, p_m: f64) -> Result<Self, NoiseError> {
        let c = ChannelDist::uniform(1, q)?;
        NoiseModel::new(
            [c.clone(), c.clone(), c],
            [ChannelDist::silent(0), ChannelDist::silent(0), ChannelDist::silent(0)],
            [p_m, p_m],
            1.0,
        )
    }

    /// Occupancy-flip model with distinct rates for edges adjacent to 0, 1
    /// or 2 occupied plaquettes.
    pub fn occupancy_flip_conditional(q: [f64; 3], p_m: f64) -> Result<Self, NoiseError> {
        let dists = [
            ChannelDist::uniform(1, q[0])?,
            ChannelDist::uniform(1, q[1])?,
            ChannelDist::uniform(1, q[2])?,
        ];
        NoiseModel::new(
            dists,
            [ChannelDist::silent(0), ChannelDist::silent(0), ChannelDist::silent(0)],
            [p_m, p_m],
            1.0,
        )
    }

    pub fn with_transport_multiplier(mut self, m: f64) -> Result<Self, NoiseError> {
        if !(m >= 0.0) {
            return Err(NoiseError::BadMultiplier(m));
        }
        self.transport_multiplier = m;
        Ok(self)
    }

    pub fn transport_multiplier(&self) -> f64 {
        self.transport_multiplier
    }

    pub fn charge_labels(&self) -> usize {
        self.charge[0].labels()
    }

    /// Worst-case aggregate rates. Transport noise is folded into the
    /// space-like maximum.
    pub fn compute_rates(&self) -> NoiseRates {
        let fold = self.transport_multiplier.max(1.0);
        let p_z = self
            .charge
            .iter()
            .map(|d| (d.total() * fold).min(1.0))
            .fold(0.0, f64::max);
        let p_x = self
            .flux
            .iter()
            .map(|d| (d.total() * fold).min(1.0))
            .fold(0.0, f64::max);
        let p_s = p_x + p_z - p_x * p_z;
        let p_m = self.meas[0].max(self.meas[1]);
        NoiseRates { p_x, p_z, p_s, p_m, p: p_s.max(p_m) }
    }

    /// Samples one edge's two channels. Four uniform draws are always
    /// consumed so that runs with different rates stay coupled draw-for-draw
    /// (the same seed yields nested error sets as rates grow).
    fn sample_edge<R: Rng>(
        &self,
        occupied_endpoints: usize,
        traversed: bool,
        rng: &mut R,
    ) -> (u16, u16) {
        let scale = if traversed { self.transport_multiplier } else { 1.0 };
        let u_z: f64 = rng.gen();
        let l_z: f64 = rng.gen();
        let u_x: f64 = rng.gen();
        let l_x: f64 = rng.gen();
        let z = self.charge[occupied_endpoints].outcome(u_z, l_z, scale);
        let x = if self.flux[occupied_endpoints].labels() == 0 {
            0
        } else {
            self.flux[occupied_endpoints].outcome(u_x, l_x, scale)
        };
        (z, x)
    }

    fn sample_measurement<R: Rng>(&self, occupied: bool, rng: &mut R) -> Option<u64> {
        let u: f64 = rng.gen();
        let draw: u64 = rng.gen();
        let p = self.meas[usize::from(occupied)];
        (u < p).then_some(draw)
    }
}

/// Samples an initial burst of noise on a single-shot (D=2) lattice. All
/// plaquettes start unoccupied, so conditioning class 0 applies everywhere.
pub fn sample_single_shot<R: Rng>(
    model: &NoiseModel,
    lat: &SyndromeLattice,
    rng: &mut R,
) -> Result<Vec<EdgeError>, NoiseError> {
    if lat.dimension() != 2 {
        return Err(NoiseError::NotSingleShot);
    }
    let code = lat.code();
    let mut out = Vec::new();
    for p in 0..code.plaquette_count() {
        for &dir in code.error_dirs() {
            let (charge, flux) = model.sample_edge(0, false, rng);
            if charge != 0 || flux != 0 {
                out.push(EdgeError { edge: Edge::Space { p, dir, t: 1 }, charge, flux });
            }
        }
    }
    Ok(out)
}

/// Samples the spin errors and measurement misreports for one round of
/// active error correction.
///
/// `occupied` marks plaquettes currently holding an anyon (conditioning for
/// the occupancy-dependent channels); `transported` lists code-lattice
/// edges (as `(p, dir)`) traversed by decoder moves this round, which are
/// sampled at the transport-multiplied rate.
pub fn sample_round<R: Rng>(
    model: &NoiseModel,
    code: &CodeLattice,
    occupied: &[bool],
    transported: &[(Plaquette, Dir)],
    t: Round,
    rng: &mut R,
) -> RoundSample {
    debug_assert_eq!(occupied.len() as u32, code.plaquette_count());
    let mut spin_errors = Vec::new();
    for p in 0..code.plaquette_count() {
        for &dir in code.error_dirs() {
            let q = code.step(p, dir);
            let class =
                usize::from(occupied[p as usize]) + usize::from(occupied[q as usize]);
            let traversed = transported.contains(&(p, dir));
            let (charge, flux) = model.sample_edge(class, traversed, rng);
            if charge != 0 || flux != 0 {
                spin_errors.push(EdgeError { edge: Edge::Space { p, dir, t }, charge, flux });
            }
        }
    }
    let mut measurement_flips = Vec::new();
    for p in 0..code.plaquette_count() {
        if let Some(draw) = model.sample_measurement(occupied[p as usize], rng) {
            measurement_flips.push(MeasFlip { plaquette: p, draw });
        }
    }
    RoundSample { spin_errors, measurement_flips }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_code_lattice, build_syndrome_lattice, Geometry};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn single_shot_lat(l: u32) -> SyndromeLattice {
        let code = build_code_lattice(l, Geometry::Square).unwrap();
        build_syndrome_lattice(code, 1).unwrap()
    }

    #[test]
    fn rates_direct_substitution() {
        let m = NoiseModel::zn_uniform(2, 0.1, 0.0, 0.0).unwrap();
        let r = m.compute_rates();
        assert!((r.p_z - 0.1).abs() < 1e-15);
        assert_eq!(r.p_x, 0.0);
        assert!((r.p_s - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rates_combine_channels() {
        let m = NoiseModel::zn_uniform(2, 0.1, 0.1, 0.0).unwrap();
        let r = m.compute_rates();
        assert!((r.p_s - 0.19).abs() < 1e-15);
    }

    #[test]
    fn p_is_max_of_space_and_time() {
        let m = NoiseModel::zn_uniform(2, 0.05, 0.0, 0.08).unwrap();
        let r = m.compute_rates();
        assert!((r.p - 0.08).abs() < 1e-15);
        assert!((r.p_m - 0.08).abs() < 1e-15);
    }

    #[test]
    fn invalid_distributions_are_rejected() {
        assert!(ChannelDist::new(vec![0.6, 0.6]).is_err());
        assert!(ChannelDist::new(vec![-0.1]).is_err());
        assert!(NoiseModel::zn_uniform(2, 1.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn rates_are_monotone_in_every_probability() {
        let base = NoiseModel::zn_uniform(3, 0.05, 0.04, 0.03).unwrap().compute_rates();
        let bump_z = NoiseModel::zn_uniform(3, 0.06, 0.04, 0.03).unwrap().compute_rates();
        let bump_x = NoiseModel::zn_uniform(3, 0.05, 0.05, 0.03).unwrap().compute_rates();
        let bump_m = NoiseModel::zn_uniform(3, 0.05, 0.04, 0.09).unwrap().compute_rates();
        assert!(bump_z.p >= base.p);
        assert!(bump_x.p >= base.p);
        assert!(bump_m.p >= base.p);
    }

    #[test]
    fn zero_rate_burst_is_empty() {
        let lat = single_shot_lat(8);
        let m = NoiseModel::zn_uniform(2, 0.0, 0.0, 0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        assert!(sample_single_shot(&m, &lat, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn certain_error_hits_every_edge() {
        let lat = single_shot_lat(4);
        let m = NoiseModel::zn_uniform(2, 1.0, 0.0, 0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let errs = sample_single_shot(&m, &lat, &mut rng).unwrap();
        assert_eq!(errs.len() as u64, lat.space_edge_count());
        assert!(errs.iter().all(|e| e.charge == 1 && e.flux == 0));
    }

    #[test]
    fn burst_rejects_active_lattice() {
        let code = build_code_lattice(4, Geometry::Square).unwrap();
        let lat = build_syndrome_lattice(code, 3).unwrap();
        let m = NoiseModel::zn_uniform(2, 0.1, 0.0, 0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        assert_eq!(
            sample_single_shot(&m, &lat, &mut rng).unwrap_err(),
            NoiseError::NotSingleShot
        );
    }

    #[test]
    fn empirical_edge_fraction_matches_rate() {
        // q = 0.1 per charge channel; count errored edges over many samples.
        let lat = single_shot_lat(16);
        let m = NoiseModel::zn_uniform(2, 0.1, 0.0, 0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        let samples = 2_000u32;
        let edges = lat.space_edge_count() as f64;
        let mut total = 0u64;
        for _ in 0..samples {
            total += sample_single_shot(&m, &lat, &mut rng).unwrap().len() as u64;
        }
        let n = edges * f64::from(samples);
        let frac = total as f64 / n;
        let sigma = (0.1 * 0.9 / n).sqrt();
        assert!((frac - 0.1).abs() < 3.0 * sigma, "frac={frac}");
    }

    #[test]
    fn sampled_edges_are_uncorrelated() {
        let lat = single_shot_lat(8);
        let m = NoiseModel::zn_uniform(2, 0.2, 0.0, 0.0).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let e1 = Edge::Space { p: 0, dir: Dir::East, t: 1 };
        let e2 = Edge::Space { p: 21, dir: Dir::North, t: 1 };
        let rounds = 20_000;
        let (mut c1, mut c2, mut c12) = (0u32, 0u32, 0u32);
        for _ in 0..rounds {
            let errs = sample_single_shot(&m, &lat, &mut rng).unwrap();
            let h1 = errs.iter().any(|e| e.edge == e1);
            let h2 = errs.iter().any(|e| e.edge == e2);
            c1 += u32::from(h1);
            c2 += u32::from(h2);
            c12 += u32::from(h1 && h2);
        }
        let n = f64::from(rounds);
        let cov = f64::from(c12) / n - (f64::from(c1) / n) * (f64::from(c2) / n);
        // var of the product indicator ≈ p²(1-p²)/n under independence
        let sigma = (0.04f64 * 0.96 / n).sqrt();
        assert!(cov.abs() < 4.0 * sigma, "cov={cov}");
    }

    #[test]
    fn occupancy_conditioning_changes_rates() {
        // Edges next to occupied plaquettes fail at 0.2, others at 0.1.
        let code = build_code_lattice(8, Geometry::Square).unwrap();
        let m = NoiseModel::occupancy_flip_conditional([0.1, 0.2, 0.2], 0.0).unwrap();
        let mut occupied = vec![false; code.plaquette_count() as usize];
        occupied[0] = true;
        let hot = (0, Dir::East); // one endpoint occupied
        let cold = (code.plaquette(4, 4), Dir::East);
        let mut rng = StdRng::seed_from_u64(9);
        let rounds = 20_000u32;
        let (mut hot_hits, mut cold_hits) = (0u32, 0u32);
        for _ in 0..rounds {
            let s = sample_round(&m, &code, &occupied, &[], 1, &mut rng);
            for e in &s.spin_errors {
                if let Edge::Space { p, dir, .. } = e.edge {
                    if (p, dir) == hot {
                        hot_hits += 1;
                    }
                    if (p, dir) == cold {
                        cold_hits += 1;
                    }
                }
            }
        }
        let n = f64::from(rounds);
        let hot_rate = f64::from(hot_hits) / n;
        let cold_rate = f64::from(cold_hits) / n;
        assert!((hot_rate - 0.2).abs() < 3.0 * (0.2f64 * 0.8 / n).sqrt(), "{hot_rate}");
        assert!((cold_rate - 0.1).abs() < 3.0 * (0.1f64 * 0.9 / n).sqrt(), "{cold_rate}");
    }

    #[test]
    fn measurement_mask_extremes() {
        let code = build_code_lattice(4, Geometry::Square).unwrap();
        let occupied = vec![false; 16];
        let mut rng = StdRng::seed_from_u64(5);
        let quiet = NoiseModel::zn_uniform(2, 0.0, 0.0, 0.0).unwrap();
        let s = sample_round(&quiet, &code, &occupied, &[], 1, &mut rng);
        assert!(s.measurement_flips.is_empty());

        let loud = NoiseModel::zn_uniform(2, 0.0, 0.0, 1.0).unwrap();
        let s = sample_round(&loud, &code, &occupied, &[], 1, &mut rng);
        assert_eq!(s.measurement_flips.len(), 16);
    }

    #[test]
    fn transport_multiplier_raises_traversed_edge_rate() {
        let code = build_code_lattice(8, Geometry::Square).unwrap();
        let m = NoiseModel::occupancy_flip(0.05, 0.0)
            .unwrap()
            .with_transport_multiplier(3.0)
            .unwrap();
        assert!((m.compute_rates().p_s - 0.15).abs() < 1e-12);
        let occupied = vec![false; 64];
        let mut rng = StdRng::seed_from_u64(11);
        let edge = (0, Dir::East);
        let rounds = 20_000u32;
        let mut hits = 0u32;
        for _ in 0..rounds {
            let s = sample_round(&m, &code, &occupied, &[edge], 1, &mut rng);
            hits += u32::from(s.spin_errors.iter().any(|e| {
                matches!(e.edge, Edge::Space { p: 0, dir: Dir::East, .. })
            }));
        }
        let rate = f64::from(hits) / f64::from(rounds);
        assert!((rate - 0.15).abs() < 3.0 * (0.15f64 * 0.85 / 20_000.0).sqrt(), "{rate}");
    }

    #[test]
    fn coupled_draws_nest_across_rates() {
        // With the same seed, every edge errored at q=0.05 is also errored
        // at q=0.15: the per-edge draw discipline couples the samples.
        let lat = single_shot_lat(12);
        let low = NoiseModel::zn_uniform(2, 0.05, 0.05, 0.0).unwrap();
        let high = NoiseModel::zn_uniform(2, 0.15, 0.15, 0.0).unwrap();
        for seed in 0..20 {
            let a = sample_single_shot(&low, &lat, &mut StdRng::seed_from_u64(seed)).unwrap();
            let b = sample_single_shot(&high, &lat, &mut StdRng::seed_from_u64(seed)).unwrap();
            let b_edges: std::collections::BTreeSet<_> = b.iter().map(|e| e.edge).collect();
            for e in &a {
                assert!(b_edges.contains(&e.edge));
            }
        }
    }
}

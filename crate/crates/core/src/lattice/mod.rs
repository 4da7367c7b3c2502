//! Code and syndrome lattices with an integer metric.
//!
//! The code lattice is an `L × L` toric arrangement of plaquettes; anyons
//! live on plaquettes and errors on the edges between neighbouring
//! plaquettes. Stacking the code lattice `T` times and placing vertices
//! `(P, t)` between consecutive measurement rounds gives the syndrome
//! lattice: space-like edges join neighbouring plaquettes within a round,
//! time-like edges join consecutive rounds of the same plaquette.
//!
//! Two geometries are supported. `Square` is the abstract benchmark lattice
//! with 4 neighbours per plaquette. `HexagonalQuantumDouble` is the code
//! lattice obtained from a quantum double model on a square spin lattice by
//! combining each plaquette with the vertex to its top right; the combined
//! cells tile as hexagons with 6 neighbours each. Axis-direction hexagonal
//! edges aggregate one flux-error spin and one charge-error spin of the
//! underlying model; the two spins shared across a diagonal edge already
//! belong to axis edges, so diagonal edges carry no independent error
//! channel.

mod cluster;
mod routing;

pub use cluster::{
    chunk_distance, chunk_vertices, chunk_width, cluster_distance, cluster_width,
    clusters_overlap, edge_distance, is_disconnected, EdgeSet, VertexSet,
};
pub use routing::{star_route, StarRoute};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Plaquette index in `0..L²`, row-major: `p = y*L + x`.
pub type Plaquette = u32;
/// Measurement round, `1..=T`.
pub type Round = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice size must be at least 2, got {0}")]
    SizeTooSmall(u32),
    #[error("at least one measurement round is required")]
    NoRounds,
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("chunk is empty")]
    EmptyChunk,
    #[error("chunk is not a subset of the error set")]
    ChunkNotSubset,
    #[error("vertex {0:?} does not exist on this lattice")]
    UnknownVertex(Vertex),
}

/// Code-lattice geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Square,
    HexagonalQuantumDouble,
}

/// Direction of a space-like edge, stored from its canonical plaquette.
///
/// `NorthEast` only exists on the hexagonal geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dir {
    East,
    North,
    NorthEast,
}

const SQUARE_DIRS: [Dir; 2] = [Dir::East, Dir::North];
const HEX_DIRS: [Dir; 3] = [Dir::East, Dir::North, Dir::NorthEast];

/// A vertex `(P, t)` of the syndrome lattice. Ordering is lexicographic in
/// `(p, t)`, which fixes every iteration order in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub p: Plaquette,
    pub t: Round,
}

impl Vertex {
    pub fn new(p: Plaquette, t: Round) -> Self {
        Vertex { p, t }
    }
}

/// An edge of the syndrome lattice.
///
/// Space-like edges are stored from their canonical plaquette `p` pointing
/// in `dir`; time-like edges join `(p, t)` and `(p, t+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Edge {
    Space { p: Plaquette, dir: Dir, t: Round },
    Time { p: Plaquette, t: Round },
}

impl Edge {
    pub fn is_space(&self) -> bool {
        matches!(self, Edge::Space { .. })
    }

    pub fn is_time(&self) -> bool {
        matches!(self, Edge::Time { .. })
    }
}

/// One spin of the underlying square-lattice quantum double model,
/// identified by the square-lattice edge it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpinId {
    /// Edge from square-lattice vertex (x, y) to (x+1, y).
    Horizontal { x: u32, y: u32 },
    /// Edge from square-lattice vertex (x, y) to (x, y+1).
    Vertical { x: u32, y: u32 },
}

/// The two underlying spins aggregated on an error-carrying hexagonal edge:
/// flux errors on one spin and charge errors on the other affect the same
/// pair of combined plaquettes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSpins {
    pub flux: SpinId,
    pub charge: SpinId,
}

/// The toric `L × L` code lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeLattice {
    l: u32,
    geometry: Geometry,
}

/// Builds a code lattice. Rejects `L < 2`.
pub fn build_code_lattice(l: u32, geometry: Geometry) -> Result<CodeLattice, LatticeError> {
    if l < 2 {
        return Err(LatticeError::SizeTooSmall(l));
    }
    Ok(CodeLattice { l, geometry })
}

impl CodeLattice {
    pub fn size(&self) -> u32 {
        self.l
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn plaquette_count(&self) -> u32 {
        self.l * self.l
    }

    pub fn x(&self, p: Plaquette) -> u32 {
        p % self.l
    }

    pub fn y(&self, p: Plaquette) -> u32 {
        p / self.l
    }

    pub fn plaquette(&self, x: u32, y: u32) -> Plaquette {
        (y % self.l) * self.l + (x % self.l)
    }

    /// Directions in which each plaquette owns a canonical edge.
    pub fn dirs(&self) -> &'static [Dir] {
        match self.geometry {
            Geometry::Square => &SQUARE_DIRS,
            Geometry::HexagonalQuantumDouble => &HEX_DIRS,
        }
    }

    pub fn translate(&self, p: Plaquette, dx: i64, dy: i64) -> Plaquette {
        let l = i64::from(self.l);
        let x = (i64::from(self.x(p)) + dx).rem_euclid(l) as u32;
        let y = (i64::from(self.y(p)) + dy).rem_euclid(l) as u32;
        self.plaquette(x, y)
    }

    pub fn step(&self, p: Plaquette, dir: Dir) -> Plaquette {
        match dir {
            Dir::East => self.translate(p, 1, 0),
            Dir::North => self.translate(p, 0, 1),
            Dir::NorthEast => self.translate(p, 1, 1),
        }
    }

    /// All neighbours of `p`, canonical edges first then reversed ones.
    pub fn neighbors(&self, p: Plaquette) -> Vec<Plaquette> {
        let mut out = Vec::with_capacity(2 * self.dirs().len());
        for &d in self.dirs() {
            out.push(self.step(p, d));
        }
        for &d in self.dirs() {
            out.push(match d {
                Dir::East => self.translate(p, -1, 0),
                Dir::North => self.translate(p, 0, -1),
                Dir::NorthEast => self.translate(p, -1, -1),
            });
        }
        out
    }

    /// Number of space-like edges in one time slice.
    pub fn edges_per_layer(&self) -> u32 {
        self.plaquette_count() * self.dirs().len() as u32
    }

    /// Space-like edges in one time slice that carry independent error
    /// channels. On the hexagonal geometry the diagonal edges carry none:
    /// the two spins they share already sit on axis edges.
    pub fn error_dirs(&self) -> &'static [Dir] {
        match self.geometry {
            Geometry::Square => &SQUARE_DIRS,
            Geometry::HexagonalQuantumDouble => &SQUARE_DIRS,
        }
    }

    /// For the hexagonal geometry, the flux-error and charge-error spins
    /// aggregated on the edge `(p, dir)`. `None` for the square geometry and
    /// for diagonal edges.
    pub fn edge_spins(&self, p: Plaquette, dir: Dir) -> Option<EdgeSpins> {
        if self.geometry != Geometry::HexagonalQuantumDouble {
            return None;
        }
        let (x, y) = (self.x(p), self.y(p));
        let l = self.l;
        let xe = (x + 1) % l;
        let yn = (y + 1) % l;
        match dir {
            // (x,y)–(x+1,y): flux via the vertical spin right of p, charge
            // via the horizontal spin east of v.
            Dir::East => Some(EdgeSpins {
                flux: SpinId::Vertical { x: xe, y },
                charge: SpinId::Horizontal { x: xe, y: yn },
            }),
            // (x,y)–(x,y+1): flux via the horizontal spin on top of p,
            // charge via the vertical spin north of v.
            Dir::North => Some(EdgeSpins {
                flux: SpinId::Horizontal { x, y: yn },
                charge: SpinId::Vertical { x: xe, y: yn },
            }),
            Dir::NorthEast => None,
        }
    }

    /// Toric graph distance between plaquettes under this geometry's
    /// adjacency.
    pub fn spatial_distance(&self, a: Plaquette, b: Plaquette) -> u32 {
        let l = i64::from(self.l);
        let dx = i64::from(self.x(b)) - i64::from(self.x(a));
        let dy = i64::from(self.y(b)) - i64::from(self.y(a));
        let mut best = i64::MAX;
        for wx in [-l, 0, l] {
            for wy in [-l, 0, l] {
                let ddx = dx + wx;
                let ddy = dy + wy;
                let d = match self.geometry {
                    Geometry::Square => ddx.abs() + ddy.abs(),
                    // Triangular adjacency: a (+1,+1) step covers both
                    // coordinates at once when they move the same way.
                    Geometry::HexagonalQuantumDouble => {
                        if (ddx >= 0) == (ddy >= 0) {
                            ddx.abs().max(ddy.abs())
                        } else {
                            ddx.abs() + ddy.abs()
                        }
                    }
                };
                best = best.min(d);
            }
        }
        best as u32
    }

    /// Largest spatial distance between any two plaquettes.
    pub fn spatial_diameter(&self) -> u32 {
        let h = self.l / 2;
        match self.geometry {
            Geometry::Square => 2 * h,
            Geometry::HexagonalQuantumDouble => 2 * h, // mixed-sign corner pair
        }
    }
}

/// The D-dimensional syndrome lattice: the code lattice stacked `T` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyndromeLattice {
    code: CodeLattice,
    rounds: u32,
}

/// Builds the syndrome lattice for `rounds ≥ 1` measurement rounds.
pub fn build_syndrome_lattice(
    code: CodeLattice,
    rounds: u32,
) -> Result<SyndromeLattice, LatticeError> {
    if rounds < 1 {
        return Err(LatticeError::NoRounds);
    }
    Ok(SyndromeLattice { code, rounds })
}

impl SyndromeLattice {
    pub fn code(&self) -> &CodeLattice {
        &self.code
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    /// 2 for the single-shot case, 3 otherwise.
    pub fn dimension(&self) -> u32 {
        if self.rounds == 1 {
            2
        } else {
            3
        }
    }

    pub fn vertex_count(&self) -> u64 {
        u64::from(self.code.plaquette_count()) * u64::from(self.rounds)
    }

    pub fn space_edge_count(&self) -> u64 {
        u64::from(self.code.edges_per_layer()) * u64::from(self.rounds)
    }

    pub fn time_edge_count(&self) -> u64 {
        u64::from(self.code.plaquette_count()) * u64::from(self.rounds - 1)
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        v.p < self.code.plaquette_count() && v.t >= 1 && v.t <= self.rounds
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        match e {
            Edge::Space { p, dir, t } => {
                p < self.code.plaquette_count()
                    && t >= 1
                    && t <= self.rounds
                    && self.code.dirs().contains(&dir)
            }
            Edge::Time { p, t } => p < self.code.plaquette_count() && t >= 1 && t < self.rounds,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.code.plaquette_count())
            .flat_map(move |p| (1..=self.rounds).map(move |t| Vertex { p, t }))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let space = (0..self.code.plaquette_count()).flat_map(move |p| {
            self.code.dirs().iter().flat_map(move |&dir| {
                (1..=self.rounds).map(move |t| Edge::Space { p, dir, t })
            })
        });
        let time = (0..self.code.plaquette_count())
            .flat_map(move |p| (1..self.rounds).map(move |t| Edge::Time { p, t }));
        space.chain(time)
    }

    pub fn endpoints(&self, e: Edge) -> (Vertex, Vertex) {
        match e {
            Edge::Space { p, dir, t } => (
                Vertex { p, t },
                Vertex {
                    p: self.code.step(p, dir),
                    t,
                },
            ),
            Edge::Time { p, t } => (Vertex { p, t }, Vertex { p, t: t + 1 }),
        }
    }

    /// Graph distance between two vertices: toric spatial distance plus the
    /// round difference. All distances are integers.
    pub fn distance(&self, a: Vertex, b: Vertex) -> u32 {
        self.code.spatial_distance(a.p, b.p) + a.t.abs_diff(b.t)
    }

    pub fn diameter(&self) -> u32 {
        self.code.spatial_diameter() + (self.rounds - 1)
    }
}

//! Geodesic routing of defects to a common meeting vertex.
//!
//! Correcting a neutral cluster moves every defect to one meeting point.
//! The support of the resulting operator has to stay narrow: a correction
//! for an independent chunk of width `W` must itself have width at most
//! `W`. The meeting vertex is the cluster vertex minimising total routing
//! distance (ties broken by canonical vertex order), and every path is a
//! monotone staircase that tracks the straight segment to the meeting
//! point, so the support hugs the cluster. Staircase interleavings are
//! discrete, so after building a plan the realised support width is
//! measured; if it exceeds the cluster width the router retries with
//! alternative interleavings and meeting candidates and keeps the best
//! plan found.


use super::cluster::VertexSet;
use super::{Edge, Geometry, LatticeError, Round, SyndromeLattice, Vertex};

/// One oriented step of a routed path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub from: Vertex,
    pub to: Vertex,
    pub edge: Edge,
}

/// A routing plan moving every source vertex to `meeting`.
#[derive(Debug, Clone)]
pub struct StarRoute {
    pub meeting: Vertex,
    /// One path per source, in input order, each a step sequence from the
    /// source to the meeting vertex.
    pub paths: Vec<Vec<PathStep>>,
    /// Every vertex touched by the plan.
    pub support: VertexSet,
    /// Width of the support under the lattice metric.
    pub support_width: u32,
}

#[derive(Debug, Clone, Copy)]
struct Lifted {
    x: i64,
    y: i64,
    t: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    X(i64),
    Y(i64),
    Diag(i64),
    T(i64),
}

impl Leg {
    fn count(&self) -> i64 {
        match *self {
            Leg::X(n) | Leg::Y(n) | Leg::Diag(n) | Leg::T(n) => n.abs(),
        }
    }
}

/// Staircase construction variant. `Proportional` interleaves the legs so
/// the path tracks the straight segment; `Sequential` walks the legs one
/// after another in the given priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Variant {
    proportional: bool,
    order: [u8; 4], // priority permutation over legs (x, y, diag, t)
}

const ORDERS: [[u8; 4]; 6] = [
    [0, 1, 2, 3],
    [1, 0, 2, 3],
    [3, 0, 1, 2],
    [3, 1, 0, 2],
    [2, 0, 1, 3],
    [0, 1, 3, 2],
];

fn variants() -> Vec<Variant> {
    let mut out = Vec::with_capacity(12);
    for &order in &ORDERS {
        out.push(Variant { proportional: true, order });
    }
    for &order in &ORDERS {
        out.push(Variant { proportional: false, order });
    }
    out
}

fn half_wrap(delta: i64, l: i64) -> i64 {
    let d = delta.rem_euclid(l);
    if d > l / 2 {
        d - l
    } else {
        d
    }
}

fn lift(lat: &SyndromeLattice, anchor: Vertex, v: Vertex) -> Lifted {
    let code = lat.code();
    let l = i64::from(code.size());
    Lifted {
        x: i64::from(code.x(anchor.p))
            + half_wrap(i64::from(code.x(v.p)) - i64::from(code.x(anchor.p)), l),
        y: i64::from(code.y(anchor.p))
            + half_wrap(i64::from(code.y(v.p)) - i64::from(code.y(anchor.p)), l),
        t: i64::from(v.t),
    }
}

fn unlift(lat: &SyndromeLattice, p: Lifted) -> Vertex {
    let code = lat.code();
    let l = i64::from(code.size());
    Vertex {
        p: code.plaquette(p.x.rem_euclid(l) as u32, p.y.rem_euclid(l) as u32),
        t: p.t as Round,
    }
}

/// Decomposes the displacement into geodesic legs for the geometry.
fn legs(geometry: Geometry, from: Lifted, to: Lifted) -> [Leg; 4] {
    let mut dx = to.x - from.x;
    let mut dy = to.y - from.y;
    let dt = to.t - from.t;
    let mut diag = 0;
    if geometry == Geometry::HexagonalQuantumDouble && dx.signum() == dy.signum() && dx != 0 {
        diag = dx.signum() * dx.abs().min(dy.abs());
        dx -= diag;
        dy -= diag;
    }
    [Leg::X(dx), Leg::Y(dy), Leg::Diag(diag), Leg::T(dt)]
}

fn apply_leg_step(p: &mut Lifted, leg: Leg) {
    match leg {
        Leg::X(n) => p.x += n.signum(),
        Leg::Y(n) => p.y += n.signum(),
        Leg::Diag(n) => {
            p.x += n.signum();
            p.y += n.signum();
        }
        Leg::T(n) => p.t += n.signum(),
    }
}

fn step_edge(lat: &SyndromeLattice, from: Lifted, to: Lifted) -> (Vertex, Vertex, Edge) {
    use super::Dir;
    let a = unlift(lat, from);
    let b = unlift(lat, to);

    let edge = if to.t != from.t {
        let t = from.t.min(to.t) as Round;
        Edge::Time { p: a.p, t }
    } else {
        let (dx, dy) = (to.x - from.x, to.y - from.y);
        let t = a.t;
        match (dx, dy) {
            (1, 0) => Edge::Space { p: a.p, dir: Dir::East, t },
            (-1, 0) => Edge::Space { p: b.p, dir: Dir::East, t },
            (0, 1) => Edge::Space { p: a.p, dir: Dir::North, t },
            (0, -1) => Edge::Space { p: b.p, dir: Dir::North, t },
            (1, 1) => Edge::Space { p: a.p, dir: Dir::NorthEast, t },
            (-1, -1) => Edge::Space { p: b.p, dir: Dir::NorthEast, t },
            _ => unreachable!("non-unit step"),
        }
    };
    debug_assert!(lat.contains_edge(edge), "step produced {edge:?}");
    (a, b, edge)
}

/// Builds one staircase from `from` to `to` under a variant.
fn build_path(
    lat: &SyndromeLattice,
    from: Lifted,
    to: Lifted,
    variant: Variant,
) -> Vec<PathStep> {
    let leg_list = legs(lat.code().geometry(), from, to);
    let total: i64 = leg_list.iter().map(Leg::count).sum();
    let mut remaining = leg_list;
    let mut err = [0i64; 4];
    let mut pos = from;
    let mut steps = Vec::with_capacity(total as usize);
    let counts: Vec<i64> = leg_list.iter().map(Leg::count).collect();
    for _ in 0..total {
        let pick = if variant.proportional {
            // Largest-remainder scheduler over the remaining legs; the
            // variant order breaks ties.
            let mut best: Option<usize> = None;
            for &bi in &variant.order {
                let i = bi as usize;
                if remaining[i].count() == 0 {
                    continue;
                }
                err[i] += counts[i];
                match best {
                    None => best = Some(i),
                    Some(b) if err[i] > err[b] => best = Some(i),
                    _ => {}
                }
            }
            best.expect("steps remain")
        } else {
            variant
                .order
                .iter()
                .map(|&b| b as usize)
                .find(|&i| remaining[i].count() > 0)
                .expect("steps remain")
        };
        if variant.proportional {
            err[pick] -= total;
        }
        let prev = pos;
        apply_leg_step(&mut pos, remaining[pick]);
        remaining[pick] = match remaining[pick] {
            Leg::X(n) => Leg::X(n - n.signum()),
            Leg::Y(n) => Leg::Y(n - n.signum()),
            Leg::Diag(n) => Leg::Diag(n - n.signum()),
            Leg::T(n) => Leg::T(n - n.signum()),
        };
        let (a, b, edge) = step_edge(lat, prev, pos);
        steps.push(PathStep { from: a, to: b, edge });
    }
    steps
}

fn plan_support(sources: &[Vertex], paths: &[Vec<PathStep>]) -> VertexSet {
    let mut support: VertexSet = sources.iter().copied().collect();
    for path in paths {
        for s in path {
            support.insert(s.from);
            support.insert(s.to);
        }
    }
    support
}

fn set_width(lat: &SyndromeLattice, vs: &VertexSet) -> u32 {
    let v: Vec<Vertex> = vs.iter().copied().collect();
    let mut w = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            w = w.max(lat.distance(v[i], v[j]));
        }
    }
    w
}

/// Routes every source vertex to a common meeting vertex.
///
/// The meeting vertex is chosen among the sources by minimal total routing
/// distance (canonical order on ties). The returned plan's `support_width`
/// is measured, not assumed; for clusters narrower than half the lattice
/// the router keeps retrying interleavings until the support width does not
/// exceed the source-set width, falling back to the best plan found.
pub fn star_route(lat: &SyndromeLattice, sources: &[Vertex]) -> Result<StarRoute, LatticeError> {
    if sources.is_empty() {
        return Err(LatticeError::EmptyCluster);
    }
    for &s in sources {
        if !lat.contains_vertex(s) {
            return Err(LatticeError::UnknownVertex(s));
        }
    }
    let source_set: VertexSet = sources.iter().copied().collect();
    let target_width = set_width(lat, &source_set);

    // Candidate meeting vertices by total routing distance.
    let mut candidates: Vec<(u64, Vertex)> = source_set
        .iter()
        .map(|&m| {
            let total: u64 = sources.iter().map(|&s| u64::from(lat.distance(s, m))).sum();
            (total, m)
        })
        .collect();
    candidates.sort();

    let all_variants = variants();
    let default = all_variants[0];
    let mut best: Option<StarRoute> = None;

    for &(_, meeting) in candidates.iter().take(8) {
        let anchor = meeting;
        let lifted_meeting = lift(lat, anchor, meeting);
        let lifted_sources: Vec<Lifted> = sources.iter().map(|&s| lift(lat, anchor, s)).collect();

        let mut chosen: Vec<Variant> = vec![default; sources.len()];
        let mut paths: Vec<Vec<PathStep>> = lifted_sources
            .iter()
            .map(|&s| build_path(lat, s, lifted_meeting, default))
            .collect();
        let mut width = set_width(lat, &plan_support(sources, &paths));

        // Coordinate descent over per-path variants.
        for _pass in 0..2 {
            if width <= target_width {
                break;
            }
            for i in 0..paths.len() {
                if width <= target_width {
                    break;
                }
                for &v in &all_variants {
                    if v == chosen[i] {
                        continue;
                    }
                    let candidate = build_path(lat, lifted_sources[i], lifted_meeting, v);
                    let mut trial = paths.clone();
                    trial[i] = candidate;
                    let w = set_width(lat, &plan_support(sources, &trial));
                    if w < width {
                        width = w;
                        paths = trial;
                        chosen[i] = v;
                    }
                }
            }
        }

        let support = plan_support(sources, &paths);
        let route = StarRoute { meeting, paths, support, support_width: width };
        let better = match &best {
            None => true,
            Some(b) => width < b.support_width,
        };
        if better {
            best = Some(route);
        }
        if best.as_ref().unwrap().support_width <= target_width {
            break;
        }
    }

    Ok(best.expect("at least one candidate"))
}

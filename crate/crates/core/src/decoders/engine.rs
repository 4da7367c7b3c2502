//! The shared clustering engine behind the four decoders.
//!
//! The engine tracks live clusters of syndrome atoms and merges them
//! according to the decoder's schedule. Every merge is passed to the
//! sink, which applies the charge algebra: it may remove the merged
//! cluster (neutral, corrected) or keep it, possibly with a different
//! member list (non-Abelian fusion leaves a residual anyon somewhere).
//! Cluster distance is the overlap-aware closest-point distance of the
//! member vertex sets, measured in the lattice metric.

use crate::lattice::{cluster_distance, SyndromeLattice, Vertex, VertexSet};

use super::{DecoderKind, Schedule};

/// One syndrome item: a vertex plus an opaque charge payload interpreted
/// by the sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom<P> {
    pub vertex: Vertex,
    pub payload: P,
}

/// Verdict of the sink on a merged cluster.
pub enum MergeOutcome<P> {
    /// Cluster resolved; drop it from the syndrome.
    Remove,
    /// Cluster lives on with these members.
    Keep(Vec<Atom<P>>),
}

/// Charge-algebra hook invoked on every merge.
pub trait DecodeSink<P> {
    fn on_merge(&mut self, members: &[Atom<P>], radius: u32) -> MergeOutcome<P>;
}

/// One merge processed by the engine, for traces and regression pinning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeEvent {
    pub radius: u32,
    pub members: Vec<Vertex>,
    pub removed: bool,
}

/// Full decode trace: merge events in order plus whatever clusters were
/// still alive at termination (empty for complete Abelian decodes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeTrace {
    pub events: Vec<MergeEvent>,
    pub residual: Vec<Vec<Vertex>>,
}

struct Cluster<P> {
    members: Vec<Atom<P>>,
    vertices: VertexSet,
}

impl<P: Clone> Cluster<P> {
    fn new(mut members: Vec<Atom<P>>) -> Self {
        members.sort_by_key(|a| a.vertex);
        let vertices = members.iter().map(|a| a.vertex).collect();
        Cluster { members, vertices }
    }

    fn min_vertex(&self) -> Vertex {
        *self.vertices.iter().next().expect("clusters are nonempty")
    }
}

struct Engine<'a, P> {
    lat: &'a SyndromeLattice,
    clusters: Vec<Option<Cluster<P>>>,
    events: Vec<MergeEvent>,
}

impl<'a, P: Clone> Engine<'a, P> {
    fn new(lat: &'a SyndromeLattice, atoms: Vec<Atom<P>>) -> Self {
        let mut sorted = atoms;
        sorted.sort_by_key(|a| a.vertex);
        let clusters = sorted
            .into_iter()
            .map(|a| Some(Cluster::new(vec![a])))
            .collect();
        Engine { lat, clusters, events: Vec::new() }
    }

    fn active_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.clusters.len())
            .filter(|&i| self.clusters[i].is_some())
            .collect();
        ids.sort_by_key(|&i| self.clusters[i].as_ref().unwrap().min_vertex());
        ids
    }

    fn distance(&self, a: usize, b: usize) -> u32 {
        let ca = self.clusters[a].as_ref().unwrap();
        let cb = self.clusters[b].as_ref().unwrap();
        cluster_distance(self.lat, &ca.vertices, &cb.vertices).expect("clusters are nonempty")
    }

    /// Merges a group of clusters into the slot of the first id, consults
    /// the sink, and records the event.
    fn merge_group(&mut self, ids: &[usize], radius: u32, sink: &mut dyn DecodeSink<P>) {
        debug_assert!(ids.len() >= 2);
        let mut members = Vec::new();
        for &i in ids {
            members.extend(self.clusters[i].take().expect("active cluster").members);
        }
        members.sort_by_key(|a| a.vertex);
        let vertices: Vec<Vertex> = members.iter().map(|a| a.vertex).collect();
        match sink.on_merge(&members, radius) {
            MergeOutcome::Remove => {
                self.events.push(MergeEvent { radius, members: vertices, removed: true });
            }
            MergeOutcome::Keep(new_members) => {
                self.events.push(MergeEvent { radius, members: vertices, removed: false });
                self.clusters[ids[0]] = Some(Cluster::new(new_members));
            }
        }
    }

    /// Pairing pass at one radius: repeatedly merge the canonical closest
    /// eligible pair until none remains within the radius.
    fn pairing_pass(&mut self, radius: u32, sink: &mut dyn DecodeSink<P>) {
        loop {
            let ids = self.active_ids();
            let mut best: Option<(u32, usize, usize)> = None;
            for (k, &i) in ids.iter().enumerate() {
                for &j in &ids[k + 1..] {
                    let d = self.distance(i, j);
                    if d > radius {
                        continue;
                    }
                    // canonical order: distance, then member vertex order
                    let key = (d, i, j);
                    if best.map_or(true, |b| key < b) {
                        best = Some(key);
                    }
                }
            }
            match best {
                Some((_, i, j)) => self.merge_group(&[i, j], radius, sink),
                None => break,
            }
        }
    }

    /// Transitive pass: union everything within the radius, then hand each
    /// multi-cluster group to the sink in canonical order.
    fn transitive_pass(&mut self, radius: u32, sink: &mut dyn DecodeSink<P>) {
        let ids = self.active_ids();
        if ids.len() < 2 {
            return;
        }
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                parent[i] = find(parent, parent[i]);
            }
            parent[i]
        }
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                if self.distance(ids[a], ids[b]) <= radius {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
        for a in 0..ids.len() {
            let r = find(&mut parent, a);
            groups[r].push(ids[a]);
        }
        for group in groups.into_iter().filter(|g| g.len() >= 2) {
            self.merge_group(&group, radius, sink);
        }
    }

    /// Mutual-nearest-neighbour pass: merge the canonical globally closest
    /// pair (always mutual under canonical tie-breaks), repeat.
    fn mutual_nn_rounds(&mut self, sink: &mut dyn DecodeSink<P>) {
        loop {
            let ids = self.active_ids();
            if ids.len() < 2 {
                break;
            }
            let mut best: Option<(u32, usize, usize)> = None;
            for (k, &i) in ids.iter().enumerate() {
                for &j in &ids[k + 1..] {
                    let key = (self.distance(i, j), i, j);
                    if best.map_or(true, |b| key < b) {
                        best = Some(key);
                    }
                }
            }
            let (d, i, j) = best.expect("two clusters exist");
            self.merge_group(&[i, j], d, sink);
        }
    }

    fn finish(self) -> DecodeTrace {
        let residual = self
            .active_ids()
            .into_iter()
            .map(|i| {
                self.clusters[i]
                    .as_ref()
                    .unwrap()
                    .members
                    .iter()
                    .map(|a| a.vertex)
                    .collect()
            })
            .collect();
        DecodeTrace { events: self.events, residual }
    }
}

/// Runs the decoder's schedule over the syndrome atoms, consulting the
/// sink on every merge. Returns the trace; unresolved clusters (possible
/// only when the sink keeps non-removable charge) are listed as residual.
pub fn decode<P: Clone>(
    kind: DecoderKind,
    lat: &SyndromeLattice,
    atoms: Vec<Atom<P>>,
    sink: &mut dyn DecodeSink<P>,
) -> DecodeTrace {
    let mut engine = Engine::new(lat, atoms);
    let diameter = lat.diameter().max(1);
    match kind.spec().schedule {
        Schedule::Pairing { start } => {
            let mut radius = start;
            while radius <= diameter && engine.active_ids().len() > 1 {
                engine.pairing_pass(radius, sink);
                radius += 1;
            }
        }
        Schedule::Linear { start } => {
            let mut radius = start;
            while radius <= diameter && engine.active_ids().len() > 1 {
                engine.transitive_pass(radius, sink);
                radius += 1;
            }
        }
        Schedule::PowersOfTwo => {
            let mut n = 0u32;
            loop {
                let radius = 1u32 << n.min(30);
                if engine.active_ids().len() <= 1 {
                    break;
                }
                engine.transitive_pass(radius.min(diameter), sink);
                if radius >= diameter {
                    break;
                }
                n += 1;
            }
        }
        Schedule::MutualNearest => engine.mutual_nn_rounds(sink),
    }
    engine.finish()
}

//! World nets: the decoder's history of believed anyon trajectories.
//!
//! Error chains in the non-Abelian case can terminate anywhere an anyon
//! has been, so the decoder's syndrome is not just the defect set: it is
//! the net of world lines built from the measurement record and the
//! attempted moves. Strands persist while an anyon stays put, follow
//! attempted moves, and combine at fusion events; braided strands merge
//! into a single net. A net with no unresolved defects is neutral when no
//! present-time anyon terminates it, needs fusion when several do, and is
//! itself a defect when exactly one does.
//!
//! The whole belief state is rebuilt from the histories every round
//! (tentative chain hypotheses are never persisted), which is what lets a
//! defect resolved against a present-time anyon be reinstated when later
//! rounds contradict the hypothesis.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::lattice::{CodeLattice, Plaquette, Round, SyndromeLattice, Vertex};

use super::expectation::{assign_defects, expected_occupancy, DefectPolarity, Move, NetDefect};
use super::NonAbelianError;

/// One believed anyon world line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strand {
    /// Believed positions, one node per round from birth to end.
    pub nodes: Vec<Vertex>,
    /// The appearance defect that opened this strand, if its birth was
    /// unexpected.
    pub birth_defect: Option<usize>,
    /// The missing-anyon defect that closed it, if it vanished
    /// unexpectedly.
    pub death_defect: Option<usize>,
    /// Set when the strand ended in a fusion node (possibly to vacuum).
    pub fused_at: Option<Vertex>,
    /// Alive at the latest observed round.
    pub open: bool,
}

impl Strand {
    pub fn birth(&self) -> Vertex {
        self.nodes[0]
    }

    pub fn terminal(&self) -> Vertex {
        *self.nodes.last().expect("strands have nodes")
    }
}

/// A defect together with the strand it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OwnedDefect {
    pub defect: NetDefect,
    pub strand: usize,
}

/// Status of a net with no unresolved defects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetStatus {
    /// Closed: the proposed explanation needs nothing further.
    Neutral,
    /// Ends in several present-time anyons; move them together to find
    /// out whether they annihilate.
    NeedsFusion { terminals: Vec<Plaquette> },
    /// Ends in exactly one present-time anyon: at least one more error
    /// chain is required, so the net is itself a defect.
    IsDefect { terminal: Plaquette },
}

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("net still has unresolved defects; status undefined")]
    UnresolvedDefects,
    #[error("conservation violation: {0}")]
    Conservation(String),
}

/// The decoder's belief state, rebuilt from histories each round.
#[derive(Debug, Clone)]
pub struct BeliefState {
    pub plaquettes: u32,
    pub rounds: Round,
    pub strands: Vec<Strand>,
    pub defects: Vec<OwnedDefect>,
    net_parent: Vec<usize>,
}

impl BeliefState {
    /// Reconstructs strands, defects, fusion merges and braid merges from
    /// the measurement and move histories. `measured[t-1]` is round t's
    /// measurement; `moves[t-1]` the moves attempted during round t.
    pub fn rebuild(
        code: &CodeLattice,
        measured: &[Vec<bool>],
        moves: &[Vec<Move>],
    ) -> Result<BeliefState, NonAbelianError> {
        assert_eq!(measured.len(), moves.len());
        let plaquettes = code.plaquette_count();
        let mut strands: Vec<Strand> = Vec::new();
        let mut defects: Vec<OwnedDefect> = Vec::new();
        let mut net_parent: Vec<usize> = Vec::new();
        // strand currently believed to occupy each plaquette
        let mut occupant: HashMap<Plaquette, usize> = HashMap::new();

        let mut merge = |net_parent: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(net_parent, a), find(net_parent, b));
            if ra != rb {
                net_parent[ra.max(rb)] = ra.min(rb);
            }
        };

        for (idx, round_measured) in measured.iter().enumerate() {
            let t = (idx + 1) as Round;
            let prev: Vec<bool> = if idx == 0 {
                vec![false; plaquettes as usize]
            } else {
                measured[idx - 1].clone()
            };
            let round_moves = &moves[idx];
            let expectation = expected_occupancy(&prev, round_moves)?;
            let round_defects = assign_defects(&expectation, round_measured, t);

            // Braid merges: a move crossing the eastward half-ray anchored
            // at another live strand merges the two nets. Conservative
            // over-merging is fine; missing a genuine braid is not.
            for m in round_moves {
                let Some(&mover) = occupant.get(&m.from) else { continue };
                let (fx, fy) = (code.x(m.from), code.y(m.from));
                let (tx, ty) = (code.x(m.to), code.y(m.to));
                if fx == tx && fy != ty {
                    let row = fy.min(ty);
                    let wraps = fy.abs_diff(ty) != 1; // teleport-length move
                    for (&anchor_p, &anchor_strand) in occupant.iter() {
                        if anchor_strand == mover {
                            continue;
                        }
                        if code.y(anchor_p) == row {
                            let offset =
                                (i64::from(fx) - i64::from(code.x(anchor_p)))
                                    .rem_euclid(i64::from(code.size()));
                            if !wraps && offset >= 1 && offset <= i64::from(code.size() / 2) {
                                merge(&mut net_parent, mover, anchor_strand);
                            }
                        }
                    }
                }
            }

            // Work out which strands feed each plaquette this round.
            let mut inbound: HashMap<Plaquette, Vec<usize>> = HashMap::new();
            let mut moved_out: BTreeSet<Plaquette> = BTreeSet::new();
            for m in round_moves {
                if let Some(&s) = occupant.get(&m.from) {
                    inbound.entry(m.to).or_default().push(s);
                    moved_out.insert(m.from);
                }
            }
            let mut next_occupant: HashMap<Plaquette, usize> = HashMap::new();
            let defect_at = |p: Plaquette, polarity: DefectPolarity| {
                round_defects
                    .iter()
                    .position(|d| d.vertex.p == p && d.polarity == polarity)
            };

            for p in 0..plaquettes {
                let mut contributors: Vec<usize> = Vec::new();
                if let Some(&s) = occupant.get(&p) {
                    if !moved_out.contains(&p) {
                        contributors.push(s);
                    }
                }
                if let Some(ins) = inbound.get(&p) {
                    contributors.extend(ins.iter().copied());
                }
                // an anyon that moved away interacted with whatever came in
                if moved_out.contains(&p) && inbound.contains_key(&p) {
                    let departer = occupant[&p];
                    for &s in &inbound[&p] {
                        merge(&mut net_parent, departer, s);
                    }
                }
                let node = Vertex::new(p, t);
                if round_measured[p as usize] {
                    match contributors.len() {
                        0 => {
                            // new strand; its birth is an unexpected-anyon
                            // defect unless fusion blurred the expectation
                            let birth = defect_at(p, DefectPolarity::UnexpectedAnyon)
                                .map(|i| i + defects.len_of_round_base());
                            let id = strands.len();
                            strands.push(Strand {
                                nodes: vec![node],
                                birth_defect: None,
                                death_defect: None,
                                fused_at: None,
                                open: false,
                            });
                            net_parent.push(id);
                            if let Some(di) = defect_at(p, DefectPolarity::UnexpectedAnyon) {
                                let global = defects.len();
                                defects.push(OwnedDefect {
                                    defect: round_defects[di],
                                    strand: id,
                                });
                                strands[id].birth_defect = Some(global);
                            }
                            let _ = birth;
                            next_occupant.insert(p, id);
                        }
                        1 => {
                            let s = contributors[0];
                            strands[s].nodes.push(node);
                            next_occupant.insert(p, s);
                        }
                        _ => {
                            // fusion: contributors end here, product begins
                            let id = strands.len();
                            for &s in &contributors {
                                strands[s].fused_at = Some(node);
                            }
                            strands.push(Strand {
                                nodes: vec![node],
                                birth_defect: None,
                                death_defect: None,
                                fused_at: None,
                                open: false,
                            });
                            net_parent.push(id);
                            for &s in &contributors {
                                merge(&mut net_parent, id, s);
                            }
                            next_occupant.insert(p, id);
                        }
                    }
                } else {
                    match contributors.len() {
                        0 => {}
                        1 => {
                            // expected an anyon, saw none: missing defect
                            let s = contributors[0];
                            if let Some(di) = defect_at(p, DefectPolarity::MissingAnyon) {
                                let global = defects.len();
                                defects.push(OwnedDefect {
                                    defect: round_defects[di],
                                    strand: s,
                                });
                                strands[s].nodes.push(node);
                                strands[s].death_defect = Some(global);
                            } else {
                                // a fusion case (holder left, one came in):
                                // the mover ends in the uncertain node
                                strands[s].nodes.push(node);
                                strands[s].fused_at = Some(node);
                            }
                        }
                        _ => {
                            // fusion to vacuum: all contributors end here
                            for &s in &contributors {
                                strands[s].fused_at = Some(node);
                                merge(&mut net_parent, contributors[0], s);
                            }
                        }
                    }
                }
            }
            occupant = next_occupant;
        }
        for (&_, &s) in &occupant {
            strands[s].open = true;
        }
        Ok(BeliefState {
            plaquettes,
            rounds: measured.len() as Round,
            strands,
            defects,
            net_parent,
        })
    }

    pub fn net_of(&self, strand: usize) -> usize {
        let mut i = strand;
        while self.net_parent[i] != i {
            i = self.net_parent[i];
        }
        i
    }

    pub fn merge_nets(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.net_of(a), self.net_of(b));
        if ra != rb {
            self.net_parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Nets as root → member strands, in canonical order.
    pub fn nets(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in 0..self.strands.len() {
            out.entry(self.net_of(s)).or_default().push(s);
        }
        out
    }

    /// Status of a net; `resolved` lists defect indices already explained
    /// by accepted chains or fallbacks, and `fake_terminals` the present
    /// anyons currently claimed to be measurement artefacts.
    pub fn net_status(
        &self,
        net: usize,
        resolved: &BTreeSet<usize>,
        fake_terminals: &BTreeSet<Plaquette>,
    ) -> Result<NetStatus, NetError> {
        let strands: Vec<usize> = (0..self.strands.len())
            .filter(|&s| self.net_of(s) == net)
            .collect();
        for &s in &strands {
            for d in [self.strands[s].birth_defect, self.strands[s].death_defect] {
                if let Some(d) = d {
                    if !resolved.contains(&d) {
                        return Err(NetError::UnresolvedDefects);
                    }
                }
            }
        }
        let mut terminals: Vec<Plaquette> = strands
            .iter()
            .filter(|&&s| self.strands[s].open)
            .map(|&s| self.strands[s].terminal().p)
            .filter(|p| !fake_terminals.contains(p))
            .collect();
        terminals.sort_unstable();
        match terminals.len() {
            0 => Ok(NetStatus::Neutral),
            1 => Ok(NetStatus::IsDefect { terminal: terminals[0] }),
            _ => Ok(NetStatus::NeedsFusion { terminals }),
        }
    }

    /// All believed nodes of a net, the points where error chains may end.
    pub fn net_nodes(&self, net: usize) -> Vec<Vertex> {
        let mut nodes: Vec<Vertex> = (0..self.strands.len())
            .filter(|&s| self.net_of(s) == net)
            .flat_map(|s| self.strands[s].nodes.iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

// tiny helper so the closure above can use union-find paths
fn find(parent: &[usize], mut i: usize) -> usize {
    while parent[i] != i {
        i = parent[i];
    }
    i
}

trait LenOfRoundBase {
    fn len_of_round_base(&self) -> usize;
}
impl LenOfRoundBase for Vec<OwnedDefect> {
    fn len_of_round_base(&self) -> usize {
        0
    }
}

/// An endpoint an error chain can connect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainEndpoint {
    /// An unresolved defect, by index into the belief state.
    Defect(usize),
    /// A present-time anyon at this plaquette.
    PresentAnyon(Plaquette),
    /// Any believed node of a net (an error chain may end on a world
    /// line), by strand and node.
    NetNode { strand: usize, node: Vertex },
}

/// An accepted chain hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainProposal {
    pub a: ChainEndpoint,
    pub b: ChainEndpoint,
    pub length: u32,
    /// Present-time anyon removed from the working syndrome by this
    /// chain (the measurement-artefact hypothesis).
    pub removes_anyon: Option<Plaquette>,
}

/// Validates and prices a chain between two endpoints.
///
/// Chains between defects, from defects to net nodes, and from a defect to
/// its own strand's present-time anyon are always consistent. A chain to
/// another strand's present-time anyon claims that anyon is a measurement
/// artefact while its strand's history says otherwise: accepting it would
/// leave a world-line component fed only by its own time-like line —
/// an anyon from vacuum — so it is rejected.
pub fn propose_chain(
    belief: &BeliefState,
    lat: &SyndromeLattice,
    a: ChainEndpoint,
    b: ChainEndpoint,
) -> Result<ChainProposal, NetError> {
    let position = |e: &ChainEndpoint| -> Vertex {
        match *e {
            ChainEndpoint::Defect(i) => belief.defects[i].defect.vertex,
            ChainEndpoint::PresentAnyon(p) => Vertex::new(p, belief.rounds),
            ChainEndpoint::NetNode { node, .. } => node,
        }
    };
    let mut removes_anyon = None;
    for (this, other) in [(a, b), (b, a)] {
        if let ChainEndpoint::PresentAnyon(p) = this {
            let holder = belief
                .strands
                .iter()
                .position(|s| s.open && s.terminal().p == p)
                .ok_or_else(|| NetError::Conservation(format!("no anyon at plaquette {p}")))?;
            let own = match other {
                ChainEndpoint::Defect(i) => belief.defects[i].strand == holder,
                _ => false,
            };
            if !own {
                return Err(NetError::Conservation(format!(
                    "chain would strand the world line holding the anyon at {p}: \
                     a component fed only by a single time-like line"
                )));
            }
            removes_anyon = Some(p);
        }
    }
    let length = lat.distance(position(&a), position(&b));
    Ok(ChainProposal { a, b, length, removes_anyon })
}

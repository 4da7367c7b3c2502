//! Expected occupancies and defect assignment for active correction.
//!
//! With noisy measurements and a decoder that moves anyons, a change in
//! the measured occupancy is not by itself a signature of an error. The
//! previous round's measurement plus the moves the decoder attempted fix
//! an expectation for every plaquette; only a mismatch between expectation
//! and measurement is a defect. Plaquettes where anyons were brought
//! together carry no expectation at all — either outcome could be a
//! legitimate fusion result.

use serde::{Deserialize, Serialize};

use crate::lattice::{Plaquette, Round, Vertex};

use super::NonAbelianError;

/// A decoder-issued transport instruction: move the anyon at `from` to
/// `to` during the coming round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub from: Plaquette,
    pub to: Plaquette,
}

/// Expected occupancy of one plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Empty,
    Occupied,
    /// Anyons were brought together here; fusion can give either result.
    NoExpectation,
}

/// Computes the expectation table for the round following `prev_measured`,
/// given the moves attempted in between. Moves from plaquettes that were
/// not measured as occupied are rejected.
pub fn expected_occupancy(
    prev_measured: &[bool],
    moves: &[Move],
) -> Result<Vec<Expectation>, NonAbelianError> {
    let mut moved_out = vec![false; prev_measured.len()];
    let mut in_count = vec![0u32; prev_measured.len()];
    for m in moves {
        if !prev_measured[m.from as usize] {
            return Err(NonAbelianError::MoveFromEmpty(m.from));
        }
        moved_out[m.from as usize] = true;
        in_count[m.to as usize] += 1;
    }
    Ok(prev_measured
        .iter()
        .enumerate()
        .map(|(p, &was_occupied)| {
            let inbound = in_count[p];
            if (was_occupied && inbound >= 1) || inbound >= 2 {
                // fusion: at least one anyon moved onto a holder, or
                // several onto the same plaquette
                Expectation::NoExpectation
            } else if was_occupied && moved_out[p] {
                Expectation::Empty
            } else if was_occupied {
                Expectation::Occupied
            } else if inbound == 1 {
                Expectation::Occupied
            } else {
                Expectation::Empty
            }
        })
        .collect())
}

/// Which way a defect disagrees with the expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefectPolarity {
    /// An anyon was measured where none was expected.
    UnexpectedAnyon,
    /// No anyon was measured where one was expected.
    MissingAnyon,
}

/// A syndrome defect of the active non-Abelian case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetDefect {
    pub vertex: Vertex,
    pub polarity: DefectPolarity,
}

/// Flags every plaquette whose measurement contradicts its expectation.
/// No-expectation plaquettes never produce defects.
pub fn assign_defects(
    expectation: &[Expectation],
    measured: &[bool],
    t: Round,
) -> Vec<NetDefect> {
    debug_assert_eq!(expectation.len(), measured.len());
    expectation
        .iter()
        .zip(measured.iter())
        .enumerate()
        .filter_map(|(p, (&e, &m))| {
            let polarity = match (e, m) {
                (Expectation::Empty, true) => Some(DefectPolarity::UnexpectedAnyon),
                (Expectation::Occupied, false) => Some(DefectPolarity::MissingAnyon),
                _ => None,
            };
            polarity.map(|polarity| NetDefect {
                vertex: Vertex::new(p as Plaquette, t),
                polarity,
            })
        })
        .collect()
}

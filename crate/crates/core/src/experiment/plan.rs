use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::latin::balanced_latin_square;
use super::rings::{ring_sequence, PER_PAIR};
use super::{DistancePair, ExperimentError};
use crate::interaction::Condition;
use crate::rng::{purpose, stream};
use crate::scene::{Ring, SceneLayout, WindowId};

pub const TRAINING_TRIALS: usize = 5;
pub const DISCARDED_TRIALS: usize = 3;
pub const RECORDED_TRIALS: usize = 4 * PER_PAIR;
pub const TRIALS_PER_CONDITION: usize = TRAINING_TRIALS + DISCARDED_TRIALS + RECORDED_TRIALS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrialKind {
    Training,
    Discarded,
    Recorded,
}

impl TrialKind {
    pub fn for_index(index: usize) -> Self {
        if index < TRAINING_TRIALS {
            TrialKind::Training
        } else if index < TRAINING_TRIALS + DISCARDED_TRIALS {
            TrialKind::Discarded
        } else {
            TrialKind::Recorded
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TrialKind::Training => "training",
            TrialKind::Discarded => "discarded",
            TrialKind::Recorded => "recorded",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [TrialKind::Training, TrialKind::Discarded, TrialKind::Recorded]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub index: usize,
    pub start: WindowId,
    pub target: WindowId,
    pub pair: DistancePair,
    pub kind: TrialKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionBlock {
    pub condition: Condition,
    pub trials: Vec<TrialSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub participant: u32,
    pub square_row: usize,
    pub seed: u64,
    pub blocks: Vec<ConditionBlock>,
}

impl SessionPlan {
    pub fn condition_order(&self) -> Vec<Condition> {
        self.blocks.iter().map(|b| b.condition).collect()
    }

    pub fn trial_count(&self) -> usize {
        self.blocks.iter().map(|b| b.trials.len()).sum()
    }

    pub fn recorded_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.trials)
            .filter(|t| t.kind == TrialKind::Recorded)
            .count()
    }

    /// Text manifest: a header block then one line per trial.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        let order: Vec<&str> = self.blocks.iter().map(|b| b.condition.slug()).collect();
        let _ = writeln!(out, "participant = {}", self.participant);
        let _ = writeln!(out, "square_row = {}", self.square_row);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "condition_order = {}", order.join(" "));
        for b in &self.blocks {
            let _ = writeln!(out, "[{}]", b.condition);
            for t in &b.trials {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    t.index,
                    t.start,
                    t.target,
                    t.pair,
                    t.kind.name()
                );
            }
        }
        out
    }
}

fn pick<R: Rng + ?Sized>(rng: &mut R, pool: impl Iterator<Item = WindowId>, exclude: WindowId) -> WindowId {
    let pool: Vec<WindowId> = pool.filter(|&w| w != exclude).collect();
    *pool.choose(rng).expect("ring has more than one window")
}

/// Trial list for one condition block.
fn block_trials(layout: &SceneLayout, seed: u64, participant: u32, cond: usize) -> Vec<TrialSpec> {
    let path = [purpose::PLAN, participant as u64, cond as u64];
    let mut rng = stream(seed, &path);
    let rings = ring_sequence(
        &mut stream(seed, &[purpose::RINGS, participant as u64, cond as u64]),
        PER_PAIR,
    );
    let lead = TRAINING_TRIALS + DISCARDED_TRIALS;
    let mut current = pick(&mut rng, WindowId::all(), WindowId::RED_1);
    let mut trials = Vec::with_capacity(TRIALS_PER_CONDITION);
    for index in 0..TRIALS_PER_CONDITION {
        let target = if index == 0 {
            WindowId::RED_1
        } else if index < lead - 1 {
            pick(&mut rng, WindowId::all(), current)
        } else {
            // The last lead-in trial lands on the recorded sequence's first ring.
            let ring: Ring = rings[index + 1 - lead];
            pick(&mut rng, layout.ring_members(ring), current)
        };
        trials.push(TrialSpec {
            index,
            start: current,
            target,
            pair: DistancePair::from_rings(layout.ring_of(current), layout.ring_of(target)),
            kind: TrialKind::for_index(index),
        });
        current = target;
    }
    trials
}

/// Builds one participant's plan. The condition order is row `square_row`
/// of the balanced Latin square over [`Condition::ALL`].
pub fn build_session(
    participant: u32,
    square_row: usize,
    seed: u64,
    layout: &SceneLayout,
) -> Result<SessionPlan, ExperimentError> {
    let square = balanced_latin_square(Condition::ALL.len())?;
    let row = square
        .get(square_row)
        .ok_or(ExperimentError::InvalidRow(square_row))?;
    let blocks = row
        .iter()
        .map(|&c| ConditionBlock {
            condition: Condition::ALL[c],
            trials: block_trials(layout, seed, participant, c),
        })
        .collect();
    Ok(SessionPlan {
        participant,
        square_row,
        seed,
        blocks,
    })
}

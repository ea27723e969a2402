//! Study protocol: counterbalancing, trial sequences, simulated and live
//! session runs, trial records and event logs.

mod latin;
mod log;
mod plan;
mod record;
mod rings;
mod runner;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentError;
use crate::interaction::InteractionError;
use crate::scene::{Ring, SceneError};

pub use latin::balanced_latin_square;
pub use log::{extract_records, parse_log, replay_log, LogIssue, LogLine, LogRecord};
pub use plan::{
    build_session, ConditionBlock, SessionPlan, TrialKind, TrialSpec, DISCARDED_TRIALS,
    RECORDED_TRIALS, TRAINING_TRIALS, TRIALS_PER_CONDITION,
};
pub use record::{parse_records, CsvIssue, TrialRecord, CSV_HEADER};
pub use rings::{generate_ring_sequence, pair_histogram, ring_sequence, PER_PAIR};
pub use runner::{log_file_name, run_session, session_layout, BlockRunner, ConditionRun, SessionOutput};

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("balanced Latin square needs an even n (got {0}); use the mirrored 2n-row variant for odd n")]
    OddSquare(usize),
    #[error("Latin square row {0} does not exist")]
    InvalidRow(usize),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
    #[error("participant {participant}, {condition}, trial {trial}: {source}")]
    Agent {
        participant: u32,
        condition: String,
        trial: usize,
        source: AgentError,
    },
    #[error("participant {participant}, {condition}, trial {trial}: trace ended before the trial completed")]
    Incomplete {
        participant: u32,
        condition: String,
        trial: usize,
    },
    #[error("no planned trials remain in this block")]
    BlockExhausted,
    #[error("log line {line}: {msg}")]
    Log { line: usize, msg: String },
    #[error("replay of trial {trial} disagrees with the logged outcome")]
    ReplayMismatch { trial: usize },
}

/// Ring membership of a trial's start and target windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistancePair {
    LL = 0,
    LS = 1,
    SL = 2,
    SS = 3,
}

impl DistancePair {
    pub const ALL: [DistancePair; 4] = [
        DistancePair::LL,
        DistancePair::LS,
        DistancePair::SL,
        DistancePair::SS,
    ];

    pub fn from_rings(start: Ring, target: Ring) -> Self {
        match (start, target) {
            (Ring::Large, Ring::Large) => DistancePair::LL,
            (Ring::Large, Ring::Short) => DistancePair::LS,
            (Ring::Short, Ring::Large) => DistancePair::SL,
            (Ring::Short, Ring::Short) => DistancePair::SS,
        }
    }

    pub fn start_ring(self) -> Ring {
        match self {
            DistancePair::LL | DistancePair::LS => Ring::Large,
            DistancePair::SL | DistancePair::SS => Ring::Short,
        }
    }

    pub fn target_ring(self) -> Ring {
        match self {
            DistancePair::LL | DistancePair::SL => Ring::Large,
            DistancePair::LS | DistancePair::SS => Ring::Short,
        }
    }
}

impl fmt::Display for DistancePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistancePair::LL => "LL",
            DistancePair::LS => "LS",
            DistancePair::SL => "SL",
            DistancePair::SS => "SS",
        })
    }
}

impl FromStr for DistancePair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistancePair::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| format!("unknown distance pair `{s}`"))
    }
}

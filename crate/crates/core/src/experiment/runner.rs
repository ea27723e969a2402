use rayon::prelude::*;

use super::log::{aborted_line, emission_line, input_line, session_line, trial_line};
use super::{ConditionBlock, ExperimentError, SessionPlan, TrialKind, TrialRecord, TrialSpec};
use crate::agents::simulate_trial;
use crate::geometry::PixelPoint;
use crate::interaction::{ActiveTrial, Condition, Emission, InputEvent, InteractionError, Machine};
use crate::rng::{derive_seed, purpose, stream};
use crate::scene::{build_layout, place_next_button, SceneLayout};
use crate::sim::SimConfig;

/// Records and log of one condition block.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRun {
    pub condition: Condition,
    pub records: Vec<TrialRecord>,
    pub log: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutput {
    pub participant: u32,
    pub runs: Vec<ConditionRun>,
}

impl SessionOutput {
    pub fn records(&self) -> impl Iterator<Item = &TrialRecord> {
        self.runs.iter().flat_map(|r| &r.records)
    }
}

/// The layout shared by every session of a run.
pub fn session_layout(config: &SimConfig, seed: u64) -> Result<SceneLayout, ExperimentError> {
    Ok(build_layout(
        &config.display,
        &config.scene,
        derive_seed(seed, &[purpose::LAYOUT]),
    )?)
}

/// Drives one condition block trial by trial and writes its log. Used both
/// by simulated sessions and by the live session service.
#[derive(Debug, Clone)]
pub struct BlockRunner {
    machine: Machine,
    participant: u32,
    seed: u64,
    block: ConditionBlock,
    /// Index of the next trial to start.
    next: usize,
    active: Option<TrialSpec>,
    records: Vec<TrialRecord>,
    log: String,
}

impl BlockRunner {
    /// The cursor starts at the centre of the first trial's start window,
    /// which is raised to the top.
    pub fn new(
        config: &SimConfig,
        mut layout: SceneLayout,
        participant: u32,
        seed: u64,
        block: ConditionBlock,
    ) -> Result<Self, ExperimentError> {
        let cursor = match block.trials.first() {
            Some(t) => {
                layout.raise(t.start);
                layout.window(t.start).center
            }
            None => config.display.display_rect().center(),
        };
        let machine = Machine::new(
            config.display.clone(),
            config.scene.clone(),
            config.interaction.clone(),
            block.condition,
            layout,
            cursor,
        );
        let mut log = String::new();
        session_line(&mut log, participant, block.condition, cursor);
        Ok(Self {
            machine,
            participant,
            seed,
            block,
            next: 0,
            active: None,
            records: Vec::new(),
            log,
        })
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn condition(&self) -> Condition {
        self.block.condition
    }

    pub fn participant(&self) -> u32 {
        self.participant
    }

    pub fn active(&self) -> Option<&TrialSpec> {
        self.active.as_ref()
    }

    pub fn remaining(&self) -> usize {
        self.block.trials.len() - self.next
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    fn trial_path(&self, p: u64, index: usize) -> [u64; 4] {
        [p, self.participant as u64, self.block.condition.index() as u64, index as u64]
    }

    /// Starts the next planned trial with a freshly drawn button position.
    /// Returns `None` once the block is exhausted.
    pub fn start_next_trial(&mut self) -> Result<Option<TrialSpec>, ExperimentError> {
        let Some(spec) = self.block.trials.get(self.next).copied() else {
            return Ok(None);
        };
        let mut rng = stream(self.seed, &self.trial_path(purpose::BUTTON, spec.index));
        let window = self.machine.layout().window(spec.target).clone();
        let button = place_next_button(&window, self.machine.scene_config(), &mut rng)?;
        self.begin_trial_at(button)?;
        Ok(Some(spec))
    }

    /// Starts the next planned trial with a given button position. A trial
    /// still in progress is aborted first.
    pub fn begin_trial_at(&mut self, button: PixelPoint) -> Result<TrialSpec, ExperimentError> {
        if self.active.is_some() {
            self.abort_trial();
        }
        let spec = *self
            .block
            .trials
            .get(self.next)
            .ok_or(ExperimentError::BlockExhausted)?;
        self.next += 1;
        trial_line(&mut self.log, &spec, button);
        self.machine.begin_trial(ActiveTrial {
            target: spec.target,
            button_center: button,
        });
        self.active = Some(spec);
        Ok(spec)
    }

    /// Applies one input event to the active trial and logs it together
    /// with the machine's reaction. A rejected event is not logged.
    pub fn apply(&mut self, event: InputEvent) -> Result<Vec<Emission>, ExperimentError> {
        let spec = self.active
            .ok_or(ExperimentError::Interaction(InteractionError::NoActiveTrial))?;
        let emissions = self.machine.step(event)?;
        input_line(&mut self.log, &event);
        for e in &emissions {
            emission_line(&mut self.log, event.t_ms, e, self.machine.state());
            if let Emission::TrialComplete(times) = e {
                let s = self.machine.state();
                self.records.push(TrialRecord {
                    participant: self.participant,
                    condition: self.block.condition,
                    trial: spec.index,
                    pair: spec.pair,
                    thumbnail_ms: times.thumbnail_ms,
                    button_ms: times.button_ms,
                    total_ms: times.total_ms,
                    errors: s.errors_so_far,
                    detours: s.category_detours,
                    training: spec.kind == TrialKind::Training,
                    discarded: spec.kind == TrialKind::Discarded,
                });
                self.active = None;
            }
        }
        Ok(emissions)
    }

    /// Voids the active trial; it produces no record.
    pub fn abort_trial(&mut self) {
        if self.active.take().is_some() {
            aborted_line(&mut self.log, self.machine.state().last_t);
        }
    }

    /// Ends the block, voiding any trial still in progress.
    pub fn finish(mut self) -> ConditionRun {
        self.abort_trial();
        ConditionRun {
            condition: self.block.condition,
            records: self.records,
            log: self.log,
        }
    }
}

fn run_block(
    config: &SimConfig,
    layout: &SceneLayout,
    plan: &SessionPlan,
    block: &ConditionBlock,
) -> Result<ConditionRun, ExperimentError> {
    let mut runner = BlockRunner::new(config, layout.clone(), plan.participant, plan.seed, block.clone())?;
    while let Some(spec) = runner.start_next_trial()? {
        let context = |runner: &BlockRunner| (runner.participant, runner.condition().to_string(), spec.index);
        let mut rng = stream(plan.seed, &runner.trial_path(purpose::AGENT, spec.index));
        let trace = simulate_trial(runner.machine(), &config.cursor, &config.gaze, &mut rng).map_err(
            |source| {
                let (participant, condition, trial) = context(&runner);
                ExperimentError::Agent {
                    participant,
                    condition,
                    trial,
                    source,
                }
            },
        )?;
        for e in trace.events {
            runner.apply(e)?;
        }
        if runner.active().is_some() {
            let (participant, condition, trial) = context(&runner);
            return Err(ExperimentError::Incomplete {
                participant,
                condition,
                trial,
            });
        }
    }
    Ok(runner.finish())
}

/// Runs every block of a plan with the synthetic agents. Blocks are
/// independent and run in parallel; output order follows the plan.
pub fn run_session(
    plan: &SessionPlan,
    config: &SimConfig,
    layout: &SceneLayout,
) -> Result<SessionOutput, ExperimentError> {
    let runs = plan
        .blocks
        .par_iter()
        .map(|b| run_block(config, layout, plan, b))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SessionOutput {
        participant: plan.participant,
        runs,
    })
}

/// File name of a block log inside a run's `logs/` directory.
pub fn log_file_name(participant: u32, condition: Condition) -> String {
    format!("p{participant:03}_{}.log", condition.slug())
}

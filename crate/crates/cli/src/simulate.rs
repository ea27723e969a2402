use std::path::Path;

use rayon::prelude::*;
use vwm_core::experiment::{
    build_session, log_file_name, ExperimentError, run_session, session_layout, TrialRecord,
};
use vwm_core::SimConfig;

use crate::error::{internal, user, CliError};
use crate::output::{manifest_text, OutputDir, MANIFEST};

pub fn simulate(
    participants: u32,
    seed: u64,
    out: &Path,
    params: Option<&Path>,
    config: &SimConfig,
) -> Result<(), CliError> {
    let layout = session_layout(config, seed).map_err(|e| user(e.to_string()))?;
    let mut dir = OutputDir::prepare(out)?;
    // A previous run in the same directory is replaced as a whole.
    for stale in ["trials.csv", "plans", "logs", "reports", "layout.csv", "params.effective"] {
        dir.claim(stale)?;
    }
    dir.write(
        MANIFEST,
        &manifest_text(&[
            ("command", "simulate".into()),
            ("participants", participants.to_string()),
            ("seed", seed.to_string()),
            ("params", params.map_or("defaults".into(), |p| p.display().to_string())),
            ("effective_params", "params.effective".into()),
            ("out", out.display().to_string()),
        ]),
    )?;
    dir.write("params.effective", &config.to_kv())?;
    dir.write("layout.csv", &layout.to_table())?;

    let sessions = (0..participants)
        .into_par_iter()
        .map(|p| {
            let plan = build_session(p, p as usize % 4, seed, &layout)?;
            let output = run_session(&plan, config, &layout)?;
            Ok((plan, output))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()
        .map_err(|e| match e {
            // The agents cannot finish under these parameters.
            ExperimentError::Agent { .. } => user(format!("simulation failed: {e}")),
            e => internal(format!("simulation failed: {e}")),
        })?;

    dir.claim_dir("plans")?;
    dir.claim_dir("logs")?;
    let mut records: Vec<&TrialRecord> = Vec::new();
    for (plan, output) in &sessions {
        dir.write(&format!("plans/p{:03}.plan", plan.participant), &plan.to_manifest())?;
        for run in &output.runs {
            dir.write(&format!("logs/{}", log_file_name(plan.participant, run.condition)), &run.log)?;
        }
        records.extend(output.records());
    }
    dir.write("trials.csv", &TrialRecord::to_csv(records.iter().copied()))?;
    let analyzable = records.iter().filter(|r| r.is_recorded()).count();
    dir.commit();
    println!(
        "{participants} participants, {} trials ({analyzable} analyzable) written to {}",
        records.len(),
        out.display()
    );
    Ok(())
}

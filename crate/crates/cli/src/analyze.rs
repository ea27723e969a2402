use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use vwm_core::experiment::{extract_records, TrialRecord};
use vwm_core::Condition;
use vwm_stats::{
    aggregate, block_analysis, Block, BlockReport, Measure, StatsConfig, StatsError,
    CONTRAST_CSV_HEADER, EFFECT_CSV_HEADER,
};

use crate::error::{io_err, user, CliError};
use crate::output::write_atomic;

/// Reads every `logs/*.log` under `run`. Problems are listed as
/// `file:line: message`.
fn load(run: &Path) -> Result<(Vec<TrialRecord>, Vec<String>), CliError> {
    let logs = run.join("logs");
    if !run.is_dir() {
        return Err(user(format!("run directory {} does not exist", run.display())));
    }
    let mut files: Vec<_> = fs::read_dir(&logs)
        .map_err(|_| user(format!("{} has no logs/ directory", run.display())))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "log"))
        .collect();
    if files.is_empty() {
        return Err(user(format!("no .log files in {}", logs.display())));
    }
    files.sort();
    let mut records = Vec::new();
    let mut problems = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(io_err(&f))?;
        let (r, issues) = extract_records(&text);
        records.extend(r);
        for i in issues {
            problems.push(format!("{}:{}: {}", f.display(), i.line, i.msg));
        }
    }
    records.sort_by_key(|r| (r.participant, r.condition.index(), r.trial));
    Ok((records, problems))
}

fn describe_failure(measure: Measure, block: Block, e: &StatsError) -> String {
    format!("{measure}, {block} block: not analyzable ({e})\n")
}

/// One measure's report: text, effect rows, contrast rows.
fn measure_report(records: &[TrialRecord], measure: Measure, config: &StatsConfig) -> (String, String, String) {
    let results: Vec<(Block, Result<BlockReport, StatsError>)> = measure
        .blocks()
        .into_par_iter()
        .map(|b| (b, block_analysis(records, measure, b, config)))
        .collect();
    let (mut text, mut effects, mut contrasts) = (String::new(), String::new(), String::new());
    for (block, r) in results {
        match r {
            Ok(rep) => {
                text.push_str(&rep.to_text(config.alpha));
                effects.push_str(&rep.effect_csv_rows());
                contrasts.push_str(&rep.contrast_csv_rows());
            }
            Err(e) => text.push_str(&describe_failure(measure, block, &e)),
        }
        text.push('\n');
    }
    (text, effects, contrasts)
}

/// Participant × condition means per block, for plotting.
fn participant_means(records: &[TrialRecord]) -> String {
    let mut out = String::from("measure,block,participant,condition,value\n");
    for m in Measure::ALL {
        for b in m.blocks() {
            for row in aggregate(records, m, b).rows {
                let cond = Condition::ALL[2 * row.a + row.b];
                let _ = writeln!(out, "{m},{b},{},{cond},{}", row.unit, row.value);
            }
        }
    }
    out
}

pub fn analyze(
    run: &Path,
    measure: Option<&str>,
    block: Option<&str>,
    lenient: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let measure: Option<Measure> = measure
        .map(|m| m.parse().map_err(|e: StatsError| user(e.to_string())))
        .transpose()?;
    let block = match (measure, block) {
        (Some(m), Some(b)) => Some(m.parse_block(b).map_err(|e| user(e.to_string()))?),
        _ => None,
    };
    let (records, problems) = load(run)?;
    for p in &problems {
        eprintln!("{p}");
    }
    if !problems.is_empty() {
        if !lenient {
            return Err(user(format!(
                "{} problem(s) in the logs; rerun with --lenient to analyze the valid trials only",
                problems.len()
            )));
        }
        eprintln!("continuing with {} valid trials", records.len());
    }
    let config = StatsConfig::default();

    if let Some(m) = measure {
        let text = match block {
            Some(b) => match block_analysis(&records, m, b, &config) {
                Ok(rep) => rep.to_text(config.alpha),
                Err(e) => describe_failure(m, b, &e),
            },
            None => measure_report(&records, m, &config).0,
        };
        print!("{text}");
        return Ok(());
    }

    let dir = out.map_or_else(|| run.join("reports"), Path::to_path_buf);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let reports: Vec<_> = Measure::ALL
        .into_par_iter()
        .map(|m| (m, measure_report(&records, m, &config)))
        .collect();
    for (m, (text, effects, contrasts)) in &reports {
        write_atomic(&dir.join(format!("{m}.txt")), text)?;
        write_atomic(&dir.join(format!("{m}_effects.csv")), &format!("{EFFECT_CSV_HEADER}\n{effects}"))?;
        write_atomic(
            &dir.join(format!("{m}_contrasts.csv")),
            &format!("{CONTRAST_CSV_HEADER}\n{contrasts}"),
        )?;
    }
    write_atomic(&dir.join("participant_means.csv"), &participant_means(&records))?;
    let recorded = records.iter().filter(|r| r.is_recorded()).count();
    println!(
        "{} trials read ({recorded} recorded); reports written to {}",
        records.len(),
        dir.display()
    );
    Ok(())
}

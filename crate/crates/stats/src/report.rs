//! Per-block analysis of trial records, shaped like the study's result
//! tables: one row per effect with F, p and partial eta squared, followed by
//! pairwise cell contrasts.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use vwm_core::experiment::{DistancePair, TrialRecord};
use vwm_core::{Condition, CursorBehavior, Ring, SelectionMode};

use crate::anova::{anova_two_way, EffectRow};
use crate::art::{art_anova, art_c_contrasts, cell_index};
use crate::dataset::{Effect, FactorialDataset};
use crate::effect::cohen_d;
use crate::shapiro::shapiro_wilk;
use crate::tukey::{tukey_hsd, ContrastResult};
use crate::StatsError;

pub const EFFECT_CSV_HEADER: &str = "measure,block,method,effect,F,df_effect,df_error,p,partial_eta_sq";
pub const CONTRAST_CSV_HEADER: &str = "measure,block,cell_1,cell_2,mean_diff,q,p,cohen_d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Thumbnail,
    Button,
    Total,
    /// Selection errors per trial, as a percentage.
    Errors,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Thumbnail, Measure::Button, Measure::Total, Measure::Errors];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Thumbnail => "thumbnail",
            Measure::Button => "button",
            Measure::Total => "total",
            Measure::Errors => "errors",
        }
    }

    pub fn value(self, r: &TrialRecord) -> f64 {
        match self {
            Measure::Thumbnail => r.thumbnail_ms as f64,
            Measure::Button => r.button_ms as f64,
            Measure::Total => r.total_ms as f64,
            Measure::Errors => 100.0 * r.errors as f64,
        }
    }

    /// Thumbnail time depends on the start window, button time on the
    /// target window, total time and errors on both.
    pub fn blocks(self) -> Vec<Block> {
        match self {
            Measure::Thumbnail => vec![Block::Start(Ring::Large), Block::Start(Ring::Short)],
            Measure::Button => vec![Block::Target(Ring::Large), Block::Target(Ring::Short)],
            Measure::Total | Measure::Errors => DistancePair::ALL.into_iter().map(Block::Pair).collect(),
        }
    }

    pub fn parse_block(self, s: &str) -> Result<Block, StatsError> {
        self.blocks()
            .into_iter()
            .find(|b| b.to_string().eq_ignore_ascii_case(s) || b.short().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let valid: Vec<String> = self.blocks().iter().map(|b| b.to_string()).collect();
                StatsError::Invalid(format!(
                    "block `{s}` is not valid for {}; expected one of {}",
                    self.name(),
                    valid.join(", ")
                ))
            })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Measure {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| StatsError::Invalid(format!("unknown measure `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Start(Ring),
    Target(Ring),
    Pair(DistancePair),
}

impl Block {
    pub fn contains(self, r: &TrialRecord) -> bool {
        match self {
            Block::Start(ring) => r.pair.start_ring() == ring,
            Block::Target(ring) => r.pair.target_ring() == ring,
            Block::Pair(p) => r.pair == p,
        }
    }

    fn short(self) -> String {
        match self {
            Block::Start(r) | Block::Target(r) => r.letter().to_string(),
            Block::Pair(p) => p.to_string(),
        }
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::Start(Ring::Large) | Block::Target(Ring::Large) => f.write_str("Large"),
            Block::Start(Ring::Short) | Block::Target(Ring::Short) => f.write_str("Short"),
            Block::Pair(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsConfig {
    pub alpha: f64,
    /// Always use the aligned rank transform; otherwise only when the
    /// residuals fail the normality screen.
    pub use_art: bool,
    pub shapiro_threshold: f64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            use_art: true,
            shapiro_threshold: 0.05,
        }
    }
}

impl StatsConfig {
    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(StatsError::Invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(self.shapiro_threshold > 0.0 && self.shapiro_threshold < 1.0) {
            return Err(StatsError::Invalid("shapiro_threshold outside (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Art,
    Anova,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Art => "ART",
            Method::Anova => "ANOVA",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub measure: Measure,
    pub block: Block,
    pub method: Method,
    pub n_per_cell: usize,
    /// Cell means on the measure's scale, indexed like [`Condition::ALL`].
    pub cell_means: [f64; 4],
    /// Shapiro–Wilk on the residuals of the raw two-way model.
    pub shapiro: Option<(f64, f64)>,
    pub effects: [EffectRow; 3],
    pub contrasts: Vec<ContrastResult>,
}

const EFFECT_NAMES: [&str; 3] = ["Selection Mode", "Cursor Behavior", "Interaction"];

fn levels(c: Condition) -> (usize, usize) {
    let a = match c.selection {
        SelectionMode::Gaze => 0,
        SelectionMode::Cursor => 1,
    };
    let b = match c.behavior {
        CursorBehavior::Teleport => 0,
        CursorBehavior::Stay => 1,
    };
    (a, b)
}

fn cell_name(i: usize) -> &'static str {
    Condition::ALL[i].slug()
}

/// Participant × condition means of the measure over the block's recorded
/// trials, as a 2×2 dataset (A = selection mode, B = cursor behaviour).
pub fn aggregate(records: &[TrialRecord], measure: Measure, block: Block) -> FactorialDataset {
    let mut acc: BTreeMap<(u32, usize), (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_recorded() && block.contains(r)) {
        let e = acc.entry((r.participant, r.condition.index())).or_default();
        e.0 += measure.value(r);
        e.1 += 1;
    }
    let mut data = FactorialDataset::default();
    for ((unit, cond), (sum, n)) in acc {
        let (a, b) = levels(Condition::ALL[cond]);
        data.push(unit, a, b, sum / n as f64);
    }
    data
}

fn residuals(data: &FactorialDataset) -> Vec<f64> {
    let mut means = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let c = data.cell(a, b);
            means[a][b] = c.iter().sum::<f64>() / c.len().max(1) as f64;
        }
    }
    data.rows.iter().map(|r| r.value - means[r.a][r.b]).collect()
}

pub fn block_analysis(
    records: &[TrialRecord],
    measure: Measure,
    block: Block,
    config: &StatsConfig,
) -> Result<BlockReport, StatsError> {
    config.validate()?;
    if !measure.blocks().contains(&block) {
        return Err(StatsError::Invalid(format!("block {block} does not apply to {measure}")));
    }
    let data = aggregate(records, measure, block);
    if data.rows.is_empty() {
        return Err(StatsError::EmptyBlock(block.to_string()));
    }
    let raw = anova_two_way(&data)?;
    let shapiro = shapiro_wilk(&residuals(&data)).ok();
    let non_normal = shapiro.is_some_and(|(_, p)| p < config.shapiro_threshold);
    let method = if config.use_art || non_normal {
        Method::Art
    } else {
        Method::Anova
    };
    let n_per_cell = data.cell(0, 0).len();
    let mut cell_means = [0.0; 4];
    let mut groups: [Vec<f64>; 4] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            let c = data.cell(a, b);
            cell_means[cell_index(a, b)] = c.iter().sum::<f64>() / c.len() as f64;
            groups[cell_index(a, b)] = c;
        }
    }
    let (effects, contrasts) = match method {
        Method::Art => {
            let art = art_anova(&data)?;
            ([art.a, art.b, art.ab], art_c_contrasts(&data)?)
        }
        Method::Anova => {
            let mut c = tukey_hsd(&cell_means, raw.ms_error, raw.df_error, n_per_cell)?;
            for x in &mut c {
                x.cohen_d = cohen_d(&groups[x.i], &groups[x.j]).ok();
            }
            ([raw.a, raw.b, raw.ab], c)
        }
    };
    Ok(BlockReport {
        measure,
        block,
        method,
        n_per_cell,
        cell_means,
        shapiro,
        effects,
        contrasts,
    })
}

impl BlockReport {
    pub fn effect(&self, e: Effect) -> &EffectRow {
        match e {
            Effect::A => &self.effects[0],
            Effect::B => &self.effects[1],
            Effect::AB => &self.effects[2],
        }
    }

    pub fn effect_csv_rows(&self) -> String {
        let mut out = String::new();
        for (name, e) in EFFECT_NAMES.iter().zip(&self.effects) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.measure,
                self.block,
                self.method.name(),
                name,
                e.f,
                e.df,
                e.df_error,
                e.p,
                e.partial_eta_sq
            );
        }
        out
    }

    pub fn contrast_csv_rows(&self) -> String {
        let mut out = String::new();
        for c in &self.contrasts {
            let d = c.cohen_d.map_or_else(|| "NA".to_string(), |d| d.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.measure,
                self.block,
                cell_name(c.i),
                cell_name(c.j),
                c.mean_diff,
                c.q,
                c.p,
                d
            );
        }
        out
    }

    /// Plain-text table: effects, then cell means, then contrasts.
    pub fn to_text(&self, alpha: f64) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} time, {} block ({}; {} participants per cell)",
            self.measure,
            self.block,
            self.method.name(),
            self.n_per_cell
        );
        if self.measure == Measure::Errors {
            out = out.replacen("errors time", "selection errors", 1);
        }
        if let Some((w, p)) = self.shapiro {
            let _ = writeln!(out, "Shapiro-Wilk on residuals: W = {w:.4}, p {}", p_relation(p));
        }
        let _ = writeln!(out, "{:<16} {:>10} {:>8} {:>10} {:>8}", "Effect", "F", "df", "p", "eta_p^2");
        for (name, e) in EFFECT_NAMES.iter().zip(&self.effects) {
            let mark = if e.p < alpha { " *" } else { "" };
            let _ = writeln!(
                out,
                "{:<16} {:>10.3} {:>8} {:>10} {:>8.3}{}",
                name,
                e.f,
                format!("{},{}", e.df, e.df_error),
                fmt_p(e.p),
                e.partial_eta_sq,
                mark
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "{:<16} {:>12}", "Condition", "Mean");
        for (i, m) in self.cell_means.iter().enumerate() {
            let _ = writeln!(out, "{:<16} {:>12.2}", cell_name(i), m);
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<34} {:>10} {:>8} {:>10} {:>8}",
            "Contrast", "Diff", "q", "p", "d"
        );
        for c in &self.contrasts {
            let label = format!("{} vs {}", cell_name(c.i), cell_name(c.j));
            let d = c.cohen_d.map_or_else(|| "NA".to_string(), |d| format!("{d:.3}"));
            let _ = writeln!(
                out,
                "{:<34} {:>10.2} {:>8.3} {:>10} {:>8}",
                label,
                c.mean_diff,
                c.q,
                fmt_p(c.p),
                d
            );
        }
        out
    }
}

fn p_relation(p: f64) -> String {
    if p < 0.001 {
        "< .001".to_string()
    } else {
        format!("= {p:.3}")
    }
}

fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "< .001".to_string()
    } else {
        format!("{p:.3}")
    }
}

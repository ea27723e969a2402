//! Analysis pipeline for 2×2 within-subject designs: normality screening,
//! aligned rank transform, fixed-effects two-way ANOVA, Tukey HSD and
//! effect sizes, plus the per-block report over trial records.

mod anova;
mod art;
mod dataset;
mod effect;
mod quad;
mod report;
mod shapiro;
mod tukey;

use thiserror::Error;

pub use anova::{anova_two_way, AnovaResult, EffectRow};
pub use art::{art_align, art_anova, art_c_contrasts, rank_average, ArtResult};
pub use dataset::{Effect, FactorialDataset, Row};
pub use effect::cohen_d;
pub use report::{
    aggregate, block_analysis, Block, BlockReport, Measure, Method, StatsConfig, CONTRAST_CSV_HEADER,
    EFFECT_CSV_HEADER,
};
pub use shapiro::shapiro_wilk;
pub use tukey::{ptukey_cdf, ptukey_sf, qtukey, tukey_hsd, ContrastResult};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("cell (a={a}, b={b}) is empty")]
    EmptyCell { a: usize, b: usize },
    #[error("need at least {need} observations per cell, cell (a={a}, b={b}) has {have}")]
    TooFewPerCell { a: usize, b: usize, have: usize, need: usize },
    #[error("cells have unequal sizes; the fixed-effects decomposition requires a balanced design")]
    Unbalanced,
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
    #[error("factor level {level} out of range at row {row}")]
    BadLevel { row: usize, level: usize },
    #[error("zero error variance")]
    ZeroErrorVariance,
    #[error("zero pooled standard deviation")]
    ZeroPooledSd,
    #[error("sample size {0} outside the supported range")]
    SampleSize(usize),
    #[error("all values are identical")]
    Constant,
    #[error("degrees of freedom must be positive")]
    BadDf,
    #[error("need at least two groups")]
    TooFewGroups,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("block {0} has no recorded trials")]
    EmptyBlock(String),
}

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::dataset::{Effect, FactorialDataset};
use crate::StatsError;

/// One line of an ANOVA table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectRow {
    pub ss: f64,
    pub df: f64,
    pub f: f64,
    pub df_error: f64,
    pub p: f64,
    pub partial_eta_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaResult {
    pub a: EffectRow,
    pub b: EffectRow,
    pub ab: EffectRow,
    pub ss_error: f64,
    pub df_error: f64,
    pub ms_error: f64,
    pub ss_total: f64,
}

impl AnovaResult {
    pub fn row(&self, effect: Effect) -> &EffectRow {
        match effect {
            Effect::A => &self.a,
            Effect::B => &self.b,
            Effect::AB => &self.ab,
        }
    }
}

pub(crate) fn f_sf(f: f64, df1: f64, df2: f64) -> f64 {
    let dist = FisherSnedecor::new(df1, df2).expect("positive degrees of freedom");
    dist.sf(f).clamp(0.0, 1.0)
}

/// Fixed-effects two-way ANOVA for a balanced 2×2 design with at least two
/// observations per cell.
pub fn anova_two_way(data: &FactorialDataset) -> Result<AnovaResult, StatsError> {
    let s = data.summary(2)?;
    if !s.is_balanced() {
        return Err(StatsError::Unbalanced);
    }
    let (mut ss_a, mut ss_b, mut ss_ab, mut ss_err, mut ss_tot) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &data.rows {
        ss_a += s.effect_estimate(Effect::A, r.a, r.b).powi(2);
        ss_b += s.effect_estimate(Effect::B, r.a, r.b).powi(2);
        ss_ab += s.effect_estimate(Effect::AB, r.a, r.b).powi(2);
        ss_err += (r.value - s.cell_mean[r.a][r.b]).powi(2);
        ss_tot += (r.value - s.grand).powi(2);
    }
    if !(ss_err > 1e-12 * ss_tot) || ss_err == 0.0 {
        return Err(StatsError::ZeroErrorVariance);
    }
    let df_error = (data.rows.len() - 4) as f64;
    let ms_error = ss_err / df_error;
    let row = |ss: f64| {
        let f = ss / ms_error;
        EffectRow {
            ss,
            df: 1.0,
            f,
            df_error,
            p: f_sf(f, 1.0, df_error),
            partial_eta_sq: ss / (ss + ss_err),
        }
    };
    Ok(AnovaResult {
        a: row(ss_a),
        b: row(ss_b),
        ab: row(ss_ab),
        ss_error: ss_err,
        df_error,
        ms_error,
        ss_total: ss_tot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textbook() -> FactorialDataset {
        let mut d = FactorialDataset::default();
        let cells = [
            ((0, 0), [3.0, 5.0, 4.0]),
            ((0, 1), [6.0, 8.0, 7.0]),
            ((1, 0), [2.0, 3.0, 4.0]),
            ((1, 1), [9.0, 11.0, 10.0]),
        ];
        let mut unit = 0;
        for ((a, b), vs) in cells {
            for v in vs {
                d.push(unit, a, b, v);
                unit += 1;
            }
        }
        d
    }

    #[test]
    fn textbook_values() {
        // Frozen from statsmodels anova_lm (sum-coded OLS, type II).
        let r = anova_two_way(&textbook()).unwrap();
        assert!((r.a.ss - 3.0).abs() < 1e-9);
        assert!((r.b.ss - 75.0).abs() < 1e-9);
        assert!((r.ab.ss - 12.0).abs() < 1e-9);
        assert!((r.ss_error - 8.0).abs() < 1e-9);
        assert_eq!(r.df_error, 8.0);
        assert!((r.a.f - 3.0).abs() < 1e-9);
        assert!((r.a.p - 0.1215029188171131).abs() < 1e-9);
        assert!((r.b.p - 2.4568407761519915e-05).abs() < 1e-11);
        assert!((r.ab.p - 0.008516263370901242).abs() < 1e-9);
        assert!((r.ab.partial_eta_sq - 0.6).abs() < 1e-12);
    }

    #[test]
    fn identical_cells_give_zero_f() {
        let mut d = FactorialDataset::default();
        for a in 0..2 {
            for b in 0..2 {
                for (i, v) in [1.0, 2.0, 4.0].into_iter().enumerate() {
                    d.push(i as u32, a, b, v);
                }
            }
        }
        let r = anova_two_way(&d).unwrap();
        for e in Effect::ALL {
            assert!(r.row(e).f < 1e-20);
            assert!((r.row(e).p - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let mut d = FactorialDataset::default();
        for a in 0..2 {
            for b in 0..2 {
                d.push(0, a, b, (a * 2 + b) as f64);
                d.push(1, a, b, (a * 2 + b) as f64);
            }
        }
        assert_eq!(anova_two_way(&d), Err(StatsError::ZeroErrorVariance));
        d.rows.pop();
        assert_eq!(anova_two_way(&d), Err(StatsError::TooFewPerCell { a: 1, b: 1, have: 1, need: 2 }));
        d.push(1, 1, 1, 3.5);
        d.push(2, 1, 1, 3.0);
        assert_eq!(anova_two_way(&d), Err(StatsError::Unbalanced));
        d.rows.retain(|r| !(r.a == 0 && r.b == 1));
        assert_eq!(anova_two_way(&d), Err(StatsError::EmptyCell { a: 0, b: 1 }));
    }
}

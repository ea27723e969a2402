//! Aligned Rank Transform for the 2×2 design.

use crate::anova::{anova_two_way, EffectRow};
use crate::dataset::{Effect, FactorialDataset};
use crate::effect::cohen_d;
use crate::tukey::{tukey_hsd, ContrastResult};
use crate::StatsError;

/// Strips every effect except `effect`: residual from the cell mean plus
/// the estimated effect of interest.
pub fn art_align(data: &FactorialDataset, effect: Effect) -> Result<FactorialDataset, StatsError> {
    let s = data.summary(1)?;
    let aligned: Vec<f64> = data
        .rows
        .iter()
        .map(|r| r.value - s.cell_mean[r.a][r.b] + s.effect_estimate(effect, r.a, r.b))
        .collect();
    Ok(data.with_values(&aligned))
}

/// 1-based ranks; ties share their average rank.
pub fn rank_average(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArtResult {
    pub a: EffectRow,
    pub b: EffectRow,
    pub ab: EffectRow,
}

impl ArtResult {
    pub fn row(&self, effect: Effect) -> &EffectRow {
        match effect {
            Effect::A => &self.a,
            Effect::B => &self.b,
            Effect::AB => &self.ab,
        }
    }
}

/// For each effect: align, rank, run the two-way ANOVA on the ranks and
/// keep that effect's row.
pub fn art_anova(data: &FactorialDataset) -> Result<ArtResult, StatsError> {
    let run = |effect: Effect| -> Result<EffectRow, StatsError> {
        let aligned = art_align(data, effect)?;
        let ranked = aligned.with_values(&rank_average(&aligned.values()));
        Ok(*anova_two_way(&ranked)?.row(effect))
    };
    Ok(ArtResult {
        a: run(Effect::A)?,
        b: run(Effect::B)?,
        ab: run(Effect::AB)?,
    })
}

/// Cell index used by contrasts: `2a + b`.
pub(crate) fn cell_index(a: usize, b: usize) -> usize {
    2 * a + b
}

/// Pairwise contrasts between the four cells. Aligning for the combined
/// four-level factor leaves `value − grand mean`, so the ranks are those of
/// the raw responses; Tukey HSD runs on those ranks. `mean_diff` and
/// `cohen_d` are reported on the raw scale.
pub fn art_c_contrasts(data: &FactorialDataset) -> Result<Vec<ContrastResult>, StatsError> {
    let s = data.summary(2)?;
    let ranked = data.with_values(&rank_average(&data.values()));
    let anova = anova_two_way(&ranked)?;
    let mut rank_means = [0.0; 4];
    let mut raw: [Vec<f64>; 4] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            let c = ranked.cell(a, b);
            rank_means[cell_index(a, b)] = c.iter().sum::<f64>() / c.len() as f64;
            raw[cell_index(a, b)] = data.cell(a, b);
        }
    }
    let mut out = tukey_hsd(&rank_means, anova.ms_error, anova.df_error, s.n[0][0])?;
    for c in &mut out {
        let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
        c.mean_diff = mean(&raw[c.j]) - mean(&raw[c.i]);
        c.cohen_d = cohen_d(&raw[c.i], &raw[c.j]).ok();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(rank_average(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(rank_average(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
        assert!(rank_average(&[]).is_empty());
    }

    #[test]
    fn pure_a_dataset_aligned_for_b_is_flat() {
        let mut d = FactorialDataset::default();
        for (a, b, m) in [(0, 0, 0.0), (0, 1, 0.0), (1, 0, 10.0), (1, 1, 10.0)] {
            for u in 0..4 {
                d.push(u, a, b, m);
            }
        }
        let aligned = art_align(&d, Effect::B).unwrap();
        let v = aligned.values();
        assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-12));
        let aligned_ab = art_align(&d, Effect::AB).unwrap();
        assert!(aligned_ab.values().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn empty_cell_is_an_error() {
        let mut d = FactorialDataset::default();
        d.push(0, 0, 0, 1.0);
        d.push(0, 0, 1, 1.0);
        d.push(0, 1, 0, 1.0);
        assert_eq!(art_align(&d, Effect::A), Err(StatsError::EmptyCell { a: 1, b: 1 }));
    }
}

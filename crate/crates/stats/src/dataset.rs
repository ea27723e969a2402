use crate::StatsError;

/// One observation: unit (participant), level of factor A, level of
/// factor B, response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub unit: u32,
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Effect {
    A,
    B,
    AB,
}

impl Effect {
    pub const ALL: [Effect; 3] = [Effect::A, Effect::B, Effect::AB];
}

/// Long-format 2×2 data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorialDataset {
    pub rows: Vec<Row>,
}

/// Cell and marginal summaries of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Summary {
    pub n: [[usize; 2]; 2],
    pub cell_mean: [[f64; 2]; 2],
    pub a_mean: [f64; 2],
    pub b_mean: [f64; 2],
    pub grand: f64,
}

impl FactorialDataset {
    pub fn new(rows: Vec<Row>) -> Self {
        Self { rows }
    }

    pub fn push(&mut self, unit: u32, a: usize, b: usize, value: f64) {
        self.rows.push(Row { unit, a, b, value });
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    /// Same design, new responses.
    pub fn with_values(&self, values: &[f64]) -> Self {
        debug_assert_eq!(values.len(), self.rows.len());
        Self {
            rows: self
                .rows
                .iter()
                .zip(values)
                .map(|(r, &value)| Row { value, ..*r })
                .collect(),
        }
    }

    pub fn cell(&self, a: usize, b: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.a == a && r.b == b)
            .map(|r| r.value)
            .collect()
    }

    /// Validates levels and finiteness and requires `min_per_cell`
    /// observations in every cell.
    pub(crate) fn summary(&self, min_per_cell: usize) -> Result<Summary, StatsError> {
        let mut n = [[0usize; 2]; 2];
        let mut sum = [[0.0f64; 2]; 2];
        for (i, r) in self.rows.iter().enumerate() {
            if !r.value.is_finite() {
                return Err(StatsError::NonFinite(i));
            }
            if r.a > 1 || r.b > 1 {
                return Err(StatsError::BadLevel {
                    row: i,
                    level: r.a.max(r.b),
                });
            }
            n[r.a][r.b] += 1;
            sum[r.a][r.b] += r.value;
        }
        for a in 0..2 {
            for b in 0..2 {
                if n[a][b] == 0 {
                    return Err(StatsError::EmptyCell { a, b });
                }
                if n[a][b] < min_per_cell {
                    return Err(StatsError::TooFewPerCell {
                        a,
                        b,
                        have: n[a][b],
                        need: min_per_cell,
                    });
                }
            }
        }
        let cell_mean = [0, 1].map(|a| [0, 1].map(|b| sum[a][b] / n[a][b] as f64));
        let total_n = self.rows.len() as f64;
        let a_mean = [0, 1].map(|a| (sum[a][0] + sum[a][1]) / (n[a][0] + n[a][1]) as f64);
        let b_mean = [0, 1].map(|b| (sum[0][b] + sum[1][b]) / (n[0][b] + n[1][b]) as f64);
        let grand = sum.iter().flatten().sum::<f64>() / total_n;
        Ok(Summary {
            n,
            cell_mean,
            a_mean,
            b_mean,
            grand,
        })
    }
}

impl Summary {
    pub fn is_balanced(&self) -> bool {
        let n0 = self.n[0][0];
        self.n.iter().flatten().all(|&n| n == n0)
    }

    /// Estimated effect of `effect` for a row in cell (a, b).
    pub fn effect_estimate(&self, effect: Effect, a: usize, b: usize) -> f64 {
        match effect {
            Effect::A => self.a_mean[a] - self.grand,
            Effect::B => self.b_mean[b] - self.grand,
            Effect::AB => self.cell_mean[a][b] - self.a_mean[a] - self.b_mean[b] + self.grand,
        }
    }
}

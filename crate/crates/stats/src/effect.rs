use crate::StatsError;

/// Standardized mean difference `(mean(g2) − mean(g1)) / pooled SD`.
pub fn cohen_d(group1: &[f64], group2: &[f64]) -> Result<f64, StatsError> {
    let (n1, n2) = (group1.len(), group2.len());
    if n1 < 2 || n2 < 2 {
        return Err(StatsError::Invalid("each group needs at least two values".into()));
    }
    if let Some(i) = group1.iter().chain(group2).position(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(i));
    }
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let (m1, m2) = (mean(group1), mean(group2));
    let ss = |g: &[f64], m: f64| g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    let pooled = ((ss(group1, m1) + ss(group2, m2)) / (n1 + n2 - 2) as f64).sqrt();
    if pooled == 0.0 {
        return Err(StatsError::ZeroPooledSd);
    }
    Ok((m2 - m1) / pooled)
}

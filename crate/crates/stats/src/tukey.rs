//! Studentized range distribution and Tukey's HSD.

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::quad::integrate;
use crate::StatsError;

/// Above this many error degrees of freedom the studentizing variance is
/// treated as known.
const DF_INFINITE: f64 = 50_000.0;
const TOL: f64 = 1e-11;

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn big_phi(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// P(range of k standard normals ≤ w).
fn range_cdf(w: f64, k: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let f = |z: f64| {
        let d = big_phi(z) - big_phi(z - w);
        if d <= 0.0 {
            0.0
        } else {
            phi(z) * d.powf(k - 1.0)
        }
    };
    // The integrand vanishes outside the span where φ(z) is non-negligible.
    let lo = -8.5;
    let hi = 8.5 + w.min(8.5);
    (k * integrate(f, lo, hi, TOL)).clamp(0.0, 1.0)
}

/// Density of s = sqrt(χ²_ν / ν).
fn ln_s_density(s: f64, df: f64) -> f64 {
    let h = df / 2.0;
    h * df.ln() - ln_gamma(h) - (h - 1.0) * std::f64::consts::LN_2 + (df - 1.0) * s.ln()
        - h * s * s
}

fn validate(q: f64, k: f64, df: f64) -> Result<(), StatsError> {
    if !(k >= 2.0) {
        return Err(StatsError::TooFewGroups);
    }
    if !(df > 0.0) {
        return Err(StatsError::BadDf);
    }
    if q.is_nan() {
        return Err(StatsError::Invalid("q is NaN".into()));
    }
    Ok(())
}

/// CDF of the studentized range with `k` groups and `df` error degrees of
/// freedom, by nested adaptive quadrature.
pub fn ptukey_cdf(q: f64, k: f64, df: f64) -> Result<f64, StatsError> {
    validate(q, k, df)?;
    if q <= 0.0 {
        return Ok(0.0);
    }
    if q.is_infinite() {
        return Ok(1.0);
    }
    if df > DF_INFINITE {
        return Ok(range_cdf(q, k));
    }
    // s has mode near 1 and spread ~ 1/sqrt(2 df); integrate far enough
    // into both tails, splitting at the mode.
    let spread = 1.0 / (2.0 * df).sqrt();
    let mode = if df > 1.0 { ((df - 1.0) / df).sqrt() } else { 0.0 };
    let lo = (mode - 40.0 * spread).max(0.0);
    let hi = mode + 40.0 * spread + 10.0 / df.sqrt().max(1.0);
    let f = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let dens = ln_s_density(s, df).exp();
        if dens == 0.0 {
            0.0
        } else {
            dens * range_cdf(q * s, k)
        }
    };
    let total = if mode > lo {
        integrate(f, lo, mode, TOL) + integrate(f, mode, hi, TOL)
    } else {
        integrate(f, lo, hi, TOL)
    };
    Ok(total.clamp(0.0, 1.0))
}

/// Upper tail of the studentized range.
pub fn ptukey_sf(q: f64, k: f64, df: f64) -> Result<f64, StatsError> {
    Ok((1.0 - ptukey_cdf(q, k, df)?).clamp(0.0, 1.0))
}

/// Critical value: the q with upper-tail probability `alpha`.
pub fn qtukey(alpha: f64, k: f64, df: f64) -> Result<f64, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    validate(1.0, k, df)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while ptukey_sf(hi, k, df)? > alpha {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(StatsError::Invalid("critical value does not converge".into()));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if ptukey_sf(mid, k, df)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One pairwise comparison. `mean_diff` is `mean[j] − mean[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContrastResult {
    pub i: usize,
    pub j: usize,
    pub mean_diff: f64,
    pub q: f64,
    pub p: f64,
    /// Filled in by callers that have the raw groups.
    pub cohen_d: Option<f64>,
}

/// All pairwise Tukey HSD comparisons for equally sized groups.
pub fn tukey_hsd(
    means: &[f64],
    ms_error: f64,
    df_error: f64,
    n_per_group: usize,
) -> Result<Vec<ContrastResult>, StatsError> {
    if means.len() < 2 {
        return Err(StatsError::TooFewGroups);
    }
    if !(df_error > 0.0) {
        return Err(StatsError::BadDf);
    }
    if !(ms_error > 0.0) || n_per_group == 0 {
        return Err(StatsError::Invalid("ms_error and n must be positive".into()));
    }
    let se = (ms_error / n_per_group as f64).sqrt();
    let k = means.len() as f64;
    let mut out = Vec::new();
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            let diff = means[j] - means[i];
            let q = diff.abs() / se;
            out.push(ContrastResult {
                i,
                j,
                mean_diff: diff,
                q,
                p: ptukey_sf(q, k, df_error)?,
                cohen_d: None,
            });
        }
    }
    Ok(out)
}

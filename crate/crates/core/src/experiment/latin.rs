use super::ExperimentError;

/// Balanced Latin square for an even number of conditions: every condition
/// appears once per row and column, and every ordered pair of distinct
/// conditions is adjacent in exactly one row.
///
/// Row `r` is the first row `0, 1, n-1, 2, n-2, ...` shifted by `r`.
pub fn balanced_latin_square(n: usize) -> Result<Vec<Vec<usize>>, ExperimentError> {
    if n == 0 || n % 2 == 1 {
        return Err(ExperimentError::OddSquare(n));
    }
    let first: Vec<usize> = (0..n)
        .map(|j| match j {
            0 => 0,
            j if j % 2 == 1 => j.div_ceil(2),
            j => n - j / 2,
        })
        .collect();
    Ok((0..n)
        .map(|r| first.iter().map(|&c| (c + r) % n).collect())
        .collect())
}

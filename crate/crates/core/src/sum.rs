//! Fixed-order summation. Image means are computed as a pairwise sum of
//! per-row pairwise sums, so results do not depend on thread scheduling.

const BLOCK: usize = 8;

/// Recursive pairwise sum; blocks of up to 8 are summed left to right.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().fold(0.0, |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sums `row_len`-sized rows individually, then sums the row totals.
pub fn row_pairwise_sum(values: &[f64], row_len: usize) -> f64 {
    if row_len == 0 {
        return 0.0;
    }
    let rows: Vec<f64> = values.chunks(row_len).map(pairwise_sum).collect();
    pairwise_sum(&rows)
}

//! Rank-based weights, empirical quantiles, and order-preserving sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weighting::WeightFn;

/// How tied objective values share rank weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieMode {
    /// `ŵ = w((rk + ½)/N)/N` with `rk` the strict-less count.
    #[default]
    Strict,
    /// Members of a tied block share the mean of the block's mid-rank weights.
    TieAveraged,
}

/// Pairwise (fan-in 2) reduction. The tree shape depends only on the
/// number of items, so the result is reproducible bit for bit.
pub fn pairwise_reduce<T, F>(mut items: Vec<T>, add: F) -> Option<T>
where
    F: Fn(T, T) -> T,
{
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(add(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

/// Pairwise sum of a slice of reals.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut buf = values.to_vec();
    let mut len = buf.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            buf[i] = buf[2 * i] + buf[2 * i + 1];
        }
        if len % 2 == 1 {
            buf[half] = buf[len - 1];
            len = half + 1;
        } else {
            len = half;
        }
    }
    buf[0]
}

/// Indices sorted by ascending value; ties keep their original order.
pub fn argsort(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Maximal runs of equal values in sorted order, as `(start, end)` ranges
/// over positions of `order`.
pub fn tie_blocks(values: &[f64], order: &[usize]) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for pos in 1..=order.len() {
        if pos == order.len() || values[order[pos]] != values[order[start]] {
            blocks.push((start, pos));
            start = pos;
        }
    }
    blocks
}

/// True if any two values compare equal.
pub fn has_ties(values: &[f64]) -> bool {
    let order = argsort(values);
    order.windows(2).any(|p| values[p[0]] == values[p[1]])
}

fn check_values(f_values: &[f64]) -> Result<()> {
    if f_values.is_empty() {
        return Err(Error::Domain("empty objective-value list".into()));
    }
    if f_values.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("objective values contain NaN".into()));
    }
    Ok(())
}

/// Empirical preference values `Ŵ_n = w((rk_n + ½)/N)`, block-averaged
/// over ties in `TieAveraged` mode. Rank weights are `Ŵ_n / N`.
pub fn rank_preferences(f_values: &[f64], w: &WeightFn, mode: TieMode) -> Result<Vec<f64>> {
    check_values(f_values)?;
    let nf = f_values.len() as f64;
    let order = argsort(f_values);
    let mut out = vec![0.0; f_values.len()];
    for (start, end) in tie_blocks(f_values, &order) {
        let value = match mode {
            TieMode::Strict => w.eval_unchecked((start as f64 + 0.5) / nf),
            TieMode::TieAveraged => {
                let m = end - start;
                let total: f64 = (start..end).map(|r| w.eval_unchecked((r as f64 + 0.5) / nf)).sum();
                total / m as f64
            }
        };
        for &i in &order[start..end] {
            out[i] = value;
        }
    }
    Ok(out)
}

/// Rank-based weights `ŵ_n` for a batch of objective values.
pub fn rank_weights(f_values: &[f64], w: &WeightFn, mode: TieMode) -> Result<Vec<f64>> {
    let nf = f_values.len() as f64;
    Ok(rank_preferences(f_values, w, mode)?.into_iter().map(|v| v / nf).collect())
}

/// `count / n ≥ p`, tolerant of the rounding in `p * n`.
pub(crate) fn fraction_at_least(count: usize, n: usize, p: f64) -> bool {
    count as f64 + 1e-9 >= p * n as f64
}

/// Largest sample value `u` with `#{f ≤ u}/N ≥ q` and `#{f ≥ u}/N ≥ 1 − q`.
pub fn empirical_quantile(f_values: &[f64], q: f64) -> Result<f64> {
    check_values(f_values)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level {q} outside (0, 1)")));
    }
    let mut sorted = f_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_of_sorted(&sorted, q))
}

pub(crate) fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let mut end = n;
    while end > 0 {
        let u = sorted[end - 1];
        let start = sorted[..end].partition_point(|&v| v < u);
        if fraction_at_least(end, n, q) && fraction_at_least(n - start, n, 1.0 - q) {
            return u;
        }
        end = start;
    }
    sorted[0]
}

/// Empirical CDF inverse `inf{u : F̂(u) ≥ p}` on sorted values.
pub fn ecdf_inverse(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if p <= 0.0 {
        return sorted[0];
    }
    let k = (p * n as f64 - 1e-9).ceil().max(1.0) as usize;
    sorted[k.min(n) - 1]
}

/// Empirical CDF `#{f ≤ u}/N` on sorted values.
pub fn ecdf(sorted: &[f64], u: f64) -> f64 {
    sorted.partition_point(|&v| v <= u) as f64 / sorted.len() as f64
}

//! Monte Carlo estimators of `J`, target divergences and quantiles.
//!
//! Standard errors come from one of two sources. On tie-free batches the
//! rank-weighted self-normalized mean `T = Σŵh/Σŵ` has influence function
//! `w(U)(h − T) − Σ_j Δ_j 1{U ≤ u_j}(h̄(u_j) − T)` (up to a constant), where
//! `(u_j, Δ_j)` are the downward jumps of `w` and `h̄(u)` is the mean of `h`
//! at rank level `u`, estimated by a local average over sorted positions.
//! Batches with ties fall back to batch means over contiguous groups.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch::{weighted_mean, SampleBatch};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::proposals::{sample, ProposalParams};
use crate::ranking::{
    argsort, ecdf_inverse, has_ties, pairwise_sum, quantile_of_sorted, rank_preferences, tie_blocks, TieMode,
};
use crate::rng::{Purpose, StreamKey};
use crate::weighting::WeightFn;

/// Number of standard errors used as tolerance by every check.
pub const TOL_SIGMAS: f64 = 3.0;

/// Distance, in rank standard deviations, within which a class boundary is
/// treated as sitting on a jump of `w`.
const KINK_SIGMAS: f64 = 2.0;

/// A point estimate and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// A divergence estimate, or the flag raised when the other density
/// vanishes at a point carrying target mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    Finite(Estimate),
    Infinite,
}

impl Divergence {
    pub fn finite(&self) -> Option<Estimate> {
        match self {
            Divergence::Finite(e) => Some(*e),
            Divergence::Infinite => None,
        }
    }
}

/// An empirical quantile with a rank-space uncertainty band.
///
/// `stderr` is half the spread of the order statistics at levels `q ± σ_q`,
/// `σ_q = √(q(1−q)/N)`. `band_lo`/`band_hi` sit at `q ∓ (3/√2)σ_q`, so that
/// comparing two independent quantiles band against band uses a `3σ`
/// tolerance on their difference. All band values are sample values, which
/// keeps comparisons invariant under increasing transforms of `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub value: f64,
    pub stderr: f64,
    pub band_lo: f64,
    pub band_hi: f64,
}

pub(crate) fn rank_sigma(q: f64, n: usize) -> f64 {
    (q * (1.0 - q) / n as f64).sqrt()
}

/// Quantile estimate of sorted values at level `q`.
pub fn quantile_estimate(sorted: &[f64], q: f64) -> QuantileEstimate {
    let n = sorted.len();
    let value = quantile_of_sorted(sorted, q);
    let s = rank_sigma(q, n);
    let at = |p: f64| ecdf_inverse(sorted, p.min(1.0));
    let stderr = 0.5 * (at(q + s) - at(q - s));
    let r = TOL_SIGMAS / std::f64::consts::SQRT_2 * s;
    QuantileEstimate { value, stderr, band_lo: at(q - r).min(value), band_hi: at(q + r).max(value) }
}

pub(crate) fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = pairwise_sum(values) / n as f64;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    pairwise_sum(&sq) / (n - 1) as f64
}

/// Number of groups for batch-means standard errors.
pub(crate) fn group_count(n: usize) -> usize {
    (n / 200).clamp(2, 50)
}

/// Batch-means standard error of a statistic recomputed on contiguous groups.
pub(crate) fn grouped_se<F>(n: usize, stat: F) -> Result<f64>
where
    F: Fn(std::ops::Range<usize>) -> Result<f64> + Sync,
{
    let g = group_count(n);
    if n < 2 * g {
        return Ok(0.0);
    }
    let values = (0..g)
        .into_par_iter()
        .map(|i| stat(i * n / g..(i + 1) * n / g))
        .collect::<Result<Vec<f64>>>()?;
    Ok((sample_variance(&values) / g as f64).sqrt())
}

/// Influence-function standard error of `T = Σŵh/Σŵ` on a tie-free batch.
pub(crate) fn influence_se(f: &[f64], pref: &[f64], w: &WeightFn, h: &[f64], t: f64) -> f64 {
    let n = f.len();
    let nf = n as f64;
    let order = argsort(f);
    let mut pos = vec![0usize; n];
    for (i, &idx) in order.iter().enumerate() {
        pos[idx] = i;
    }
    let band = ((nf.sqrt()).ceil() as usize).max(10);
    let (jumps, _) = w.jumps();
    let local: Vec<(f64, f64, f64)> = jumps
        .iter()
        .map(|&(u, size)| {
            let center = u * nf - 0.5;
            let lo = (center - band as f64).floor().max(0.0) as usize;
            let hi = ((center + band as f64).ceil().max(0.0) as usize).min(n - 1);
            let vals: Vec<f64> = (lo..=hi).map(|i| h[order[i]]).filter(|v| v.is_finite()).collect();
            let hbar = if vals.is_empty() { t } else { pairwise_sum(&vals) / vals.len() as f64 };
            (u, size, hbar)
        })
        .collect();
    let a: Vec<f64> = (0..n)
        .map(|i| {
            let u = (pos[i] as f64 + 0.5) / nf;
            let own = if pref[i] > 0.0 { pref[i] * (h[i] - t) } else { 0.0 };
            let correction: f64 = local.iter().filter(|(uj, _, _)| u <= *uj).map(|(_, s, hb)| s * (hb - t)).sum();
            own - correction
        })
        .collect();
    let mass = pairwise_sum(pref) / nf;
    (sample_variance(&a) / nf).sqrt() / mass
}

/// A smooth functional of the class preferences: the statistic is
/// `Σ_c [ψ(W_c)·S_c + P_c·φ(W_c)]` with `S_c` the per-class sum of `h/N`.
pub(crate) struct ClassFunctional {
    pub psi: fn(f64, f64) -> f64,
    pub dpsi: fn(f64, f64) -> f64,
    pub phi: fn(f64) -> f64,
    pub dphi: fn(f64) -> f64,
    /// Second argument passed to `psi`/`dpsi`.
    pub param: f64,
}

fn zero(_: f64) -> f64 {
    0.0
}

impl ClassFunctional {
    /// `ψ(W) = W`, `φ = 0`: a rank-weighted mean of `h`.
    pub fn linear() -> Self {
        Self { psi: |w, _| w, dpsi: |_, _| 1.0, phi: zero, dphi: zero, param: 0.0 }
    }

    /// `ψ(W) = W`, `φ(W) = W ln W`: the KL numerator.
    pub fn with_entropy() -> Self {
        Self {
            psi: |w, _| w,
            dpsi: |_, _| 1.0,
            phi: |w| if w > 0.0 { w * w.ln() } else { 0.0 },
            dphi: |w| w.ln() + 1.0,
            param: 0.0,
        }
    }
}

/// Delta-method standard error of `A/Z_w` on a tie-averaged batch with
/// ties, where `A` is described by `fun`.
///
/// Each level class `c` of `f` has empirical probability `P_c`, quantile
/// pair `(a_c, b_c)` and preference `W_c = G(a_c, b_c)`. A point in class
/// `k` moves `a_c` for every `c > k` and `b_c` for every `c ≥ k`, which
/// gives its influence through `∂G/∂a = (G − w(a))/(b − a)` and
/// `∂G/∂b = (w(b) − G)/(b − a)`.
pub(crate) fn class_influence_se(f: &[f64], w: &WeightFn, h: &[f64], fun: &ClassFunctional) -> f64 {
    let n = f.len();
    let nf = n as f64;
    let order = argsort(f);
    let blocks = tie_blocks(f, &order);
    let (jumps, _) = w.jumps();
    // Near a jump of `w` the preference has a kink; take the one-sided value
    // of `w` that gives the steeper derivative.
    let edge_value = |u: f64, g: f64| -> (f64, bool) {
        let reach = KINK_SIGMAS * rank_sigma(u, n);
        match jumps.iter().find(|(uj, _)| (uj - u).abs() <= reach) {
            Some(&(uj, size)) => {
                let left = w.eval_unchecked(uj);
                let right = left - size;
                (if (left - g).abs() >= (right - g).abs() { left } else { right }, true)
            }
            None => (w.eval_unchecked(u), false),
        }
    };
    let mut class_of = vec![0usize; n];
    let mut stats = Vec::with_capacity(blocks.len());
    for (c, &(lo, hi)) in blocks.iter().enumerate() {
        let a = lo as f64 / nf;
        let b = hi as f64 / nf;
        let g = w.preference_unchecked(a, b);
        let hs: Vec<f64> = order[lo..hi].iter().map(|&i| h[i]).collect();
        for &i in &order[lo..hi] {
            class_of[i] = c;
        }
        let s = pairwise_sum(&hs) / nf;
        let p = b - a;
        let (wa, near_a) = edge_value(a, g);
        let (wb, near_b) = edge_value(b, g);
        let ga = (g - wa) / p;
        let gb = (wb - g) / p;
        let g_eff = if g == 0.0 && (near_a || near_b) {
            (ga.abs() * rank_sigma(a, n)).max(gb.abs() * rank_sigma(b, n)).min(w.max_value())
        } else {
            g
        };
        let d = if g_eff > 0.0 { s * (fun.dpsi)(g_eff, fun.param) + p * (fun.dphi)(g_eff) } else { 0.0 };
        let d = if d.is_finite() { d } else { 0.0 };
        stats.push((g, d * ga, d * gb));
    }
    // suffix[k] = Σ_{c>k} D_c ∂_a G_c + Σ_{c≥k} D_c ∂_b G_c
    let m = stats.len();
    let mut suffix = vec![0.0; m];
    let mut acc_a = 0.0;
    let mut acc_b = 0.0;
    for k in (0..m).rev() {
        acc_b += stats[k].2;
        suffix[k] = acc_a + acc_b;
        acc_a += stats[k].1;
    }
    let infl: Vec<f64> = (0..n)
        .map(|i| {
            let k = class_of[i];
            let g = stats[k].0;
            let own = if g > 0.0 { (fun.psi)(g, fun.param) * h[i] + (fun.phi)(g) } else { 0.0 };
            own + suffix[k]
        })
        .collect();
    (sample_variance(&infl) / nf).sqrt() / w.mass()
}

/// Target-side ingredients of a batch: preferences, weights and log-densities.
pub(crate) struct TargetSample<'a> {
    pub f: &'a [f64],
    pub pref: Vec<f64>,
    pub weights: Vec<f64>,
    pub lp_cur: Vec<f64>,
    pub ties: bool,
    pub w: &'a WeightFn,
    pub mode: TieMode,
}

pub(crate) fn log_densities(params: &ProposalParams, points: &[DVector<f64>]) -> Vec<f64> {
    points.par_iter().map(|x| params.log_density(x)).collect()
}

impl<'a> TargetSample<'a> {
    pub fn new(batch: &'a SampleBatch) -> Result<Self> {
        let lp_cur = log_densities(&batch.origin_params, &batch.points);
        Self::from_parts(&batch.f_values, lp_cur, &batch.weight_fn, batch.tie_mode)
    }

    pub fn from_parts(f: &'a [f64], lp_cur: Vec<f64>, w: &'a WeightFn, mode: TieMode) -> Result<Self> {
        let pref = rank_preferences(f, w, mode)?;
        let nf = f.len() as f64;
        let weights = pref.iter().map(|p| p / nf).collect();
        Ok(Self { f, pref, weights, lp_cur, ties: has_ties(f), w, mode })
    }

    fn sub(&self, r: std::ops::Range<usize>) -> Result<TargetSample<'a>> {
        TargetSample::from_parts(&self.f[r.clone()], self.lp_cur[r].to_vec(), self.w, self.mode)
    }
}

/// `Ê_π[ln Ŵ] − ln Z_w + Ê_π[ln p_cur − ln p_other]`, or `None` when
/// `p_other` vanishes at a point with positive weight.
fn kl_point(ts: &TargetSample<'_>, lp_other: &[f64]) -> Result<Option<f64>> {
    let live = |i: &usize| ts.weights[*i] > 0.0;
    if (0..ts.f.len()).filter(live).any(|i| lp_other[i] == f64::NEG_INFINITY) {
        return Ok(None);
    }
    let ln_pref: Vec<f64> = ts.pref.iter().map(|p| if *p > 0.0 { p.ln() } else { 0.0 }).collect();
    let t1 = weighted_mean(&ts.weights, &ln_pref)? - ts.w.mass().ln();
    let h: Vec<f64> = ts.lp_cur.iter().zip(lp_other).map(|(c, o)| c - o).collect();
    let t2 = weighted_mean(&ts.weights, &h)?;
    Ok(Some(t1 + t2))
}

pub(crate) fn kl_from_sample(ts: &TargetSample<'_>, lp_other: &[f64]) -> Result<Divergence> {
    let Some(value) = kl_point(ts, lp_other)? else {
        return Ok(Divergence::Infinite);
    };
    let h: Vec<f64> = ts.lp_cur.iter().zip(lp_other).map(|(c, o)| c - o).collect();
    let stderr = match (ts.ties, ts.mode) {
        (false, _) => influence_se(ts.f, &ts.pref, ts.w, &h, weighted_mean(&ts.weights, &h)?),
        (true, TieMode::TieAveraged) => class_influence_se(ts.f, ts.w, &h, &ClassFunctional::with_entropy()),
        (true, TieMode::Strict) => grouped_se(ts.f.len(), |r| {
            Ok(kl_point(&ts.sub(r.clone())?, &lp_other[r])?.unwrap_or(f64::INFINITY))
        })?,
    };
    Ok(Divergence::Finite(Estimate { value, stderr }))
}

/// Standard error of `KL(π, p_prev) − KL(π, p_next)` on a shared batch.
pub(crate) fn delta_se(ts: &TargetSample<'_>, lp_prev: &[f64], lp_next: &[f64]) -> Result<f64> {
    let h: Vec<f64> = lp_next.iter().zip(lp_prev).map(|(n, p)| n - p).collect();
    match (ts.ties, ts.mode) {
        (false, _) => Ok(influence_se(ts.f, &ts.pref, ts.w, &h, weighted_mean(&ts.weights, &h)?)),
        (true, TieMode::TieAveraged) => Ok(class_influence_se(ts.f, ts.w, &h, &ClassFunctional::linear())),
        (true, TieMode::Strict) => grouped_se(ts.f.len(), |r| {
            let sub = ts.sub(r.clone())?;
            let a = kl_point(&sub, &lp_prev[r.clone()])?.unwrap_or(f64::INFINITY);
            let b = kl_point(&sub, &lp_next[r])?.unwrap_or(f64::INFINITY);
            Ok(a - b)
        }),
    }
}

/// `KL(π_θ^f, p_other)` where `θ` is the batch's origin.
pub fn estimate_target_kl(batch: &SampleBatch, other: &ProposalParams) -> Result<Divergence> {
    let ts = TargetSample::new(batch)?;
    let lp_other = log_densities(other, &batch.points);
    kl_from_sample(&ts, &lp_other)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("Rényi order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

pub(crate) fn renyi_binary_from_sample(ts: &TargetSample<'_>, lp_other: &[f64], alpha: f64) -> Result<Divergence> {
    check_alpha(alpha)?;
    if !ts.w.is_binary() {
        return Err(Error::Refused("binary-W Rényi estimator needs a {0,1}-valued weighting".into()));
    }
    if ts.ties {
        return Err(Error::Refused("ties in f-values: the preference may take fractional values".into()));
    }
    let h: Vec<f64> = ts.lp_cur.iter().zip(lp_other).map(|(c, o)| ((1.0 - alpha) * (o - c)).exp()).collect();
    let m = weighted_mean(&ts.weights, &h)?;
    if !(m > 0.0) {
        return Ok(Divergence::Infinite);
    }
    let value = -ts.w.mass().ln() + m.ln() / (alpha - 1.0);
    let se_m = influence_se(ts.f, &ts.pref, ts.w, &h, m);
    Ok(Divergence::Finite(Estimate { value, stderr: se_m / ((1.0 - alpha) * m) }))
}

fn renyi_general_point(ts: &TargetSample<'_>, lp_other: &[f64], alpha: f64) -> Result<Option<f64>> {
    let z = ts.w.mass();
    let h: Vec<f64> = (0..ts.f.len())
        .map(|i| {
            if ts.pref[i] > 0.0 {
                (ts.pref[i] / z).powf(alpha - 1.0) * ((1.0 - alpha) * (lp_other[i] - ts.lp_cur[i])).exp()
            } else {
                0.0
            }
        })
        .collect();
    let m = weighted_mean(&ts.weights, &h)?;
    Ok((m > 0.0).then(|| m.ln() / (alpha - 1.0)))
}

pub(crate) fn renyi_general_from_sample(ts: &TargetSample<'_>, lp_other: &[f64], alpha: f64) -> Result<Divergence> {
    check_alpha(alpha)?;
    let Some(value) = renyi_general_point(ts, lp_other, alpha)? else {
        return Ok(Divergence::Infinite);
    };
    let stderr = if ts.ties && ts.mode == TieMode::TieAveraged {
        let z = ts.w.mass();
        let r: Vec<f64> = ts.lp_cur.iter().zip(lp_other).map(|(c, o)| ((1.0 - alpha) * (o - c)).exp()).collect();
        let fun = ClassFunctional {
            psi: |w, a| w.powf(a),
            dpsi: |w, a| a * w.powf(a - 1.0),
            phi: zero,
            dphi: zero,
            param: alpha,
        };
        let se_m = z.powf(1.0 - alpha) * class_influence_se(ts.f, ts.w, &r, &fun);
        let m = ((alpha - 1.0) * value).exp();
        se_m / ((1.0 - alpha) * m)
    } else {
        grouped_se(ts.f.len(), |r| {
            Ok(renyi_general_point(&ts.sub(r.clone())?, &lp_other[r], alpha)?.unwrap_or(f64::INFINITY))
        })?
    };
    Ok(Divergence::Finite(Estimate { value, stderr }))
}

/// `D_α(π_θ^f, p_other) = −ln Z_w + ln Ê_π[(p_other/p_θ)^{1−α}]/(α − 1)` for
/// `{0,1}`-valued preferences. Refuses when ties or a non-binary weighting
/// make the preference possibly fractional.
pub fn estimate_target_renyi(batch: &SampleBatch, other: &ProposalParams, alpha: f64) -> Result<Divergence> {
    let ts = TargetSample::new(batch)?;
    let lp_other = log_densities(other, &batch.points);
    renyi_binary_from_sample(&ts, &lp_other, alpha)
}

/// `D_α(π_θ^f, p_other)` for arbitrary preferences, via
/// `ln Ê_π[(Ŵ/Z_w)^{α−1}(p_other/p_θ)^{1−α}]/(α − 1)` with batch-means errors.
pub fn estimate_target_renyi_general(batch: &SampleBatch, other: &ProposalParams, alpha: f64) -> Result<Divergence> {
    let ts = TargetSample::new(batch)?;
    let lp_other = log_densities(other, &batch.points);
    renyi_general_from_sample(&ts, &lp_other, alpha)
}

/// Result of the `J` estimator along with the samples it drew.
#[derive(Clone, Debug)]
pub struct JSample {
    pub estimate: Estimate,
    /// f-values of the batch drawn from the next proposal, sorted.
    pub next_sorted: Vec<f64>,
    /// True when some next value ties with a reference value or the
    /// reference values tie among themselves.
    pub ties: bool,
}

fn preference_against(ref_sorted: &[f64], fx: f64, w: &WeightFn) -> (f64, f64, f64) {
    let m = ref_sorted.len() as f64;
    let lt = ref_sorted.partition_point(|&v| v < fx) as f64 / m;
    let leq = ref_sorted.partition_point(|&v| v <= fx) as f64 / m;
    (lt, leq, w.preference_unchecked(lt, leq))
}

fn j_mean(ref_sorted: &[f64], next_f: &[f64], w: &WeightFn) -> f64 {
    let vals: Vec<f64> = next_f.iter().map(|&fx| preference_against(ref_sorted, fx, w).2).collect();
    pairwise_sum(&vals) / vals.len() as f64
}

/// `J` from a reference sample of `f` under the current proposal and a
/// sample of `f` under the next one.
pub fn j_from_samples(ref_f: &[f64], next_f: &[f64], w: &WeightFn) -> Result<JSample> {
    if ref_f.len() < 2 || next_f.len() < 2 {
        return Err(Error::Domain("J estimator needs at least two points per sample".into()));
    }
    let ref_sorted = sorted_copy(ref_f);
    let triples: Vec<(f64, f64, f64)> = next_f.iter().map(|&fx| preference_against(&ref_sorted, fx, w)).collect();
    let prefs: Vec<f64> = triples.iter().map(|t| t.2).collect();
    let mn = next_f.len() as f64;
    let mr = ref_f.len() as f64;
    let value = pairwise_sum(&prefs) / mn;
    let var_next = sample_variance(&prefs) / mn;
    let ties = ref_sorted.windows(2).any(|p| p[0] == p[1]) || triples.iter().any(|t| t.0 != t.1);
    let var_ref = if ties {
        let g = group_count(ref_f.len());
        let parts: Vec<f64> = (0..g)
            .map(|i| {
                let r = i * ref_f.len() / g..(i + 1) * ref_f.len() / g;
                j_mean(&sorted_copy(&ref_f[r]), next_f, w)
            })
            .collect();
        sample_variance(&parts) / g as f64
    } else {
        // Density of F̂_ref(f(X_next)) at each jump, by a window count.
        let bw = (1.0 / mr.sqrt()).max(2.0 / mr);
        let (jumps, _) = w.jumps();
        let g: Vec<(f64, f64)> = jumps
            .iter()
            .map(|&(u, size)| {
                let count = triples.iter().filter(|t| (t.0 - u).abs() <= bw).count() as f64;
                (u, size * count / (mn * 2.0 * bw))
            })
            .collect();
        let mut v = 0.0;
        for &(uj, gj) in &g {
            for &(uk, gk) in &g {
                v += gj * gk * (uj.min(uk) - uj * uk);
            }
        }
        v / mr
    };
    let mut next_sorted = next_f.to_vec();
    next_sorted.sort_by(f64::total_cmp);
    Ok(JSample { estimate: Estimate { value, stderr: (var_next + var_ref).sqrt() }, next_sorted, ties })
}

/// Draws the reference and next samples for `J(next | cur)` on the
/// `JReference`/`JNext` substreams of `(seed, iteration)`.
pub(crate) fn sample_j(
    next: &ProposalParams,
    cur: &ProposalParams,
    obj: &Objective,
    w: &WeightFn,
    n: usize,
    seed: u64,
    iteration: u64,
) -> Result<JSample> {
    if n < 2 {
        return Err(Error::Domain("J estimator needs N ≥ 2".into()));
    }
    let ref_points = sample(cur, StreamKey::new(seed, iteration, Purpose::JReference), n);
    let next_points = sample(next, StreamKey::new(seed, iteration, Purpose::JNext), n);
    j_from_samples(&obj.eval_batch(&ref_points), &obj.eval_batch(&next_points), w)
}

/// `J(next | cur) = E_{p_next}[W_cur^f]` with its standard error.
pub fn estimate_j(
    next: &ProposalParams,
    cur: &ProposalParams,
    obj: &Objective,
    w: &WeightFn,
    n: usize,
    seed: u64,
    iteration: u64,
) -> Result<Estimate> {
    Ok(sample_j(next, cur, obj, w, n, seed, iteration)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_band_contains_value() {
        let sorted: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let q = quantile_estimate(&sorted, 0.3);
        assert!(q.band_lo <= q.value && q.value <= q.band_hi);
        assert!(q.stderr > 0.0);
        assert!((q.stderr - 1000.0 * rank_sigma(0.3, 1000)).abs() < 2.0);
    }

    #[test]
    fn dominated_next_sample_gives_unit_j() {
        let w = WeightFn::indicator(0.4).unwrap();
        let cur: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let next: Vec<f64> = (0..100).map(|i| -1.0 - i as f64).collect();
        let j = j_from_samples(&cur, &next, &w).unwrap();
        assert_eq!(j.estimate.value, 1.0);
    }

    #[test]
    fn identical_samples_give_mass() {
        let w = WeightFn::indicator(0.5).unwrap();
        let cur: Vec<f64> = (0..100).map(|i| i as f64 * 0.5).collect();
        let j = j_from_samples(&cur, &cur, &w).unwrap();
        assert!(j.ties);
        assert_eq!(j.estimate.value, 0.5);
    }

    #[test]
    fn renyi_order_validated() {
        let f: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let w = WeightFn::indicator(0.5).unwrap();
        let ts = TargetSample::from_parts(&f, vec![0.0; 10], &w, TieMode::Strict).unwrap();
        assert!(renyi_binary_from_sample(&ts, &[0.0; 10], 1.5).is_err());
        let v = renyi_binary_from_sample(&ts, &[0.0; 10], 0.5).unwrap().finite().unwrap();
        assert_eq!(v.value, -(0.5f64).ln());
        assert_eq!(v.stderr, 0.0);
    }
}

//! Non-increasing weighting functions on `[0, 1]` and the tie-aware
//! preference value built from them.
//!
//! Only piecewise-constant weightings are representable, so the mass
//! `Z_w = ∫₀¹ w(u) du` and every partial integral are closed-form sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialized shape of a weighting function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w(u) = 1` for `u ≤ q`, `0` otherwise.
    Indicator { q: f64 },
    /// Step function: `values[i]` on `[breaks[i-1], breaks[i])`, with implicit
    /// outer edges 0 and 1; the last step is closed at 1.
    Table { breaks: Vec<f64>, values: Vec<f64> },
}

/// A validated weighting function with its cached mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightSpec", into = "WeightSpec")]
pub struct WeightFn {
    spec: WeightSpec,
    mass: f64,
}

/// The `(P[f(X) < f(x)], P[f(X) ≤ f(x)])` pair at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantilePair {
    pub q_lt: f64,
    pub q_leq: f64,
}

impl QuantilePair {
    pub fn new(q_lt: f64, q_leq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q_lt) || !(0.0..=1.0).contains(&q_leq) || q_lt > q_leq {
            return Err(Error::Domain(format!(
                "invalid quantile pair ({q_lt}, {q_leq}): need 0 ≤ q_lt ≤ q_leq ≤ 1"
            )));
        }
        Ok(Self { q_lt, q_leq })
    }
}

impl TryFrom<WeightSpec> for WeightFn {
    type Error = Error;

    fn try_from(spec: WeightSpec) -> Result<Self> {
        match spec {
            WeightSpec::Indicator { q } => WeightFn::indicator(q),
            WeightSpec::Table { breaks, values } => WeightFn::table(breaks, values),
        }
    }
}

impl From<WeightFn> for WeightSpec {
    fn from(w: WeightFn) -> Self {
        w.spec
    }
}

impl WeightFn {
    pub fn indicator(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Config(format!("indicator level q = {q} must lie in (0, 1)")));
        }
        Ok(Self { spec: WeightSpec::Indicator { q }, mass: q })
    }

    pub fn table(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::Config(format!(
                "table needs {} values for {} breaks, got {}",
                breaks.len() + 1,
                breaks.len(),
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &b in &breaks {
            if !(b > prev && b < 1.0) {
                return Err(Error::Config("table breaks must be strictly increasing in (0, 1)".into()));
            }
            prev = b;
        }
        for pair in values.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::Config("table values must be non-increasing".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config("table values must be finite and non-negative".into()));
        }
        let mass = (0..values.len())
            .map(|i| {
                let (lo, hi) = edges(&breaks, i);
                values[i] * (hi - lo)
            })
            .sum::<f64>();
        if mass <= 0.0 {
            return Err(Error::Config("weighting has zero mass; targets are undefined".into()));
        }
        Ok(Self { spec: WeightSpec::Table { breaks, values }, mass })
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    /// Indicator level `q`, if this is an indicator weighting.
    pub fn indicator_level(&self) -> Option<f64> {
        match self.spec {
            WeightSpec::Indicator { q } => Some(q),
            WeightSpec::Table { .. } => None,
        }
    }

    /// `Z_w`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Largest value of `w`, attained at `u = 0`.
    pub fn max_value(&self) -> f64 {
        match &self.spec {
            WeightSpec::Indicator { .. } => 1.0,
            WeightSpec::Table { values, .. } => values[0],
        }
    }

    /// True when `w` maps into `{0, 1}`.
    pub fn is_binary(&self) -> bool {
        match &self.spec {
            WeightSpec::Indicator { .. } => true,
            WeightSpec::Table { values, .. } => values.iter().all(|&v| v == 0.0 || v == 1.0),
        }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("weighting evaluated at u = {u} outside [0, 1]")));
        }
        Ok(self.eval_unchecked(u))
    }

    pub(crate) fn eval_unchecked(&self, u: f64) -> f64 {
        match &self.spec {
            WeightSpec::Indicator { q } => {
                if u <= *q {
                    1.0
                } else {
                    0.0
                }
            }
            WeightSpec::Table { breaks, values } => {
                let idx = breaks.partition_point(|&b| b <= u);
                values[idx]
            }
        }
    }

    /// Downward jumps `(u_j, size_j)` of `w` and its value on the last step.
    /// `w(u) = tail + Σ_j size_j · 1{u below u_j}`.
    pub fn jumps(&self) -> (Vec<(f64, f64)>, f64) {
        match &self.spec {
            WeightSpec::Indicator { q } => (vec![(*q, 1.0)], 0.0),
            WeightSpec::Table { breaks, values } => {
                let jumps = breaks
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &b)| {
                        let drop = values[i] - values[i + 1];
                        (drop > 0.0).then_some((b, drop))
                    })
                    .collect();
                (jumps, *values.last().expect("non-empty table"))
            }
        }
    }

    /// Average of `w` over `[a, b]`, or `w(b)` when `a == b`.
    ///
    /// The result is clamped to the range of the steps it averages so that
    /// rounding never pushes it outside `[min w, max w]` on that interval.
    pub fn preference(&self, qp: QuantilePair) -> Result<f64> {
        let QuantilePair { q_lt: a, q_leq: b } = QuantilePair::new(qp.q_lt, qp.q_leq)?;
        Ok(self.preference_unchecked(a, b))
    }

    pub(crate) fn preference_unchecked(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return self.eval_unchecked(b);
        }
        let width = b - a;
        match &self.spec {
            WeightSpec::Indicator { q } => {
                if b <= *q {
                    1.0
                } else if a >= *q {
                    0.0
                } else {
                    ((q - a) / width).clamp(0.0, 1.0)
                }
            }
            WeightSpec::Table { breaks, values } => {
                let first = breaks.partition_point(|&x| x <= a);
                let last = breaks.partition_point(|&x| x < b);
                if first == last {
                    return values[first];
                }
                let mut acc = 0.0;
                for i in first..=last {
                    let (lo, hi) = edges(breaks, i);
                    let overlap = hi.min(b) - lo.max(a);
                    if overlap > 0.0 {
                        acc += values[i] * overlap;
                    }
                }
                (acc / width).clamp(values[last], values[first])
            }
        }
    }
}

fn edges(breaks: &[f64], i: usize) -> (f64, f64) {
    let lo = if i == 0 { 0.0 } else { breaks[i - 1] };
    let hi = if i == breaks.len() { 1.0 } else { breaks[i] };
    (lo, hi)
}

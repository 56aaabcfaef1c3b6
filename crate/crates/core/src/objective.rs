//! Objective functions and the standard benchmark suite.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Search space of an objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Continuous(usize),
    Bits(usize),
}

impl DomainKind {
    pub fn dim(self) -> usize {
        match self {
            DomainKind::Continuous(d) | DomainKind::Bits(d) => d,
        }
    }
}

type EvalFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;

/// A deterministic function to minimize.
#[derive(Clone)]
pub struct Objective {
    name: String,
    domain: DomainKind,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl Objective {
    pub fn new<F>(name: impl Into<String>, domain: DomainKind, eval: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), domain, eval: Arc::new(eval) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        (self.eval)(x)
    }

    /// Evaluates a batch in parallel, preserving order.
    pub fn eval_batch(&self, points: &[DVector<f64>]) -> Vec<f64> {
        points.par_iter().map(|x| self.eval(x)).collect()
    }

    /// `exp ∘ f`, a strictly increasing transform of this objective.
    pub fn exp_transformed(&self) -> Objective {
        let inner = Arc::clone(&self.eval);
        Objective { name: format!("exp({})", self.name), domain: self.domain, eval: Arc::new(move |x| inner(x).exp()) }
    }
}

fn bits_index(x: &DVector<f64>) -> usize {
    x.iter().enumerate().fold(0usize, |acc, (i, &v)| if v > 0.5 { acc | (1 << i) } else { acc })
}

pub fn sphere(d: usize) -> Objective {
    Objective::new("sphere", DomainKind::Continuous(d), |x| x.norm_squared())
}

pub fn rosenbrock(d: usize) -> Objective {
    Objective::new("rosenbrock", DomainKind::Continuous(d), |x| {
        x.as_slice()
            .windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    })
}

pub fn rastrigin(d: usize) -> Objective {
    Objective::new("rastrigin", DomainKind::Continuous(d), move |x| {
        10.0 * d as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
    })
}

/// `min(‖x − a‖², ‖x + a‖²) + offset`.
pub fn two_well(center: DVector<f64>, offset: f64) -> Objective {
    let d = center.len();
    Objective::new("two_well", DomainKind::Continuous(d), move |x| {
        (x - &center).norm_squared().min((x + &center).norm_squared()) + offset
    })
}

/// `−Σ xᵢ` over bit vectors.
pub fn onemax(d: usize) -> Objective {
    Objective::new("onemax", DomainKind::Bits(d), |x| -x.iter().map(|&v| if v > 0.5 { 1.0 } else { 0.0 }).sum::<f64>())
}

/// `Σ cᵢ xᵢ` over bit vectors.
pub fn linear(coefficients: Vec<f64>) -> Objective {
    let d = coefficients.len();
    Objective::new("linear", DomainKind::Bits(d), move |x| {
        coefficients.iter().zip(x.iter()).map(|(c, &v)| if v > 0.5 { *c } else { 0.0 }).sum()
    })
}

/// Arbitrary function of a bit vector given as a table of `2^d` values,
/// indexed by the bit pattern with coordinate `i` as bit `i`.
pub fn user_table(d: usize, table: Vec<f64>) -> Result<Objective> {
    if d == 0 || d > 20 || table.len() != 1 << d {
        return Err(Error::Config(format!("user table needs 2^d entries with 1 ≤ d ≤ 20, got {} for d={d}", table.len())));
    }
    if table.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("user table values must be finite".into()));
    }
    Ok(Objective::new("user_table", DomainKind::Bits(d), move |x| table[bits_index(x)]))
}

/// Builds a parameter-free benchmark by name. `linear` uses coefficients
/// `1, 2, …, d`; two-well uses `a = (2, 0, …, 0)` and offset 0.
pub fn make_objective(name: &str, d: usize) -> Result<Objective> {
    if d == 0 {
        return Err(Error::Config("objective dimension must be at least 1".into()));
    }
    match name {
        "sphere" => Ok(sphere(d)),
        "rosenbrock" => Ok(rosenbrock(d)),
        "rastrigin" => Ok(rastrigin(d)),
        "onemax" => Ok(onemax(d)),
        "linear" => Ok(linear((1..=d).map(|i| i as f64).collect())),
        "two_well" => {
            let mut a = DVector::zeros(d);
            a[0] = 2.0;
            Ok(two_well(a, 0.0))
        }
        other => Err(Error::Config(format!("unknown objective '{other}'"))),
    }
}

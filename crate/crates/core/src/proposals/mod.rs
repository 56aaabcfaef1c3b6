//! Proposal families: parameter records, samplers, log-densities and
//! moment coordinates.
//!
//! Points of every family are `DVector<f64>`; bit vectors use `0.0`/`1.0`.

mod bernoulli;
mod gaussian;
pub(crate) mod linalg;
mod mixture;
mod moments;
mod student;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{StreamKey, CHUNK_LEN};

pub use bernoulli::{default_p_min, BernoulliParams};
pub use gaussian::{gaussian_kl, GaussianParams};
pub use mixture::MixtureParams;
pub use moments::{moment_embed, moment_unembed, MomentParams};
pub use student::StudentParams;

/// The parameter `θ` of a proposal distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub enum ProposalParams {
    Gaussian(GaussianParams),
    Student(StudentParams),
    Mixture(MixtureParams),
    Bernoulli(BernoulliParams),
}

impl ProposalParams {
    pub fn family(&self) -> &'static str {
        match self {
            ProposalParams::Gaussian(_) => "gaussian",
            ProposalParams::Student(_) => "student",
            ProposalParams::Mixture(_) => "mixture",
            ProposalParams::Bernoulli(_) => "bernoulli",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProposalParams::Gaussian(g) => g.dim(),
            ProposalParams::Student(s) => s.dim(),
            ProposalParams::Mixture(m) => m.dim(),
            ProposalParams::Bernoulli(b) => b.dim(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ProposalParams::Bernoulli(_))
    }

    pub fn log_density(&self, x: &DVector<f64>) -> f64 {
        match self {
            ProposalParams::Gaussian(g) => g.log_density(x),
            ProposalParams::Student(s) => s.log_density(x),
            ProposalParams::Mixture(m) => m.log_density(x),
            ProposalParams::Bernoulli(b) => b.log_density(x),
        }
    }

    fn draw_chunk(&self, key: &StreamKey, chunk: usize, len: usize) -> Vec<DVector<f64>> {
        let mut rng = key.chunk(chunk as u64);
        (0..len)
            .map(|_| match self {
                ProposalParams::Gaussian(g) => g.draw(&mut rng),
                ProposalParams::Student(s) => s.draw(&mut rng),
                ProposalParams::Mixture(m) => m.draw_labeled(&mut rng).1,
                ProposalParams::Bernoulli(b) => b.draw(&mut rng),
            })
            .collect()
    }

    /// SHA-256 hex digest of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("parameters serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Draws `n` i.i.d. points. Chunk `i` of `CHUNK_LEN` draws uses substream
/// `key.chunk(i)`, so the result does not depend on the thread count.
pub fn sample(params: &ProposalParams, key: StreamKey, n: usize) -> Vec<DVector<f64>> {
    let chunks = n.div_ceil(CHUNK_LEN);
    let parts: Vec<Vec<DVector<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
            params.draw_chunk(&key, c, len)
        })
        .collect();
    parts.into_iter().flatten().collect()
}

pub fn log_density(params: &ProposalParams, x: &DVector<f64>) -> f64 {
    params.log_density(x)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ComponentRepr {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ParamsRepr {
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    Student { location: Vec<f64>, scale: Vec<Vec<f64>>, dof: f64 },
    Mixture { weights: Vec<f64>, components: Vec<ComponentRepr> },
    Bernoulli { probs: Vec<f64> },
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], d: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Domain(format!("{what} must be a {d}×{d} matrix")));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn gaussian_from_repr(mean: Vec<f64>, cov: &[Vec<f64>]) -> Result<GaussianParams> {
    let d = mean.len();
    GaussianParams::new(DVector::from_vec(mean), from_rows(cov, d, "cov")?)
}

impl TryFrom<ParamsRepr> for ProposalParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        Ok(match r {
            ParamsRepr::Gaussian { mean, cov } => ProposalParams::Gaussian(gaussian_from_repr(mean, &cov)?),
            ParamsRepr::Student { location, scale, dof } => {
                let d = location.len();
                let scale = from_rows(&scale, d, "scale")?;
                ProposalParams::Student(StudentParams::new(DVector::from_vec(location), scale, dof)?)
            }
            ParamsRepr::Mixture { weights, components } => {
                let comps = components
                    .into_iter()
                    .map(|c| gaussian_from_repr(c.mean, &c.cov))
                    .collect::<Result<Vec<_>>>()?;
                ProposalParams::Mixture(MixtureParams::new(weights, comps)?)
            }
            ParamsRepr::Bernoulli { probs } => ProposalParams::Bernoulli(BernoulliParams::new(DVector::from_vec(probs))?),
        })
    }
}

impl From<ProposalParams> for ParamsRepr {
    fn from(p: ProposalParams) -> Self {
        match p {
            ProposalParams::Gaussian(g) => ParamsRepr::Gaussian { mean: g.mean().iter().copied().collect(), cov: rows(g.cov()) },
            ProposalParams::Student(s) => ParamsRepr::Student {
                location: s.location().iter().copied().collect(),
                scale: rows(s.scale()),
                dof: s.dof(),
            },
            ProposalParams::Mixture(m) => ParamsRepr::Mixture {
                weights: m.weights().to_vec(),
                components: m
                    .components()
                    .iter()
                    .map(|c| ComponentRepr { mean: c.mean().iter().copied().collect(), cov: rows(c.cov()) })
                    .collect(),
            },
            ProposalParams::Bernoulli(b) => ParamsRepr::Bernoulli { probs: b.probs().iter().copied().collect() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    #[test]
    fn serde_round_trip_is_exact() {
        let g = GaussianParams::new(
            DVector::from_vec(vec![0.1, -2.0 / 3.0]),
            DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, 0.1, 0.1, 2.5]),
        )
        .unwrap();
        let params = vec![
            ProposalParams::Gaussian(g.clone()),
            ProposalParams::Student(StudentParams::new(DVector::from_vec(vec![1.0, 2.0]), g.cov().clone(), 3.0).unwrap()),
            ProposalParams::Mixture(MixtureParams::new(vec![0.25, 0.75], vec![g.clone(), g]).unwrap()),
            ProposalParams::Bernoulli(BernoulliParams::new(DVector::from_vec(vec![0.1, 0.7, 0.3])).unwrap()),
        ];
        for p in params {
            let json = serde_json::to_string(&p).unwrap();
            let back: ProposalParams = serde_json::from_str(&json).unwrap();
            assert_eq!(back, p);
            assert_eq!(serde_json::to_string(&back).unwrap(), json);
        }
    }

    #[test]
    fn schema_field_names() {
        let p: ProposalParams = serde_json::from_str(r#"{"family":"gaussian","mean":[0.0],"cov":[[2.0]]}"#).unwrap();
        assert_eq!(p.dim(), 1);
        let s: ProposalParams =
            serde_json::from_str(r#"{"family":"student","location":[0.0],"scale":[[1.0]],"dof":1.0}"#).unwrap();
        assert!((s.log_density(&DVector::zeros(1)) + std::f64::consts::PI.ln()).abs() < 1e-12);
        assert!(serde_json::from_str::<ProposalParams>(r#"{"family":"gaussian","mean":[0.0],"cov":[[1.0,0.0]]}"#).is_err());
    }

    #[test]
    fn sampling_is_chunked_and_reproducible() {
        let p = ProposalParams::Gaussian(GaussianParams::isotropic(DVector::zeros(2), 1.0).unwrap());
        let key = StreamKey::new(1, 0, Purpose::Step);
        let a = sample(&p, key, CHUNK_LEN + 10);
        let b = sample(&p, key, CHUNK_LEN + 10);
        assert_eq!(a, b);
        let short = sample(&p, key, 10);
        assert_eq!(&a[..10], &short[..]);
    }
}

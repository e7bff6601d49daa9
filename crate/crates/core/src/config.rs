//! JSON run configurations.
//!
//! ```json
//! {
//!   "box": [4.0, 4.0, 4.0],
//!   "poles": [{ "p": [1.0, 0.9, 1.2], "k": 2 }],
//!   "m": [2, 2, 2, 2, 2, 2, 1, 1],
//!   "c0": 0.0,
//!   "ewald": { "alpha": 0.886 },
//!   "quadrature": { "scheme": "tensor-gauss", "order": 4, "resolution": 24 },
//!   "eps": [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4],
//!   "seed": 42,
//!   "output": "sweep.csv"
//! }
//! ```
//!
//! Only `box`, `m` are required. Fixed points `q₁..q₈` are the points with
//! coordinates `0` or `Lᵢ/2` in lexicographic order; `m[j]` belongs to `q_{j+1}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::collapse_sweep::{bulk_ewald_params, exclusion_radius, QuadratureSpec, Scheme, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::torus_green::{EwaldParams, PoleConfig, PolePair, TorusSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "box")]
    box_: [f64; 3],
    #[serde(default)]
    poles: Vec<PolePair>,
    m: Vec<u32>,
    #[serde(default)]
    c0: f64,
    ewald: Option<RawEwald>,
    quadrature: Option<RawQuadrature>,
    eps: Option<Vec<f64>>,
    #[serde(default)]
    seed: u64,
    output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEwald {
    alpha: f64,
    r_cut: Option<f64>,
    g_cut: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    scheme: String,
    order: Option<usize>,
    resolution: Option<usize>,
}

/// A validated run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub spec: TorusSpec,
    pub poles: PoleConfig,
    pub ewald: EwaldParams,
    pub quadrature: QuadratureSpec,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Config(format!("parse: {e}")))?;
        if let Some(b) = value.get("box") {
            if b.as_array().is_some_and(|rows| rows.iter().any(Value::is_array)) {
                return Err(Error::Config("box: only rectangular tori are supported, give three lengths".into()));
            }
        }
        let raw: RawConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let spec = TorusSpec::new(raw.box_).map_err(|e| prefix("box", e))?;
        let m: [u32; 8] = raw
            .m
            .as_slice()
            .try_into()
            .map_err(|_| Error::Config(format!("m: expected 8 values, got {}", raw.m.len())))?;
        let poles = PoleConfig::new(spec, raw.poles, m, raw.c0)?;

        let ewald = match raw.ewald {
            None => bulk_ewald_params(&spec),
            Some(RawEwald { alpha, r_cut: None, g_cut: None }) => {
                EwaldParams::with_alpha(&spec, alpha).map_err(|e| prefix("ewald", e))?
            }
            Some(RawEwald { alpha, r_cut, g_cut }) => {
                let auto = EwaldParams::with_alpha(&spec, alpha).map_err(|e| prefix("ewald", e))?;
                EwaldParams::new(&spec, alpha, r_cut.unwrap_or(auto.r_cut), g_cut.unwrap_or(auto.g_cut))
                    .map_err(|e| prefix("ewald", e))?
            }
        };

        let quadrature = match raw.quadrature {
            None => QuadratureSpec::default(),
            Some(q) => {
                let resolution = q.resolution.unwrap_or(QuadratureSpec::default().resolution);
                let scheme = match (q.scheme.as_str(), q.order) {
                    ("tensor-midpoint", None | Some(1)) => Scheme::TensorMidpoint,
                    ("tensor-gauss", order) => Scheme::TensorGauss { order: order.unwrap_or(4) },
                    ("quasi-random", None) => Scheme::QuasiRandom,
                    (other, Some(_)) if other != "tensor-gauss" => {
                        return Err(Error::Config(format!("quadrature.order: not used by scheme {other:?}")))
                    }
                    (other, _) => {
                        return Err(Error::Config(format!(
                            "quadrature.scheme: unknown scheme {other:?} (tensor-midpoint, tensor-gauss, quasi-random)"
                        )))
                    }
                };
                QuadratureSpec::new(scheme, resolution).map_err(|e| prefix("quadrature", e))?
            }
        };

        let eps = raw.eps.unwrap_or_else(|| DEFAULT_EPS.to_vec());
        if eps.is_empty() {
            return Err(Error::Config("eps: list is empty".into()));
        }
        if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("eps: {e} is not a positive number")));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps: list must be strictly descending".into()));
        }
        let d0 = poles.delta0();
        let r = exclusion_radius(eps[0]);
        if r >= d0 {
            return Err(Error::Config(format!(
                "δ₀: exclusion radius r(ε={}) = {r:.6} ≥ δ₀ = {d0:.6}; exclusion balls would overlap",
                eps[0]
            )));
        }
        Ok(Self { spec, poles, ewald, quadrature, eps, seed: raw.seed, output: raw.output })
    }
}

fn prefix(field: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) | Error::Ewald(msg) => Error::Config(format!("{field}: {msg}")),
        other => Error::Config(format!("{field}: {other}")),
    }
}

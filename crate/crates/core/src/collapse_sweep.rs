//! Energy, invariant matrix and volume of the collapsing Gibbons–Hawking
//! family over the torus minus exclusion balls of radius `r(ε) = 2ε^{2/5}`.
//!
//! The region is split into disjoint cubes of half-size `a` around the poles
//! and their complement. The complement is an exact union of axis-aligned
//! cells and gets a composite tensor rule. Each cube minus its ball is cut into
//! six pyramids with apex at the pole, parametrized by `x = p + λ w(u, v)`
//! with `w` on a cube face and `λ ∈ [r/|w|, 1]`; the Jacobian `λ²a` cancels
//! the `1/ρ` pole of `h`, so every piece sees a smooth integrand.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::LinearMap34;
use crate::error::{Error, Result};
use crate::gibbons_hawking::{densities_in_frame, gh_frame};
use crate::quadrature::{composite, halton, pairwise_sum};
use crate::torus_green::{EwaldParams, HarmonicField, PoleConfig, Point3, TorusSpec};

pub const DEFAULT_EPS: [f64; 7] = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4];
pub const MIN_RESOLUTION: usize = 16;
/// Cube half-size as a fraction of the smallest max-norm pole separation.
const CUBE_FRACTION: f64 = 0.45;

/// `r(ε) = 2ε^{2/5}`.
pub fn exclusion_radius(eps: f64) -> f64 {
    2.0 * eps.powf(0.4)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    TensorMidpoint,
    TensorGauss { order: usize },
    /// Halton points in the box, rejecting those inside the balls.
    QuasiRandom,
}

/// Quadrature scheme and resolution.
///
/// For tensor schemes `resolution` is the number of nodes per box length along
/// each axis; for the quasi-random scheme it is the cube root of the sample count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub resolution: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { scheme: Scheme::TensorGauss { order: 4 }, resolution: 24 }
    }
}

impl QuadratureSpec {
    pub fn new(scheme: Scheme, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!("quadrature resolution {resolution} < {MIN_RESOLUTION}")));
        }
        if let Scheme::TensorGauss { order } = scheme {
            if !(1..=16).contains(&order) {
                return Err(Error::Config(format!("Gauss order {order} outside 1..=16")));
            }
        }
        Ok(Self { scheme, resolution })
    }

    fn order(&self) -> usize {
        match self.scheme {
            Scheme::TensorMidpoint | Scheme::QuasiRandom => 1,
            Scheme::TensorGauss { order } => order,
        }
    }
}

/// Quadrature nodes with weights.
#[derive(Clone, Debug, Default)]
pub struct Nodes {
    pub points: Vec<Point3>,
    pub weights: Vec<f64>,
}

impl Nodes {
    fn push(&mut self, x: Point3, w: f64) {
        self.points.push(x);
        self.weights.push(w);
    }

    fn extend(&mut self, other: Nodes) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn max_norm(d: &Point3) -> f64 {
    d[0].abs().max(d[1].abs()).max(d[2].abs())
}

/// Half-size of the disjoint cubes around the poles.
pub fn cube_half_size(cfg: &PoleConfig) -> f64 {
    let spec = cfg.spec();
    let poles = cfg.poles();
    let mut sep = 0.5 * spec.min_length();
    for i in 0..poles.len() {
        for j in 0..i {
            sep = sep.min(max_norm(&spec.displacement(&poles[i].pos, &poles[j].pos)));
        }
    }
    CUBE_FRACTION * sep
}

/// Composite tensor nodes on the box minus the pole cubes.
fn outer_nodes(spec: &TorusSpec, poles: &[Point3], a: f64, order: usize, cells: usize) -> Nodes {
    let l = spec.lengths();
    let axes: Vec<Vec<(f64, f64, Vec<(f64, f64)>)>> = (0..3)
        .map(|axis| {
            let mut bps = vec![0.0, l[axis]];
            for p in poles {
                for s in [-a, a] {
                    let v = p[axis] + s;
                    bps.push(v - l[axis] * (v / l[axis]).floor());
                }
            }
            bps.sort_by(f64::total_cmp);
            bps.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
            bps.windows(2)
                .filter(|w| w[1] - w[0] > 1e-12)
                .map(|w| {
                    let n = ((cells as f64) * (w[1] - w[0]) / l[axis]).ceil().max(1.0) as usize;
                    (w[0], w[1], composite(w[0], w[1], n, order))
                })
                .collect()
        })
        .collect();
    let mut nodes = Nodes::default();
    for ix in &axes[0] {
        for iy in &axes[1] {
            for iz in &axes[2] {
                let c = [0.5 * (ix.0 + ix.1), 0.5 * (iy.0 + iy.1), 0.5 * (iz.0 + iz.1)];
                if poles.iter().any(|p| max_norm(&spec.displacement(&c, p)) < a) {
                    continue;
                }
                for &(x, wx) in &ix.2 {
                    for &(y, wy) in &iy.2 {
                        for &(z, wz) in &iz.2 {
                            nodes.push([x, y, z], wx * wy * wz);
                        }
                    }
                }
            }
        }
    }
    nodes
}

/// Pyramid nodes on each pole cube minus its ball of radius `r`.
fn inner_nodes(spec: &TorusSpec, poles: &[Point3], a: f64, r: f64, order: usize, cells: usize) -> Nodes {
    let lmin = spec.min_length();
    let face_cells = ((cells as f64) * 2.0 * a / lmin).ceil().max(1.0) as usize;
    let radial_cells = ((cells as f64) * a / lmin).ceil().max(1.0) as usize;
    let uv = composite(-a, a, face_cells, order);
    let tt = composite(0.0, 1.0, radial_cells, order);
    let mut nodes = Nodes::default();
    for p in poles {
        for axis in 0..3 {
            for sign in [-1.0, 1.0] {
                let (ia, ib) = ((axis + 1) % 3, (axis + 2) % 3);
                for &(u, wu) in &uv {
                    for &(v, wv) in &uv {
                        let mut w = [0.0; 3];
                        w[axis] = sign * a;
                        w[ia] = u;
                        w[ib] = v;
                        let lam0 = r / (u * u + v * v + a * a).sqrt();
                        for &(t, wt) in &tt {
                            let lam = lam0 + (1.0 - lam0) * t;
                            let x = spec.wrap(&[p[0] + lam * w[0], p[1] + lam * w[1], p[2] + lam * w[2]]);
                            nodes.push(x, wu * wv * wt * (1.0 - lam0) * lam * lam * a);
                        }
                    }
                }
            }
        }
    }
    nodes
}

fn halton_nodes(spec: &TorusSpec, count: usize) -> Nodes {
    let l = spec.lengths();
    let w = spec.volume() / count as f64;
    let mut nodes = Nodes::default();
    for i in 1..=count as u64 {
        nodes.push([halton(i, 2) * l[0], halton(i, 3) * l[1], halton(i, 5) * l[2]], w);
    }
    nodes
}

fn check_radius(cfg: &PoleConfig, r: f64) -> Result<()> {
    let d0 = cfg.delta0();
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Region(format!("exclusion radius {r} is not admissible")));
    }
    if r >= d0 {
        return Err(Error::Region(format!("overlapping exclusion balls: r = {r} ≥ δ₀ = {d0}")));
    }
    Ok(())
}

/// Nodes for the torus minus the balls of radius `r` at a given resolution.
pub fn region_nodes(cfg: &PoleConfig, qspec: &QuadratureSpec, r: f64, resolution: usize) -> Result<Nodes> {
    check_radius(cfg, r)?;
    let spec = cfg.spec();
    let poles: Vec<Point3> = cfg.poles().iter().map(|p| p.pos).collect();
    match qspec.scheme {
        Scheme::QuasiRandom => {
            let all = halton_nodes(spec, resolution.pow(3));
            let mut kept = Nodes::default();
            for (x, w) in all.points.iter().zip(all.weights.iter()) {
                if poles.iter().all(|p| spec.distance(x, p) >= r) {
                    kept.push(*x, *w);
                }
            }
            Ok(kept)
        }
        _ => {
            let order = qspec.order();
            let cells = resolution.div_ceil(order);
            let a = cube_half_size(cfg);
            let mut nodes = outer_nodes(spec, &poles, a, order, cells);
            nodes.extend(inner_nodes(spec, &poles, a, r, order, cells));
            Ok(nodes)
        }
    }
}

fn weighted_sum(values: &[f64], weights: &[f64]) -> f64 {
    let terms: Vec<f64> = values.iter().zip(weights).map(|(v, w)| v * w).collect();
    pairwise_sum(&terms)
}

/// Integral of `f` over the torus minus the `r`-balls at all poles, with a
/// resolution-halving error estimate.
pub fn quad_region<F>(f: F, cfg: &PoleConfig, qspec: &QuadratureSpec, r: f64) -> Result<(f64, f64)>
where
    F: Fn(&Point3) -> Result<f64> + Sync,
{
    let mut vals = [0.0; 2];
    for (slot, res) in [qspec.resolution, qspec.resolution / 2].into_iter().enumerate() {
        let nodes = region_nodes(cfg, qspec, r, res)?;
        let values: Vec<f64> = nodes.points.par_iter().map(&f).collect::<Result<_>>()?;
        vals[slot] = weighted_sum(&values, &nodes.weights);
    }
    Ok((vals[0], (vals[0] - vals[1]).abs()))
}

/// `vol(𝕋) − N (4π/3) r³` for the `N = 2n + 8` balls.
pub fn region_volume_closed(cfg: &PoleConfig, r: f64) -> f64 {
    let count = (2 * cfg.n() + 8) as f64;
    cfg.spec().volume() - count * 4.0 * PI / 3.0 * r.powi(3)
}

/// `3πε [vol(𝕋) − (2n+8)(4π/3) r(ε)³]`.
pub fn energy_closed(cfg: &PoleConfig, eps: f64) -> f64 {
    3.0 * PI * eps * region_volume_closed(cfg, exclusion_radius(eps))
}

/// `64π²(n + 4)`, the coefficient of `ε^{6/5}` in `3π vol(𝕋) − E/ε`.
pub fn deficit_coefficient(cfg: &PoleConfig) -> f64 {
    64.0 * PI * PI * (cfg.n() as f64 + 4.0)
}

/// `πε (vol(𝕋) + ε c0 vol(𝕋))`.
pub fn volume_leading(cfg: &PoleConfig, eps: f64) -> f64 {
    let v = cfg.spec().volume();
    PI * eps * (v + eps * cfg.c0() * v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Sin,
    Cos,
}

/// One trigonometric mode `amplitude · sin(2π Σ nᵢ xᵢ / Lᵢ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub amplitude: [f64; 3],
    pub freq: [i32; 3],
    #[serde(default = "default_kind")]
    pub kind: ModeKind,
}

fn default_kind() -> ModeKind {
    ModeKind::Sin
}

/// The map `ψ(x) = x + δ v(x)` for an odd trigonometric field `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationField {
    delta: f64,
    modes: Vec<Mode>,
    lengths: [f64; 3],
}

impl PerturbationField {
    pub fn new(delta: f64, modes: Vec<Mode>, spec: &TorusSpec) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Perturbation("delta must be finite".into()));
        }
        let lengths = spec.lengths();
        let mut bound = 0.0;
        for m in &modes {
            if m.kind == ModeKind::Cos && m.amplitude != [0.0; 3] {
                return Err(Error::Perturbation(format!(
                    "not equivariant: cos mode {:?} is even under x ↦ -x",
                    m.freq
                )));
            }
            let k = Self::wavevector(&lengths, &m.freq);
            let knorm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            let anorm = (m.amplitude.iter().map(|x| x * x).sum::<f64>()).sqrt();
            bound += anorm * knorm;
        }
        if delta.abs() * bound >= 1.0 {
            return Err(Error::Perturbation(format!(
                "Jacobian may be singular: |δ|·Σ|a||k| = {} ≥ 1",
                delta.abs() * bound
            )));
        }
        Ok(Self { delta, modes, lengths })
    }

    /// `v = (sin(2π x₁/L₁), 0, 0)`.
    pub fn sine_x(delta: f64, spec: &TorusSpec) -> Result<Self> {
        Self::new(delta, vec![Mode { amplitude: [1.0, 0.0, 0.0], freq: [1, 0, 0], kind: ModeKind::Sin }], spec)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        let spec = TorusSpec::new(self.lengths)?;
        Self::new(delta, self.modes.clone(), &spec)
    }

    fn wavevector(l: &[f64; 3], n: &[i32; 3]) -> Point3 {
        std::array::from_fn(|i| 2.0 * PI * n[i] as f64 / l[i])
    }

    /// `v(x)`.
    pub fn field(&self, x: &Point3) -> Point3 {
        let mut v = [0.0; 3];
        for m in &self.modes {
            let k = Self::wavevector(&self.lengths, &m.freq);
            let s = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).sin();
            for i in 0..3 {
                v[i] += m.amplitude[i] * s;
            }
        }
        v
    }

    /// `ψ(x) = x + δ v(x)`.
    pub fn apply(&self, x: &Point3) -> Point3 {
        let v = self.field(x);
        std::array::from_fn(|i| x[i] + self.delta * v[i])
    }

    /// `Dψ(x) = I + δ Dv(x)`.
    pub fn jacobian(&self, x: &Point3) -> [[f64; 3]; 3] {
        let mut j = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for m in &self.modes {
            let k = Self::wavevector(&self.lengths, &m.freq);
            let c = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos();
            for a in 0..3 {
                for b in 0..3 {
                    j[a][b] += self.delta * m.amplitude[a] * k[b] * c;
                }
            }
        }
        j
    }
}

/// Integrals over the region at one `ε`, with resolution-halving error estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionIntegrals {
    pub eps: f64,
    pub r: f64,
    pub energy: f64,
    pub invariant: [[f64; 3]; 3],
    pub volume: f64,
    pub err_energy: f64,
    pub err_invariant: f64,
    pub err_volume: f64,
    /// Smallest volume density met at a node.
    pub min_v_density: f64,
    pub nodes: usize,
}

impl RegionIntegrals {
    pub fn trace_invariant(&self) -> f64 {
        self.invariant[0][0] + self.invariant[1][1] + self.invariant[2][2]
    }

    pub fn offdiag_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    m = m.max(self.invariant[i][j].abs());
                }
            }
        }
        m
    }

    pub fn err_est(&self) -> f64 {
        self.err_energy.max(self.err_invariant).max(self.err_volume)
    }
}

struct Level {
    resolution: usize,
    base: Nodes,
    base_h: Vec<f64>,
    base_dist: Vec<f64>,
}

/// A pole configuration with its harmonic function and cached values of `h`
/// on the `ε`-independent part of the quadrature.
pub struct CollapseModel {
    cfg: PoleConfig,
    field: HarmonicField,
    qspec: QuadratureSpec,
    poles: Vec<Point3>,
    cube: f64,
    levels: Vec<Level>,
}

/// Ewald parameters used for bulk evaluation of `h`: twice the default `α`,
/// which moves work into the reciprocal sum shared by all poles.
pub fn bulk_ewald_params(spec: &TorusSpec) -> EwaldParams {
    EwaldParams::default_for(spec).rescaled(spec, 2.0).expect("doubled default alpha is valid")
}

impl CollapseModel {
    pub fn new(cfg: &PoleConfig, params: EwaldParams, qspec: QuadratureSpec) -> Result<Self> {
        let qspec = QuadratureSpec::new(qspec.scheme, qspec.resolution)?;
        let field = HarmonicField::new(cfg, params);
        let poles: Vec<Point3> = cfg.poles().iter().map(|p| p.pos).collect();
        let cube = cube_half_size(cfg);
        let spec = *cfg.spec();
        let mut levels = Vec::new();
        for resolution in [qspec.resolution, qspec.resolution / 2] {
            let base = match qspec.scheme {
                Scheme::QuasiRandom => halton_nodes(&spec, resolution.pow(3)),
                _ => {
                    let order = qspec.order();
                    outer_nodes(&spec, &poles, cube, order, resolution.div_ceil(order))
                }
            };
            let evals: Vec<(f64, f64)> = base
                .points
                .par_iter()
                .map(|x| Ok((field.eval(x)?, field.nearest_pole(x).1)))
                .collect::<Result<_>>()?;
            let (base_h, base_dist) = evals.into_iter().unzip();
            levels.push(Level { resolution, base, base_h, base_dist });
        }
        Ok(Self { cfg: cfg.clone(), field, qspec, poles, cube, levels })
    }

    pub fn with_defaults(cfg: &PoleConfig) -> Result<Self> {
        Self::new(cfg, bulk_ewald_params(cfg.spec()), QuadratureSpec::default())
    }

    pub fn config(&self) -> &PoleConfig {
        &self.cfg
    }

    pub fn field(&self) -> &HarmonicField {
        &self.field
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.qspec
    }

    pub fn cube_half_size(&self) -> f64 {
        self.cube
    }

    /// Same geometry and cached `h` with a different additive constant.
    pub fn with_c0(&self, c0: f64) -> Self {
        let shift = c0 - self.cfg.c0();
        let cfg = self.cfg.with_c0(c0);
        let field = HarmonicField::new(&cfg, *self.field.green().params());
        let levels = self
            .levels
            .iter()
            .map(|lv| Level {
                resolution: lv.resolution,
                base: lv.base.clone(),
                base_h: lv.base_h.iter().map(|h| h + shift).collect(),
                base_dist: lv.base_dist.clone(),
            })
            .collect();
        Self { cfg, field, qspec: self.qspec, poles: self.poles.clone(), cube: self.cube, levels }
    }

    /// Nodes and `h` values for the region at radius `r` on one level.
    fn level_nodes(&self, level: &Level, r: f64) -> Result<(Nodes, Vec<f64>)> {
        let spec = self.cfg.spec();
        match self.qspec.scheme {
            Scheme::QuasiRandom => {
                let mut nodes = Nodes::default();
                let mut hs = Vec::new();
                for i in 0..level.base.len() {
                    if level.base_dist[i] >= r {
                        nodes.push(level.base.points[i], level.base.weights[i]);
                        hs.push(level.base_h[i]);
                    }
                }
                Ok((nodes, hs))
            }
            _ => {
                let order = self.qspec.order();
                let cells = level.resolution.div_ceil(order);
                let inner = inner_nodes(spec, &self.poles, self.cube, r, order, cells);
                let inner_h: Vec<f64> =
                    inner.points.par_iter().map(|x| self.field.eval(x)).collect::<Result<_>>()?;
                let mut nodes = level.base.clone();
                let mut hs = level.base_h.clone();
                nodes.extend(inner);
                hs.extend(inner_h);
                Ok((nodes, hs))
            }
        }
    }

    fn integrate_level(&self, level: &Level, eps: f64, pert: Option<&PerturbationField>) -> Result<[f64; 12]> {
        let r = exclusion_radius(eps);
        let (nodes, hs) = self.level_nodes(level, r)?;
        let rows: Vec<[f64; 12]> = nodes
            .points
            .par_iter()
            .zip(hs.par_iter())
            .map(|(x, h)| {
                let frame = gh_frame(1.0 / eps + h)?;
                let a = match pert {
                    Some(p) => frame.moment_diff.compose_left(&p.jacobian(x)),
                    None => frame.moment_diff,
                };
                let d = densities_in_frame(&frame, &frame.triple_orthonormal(), eps, &a);
                let mut row = [0.0; 12];
                row[0] = d.e;
                for i in 0..3 {
                    for j in 0..3 {
                        row[1 + 3 * i + j] = d.i[i][j];
                    }
                }
                row[10] = d.v;
                row[11] = d.v;
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut out = [0.0; 12];
        for (c, slot) in out.iter_mut().enumerate().take(11) {
            let col: Vec<f64> = rows.iter().map(|row| row[c]).collect();
            *slot = weighted_sum(&col, &nodes.weights);
        }
        out[11] = rows.iter().map(|row| row[11]).fold(f64::INFINITY, f64::min);
        Ok(out)
    }

    /// All region integrals at `eps`, optionally for the perturbed map `ψ ∘ μ`.
    pub fn evaluate(&self, eps: f64, pert: Option<&PerturbationField>) -> Result<RegionIntegrals> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Region(format!("eps must be positive, got {eps}")));
        }
        let r = exclusion_radius(eps);
        check_radius(&self.cfg, r)?;
        let fine = self.integrate_level(&self.levels[0], eps, pert)?;
        let coarse = self.integrate_level(&self.levels[1], eps, pert)?;
        let mut invariant = [[0.0; 3]; 3];
        let mut err_invariant: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                invariant[i][j] = fine[1 + 3 * i + j];
                err_invariant = err_invariant.max((fine[1 + 3 * i + j] - coarse[1 + 3 * i + j]).abs());
            }
        }
        let nodes = self.level_nodes(&self.levels[0], r)?.0.len();
        Ok(RegionIntegrals {
            eps,
            r,
            energy: fine[0],
            invariant,
            volume: fine[10],
            err_energy: (fine[0] - coarse[0]).abs(),
            err_invariant,
            err_volume: (fine[10] - coarse[10]).abs(),
            min_v_density: fine[11].min(coarse[11]),
            nodes,
        })
    }
}

/// `(E_num, E_closed)`.
pub fn energy_gh(model: &CollapseModel, eps: f64) -> Result<(f64, f64)> {
    let r = model.evaluate(eps, None)?;
    Ok((r.energy, energy_closed(model.config(), eps)))
}

pub fn invariant_matrix(model: &CollapseModel, eps: f64) -> Result<[[f64; 3]; 3]> {
    Ok(model.evaluate(eps, None)?.invariant)
}

/// `(vol_num, vol_leading)`.
pub fn volume_gh(model: &CollapseModel, eps: f64) -> Result<(f64, f64)> {
    let r = model.evaluate(eps, None)?;
    Ok((r.volume, volume_leading(model.config(), eps)))
}

pub fn perturbed_energy_and_invariant(
    model: &CollapseModel,
    eps: f64,
    pert: &PerturbationField,
) -> Result<RegionIntegrals> {
    model.evaluate(eps, Some(pert))
}

/// One row of an `ε`-sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub e_num: f64,
    pub e_closed: f64,
    pub i_num: [[f64; 3]; 3],
    pub tr_i_num: f64,
    pub tr_i_closed: f64,
    pub vol_num: f64,
    pub vol_leading: f64,
    pub ratio_e_tr_i: f64,
    pub ratio_vol_tr_i: f64,
    pub offdiag_max: f64,
    pub err_est: f64,
}

pub const CSV_HEADER: &str =
    "eps,E_num,E_closed,trI_num,trI_closed,vol_num,vol_leading,ratio_E_trI,ratio_vol_trI,offdiag_max,err_est";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        [
            self.eps,
            self.e_num,
            self.e_closed,
            self.tr_i_num,
            self.tr_i_closed,
            self.vol_num,
            self.vol_leading,
            self.ratio_e_tr_i,
            self.ratio_vol_tr_i,
            self.offdiag_max,
            self.err_est,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

pub fn sweep(model: &CollapseModel, eps_list: &[f64]) -> Result<Vec<SweepRow>> {
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("eps list must be strictly descending".into()));
    }
    let cfg = model.config();
    eps_list
        .iter()
        .map(|&eps| {
            let ri = model.evaluate(eps, None)?;
            let tr = ri.trace_invariant();
            let tr_closed = PI * eps * region_volume_closed(cfg, ri.r) * 3.0;
            Ok(SweepRow {
                eps,
                e_num: ri.energy,
                e_closed: energy_closed(cfg, eps),
                i_num: ri.invariant,
                tr_i_num: tr,
                tr_i_closed: tr_closed,
                vol_num: ri.volume,
                vol_leading: volume_leading(cfg, eps),
                ratio_e_tr_i: ri.energy / tr,
                ratio_vol_tr_i: ri.volume / tr,
                offdiag_max: ri.offdiag_max(),
                err_est: ri.err_est(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line `y = slope·x + intercept`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("length mismatch {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Fit("need at least 2 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Least-squares power law `y = coefficient · x^exponent` in log-log coordinates.
pub fn fit_power(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", xs.len())));
    }
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::Fit(format!("nonpositive value {y} in log-log fit")));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0)) {
        return Err(Error::Fit(format!("nonpositive abscissa {x} in log-log fit")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let lin = fit_linear(&lx, &ly)?;
    Ok(PowerFit { exponent: lin.slope, coefficient: lin.intercept.exp(), r2: lin.r2 })
}

/// Fitted exponents and slopes of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    pub n_pairs: usize,
    pub c0: f64,
    /// Fit of `3π vol(𝕋) − E_closed/ε`.
    pub deficit_closed: PowerFit,
    /// Fit of `3π vol(𝕋) − E_num/ε`.
    pub deficit_num: PowerFit,
    pub deficit_coefficient_expected: f64,
    /// Fit of `vol/tr(I) − 1/3` against `ε`.
    pub vol_ratio: LinearFit,
    pub vol_slope_expected: f64,
    pub max_ratio_e_tr_i_deviation: f64,
    pub note: String,
}

pub fn summarize(cfg: &PoleConfig, rows: &[SweepRow]) -> Result<SweepSummary> {
    let v = cfg.spec().volume();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let closed: Vec<f64> = rows.iter().map(|r| 3.0 * PI * v - r.e_closed / r.eps).collect();
    let num: Vec<f64> = rows.iter().map(|r| 3.0 * PI * v - r.e_num / r.eps).collect();
    let ratio: Vec<f64> = rows.iter().map(|r| r.ratio_vol_tr_i - 1.0 / 3.0).collect();
    Ok(SweepSummary {
        n_pairs: cfg.n(),
        c0: cfg.c0(),
        deficit_closed: fit_power(&eps, &closed)?,
        deficit_num: fit_power(&eps, &num)?,
        deficit_coefficient_expected: deficit_coefficient(cfg),
        vol_ratio: fit_linear(&eps, &ratio)?,
        vol_slope_expected: cfg.c0() / 3.0,
        max_ratio_e_tr_i_deviation: rows.iter().map(|r| (r.ratio_e_tr_i - 1.0).abs()).fold(0.0, f64::max),
        note: "Gibbons-Hawking region only; corrections from the gluing regions are not computed".into(),
    })
}

/// Differential of `ψ ∘ μ` against the orthonormal coframe at `H`.
pub fn perturbed_differential(h_total: f64, pert: &PerturbationField, x: &Point3) -> Result<LinearMap34> {
    Ok(gh_frame(h_total)?.moment_diff.compose_left(&pert.jacobian(x)))
}

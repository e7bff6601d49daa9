//! Periodic Green's functions on a rectangular flat 3-torus and harmonic
//! functions with prescribed poles.
//!
//! The Green's function uses the convention `G_p ~ 1/ρ_p` near the pole,
//! `ΔG_p = 4π/V` away from it (Laplacian with the analyst's sign, so that
//! `Δ(1/ρ) = -4πδ`) and `∫ G_p = 0`. It is evaluated by Ewald splitting:
//!
//! ```text
//! G(r) = Σₙ erfc(α|r+n|)/|r+n| + Σ_{k≠0} (4π/V) e^{-k²/4α²}/k² cos(k·r) − π/(α²V)
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Truncation target for both Ewald tails.
pub const EWALD_TARGET: f64 = 1e-13;
/// Tails above this are rejected at construction.
pub const EWALD_MAX_TAIL: f64 = 1e-12;
/// Points closer than this to a pole are rejected.
pub const POLE_GUARD: f64 = 1e-14;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

fn norm(v: &Point3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Box `ℝ³/(L₁ℤ × L₂ℤ × L₃ℤ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSpec {
    lengths: [f64; 3],
}

impl Default for TorusSpec {
    fn default() -> Self {
        Self { lengths: [1.0; 3] }
    }
}

impl TorusSpec {
    pub fn new(lengths: [f64; 3]) -> Result<Self> {
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Config(format!("box lengths must be positive, got {lengths:?}")));
        }
        Ok(Self { lengths })
    }

    pub fn unit() -> Self {
        Self::default()
    }

    pub fn cube(l: f64) -> Result<Self> {
        Self::new([l; 3])
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn min_length(&self) -> f64 {
        self.lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Representative in `[0, Lᵢ)`.
    pub fn wrap(&self, x: &Point3) -> Point3 {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let l = self.lengths[i];
            let mut v = x[i] - l * (x[i] / l).floor();
            if v >= l {
                v -= l;
            }
            out[i] = v;
        }
        out
    }

    /// Shortest representative of a displacement, each coordinate in `[-Lᵢ/2, Lᵢ/2]`.
    pub fn min_image(&self, d: &Point3) -> Point3 {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let l = self.lengths[i];
            out[i] = d[i] - l * (d[i] / l).round();
        }
        out
    }

    pub fn displacement(&self, x: &Point3, y: &Point3) -> Point3 {
        self.min_image(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]])
    }

    pub fn distance(&self, x: &Point3, y: &Point3) -> f64 {
        norm(&self.displacement(x, y))
    }

    /// The eight points fixed by `x ↦ -x`, coordinates `0` or `Lᵢ/2`, in lexicographic order.
    pub fn fixed_points(&self) -> [Point3; 8] {
        let mut out = [[0.0; 3]; 8];
        for (idx, q) in out.iter_mut().enumerate() {
            for axis in 0..3 {
                if idx & (4 >> axis) != 0 {
                    q[axis] = 0.5 * self.lengths[axis];
                }
            }
        }
        out
    }

    pub fn negate(&self, x: &Point3) -> Point3 {
        self.wrap(&[-x[0], -x[1], -x[2]])
    }
}

/// A pole with its scalar charge: the harmonic function behaves like `charge/ρ` there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pole {
    pub pos: Point3,
    pub charge: f64,
}

/// A pole pair `±p` of multiplicity `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolePair {
    pub p: Point3,
    pub k: u32,
}

/// Poles `±pᵢ` with integers `kᵢ`, integers `mⱼ` at the fixed points, and the additive constant `c0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleConfig {
    pairs: Vec<PolePair>,
    m: [u32; 8],
    c0: f64,
    spec: TorusSpec,
}

/// Poles closer than this are treated as coincident.
const COINCIDENCE: f64 = 1e-10;

impl PoleConfig {
    /// Validated configuration, including the balancing condition `Σm + Σk = 16`.
    pub fn new(spec: TorusSpec, pairs: Vec<PolePair>, m: [u32; 8], c0: f64) -> Result<Self> {
        let cfg = Self::new_unbalanced(spec, pairs, m, c0)?;
        let total = cfg.balance_total();
        if total != 16 {
            return Err(Error::Config(format!("balancing: Σm+Σk = {total} ≠ 16")));
        }
        Ok(cfg)
    }

    /// Like [`PoleConfig::new`] without the balancing check; used to probe its role.
    pub fn new_unbalanced(spec: TorusSpec, pairs: Vec<PolePair>, m: [u32; 8], c0: f64) -> Result<Self> {
        if !c0.is_finite() {
            return Err(Error::Config("c0 must be finite".into()));
        }
        let mut wrapped = Vec::with_capacity(pairs.len());
        for (i, pair) in pairs.iter().enumerate() {
            if pair.k == 0 {
                return Err(Error::Config(format!("k[{i}] must be positive")));
            }
            if pair.p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!("p[{i}] is not finite")));
            }
            wrapped.push(PolePair { p: spec.wrap(&pair.p), k: pair.k });
        }
        let cfg = Self { pairs: wrapped, m, c0, spec };
        let poles = cfg.poles();
        for a in 0..poles.len() {
            for b in 0..a {
                if spec.distance(&poles[a].pos, &poles[b].pos) < COINCIDENCE {
                    return Err(Error::Config(format!(
                        "distinct poles: {:?} coincides with {:?}",
                        poles[a].pos, poles[b].pos
                    )));
                }
            }
        }
        Ok(cfg)
    }

    /// All charges zero: `n = 0`, `m = (2, ..., 2)`.
    pub fn neutral(spec: TorusSpec, c0: f64) -> Self {
        Self::new(spec, Vec::new(), [2; 8], c0).expect("neutral configuration is valid")
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn pairs(&self) -> &[PolePair] {
        &self.pairs
    }

    pub fn m(&self) -> [u32; 8] {
        self.m
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn with_c0(&self, c0: f64) -> Self {
        Self { c0, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn balance_total(&self) -> u32 {
        self.m.iter().sum::<u32>() + self.pairs.iter().map(|p| p.k).sum::<u32>()
    }

    pub fn is_balanced(&self) -> bool {
        self.balance_total() == 16
    }

    /// Poles in the order `q₁..q₈, p₁..pₙ, -p₁..-pₙ`.
    pub fn poles(&self) -> Vec<Pole> {
        let mut out: Vec<Pole> = self
            .spec
            .fixed_points()
            .iter()
            .zip(self.m.iter())
            .map(|(q, &m)| Pole { pos: *q, charge: m as f64 - 2.0 })
            .collect();
        for pair in &self.pairs {
            out.push(Pole { pos: pair.p, charge: pair.k as f64 / 2.0 });
        }
        for pair in &self.pairs {
            out.push(Pole { pos: self.spec.negate(&pair.p), charge: pair.k as f64 / 2.0 });
        }
        out
    }

    /// Sum of all charges; zero exactly when balanced.
    pub fn charge_sum(&self) -> f64 {
        self.poles().iter().map(|p| p.charge).sum()
    }

    /// A quarter of the smallest pole separation, capped by a quarter of the shortest half-period.
    pub fn delta0(&self) -> f64 {
        let poles = self.poles();
        let mut d = 0.5 * self.spec.min_length();
        for a in 0..poles.len() {
            for b in 0..a {
                d = d.min(self.spec.distance(&poles[a].pos, &poles[b].pos));
            }
        }
        0.25 * d
    }
}

/// Ewald splitting parameter and cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EwaldParams {
    pub alpha: f64,
    pub r_cut: f64,
    pub g_cut: f64,
}

/// Estimate of the dropped real-space images, `(4π/V)∫_{r_c}^∞ r erfc(αr) dr`, bounded above.
pub fn real_tail(alpha: f64, r_cut: f64, volume: f64) -> f64 {
    2.0 * PI * libm::erfc(alpha * r_cut) / (volume * alpha * alpha)
}

/// Estimate of the dropped reciprocal terms, `(2/π)∫_{g_c}^∞ e^{-k²/4α²} dk`.
pub fn recip_tail(alpha: f64, g_cut: f64) -> f64 {
    FRAC_2_SQRT_PI * alpha * libm::erfc(g_cut / (2.0 * alpha))
}

/// Smallest `x` with `scale · erfc(x) ≤ target`, by bisection.
fn erfc_threshold(scale: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 30.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if scale * libm::erfc(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

impl EwaldParams {
    /// `α = √π / V^{1/3}` with cutoffs from the tail estimates.
    pub fn default_for(spec: &TorusSpec) -> Self {
        Self::with_alpha(spec, PI.sqrt() / spec.volume().cbrt()).expect("default alpha is valid")
    }

    /// Cutoffs chosen so that both tail estimates fall below [`EWALD_TARGET`].
    pub fn with_alpha(spec: &TorusSpec, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Ewald(format!("alpha must be positive, got {alpha}")));
        }
        let v = spec.volume();
        let x = erfc_threshold(2.0 * PI / (v * alpha * alpha), EWALD_TARGET);
        let y = erfc_threshold(FRAC_2_SQRT_PI * alpha, EWALD_TARGET);
        Self::new(spec, alpha, x / alpha, 2.0 * alpha * y)
    }

    pub fn new(spec: &TorusSpec, alpha: f64, r_cut: f64, g_cut: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && r_cut > 0.0 && g_cut > 0.0) {
            return Err(Error::Ewald("alpha and cutoffs must be positive".into()));
        }
        let rt = real_tail(alpha, r_cut, spec.volume());
        let gt = recip_tail(alpha, g_cut);
        if rt > EWALD_MAX_TAIL || gt > EWALD_MAX_TAIL {
            return Err(Error::Ewald(format!("tail estimates {rt:e} (real), {gt:e} (reciprocal) exceed 1e-12")));
        }
        Ok(Self { alpha, r_cut, g_cut })
    }

    /// The same splitting with `α` multiplied by `factor` and cutoffs recomputed.
    pub fn rescaled(&self, spec: &TorusSpec, factor: f64) -> Result<Self> {
        Self::with_alpha(spec, self.alpha * factor)
    }
}

#[derive(Clone, Copy, Debug)]
struct KVec {
    n: [i32; 3],
    k: Point3,
    /// `2 (4π/V) e^{-k²/4α²} / k²`, the factor 2 folding in `-k`.
    coef: f64,
}

/// The Ewald-summed Green's function of one torus.
#[derive(Clone, Debug)]
pub struct EwaldGreen {
    spec: TorusSpec,
    params: EwaldParams,
    images: Vec<Point3>,
    kvecs: Vec<KVec>,
    background: f64,
    kmax: [usize; 3],
}

impl EwaldGreen {
    pub fn new(spec: TorusSpec, params: EwaldParams) -> Self {
        let l = spec.lengths();
        let half_diag = 0.5 * norm(&l);
        let reach = params.r_cut + half_diag;
        let mut images = Vec::new();
        let nmax: Vec<i32> = l.iter().map(|li| (reach / li).ceil() as i32).collect();
        for a in -nmax[0]..=nmax[0] {
            for b in -nmax[1]..=nmax[1] {
                for c in -nmax[2]..=nmax[2] {
                    let n = [a as f64 * l[0], b as f64 * l[1], c as f64 * l[2]];
                    if norm(&n) <= reach {
                        images.push(n);
                    }
                }
            }
        }
        images.sort_by(|x, y| norm(x).total_cmp(&norm(y)));

        let v = spec.volume();
        let alpha = params.alpha;
        let mut kvecs = Vec::new();
        let mut kmax = [0usize; 3];
        let mmax: Vec<i32> = l.iter().map(|li| (params.g_cut * li / (2.0 * PI)).ceil() as i32).collect();
        for a in 0..=mmax[0] {
            for b in -mmax[1]..=mmax[1] {
                for c in -mmax[2]..=mmax[2] {
                    let upper = a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
                    if !upper {
                        continue;
                    }
                    let n = [a, b, c];
                    let k = [
                        2.0 * PI * a as f64 / l[0],
                        2.0 * PI * b as f64 / l[1],
                        2.0 * PI * c as f64 / l[2],
                    ];
                    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    if k2.sqrt() > params.g_cut {
                        continue;
                    }
                    for i in 0..3 {
                        kmax[i] = kmax[i].max(n[i].unsigned_abs() as usize);
                    }
                    let coef = 2.0 * 4.0 * PI / v * (-k2 / (4.0 * alpha * alpha)).exp() / k2;
                    kvecs.push(KVec { n, k, coef });
                }
            }
        }
        let background = -PI / (alpha * alpha * v);
        Self { spec, params, images, kvecs, background, kmax }
    }

    pub fn with_defaults(spec: TorusSpec) -> Self {
        Self::new(spec, EwaldParams::default_for(&spec))
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn params(&self) -> &EwaldParams {
        &self.params
    }

    pub fn n_images(&self) -> usize {
        self.images.len()
    }

    pub fn n_kvecs(&self) -> usize {
        self.kvecs.len()
    }

    /// Real-space sum over images of a minimum-image displacement, optionally without the `n = 0` term.
    fn real_sum(&self, d: &Point3, skip_origin: bool) -> f64 {
        let alpha = self.params.alpha;
        let rc2 = self.params.r_cut * self.params.r_cut;
        let mut s = 0.0;
        for (idx, n) in self.images.iter().enumerate() {
            if skip_origin && idx == 0 {
                continue;
            }
            let r = [d[0] + n[0], d[1] + n[1], d[2] + n[2]];
            let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            if r2 > rc2 {
                continue;
            }
            let rr = r2.sqrt();
            s += libm::erfc(alpha * rr) / rr;
        }
        s
    }

    fn recip_sum(&self, d: &Point3) -> f64 {
        self.kvecs
            .iter()
            .map(|kv| kv.coef * (kv.k[0] * d[0] + kv.k[1] * d[1] + kv.k[2] * d[2]).cos())
            .sum()
    }

    fn check_pole(&self, x: &Point3, p: &Point3) -> Result<Point3> {
        let d = self.spec.displacement(x, p);
        if norm(&d) < POLE_GUARD {
            return Err(Error::AtPole { point: *x, pole: *p });
        }
        Ok(d)
    }

    /// `G_p(x)`.
    pub fn green(&self, x: &Point3, p: &Point3) -> Result<f64> {
        let d = self.check_pole(x, p)?;
        Ok(self.real_sum(&d, false) + self.recip_sum(&d) + self.background)
    }

    /// `G_p(x) − 1/ρ_p(x)`, smooth across the pole and defined there.
    pub fn green_regular(&self, x: &Point3, p: &Point3) -> f64 {
        let d = self.spec.displacement(x, p);
        let r = norm(&d);
        let alpha = self.params.alpha;
        // erfc(αr)/r − 1/r = −erf(αr)/r
        let near = if r < 1e-6 {
            let ar2 = (alpha * r).powi(2);
            -FRAC_2_SQRT_PI * alpha * (1.0 - ar2 / 3.0 + ar2 * ar2 / 10.0)
        } else {
            -libm::erf(alpha * r) / r
        };
        near + self.real_sum(&d, true) + self.recip_sum(&d) + self.background
    }

    /// `lim_{x→p} (G_p(x) − 1/ρ_p(x))`.
    pub fn self_constant(&self) -> f64 {
        self.green_regular(&[0.0; 3], &[0.0; 3])
    }

    /// `∇ₓ G_p(x)`.
    pub fn green_grad(&self, x: &Point3, p: &Point3) -> Result<Point3> {
        let d = self.check_pole(x, p)?;
        let alpha = self.params.alpha;
        let rc2 = self.params.r_cut * self.params.r_cut;
        let mut g = [0.0; 3];
        for n in &self.images {
            let r = [d[0] + n[0], d[1] + n[1], d[2] + n[2]];
            let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
            if r2 > rc2 {
                continue;
            }
            let rr = r2.sqrt();
            let radial = libm::erfc(alpha * rr) / r2 + FRAC_2_SQRT_PI * alpha * (-alpha * alpha * r2).exp() / rr;
            for i in 0..3 {
                g[i] -= radial * r[i] / rr;
            }
        }
        for kv in &self.kvecs {
            let s = kv.coef * (kv.k[0] * d[0] + kv.k[1] * d[1] + kv.k[2] * d[2]).sin();
            for i in 0..3 {
                g[i] -= s * kv.k[i];
            }
        }
        Ok(g)
    }
}

/// The harmonic function `h = Σ charge·G_pole + c0` of a pole configuration.
///
/// The reciprocal part is evaluated once per point through the structure
/// factor `S(k) = Σ q e^{-ik·p}`.
#[derive(Clone, Debug)]
pub struct HarmonicField {
    green: EwaldGreen,
    poles: Vec<Pole>,
    c0: f64,
    structure: Vec<(f64, f64)>,
    constant: f64,
}

impl HarmonicField {
    pub fn new(cfg: &PoleConfig, params: EwaldParams) -> Self {
        let green = EwaldGreen::new(*cfg.spec(), params);
        let poles = cfg.poles();
        let structure = green
            .kvecs
            .iter()
            .map(|kv| {
                poles.iter().fold((0.0, 0.0), |(re, im), p| {
                    let phase = kv.k[0] * p.pos[0] + kv.k[1] * p.pos[1] + kv.k[2] * p.pos[2];
                    (re + p.charge * phase.cos(), im - p.charge * phase.sin())
                })
            })
            .collect();
        let total: f64 = poles.iter().map(|p| p.charge).sum();
        let constant = cfg.c0() + total * green.background;
        Self { green, poles, c0: cfg.c0(), structure, constant }
    }

    pub fn with_defaults(cfg: &PoleConfig) -> Self {
        Self::new(cfg, EwaldParams::default_for(cfg.spec()))
    }

    pub fn green(&self) -> &EwaldGreen {
        &self.green
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `e^{i 2π m xₐ/Lₐ}` for `m = 0..=kmax[a]`, per axis.
    fn phase_tables(&self, x: &Point3) -> [Vec<(f64, f64)>; 3] {
        let l = self.green.spec.lengths();
        std::array::from_fn(|a| {
            let theta = 2.0 * PI * x[a] / l[a];
            (0..=self.green.kmax[a])
                .map(|m| {
                    let t = theta * m as f64;
                    (t.cos(), t.sin())
                })
                .collect()
        })
    }

    fn recip(&self, x: &Point3) -> f64 {
        let tables = self.phase_tables(x);
        let lookup = |a: usize, m: i32| {
            let (c, s) = tables[a][m.unsigned_abs() as usize];
            if m < 0 {
                (c, -s)
            } else {
                (c, s)
            }
        };
        let mut sum = 0.0;
        for (kv, &(sr, si)) in self.green.kvecs.iter().zip(self.structure.iter()) {
            let (c0, s0) = lookup(0, kv.n[0]);
            let (c1, s1) = lookup(1, kv.n[1]);
            let (c2, s2) = lookup(2, kv.n[2]);
            let (c01, s01) = (c0 * c1 - s0 * s1, c0 * s1 + s0 * c1);
            let (c, s) = (c01 * c2 - s01 * s2, c01 * s2 + s01 * c2);
            sum += kv.coef * (c * sr - s * si);
        }
        sum
    }

    /// Nearest pole and its distance.
    pub fn nearest_pole(&self, x: &Point3) -> (usize, f64) {
        let spec = &self.green.spec;
        self.poles
            .iter()
            .enumerate()
            .map(|(i, p)| (i, spec.distance(x, &p.pos)))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// `h(x)`.
    pub fn eval(&self, x: &Point3) -> Result<f64> {
        let spec = &self.green.spec;
        let mut real = 0.0;
        for pole in &self.poles {
            let d = spec.displacement(x, &pole.pos);
            if norm(&d) < POLE_GUARD {
                return Err(Error::AtPole { point: *x, pole: pole.pos });
            }
            if pole.charge != 0.0 {
                real += pole.charge * self.green.real_sum(&d, false);
            }
        }
        Ok(real + self.recip(x) + self.constant)
    }

    /// `h(x)` computed pole by pole through [`EwaldGreen::green`].
    pub fn eval_direct(&self, x: &Point3) -> Result<f64> {
        let mut s = self.c0;
        for pole in &self.poles {
            let g = self.green.green(x, &pole.pos)?;
            s += pole.charge * g;
        }
        Ok(s)
    }

    /// `∇h(x)`.
    pub fn grad(&self, x: &Point3) -> Result<Point3> {
        let mut g = [0.0; 3];
        for pole in &self.poles {
            let gp = self.green.green_grad(x, &pole.pos)?;
            for i in 0..3 {
                g[i] += pole.charge * gp[i];
            }
        }
        Ok(g)
    }

    /// Value at a pole of `h` minus that pole's own singular term `charge/ρ`.
    pub fn regular_value(&self, p: &Point3) -> Result<f64> {
        let spec = &self.green.spec;
        let own = self
            .poles
            .iter()
            .position(|q| spec.distance(p, &q.pos) < COINCIDENCE)
            .ok_or(Error::NotAPole(*p))?;
        let mut s = self.c0;
        for (i, pole) in self.poles.iter().enumerate() {
            if pole.charge == 0.0 {
                continue;
            }
            s += if i == own {
                pole.charge * self.green.green_regular(p, &pole.pos)
            } else {
                pole.charge * self.green.green(p, &pole.pos)?
            };
        }
        Ok(s)
    }

    /// `h(x) − Σ charge/ρ` over the poles within `radius` of `x`; smooth near those poles.
    pub fn eval_without_singular(&self, x: &Point3, radius: f64) -> Result<f64> {
        let spec = &self.green.spec;
        let mut s = self.c0;
        for pole in &self.poles {
            if pole.charge == 0.0 {
                continue;
            }
            s += if spec.distance(x, &pole.pos) < radius {
                pole.charge * self.green.green_regular(x, &pole.pos)
            } else {
                pole.charge * self.green.green(x, &pole.pos)?
            };
        }
        Ok(s)
    }
}

/// Seven-point second-order finite-difference Laplacian.
pub fn laplacian_probe<F: Fn(&Point3) -> f64>(f: F, x: &Point3, step: f64) -> f64 {
    let centre = f(x);
    let mut s = -6.0 * centre;
    for axis in 0..3 {
        for sign in [-1.0, 1.0] {
            let mut y = *x;
            y[axis] += sign * step;
            s += f(&y);
        }
    }
    s / (step * step)
}

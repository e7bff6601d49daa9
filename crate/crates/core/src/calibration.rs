//! The calibration functional `τ(A)` for linear maps `A: ℝ⁴ → ℝ³`.
//!
//! With the standard triple `ωᵢ` on ℝ⁴ and `ηᵢ = fʲ ∧ fᵏ` on ℝ³,
//! `Σ ωᵢ ∧ A*ηᵢ = τ(A) e⁰¹²³` and `τ(A) ≤ tr(A*A)`, with equality exactly on
//! a seven-relation linear locus. Calibrated maps recover the triple through
//! `ωᵢ = θ ∧ A*fⁱ + D A*fʲ ∧ A*fᵏ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms4::{self, FormTriple, KForm4, Metric4};

pub const DEFAULT_TOL: f64 = 1e-10;

const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// A real 3×4 matrix `a[h][l]`: target index `h` (0-based for 1..3), source index `l` in 0..3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearMap34 {
    pub a: [[f64; 4]; 3],
}

impl LinearMap34 {
    pub fn new(a: [[f64; 4]; 3]) -> Self {
        Self { a }
    }

    pub fn zero() -> Self {
        Self { a: [[0.0; 4]; 3] }
    }

    /// `Aⁱᵢ = 1`, everything else zero.
    pub fn identity_block() -> Self {
        Self::diagonal_block(1.0)
    }

    pub fn diagonal_block(b: f64) -> Self {
        let mut a = [[0.0; 4]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            row[i + 1] = b;
        }
        Self { a }
    }

    /// The general calibrated map: `Aⁱᵢ = b`, `Aⁱ₀ = Aʲₖ = -Aᵏⱼ = v[i]`.
    pub fn calibrated(b: f64, v: [f64; 3]) -> Self {
        let mut a = [[0.0; 4]; 3];
        for &(i, j, k) in &CYCLIC {
            a[i][i + 1] = b;
            a[i][0] = v[i];
            a[j][k + 1] = v[i];
            a[k][j + 1] = -v[i];
        }
        Self { a }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { a: self.a.map(|row| row.map(|x| c * x)) }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().flatten().all(|x| x.is_finite())
    }

    /// Left composition with a 3×3 matrix: `(J A)ʰₗ = Σ J[h][m] Aᵐₗ`.
    pub fn compose_left(&self, j: &[[f64; 3]; 3]) -> Self {
        let mut a = [[0.0; 4]; 3];
        for h in 0..3 {
            for l in 0..4 {
                a[h][l] = (0..3).map(|m| j[h][m] * self.a[m][l]).sum();
            }
        }
        Self { a }
    }

    /// `A*fʰ` as a 1-form on ℝ⁴.
    pub fn pullback_coordinate(&self, h: usize) -> KForm4 {
        KForm4::one_form(self.a[h])
    }
}

/// A constant-coefficient form on ℝ³ in the coframe `f¹, f², f³`.
///
/// Bases: degree 1 `(f¹, f², f³)`, degree 2 `(f²³, f³¹, f¹²)` so that entry `i`
/// is `ηᵢ`, degree 3 `(f¹²³)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Form3 {
    degree: usize,
    coeffs: [f64; 3],
}

impl Form3 {
    pub fn new(degree: usize, coeffs: &[f64]) -> Result<Self> {
        let len = match degree {
            0 | 3 => 1,
            1 | 2 => 3,
            _ => return Err(Error::InvalidDegree { degree, what: "form on R^3" }),
        };
        if coeffs.len() != len {
            return Err(Error::InvalidDegree { degree, what: "coefficient count" });
        }
        let mut c = [0.0; 3];
        c[..len].copy_from_slice(coeffs);
        Ok(Self { degree, coeffs: c })
    }

    /// `fⁱ`.
    pub fn f(i: usize) -> Self {
        let mut coeffs = [0.0; 3];
        coeffs[i] = 1.0;
        Self { degree: 1, coeffs }
    }

    /// `ηᵢ = fʲ ∧ fᵏ`.
    pub fn eta(i: usize) -> Self {
        let mut coeffs = [0.0; 3];
        coeffs[i] = 1.0;
        Self { degree: 2, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        match self.degree {
            1 | 2 => &self.coeffs,
            _ => &self.coeffs[..1],
        }
    }

    /// Euclidean norm (the basis is orthonormal).
    pub fn norm(&self) -> f64 {
        self.coeffs().iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Linear pullback `A*a` of a form on ℝ³.
pub fn pullback(a_map: &LinearMap34, a: &Form3) -> KForm4 {
    let mu: Vec<KForm4> = (0..3).map(|h| a_map.pullback_coordinate(h)).collect();
    match a.degree {
        0 => KForm4::scalar(a.coeffs[0]),
        1 => (0..3).fold(KForm4::one_form([0.0; 4]), |acc, i| acc.add(&mu[i].scale(a.coeffs[i]))),
        2 => {
            let mut out = KForm4::two_form([0.0; 6]);
            for &(i, j, k) in &CYCLIC {
                let pj_pk = mu[j].wedge(&mu[k]).expect("1 + 1 = 2");
                out = out.add(&pj_pk.scale(a.coeffs[i]));
            }
            out
        }
        _ => mu[0]
            .wedge(&mu[1])
            .and_then(|x| x.wedge(&mu[2]))
            .expect("1 + 1 + 1 = 3")
            .scale(a.coeffs[0]),
    }
}

/// `τ(A)` from its closed-form bilinear expansion.
pub fn tau(m: &LinearMap34) -> f64 {
    let a = &m.a;
    let mut t = 0.0;
    for &(i, j, k) in &CYCLIC {
        let (ci, cj, ck) = (i + 1, j + 1, k + 1);
        t += a[j][0] * a[k][ci] - a[j][ci] * a[k][0] + a[j][cj] * a[k][ck] - a[j][ck] * a[k][cj];
    }
    t
}

/// `Σᵢ ωᵢ ∧ A*ηᵢ` as a multiple of `e⁰¹²³`, via the exterior algebra.
pub fn tau_wedge(m: &LinearMap34) -> f64 {
    pairing(m, &FormTriple::standard()).iter().enumerate().map(|(i, row)| row[i]).sum()
}

/// The matrix `Pᵢⱼ` with `ωᵢ ∧ A*ηⱼ = Pᵢⱼ e⁰¹²³` for an arbitrary triple.
pub fn pairing(m: &LinearMap34, triple: &FormTriple) -> [[f64; 3]; 3] {
    let etas: Vec<KForm4> = (0..3).map(|j| pullback(m, &Form3::eta(j))).collect();
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            p[i][j] = triple.omega[i].wedge(&etas[j]).expect("2 + 2 = 4").top();
        }
    }
    p
}

/// `tr(A*A)` in the Euclidean metric: the sum of squared entries.
pub fn energy_density(m: &LinearMap34) -> f64 {
    m.a.iter().flatten().map(|x| x * x).sum()
}

/// `tr_g(A*δ)` for a metric `g` on the source.
pub fn energy_density_with(m: &LinearMap34, g: &Metric4) -> f64 {
    let dual = g.dual();
    let mut s = 0.0;
    for row in &m.a {
        for p in 0..4 {
            for q in 0..4 {
                s += dual[p][q] * row[p] * row[q];
            }
        }
    }
    s
}

/// `tr(A*A) − τ(A)` as half a sum of squares over four groups of entries.
pub fn gap_sum_of_squares(m: &LinearMap34) -> f64 {
    let a = &m.a;
    let d = [a[0][1], a[1][2], a[2][3]];
    let mut s = (d[0] - d[1]).powi(2) + (d[1] - d[2]).powi(2) + (d[2] - d[0]).powi(2);
    for &(i, j, k) in &CYCLIC {
        let x = a[i][0];
        let y = a[j][k + 1];
        let z = -a[k][j + 1];
        s += (x - y).powi(2) + (y - z).powi(2) + (z - x).powi(2);
    }
    0.5 * s
}

/// Largest violation among the seven linear relations of the equality locus.
pub fn equality_defect(m: &LinearMap34) -> f64 {
    let a = &m.a;
    let mut worst = (a[0][1] - a[1][2]).abs().max((a[1][2] - a[2][3]).abs());
    for &(i, j, k) in &CYCLIC {
        worst = worst.max((a[i][0] - a[j][k + 1]).abs()).max((a[j][k + 1] + a[k][j + 1]).abs());
    }
    worst
}

/// Which closed formula for `D` matches the fitted value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DMatch {
    /// `D = √(tr/3)`.
    SqrtTrace,
    /// `D = 3/tr`.
    InverseTrace,
    Both,
    Neither,
}

impl DMatch {
    pub fn label(self) -> &'static str {
        match self {
            DMatch::SqrtTrace => "sqrt(tr/3)",
            DMatch::InverseTrace => "3/tr",
            DMatch::Both => "both (tr = 3)",
            DMatch::Neither => "neither",
        }
    }
}

/// Data recovered from a calibrated map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    /// `θ = D(B e⁰ − Σ Aˡ eˡ)`.
    pub theta: [f64; 4],
    /// Fitted scalar `D`.
    pub d_const: f64,
    pub d_sqrt_trace: f64,
    pub d_inverse_trace: f64,
    pub d_match: DMatch,
    /// `max |θ ∧ A*fⁱ + D A*fʲ ∧ A*fᵏ − ωᵢ|` over coefficients.
    pub residual: f64,
    #[serde(skip)]
    pub triple: FormTriple,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub tau: f64,
    pub energy: f64,
    pub gap: f64,
    /// The same gap from the sum-of-squares expansion.
    pub gap_squares: f64,
    pub calibrated: bool,
    pub reconstruction: Option<Reconstruction>,
}

pub fn calibration_report(m: &LinearMap34, tol: f64) -> CalibrationReport {
    let t = tau(m);
    let energy = energy_density(m);
    let gap = energy - t;
    let calibrated = gap <= tol;
    let reconstruction = if calibrated { reconstruct_with_tol(m, tol).ok() } else { None };
    CalibrationReport { tau: t, energy, gap, gap_squares: gap_sum_of_squares(m), calibrated, reconstruction }
}

/// Relative tolerance used to decide whether a candidate `D` matches.
const D_MATCH_TOL: f64 = 1e-8;

pub fn reconstruct(m: &LinearMap34) -> Result<Reconstruction> {
    reconstruct_with_tol(m, DEFAULT_TOL)
}

/// Rebuilds the standard triple from a calibrated map.
///
/// The 1-form direction `α = B e⁰ − Σ Aˡ eˡ` is fixed by the map; the scalar
/// `D` is fitted by least squares so that `D(α ∧ A*fⁱ + A*fʲ ∧ A*fᵏ) = ωᵢ`.
/// Every nonzero `D` yields an SU(2)-structure, so the fit is against the
/// triple itself rather than the SU(2) condition alone.
pub fn reconstruct_with_tol(m: &LinearMap34, tol: f64) -> Result<Reconstruction> {
    let energy = energy_density(m);
    if energy == 0.0 {
        return Err(Error::ZeroMap);
    }
    let gap = energy - tau(m);
    let scale_tol = tol * energy.max(1.0);
    if gap > scale_tol {
        return Err(Error::NotCalibrated { gap, tol: scale_tol });
    }
    let a = &m.a;
    let b = (a[0][1] + a[1][2] + a[2][3]) / 3.0;
    let mut v = [0.0; 3];
    for &(i, j, k) in &CYCLIC {
        v[i] = (a[i][0] + a[j][k + 1] - a[k][j + 1]) / 3.0;
    }
    let alpha = KForm4::one_form([b, -v[0], -v[1], -v[2]]);
    let mu: Vec<KForm4> = (0..3).map(|h| m.pullback_coordinate(h)).collect();
    let standard = FormTriple::standard();

    let mut beta = [KForm4::two_form([0.0; 6]); 3];
    for &(i, j, k) in &CYCLIC {
        beta[i] = alpha.wedge(&mu[i]).expect("1 + 1").add(&mu[j].wedge(&mu[k]).expect("1 + 1"));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..3 {
        for (x, y) in beta[i].coeffs().iter().zip(standard.omega[i].coeffs()) {
            num += x * y;
            den += x * x;
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroMap);
    }
    let d = num / den;

    let theta = alpha.scale(d);
    let mut omega = [KForm4::two_form([0.0; 6]); 3];
    for &(i, j, k) in &CYCLIC {
        omega[i] = theta
            .wedge(&mu[i])
            .expect("1 + 1")
            .add(&mu[j].wedge(&mu[k]).expect("1 + 1").scale(d));
    }
    let triple = FormTriple::new(omega)?;
    let residual = triple.max_abs_diff(&standard);

    let d_sqrt_trace = (energy / 3.0).sqrt();
    let d_inverse_trace = 3.0 / energy;
    let near = |c: f64| (c - d).abs() <= D_MATCH_TOL * d.abs().max(1.0);
    let d_match = match (near(d_sqrt_trace), near(d_inverse_trace)) {
        (true, true) => DMatch::Both,
        (true, false) => DMatch::SqrtTrace,
        (false, true) => DMatch::InverseTrace,
        (false, false) => DMatch::Neither,
    };
    let mut th = [0.0; 4];
    th.copy_from_slice(theta.coeffs());
    Ok(Reconstruction { theta: th, d_const: d, d_sqrt_trace, d_inverse_trace, d_match, residual, triple })
}

/// Is the triple an SU(2)-structure in the orthonormal sense of [`forms4::is_su2`].
pub fn reconstruction_is_su2(r: &Reconstruction, tol: f64) -> bool {
    forms4::is_su2(&r.triple, tol)
}

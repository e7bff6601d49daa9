//! Exterior algebra on ℝ⁴ in the coframe `e⁰, e¹, e², e³`.
//!
//! Coefficients of a k-form are stored over a fixed basis of Λᵏ(ℝ⁴)*:
//!
//! | degree | basis                                   |
//! |--------|-----------------------------------------|
//! | 0      | `1`                                     |
//! | 1      | `e⁰, e¹, e², e³`                        |
//! | 2      | `e⁰¹, e⁰², e⁰³, e²³, e³¹, e¹²`          |
//! | 3      | `e⁰¹², e⁰¹³, e⁰²³, e¹²³`                |
//! | 4      | `e⁰¹²³`                                 |
//!
//! The degree-2 order puts the self-dual combinations `e⁰ⁱ + eʲᵏ` at index
//! pairs `(i-1, i+2)`. Note `e³¹ = -e¹³`.
//!
//! On top of the algebra sit SU(2)-structures and definite triples: the wedge
//! Gram matrix `Q`, the normalized orientation form `μ`, and the metric
//! `g` induced by a triple.

use nalgebra::Matrix4;

use crate::error::{Error, Result};

pub type Vec4 = [f64; 4];

/// Eigenvalue floor used when taking square roots of Gram matrices.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Number of basis elements of Λᵏ(ℝ⁴)*.
pub const fn dim(degree: usize) -> usize {
    match degree {
        0 | 4 => 1,
        1 | 3 => 4,
        2 => 6,
        _ => 0,
    }
}

// Basis elements as (bitmask of sorted coframe indices, sign).
const B0: [(u8, f64); 1] = [(0b0000, 1.0)];
const B1: [(u8, f64); 4] = [(0b0001, 1.0), (0b0010, 1.0), (0b0100, 1.0), (0b1000, 1.0)];
const B2: [(u8, f64); 6] = [
    (0b0011, 1.0),  // 01
    (0b0101, 1.0),  // 02
    (0b1001, 1.0),  // 03
    (0b1100, 1.0),  // 23
    (0b1010, -1.0), // 31 = -13
    (0b0110, 1.0),  // 12
];
const B3: [(u8, f64); 4] = [(0b0111, 1.0), (0b1011, 1.0), (0b1101, 1.0), (0b1110, 1.0)];
const B4: [(u8, f64); 1] = [(0b1111, 1.0)];

fn basis(degree: usize) -> &'static [(u8, f64)] {
    match degree {
        0 => &B0,
        1 => &B1,
        2 => &B2,
        3 => &B3,
        _ => &B4,
    }
}

/// Position and sign of the basis element carrying a sorted monomial.
fn lookup(mask: u8) -> (usize, f64) {
    let degree = mask.count_ones() as usize;
    basis(degree)
        .iter()
        .enumerate()
        .find(|(_, (m, _))| *m == mask)
        .map(|(i, (_, s))| (i, *s))
        .expect("every mask has a basis element")
}

/// Sign of the shuffle that sorts the concatenation of two disjoint monomials.
fn merge_sign(a: u8, b: u8) -> f64 {
    let mut inversions = 0;
    for y in 0..4 {
        if b & (1 << y) != 0 {
            inversions += (a >> (y + 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn indices(mask: u8) -> impl Iterator<Item = usize> {
    (0..4).filter(move |i| mask & (1 << i) != 0)
}

/// A constant-coefficient k-form on ℝ⁴.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KForm4 {
    degree: usize,
    coeffs: [f64; 6],
}

impl KForm4 {
    pub fn zero(degree: usize) -> Result<Self> {
        if degree > 4 {
            return Err(Error::InvalidDegree { degree, what: "form on R^4" });
        }
        Ok(Self { degree, coeffs: [0.0; 6] })
    }

    /// Builds a form from coefficients in the module's basis order.
    pub fn new(degree: usize, coeffs: &[f64]) -> Result<Self> {
        let mut out = Self::zero(degree)?;
        if coeffs.len() != dim(degree) {
            return Err(Error::InvalidDegree { degree, what: "coefficient count" });
        }
        out.coeffs[..coeffs.len()].copy_from_slice(coeffs);
        Ok(out)
    }

    pub fn scalar(value: f64) -> Self {
        let mut coeffs = [0.0; 6];
        coeffs[0] = value;
        Self { degree: 0, coeffs }
    }

    pub fn one_form(c: Vec4) -> Self {
        let mut coeffs = [0.0; 6];
        coeffs[..4].copy_from_slice(&c);
        Self { degree: 1, coeffs }
    }

    pub fn two_form(c: [f64; 6]) -> Self {
        Self { degree: 2, coeffs: c }
    }

    /// The coframe element `eⁱ`.
    pub fn e(i: usize) -> Self {
        let mut c = [0.0; 4];
        c[i] = 1.0;
        Self::one_form(c)
    }

    /// `e⁰¹²³` scaled by `value`.
    pub fn volume(value: f64) -> Self {
        let mut coeffs = [0.0; 6];
        coeffs[0] = value;
        Self { degree: 4, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..dim(self.degree)]
    }

    /// Coefficient of `e⁰¹²³` for a top-degree form, zero otherwise.
    pub fn top(&self) -> f64 {
        if self.degree == 4 {
            self.coeffs[0]
        } else {
            0.0
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = *self;
        for (x, y) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let degree = self.degree + other.degree;
        if degree > 4 {
            return Err(Error::DegreeOverflow(self.degree, other.degree));
        }
        let mut out = Self::zero(degree)?;
        for (i, &(ma, sa)) in basis(self.degree).iter().enumerate() {
            let ca = self.coeffs[i];
            if ca == 0.0 {
                continue;
            }
            for (j, &(mb, sb)) in basis(other.degree).iter().enumerate() {
                let cb = other.coeffs[j];
                if cb == 0.0 || ma & mb != 0 {
                    continue;
                }
                let (k, sk) = lookup(ma | mb);
                out.coeffs[k] += ca * cb * sa * sb * sk * merge_sign(ma, mb);
            }
        }
        Ok(out)
    }

    /// Contraction `ι_u` with a vector given in the frame dual to `eⁱ`.
    pub fn interior(&self, u: &Vec4) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::InvalidDegree { degree: 0, what: "interior product" });
        }
        let mut out = Self::zero(self.degree - 1)?;
        for (i, &(m, s)) in basis(self.degree).iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            for idx in indices(m) {
                let pos = (m & ((1 << idx) - 1)).count_ones();
                let parity = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let (k, sk) = lookup(m & !(1 << idx));
                out.coeffs[k] += c * s * parity * u[idx] * sk;
            }
        }
        Ok(out)
    }

    /// Pullback under the linear substitution `eᵃ ↦ Σ_b m[a][b] ẽᵇ`.
    pub fn substitute(&self, m: &[[f64; 4]; 4]) -> Self {
        let images: Vec<KForm4> = m.iter().map(|row| KForm4::one_form(*row)).collect();
        let mut out = Self { degree: self.degree, coeffs: [0.0; 6] };
        for (i, &(mask, s)) in basis(self.degree).iter().enumerate() {
            let c = self.coeffs[i];
            if c == 0.0 {
                continue;
            }
            let mut acc = KForm4::scalar(c * s);
            for idx in indices(mask) {
                acc = acc.wedge(&images[idx]).expect("degree bounded by the source form");
            }
            out = out.add(&acc);
        }
        out
    }
}

/// Three 2-forms on ℝ⁴.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FormTriple {
    pub omega: [KForm4; 3],
}

impl FormTriple {
    pub fn new(omega: [KForm4; 3]) -> Result<Self> {
        if let Some(bad) = omega.iter().find(|w| w.degree() != 2) {
            return Err(Error::InvalidDegree { degree: bad.degree(), what: "triple member" });
        }
        Ok(Self { omega })
    }

    /// `ωᵢ = e⁰ ∧ eⁱ + eʲ ∧ eᵏ` for cyclic `(i, j, k)`.
    pub fn standard() -> Self {
        let mut omega = [KForm4::two_form([0.0; 6]); 3];
        for (i, w) in omega.iter_mut().enumerate() {
            let mut c = [0.0; 6];
            c[i] = 1.0;
            c[i + 3] = 1.0;
            *w = KForm4::two_form(c);
        }
        Self { omega }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { omega: self.omega.map(|w| w.scale(c)) }
    }

    /// `ω'ᵢ = Σⱼ mix[i][j] ωⱼ`.
    pub fn mix(&self, mix: &[[f64; 3]; 3]) -> Self {
        let mut omega = [KForm4::two_form([0.0; 6]); 3];
        for (i, w) in omega.iter_mut().enumerate() {
            for j in 0..3 {
                *w = w.add(&self.omega[j].scale(mix[i][j]));
            }
        }
        Self { omega }
    }

    pub fn substitute(&self, m: &[[f64; 4]; 4]) -> Self {
        Self { omega: self.omega.map(|w| w.substitute(m)) }
    }

    /// Raw wedge pairings `ωᵢ ∧ ωⱼ` as multiples of `e⁰¹²³`.
    pub fn wedge_matrix(&self) -> [[f64; 3]; 3] {
        let mut q = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = self.omega[i].wedge(&self.omega[j]).expect("2 + 2 = 4").top();
                q[i][j] = v;
                q[j][i] = v;
            }
        }
        q
    }

    /// Largest coefficient difference against another triple.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (0..3).fold(0.0, |m, i| m.max(self.omega[i].sub(&other.omega[i]).max_abs()))
    }
}

/// Normalized wedge Gram data of a definite triple: `ωᵢ ∧ ωⱼ = Qᵢⱼ μ`, `det Q = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramData {
    pub q: [[f64; 3]; 3],
    /// Coefficient of `μ` against `e⁰¹²³`.
    pub mu: f64,
    /// Orientation of `μ` relative to `e⁰¹²³`.
    pub sign: f64,
}

/// A symmetric positive-definite bilinear form on ℝ⁴.
///
/// `sign` records the sign of the tensor `S` the metric was extracted from,
/// so that `S = sign * g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric4 {
    pub g: [[f64; 4]; 4],
    pub sign: f64,
}

impl Metric4 {
    pub fn new(g: [[f64; 4]; 4]) -> Result<Self> {
        let scale = g.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        for a in 0..4 {
            for b in 0..a {
                if (g[a][b] - g[b][a]).abs() > 1e-14 * scale {
                    return Err(Error::NotSpd(format!("asymmetric entry ({a},{b})")));
                }
            }
        }
        let out = Self { g, sign: 1.0 };
        out.cholesky()?;
        Ok(out)
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0; 4]).expect("identity is SPD")
    }

    pub fn diagonal(d: [f64; 4]) -> Result<Self> {
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            g[i][i] = d[i];
        }
        Self::new(g)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.g.map(|row| row.map(|x| c * x)))
    }

    fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|a, b| self.g[a][b])
    }

    fn cholesky(&self) -> Result<nalgebra::Cholesky<f64, nalgebra::U4>> {
        self.matrix()
            .cholesky()
            .ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))
    }

    /// The induced inner product on covectors.
    pub fn dual(&self) -> [[f64; 4]; 4] {
        let inv = self.cholesky().expect("validated at construction").inverse();
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] = 0.5 * (inv[(a, b)] + inv[(b, a)]);
            }
        }
        out
    }

    pub fn apply(&self, u: &Vec4, v: &Vec4) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += u[a] * self.g[a][b] * v[b];
            }
        }
        s
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                m = m.max((self.g[a][b] - other.g[a][b]).abs());
            }
        }
        m
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matrix whose columns are the eigenvectors.
fn sym_eigen<const N: usize>(m: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..64 {
        let off: f64 = (0..N).flat_map(|p| (p + 1..N).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        let diag: f64 = (0..N).map(|p| a[p][p] * a[p][p]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag * 1e-4 || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    (std::array::from_fn(|i| a[i][i]), v)
}

fn min_of<const N: usize>(xs: &[f64; N]) -> f64 {
    xs.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn det3(q: &[[f64; 3]; 3]) -> f64 {
    q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1])
        - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0])
        + q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0])
}

/// Determinant of a small square matrix by partial-pivot elimination.
fn det_small(m: &mut [[f64; 4]; 4], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

/// Wedge Gram data of a triple, normalized so that `det Q = 1`.
pub fn gram(t: &FormTriple) -> Result<GramData> {
    let raw = t.wedge_matrix();
    if raw[0][0] == 0.0 {
        return Err(Error::NotDefinite("ω₁ ∧ ω₁ = 0".into()));
    }
    let det = det3(&raw);
    if det == 0.0 {
        return Err(Error::NotDefinite("degenerate wedge Gram matrix".into()));
    }
    let mu = det.cbrt();
    let q = raw.map(|row| row.map(|x| x / mu));
    let lmin = min_of(&sym_eigen(&q).0);
    if lmin <= EIGEN_FLOOR {
        return Err(Error::NotDefinite(format!("Q has eigenvalue {lmin:e}")));
    }
    Ok(GramData { q, mu, sign: mu.signum() })
}

/// `P⁻¹` for the principal square root `P` of an SPD matrix.
fn inverse_sqrt(q: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3]> {
    let (vals, vecs) = sym_eigen(q);
    if min_of(&vals) <= EIGEN_FLOOR {
        return Err(Error::NotDefinite("eigenvalue below floor".into()));
    }
    let d = vals.map(|l| 1.0 / l.sqrt());
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| vecs[i][k] * d[k] * vecs[j][k]).sum())))
}

/// Whether the triple is an SU(2)-structure: equal nonzero squares and vanishing
/// mixed wedges, relative to `tol * |ω₁²|`.
pub fn is_su2(t: &FormTriple, tol: f64) -> bool {
    let q = t.wedge_matrix();
    let s = q[0][0];
    if s == 0.0 || !s.is_finite() {
        return false;
    }
    let bound = tol * s.abs();
    (q[1][1] - s).abs() <= bound
        && (q[2][2] - s).abs() <= bound
        && q[0][1].abs() <= bound
        && q[1][2].abs() <= bound
        && q[0][2].abs() <= bound
}

/// The triple `P⁻¹ω` with unit normalized Gram matrix.
pub fn normalize(t: &FormTriple) -> Result<FormTriple> {
    let data = gram(t)?;
    Ok(t.mix(&inverse_sqrt(&data.q)?))
}

/// The signed tensor `S` of an SU(2)-structure,
/// `½ S(u,v) ω₁² = ι_uω₁ ∧ ι_vω₂ ∧ ω₃`, in the standard frame.
pub fn s_tensor(t: &FormTriple) -> [[f64; 4]; 4] {
    let vol = t.omega[0].wedge(&t.omega[0]).expect("2 + 2 = 4").top();
    let frame: [Vec4; 4] = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
    let contract1: Vec<KForm4> = frame.iter().map(|u| t.omega[0].interior(u).expect("degree 2")).collect();
    let contract2: Vec<KForm4> = frame.iter().map(|v| t.omega[1].interior(v).expect("degree 2")).collect();
    let mut s = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let top = contract1[a]
                .wedge(&contract2[b])
                .and_then(|x| x.wedge(&t.omega[2]))
                .expect("1 + 1 + 2 = 4")
                .top();
            s[a][b] = 2.0 * top / vol;
        }
    }
    for a in 0..4 {
        for b in 0..a {
            let m = 0.5 * (s[a][b] + s[b][a]);
            s[a][b] = m;
            s[b][a] = m;
        }
    }
    s
}

/// The metric induced by a definite triple.
pub fn metric_of(t: &FormTriple) -> Result<Metric4> {
    let normalized = normalize(t)?;
    let s = s_tensor(&normalized);
    let sign = if s[0][0] < 0.0 { -1.0 } else { 1.0 };
    let g = s.map(|row| row.map(|x| sign * x));
    let mut metric = Metric4::new(g).map_err(|e| Error::NotDefinite(format!("induced tensor: {e}")))?;
    metric.sign = sign;
    Ok(metric)
}

/// Norm of a form under the inner product induced by `g` on Λᵏ.
pub fn form_norm(a: &KForm4, g: &Metric4) -> Result<f64> {
    Ok(form_inner(a, a, g)?.max(0.0).sqrt())
}

/// Inner product of two forms of equal degree under the metric induced by `g`.
pub fn form_inner(a: &KForm4, b: &KForm4, g: &Metric4) -> Result<f64> {
    if a.degree() != b.degree() {
        return Err(Error::InvalidDegree { degree: b.degree(), what: "inner product partner" });
    }
    let dual = g.dual();
    let k = a.degree();
    let elems = basis(k);
    let mut total = 0.0;
    for (i, &(mi, si)) in elems.iter().enumerate() {
        if a.coeffs[i] == 0.0 {
            continue;
        }
        let ii: Vec<usize> = indices(mi).collect();
        for (j, &(mj, sj)) in elems.iter().enumerate() {
            if b.coeffs[j] == 0.0 {
                continue;
            }
            let jj: Vec<usize> = indices(mj).collect();
            let mut minor = [[0.0; 4]; 4];
            for (r, &x) in ii.iter().enumerate() {
                for (c, &y) in jj.iter().enumerate() {
                    minor[r][c] = dual[x][y];
                }
            }
            let d = if k == 0 { 1.0 } else { det_small(&mut minor, k) };
            total += a.coeffs[i] * b.coeffs[j] * si * sj * d;
        }
    }
    Ok(total)
}

/// Norm of a vector under `g`.
pub fn vector_norm(u: &Vec4, g: &Metric4) -> f64 {
    g.apply(u, u).max(0.0).sqrt()
}

/// Tightest `(lmin, lmax)` with `lmin g0 ≤ g1 ≤ lmax g0`.
pub fn compare_metrics(g0: &Metric4, g1: &Metric4) -> Result<(f64, f64)> {
    let l = g0.cholesky()?.l();
    g1.cholesky()?;
    let linv = l
        .try_inverse()
        .ok_or_else(|| Error::NotSpd("singular Cholesky factor".into()))?;
    let m = linv * g1.matrix() * linv.transpose();
    let sym: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (m[(i, j)] + m[(j, i)])));
    let vals = sym_eigen(&sym).0;
    Ok((min_of(&vals), vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn jacobi_reconstructs_near_degenerate_spectrum() {
        let q = [
            [1.2295760676492964, -2.252033808152129, -0.7445632483656698],
            [-2.252033808152129, 4.803189830870524, -0.31755128343938055],
            [-0.7445632483656698, -0.31755128343938055, 5.815754843443072],
        ];
        let (vals, vecs) = sym_eigen(&q);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| vecs[i][k] * vals[k] * vecs[j][k]).sum();
                assert!((r - q[i][j]).abs() < 1e-14, "({i},{j}) {:e}", r - q[i][j]);
            }
        }
    }

    fn e2(i: usize, j: usize) -> KForm4 {
        KForm4::e(i).wedge(&KForm4::e(j)).unwrap()
    }

    #[test]
    fn wedge_basis_orientation() {
        let v = e2(0, 1).wedge(&e2(2, 3)).unwrap();
        assert_eq!(v.degree(), 4);
        assert_eq!(v.top(), 1.0);
        assert_eq!(e2(3, 1).coeffs(), &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(e2(1, 3).coeffs(), &[0.0, 0.0, 0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn wedge_degree_overflow_is_rejected() {
        let w = e2(0, 1);
        let t = w.wedge(&KForm4::e(2)).unwrap();
        assert!(matches!(t.wedge(&w), Err(Error::DegreeOverflow(3, 2))));
    }

    #[test]
    fn standard_triple_is_orthogonal() {
        let t = FormTriple::standard();
        for i in 0..3 {
            for j in 0..3 {
                let v = t.omega[i].wedge(&t.omega[j]).unwrap().top();
                assert_eq!(v, if i == j { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn interior_examples() {
        let w = e2(0, 1);
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let e2v = [0.0, 0.0, 1.0, 0.0];
        assert_eq!(w.interior(&e0).unwrap(), KForm4::e(1));
        assert_eq!(w.interior(&e2v).unwrap().max_abs(), 0.0);
        assert!(KForm4::scalar(1.0).interior(&e0).is_err());
    }

    #[test]
    fn contraction_identity_for_standard_triple() {
        // ι_{e0}ω₁ ∧ ι_{e0}ω₂ ∧ ω₃ = e¹ ∧ e² ∧ (e⁰³ + e¹²) = e¹²⁰³ = +e⁰¹²³,
        // and ½ S(e₀,e₀) ω₁² = ½ · 1 · 2 e⁰¹²³.
        let t = FormTriple::standard();
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let lhs = t.omega[0]
            .interior(&e0)
            .unwrap()
            .wedge(&t.omega[1].interior(&e0).unwrap())
            .unwrap()
            .wedge(&t.omega[2])
            .unwrap();
        assert_eq!(lhs.top(), 1.0);
        assert_eq!(s_tensor(&t)[0][0], 1.0);
    }

    #[test]
    fn gram_examples() {
        let t = FormTriple::standard();
        let g = gram(&t).unwrap();
        assert_eq!(g.q, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert_eq!(g.mu, 2.0);
        assert_eq!(g.sign, 1.0);

        // ωᵢ ∧ ωⱼ scales by c², so μ = 2c² with Q unchanged.
        let c = 3.7;
        let g = gram(&t.scale(c)).unwrap();
        assert_relative_eq!(g.mu, 2.0 * c * c, max_relative = 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(g.q[i][j], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }

        let degenerate = FormTriple::new([t.omega[0], t.omega[1], t.omega[0]]).unwrap();
        assert!(matches!(gram(&degenerate), Err(Error::NotDefinite(_))));
    }

    #[test]
    fn su2_examples() {
        let t = FormTriple::standard();
        assert!(is_su2(&t, 1e-12));
        let mut bent = t;
        bent.omega[0] = bent.omega[0].scale(1.1);
        assert!(!is_su2(&bent, 1e-9));
        // the normalized triple P⁻¹ω has Q = I and is SU(2)
        let skew = t.mix(&[[1.0, 0.3, 0.0], [0.1, 1.2, 0.2], [0.0, -0.2, 0.8]]);
        assert!(!is_su2(&skew, 1e-9));
        assert!(is_su2(&normalize(&skew).unwrap(), 1e-12));
    }

    #[test]
    fn metric_examples() {
        let t = FormTriple::standard();
        let g = metric_of(&t).unwrap();
        assert!(g.max_abs_diff(&Metric4::identity()) < 1e-15);
        assert_eq!(g.sign, 1.0);

        // S entries of c·ω are c³ / c² = c times those of ω
        let c = 2.5;
        let g = metric_of(&t.scale(c)).unwrap();
        assert!(g.max_abs_diff(&Metric4::identity().scale(c).unwrap()) < 1e-13);

        let neg = t.scale(-1.0);
        let g = metric_of(&neg).unwrap();
        assert_eq!(g.sign, -1.0);
        assert!(g.max_abs_diff(&Metric4::identity()) < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let id = Metric4::identity();
        assert_relative_eq!(form_norm(&e2(0, 1), &id).unwrap(), 1.0);
        let t = FormTriple::standard();
        let g = metric_of(&t).unwrap();
        // |e⁰¹|² + |e²³|² with orthonormal coframe
        assert_relative_eq!(form_norm(&t.omega[0], &g).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        let a = t.omega[1].scale(0.25);
        assert_relative_eq!(
            form_norm(&a.scale(3.0), &g).unwrap(),
            3.0 * form_norm(&a, &g).unwrap(),
            max_relative = 1e-14
        );
        let bad = Metric4 { g: [[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]], sign: 1.0 };
        assert!(Metric4::new(bad.g).is_err());
    }

    #[test]
    fn norm_uses_dual_metric() {
        // g = diag(4,1,1,1): |e⁰|² = 1/4, |e⁰¹|² = 1/4
        let g = Metric4::diagonal([4.0, 1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(form_norm(&KForm4::e(0), &g).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(form_norm(&e2(0, 1), &g).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(form_norm(&KForm4::volume(1.0), &g).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn compare_metric_examples() {
        let id = Metric4::identity();
        let (lo, hi) = compare_metrics(&id, &id).unwrap();
        assert_relative_eq!(lo, 1.0, epsilon = 1e-15);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-15);
        let g0 = Metric4::diagonal([1.0, 2.0, 3.0, 0.5]).unwrap();
        let (lo, hi) = compare_metrics(&g0, &g0.scale(2.0).unwrap()).unwrap();
        assert_relative_eq!(lo, 2.0, max_relative = 1e-14);
        assert_relative_eq!(hi, 2.0, max_relative = 1e-14);
        let (lo, hi) = compare_metrics(&id, &Metric4::diagonal([1.0, 1.0, 1.0, 4.0]).unwrap()).unwrap();
        assert_relative_eq!(lo, 1.0, max_relative = 1e-14);
        assert_relative_eq!(hi, 4.0, max_relative = 1e-14);
    }

    fn two_form() -> impl Strategy<Value = KForm4> {
        proptest::array::uniform6(-1.0f64..1.0).prop_map(KForm4::two_form)
    }

    fn one_form() -> impl Strategy<Value = KForm4> {
        proptest::array::uniform4(-1.0f64..1.0).prop_map(KForm4::one_form)
    }

    proptest! {
        #[test]
        fn one_forms_anticommute(a in one_form(), b in one_form()) {
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap();
            prop_assert!(ab.add(&ba).max_abs() < 1e-15);
            prop_assert!(a.wedge(&a).unwrap().max_abs() < 1e-15);
        }

        #[test]
        fn two_forms_commute(a in two_form(), b in two_form()) {
            let ab = a.wedge(&b).unwrap().top();
            let ba = b.wedge(&a).unwrap().top();
            prop_assert!((ab - ba).abs() < 1e-14);
        }

        #[test]
        fn wedge_is_associative(a in one_form(), b in one_form(), c in two_form()) {
            let left = a.wedge(&b).unwrap().wedge(&c).unwrap().top();
            let right = a.wedge(&b.wedge(&c).unwrap()).unwrap().top();
            prop_assert!((left - right).abs() < 1e-14);
        }

        #[test]
        fn interior_squares_to_zero(a in two_form(), u in proptest::array::uniform4(-1.0f64..1.0)) {
            let once = a.interior(&u).unwrap();
            prop_assert!(once.interior(&u).unwrap().max_abs() < 1e-14);
            let three = a.wedge(&KForm4::one_form(u)).unwrap();
            prop_assert!(three.interior(&u).unwrap().interior(&u).unwrap().max_abs() < 1e-14);
        }

        #[test]
        fn interior_is_an_antiderivation(a in one_form(), b in two_form(), u in proptest::array::uniform4(-1.0f64..1.0)) {
            // ι_u(a ∧ b) = ι_u a · b - a ∧ ι_u b
            let lhs = a.wedge(&b).unwrap().interior(&u).unwrap();
            let rhs = b.scale(a.interior(&u).unwrap().coeffs()[0]).sub(&a.wedge(&b.interior(&u).unwrap()).unwrap());
            prop_assert!(lhs.sub(&rhs).max_abs() < 1e-14);
        }

        #[test]
        fn substitution_by_identity_is_trivial(a in two_form()) {
            let id = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
            prop_assert_eq!(a.substitute(&id), a);
        }
    }
}

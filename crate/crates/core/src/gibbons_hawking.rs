//! Pointwise Gibbons–Hawking geometry.
//!
//! For a positive harmonic `h` and coframe `(θ, θ₁, θ₂, θ₃)` ↦ `(e⁰, e¹, e², e³)`,
//! the triple is `ηᵢ = θᵢ ∧ θ + h θⱼ ∧ θₖ` with metric `h⁻¹θ² + h Σ θᵢ²`.
//! The moment map is the projection to the base, `dμⁱ = θᵢ`.
//!
//! Circle fibers have length [`FIBER_LEN`] and the `{±1}` quotient halves every
//! integral; densities below are per unit volume of the base torus.

use std::f64::consts::PI;

use serde::Serialize;

use crate::calibration::{self, LinearMap34};
use crate::error::{Error, Result};
use crate::forms4::{FormTriple, KForm4, Metric4};
use crate::torus_green::{HarmonicField, Point3};

/// Length of the circle fibers.
pub const FIBER_LEN: f64 = 2.0 * PI;
/// Factor from the `{±1}` quotient.
pub const QUOTIENT_HALF: f64 = 0.5;

/// Minimal distance to a pole accepted for pointwise evaluation.
pub const POLE_PROXIMITY: f64 = 1e-10;

/// Value and gradient of the (possibly shifted) harmonic function at a base point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GhPoint {
    pub x: Point3,
    /// `ε⁻¹ + h(x)` when built with a collapse parameter, else `h(x)`.
    pub h_val: f64,
    pub grad_h: Point3,
}

impl GhPoint {
    pub fn new(field: &HarmonicField, x: &Point3, eps: Option<f64>) -> Result<Self> {
        let (idx, dist) = field.nearest_pole(x);
        if dist < POLE_PROXIMITY {
            return Err(Error::AtPole { point: *x, pole: field.poles()[idx].pos });
        }
        let shift = match eps {
            Some(e) if e > 0.0 => 1.0 / e,
            Some(e) => return Err(Error::Config(format!("eps must be positive, got {e}"))),
            None => 0.0,
        };
        let h_val = shift + field.eval(x)?;
        if h_val <= 0.0 {
            return Err(Error::NotHyperKahler(h_val));
        }
        Ok(Self { x: *x, h_val, grad_h: field.grad(x)? })
    }
}

/// The Gibbons–Hawking data at one value of `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhFrame {
    pub h: f64,
    /// `ηᵢ` in the coframe `(θ, θ₁, θ₂, θ₃)`.
    pub triple: FormTriple,
    /// `diag(h⁻¹, h, h, h)`.
    pub metric: Metric4,
    /// `dμ` against the oriented orthonormal coframe `ẽ⁰ = -h^{-1/2}θ`, `ẽⁱ = h^{1/2}θᵢ`.
    pub moment_diff: LinearMap34,
    /// Substitution `θ-coframe ↦ ẽ-coframe`: row `a` expresses the `a`-th θ-covector in `ẽ`.
    pub to_orthonormal: [[f64; 4]; 4],
}

pub fn gh_frame(h: f64) -> Result<GhFrame> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NotHyperKahler(h));
    }
    let mut omega = [KForm4::two_form([0.0; 6]); 3];
    for (i, w) in omega.iter_mut().enumerate() {
        let mut c = [0.0; 6];
        c[i] = -1.0;
        c[i + 3] = h;
        *w = KForm4::two_form(c);
    }
    let triple = FormTriple::new(omega)?;
    let metric = Metric4::diagonal([1.0 / h, h, h, h])?;
    let s = h.sqrt();
    let moment_diff = LinearMap34::diagonal_block(1.0 / s);
    let to_orthonormal = [
        [-s, 0.0, 0.0, 0.0],
        [0.0, 1.0 / s, 0.0, 0.0],
        [0.0, 0.0, 1.0 / s, 0.0],
        [0.0, 0.0, 0.0, 1.0 / s],
    ];
    Ok(GhFrame { h, triple, metric, moment_diff, to_orthonormal })
}

impl GhFrame {
    /// The triple rewritten in the oriented orthonormal coframe.
    pub fn triple_orthonormal(&self) -> FormTriple {
        self.triple.substitute(&self.to_orthonormal)
    }

    /// Riemannian volume form in the θ-coframe, oriented so that `θ₁∧θ₂∧θ₃∧θ > 0`.
    pub fn volume_form(&self) -> KForm4 {
        KForm4::volume(-self.h)
    }
}

/// `tr_g(μ*g_𝕋) = 3/h`.
pub fn moment_energy_density(h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::NotHyperKahler(h));
    }
    Ok(3.0 / h)
}

/// `|Σᵢ ηᵢ ∧ A*(θⱼ∧θₖ) / vol − tr(A*A)|` for a differential `A` in the orthonormal coframe.
pub fn calibration_residual_for(frame: &GhFrame, a: &LinearMap34) -> f64 {
    let triple = frame.triple_orthonormal();
    let p = calibration::pairing(a, &triple);
    (p[0][0] + p[1][1] + p[2][2] - calibration::energy_density(a)).abs()
}

/// Calibration residual of the moment map at a base point for the collapsing triple at `eps`.
pub fn calibration_residual(field: &HarmonicField, x: &Point3, eps: f64) -> Result<f64> {
    let pt = GhPoint::new(field, x, Some(eps))?;
    let frame = gh_frame(pt.h_val)?;
    Ok(calibration_residual_for(&frame, &frame.moment_diff))
}

/// Energy, invariant-matrix and volume densities per unit base volume.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GhDensities {
    pub e: f64,
    pub i: [[f64; 3]; 3],
    pub v: f64,
}

/// Densities for the collapsing triple `ε η_H`, `H = ε⁻¹ + h`, and a map with
/// differential `a` against the orthonormal coframe of `η_H`.
pub fn densities_for(h_total: f64, eps: f64, a: &LinearMap34) -> Result<GhDensities> {
    let frame = gh_frame(h_total)?;
    Ok(densities_in_frame(&frame, &frame.triple_orthonormal(), eps, a))
}

pub(crate) fn densities_in_frame(frame: &GhFrame, triple: &FormTriple, eps: f64, a: &LinearMap34) -> GhDensities {
    let base = FIBER_LEN * QUOTIENT_HALF;
    // ε η has volume ε² H dx dθ and trace ε⁻¹ tr_η
    let e = base * eps * frame.h * calibration::energy_density(a);
    let p = calibration::pairing(a, triple);
    let i = p.map(|row| row.map(|x| base * eps * frame.h * x));
    let v = base * eps * eps * frame.h;
    GhDensities { e, i, v }
}

/// Densities of the moment map itself at a base point.
pub fn gh_densities(field: &HarmonicField, x: &Point3, eps: f64) -> Result<GhDensities> {
    let pt = GhPoint::new(field, x, Some(eps))?;
    let frame = gh_frame(pt.h_val)?;
    Ok(densities_in_frame(&frame, &frame.triple_orthonormal(), eps, &frame.moment_diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms4::{self, gram, metric_of};
    use crate::torus_green::{PoleConfig, TorusSpec};
    use approx::assert_relative_eq;

    #[test]
    fn frame_at_one() {
        let f = gh_frame(1.0).unwrap();
        assert!(f.metric.max_abs_diff(&Metric4::identity()) == 0.0);
        assert_eq!(f.triple.omega[0].coeffs(), &[-1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.moment_diff, LinearMap34::identity_block());
        assert!(f.triple_orthonormal().max_abs_diff(&FormTriple::standard()) < 1e-15);
    }

    #[test]
    fn frame_at_four() {
        let f = gh_frame(4.0).unwrap();
        assert_eq!(f.metric.g[0][0], 0.25);
        assert_eq!(f.metric.g[3][3], 4.0);
        assert_eq!(f.moment_diff, LinearMap34::diagonal_block(0.5));
        assert!(matches!(gh_frame(0.0), Err(Error::NotHyperKahler(_))));
        assert!(matches!(gh_frame(-1.0), Err(Error::NotHyperKahler(_))));
    }

    #[test]
    fn triple_is_su2_with_reversed_orientation() {
        for h in [0.01, 0.3, 1.0, 7.5, 1e4] {
            let f = gh_frame(h).unwrap();
            assert!(forms4::is_su2(&f.triple, 1e-12));
            let g = gram(&f.triple).unwrap();
            assert_eq!(g.sign, -1.0);
            let m = metric_of(&f.triple).unwrap();
            assert!(m.max_abs_diff(&f.metric) <= 1e-12 * h.max(1.0), "h = {h}");
            assert!(forms4::is_su2(&f.triple_orthonormal(), 1e-12));
            // the volume form is the orthonormal one expressed in θ
            assert_relative_eq!(
                f.volume_form().substitute(&f.to_orthonormal).top(),
                1.0,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn moment_energy_examples() {
        assert_eq!(moment_energy_density(1.0).unwrap(), 3.0);
        assert_eq!(moment_energy_density(3.0).unwrap(), 1.0);
        for h in [0.2, 1.0, 3.0, 11.0] {
            let f = gh_frame(h).unwrap();
            let e = moment_energy_density(h).unwrap();
            assert!((e - calibration::energy_density(&f.moment_diff)).abs() <= 1e-14);
            assert!((e - calibration::tau(&f.moment_diff)).abs() <= 1e-14);
        }
    }

    #[test]
    fn residual_examples() {
        let f = gh_frame(1.0).unwrap();
        assert_eq!(calibration_residual_for(&f, &f.moment_diff), 0.0);
        let f = gh_frame(2.7).unwrap();
        let mut a = f.moment_diff;
        a.a[1][0] += 0.1;
        let gap = calibration::gap_sum_of_squares(&a);
        assert!(gap > 0.0);
        assert_relative_eq!(calibration_residual_for(&f, &a), gap, max_relative = 1e-12);
    }

    #[test]
    fn density_examples() {
        let cfg = PoleConfig::neutral(TorusSpec::unit(), 0.0);
        let field = HarmonicField::with_defaults(&cfg);
        let eps = 1e-2;
        let d = gh_densities(&field, &[0.1, 0.2, 0.3], eps).unwrap();
        assert_relative_eq!(d.e, 3.0 * PI * eps, max_relative = 1e-14);
        assert_relative_eq!(d.v, PI * eps, max_relative = 1e-14);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { PI * eps } else { 0.0 };
                assert!((d.i[i][j] - expected).abs() <= 1e-15);
            }
        }
    }
}

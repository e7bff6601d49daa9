//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point<R: Rng>(rng: &mut R, lengths: [f64; 3]) -> [f64; 3] {
    [rng.gen::<f64>() * lengths[0], rng.gen::<f64>() * lengths[1], rng.gen::<f64>() * lengths[2]]
}

/// Distance by brute force over the 27 nearest lattice images.
pub fn distance_27(x: &[f64; 3], y: &[f64; 3], lengths: [f64; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                let shift = [a as f64 * lengths[0], b as f64 * lengths[1], c as f64 * lengths[2]];
                let mut d2 = 0.0;
                for i in 0..3 {
                    let d = x[i] - y[i] - ((x[i] / lengths[i]).floor() - (y[i] / lengths[i]).floor()) * lengths[i]
                        + shift[i];
                    d2 += d * d;
                }
                best = best.min(d2.sqrt());
            }
        }
    }
    best
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature to an absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    integrate(f, a, m, 0.5 * tol, depth - 1) + integrate(f, m, b, 0.5 * tol, depth - 1)
}

/// One-dimensional periodic heat kernel `(4πs)^{-1/2} Σₙ e^{-(x+nL)²/4s}` as a direct image sum.
pub fn theta_1d(x: f64, s: f64, l: f64) -> f64 {
    let x = x - l * (x / l).round();
    let width = (4.0 * s).sqrt();
    let nmax = (8.0 * width / l).ceil() as i32 + 2;
    let mut sum = 0.0;
    for n in -nmax..=nmax {
        let y = x + n as f64 * l;
        sum += (-(y * y) / (4.0 * s)).exp();
    }
    sum / (4.0 * PI * s).sqrt()
}

/// Periodic Green's function with mean zero and `G ~ 1/ρ`, by integrating the
/// neutralized heat kernel: `G = 4π ∫₀^∞ (p_s(d) − 1/V) ds`.
///
/// Uses only Gaussian image sums, with no error functions and no Fourier series.
pub fn heat_kernel_green(d: [f64; 3], lengths: [f64; 3]) -> f64 {
    let v: f64 = lengths.iter().product();
    let lmax = lengths.iter().copied().fold(0.0, f64::max);
    let rho = {
        let m: Vec<f64> = (0..3).map(|i| d[i] - lengths[i] * (d[i] / lengths[i]).round()).collect();
        (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt()
    };
    let s_min = rho * rho / 200.0;
    let s_max = 2.0 * lmax * lmax;
    let f = |u: f64| {
        let s = u.exp();
        let p = theta_1d(d[0], s, lengths[0]) * theta_1d(d[1], s, lengths[1]) * theta_1d(d[2], s, lengths[2]);
        s * (p - 1.0 / v)
    };
    4.0 * PI * (integrate(&f, s_min.ln(), s_max.ln(), 1e-14, 40) - s_min / v)
}

/// `lim_{d→0} (G(d) − 1/|d|)` by the same heat-kernel route, subtracting the free kernel.
pub fn heat_kernel_self(lengths: [f64; 3]) -> f64 {
    let v: f64 = lengths.iter().product();
    let lmin = lengths.iter().copied().fold(f64::INFINITY, f64::min);
    let lmax = lengths.iter().copied().fold(0.0, f64::max);
    let s_min = lmin * lmin / 400.0;
    let s_max = 2.0 * lmax * lmax;
    let f = |u: f64| {
        let s = u.exp();
        let p = theta_1d(0.0, s, lengths[0]) * theta_1d(0.0, s, lengths[1]) * theta_1d(0.0, s, lengths[2]);
        s * (p - (4.0 * PI * s).powf(-1.5) - 1.0 / v)
    };
    let free_tail = 2.0 * (4.0 * PI).powf(-1.5) / s_max.sqrt();
    4.0 * PI * (integrate(&f, s_min.ln(), s_max.ln(), 1e-14, 40) - s_min / v - free_tail)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..iters {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// A random balanced configuration on a box with sides in `[3, 5]`:
/// up to two pairs with `k ∈ {1, 2}` and `m` filled up to `Σm + Σk = 16`.
pub fn random_balanced_config<R: Rng>(rng: &mut R) -> hkcollapse::torus_green::PoleConfig {
    use hkcollapse::torus_green::{PoleConfig, PolePair, TorusSpec};
    loop {
        let lengths = [rng.gen_range(3.0..5.0), rng.gen_range(3.0..5.0), rng.gen_range(3.0..5.0)];
        let spec = TorusSpec::new(lengths).unwrap();
        let n = rng.gen_range(0..=2);
        let pairs: Vec<PolePair> =
            (0..n).map(|_| PolePair { p: random_point(rng, lengths), k: rng.gen_range(1..=2) }).collect();
        let ksum: u32 = pairs.iter().map(|p| p.k).sum();
        let mut m = [1u32; 8];
        let mut left = 16 - ksum - 8;
        while left > 0 {
            let j = rng.gen_range(0..8);
            if m[j] < 4 {
                m[j] += 1;
                left -= 1;
            }
        }
        if let Ok(cfg) = PoleConfig::new(spec, pairs, m, 0.0) {
            if cfg.delta0() > 0.05 {
                return cfg;
            }
        }
    }
}

pub fn demo(name: &str) -> hkcollapse::config::RunConfig {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    hkcollapse::config::RunConfig::from_path(&path).unwrap()
}

/// `∫ h` over the torus minus the `r`-balls, by the mean-value property:
/// inside each ball `h − q/ρ` is harmonic, so its ball integral is the volume
/// times its value at the centre, and `h` integrates to `c0 vol(𝕋)` overall.
pub fn h_integral_outside_balls(field: &hkcollapse::torus_green::HarmonicField, r: f64) -> f64 {
    let v = field.green().spec().volume();
    let mut total = field.c0() * v;
    for pole in field.poles() {
        let lambda = field.regular_value(&pole.pos).unwrap();
        total -= 2.0 * PI * pole.charge * r * r + 4.0 * PI / 3.0 * r.powi(3) * lambda;
    }
    total
}

//! Special functions and quadrature rules used by the kernels.

use std::f64::consts::PI;

pub use statrs::function::erf::erf;
pub use statrs::function::gamma::gamma;

/// Surface area `|S^{N-1}|` of the unit sphere in ℝ^N.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * PI.powf(n / 2.0) / gamma(n / 2.0)
}

/// Volume of the ball of radius `r` in ℝ^N.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    sphere_area(dim) * r.powi(dim as i32) / dim as f64
}

/// Fourier multiplier constant of the Riesz kernel: the transform of
/// `|x|^{-γ}` on ℝ^N is `c · |ξ|^{γ-N}` with this `c`.
pub fn riesz_symbol_constant(dim: usize, gamma_exp: f64) -> f64 {
    let n = dim as f64;
    PI.powf(n / 2.0) * 2f64.powf(n - gamma_exp) * gamma((n - gamma_exp) / 2.0)
        / gamma(gamma_exp / 2.0)
}

const BERNOULLI_OVER_FACT: [f64; 7] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
];

/// Riemann zeta function for real `s != 1` by Euler–Maclaurin summation.
///
/// Accurate to ~1e-14 for `s` in `[-4, 10]`, which covers the
/// `ζ(-β)`, `β ∈ [0, 2]` needed by the corrected lattice sums.
pub fn zeta(s: f64) -> f64 {
    assert!((s - 1.0).abs() > 1e-12, "zeta pole at s = 1");
    let n = 24usize;
    let nf = n as f64;
    let mut acc: f64 = (1..n).map(|k| (k as f64).powf(-s)).sum();
    acc += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    let mut rising = s;
    let mut npow = nf.powf(-s - 1.0);
    for (k, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        acc += c * rising * npow;
        let m = 2.0 * k as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        npow /= nf * nf;
    }
    acc
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}

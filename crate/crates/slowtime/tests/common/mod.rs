//! Oracles shared by the integration suites: literal, definition-level
//! computations kept deliberately independent of the library's fast paths.

#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;
use slowtime::mat::CMat;
use slowtime::types::{Code, DesignConfig};

/// One cross-ambiguity value straight from the definition:
/// `r(l, p) = sum_n x_n^* y_{(n+l) mod N} exp(-j 2 pi n p / N_f)` with
/// 1-based `n`.
pub fn pcaf_literal(x: &Code, y: &Code, lag: isize, p: isize, n_f: usize) -> Complex64 {
    let n_len = x.len() as isize;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..n_len {
        let shifted = (n + lag).rem_euclid(n_len) as usize;
        let phase = -TAU * ((n + 1) as f64) * (p as f64) / (n_f as f64);
        acc += x.entries()[n as usize].conj()
            * y.entries()[shifted]
            * Complex64::from_polar(1.0, phase);
    }
    acc
}

/// Full grid of literal values in the library's layout: rows over
/// `lag = -(N-1)..=N-1`, columns over `p = -P..=P`.
pub fn grid_literal(x: &Code, y: &Code, cfg: &DesignConfig) -> Vec<Complex64> {
    let ni = cfg.n_len as isize;
    let pi = cfg.p_max as isize;
    let mut out = Vec::with_capacity((2 * cfg.n_len - 1) * (2 * cfg.p_max + 1));
    for lag in (1 - ni)..=(ni - 1) {
        for p in -pi..=pi {
            out.push(pcaf_literal(x, y, lag, p, cfg.n_f));
        }
    }
    out
}

/// Sum of `|r(l, p)|^2` over the literal grid.
pub fn objective_literal(x: &Code, y: &Code, cfg: &DesignConfig) -> f64 {
    grid_literal(x, y, cfg).iter().map(|v| v.norm_sqr()).sum()
}

/// The operator `A(l, p) = Diag(f_p) C_l` as an explicit matrix, straight
/// from the definition.
pub fn operator_literal(n_len: usize, n_f: usize, lag: isize, p: isize) -> CMat {
    let ni = n_len as isize;
    let mut a = CMat::zeros(n_len, n_len);
    for n in 0..ni {
        let col = (n + lag).rem_euclid(ni) as usize;
        let phase = -TAU * ((n + 1) as f64) * (p as f64) / (n_f as f64);
        a[(n as usize, col)] = Complex64::from_polar(1.0, phase);
    }
    a
}

/// Quadratic-form matrix accumulated rank-one by rank-one from the
/// definition of the objective, independent of the library's builders.
///
/// For `acts_on_x` the matrix satisfies `x^H B x = sum |r_xy|^2` with the
/// source taken as `y`; for the other side `y^H B y` with source `x`.
pub fn b_rank_one_literal(source: &Code, acts_on_x: bool, cfg: &DesignConfig) -> CMat {
    let n = cfg.n_len;
    let ni = n as isize;
    let pi = cfg.p_max as isize;
    let mut b = CMat::zeros(n, n);
    for lag in (1 - ni)..=(ni - 1) {
        for p in -pi..=pi {
            let mut a = vec![Complex64::new(0.0, 0.0); n];
            for m in 0..ni {
                if acts_on_x {
                    // r = x^H a with a_m = f_p[m] y_{(m+l) mod N}.
                    let phase = -TAU * ((m + 1) as f64) * (p as f64) / (cfg.n_f as f64);
                    let src = (m + lag).rem_euclid(ni) as usize;
                    a[m as usize] = Complex64::from_polar(1.0, phase) * source.entries()[src];
                } else {
                    // r = a^H y with a_m = conj(f_p[(m-l) mod N]) x_{(m-l) mod N}
                    // after re-indexing the sum over the shifted variable.
                    let src = (m - lag).rem_euclid(ni) as usize;
                    let phase_src = -TAU * ((src + 1) as f64) * (p as f64) / (cfg.n_f as f64);
                    a[m as usize] =
                        Complex64::from_polar(1.0, phase_src).conj() * source.entries()[src];
                }
            }
            b.rank_one_update(Complex64::new(1.0, 0.0), &a, &a);
        }
    }
    b
}

/// Dirichlet closed form for the Doppler-window kernel
/// `g(d) = sum_{p=-P..P} exp(-j 2 pi d p / N_f)`, real by symmetry.
pub fn dirichlet_kernel(d: f64, p_max: usize, n_f: usize) -> f64 {
    let x = std::f64::consts::PI * d / (n_f as f64);
    if x.sin().abs() < 1e-12 {
        (2 * p_max + 1) as f64
    } else {
        ((2 * p_max + 1) as f64 * x).sin() / x.sin()
    }
}

/// Largest magnitude of the elementwise difference between two complex
/// slices.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Frobenius distance between two matrices.
pub fn mat_distance(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let mut acc = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    acc.sqrt()
}

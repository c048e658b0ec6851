//! The periodic cross-ambiguity function and its quadratic-form matrices.
//!
//! For codes `x`, `y` of length `N` the grid value at lag `l` and Doppler
//! bin `p` is
//!
//! ```text
//! r(l, p) = sum_{n=1..N} conj(x_n) y_{(n+l) mod N} exp(-j 2 pi n p / N_f)
//! ```
//!
//! evaluated on `l in -(N-1)..=(N-1)`, `p in -P..=P`. Rows repeat with
//! period `N` in `l`; this module computes each distinct row once with an
//! `N_f`-point FFT and mirrors it, so the periodicity holds bitwise.
//!
//! The total grid energy `sum |r(l, p)|^2` is a quartic function of either
//! code. Freezing one code makes it a quadratic form `z^H B z` in the
//! other; [`build_b_fast`] assembles `B` in `O(N^2 + N P)` by collapsing
//! the lag and Doppler sums analytically, and [`build_b_naive`] assembles
//! the same matrix by literal rank-one accumulation over every `(l, p)`
//! pair. The two builders are kept deliberately independent so each one
//! checks the other.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;

use crate::exec::{self, ExecMode};
use crate::mat::{norm_sqr_kahan, CMat};
use crate::metrics::amplitude_db;
use crate::types::{Code, DesignConfig};
use crate::{Error, Result};

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Apply the cyclic shift operator: entry `n` of the result is
/// `z[(n + lag) mod N]`. Any integer lag is accepted; the operator has
/// period `N`.
pub fn shift_matrix_apply(z: &[Complex64], lag: isize) -> Vec<Complex64> {
    let n = z.len();
    if n == 0 {
        return Vec::new();
    }
    let ni = n as isize;
    (0..ni)
        .map(|m| z[(m + lag).rem_euclid(ni) as usize])
        .collect()
}

/// The Doppler phasor vector `f_p`: entry `n` (0-based) is
/// `exp(-j 2 pi (n+1) p / N_f)`, matching the 1-based pulse index in the
/// grid definition.
pub fn doppler_steering(n_len: usize, p: isize, n_f: usize) -> Vec<Complex64> {
    (0..n_len)
        .map(|n| Complex64::from_polar(1.0, -TAU * ((n + 1) as f64) * (p as f64) / (n_f as f64)))
        .collect()
}

/// A sampled cross-ambiguity grid: `2N-1` lag rows by `2P+1` Doppler
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PcafGrid {
    n_len: usize,
    p_max: usize,
    n_f: usize,
    /// Row-major, row `lag + (N-1)`, column `p + P`.
    data: Vec<Complex64>,
}

impl PcafGrid {
    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn n_f(&self) -> usize {
        self.n_f
    }

    /// Lags along the row axis, `-(N-1)..=(N-1)`.
    pub fn lags(&self) -> impl Iterator<Item = isize> {
        let ni = self.n_len as isize;
        (1 - ni)..=(ni - 1)
    }

    /// Doppler bins along the column axis, `-P..=P`.
    pub fn bins(&self) -> impl Iterator<Item = isize> {
        let p = self.p_max as isize;
        -p..=p
    }

    pub fn contains(&self, lag: isize, bin: isize) -> bool {
        lag.unsigned_abs() < self.n_len && bin.unsigned_abs() <= self.p_max
    }

    /// Grid value at `(lag, bin)`. Panics outside the stored ranges; use
    /// [`PcafGrid::contains`] first when the indices are external input.
    pub fn value(&self, lag: isize, bin: isize) -> Complex64 {
        assert!(
            self.contains(lag, bin),
            "grid index (lag {lag}, bin {bin}) outside ({} x {})",
            self.n_len,
            self.p_max
        );
        let row = (lag + self.n_len as isize - 1) as usize;
        let col = (bin + self.p_max as isize) as usize;
        self.data[row * (2 * self.p_max + 1) + col]
    }

    /// All values in row-major order; the layout follows
    /// [`PcafGrid::lags`] then [`PcafGrid::bins`].
    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest magnitude over the whole grid.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Write `l,p,re,im` rows (with header) in lag-major order.
    pub fn write_complex_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "l,p,re,im")?;
        for lag in self.lags() {
            for bin in self.bins() {
                let v = self.value(lag, bin);
                writeln!(out, "{lag},{bin},{},{}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Write `l,p,db` rows (with header), magnitudes in dB relative to the
    /// mainlobe value `N` of a matched pair.
    pub fn write_db_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "l,p,db")?;
        let reference = self.n_len as f64;
        for lag in self.lags() {
            for bin in self.bins() {
                let db = amplitude_db(self.value(lag, bin).norm(), reference);
                writeln!(out, "{lag},{bin},{db}")?;
            }
        }
        Ok(())
    }
}

fn check_code(code: &Code, cfg: &DesignConfig, name: &str) -> Result<()> {
    if code.len() != cfg.n_len {
        return Err(Error::LengthMismatch(format!(
            "{name} has length {}, config n_len is {}",
            code.len(),
            cfg.n_len
        )));
    }
    Ok(())
}

/// Evaluate the cross-ambiguity grid of `(x, y)` under `cfg`, parallel by
/// default.
pub fn pcaf_grid(x: &Code, y: &Code, cfg: &DesignConfig) -> Result<PcafGrid> {
    pcaf_grid_with_mode(x, y, cfg, ExecMode::default())
}

/// [`pcaf_grid`] with an explicit execution mode. Both modes produce
/// bit-identical grids.
pub fn pcaf_grid_with_mode(
    x: &Code,
    y: &Code,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<PcafGrid> {
    cfg.validate()?;
    check_code(x, cfg, "x")?;
    check_code(y, cfg, "y")?;
    let n = cfg.n_len;
    let n_f = cfg.n_f;
    let p_max = cfg.p_max as isize;
    let fft = rustfft::FftPlanner::new().plan_fft_forward(n_f);
    let xs = x.entries();
    let ys = y.entries();

    // One FFT per distinct shift s in 0..N; the spectrum of
    // conj(x) .* shift_s(y), zero-padded to N_f, evaluated at bin p and
    // rotated by exp(-j 2 pi p / N_f), is exactly r(s, p).
    let rows: Vec<Vec<Complex64>> = exec::map_indexed(mode, n, |s| {
        let mut buf = vec![CZERO; n_f];
        let mut scratch = vec![CZERO; fft.get_inplace_scratch_len()];
        for m in 0..n {
            buf[m] = xs[m].conj() * ys[(m + s) % n];
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        (-p_max..=p_max)
            .map(|p| {
                let rot = Complex64::from_polar(1.0, -TAU * (p as f64) / (n_f as f64));
                rot * buf[p.rem_euclid(n_f as isize) as usize]
            })
            .collect()
    });

    let bins = 2 * cfg.p_max + 1;
    let mut data = vec![CZERO; (2 * n - 1) * bins];
    for (s, row) in rows.iter().enumerate() {
        // Lag s lives in the upper half; lag s - N mirrors it exactly.
        let hi = s + n - 1;
        data[hi * bins..(hi + 1) * bins].copy_from_slice(row);
        if s >= 1 {
            let lo = s - 1;
            data[lo * bins..(lo + 1) * bins].copy_from_slice(row);
        }
    }
    Ok(PcafGrid {
        n_len: n,
        p_max: cfg.p_max,
        n_f,
        data,
    })
}

/// Total grid energy `sum_{l,p} |r(l, p)|^2` over the full lag range and
/// the Doppler band of `cfg`, accumulated with compensated summation in a
/// fixed order.
pub fn objective_siso(x: &Code, y: &Code, cfg: &DesignConfig) -> Result<f64> {
    objective_siso_with_mode(x, y, cfg, ExecMode::default())
}

/// [`objective_siso`] with an explicit execution mode.
pub fn objective_siso_with_mode(
    x: &Code,
    y: &Code,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<f64> {
    let grid = pcaf_grid_with_mode(x, y, cfg, mode)?;
    Ok(norm_sqr_kahan(grid.values()))
}

/// Which code a quadratic-form matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BSide {
    /// Built from `y`; satisfies `x^H B x = objective(x, y)`.
    ActsOnX,
    /// Built from `x`; satisfies `y^H B y = objective(x, y)`.
    ActsOnY,
}

/// A validated Hermitian matrix used as a quadratic form.
#[derive(Debug, Clone)]
pub struct QuadFormMatrix {
    mat: CMat,
}

/// Relative Hermitian-defect budget accepted by
/// [`QuadFormMatrix::from_hermitian`]. Assembly noise sits many orders
/// below this; a defect above it means a builder bug, not roundoff.
pub const HERMITIAN_DEFECT_TOL: f64 = 1e-10;

impl QuadFormMatrix {
    /// Wrap a matrix after checking it is square and Hermitian within
    /// [`HERMITIAN_DEFECT_TOL`] relative to its Frobenius norm, then
    /// canonicalize to exact Hermitian symmetry.
    pub fn from_hermitian(mut mat: CMat) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::InvalidDimension(format!(
                "quadratic form must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let scale = mat.frobenius().max(1.0);
        let defect = mat.hermitian_defect();
        if !defect.is_finite() || !scale.is_finite() {
            return Err(Error::NonFinite(
                "quadratic-form matrix contains non-finite entries".into(),
            ));
        }
        if defect > HERMITIAN_DEFECT_TOL * scale {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian: defect {defect:.3e} exceeds {:.3e}",
                HERMITIAN_DEFECT_TOL * scale
            )));
        }
        mat.symmetrize_hermitian();
        Ok(QuadFormMatrix { mat })
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn mul_vec(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.mat.mul_vec(z)
    }

    /// `z^H B z`, real by Hermitian symmetry.
    pub fn quad_form(&self, z: &[Complex64]) -> f64 {
        self.mat.quad_form(z).re
    }

    pub fn frobenius(&self) -> f64 {
        self.mat.frobenius()
    }

    /// Largest eigenvalue by dense Hermitian eigensolve.
    pub fn largest_eigenvalue(&self) -> f64 {
        let n = self.n();
        let m = nalgebra::DMatrix::from_row_slice(n, n, self.mat.data());
        let eig = nalgebra::SymmetricEigen::new(m);
        eig.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Assemble the quadratic form by literal rank-one accumulation over every
/// `(l, p)` pair: `B = sum a a^H` with `a` the steering-masked shifted
/// code. Cost `O(N^3 P)`; this is the reference the fast builder is
/// checked against, so it stays a direct transcription.
pub fn build_b_naive(source: &Code, side: BSide, cfg: &DesignConfig) -> Result<QuadFormMatrix> {
    cfg.validate()?;
    check_code(source, cfg, "source")?;
    let n = cfg.n_len;
    let ni = n as isize;
    let p_max = cfg.p_max as isize;
    let src = source.entries();
    let mut b = CMat::zeros(n, n);
    for lag in (1 - ni)..=(ni - 1) {
        for p in -p_max..=p_max {
            let f = doppler_steering(n, p, cfg.n_f);
            let a: Vec<Complex64> = match side {
                BSide::ActsOnX => {
                    // r = x^H a with a = f_p .* shift_l(y).
                    let sh = shift_matrix_apply(src, lag);
                    (0..n).map(|m| f[m] * sh[m]).collect()
                }
                BSide::ActsOnY => {
                    // r = a^H' coupling on y: a = shift_{-l}(x .* conj(f_p)).
                    let masked: Vec<Complex64> = (0..n).map(|m| src[m] * f[m].conj()).collect();
                    shift_matrix_apply(&masked, -lag)
                }
            };
            b.rank_one_update(Complex64::new(1.0, 0.0), &a, &a);
        }
    }
    QuadFormMatrix::from_hermitian(b)
}

/// Assemble the quadratic form in `O(N^2 + N P)` using the collapsed lag
/// and Doppler sums, parallel by default.
pub fn build_b_fast(source: &Code, side: BSide, cfg: &DesignConfig) -> Result<QuadFormMatrix> {
    build_b_fast_with_mode(source, side, cfg, ExecMode::default())
}

/// [`build_b_fast`] with an explicit execution mode.
pub fn build_b_fast_with_mode(
    source: &Code,
    side: BSide,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<QuadFormMatrix> {
    cfg.validate()?;
    check_code(source, cfg, "source")?;
    let n = cfg.n_len;
    let ni = n as isize;
    let p_max = cfg.p_max as isize;
    let n_f = cfg.n_f as f64;
    let src = source.entries();

    // Doppler kernel by index difference: g[d] = sum_{p=-P..P}
    // exp(-j 2 pi d p / N_f). The sum is real because p and -p pair up.
    let g: Vec<f64> = exec::map_indexed(mode, n, |d| {
        let mut acc = CZERO;
        for p in -p_max..=p_max {
            acc += Complex64::from_polar(1.0, -TAU * (d as f64) * (p as f64) / n_f);
        }
        acc.re
    });

    let rows: Vec<Vec<Complex64>> = match side {
        BSide::ActsOnX => {
            // Periodic autocorrelation of the source at every cyclic shift.
            let c: Vec<Complex64> = exec::map_indexed(mode, n, |d| {
                (0..n).map(|u| src[u] * src[(u + d) % n].conj()).sum()
            });
            // The lag sum over -(N-1)..=(N-1) covers each residue class
            // twice except l = 0, hence the 2 c - y y^H combination.
            exec::map_indexed(mode, n, |m| {
                (0..n)
                    .map(|v| {
                        let gd = g[(m as isize - v as isize).unsigned_abs()];
                        let cyc = c[(v as isize - m as isize).rem_euclid(ni) as usize];
                        gd * (2.0 * cyc - src[m] * src[v].conj())
                    })
                    .collect()
            })
        }
        BSide::ActsOnY => {
            // Wrap-diagonal sums of the masked outer product
            // R[a][b] = x_a conj(x_b) g[|a - b|]; the wrap keeps the
            // integer index difference inside g, which is why this side is
            // not a plain circulant Hadamard product.
            let h: Vec<Complex64> = exec::map_indexed(mode, n, |d| {
                (0..n)
                    .map(|a| {
                        let b = (a as isize - d as isize).rem_euclid(ni) as usize;
                        let gd = g[(a as isize - b as isize).unsigned_abs()];
                        src[a] * src[b].conj() * gd
                    })
                    .sum()
            });
            exec::map_indexed(mode, n, |u| {
                (0..n)
                    .map(|v| {
                        let hd = h[(u as isize - v as isize).rem_euclid(ni) as usize];
                        let gd = g[(u as isize - v as isize).unsigned_abs()];
                        2.0 * hd - src[u] * src[v].conj() * gd
                    })
                    .collect()
            })
        }
    };

    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        data.extend_from_slice(&row);
    }
    QuadFormMatrix::from_hermitian(CMat::from_vec(n, n, data)?)
}

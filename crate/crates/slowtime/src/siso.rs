//! Two-radar, one-waveform-each code design.
//!
//! Two routes to a low cross-ambiguity pair:
//!
//! - [`doppler_shift_pair`] is the closed-form baseline: an all-ones code
//!   against an alternating-sign code. It translates the interferer by half
//!   the Doppler grid, which clears the band only when the victim's
//!   detection band is narrower than half the pulse-repetition frequency.
//! - [`design_siso`] minimizes the banded cross-ambiguity energy directly
//!   by alternating minimization: with one code frozen the objective is a
//!   quadratic form in the other, and each phase-only inner step
//!   monotonically reduces it.
//!
//! The inner step is a power-method-like iteration on `D = gamma I - B`:
//! for `gamma` above the largest eigenvalue of `B`, replacing each entry of
//! `z` by the phase of `(D z)` at that entry cannot increase `z^H B z`
//! over unit-modulus vectors. The iteration is cheap (one matrix-vector
//! product per sweep) and keeps every iterate exactly unimodular.

use num_complex::Complex64;

use crate::exec::ExecMode;
use crate::pcaf::{build_b_fast_with_mode, objective_siso_with_mode, BSide, QuadFormMatrix};
use crate::types::{derive_seed, random_unimodular_code, Code, DesignConfig, GammaMode};
use crate::{Error, Result};

/// The closed-form pair: `x` all ones, `y` alternating `+1, -1, ...`.
/// Requires even length, otherwise the alternation breaks periodicity.
pub fn doppler_shift_pair(n_len: usize) -> Result<(Code, Code)> {
    if n_len < 2 || n_len % 2 != 0 {
        return Err(Error::InvalidDimension(format!(
            "the alternating pair needs an even length of at least 2, got {n_len}"
        )));
    }
    let x = Code::ones(n_len)?;
    let phases: Vec<f64> = (0..n_len)
        .map(|k| {
            if k % 2 == 0 {
                0.0
            } else {
                std::f64::consts::PI
            }
        })
        .collect();
    let y = Code::from_phases(&phases)?;
    Ok((x, y))
}

/// Analytic zero-delay cut magnitude of the alternating pair, indexed by
/// `p mod n_f`:
///
/// ```text
/// |r(0, p)| = | sin(N pi (f + 1/2)) / sin(pi (f + 1/2)) |,  f = p / N_f
/// ```
///
/// with the removable singularity at `f + 1/2` integer filled by the limit
/// `N`. The peak sits at `p = +-N_f / 2`: the pair moves the interferer
/// response half the grid away from zero Doppler.
pub fn doppler_shift_cut(n_len: usize, n_f: usize) -> Vec<f64> {
    let n = n_len as f64;
    (0..n_f)
        .map(|k| {
            let f = k as f64 / n_f as f64;
            let theta = std::f64::consts::PI * (f + 0.5);
            let den = theta.sin();
            if den.abs() < 1e-12 {
                n
            } else {
                ((n * theta).sin() / den).abs()
            }
        })
        .collect()
}

/// Magnitude of the first sidelobe of the alternating pair's cut,
/// `1 / sin(3 pi / (2 N))`.
pub fn first_sidelobe_level(n_len: usize) -> f64 {
    1.0 / (3.0 * std::f64::consts::PI / (2.0 * n_len as f64)).sin()
}

/// Whether the detection band fits in the half of the Doppler grid the
/// alternating pair clears: `4 f_dmax < PRF`, strictly.
pub fn prf_condition_ok(f_d_max_hz: f64, t_c_s: f64) -> bool {
    4.0 * f_d_max_hz < 1.0 / t_c_s
}

/// Diagonal loading level for the phase iteration: a certified upper bound
/// on the largest eigenvalue of `b`, with 0.1 percent headroom so
/// `gamma I - B` stays strictly positive definite.
pub fn gamma_bound(b: &QuadFormMatrix, mode: GammaMode) -> f64 {
    match mode {
        GammaMode::Frobenius => 1.001 * b.frobenius(),
        GammaMode::Exact => 1.001 * b.largest_eigenvalue(),
    }
}

/// Result of a phase-only inner solve.
#[derive(Debug, Clone)]
pub struct PmliOutcome {
    pub z: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Iterate `z <- phase(D z)` entrywise until the largest per-entry phase
/// move drops below `inner_tol` or `inner_cap` sweeps elapse.
///
/// A zero product entry keeps its previous phase: any phase is optimal
/// there, and retaining the old one keeps the sweep a descent step. With
/// `pin_last` the final entry is held at its starting value, which leaves
/// the monotonicity argument intact because the remaining entries still
/// each maximize their own term.
pub fn pmli_solve<F>(
    apply_d: F,
    start: &[Complex64],
    inner_tol: f64,
    inner_cap: usize,
    pin_last: bool,
) -> PmliOutcome
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut z = start.to_vec();
    let free = if pin_last { z.len() - 1 } else { z.len() };
    for sweep in 1..=inner_cap {
        let w = apply_d(&z);
        let mut max_move = 0.0f64;
        for k in 0..free {
            if w[k].norm() == 0.0 {
                continue;
            }
            let new = Complex64::from_polar(1.0, w[k].arg());
            let step = (new * z[k].conj()).arg().abs();
            max_move = max_move.max(step);
            z[k] = new;
        }
        if max_move < inner_tol {
            return PmliOutcome {
                z,
                iterations: sweep,
                converged: true,
            };
        }
    }
    PmliOutcome {
        z,
        iterations: inner_cap,
        converged: false,
    }
}

/// Which codes the alternating minimizer is allowed to move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMode {
    /// Alternate between the two codes.
    Paired,
    /// Keep `y` fixed; shape only `x`. Used when the other radar's code is
    /// known but not negotiable.
    SingleSided,
}

/// Outcome of [`design_siso`].
#[derive(Debug, Clone)]
pub struct SisoDesignResult {
    pub x: Code,
    pub y: Code,
    /// Objective after initialization and after every completed outer
    /// iteration; non-increasing up to roundoff.
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
    /// Whether the relative objective change fell below `outer_tol` before
    /// the cap.
    pub converged: bool,
}

impl SisoDesignResult {
    pub fn final_objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace always holds the initial objective")
    }
}

/// Minimize the banded cross-ambiguity energy of a code pair, starting from
/// `x0` / `y0` when given and from seeded random codes otherwise.
pub fn design_siso(
    cfg: &DesignConfig,
    x0: Option<&Code>,
    y0: Option<&Code>,
    mode: DesignMode,
) -> Result<SisoDesignResult> {
    design_siso_with_mode(cfg, x0, y0, mode, ExecMode::default())
}

/// [`design_siso`] with an explicit execution mode; results are identical
/// between modes.
pub fn design_siso_with_mode(
    cfg: &DesignConfig,
    x0: Option<&Code>,
    y0: Option<&Code>,
    mode: DesignMode,
    exec: ExecMode,
) -> Result<SisoDesignResult> {
    cfg.validate()?;
    let mut x = match x0 {
        Some(c) => c.clone(),
        None => random_unimodular_code(cfg.n_len, derive_seed(cfg.seed, 0))?,
    };
    let mut y = match y0 {
        Some(c) => c.clone(),
        None => random_unimodular_code(cfg.n_len, derive_seed(cfg.seed, 1))?,
    };
    if x.len() != cfg.n_len || y.len() != cfg.n_len {
        return Err(Error::LengthMismatch(format!(
            "starting codes must have length n_len = {}, got x: {}, y: {}",
            cfg.n_len,
            x.len(),
            y.len()
        )));
    }

    let j0 = objective_siso_with_mode(&x, &y, cfg, exec)?;
    if !j0.is_finite() {
        return Err(Error::NonFinite("initial objective is not finite".into()));
    }
    let mut trace = vec![j0];
    let mut converged = false;
    let mut outer_done = 0;

    for _ in 1..=cfg.outer_cap {
        x = minimize_one_side(&y, &x, BSide::ActsOnX, cfg, exec)?;
        if mode == DesignMode::Paired {
            y = minimize_one_side(&x, &y, BSide::ActsOnY, cfg, exec)?;
        }
        let j = objective_siso_with_mode(&x, &y, cfg, exec)?;
        if !j.is_finite() {
            return Err(Error::NonFinite("objective became non-finite".into()));
        }
        let prev = *trace.last().expect("trace is non-empty");
        trace.push(j);
        outer_done += 1;
        if (j - prev).abs() <= cfg.outer_tol * j0 {
            converged = true;
            break;
        }
    }

    Ok(SisoDesignResult {
        x,
        y,
        objective_trace: trace,
        outer_iterations: outer_done,
        converged,
    })
}

/// One block update: freeze `fixed`, rebuild the quadratic form, and run
/// the phase iteration from the current value of the moving code.
fn minimize_one_side(
    fixed: &Code,
    moving: &Code,
    side: BSide,
    cfg: &DesignConfig,
    exec: ExecMode,
) -> Result<Code> {
    let b = build_b_fast_with_mode(fixed, side, cfg, exec)?;
    let gamma = gamma_bound(&b, cfg.gamma_mode);
    if !gamma.is_finite() {
        return Err(Error::NonFinite(
            "diagonal loading level is not finite".into(),
        ));
    }
    let apply_d = |z: &[Complex64]| {
        let mut w = b.mul_vec(z);
        for (wk, zk) in w.iter_mut().zip(z) {
            *wk = gamma * zk - *wk;
        }
        w
    };
    let out = pmli_solve(
        apply_d,
        moving.entries(),
        cfg.inner_tol,
        cfg.inner_cap,
        false,
    );
    Code::from_entries(out.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{psl_db, RegionSpec};
    use crate::pcaf::{objective_siso, pcaf_grid};

    #[test]
    fn alternating_pair_shapes() {
        let (x, y) = doppler_shift_pair(8).unwrap();
        assert!(x.entries().iter().all(|e| (e.re - 1.0).abs() < 1e-15));
        assert!((y.entries()[0].re - 1.0).abs() < 1e-15);
        assert!((y.entries()[1].re + 1.0).abs() < 1e-15);
        assert!(doppler_shift_pair(7).is_err());
        assert!(doppler_shift_pair(0).is_err());
    }

    #[test]
    fn cut_peak_sits_at_half_grid() {
        let n = 16;
        let n_f = 32;
        let cut = doppler_shift_cut(n, n_f);
        assert_eq!(cut.len(), n_f);
        assert!((cut[n_f / 2] - n as f64).abs() < 1e-9);
        assert!(cut[0] < 1e-9, "zero-Doppler response should vanish");
        let analytic_grid = {
            let cfg = DesignConfig {
                n_len: n,
                p_max: n_f / 2 - 1,
                n_f,
                ..DesignConfig::default_for(n)
            };
            let (x, y) = doppler_shift_pair(n).unwrap();
            pcaf_grid(&x, &y, &cfg).unwrap()
        };
        for p in 0..(n_f / 2 - 1) as isize {
            let got = analytic_grid.value(0, p).norm();
            let want = cut[p.rem_euclid(n_f as isize) as usize];
            assert!((got - want).abs() < 1e-9, "bin {p}: {got} vs {want}");
        }
    }

    #[test]
    fn first_sidelobe_matches_cut_sample() {
        // With N_f = 2N the first sidelobe sits three bins off the peak.
        let n = 64;
        let n_f = 128;
        let cut = doppler_shift_cut(n, n_f);
        let sll = first_sidelobe_level(n);
        assert!((cut[n_f / 2 + 3] - sll).abs() < 1e-9);
        assert!((cut[n_f / 2 - 3] - sll).abs() < 1e-9);
    }

    #[test]
    fn prf_condition_is_strict() {
        assert!(prf_condition_ok(4999.0, 50.0e-6));
        assert!(!prf_condition_ok(5000.0, 50.0e-6));
        assert!(!prf_condition_ok(6000.0, 50.0e-6));
    }

    #[test]
    fn pmli_finds_the_phase_of_a_rank_one_form() {
        // B = a a^H: minimizing z^H B z over unimodular z pushes z toward
        // the orthogonal complement of a, so the quadratic form must drop
        // from a generic start.
        let a: Vec<Complex64> = (0..6)
            .map(|k| Complex64::from_polar(1.0, 0.7 * k as f64))
            .collect();
        let n = a.len();
        let mut b = crate::mat::CMat::zeros(n, n);
        b.rank_one_update(Complex64::new(1.0, 0.0), &a, &a);
        let q = QuadFormMatrix::from_hermitian(b).unwrap();
        let gamma = gamma_bound(&q, GammaMode::Frobenius);
        let start: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 0.3 * k as f64))
            .collect();
        let before = q.quad_form(&start);
        let apply = |z: &[Complex64]| {
            let mut w = q.mul_vec(z);
            for (wk, zk) in w.iter_mut().zip(z) {
                *wk = gamma * zk - *wk;
            }
            w
        };
        let out = pmli_solve(apply, &start, 1e-10, 500, false);
        let after = q.quad_form(&out.z);
        assert!(after <= before + 1e-9, "{after} vs {before}");
        assert!(out.z.iter().all(|e| (e.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pinned_solve_keeps_the_last_entry() {
        let a: Vec<Complex64> = (0..5)
            .map(|k| Complex64::from_polar(1.0, 1.1 * k as f64))
            .collect();
        let n = a.len();
        let mut b = crate::mat::CMat::zeros(n, n);
        b.rank_one_update(Complex64::new(1.0, 0.0), &a, &a);
        let q = QuadFormMatrix::from_hermitian(b).unwrap();
        let gamma = gamma_bound(&q, GammaMode::Frobenius);
        let start = vec![Complex64::new(1.0, 0.0); n];
        let apply = |z: &[Complex64]| {
            let mut w = q.mul_vec(z);
            for (wk, zk) in w.iter_mut().zip(z) {
                *wk = gamma * zk - *wk;
            }
            w
        };
        let out = pmli_solve(apply, &start, 1e-10, 200, true);
        assert_eq!(out.z[n - 1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn design_descends_and_beats_random_start() {
        let cfg = DesignConfig {
            n_len: 16,
            p_max: 6,
            n_f: 32,
            outer_cap: 40,
            seed: 3,
            ..DesignConfig::default_for(16)
        };
        let run = design_siso(&cfg, None, None, DesignMode::Paired).unwrap();
        for w in run.objective_trace.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9),
                "trace increased: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(run.final_objective() < run.objective_trace[0]);
        let grid = pcaf_grid(&run.x, &run.y, &cfg).unwrap();
        let psl = psl_db(&grid, &RegionSpec::zero_delay(cfg.p_max)).unwrap();
        assert!(psl < -3.0, "optimized in-band PSL {psl} dB");
    }

    #[test]
    fn single_sided_leaves_y_untouched() {
        let cfg = DesignConfig {
            n_len: 12,
            p_max: 4,
            n_f: 24,
            outer_cap: 20,
            seed: 9,
            ..DesignConfig::default_for(12)
        };
        let (_, y_fixed) = doppler_shift_pair(12).unwrap();
        let run = design_siso(&cfg, None, Some(&y_fixed), DesignMode::SingleSided).unwrap();
        assert_eq!(run.y, y_fixed);
        assert!(run.final_objective() <= run.objective_trace[0]);
    }

    #[test]
    fn seeded_runs_reproduce() {
        let cfg = DesignConfig {
            n_len: 12,
            p_max: 4,
            n_f: 24,
            outer_cap: 10,
            seed: 5,
            ..DesignConfig::default_for(12)
        };
        let a = design_siso(&cfg, None, None, DesignMode::Paired).unwrap();
        let b = design_siso(&cfg, None, None, DesignMode::Paired).unwrap();
        assert_eq!(a.x.phases(), b.x.phases());
        assert_eq!(a.y.phases(), b.y.phases());
        assert_eq!(a.objective_trace, b.objective_trace);
    }

    #[test]
    fn exact_gamma_also_descends() {
        let cfg = DesignConfig {
            n_len: 10,
            p_max: 3,
            n_f: 20,
            outer_cap: 15,
            seed: 2,
            gamma_mode: GammaMode::Exact,
            ..DesignConfig::default_for(10)
        };
        let run = design_siso(&cfg, None, None, DesignMode::Paired).unwrap();
        for w in run.objective_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9));
        }
        let j = objective_siso(&run.x, &run.y, &cfg).unwrap();
        assert!((j - run.final_objective()).abs() <= 1e-9 * j.max(1.0));
    }
}

//! Coordinated code-set design for two radars with several simultaneous
//! waveforms each.
//!
//! With code matrices `X` (columns `x_1..x_M`) and `Y` (columns
//! `y_1..y_K`) the design objective is the quartic
//!
//! ```text
//! Q = sum_{l,p} ( ||X^H A X||_F^2 + ||Y^H A Y||_F^2 + ||X^H A Y||_F^2 ),
//! A = A(l, p) = Diag(f_p) C_l
//! ```
//!
//! whose scalar entries are exactly the pairwise ambiguity values
//! `a^H A b = r_ab(l, p)`, so `Q` bundles every auto- and cross-ambiguity
//! energy of the two sets.
//!
//! Terms where one code appears on both sides are quartic in that code and
//! block a direct quadratic update. Each operator splits into Hermitian
//! parts `A = H_r - j H_i` with `H_r = (A + A^H)/2` and
//! `H_i = j (A - A^H)/2`, giving the exact decomposition
//! `|z^H A z|^2 = (z^H H_r z)^2 + (z^H H_i z)^2`. Because `A` is unitary,
//! both parts have spectrum in `[-1, 1]`, so `H + zeta I` is positive
//! definite for any `zeta > 1` and each squared term can be driven through
//! the penalty
//!
//! ```text
//! || (H + zeta I)^{1/2} z - sqrt(zeta N) u ||^2,   ||u|| = 1
//! ```
//!
//! whose exact minimizer over the auxiliary direction `u` is the
//! normalized `(H + zeta I)^{1/2} z`. Freezing all auxiliaries and all
//! codes but one makes the whole objective a quadratic-plus-linear form in
//! the remaining code, solved by the pinned phase iteration. Every block
//! step (codes and auxiliaries alike) minimizes the same penalized
//! objective, so its trace is non-increasing; the quartic `Q` itself is
//! reported alongside but is only guaranteed to end at or below its start.
//!
//! The square-root and function applications never materialize a matrix:
//! the cyclic-shift orbits of `C_l` reduce every `A(l, p)` to independent
//! gauge-twisted circulants of length `N / gcd(l, N)`, diagonal in a
//! per-orbit Fourier basis.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::Fft;

use crate::exec::{self, ExecMode};
use crate::mat::{dot_h, norm_sqr, CMat};
use crate::pcaf::{build_b_fast_with_mode, objective_siso_with_mode, BSide, QuadFormMatrix};
use crate::siso::pmli_solve;
use crate::types::{derive_seed, random_unimodular_code, Code, DesignConfig, ZetaMode};
use crate::{Error, Result};

const CZERO: Complex64 = Complex64::new(0.0, 0.0);
const CONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which Hermitian part of an operator is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `(A + A^H) / 2`, eigenvalues `cos(psi_k)` per orbit.
    Real,
    /// `j (A - A^H) / 2`, eigenvalues `-sin(psi_k)` per orbit.
    Imag,
}

/// Which code set an auxiliary vector belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxSide {
    X,
    Y,
}

fn gcd(a: usize, b: usize) -> usize {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

struct Orbit {
    /// Code indices in traversal order `n_j = (r + j l) mod N`.
    indices: Vec<usize>,
    /// Unit gauge `d_j` with `d_0 = 1`, `d_{j+1} = d_j theta / w_j`.
    gauge: Vec<Complex64>,
    /// Eigenphases `psi_k = arg(theta) - 2 pi k / L`.
    psis: Vec<f64>,
}

/// One `(l, p)` operator pair `(H_r, H_i)` in orbit-factored form:
/// matrix-free applications of any real function of either part.
pub struct SplitOperators {
    n_len: usize,
    n_f: usize,
    lag: isize,
    p: isize,
    orbit_len: usize,
    orbits: Vec<Orbit>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl SplitOperators {
    /// Factor `A(lag, p)` over the shift orbits. `O(N)` plus FFT planning
    /// for the orbit length.
    pub fn build(n_len: usize, n_f: usize, lag: isize, p: isize) -> Result<Self> {
        if n_len < 2 || n_f < 2 {
            return Err(Error::InvalidDimension(format!(
                "operator needs n_len >= 2 and n_f >= 2, got {n_len}, {n_f}"
            )));
        }
        let l_mod = lag.rem_euclid(n_len as isize) as usize;
        let g = if l_mod == 0 { n_len } else { gcd(l_mod, n_len) };
        let orbit_len = n_len / g;

        let mut orbits = Vec::with_capacity(g);
        for r in 0..g {
            let mut indices = Vec::with_capacity(orbit_len);
            let mut n = r;
            for _ in 0..orbit_len {
                indices.push(n);
                n = (n + l_mod) % n_len;
            }
            // theta^L = prod_j w_j = exp(-j 2 pi p S / N_f) with
            // S = sum (n_j + 1); the sum telescopes over the coset
            // {r, r+g, ...} regardless of traversal order. The integer
            // reduction keeps the angle small before any float rounding.
            let l = orbit_len as i64;
            let s_o = l * (r as i64 + 1) + (g as i64) * l * (l - 1) / 2;
            let modulus = (n_f as i64) * l;
            let reduced = ((p as i64) * s_o).rem_euclid(modulus);
            let theta_arg = -TAU * (reduced as f64) / (modulus as f64);
            let theta = Complex64::from_polar(1.0, theta_arg);

            let mut gauge = Vec::with_capacity(orbit_len);
            let mut d = CONE;
            for j in 0..orbit_len {
                gauge.push(d);
                let w = steering_entry(indices[j], p, n_f);
                d *= theta * w.conj();
            }
            let psis = (0..orbit_len)
                .map(|k| theta_arg - TAU * (k as f64) / (orbit_len as f64))
                .collect();
            orbits.push(Orbit {
                indices,
                gauge,
                psis,
            });
        }

        let mut planner = rustfft::FftPlanner::new();
        let fft = planner.plan_fft_forward(orbit_len);
        let ifft = planner.plan_fft_inverse(orbit_len);
        Ok(SplitOperators {
            n_len,
            n_f,
            lag,
            p,
            orbit_len,
            orbits,
            fft,
            ifft,
        })
    }

    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn lag(&self) -> isize {
        self.lag
    }

    pub fn doppler_index(&self) -> isize {
        self.p
    }

    fn eigenvalue(&self, part: Part, psi: f64) -> f64 {
        match part {
            Part::Real => psi.cos(),
            Part::Imag => -psi.sin(),
        }
    }

    /// Apply `f(H)` for the selected Hermitian part: per orbit, de-gauge,
    /// move to the orbit Fourier basis, scale by `f` of the eigenvalues,
    /// and transform back. `O(N log N)` total.
    pub fn apply_part<F: Fn(f64) -> f64>(
        &self,
        part: Part,
        f: F,
        z: &[Complex64],
    ) -> Vec<Complex64> {
        assert_eq!(z.len(), self.n_len, "vector length mismatch");
        let l = self.orbit_len;
        let mut out = vec![CZERO; self.n_len];
        let mut buf = vec![CZERO; l];
        let mut scratch = vec![
            CZERO;
            self.fft
                .get_inplace_scratch_len()
                .max(self.ifft.get_inplace_scratch_len())
        ];
        for orbit in &self.orbits {
            for j in 0..l {
                buf[j] = orbit.gauge[j].conj() * z[orbit.indices[j]];
            }
            self.ifft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..l {
                buf[k] *= f(self.eigenvalue(part, orbit.psis[k]));
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            let scale = 1.0 / l as f64;
            for j in 0..l {
                out[orbit.indices[j]] = orbit.gauge[j] * buf[j] * scale;
            }
        }
        out
    }

    /// `A z` directly: `f_p .* shift_l(z)`. `O(N)`.
    pub fn apply_a(&self, z: &[Complex64]) -> Vec<Complex64> {
        apply_a(self.lag, self.p, self.n_f, z)
    }

    /// `A^H z` directly. `O(N)`.
    pub fn apply_a_adjoint(&self, z: &[Complex64]) -> Vec<Complex64> {
        apply_a_adjoint(self.lag, self.p, self.n_f, z)
    }

    /// `Re(z^H H z)` for the selected part, via the sparse `A` applies.
    pub fn quad_form_part(&self, part: Part, z: &[Complex64]) -> f64 {
        let az = self.apply_a(z);
        let ahz = self.apply_a_adjoint(z);
        let hz = combine_parts(part, &az, &ahz);
        dot_h(z, &hz).re
    }

    /// All eigenvalues of the selected part, orbit by orbit.
    pub fn eigenvalues(&self, part: Part) -> Vec<f64> {
        self.orbits
            .iter()
            .flat_map(|o| o.psis.iter().map(|&psi| self.eigenvalue(part, psi)))
            .collect()
    }

    /// Smallest eigenvalue of the selected part.
    pub fn min_eigenvalue(&self, part: Part) -> f64 {
        self.eigenvalues(part)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Materialize the selected part as a dense matrix by applying it to
    /// the standard basis. Intended for validation at small sizes.
    pub fn dense_part(&self, part: Part) -> CMat {
        let n = self.n_len;
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![CZERO; n];
            e[j] = CONE;
            let col = self.apply_part(part, |mu| mu, &e);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    /// Materialize `A` itself densely. Intended for validation.
    pub fn dense_a(&self) -> CMat {
        let n = self.n_len;
        let mut m = CMat::zeros(n, n);
        for j in 0..n {
            let mut e = vec![CZERO; n];
            e[j] = CONE;
            let col = self.apply_a(&e);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        m
    }
}

fn steering_entry(n: usize, p: isize, n_f: usize) -> Complex64 {
    Complex64::from_polar(1.0, -TAU * ((n + 1) as f64) * (p as f64) / (n_f as f64))
}

/// `A(lag, p) z` without building the operator.
pub fn apply_a(lag: isize, p: isize, n_f: usize, z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len() as isize;
    (0..n)
        .map(|m| {
            let src = (m + lag).rem_euclid(n) as usize;
            steering_entry(m as usize, p, n_f) * z[src]
        })
        .collect()
}

/// `A(lag, p)^H z` without building the operator.
pub fn apply_a_adjoint(lag: isize, p: isize, n_f: usize, z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len() as isize;
    (0..n)
        .map(|m| {
            let src = (m - lag).rem_euclid(n) as usize;
            steering_entry(src, p, n_f).conj() * z[src]
        })
        .collect()
}

fn combine_parts(part: Part, az: &[Complex64], ahz: &[Complex64]) -> Vec<Complex64> {
    match part {
        Part::Real => az.iter().zip(ahz).map(|(a, ah)| 0.5 * (a + ah)).collect(),
        Part::Imag => az
            .iter()
            .zip(ahz)
            .map(|(a, ah)| Complex64::new(0.0, 0.5) * (a - ah))
            .collect(),
    }
}

/// The positivity shift for the penalized auto terms.
pub fn zeta_for(cfg: &DesignConfig) -> Result<f64> {
    cfg.validate()?;
    match cfg.zeta_mode {
        // Both parts of a unitary operator live in [-1, 1]; 1 percent past
        // the worst case keeps every shifted part positive definite.
        ZetaMode::Analytic => Ok(1.01),
        ZetaMode::Exact => {
            let mut mu_min = f64::INFINITY;
            let ni = cfg.n_len as isize;
            let pi = cfg.p_max as isize;
            for lag in (1 - ni)..=(ni - 1) {
                for p in -pi..=pi {
                    let ops = SplitOperators::build(cfg.n_len, cfg.n_f, lag, p)?;
                    mu_min = mu_min
                        .min(ops.min_eigenvalue(Part::Real))
                        .min(ops.min_eigenvalue(Part::Imag));
                }
            }
            Ok(1.01 * (-mu_min).max(0.0) + 1e-3)
        }
    }
}

/// Auxiliary directions for every penalized auto term, one per
/// `(code, lag, p, part)` tuple.
///
/// The vectors are never stored: the seeded variant regenerates each one
/// on demand, and the closed-form variant carries only the code snapshots
/// it was derived from, because `(H + zeta I)^{1/2} u` then collapses to
/// `(H + zeta I) z / sqrt(z^H (H + zeta I) z)`, which the sparse operator
/// applies give directly.
#[derive(Debug, Clone)]
pub enum AuxVectors {
    /// Independent isotropic unit vectors, regenerated per tuple from the
    /// seed. The customary cold start.
    Random { seed: u64 },
    /// The exact per-tuple minimizers for the snapshot codes.
    ClosedForm { x: Vec<Code>, y: Vec<Code> },
}

/// Exact auxiliary update: snapshot the current codes.
pub fn update_aux(x: &[Code], y: &[Code]) -> AuxVectors {
    AuxVectors::ClosedForm {
        x: x.to_vec(),
        y: y.to_vec(),
    }
}

fn aux_seed(base: u64, side: AuxSide, idx: usize, lag: isize, p: isize, part: Part) -> u64 {
    let mut s = derive_seed(
        base,
        match side {
            AuxSide::X => 0,
            AuxSide::Y => 1,
        },
    );
    s = derive_seed(s, idx as u64);
    s = derive_seed(s, (lag + 4096) as u64);
    s = derive_seed(s, (p + 4096) as u64);
    derive_seed(
        s,
        match part {
            Part::Real => 0,
            Part::Imag => 1,
        },
    )
}

fn random_unit_vector(seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (TAU * u2).sin_cos();
            Complex64::new(r * c, r * s)
        })
        .collect();
    let norm = norm_sqr(&v).sqrt();
    // A zero draw is probability zero; fall back to a basis vector anyway.
    if norm == 0.0 {
        v[0] = CONE;
        return v;
    }
    for e in &mut v {
        *e /= norm;
    }
    v
}

impl AuxVectors {
    /// Produce the actual unit vector for one tuple. The closed-form
    /// variant routes through the orbit engine's operator square root.
    pub fn materialize(
        &self,
        side: AuxSide,
        idx: usize,
        lag: isize,
        p: isize,
        part: Part,
        zeta: f64,
        cfg: &DesignConfig,
    ) -> Result<Vec<Complex64>> {
        match self {
            AuxVectors::Random { seed } => Ok(random_unit_vector(
                aux_seed(*seed, side, idx, lag, p, part),
                cfg.n_len,
            )),
            AuxVectors::ClosedForm { .. } => {
                let snapshot = self.snapshot(side, idx)?;
                let ops = SplitOperators::build(cfg.n_len, cfg.n_f, lag, p)?;
                let mut v = ops.apply_part(part, |mu| (mu + zeta).sqrt(), snapshot.entries());
                let norm = norm_sqr(&v).sqrt();
                if norm == 0.0 {
                    return Err(Error::NonFinite(
                        "auxiliary direction collapsed to zero".into(),
                    ));
                }
                for e in &mut v {
                    *e /= norm;
                }
                Ok(v)
            }
        }
    }

    fn snapshot(&self, side: AuxSide, idx: usize) -> Result<&Code> {
        match self {
            AuxVectors::Random { .. } => Err(Error::Validation(
                "seeded auxiliaries carry no code snapshot".into(),
            )),
            AuxVectors::ClosedForm { x, y } => {
                let list = match side {
                    AuxSide::X => x,
                    AuxSide::Y => y,
                };
                list.get(idx).ok_or_else(|| {
                    Error::InvalidDimension(format!(
                        "auxiliary index {idx} out of range for side {side:?}"
                    ))
                })
            }
        }
    }
}

/// Penalty value `|| (H + zeta I)^{1/2} z - sqrt(zeta N) u ||^2` for an
/// explicit auxiliary vector, evaluated through the orbit engine.
pub fn penalty_value_with_aux(
    z: &Code,
    u: &[Complex64],
    lag: isize,
    p: isize,
    part: Part,
    zeta: f64,
    cfg: &DesignConfig,
) -> Result<f64> {
    if z.len() != cfg.n_len || u.len() != cfg.n_len {
        return Err(Error::LengthMismatch(format!(
            "penalty operands must have length {}, got z: {}, u: {}",
            cfg.n_len,
            z.len(),
            u.len()
        )));
    }
    let ops = SplitOperators::build(cfg.n_len, cfg.n_f, lag, p)?;
    let rootz = ops.apply_part(part, |mu| (mu + zeta).sqrt(), z.entries());
    let scale = (zeta * cfg.n_len as f64).sqrt();
    let diff: Vec<Complex64> = rootz.iter().zip(u).map(|(a, b)| *a - scale * *b).collect();
    Ok(norm_sqr(&diff))
}

fn sum_tuples(cfg: &DesignConfig) -> usize {
    (2 * cfg.n_len - 1) * (2 * cfg.p_max + 1)
}

fn tuple_at(cfg: &DesignConfig, t: usize) -> (isize, isize) {
    let bins = 2 * cfg.p_max + 1;
    let lag = (t / bins) as isize - (cfg.n_len as isize - 1);
    let p = (t % bins) as isize - cfg.p_max as isize;
    (lag, p)
}

/// The quartic design objective `Q` for arbitrary code lists. `O((M+K)^2)`
/// ambiguity-grid evaluations.
pub fn quartic_objective(x: &[Code], y: &[Code], cfg: &DesignConfig) -> Result<f64> {
    quartic_objective_with_mode(x, y, cfg, ExecMode::default())
}

/// [`quartic_objective`] with an explicit execution mode.
pub fn quartic_objective_with_mode(
    x: &[Code],
    y: &[Code],
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<f64> {
    cfg.validate()?;
    check_set(x, cfg)?;
    check_set(y, cfg)?;
    let mut q = 0.0;
    for a in x {
        for b in x {
            q += objective_siso_with_mode(a, b, cfg, mode)?;
        }
    }
    for a in y {
        for b in y {
            q += objective_siso_with_mode(a, b, cfg, mode)?;
        }
    }
    for a in x {
        for b in y {
            q += objective_siso_with_mode(a, b, cfg, mode)?;
        }
    }
    Ok(q)
}

fn check_set(codes: &[Code], cfg: &DesignConfig) -> Result<()> {
    for (idx, c) in codes.iter().enumerate() {
        if c.len() != cfg.n_len {
            return Err(Error::LengthMismatch(format!(
                "code {idx} has length {}, config n_len is {}",
                c.len(),
                cfg.n_len
            )));
        }
    }
    Ok(())
}

/// The penalized objective the block updates actually minimize: all
/// cross-pair ambiguity energies plus one penalty per
/// `(code, lag, p, part)` tuple under the given auxiliaries.
pub fn surrogate_objective(
    x: &[Code],
    y: &[Code],
    aux: &AuxVectors,
    zeta: f64,
    cfg: &DesignConfig,
) -> Result<f64> {
    surrogate_objective_with_mode(x, y, aux, zeta, cfg, ExecMode::default())
}

/// [`surrogate_objective`] with an explicit execution mode.
pub fn surrogate_objective_with_mode(
    x: &[Code],
    y: &[Code],
    aux: &AuxVectors,
    zeta: f64,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<f64> {
    cfg.validate()?;
    check_set(x, cfg)?;
    check_set(y, cfg)?;
    let mut total = 0.0;
    for (m, a) in x.iter().enumerate() {
        for (m2, b) in x.iter().enumerate() {
            if m != m2 {
                total += objective_siso_with_mode(a, b, cfg, mode)?;
            }
        }
    }
    for (k, a) in y.iter().enumerate() {
        for (k2, b) in y.iter().enumerate() {
            if k != k2 {
                total += objective_siso_with_mode(a, b, cfg, mode)?;
            }
        }
    }
    for a in x {
        for b in y {
            total += objective_siso_with_mode(a, b, cfg, mode)?;
        }
    }
    for (idx, code) in x.iter().enumerate() {
        total += penalty_sum(code, AuxSide::X, idx, aux, zeta, cfg, mode)?;
    }
    for (idx, code) in y.iter().enumerate() {
        total += penalty_sum(code, AuxSide::Y, idx, aux, zeta, cfg, mode)?;
    }
    Ok(total)
}

/// Sum of the two penalty terms over every `(lag, p)` for one code.
fn penalty_sum(
    code: &Code,
    side: AuxSide,
    idx: usize,
    aux: &AuxVectors,
    zeta: f64,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<f64> {
    let n = cfg.n_len as f64;
    let z = code.entries();
    let tuples = sum_tuples(cfg);
    let total = exec::fold_chunked(
        mode,
        tuples,
        || Ok(0.0),
        |acc: Result<f64>, t| {
            let acc = acc?;
            let (lag, p) = tuple_at(cfg, t);
            let az = apply_a(lag, p, cfg.n_f, z);
            let ahz = apply_a_adjoint(lag, p, cfg.n_f, z);
            let mut term = 0.0;
            for part in [Part::Real, Part::Imag] {
                let hz = combine_parts(part, &az, &ahz);
                // z^H (H + zeta I) z; z is unimodular so z^H z = N.
                let quad = dot_h(z, &hz).re + zeta * n;
                let cross = match aux {
                    AuxVectors::ClosedForm { .. } => {
                        let snap = aux.snapshot(side, idx)?;
                        let zs = snap.entries();
                        let azs = apply_a(lag, p, cfg.n_f, zs);
                        let ahzs = apply_a_adjoint(lag, p, cfg.n_f, zs);
                        let hzs = combine_parts(part, &azs, &ahzs);
                        // (H+zI)^{1/2} u = (H+zI) z_s / sqrt(z_s^H (H+zI) z_s)
                        // for the closed-form u, so the inner product needs
                        // no square root at all.
                        let denom = (dot_h(zs, &hzs).re + zeta * n).sqrt();
                        let htilde_zs: Vec<Complex64> =
                            hzs.iter().zip(zs).map(|(h, s)| *h + zeta * *s).collect();
                        dot_h(&htilde_zs, z).re / denom
                    }
                    AuxVectors::Random { seed } => {
                        let u =
                            random_unit_vector(aux_seed(*seed, side, idx, lag, p, part), cfg.n_len);
                        let ops = SplitOperators::build(cfg.n_len, cfg.n_f, lag, p)?;
                        let rootu = ops.apply_part(part, |mu| (mu + zeta).sqrt(), &u);
                        dot_h(&rootu, z).re
                    }
                };
                term += quad + zeta * n - 2.0 * (zeta * n).sqrt() * cross;
            }
            Ok(acc + term)
        },
        |a, b| Ok(a? + b?),
    )?;
    Ok(total)
}

/// Dense `sum_{l,p} (H_r + H_i)`: with `S = sum_l C_l = 2 J - I` and
/// `sigma_n = sum_p f_p[n]` (real by p-symmetry), the operator sum is
/// `M = Diag(sigma) S`, and the Hermitian parts add up to
/// `(1+j)/2 M + ((1+j)/2 M)^H`.
fn split_part_sum(cfg: &DesignConfig) -> CMat {
    let n = cfg.n_len;
    let pi = cfg.p_max as isize;
    let sigma: Vec<f64> = (0..n)
        .map(|m| {
            let mut acc = CZERO;
            for p in -pi..=pi {
                acc += steering_entry(m, p, cfg.n_f);
            }
            acc.re
        })
        .collect();
    let half = Complex64::new(0.5, 0.5);
    let mut out = CMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let weight = if a == b { 1.0 } else { 2.0 };
            let m_ab = half * (sigma[a] * weight);
            let m_ba_conj = half.conj() * (sigma[b] * weight);
            out[(a, b)] = m_ab + m_ba_conj;
        }
    }
    out
}

/// Assemble the quadratic matrix for one code update.
fn assemble_r(
    side: AuxSide,
    idx: usize,
    x: &[Code],
    y: &[Code],
    zeta: f64,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<CMat> {
    let n = cfg.n_len;
    let mut r = CMat::zeros(n, n);
    let (same, other) = match side {
        AuxSide::X => (x, y),
        AuxSide::Y => (y, x),
    };
    for (j, code) in same.iter().enumerate() {
        if j == idx {
            continue;
        }
        // The updated code meets its set-mates on both sides of the
        // operator, so both quadratic forms appear.
        let left = build_b_fast_with_mode(code, BSide::ActsOnX, cfg, mode)?;
        let right = build_b_fast_with_mode(code, BSide::ActsOnY, cfg, mode)?;
        r.axpy(CONE, left.matrix());
        r.axpy(CONE, right.matrix());
    }
    // Cross-set terms keep X on the left and Y on the right.
    let cross_side = match side {
        AuxSide::X => BSide::ActsOnX,
        AuxSide::Y => BSide::ActsOnY,
    };
    for code in other {
        let b = build_b_fast_with_mode(code, cross_side, cfg, mode)?;
        r.axpy(CONE, b.matrix());
    }
    r.axpy(CONE, &split_part_sum(cfg));
    let shift = 2.0 * zeta * sum_tuples(cfg) as f64;
    for d in 0..n {
        r[(d, d)] += shift;
    }
    Ok(r)
}

/// Assemble the linear term for one code update:
/// `s = -sqrt(zeta N) sum_{l,p,part} (H + zeta I)^{1/2} u`.
fn assemble_s(
    side: AuxSide,
    idx: usize,
    aux: &AuxVectors,
    zeta: f64,
    cfg: &DesignConfig,
    mode: ExecMode,
) -> Result<Vec<Complex64>> {
    let n = cfg.n_len;
    let tuples = sum_tuples(cfg);
    let summed = exec::fold_chunked(
        mode,
        tuples,
        || Ok(vec![CZERO; n]),
        |acc: Result<Vec<Complex64>>, t| {
            let mut acc = acc?;
            let (lag, p) = tuple_at(cfg, t);
            match aux {
                AuxVectors::ClosedForm { .. } => {
                    let snap = aux.snapshot(side, idx)?;
                    let zs = snap.entries();
                    let azs = apply_a(lag, p, cfg.n_f, zs);
                    let ahzs = apply_a_adjoint(lag, p, cfg.n_f, zs);
                    for part in [Part::Real, Part::Imag] {
                        let hzs = combine_parts(part, &azs, &ahzs);
                        let denom = (dot_h(zs, &hzs).re + zeta * n as f64).sqrt();
                        for (a, (h, s)) in acc.iter_mut().zip(hzs.iter().zip(zs)) {
                            *a += (*h + zeta * *s) / denom;
                        }
                    }
                }
                AuxVectors::Random { seed } => {
                    let ops = SplitOperators::build(n, cfg.n_f, lag, p)?;
                    for part in [Part::Real, Part::Imag] {
                        let u = random_unit_vector(aux_seed(*seed, side, idx, lag, p, part), n);
                        let rootu = ops.apply_part(part, |mu| (mu + zeta).sqrt(), &u);
                        for (a, r) in acc.iter_mut().zip(&rootu) {
                            *a += r;
                        }
                    }
                }
            }
            Ok(acc)
        },
        |a, b| {
            let mut a = a?;
            let b = b?;
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            Ok(a)
        },
    )?;
    let scale = -(zeta * n as f64).sqrt();
    Ok(summed.into_iter().map(|v| scale * v).collect())
}

/// Minimize `z^H R z + 2 Re(s^H z)` over unimodular `z` via the pinned
/// phase iteration on the augmented matrix `[[R, s], [s^H, 0]]`.
fn update_one_code(current: &Code, r: CMat, s: &[Complex64], cfg: &DesignConfig) -> Result<Code> {
    let n = current.len();
    let mut aug = CMat::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = r[(i, j)];
        }
        aug[(i, n)] = s[i];
        aug[(n, i)] = s[i].conj();
    }
    let q = QuadFormMatrix::from_hermitian(aug)?;
    let gamma = match cfg.gamma_mode {
        // The Frobenius norm of the augmented matrix bounds its spectral
        // radius, and its trace is positive, so gamma exceeds the largest
        // eigenvalue.
        crate::types::GammaMode::Frobenius => 1.001 * q.frobenius(),
        crate::types::GammaMode::Exact => 1.001 * q.largest_eigenvalue(),
    };
    if !gamma.is_finite() {
        return Err(Error::NonFinite(
            "diagonal loading level is not finite".into(),
        ));
    }
    let mut start = current.entries().to_vec();
    start.push(CONE);
    let apply_d = |z: &[Complex64]| {
        let mut w = q.mul_vec(z);
        for (wk, zk) in w.iter_mut().zip(z) {
            *wk = gamma * zk - *wk;
        }
        w
    };
    let out = pmli_solve(apply_d, &start, cfg.inner_tol, cfg.inner_cap, true);
    Code::from_entries(out.z[..n].to_vec())
}

/// Outcome of [`design_mimo`].
#[derive(Debug, Clone)]
pub struct MimoDesignResult {
    pub x: Vec<Code>,
    pub y: Vec<Code>,
    /// Penalized objective after initialization and after every block
    /// update (each code, then the auxiliary refresh). Non-increasing up
    /// to roundoff.
    pub surrogate_trace: Vec<f64>,
    /// Quartic objective after initialization and after every completed
    /// outer iteration. Reported, not asserted monotone.
    pub quartic_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    pub zeta: f64,
}

impl MimoDesignResult {
    pub fn final_quartic(&self) -> f64 {
        *self
            .quartic_trace
            .last()
            .expect("trace always holds the initial value")
    }
}

/// Coordinate-descent design of `m_count` codes for the first radar and
/// `k_count` for the second. `k_count = 0` degenerates to a single-radar
/// multi-waveform design.
pub fn design_mimo(
    cfg: &DesignConfig,
    m_count: usize,
    k_count: usize,
    x0: Option<&[Code]>,
    y0: Option<&[Code]>,
) -> Result<MimoDesignResult> {
    design_mimo_with_mode(cfg, m_count, k_count, x0, y0, ExecMode::default())
}

/// [`design_mimo`] with an explicit execution mode; results are identical
/// between modes.
pub fn design_mimo_with_mode(
    cfg: &DesignConfig,
    m_count: usize,
    k_count: usize,
    x0: Option<&[Code]>,
    y0: Option<&[Code]>,
    mode: ExecMode,
) -> Result<MimoDesignResult> {
    cfg.validate()?;
    if m_count == 0 {
        return Err(Error::InvalidDimension(
            "the first radar needs at least one waveform".into(),
        ));
    }
    let zeta = zeta_for(cfg)?;
    let mut x = init_codes(x0, m_count, cfg, 100)?;
    let mut y = init_codes(y0, k_count, cfg, 200)?;
    let mut aux = AuxVectors::Random {
        seed: derive_seed(cfg.seed, 7),
    };

    let s0 = surrogate_objective_with_mode(&x, &y, &aux, zeta, cfg, mode)?;
    let q0 = quartic_objective_with_mode(&x, &y, cfg, mode)?;
    if !s0.is_finite() || !q0.is_finite() {
        return Err(Error::NonFinite("initial objective is not finite".into()));
    }
    let mut surrogate_trace = vec![s0];
    let mut quartic_trace = vec![q0];
    let mut converged = false;
    let mut outer_done = 0;
    let mut last_iter_surrogate = s0;

    for _ in 1..=cfg.outer_cap {
        for m in 0..m_count {
            let r = assemble_r(AuxSide::X, m, &x, &y, zeta, cfg, mode)?;
            let s = assemble_s(AuxSide::X, m, &aux, zeta, cfg, mode)?;
            x[m] = update_one_code(&x[m], r, &s, cfg)?;
            surrogate_trace.push(surrogate_objective_with_mode(
                &x, &y, &aux, zeta, cfg, mode,
            )?);
        }
        for k in 0..k_count {
            let r = assemble_r(AuxSide::Y, k, &x, &y, zeta, cfg, mode)?;
            let s = assemble_s(AuxSide::Y, k, &aux, zeta, cfg, mode)?;
            y[k] = update_one_code(&y[k], r, &s, cfg)?;
            surrogate_trace.push(surrogate_objective_with_mode(
                &x, &y, &aux, zeta, cfg, mode,
            )?);
        }
        aux = update_aux(&x, &y);
        let s_now = surrogate_objective_with_mode(&x, &y, &aux, zeta, cfg, mode)?;
        if !s_now.is_finite() {
            return Err(Error::NonFinite("objective became non-finite".into()));
        }
        surrogate_trace.push(s_now);
        quartic_trace.push(quartic_objective_with_mode(&x, &y, cfg, mode)?);
        outer_done += 1;
        if (last_iter_surrogate - s_now).abs() <= cfg.outer_tol * s0 {
            converged = true;
            break;
        }
        last_iter_surrogate = s_now;
    }

    Ok(MimoDesignResult {
        x,
        y,
        surrogate_trace,
        quartic_trace,
        outer_iterations: outer_done,
        converged,
        zeta,
    })
}

fn init_codes(
    given: Option<&[Code]>,
    count: usize,
    cfg: &DesignConfig,
    stream_base: u64,
) -> Result<Vec<Code>> {
    match given {
        Some(codes) => {
            if codes.len() != count {
                return Err(Error::LengthMismatch(format!(
                    "warm start provides {} codes, design asks for {count}",
                    codes.len()
                )));
            }
            check_set(codes, cfg)?;
            Ok(codes.to_vec())
        }
        None => (0..count)
            .map(|i| {
                random_unimodular_code(cfg.n_len, derive_seed(cfg.seed, stream_base + i as u64))
            })
            .collect(),
    }
}

//! Core value types: phase codes, code sets, design and waveform
//! parameters, emitters, and seeded code generation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `||entry| - 1|` when ingesting externally produced complex
/// entries.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// A unit-modulus slow-time code: one complex phasor per pulse.
///
/// The code stores both the phase vector (radians, the serialized
/// representation) and the materialized complex entries (what the math
/// consumes). Entries built through [`Code::from_phases`] are exactly
/// `exp(j * phase)`; entries ingested through [`Code::from_entries`] are kept
/// as given and validated to unit modulus within [`UNIMODULAR_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Code {
    phases: Vec<f64>,
    entries: Vec<Complex64>,
}

impl Code {
    /// Build from phases in radians. Phases must be finite; the code length
    /// must be at least 2.
    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        check_len(phases.len())?;
        if let Some(idx) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::Validation(format!(
                "phase at index {idx} is not finite"
            )));
        }
        let entries = phases
            .iter()
            .map(|&p| Complex64::new(p.cos(), p.sin()))
            .collect();
        Ok(Code {
            phases: phases.to_vec(),
            entries,
        })
    }

    /// Build from complex entries, validating unit modulus.
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        check_len(entries.len())?;
        for (idx, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::Validation(format!(
                    "entry at index {idx} is not finite"
                )));
            }
            if (e.norm() - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::Validation(format!(
                    "entry at index {idx} has modulus {:.6}, expected 1 within {UNIMODULAR_TOL:.0e}",
                    e.norm()
                )));
            }
        }
        let phases = entries.iter().map(|e| e.arg()).collect();
        Ok(Code { phases, entries })
    }

    /// The all-ones code (zero phases).
    pub fn ones(n_len: usize) -> Result<Self> {
        Code::from_phases(&vec![0.0; n_len])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Phases in radians, bitwise as constructed.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Complex entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

fn check_len(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "code length must be at least 2, got {n}"
        )));
    }
    Ok(())
}

/// A set of codes of equal length, used for multi-waveform design.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSet {
    codes: Vec<Code>,
}

impl CodeSet {
    /// Build from a non-empty list of codes of identical length.
    pub fn new(codes: Vec<Code>) -> Result<Self> {
        let first_len = match codes.first() {
            Some(c) => c.len(),
            None => {
                return Err(Error::InvalidDimension(
                    "code set must contain at least one code".into(),
                ))
            }
        };
        for (idx, c) in codes.iter().enumerate() {
            if c.len() != first_len {
                return Err(Error::LengthMismatch(format!(
                    "code {idx} has length {}, set established length {first_len}",
                    c.len()
                )));
            }
        }
        Ok(CodeSet { codes })
    }

    pub fn n_len(&self) -> usize {
        self.codes[0].len()
    }

    pub fn count(&self) -> usize {
        self.codes.len()
    }

    pub fn codes(&self) -> &[Code] {
        &self.codes
    }

    pub fn get(&self, idx: usize) -> &Code {
        &self.codes[idx]
    }
}

impl std::ops::Deref for CodeSet {
    type Target = [Code];
    fn deref(&self) -> &[Code] {
        &self.codes
    }
}

/// How the diagonal-loading level for the phase iteration is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// `1.001 * ||B||_F`, a cheap certified bound on the largest eigenvalue
    /// of a Hermitian matrix.
    #[default]
    Frobenius,
    /// Dense Hermitian eigensolve for a tight bound. Costs O(N^3) per
    /// update, worthwhile only when the loading slack measurably slows
    /// convergence.
    Exact,
}

/// How the positivity shift for the split-operator penalties is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZetaMode {
    /// Fixed 1.01. Valid because every lag/Doppler operator is unitary, so
    /// the eigenvalues of its Hermitian split parts lie in [-1, 1].
    #[default]
    Analytic,
    /// Scan the exact extreme eigenvalue of every split part and shift just
    /// past it.
    Exact,
}

/// Parameters of a code-design run.
///
/// `n_len` is the code length (one entry per pulse), `p_max` the half-width
/// of the Doppler band being suppressed, and `n_f` the Doppler grid
/// resolution: bin `p` sits at normalized Doppler `p / n_f` cycles per
/// pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub n_len: usize,
    pub p_max: usize,
    pub n_f: usize,
    /// Outer-loop stop: relative change of the objective against its initial
    /// value.
    pub outer_tol: f64,
    pub outer_cap: usize,
    /// Inner-loop stop: largest per-entry phase change in radians.
    pub inner_tol: f64,
    pub inner_cap: usize,
    pub seed: u64,
    #[serde(default)]
    pub zeta_mode: ZetaMode,
    #[serde(default)]
    pub gamma_mode: GammaMode,
}

impl DesignConfig {
    /// A config with customary defaults for the given code length:
    /// `p_max = n_len / 2`, `n_f = 2 * n_len`, tolerances 1e-6, caps 1000,
    /// seed 0.
    pub fn default_for(n_len: usize) -> Self {
        DesignConfig {
            n_len,
            p_max: (n_len / 2).max(1),
            n_f: 2 * n_len.max(1),
            outer_tol: 1e-6,
            outer_cap: 1000,
            inner_tol: 1e-6,
            inner_cap: 1000,
            seed: 0,
            zeta_mode: ZetaMode::Analytic,
            gamma_mode: GammaMode::Frobenius,
        }
    }

    /// Validate the dimensional and tolerance invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_len < 2 {
            return Err(Error::InvalidDimension(format!(
                "n_len must be at least 2, got {}",
                self.n_len
            )));
        }
        if self.p_max == 0 || self.p_max >= self.n_f {
            return Err(Error::InvalidDimension(format!(
                "p_max must satisfy 0 < p_max < n_f, got p_max = {}, n_f = {}",
                self.p_max, self.n_f
            )));
        }
        if !(self.outer_tol > 0.0) || !(self.inner_tol > 0.0) {
            return Err(Error::Validation(format!(
                "tolerances must be positive, got outer_tol = {}, inner_tol = {}",
                self.outer_tol, self.inner_tol
            )));
        }
        if self.outer_cap == 0 || self.inner_cap == 0 {
            return Err(Error::Validation(
                "iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of lag rows in the ambiguity grid, `2 * n_len - 1`.
    pub fn lag_count(&self) -> usize {
        2 * self.n_len - 1
    }

    /// Number of Doppler columns, `2 * p_max + 1`.
    pub fn bin_count(&self) -> usize {
        2 * self.p_max + 1
    }
}

/// Chirp and sampling parameters of the de-chirped FMCW front end.
///
/// `m_fast` fast-time samples are taken per pulse at rate `f_s`; `n_slow`
/// pulses of duration `t_c` form the coherent processing interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmcwParams {
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Sweep bandwidth, Hz.
    pub bandwidth: f64,
    /// Pulse (sweep) duration, seconds. The pulse repetition frequency is
    /// `1 / t_c`.
    pub t_c: f64,
    /// Fast-time sample rate, Hz.
    pub f_s: f64,
    /// Fast-time samples per pulse.
    pub m_fast: usize,
    /// Pulses per coherent processing interval.
    pub n_slow: usize,
}

impl FmcwParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f_c", self.f_c),
            ("bandwidth", self.bandwidth),
            ("t_c", self.t_c),
            ("f_s", self.f_s),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.m_fast == 0 {
            return Err(Error::InvalidDimension("m_fast must be at least 1".into()));
        }
        if self.n_slow < 2 {
            return Err(Error::InvalidDimension(format!(
                "n_slow must be at least 2, got {}",
                self.n_slow
            )));
        }
        Ok(())
    }

    /// Chirp slope in Hz per second.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth / self.t_c
    }

    /// Carrier wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c
    }

    /// Pulse repetition frequency, Hz.
    pub fn prf(&self) -> f64 {
        1.0 / self.t_c
    }
}

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// What kind of return an emitter produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmitterKind {
    /// Own transmission scattered back: two-way delay and two-way Doppler.
    Target,
    /// Another radar received directly: one-way delay and one-way Doppler.
    Interferer,
}

impl std::fmt::Display for EmitterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EmitterKind::Target => write!(f, "target"),
            EmitterKind::Interferer => write!(f, "interferer"),
        }
    }
}

/// One point emitter in a simulated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emitter {
    /// Range in meters.
    pub range_m: f64,
    /// Radial speed in m/s, positive closing.
    pub speed_mps: f64,
    /// Power relative to the noise floor, dB.
    pub snr_db: f64,
    pub kind: EmitterKind,
    /// Slow-time misalignment in whole pulses between the interferer's code
    /// phase and the victim's. Ignored for targets. Fractional alignment is
    /// out of scope.
    #[serde(default)]
    pub delay_lag: i64,
}

/// Draw a code with independent uniform phases on `[0, 2 pi)`.
///
/// The generator is ChaCha-based, so the same `(n_len, seed)` pair yields
/// bitwise-identical codes on every platform.
pub fn random_unimodular_code(n_len: usize, seed: u64) -> Result<Code> {
    check_len(n_len)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..n_len).map(|_| TAU * rng.gen::<f64>()).collect();
    Code::from_phases(&phases)
}

/// Mix a base seed with a stream index into an independent derived seed
/// (splitmix64 finalizer). Used to fan one config seed out to restarts,
/// noise draws, and per-tuple auxiliary vectors.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(stream)
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn code_from_phases_materializes_unit_entries() {
        let code = Code::from_phases(&[0.0, std::f64::consts::FRAC_PI_2]).unwrap();
        assert_eq!(code.len(), 2);
        assert!((code.entries()[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn code_rejects_short_and_non_finite() {
        assert!(Code::from_phases(&[0.0]).is_err());
        assert!(Code::from_phases(&[0.0, f64::NAN]).is_err());
        assert!(Code::from_phases(&[0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn code_rejects_non_unimodular_entries() {
        let bad = vec![Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)];
        let err = Code::from_entries(bad).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "got {err:?}");
    }

    #[test]
    fn code_set_requires_equal_lengths() {
        let a = Code::ones(4).unwrap();
        let b = Code::ones(5).unwrap();
        assert!(CodeSet::new(vec![a.clone(), b]).is_err());
        assert!(CodeSet::new(vec![]).is_err());
        let set = CodeSet::new(vec![a.clone(), a]).unwrap();
        assert_eq!(set.count(), 2);
        assert_eq!(set.n_len(), 4);
    }

    #[test]
    fn random_code_is_deterministic() {
        let a = random_unimodular_code(64, 42).unwrap();
        let b = random_unimodular_code(64, 42).unwrap();
        assert_eq!(a.phases(), b.phases());
        let c = random_unimodular_code(64, 43).unwrap();
        assert_ne!(a.phases(), c.phases());
    }

    #[test]
    fn random_code_phases_average_out() {
        // 256 independent uniform phasors: the empirical mean concentrates
        // near zero (Rayleigh scale 1/sqrt(2 * 256) ~ 0.044).
        let code = random_unimodular_code(256, 1).unwrap();
        let mean = code.entries().iter().sum::<Complex64>() / 256.0;
        assert!(mean.norm() < 0.2, "mean magnitude {}", mean.norm());
    }

    #[test]
    fn design_config_validation() {
        let mut cfg = DesignConfig::default_for(16);
        assert!(cfg.validate().is_ok());
        cfg.p_max = cfg.n_f;
        assert!(cfg.validate().is_err());
        cfg = DesignConfig::default_for(16);
        cfg.outer_tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg = DesignConfig::default_for(1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn design_config_serde_field_names() {
        let cfg = DesignConfig::default_for(8);
        let json = serde_json::to_string(&cfg).unwrap();
        for field in [
            "n_len",
            "p_max",
            "n_f",
            "outer_tol",
            "outer_cap",
            "inner_tol",
            "inner_cap",
            "seed",
            "zeta_mode",
        ] {
            assert!(json.contains(field), "missing {field} in {json}");
        }
        let back: DesignConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        // Unknown fields are rejected so config typos surface immediately.
        let with_typo = json.replacen("n_len", "n_leng", 1);
        assert!(serde_json::from_str::<DesignConfig>(&with_typo).is_err());
    }

    #[test]
    fn fmcw_params_validation() {
        let p = FmcwParams {
            f_c: 24.0e9,
            bandwidth: 150.0e6,
            t_c: 50.0e-6,
            f_s: 4.0e6,
            m_fast: 100,
            n_slow: 256,
        };
        assert!(p.validate().is_ok());
        assert!((p.chirp_slope() - 3.0e12).abs() < 1.0);
        let bad = FmcwParams { t_c: 0.0, ..p };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn derive_seed_spreads_streams() {
        let s0 = derive_seed(1, 0);
        let s1 = derive_seed(1, 1);
        assert_ne!(s0, s1);
        assert_eq!(derive_seed(1, 0), s0);
    }
}

//! De-chirped FMCW sample synthesis and range-Doppler processing.
//!
//! After de-chirping, every point emitter collapses to a 2-D complex tone
//! across the fast-time / slow-time sample grid:
//!
//! ```text
//! s(m, n) = sum_e a_e phi_e c_e(n) exp(j 2 pi (fB_e m / f_s + fd_e n T_c))
//!           + w(m, n)
//! ```
//!
//! with `fB = K tau` the beat frequency of the emitter's delay, `fd` its
//! Doppler shift, `phi_e` a fixed unit phasor absorbing all constant phase
//! terms, and `w` circular complex Gaussian noise. Targets use two-way
//! delay and Doppler; a neighboring radar's direct transmission uses
//! one-way values.
//!
//! Slow-time coding enters through `c_e(n)`: the victim multiplies pulse
//! `n` of its received data by `conj(x_n)`. Its own target echoes carry
//! `x_n`, so the factor cancels exactly and targets are untouched; the
//! interferer carries its own code `y` at some pulse misalignment `l`,
//! leaving `c_e(n) = conj(x_n) y_{(n+l) mod N}`, which is precisely the
//! sequence whose ambiguity the designers shape.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{amplitude_db, DB_FLOOR};
use crate::types::{derive_seed, Code, Emitter, EmitterKind, FmcwParams, SPEED_OF_LIGHT};
use crate::{Error, Result};

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A simulated scene: front-end parameters, emitters, noise level, and the
/// seed driving every random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimScenario {
    pub params: FmcwParams,
    pub emitters: Vec<Emitter>,
    /// Per-sample noise power (variance of the complex Gaussian).
    pub noise_power: f64,
    pub seed: u64,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.emitters.is_empty() {
            return Err(Error::Validation(
                "scenario must contain at least one emitter".into(),
            ));
        }
        if !self.noise_power.is_finite() || self.noise_power < 0.0 {
            return Err(Error::Validation(format!(
                "noise_power must be finite and non-negative, got {}",
                self.noise_power
            )));
        }
        for (idx, e) in self.emitters.iter().enumerate() {
            for (name, v) in [
                ("range_m", e.range_m),
                ("speed_mps", e.speed_mps),
                ("snr_db", e.snr_db),
            ] {
                if !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "emitter {idx}: {name} is not finite"
                    )));
                }
            }
            if e.range_m < 0.0 {
                return Err(Error::Validation(format!(
                    "emitter {idx}: range_m must be non-negative, got {}",
                    e.range_m
                )));
            }
        }
        Ok(())
    }
}

/// Beat frequency of an emitter under the given front end: two-way delay
/// for targets, one-way for interferers.
pub fn beat_frequency_hz(e: &Emitter, params: &FmcwParams) -> f64 {
    let path_m = match e.kind {
        EmitterKind::Target => 2.0 * e.range_m,
        EmitterKind::Interferer => e.range_m,
    };
    params.chirp_slope() * (path_m / SPEED_OF_LIGHT)
}

/// Doppler frequency of an emitter: two-way for targets, one-way for
/// interferers.
pub fn doppler_frequency_hz(e: &Emitter, params: &FmcwParams) -> f64 {
    let factor = match e.kind {
        EmitterKind::Target => 2.0,
        EmitterKind::Interferer => 1.0,
    };
    factor * e.speed_mps / params.wavelength()
}

/// Slow-time code application for one synthesis run.
#[derive(Debug, Clone)]
pub enum CodingMode {
    /// No codes anywhere; interference lands at its physical Doppler.
    Uncoded,
    /// The victim decodes with `conj(own)`; the interferer transmits
    /// `other`. Both must match the scenario's `n_slow`.
    Coded { own: Code, other: Code },
}

/// A fast-time by slow-time complex baseband block, row per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    m_fast: usize,
    n_slow: usize,
    /// Layout `data[n * m_fast + m]`.
    data: Vec<Complex64>,
}

impl SampleMatrix {
    pub fn m_fast(&self) -> usize {
        self.m_fast
    }

    pub fn n_slow(&self) -> usize {
        self.n_slow
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn at(&self, m: usize, n: usize) -> Complex64 {
        self.data[n * self.m_fast + m]
    }

    /// Total sample energy.
    pub fn energy(&self) -> f64 {
        crate::mat::norm_sqr_kahan(&self.data)
    }
}

/// Synthesize the de-chirped sample block for a scenario.
///
/// Every random draw (one phasor per emitter, then the noise field) comes
/// from streams derived from the scenario seed, and the coding mode
/// consumes no randomness, so runs that share a seed share their noise
/// bit for bit and a target-only scene is bit-identical coded or not.
pub fn synthesize_samples(scenario: &SimScenario, coding: &CodingMode) -> Result<SampleMatrix> {
    scenario.validate()?;
    let params = &scenario.params;
    let m_fast = params.m_fast;
    let n_slow = params.n_slow;
    let nyquist = params.f_s / 2.0;

    if let CodingMode::Coded { own, other } = coding {
        if own.len() != n_slow || other.len() != n_slow {
            return Err(Error::LengthMismatch(format!(
                "codes must have length n_slow = {n_slow}, got own: {}, other: {}",
                own.len(),
                other.len()
            )));
        }
    }

    // snr_db is referenced to the noise floor; a noiseless scene falls back
    // to unit reference power so amplitudes stay meaningful.
    let reference_power = if scenario.noise_power > 0.0 {
        scenario.noise_power
    } else {
        1.0
    };

    let mut phase_rng = ChaCha8Rng::seed_from_u64(derive_seed(scenario.seed, 0));
    let mut data = vec![CZERO; m_fast * n_slow];

    for (idx, e) in scenario.emitters.iter().enumerate() {
        let beat = beat_frequency_hz(e, params);
        if beat >= nyquist {
            return Err(Error::AliasedBeat {
                index: idx,
                kind: e.kind.to_string(),
                beat_hz: beat,
                nyquist_hz: nyquist,
            });
        }
        let doppler = doppler_frequency_hz(e, params);
        let amp = (reference_power * 10f64.powf(e.snr_db / 10.0)).sqrt();
        let phasor = Complex64::from_polar(1.0, TAU * phase_rng.gen::<f64>());
        let f_fast = beat / params.f_s;
        let f_slow = doppler * params.t_c;

        let nsi = n_slow as i64;
        for n in 0..n_slow {
            let coef = match (e.kind, coding) {
                // The victim's own code cancels on its targets exactly.
                (EmitterKind::Target, _) => Complex64::new(1.0, 0.0),
                (EmitterKind::Interferer, CodingMode::Uncoded) => Complex64::new(1.0, 0.0),
                (EmitterKind::Interferer, CodingMode::Coded { own, other }) => {
                    let shifted = (n as i64 + e.delay_lag).rem_euclid(nsi) as usize;
                    own.entries()[n].conj() * other.entries()[shifted]
                }
            };
            let slow_tone = Complex64::from_polar(1.0, TAU * f_slow * n as f64);
            let row_factor = amp * phasor * coef * slow_tone;
            for m in 0..m_fast {
                let fast_tone = Complex64::from_polar(1.0, TAU * f_fast * m as f64);
                data[n * m_fast + m] += row_factor * fast_tone;
            }
        }
    }

    if scenario.noise_power > 0.0 {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(scenario.seed, 1));
        let sigma = (scenario.noise_power / 2.0).sqrt();
        for n in 0..n_slow {
            for m in 0..m_fast {
                // Box-Muller from two uniforms; u1 shifted into (0, 1].
                let u1: f64 = 1.0 - noise_rng.gen::<f64>();
                let u2: f64 = noise_rng.gen();
                let r = (-2.0 * u1.ln()).sqrt();
                let (s, c) = (TAU * u2).sin_cos();
                data[n * m_fast + m] += Complex64::new(sigma * r * c, sigma * r * s);
            }
        }
    }

    Ok(SampleMatrix {
        m_fast,
        n_slow,
        data,
    })
}

/// Spectral window applied along both FFT axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Rect,
    /// Periodic Hann, `0.5 (1 - cos(2 pi k / K))`.
    Hann,
}

fn window_values(window: Window, len: usize) -> Vec<f64> {
    match window {
        Window::Rect => vec![1.0; len],
        Window::Hann => (0..len)
            .map(|k| 0.5 * (1.0 - (TAU * k as f64 / len as f64).cos()))
            .collect(),
    }
}

/// A range-Doppler magnitude map: `pad_m` range rows by `pad_n` Doppler
/// columns in natural FFT order (negative Dopplers wrap to the top bins).
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pad_m: usize,
    pad_n: usize,
    /// Layout `data[k * pad_n + p]`, `k` range bin, `p` Doppler bin.
    data: Vec<Complex64>,
}

/// Companion metadata written next to a raw map dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdSidecar {
    pub pad_m: usize,
    pub pad_n: usize,
    pub layout: String,
    pub dtype: String,
}

impl RangeDopplerMap {
    pub fn pad_m(&self) -> usize {
        self.pad_m
    }

    pub fn pad_n(&self) -> usize {
        self.pad_n
    }

    pub fn value(&self, k: usize, p: usize) -> Complex64 {
        self.data[k * self.pad_n + p]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Mean of `|RD|^2` over the whole map.
    pub fn mean_power(&self) -> f64 {
        crate::mat::norm_sqr_kahan(&self.data) / (self.data.len() as f64)
    }

    /// Cell with the largest magnitude, `(k, p, magnitude)`.
    pub fn global_peak(&self) -> (usize, usize, f64) {
        self.peak_where(|_, _| true).expect("map is never empty")
    }

    /// Largest-magnitude cell among Doppler bins within `band` of zero
    /// (wrapped), `(k, p, magnitude)`.
    pub fn peak_in_doppler_band(&self, band: usize) -> Option<(usize, usize, f64)> {
        self.peak_where(|_, p| p.min(self.pad_n - p) <= band)
    }

    fn peak_where<F: Fn(usize, usize) -> bool>(&self, keep: F) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for k in 0..self.pad_m {
            for p in 0..self.pad_n {
                if !keep(k, p) {
                    continue;
                }
                let mag = self.value(k, p).norm();
                if best.map_or(true, |(_, _, b)| mag > b) {
                    best = Some((k, p, mag));
                }
            }
        }
        best
    }

    /// Range extent of one bin in meters.
    pub fn range_bin_m(&self, params: &FmcwParams) -> f64 {
        SPEED_OF_LIGHT * params.f_s / (2.0 * params.chirp_slope() * self.pad_m as f64)
    }

    /// Velocity extent of one Doppler bin in m/s (two-way convention).
    pub fn velocity_bin_mps(&self, params: &FmcwParams) -> f64 {
        params.wavelength() / (2.0 * params.t_c * self.pad_n as f64)
    }

    /// Write `k,p,db` rows (with header), dB relative to the map maximum.
    pub fn write_db_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,p,db")?;
        let (_, _, peak) = self.global_peak();
        for k in 0..self.pad_m {
            for p in 0..self.pad_n {
                let db = if peak > 0.0 {
                    amplitude_db(self.value(k, p).norm(), peak)
                } else {
                    DB_FLOOR
                };
                writeln!(out, "{k},{p},{db}")?;
            }
        }
        Ok(())
    }

    /// Dump the complex map as interleaved little-endian `f64` pairs in
    /// layout order; [`RangeDopplerMap::sidecar`] describes the blob.
    pub fn write_raw<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.data {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> RdSidecar {
        RdSidecar {
            pad_m: self.pad_m,
            pad_n: self.pad_n,
            layout: "row-major: range bin k outer, Doppler bin p inner".into(),
            dtype: "complex128 little-endian (re, im) pairs".into(),
        }
    }
}

/// Two-dimensional FFT of the sample block: windowed fast-time transform
/// per pulse, then slow-time transform per range bin. `None` pads default
/// to the next power of two of each dimension.
pub fn range_doppler_map(
    samples: &SampleMatrix,
    window: Window,
    pad_m: Option<usize>,
    pad_n: Option<usize>,
) -> Result<RangeDopplerMap> {
    let m_fast = samples.m_fast;
    let n_slow = samples.n_slow;
    let pad_m = pad_m.unwrap_or_else(|| m_fast.next_power_of_two());
    let pad_n = pad_n.unwrap_or_else(|| n_slow.next_power_of_two());
    if pad_m < m_fast || pad_n < n_slow {
        return Err(Error::InvalidDimension(format!(
            "padding must not truncate: pad_m {pad_m} vs m_fast {m_fast}, pad_n {pad_n} vs n_slow {n_slow}"
        )));
    }

    let w_fast = window_values(window, m_fast);
    let w_slow = window_values(window, n_slow);
    let mut planner = rustfft::FftPlanner::new();
    let fft_fast = planner.plan_fft_forward(pad_m);
    let fft_slow = planner.plan_fft_forward(pad_n);

    // Fast-time pass: one spectrum per pulse.
    let mut stage = vec![CZERO; n_slow * pad_m];
    let mut buf = vec![CZERO; pad_m];
    let mut scratch = vec![CZERO; fft_fast.get_inplace_scratch_len()];
    for n in 0..n_slow {
        buf.fill(CZERO);
        for m in 0..m_fast {
            buf[m] = samples.at(m, n) * (w_fast[m] * w_slow[n]);
        }
        fft_fast.process_with_scratch(&mut buf, &mut scratch);
        stage[n * pad_m..(n + 1) * pad_m].copy_from_slice(&buf);
    }

    // Slow-time pass: one Doppler spectrum per range bin.
    let mut data = vec![CZERO; pad_m * pad_n];
    let mut buf = vec![CZERO; pad_n];
    let mut scratch = vec![CZERO; fft_slow.get_inplace_scratch_len()];
    for k in 0..pad_m {
        buf.fill(CZERO);
        for n in 0..n_slow {
            buf[n] = stage[n * pad_m + k];
        }
        fft_slow.process_with_scratch(&mut buf, &mut scratch);
        data[k * pad_n..(k + 1) * pad_n].copy_from_slice(&buf);
    }

    Ok(RangeDopplerMap { pad_m, pad_n, data })
}

/// Interference-to-signal power ratio at the victim antenna, in dB:
///
/// ```text
/// 10 log10(4 pi) + 40 log10(R_T) - 20 log10(R_I)
///   + G_TI + G_RI - 2 G_T - 10 log10(rcs)
/// ```
///
/// `r_t_m` is the target range, `r_i_m` the interferer range, the gains
/// are the victim's toward its target (`g_t_db`), the interferer's toward
/// the victim (`g_ti_db`), and the victim's toward the interferer
/// (`g_ri_db`); `rcs_m2` is the target's radar cross-section. Positive
/// output means the direct interference outpowers the target echo.
pub fn power_ratio_db(
    r_t_m: f64,
    r_i_m: f64,
    g_t_db: f64,
    g_ti_db: f64,
    g_ri_db: f64,
    rcs_m2: f64,
) -> f64 {
    10.0 * (4.0 * std::f64::consts::PI).log10() + 40.0 * r_t_m.log10() - 20.0 * r_i_m.log10()
        + g_ti_db
        + g_ri_db
        - 2.0 * g_t_db
        - 10.0 * rcs_m2.log10()
}

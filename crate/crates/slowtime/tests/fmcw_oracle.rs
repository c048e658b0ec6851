//! The de-chirp synthesizer and range-Doppler processing against literal
//! transforms and first-principles frequency predictions.

mod common;

use std::f64::consts::TAU;

use num_complex::Complex64;
use slowtime::fmcw::{
    beat_frequency_hz, doppler_frequency_hz, range_doppler_map, synthesize_samples, CodingMode,
    SimScenario, Window,
};
use slowtime::types::{Emitter, EmitterKind, FmcwParams, SPEED_OF_LIGHT};

fn params() -> FmcwParams {
    FmcwParams {
        f_c: 24.0e9,
        bandwidth: 150.0e6,
        t_c: 50.0e-6,
        f_s: 4.0e6,
        m_fast: 24,
        n_slow: 16,
    }
}

fn clean_scenario(emitters: Vec<Emitter>) -> SimScenario {
    SimScenario {
        params: params(),
        emitters,
        noise_power: 0.0,
        seed: 9,
    }
}

/// Literal 2-D DFT of the sample matrix, no FFT, rectangular window.
fn rd_literal(
    samples: &slowtime::fmcw::SampleMatrix,
    pad_m: usize,
    pad_n: usize,
) -> Vec<Complex64> {
    let m_fast = samples.m_fast();
    let n_slow = samples.n_slow();
    let mut out = vec![Complex64::new(0.0, 0.0); pad_m * pad_n];
    for k in 0..pad_m {
        for p in 0..pad_n {
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..m_fast {
                for n in 0..n_slow {
                    let phase =
                        -TAU * ((k * m) as f64 / pad_m as f64 + (p * n) as f64 / pad_n as f64);
                    acc += samples.at(m, n) * Complex64::from_polar(1.0, phase);
                }
            }
            out[k * pad_n + p] = acc;
        }
    }
    out
}

#[test]
fn range_doppler_map_matches_literal_dft() {
    let sc = clean_scenario(vec![
        Emitter {
            range_m: 40.0,
            speed_mps: 8.0,
            snr_db: 20.0,
            kind: EmitterKind::Target,
            delay_lag: 0,
        },
        Emitter {
            range_m: 90.0,
            speed_mps: -14.0,
            snr_db: 30.0,
            kind: EmitterKind::Interferer,
            delay_lag: 0,
        },
    ]);
    let samples = synthesize_samples(&sc, &CodingMode::Uncoded).unwrap();
    let rd = range_doppler_map(&samples, Window::Rect, Some(32), Some(16)).unwrap();
    let literal = rd_literal(&samples, 32, 16);
    let mut worst = 0.0f64;
    for k in 0..32 {
        for p in 0..16 {
            let d = (rd.value(k, p) - literal[k * 16 + p]).norm();
            worst = worst.max(d);
        }
    }
    let scale = literal.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-9 * scale.max(1.0), "max deviation {worst}");
}

#[test]
fn beat_and_doppler_follow_the_round_trip_conventions() {
    let p = params();
    let k = p.chirp_slope();
    let target = Emitter {
        range_m: 50.0,
        speed_mps: 10.0,
        snr_db: 0.0,
        kind: EmitterKind::Target,
        delay_lag: 0,
    };
    let interferer = Emitter {
        range_m: 50.0,
        speed_mps: 10.0,
        snr_db: 0.0,
        kind: EmitterKind::Interferer,
        delay_lag: 0,
    };
    // Two-way for the reflection, one-way for the direct path.
    let expect_target = k * 2.0 * 50.0 / SPEED_OF_LIGHT;
    let expect_interferer = k * 50.0 / SPEED_OF_LIGHT;
    assert!((beat_frequency_hz(&target, &p) - expect_target).abs() < 1e-6);
    assert!((beat_frequency_hz(&interferer, &p) - expect_interferer).abs() < 1e-6);
    let lambda = p.wavelength();
    assert!((doppler_frequency_hz(&target, &p) - 2.0 * 10.0 / lambda).abs() < 1e-9);
    assert!((doppler_frequency_hz(&interferer, &p) - 10.0 / lambda).abs() < 1e-9);
}

#[test]
fn peaks_land_on_predicted_bins() {
    let p = params();
    let target = Emitter {
        range_m: 60.0,
        speed_mps: 12.0,
        snr_db: 25.0,
        kind: EmitterKind::Target,
        delay_lag: 0,
    };
    let sc = clean_scenario(vec![target.clone()]);
    let samples = synthesize_samples(&sc, &CodingMode::Uncoded).unwrap();
    let pad_m = 64;
    let pad_n = 64;
    let rd = range_doppler_map(&samples, Window::Rect, Some(pad_m), Some(pad_n)).unwrap();
    let (k_hat, p_hat, _) = rd.global_peak();
    let f_fast = beat_frequency_hz(&target, &p) / p.f_s;
    let f_slow = doppler_frequency_hz(&target, &p) * p.t_c;
    let k_pred = (f_fast * pad_m as f64).round() as usize % pad_m;
    let p_pred = (f_slow * pad_n as f64).round() as usize % pad_n;
    assert_eq!(k_hat, k_pred);
    assert_eq!(p_hat, p_pred);
}

#[test]
fn slow_time_sign_flip_moves_doppler_by_half_grid() {
    // Modulating slow time by (-1)^n is a circular Doppler shift of
    // exactly pad_n / 2 for even pad_n, whatever the window.
    let p = params();
    let interferer = Emitter {
        range_m: 80.0,
        speed_mps: 5.0,
        snr_db: 30.0,
        kind: EmitterKind::Interferer,
        delay_lag: 0,
    };
    let sc = clean_scenario(vec![interferer]);
    let uncoded = synthesize_samples(&sc, &CodingMode::Uncoded).unwrap();

    let ones = slowtime::types::Code::ones(p.n_slow).unwrap();
    let (_, flip) = slowtime::siso::doppler_shift_pair(p.n_slow).unwrap();
    let coded = synthesize_samples(
        &sc,
        &CodingMode::Coded {
            own: ones,
            other: flip,
        },
    )
    .unwrap();

    for window in [Window::Rect, Window::Hann] {
        let pad_n = 32;
        let rd_u = range_doppler_map(&uncoded, window, Some(32), Some(pad_n)).unwrap();
        let rd_c = range_doppler_map(&coded, window, Some(32), Some(pad_n)).unwrap();
        let (k_u, p_u, _) = rd_u.global_peak();
        let (k_c, p_c, _) = rd_c.global_peak();
        assert_eq!(k_u, k_c, "range bin must not move");
        assert_eq!((p_u + pad_n / 2) % pad_n, p_c, "{window:?}");
    }
}

#[test]
fn coded_target_returns_are_bit_identical() {
    let p = params();
    let sc = clean_scenario(vec![Emitter {
        range_m: 45.0,
        speed_mps: 7.0,
        snr_db: 15.0,
        kind: EmitterKind::Target,
        delay_lag: 0,
    }]);
    let own = slowtime::types::random_unimodular_code(p.n_slow, 2).unwrap();
    let other = slowtime::types::random_unimodular_code(p.n_slow, 3).unwrap();
    let uncoded = synthesize_samples(&sc, &CodingMode::Uncoded).unwrap();
    let coded = synthesize_samples(&sc, &CodingMode::Coded { own, other }).unwrap();
    for n in 0..p.n_slow {
        for m in 0..p.m_fast {
            assert_eq!(uncoded.at(m, n), coded.at(m, n));
        }
    }
}

#[test]
fn noise_energy_tracks_the_configured_power() {
    let mut sc = clean_scenario(vec![Emitter {
        range_m: 45.0,
        speed_mps: 0.0,
        snr_db: -300.0,
        kind: EmitterKind::Target,
        delay_lag: 0,
    }]);
    sc.noise_power = 2.5;
    sc.params.m_fast = 64;
    sc.params.n_slow = 64;
    let samples = synthesize_samples(&sc, &CodingMode::Uncoded).unwrap();
    let mean_power = samples.energy() / (64.0 * 64.0);
    // 4096 complex samples put the sample mean within a few percent.
    assert!(
        (mean_power - 2.5).abs() < 0.15,
        "mean noise power {mean_power}"
    );
}

#[test]
fn rect_window_preserves_energy_through_the_transform() {
    let sc = clean_scenario(vec![Emitter {
        range_m: 30.0,
        speed_mps: 3.0,
        snr_db: 12.0,
        kind: EmitterKind::Target,
        delay_lag: 0,
    }]);
    let samples = synthesize_samples(&sc, &CodingMode::Uncoded).unwrap();
    let pad_m = 32;
    let pad_n = 32;
    let rd = range_doppler_map(&samples, Window::Rect, Some(pad_m), Some(pad_n)).unwrap();
    let rd_energy: f64 = rd.data().iter().map(|v| v.norm_sqr()).sum();
    let expect = (pad_m * pad_n) as f64 * samples.energy();
    assert!(
        (rd_energy - expect).abs() < 1e-9 * expect,
        "{rd_energy} vs {expect}"
    );
}

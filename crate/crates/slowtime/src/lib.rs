//! Slow-time phase coding for de-chirped FMCW radar.
//!
//! Nearby FMCW radars with near-identical chirp parameters fold into each
//! other's range-Doppler maps as ghost targets. Because the chirps are almost
//! identical, the interference survives de-chirping and coherent integration
//! exactly like a real echo. This crate designs unit-modulus slow-time code
//! pairs (one phase per pulse, applied across the coherent processing
//! interval) that decorrelate the two radars in the Doppler dimension while
//! leaving each radar's own target returns untouched.
//!
//! The quantity being shaped is the periodic cross-ambiguity of the two code
//! sequences over pulse lag `l` and Doppler bin `p`:
//!
//! ```text
//! r(l, p) = sum_{n=1..N} conj(x_n) y_{(n+l) mod N} exp(-j 2 pi n p / N_f)
//! ```
//!
//! A victim radar sees the interferer through `|r(l, p)|` at the lag of the
//! pulse misalignment and at Doppler offsets inside the detection band, so
//! pushing `|r|` down over `|p| <= P` for every lag is what removes ghosts.
//!
//! # Modules
//!
//! - [`types`]: code vectors, code sets, design and waveform parameter
//!   structs, seeded code generation.
//! - [`codebook`]: the on-disk phase codebook format.
//! - [`pcaf`]: the ambiguity grid, the design objective, and the quadratic
//!   form matrices consumed by the optimizers (naive and fast builders).
//! - [`siso`]: the closed-form Doppler-shifting pair and the alternating
//!   two-code minimizer.
//! - [`mimo`]: coordinated design of full code sets for two radars with
//!   multiple simultaneous waveforms.
//! - [`fmcw`]: a de-chirped sample-level simulator and range-Doppler mapper
//!   for validating codes end to end.
//! - [`metrics`]: peak and integrated sidelobe measurements over
//!   configurable grid regions.
//!
//! # Example
//!
//! ```
//! use slowtime::siso::{design_siso, DesignMode};
//! use slowtime::types::DesignConfig;
//! use slowtime::metrics::{psl_db, RegionSpec};
//! use slowtime::pcaf::pcaf_grid;
//!
//! let cfg = DesignConfig {
//!     n_len: 16,
//!     p_max: 4,
//!     n_f: 32,
//!     outer_cap: 50,
//!     seed: 7,
//!     ..DesignConfig::default_for(16)
//! };
//! let run = design_siso(&cfg, None, None, DesignMode::Paired).unwrap();
//! let grid = pcaf_grid(&run.x, &run.y, &cfg).unwrap();
//! let psl = psl_db(&grid, &RegionSpec::zero_delay(cfg.p_max)).unwrap();
//! assert!(psl < 0.0);
//! ```

pub mod codebook;
pub mod error;
pub mod exec;
pub mod fmcw;
pub mod mat;
pub mod metrics;
pub mod mimo;
pub mod pcaf;
pub mod siso;
pub mod types;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

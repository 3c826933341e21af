//! Fraunhofer computer-generated holography under quantized SLM constraints.
//!
//! The replay field of a hologram is its unitary 2D DFT ([`field`]). Devices are
//! modelled as phase-only or amplitude-only level sets ([`modulation`]); holograms
//! are optimized pixel by pixel against a target's moduli ([`search`]) using the
//! phase-insensitive MSE ([`metrics`]). [`perturb`] holds the single-pixel studies.

pub mod error;
pub mod exec;
pub mod field;
pub mod metrics;
pub mod modulation;
pub mod perturb;
pub mod probe;
pub mod search;
pub mod target;

pub use error::{Error, Result};
pub use exec::Parallelism;
pub use field::{apply_pixel_delta, dft, idft, total_power, ComplexField};
pub use metrics::{mse_phase_insensitive, mse_power_matched, relative_error_pct, ErrorValue, Metric};
pub use modulation::{quantize_field, quantize_nearest, ModulationKind, ModulationScheme};
pub use num_complex::Complex64;
pub use perturb::{amplitude_sweep, phase_sweep, win_rate, SweepCurve, WinRate};
pub use search::{
    run_best_value_ds, run_direct_search, run_simulated_annealing, Algorithm, ConvergenceTrace,
    PixelOrder, RunConfig, Schedule, SearchRun, SearchState,
};
pub use target::{
    build_target, device_scaled_target, initial_hologram, load_grayscale, random_phase,
    symmetrize_180, RealGrid,
};

//! Guided-mode SPDC in layered planar waveguides.
//!
//! The crate computes TE slab-waveguide dispersion, biphoton spectral
//! amplitudes for chirped layered structures (aperiodically poled crystals
//! and photonic-crystal-like cores with index-matched layered cladding),
//! and modal-entanglement diagnostics over the resulting spectra.
//!
//! Internal unit system: lengths in μm, times in fs, phases in rad.
//! Propagation constants are rad/μm, angular frequencies rad/fs, so the
//! vacuum speed of light is 299.792458 μm/fs.

pub mod analysis;
pub mod cli;
pub mod modes;
pub mod spectrum;
pub mod structures;

/// Vacuum speed of light in μm/fs.
pub const SPEED_OF_LIGHT: f64 = 299.792458;

/// Angular frequency (rad/fs) of a vacuum wavelength (μm).
pub fn angular_frequency(lambda_um: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda_um
}

/// Vacuum wavelength (μm) of an angular frequency (rad/fs).
pub fn vacuum_wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}

/// sin(x)/x with the removable singularity handled by series expansion.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

//! Layered-structure builders and per-layer phase-mismatch profiles.
//!
//! Two families are supported: aperiodically poled crystals, where layer
//! lengths grow arithmetically (`l_m = l₀ + mς`) with alternating χ⁽²⁾ sign,
//! and photonic-crystal cores, where all layers share the same length while
//! the core refractive index climbs linearly with the layer number and the
//! cladding index follows the matching relation that keeps
//! `n_c,m² − n_cl,m²` layer-independent (and with it the transverse k_z).

use crate::modes::{ModeError, SlabGeometry, TaylorCoefficients};
use crate::{angular_frequency, vacuum_wavelength};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("layer {index} would have non-positive length {length_um} um")]
    InvalidLayerLength { index: usize, length_um: f64 },
    #[error("guidance violated in layer {index}: {message}")]
    GuidanceViolation { index: usize, message: String },
    #[error("structure must have at least one layer")]
    Empty,
    #[error(transparent)]
    Mode(#[from] ModeError),
}

/// Which of the three interacting waves a per-layer index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wave {
    Pump,
    Signal,
    Idler,
}

/// One nonlinear layer. χ⁽²⁾ magnitude is normalized to 1; only its sign is
/// carried. Indices are those seen by the signal/idler (subharmonic) waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub length_um: f64,
    /// Sign of χ⁽²⁾ in this layer, ±1.
    pub chi_sign: f64,
    pub core_index: f64,
    pub cladding_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureKind {
    AperiodicPoled,
    ChirpedPhotonicCrystal,
}

/// Refractive-index chirp slopes per wave (per μm) together with the spatial
/// chirp parameter α (rad/μm²) they induce.
///
/// The invariant `α = (ω_p/c)(ς_p − ς_s/2 − ς_i/2)` is maintained by both
/// constructors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpParameters {
    pub pump_slope: f64,
    pub signal_slope: f64,
    pub idler_slope: f64,
    pub alpha: f64,
}

impl ChirpParameters {
    /// Derive α from per-wave index slopes at pump wavelength λ_p.
    pub fn from_slopes(
        lambda_p_um: f64,
        pump_slope: f64,
        signal_slope: f64,
        idler_slope: f64,
    ) -> Self {
        let alpha = spatial_chirp_alpha(lambda_p_um, pump_slope, signal_slope, idler_slope);
        Self {
            pump_slope,
            signal_slope,
            idler_slope,
            alpha,
        }
    }

    /// Take a target α and realize it with a pump-index chirp alone.
    pub fn from_alpha(lambda_p_um: f64, alpha: f64) -> Self {
        // α = (ω_p/c)·ς_p = (2π/λ_p)·ς_p when ς_s = ς_i = 0.
        let pump_slope = alpha * lambda_p_um / (2.0 * PI);
        Self {
            pump_slope,
            signal_slope: 0.0,
            idler_slope: 0.0,
            alpha,
        }
    }

    pub fn slope(&self, wave: Wave) -> f64 {
        match wave {
            Wave::Pump => self.pump_slope,
            Wave::Signal => self.signal_slope,
            Wave::Idler => self.idler_slope,
        }
    }
}

/// α = (ω_p/c)(ς_p − ς_s/2 − ς_i/2), in rad/μm².
pub fn spatial_chirp_alpha(
    lambda_p_um: f64,
    pump_slope: f64,
    signal_slope: f64,
    idler_slope: f64,
) -> f64 {
    assert!(lambda_p_um > 0.0);
    let omega_over_c = 2.0 * PI / lambda_p_um;
    omega_over_c * (pump_slope - signal_slope / 2.0 - idler_slope / 2.0)
}

/// An ordered stack of nonlinear layers plus its builder metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredStructure {
    pub kind: StructureKind,
    pub layers: Vec<Layer>,
    /// l₀ (aperiodic) or the common layer length l (photonic crystal), μm.
    pub base_length_um: f64,
    /// ς, the layer-length increment (aperiodic only), μm.
    pub length_chirp_um: f64,
    /// Index chirp and α (photonic crystal only).
    pub chirp: Option<ChirpParameters>,
    /// First-layer cross-section the per-layer indices are built from.
    pub base_geometry: SlabGeometry,
    pub total_length_um: f64,
}

impl LayeredStructure {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn lengths_um(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.length_um).collect()
    }

    /// Mean layer length, μm.
    pub fn mean_length_um(&self) -> f64 {
        self.total_length_um / self.layers.len() as f64
    }

    /// Cross-section geometry seen by `wave` in layer `m` (0-based). The
    /// cladding index follows the matching relation, so the transverse k_z
    /// of a guided mode is the same in every layer.
    pub fn layer_geometry(&self, wave: Wave, m: usize) -> Result<SlabGeometry, StructureError> {
        let base = &self.base_geometry;
        let Some(chirp) = &self.chirp else {
            return Ok(*base);
        };
        let offset = m as f64 * self.base_length_um * chirp.slope(wave);
        let core = base.core_index + offset;
        let clad = matched_cladding_index(
            base.cladding_index,
            base.core_index,
            chirp.slope(wave),
            m,
            self.base_length_um,
        )?;
        SlabGeometry::new(base.height_um, core, clad, base.width_um).map_err(|e| {
            StructureError::GuidanceViolation {
                index: m,
                message: e.to_string(),
            }
        })
    }
}

/// Build an aperiodically poled stack: `l_m = l₀ + mς`, alternating χ sign
/// starting +1. ς may be negative as long as every layer stays positive.
pub fn build_aperiodic(
    l0_um: f64,
    chirp_um: f64,
    n_layers: usize,
    geometry: &SlabGeometry,
) -> Result<LayeredStructure, StructureError> {
    assert!(l0_um > 0.0 && n_layers >= 1);
    let mut layers = Vec::with_capacity(n_layers);
    let mut total = 0.0;
    for m in 0..n_layers {
        let length = l0_um + m as f64 * chirp_um;
        if length <= 0.0 {
            return Err(StructureError::InvalidLayerLength {
                index: m,
                length_um: length,
            });
        }
        layers.push(Layer {
            length_um: length,
            chi_sign: if m % 2 == 0 { 1.0 } else { -1.0 },
            core_index: geometry.core_index,
            cladding_index: geometry.cladding_index,
        });
        total += length;
    }
    Ok(LayeredStructure {
        kind: StructureKind::AperiodicPoled,
        layers,
        base_length_um: l0_um,
        length_chirp_um: chirp_um,
        chirp: None,
        base_geometry: *geometry,
        total_length_um: total,
    })
}

/// Build an aperiodically poled stack from its total length instead of l₀:
/// `l₀ = L/N − ς(N−1)/2`.
pub fn build_aperiodic_from_total(
    total_um: f64,
    chirp_um: f64,
    n_layers: usize,
    geometry: &SlabGeometry,
) -> Result<LayeredStructure, StructureError> {
    assert!(total_um > 0.0 && n_layers >= 1);
    let n = n_layers as f64;
    let l0 = total_um / n - chirp_um * (n - 1.0) / 2.0;
    if l0 <= 0.0 {
        return Err(StructureError::InvalidLayerLength {
            index: 0,
            length_um: l0,
        });
    }
    build_aperiodic(l0, chirp_um, n_layers, geometry)
}

/// Cladding index that keeps `n_c,m² − n_cl,m²` equal to its m = 0 value:
/// `n_cl,m = sqrt(n_cl₀² + m·l·ς·(2n_c₀ + m·l·ς))`.
pub fn matched_cladding_index(
    n_cl0: f64,
    n_c0: f64,
    slope: f64,
    m: usize,
    l_um: f64,
) -> Result<f64, StructureError> {
    let shift = m as f64 * l_um * slope;
    let radicand = n_cl0 * n_cl0 + shift * (2.0 * n_c0 + shift);
    if radicand <= 0.0 {
        return Err(StructureError::GuidanceViolation {
            index: m,
            message: format!("matched cladding radicand {radicand} <= 0"),
        });
    }
    let n_cl = radicand.sqrt();
    let n_c = n_c0 + shift;
    if n_cl >= n_c {
        return Err(StructureError::GuidanceViolation {
            index: m,
            message: format!("matched cladding {n_cl} >= core {n_c}"),
        });
    }
    Ok(n_cl)
}

/// Build a chirped photonic-crystal stack: N equal layers of length l,
/// alternating χ sign, core index climbing by `l·ς_q` per layer for each
/// wave q and cladding matched per layer.
pub fn build_chirped_pc(
    l_um: f64,
    n_layers: usize,
    base: &SlabGeometry,
    chirp: &ChirpParameters,
) -> Result<LayeredStructure, StructureError> {
    assert!(l_um > 0.0 && n_layers >= 1);
    let mut layers = Vec::with_capacity(n_layers);
    for m in 0..n_layers {
        // Validate guidance for every wave's slope, not just the stored one.
        for wave in [Wave::Pump, Wave::Signal, Wave::Idler] {
            let slope = chirp.slope(wave);
            let core = base.core_index + m as f64 * l_um * slope;
            let clad = matched_cladding_index(base.cladding_index, base.core_index, slope, m, l_um)?;
            if !(core > clad && clad > 0.0) {
                return Err(StructureError::GuidanceViolation {
                    index: m,
                    message: format!("{wave:?}: core {core} vs matched cladding {clad}"),
                });
            }
        }
        let s = chirp.slope(Wave::Signal);
        layers.push(Layer {
            length_um: l_um,
            chi_sign: if m % 2 == 0 { 1.0 } else { -1.0 },
            core_index: base.core_index + m as f64 * l_um * s,
            cladding_index: matched_cladding_index(
                base.cladding_index,
                base.core_index,
                s,
                m,
                l_um,
            )?,
        });
    }
    Ok(LayeredStructure {
        kind: StructureKind::ChirpedPhotonicCrystal,
        layers,
        base_length_um: l_um,
        length_chirp_um: 0.0,
        chirp: Some(*chirp),
        base_geometry: *base,
        total_length_um: l_um * n_layers as f64,
    })
}

/// Which Taylor orders of the detuning enter the phase-mismatch kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DetuningOrder {
    /// Δβ(Ω) = r + D·Ω
    Linear,
    /// Δβ(Ω) = r + D·Ω + B·Ω²
    #[default]
    Quadratic,
}

/// Per-layer phase mismatch Δβ_m at detuning Ω (rad/fs), in rad/μm.
///
/// The QPM offset is subtracted from Δβ₀, leaving the residual
/// `r = Δβ₀ − qpm_offset`. Aperiodic structures carry one common value per
/// layer; photonic crystals add `+α(m−1)l` (the sign convention of the
/// closed-form kernel; the paper's text uses the opposite sign, so callers
/// wanting that flip the sign of α).
pub fn phase_mismatch_profile(
    structure: &LayeredStructure,
    coeffs: &TaylorCoefficients,
    detuning: f64,
    qpm_offset: f64,
    order: DetuningOrder,
) -> Vec<f64> {
    assert!(!structure.layers.is_empty());
    let mut base = coeffs.delta_beta0 - qpm_offset + coeffs.group_delay_mismatch * detuning;
    if order == DetuningOrder::Quadratic {
        base += coeffs.dispersion * detuning * detuning;
    }
    match structure.kind {
        StructureKind::AperiodicPoled => vec![base; structure.layers.len()],
        StructureKind::ChirpedPhotonicCrystal => {
            let alpha = structure.chirp.as_ref().map(|c| c.alpha).unwrap_or(0.0);
            let l = structure.base_length_um;
            (0..structure.layers.len())
                .map(|m| base + alpha * m as f64 * l)
                .collect()
        }
    }
}

/// Convert a signal vacuum wavelength (μm) to the detuning Ω = ω_s − ω_p/2
/// (rad/fs).
pub fn detuning_from_signal_wavelength(lambda_s_um: f64, lambda_p_um: f64) -> f64 {
    angular_frequency(lambda_s_um) - angular_frequency(lambda_p_um) / 2.0
}

/// Inverse of [`detuning_from_signal_wavelength`].
pub fn signal_wavelength_from_detuning(detuning: f64, lambda_p_um: f64) -> f64 {
    vacuum_wavelength(angular_frequency(lambda_p_um) / 2.0 + detuning)
}

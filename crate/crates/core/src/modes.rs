//! TE slab-waveguide modes: transcendental dispersion equations, effective
//! indices, propagation constants, and finite-difference Taylor coefficients
//! of the phase mismatch around the degenerate SPDC frequency.
//!
//! A symmetric slab of height `H` (core index `n_c`, cladding `n_cl`) guides
//! TE mode μ where the branch equation
//! `cos(H·n_z·ω/2c − μπ/2) = n_z / sqrt(n_c² − n_cl²)`
//! has a root with `H·n_z·ω/2c` in `[μπ/2, (μ+1)π/2)`. All material indices
//! are treated as wavelength-independent; every dispersive effect here is
//! modal.

use crate::{angular_frequency, vacuum_wavelength, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModeError {
    #[error("invalid slab geometry: {0}")]
    InvalidGeometry(String),
    #[error("n_z = {n_z} lies outside (0, {max}] — no guided solution there")]
    Domain { n_z: f64, max: f64 },
    #[error("mode {mode} is not guided at lambda = {lambda_um} um")]
    Cutoff { mode: u32, lambda_um: f64 },
    #[error("no guided samples on the requested wavelength grid")]
    EmptyCurve,
    #[error("curve has too few samples for an order-{order} derivative")]
    InsufficientStencil { order: u32 },
    #[error("finite-difference stencil hit cutoff: mode {mode} at lambda = {lambda_um} um")]
    Stencil { mode: u32, lambda_um: f64 },
}

/// Carried polarization tag. Type-II SPDC assigns distinct labels to signal
/// and idler; no polarization physics is attached to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Polarization {
    #[default]
    H,
    V,
}

/// Physical cross-section of the guiding slab. Lengths in μm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGeometry {
    /// Core height H (μm).
    pub height_um: f64,
    /// Core refractive index n_c.
    pub core_index: f64,
    /// Cladding refractive index n_cl.
    pub cladding_index: f64,
    /// Core width L_y (μm); enters only overall spectrum normalization.
    pub width_um: f64,
}

impl SlabGeometry {
    pub fn new(
        height_um: f64,
        core_index: f64,
        cladding_index: f64,
        width_um: f64,
    ) -> Result<Self, ModeError> {
        if !(height_um > 0.0) || !(width_um > 0.0) {
            return Err(ModeError::InvalidGeometry(format!(
                "H = {height_um}, L_y = {width_um}: both must be positive"
            )));
        }
        if !(core_index > cladding_index && cladding_index > 0.0) {
            return Err(ModeError::InvalidGeometry(format!(
                "need n_c > n_cl > 0, got n_c = {core_index}, n_cl = {cladding_index}"
            )));
        }
        Ok(Self {
            height_um,
            core_index,
            cladding_index,
            width_um,
        })
    }

    /// sqrt(n_c² − n_cl²): the upper bound of the transverse index n_z.
    pub fn index_contrast(&self) -> f64 {
        (self.core_index * self.core_index - self.cladding_index * self.cladding_index).sqrt()
    }
}

/// Spatial mode order plus its carried polarization tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeIndex {
    pub order: u32,
    pub polarization: Polarization,
}

impl ModeIndex {
    pub fn new(order: u32) -> Self {
        Self {
            order,
            polarization: Polarization::H,
        }
    }

    pub fn with_polarization(order: u32, polarization: Polarization) -> Self {
        Self {
            order,
            polarization,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.order % 2 == 1
    }
}

/// One guided solution of the branch equation at a fixed vacuum wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSolution {
    /// Vacuum wavelength λ (μm).
    pub lambda_um: f64,
    /// Effective refractive index, n_cl ≤ n_eff < n_c.
    pub n_eff: f64,
    /// Transverse index component, n_z = sqrt(n_c² − n_eff²).
    pub n_z: f64,
    /// Propagation constant β = n_eff·2π/λ (rad/μm).
    pub beta: f64,
    /// Transverse wave-vector component k_z = n_z·2π/λ (rad/μm).
    pub k_z: f64,
}

/// Signed residual of the mode-μ transcendental equation at a trial n_z.
///
/// Uses the general cosine branch form; zero iff `n_z` solves the mode-μ
/// equation. `solve_mode` drives this to below 1e−12.
pub fn transcendental_residual(
    geometry: &SlabGeometry,
    mode: u32,
    lambda_um: f64,
    n_z: f64,
) -> Result<f64, ModeError> {
    let contrast = geometry.index_contrast();
    if !(n_z > 0.0) || n_z > contrast * (1.0 + 1e-12) {
        return Err(ModeError::Domain {
            n_z,
            max: contrast,
        });
    }
    let x = PI * geometry.height_um * n_z / lambda_um; // H·n_z·ω/(2c)
    Ok((x - mode as f64 * PI / 2.0).cos() - n_z / contrast)
}

/// The cosc/sinc low-order forms of the dispersion equation, for μ ∈ {0, 1}.
///
/// Algebraically the general residual divided by `H·n_z·ω/2c`; kept as an
/// independent route so the two printed forms can be cross-checked.
pub fn low_order_residual(
    geometry: &SlabGeometry,
    mode: u32,
    lambda_um: f64,
    n_z: f64,
) -> Result<f64, ModeError> {
    assert!(mode <= 1, "low-order forms exist only for modes 0 and 1");
    let contrast = geometry.index_contrast();
    if !(n_z > 0.0) || n_z > contrast * (1.0 + 1e-12) {
        return Err(ModeError::Domain {
            n_z,
            max: contrast,
        });
    }
    let omega = angular_frequency(lambda_um);
    let x = geometry.height_um * n_z * omega / (2.0 * SPEED_OF_LIGHT);
    let rhs = 2.0 * SPEED_OF_LIGHT / (geometry.height_um * omega * contrast);
    let lhs = if mode == 0 { x.cos() / x } else { x.sin() / x };
    Ok(lhs - rhs)
}

/// Residual as a function of the branch variable x = H·n_z·ω/(2c).
fn branch_residual(x: f64, mode: u32, x_max: f64) -> f64 {
    (x - mode as f64 * PI / 2.0).cos() - x / x_max
}

/// Solve the mode-μ transcendental equation at vacuum wavelength λ.
///
/// The root is bracketed on the branch `x ∈ [μπ/2, (μ+1)π/2)` where the
/// residual crosses zero exactly once, then bisected until the residual is
/// annihilated to below 1e−12.
pub fn solve_mode(
    geometry: &SlabGeometry,
    mode: u32,
    lambda_um: f64,
) -> Result<ModeSolution, ModeError> {
    assert!(lambda_um > 0.0, "wavelength must be positive");
    let contrast = geometry.index_contrast();
    let scale = PI * geometry.height_um / lambda_um; // x = scale·n_z
    let x_max = scale * contrast;
    let x_lo = mode as f64 * PI / 2.0;
    let x_hi = (mode as f64 + 1.0) * PI / 2.0;
    if x_lo >= x_max {
        // Branch interval carries no sign change: the mode is cut off.
        return Err(ModeError::Cutoff {
            mode,
            lambda_um,
        });
    }
    let mut lo = x_lo;
    let mut hi = x_hi.min(x_max);
    // residual(lo) ≥ 0 (cos(0) = 1, n_z/S < 1), residual(hi) ≤ 0.
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = branch_residual(mid, mode, x_max);
        if r.abs() < 1e-15 {
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == mid {
            break;
        }
        mid = next;
    }
    let n_z = mid / scale;
    let n_eff = (geometry.core_index * geometry.core_index - n_z * n_z).sqrt();
    let two_pi_over_lambda = 2.0 * PI / lambda_um;
    Ok(ModeSolution {
        lambda_um,
        n_eff,
        n_z,
        beta: n_eff * two_pi_over_lambda,
        k_z: n_z * two_pi_over_lambda,
    })
}

/// Tabulated n_eff(λ) for one mode. Grid points past cutoff are recorded as
/// absent, never interpolated.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    pub mode: ModeIndex,
    pub geometry: SlabGeometry,
    pub lambdas_um: Vec<f64>,
    pub solutions: Vec<Option<ModeSolution>>,
}

impl DispersionCurve {
    /// Contiguous wavelength span of the guided samples, if any.
    pub fn guided_window(&self) -> Option<(f64, f64)> {
        let mut lo = None;
        let mut hi = None;
        for (lambda, sol) in self.lambdas_um.iter().zip(&self.solutions) {
            if sol.is_some() {
                lo.get_or_insert(*lambda);
                hi = Some(*lambda);
            }
        }
        Some((lo?, hi?))
    }

    pub fn guided_samples(&self) -> impl Iterator<Item = &ModeSolution> {
        self.solutions.iter().filter_map(|s| s.as_ref())
    }

    /// dn_eff/dλ on the tabulated grid (central difference, one-sided at
    /// the ends). Requires the stencil neighbors to be guided.
    pub fn first_derivative(&self, i: usize) -> Result<f64, ModeError> {
        let n = self.lambdas_um.len();
        if n < 2 {
            return Err(ModeError::InsufficientStencil { order: 1 });
        }
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        match (&self.solutions[a], &self.solutions[b]) {
            (Some(sa), Some(sb)) => {
                Ok((sb.n_eff - sa.n_eff) / (self.lambdas_um[b] - self.lambdas_um[a]))
            }
            _ => Err(ModeError::Stencil {
                mode: self.mode.order,
                lambda_um: self.lambdas_um[i],
            }),
        }
    }

    /// d²n_eff/dλ² on the tabulated grid. Refused outright on curves that
    /// cannot hold a three-point stencil.
    pub fn second_derivative(&self, i: usize) -> Result<f64, ModeError> {
        let n = self.lambdas_um.len();
        if n < 3 {
            return Err(ModeError::InsufficientStencil { order: 2 });
        }
        let j = i.clamp(1, n - 2);
        let h = self.lambdas_um[1] - self.lambdas_um[0];
        match (
            &self.solutions[j - 1],
            &self.solutions[j],
            &self.solutions[j + 1],
        ) {
            (Some(sa), Some(sb), Some(sc)) => Ok((sa.n_eff - 2.0 * sb.n_eff + sc.n_eff) / (h * h)),
            _ => Err(ModeError::Stencil {
                mode: self.mode.order,
                lambda_um: self.lambdas_um[i],
            }),
        }
    }
}

/// Sample `solve_mode` on a uniform wavelength grid.
pub fn dispersion_curve(
    geometry: &SlabGeometry,
    mode: ModeIndex,
    lambda_min_um: f64,
    lambda_max_um: f64,
    n_samples: usize,
) -> Result<DispersionCurve, ModeError> {
    assert!(
        lambda_min_um > 0.0 && lambda_min_um < lambda_max_um && n_samples >= 2,
        "need 0 < lambda_min < lambda_max and n_samples >= 2"
    );
    let step = (lambda_max_um - lambda_min_um) / (n_samples - 1) as f64;
    let mut lambdas = Vec::with_capacity(n_samples);
    let mut solutions = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let lambda = lambda_min_um + i as f64 * step;
        lambdas.push(lambda);
        solutions.push(solve_mode(geometry, mode.order, lambda).ok());
    }
    if solutions.iter().all(|s| s.is_none()) {
        return Err(ModeError::EmptyCurve);
    }
    Ok(DispersionCurve {
        mode,
        geometry: *geometry,
        lambdas_um: lambdas,
        solutions,
    })
}

/// Second-order expansion of the phase mismatch around the degenerate
/// frequency ω_p/2:
/// `Δβ(Ω) = Δβ₀ + D·Ω + B·Ω²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    /// Δβ₀ = β_s(ω_p/2) + β_i(ω_p/2) − β_p(ω_p), rad/μm.
    pub delta_beta0: f64,
    /// D = β′_s(ω_p/2) − β′_i(ω_p/2), fs/μm (group-delay mismatch of the
    /// subharmonic modes).
    pub group_delay_mismatch: f64,
    /// B = (β″_s(ω_p/2) + β″_i(ω_p/2))/2, fs²/μm. The paper leaves the
    /// derivative combination behind B unstated; this symmetric form is the
    /// standard degenerate expansion and is an interpretation.
    pub dispersion: f64,
    /// Pump vacuum wavelength the expansion was taken at (μm).
    pub pump_wavelength_um: f64,
}

/// Relative finite-difference step for the frequency derivatives.
const FD_STEP_FRACTION: f64 = 1e-3;

/// β(ω) for the curve's mode/geometry, solved fresh (not interpolated).
fn beta_at(curve: &DispersionCurve, omega: f64) -> Result<f64, ModeError> {
    let lambda = vacuum_wavelength(omega);
    solve_mode(&curve.geometry, curve.mode.order, lambda)
        .map(|s| s.beta)
        .map_err(|_| ModeError::Stencil {
            mode: curve.mode.order,
            lambda_um: lambda,
        })
    }

/// Five-point central first and second derivatives of β with respect to ω.
fn beta_derivatives(curve: &DispersionCurve, omega: f64, h: f64) -> Result<(f64, f64), ModeError> {
    let m2 = beta_at(curve, omega - 2.0 * h)?;
    let m1 = beta_at(curve, omega - h)?;
    let p0 = beta_at(curve, omega)?;
    let p1 = beta_at(curve, omega + h)?;
    let p2 = beta_at(curve, omega + 2.0 * h)?;
    let first = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let second = (-p2 + 16.0 * p1 - 30.0 * p0 + 16.0 * m1 - m2) / (12.0 * h * h);
    Ok((first, second))
}

/// Expand the phase mismatch of a (pump, signal, idler) mode triple to
/// second order in the detuning Ω around ω_p/2.
///
/// Derivatives are taken by five-point central differences on freshly
/// solved points with step `1e−3·ω_p/2`, not on the tabulated grids; the
/// curves supply geometry, mode order, and the guided-window check.
pub fn taylor_coefficients(
    curve_p: &DispersionCurve,
    curve_s: &DispersionCurve,
    curve_i: &DispersionCurve,
    lambda_p_um: f64,
) -> Result<TaylorCoefficients, ModeError> {
    let omega_p = angular_frequency(lambda_p_um);
    let omega_0 = omega_p / 2.0;
    let h = FD_STEP_FRACTION * omega_0;

    let beta_p = beta_at(curve_p, omega_p)?;
    let (bs0, (bs1, bs2)) = (
        beta_at(curve_s, omega_0)?,
        beta_derivatives(curve_s, omega_0, h)?,
    );
    let (bi0, (bi1, bi2)) = (
        beta_at(curve_i, omega_0)?,
        beta_derivatives(curve_i, omega_0, h)?,
    );

    Ok(TaylorCoefficients {
        delta_beta0: bs0 + bi0 - beta_p,
        group_delay_mismatch: bs1 - bi1,
        dispersion: (bs2 + bi2) / 2.0,
        pump_wavelength_um: lambda_p_um,
    })
}

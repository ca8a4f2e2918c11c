//! Optical cell dimensioning from Gaussian-beam power budgets.
//!
//! A ceiling transceiver illuminates its floor cell with a Gaussian beam of
//! radius `W`. The irradiance (power density, W/m²) at radial offset `ρ` from
//! the beam axis is
//!
//! ```text
//! I(ρ) = 2·P / (π·W²) · exp(−2·ρ²/W²)
//! ```
//!
//! where `P` is the launch power. Requiring the irradiance at the cell edge
//! (offset `r`) to meet the receiver sensitivity `I_r` and solving for `P`
//! gives the launch-power budget
//!
//! ```text
//! P = I_r·π·W² / (2·exp(−2·r²/W²))
//! ```
//!
//! Minimizing that budget over the beam radius yields `W = r·√2`, at which
//! point the budget collapses to `P = I_r·π·e·r²`, or inverted, the largest
//! cell radius a power budget can sustain:
//!
//! ```text
//! r = √(P / (I_r·π·e))
//! ```
//!
//! All quantities are SI: watts, meters, watts per square meter.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::positioning::Point2D;

/// Errors from the coverage calculations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverageError {
    /// A quantity that must be strictly positive was zero, negative, or not
    /// finite.
    #[error("{name} must be a positive finite number, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    /// A quantity that must be non-negative was negative or not finite.
    #[error("{name} must be a non-negative finite number, got {value}")]
    Negative { name: &'static str, value: f64 },
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, CoverageError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CoverageError::NonPositive { name, value })
    }
}

fn require_non_negative(name: &'static str, value: f64) -> Result<f64, CoverageError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(CoverageError::Negative { name, value })
    }
}

/// A ceiling transmitter's Gaussian beam, described at the floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBeam {
    /// Optical launch power, watts. Strictly positive.
    pub launch_power_p: f64,
    /// Beam radius at the floor plane, meters. Strictly positive.
    pub beam_radius_w: f64,
}

impl GaussianBeam {
    /// Builds a beam, validating that both parameters are strictly positive.
    pub fn new(launch_power_p: f64, beam_radius_w: f64) -> Result<Self, CoverageError> {
        require_positive("launch_power_p", launch_power_p)?;
        require_positive("beam_radius_w", beam_radius_w)?;
        Ok(Self {
            launch_power_p,
            beam_radius_w,
        })
    }
}

/// Receiver characteristics of a mobile node's photodiode front end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSpec {
    /// Minimum irradiance at which the receiver decodes the signal, W/m².
    pub sensitivity_ir: f64,
    /// Photodiode area in m², carried for received-power reporting only; the
    /// connectivity decision uses irradiance directly.
    pub detector_area: Option<f64>,
}

impl ReceiverSpec {
    /// Builds a receiver spec, validating positivity of the sensitivity and,
    /// when present, of the detector area.
    pub fn new(sensitivity_ir: f64, detector_area: Option<f64>) -> Result<Self, CoverageError> {
        require_positive("sensitivity_ir", sensitivity_ir)?;
        if let Some(area) = detector_area {
            require_positive("detector_area", area)?;
        }
        Ok(Self {
            sensitivity_ir,
            detector_area,
        })
    }
}

/// One floor cell served by a dedicated ceiling transceiver.
///
/// `cell_id` uniqueness is a property of the grid that owns the cells; this
/// type only validates its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// Identifier, unique within a grid.
    pub cell_id: String,
    /// Center of the cell on the floor plane, meters.
    pub center: Point2D,
    /// Radius of the covered sub-area, meters. Strictly positive.
    pub radius_r: f64,
}

impl Cell {
    /// Builds a cell, validating the radius.
    pub fn new(cell_id: impl Into<String>, center: Point2D, radius_r: f64) -> Result<Self, CoverageError> {
        require_positive("radius_r", radius_r)?;
        Ok(Self {
            cell_id: cell_id.into(),
            center,
            radius_r,
        })
    }
}

/// Launch power needed so that a beam of radius `w` delivers irradiance `ir`
/// at radial offset `r`: `P = ir·π·w² / (2·exp(−2·r²/w²))`.
///
/// Strictly increasing in `r` for fixed `w` and `ir`.
pub fn required_launch_power(ir: f64, w: f64, r: f64) -> Result<f64, CoverageError> {
    require_positive("ir", ir)?;
    require_positive("w", w)?;
    require_non_negative("r", r)?;
    Ok(ir * std::f64::consts::PI * w * w / (2.0 * (-2.0 * r * r / (w * w)).exp()))
}

/// Largest cell radius a launch power `p` can cover at receiver sensitivity
/// `ir`, assuming the power-optimal beam radius: `r = √(p / (ir·π·e))`.
///
/// Monotone in `p`: quadrupling the power doubles the radius.
pub fn max_cell_radius(p: f64, ir: f64) -> Result<f64, CoverageError> {
    require_non_negative("p", p)?;
    require_positive("ir", ir)?;
    Ok((p / (ir * std::f64::consts::PI * std::f64::consts::E)).sqrt())
}

/// Irradiance of `beam` at radial offset `rho` from the beam axis:
/// `I(ρ) = 2·P/(π·W²)·exp(−2·ρ²/W²)`.
///
/// Strictly decreasing in `rho`; inverts [`required_launch_power`]:
/// `required_launch_power(irradiance_at(beam, ρ), W, ρ) = P`.
pub fn irradiance_at(beam: &GaussianBeam, rho: f64) -> Result<f64, CoverageError> {
    require_non_negative("rho", rho)?;
    let w2 = beam.beam_radius_w * beam.beam_radius_w;
    Ok(2.0 * beam.launch_power_p / (std::f64::consts::PI * w2) * (-2.0 * rho * rho / w2).exp())
}

/// The beam radius that minimizes the launch power needed to cover a cell of
/// radius `r`: `W = r·√2`.
///
/// At this optimum the power budget is exactly `ir·π·e·r²`. Expects `r ≥ 0`.
pub fn optimal_beam_radius(r: f64) -> f64 {
    debug_assert!(r >= 0.0, "cell radius must be non-negative");
    r * std::f64::consts::SQRT_2
}

/// Whether a receiver at radial offset `rho` from the beam axis decodes the
/// signal: true iff the irradiance there meets the receiver sensitivity.
/// Equality counts as connected (the sensitivity is defined at the periphery).
///
/// The irradiance profile is radially symmetric, so the sign of `rho` is
/// ignored; this makes the predicate total.
pub fn is_connected(beam: &GaussianBeam, receiver: &ReceiverSpec, rho: f64) -> bool {
    let rho = rho.abs();
    // Safe: |rho| is non-negative and the beam invariants hold by construction.
    let irr = irradiance_at(beam, rho).expect("non-negative offset");
    irr >= receiver.sensitivity_ir
}

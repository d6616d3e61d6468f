//! Clear-sky SNR from a forward-link budget.

use crate::error::{domain, Result};

/// `10 log10(k)` for Boltzmann's constant, dBW/K/Hz.
pub const BOLTZMANN_DBW: f64 = -228.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetEntry {
    /// Transmit EIRP including back-off, dBW.
    pub eirp_dbw: f64,
    pub free_space_loss_db: f64,
    /// Receiver figure of merit, dB/K.
    pub g_over_t_dbk: f64,
    pub bandwidth_hz: f64,
    pub boltzmann_dbw: f64,
}

impl BudgetEntry {
    pub fn new(
        eirp_dbw: f64,
        free_space_loss_db: f64,
        g_over_t_dbk: f64,
        bandwidth_hz: f64,
    ) -> Self {
        Self {
            eirp_dbw,
            free_space_loss_db,
            g_over_t_dbk,
            bandwidth_hz,
            boltzmann_dbw: BOLTZMANN_DBW,
        }
    }
}

/// `EIRP - FSL + G/T - k - 10 log10(B)`, in dB.
pub fn clear_sky_snr(entry: &BudgetEntry) -> Result<f64> {
    let BudgetEntry {
        eirp_dbw,
        free_space_loss_db,
        g_over_t_dbk,
        bandwidth_hz,
        boltzmann_dbw,
    } = *entry;
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return domain(format!("bandwidth must be positive, got {bandwidth_hz} Hz"));
    }
    let terms = [eirp_dbw, free_space_loss_db, g_over_t_dbk, boltzmann_dbw];
    if terms.iter().any(|v| !v.is_finite()) {
        return domain("link budget entries must be finite");
    }
    Ok(eirp_dbw - free_space_loss_db + g_over_t_dbk - boltzmann_dbw - 10.0 * bandwidth_hz.log10())
}

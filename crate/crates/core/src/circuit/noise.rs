use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the GHZ error rate is applied to a freshly prepared GHZ state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GhzChannel {
    /// Independent single-qubit depolarizing noise of rate `p_ghz` on every
    /// GHZ qubit.
    #[default]
    PerQubit,
    /// One uniformly random non-identity Pauli on the whole state with total
    /// probability `p_ghz`.
    Joint,
}

/// Circuit-level noise rates.
///
/// `uniform(p)` sets every local rate to `p`; the network rates `p_ghz` and
/// `p_bell` are independent knobs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Two-qubit depolarizing rate after each local CNOT/CZ.
    pub p_gate: f64,
    /// Classical flip probability of each measurement outcome.
    pub p_meas: f64,
    /// Flip after each reset (X after Z-reset, Z after X-reset).
    pub p_reset: f64,
    /// Single-qubit depolarizing rate per idle tick.
    pub p_idle: f64,
    /// GHZ preparation error rate, applied according to `ghz_channel`.
    pub p_ghz: f64,
    #[serde(default)]
    pub ghz_channel: GhzChannel,
    /// Two-qubit depolarizing rate on each consumed Bell pair.
    pub p_bell: f64,
    /// Teleported CNOTs carry noise on each local operation instead of one
    /// lumped channel equal to the replaced CNOT.
    #[serde(default)]
    pub gadget_per_operation: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel::uniform(0.0)
    }

    pub fn uniform(p: f64) -> Self {
        NoiseModel {
            p_gate: p,
            p_meas: p,
            p_reset: p,
            p_idle: p,
            p_ghz: 0.0,
            ghz_channel: GhzChannel::PerQubit,
            p_bell: 0.0,
            gadget_per_operation: false,
        }
    }

    pub fn with_ghz(mut self, p_ghz: f64) -> Self {
        self.p_ghz = p_ghz;
        self
    }

    pub fn with_bell(mut self, p_bell: f64) -> Self {
        self.p_bell = p_bell;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in [
            self.p_gate,
            self.p_meas,
            self.p_reset,
            self.p_idle,
            self.p_ghz,
            self.p_bell,
        ] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(Error::InvalidProbability(p));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        [
            self.p_gate,
            self.p_meas,
            self.p_reset,
            self.p_idle,
            self.p_ghz,
            self.p_bell,
        ]
        .iter()
        .all(|&p| p == 0.0)
    }
}

/// Bell-pair depolarizing rate for a target fidelity: `p = 5/4 (1 - F)`.
pub fn bell_fidelity_to_p(fidelity: f64) -> Result<f64> {
    if !(0.2..=1.0).contains(&fidelity) {
        return Err(Error::FidelityOutOfRange(fidelity));
    }
    // Rounded to 12 decimals so decimal inputs give decimal outputs (0.96 -> 0.05).
    Ok((1.25 * (1.0 - fidelity) * 1e12).round() / 1e12)
}

/// Inverse of [`bell_fidelity_to_p`]: `F = 1 - 4/5 p`.
pub fn bell_p_to_fidelity(p_bell: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_bell) {
        return Err(Error::InvalidProbability(p_bell));
    }
    Ok(1.0 - 0.8 * p_bell)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_conversion_values() {
        assert_eq!(bell_fidelity_to_p(0.96).unwrap(), 0.05);
        assert_eq!(bell_fidelity_to_p(0.99).unwrap(), 0.0125);
        assert_eq!(bell_fidelity_to_p(1.0).unwrap(), 0.0);
        assert!(bell_fidelity_to_p(0.1).is_err());
        assert!(bell_fidelity_to_p(1.01).is_err());
    }

    #[test]
    fn fidelity_round_trip() {
        for i in 0..=80 {
            let f = 0.2 + 0.01 * i as f64;
            let p = bell_fidelity_to_p(f).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!((bell_p_to_fidelity(p).unwrap() - f).abs() < 1e-11);
        }
    }

    #[test]
    fn validate_rejects_out_of_range() {
        assert!(NoiseModel::uniform(0.001).validate().is_ok());
        assert!(NoiseModel::uniform(1.5).validate().is_err());
        assert!(NoiseModel::uniform(0.0).with_bell(-0.1).validate().is_err());
        assert!(NoiseModel::noiseless().is_noiseless());
    }
}

//! Rotary-wing propulsion power and the energy-queue discharge model.
//!
//! Communication power is a few watts against a few hundred for flight, so
//! only propulsion drains the queue.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const GRAVITY_MPS2: f64 = 9.8;

/// Pack capacity of the reference airframe: 89.224 Wh.
pub const DEFAULT_CAPACITY_J: f64 = 89.224 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CruiseFormula {
    /// Blade-profile term scales with `3 v^2 / U_tip^2`.
    #[default]
    #[serde(rename = "tip-squared")]
    TipSquared,
    /// Blade-profile term scales with `3 v^2 / U_tip`.
    #[serde(rename = "as-printed")]
    AsPrinted,
}

/// Rotorcraft constants. `weight_n` is a force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavPowerParams {
    pub delta: f64,
    pub rho: f64,
    pub s_solidity: f64,
    pub a_disc: f64,
    pub omega: f64,
    pub r_rotor: f64,
    pub k_induced: f64,
    pub weight_n: f64,
    pub u_tip: f64,
    pub v0: f64,
    pub d0: f64,
    pub cruise_formula: CruiseFormula,
}

impl Default for UavPowerParams {
    fn default() -> Self {
        UavPowerParams {
            delta: 0.012,
            rho: 1.225,
            s_solidity: 0.05,
            a_disc: 0.503,
            omega: 300.0,
            r_rotor: 0.4,
            k_induced: 0.1,
            weight_n: 1.375 * GRAVITY_MPS2,
            u_tip: 120.0,
            v0: 4.03,
            d0: 0.6,
            cruise_formula: CruiseFormula::TipSquared,
        }
    }
}

impl UavPowerParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.delta,
            self.rho,
            self.s_solidity,
            self.a_disc,
            self.omega,
            self.r_rotor,
            self.k_induced,
            self.weight_n,
            self.u_tip,
            self.v0,
            self.d0,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("all UAV power parameters must be > 0".into()));
        }
        Ok(())
    }

    /// Blade-profile power in hover.
    pub fn profile_power_w(&self) -> f64 {
        self.delta / 8.0
            * self.rho
            * self.s_solidity
            * self.a_disc
            * self.omega.powi(3)
            * self.r_rotor.powi(3)
    }

    /// Induced power in hover.
    pub fn induced_power_w(&self) -> f64 {
        (1.0 + self.k_induced) * self.weight_n.powf(1.5) / (2.0 * self.rho * self.a_disc).sqrt()
    }
}

pub fn hover_power_w(p: &UavPowerParams) -> f64 {
    p.profile_power_w() + p.induced_power_w()
}

/// Forward-flight power at airspeed `v_mps`.
pub fn cruise_power_w(v_mps: f64, p: &UavPowerParams) -> f64 {
    let v2 = v_mps * v_mps;
    let tip = match p.cruise_formula {
        CruiseFormula::TipSquared => p.u_tip * p.u_tip,
        CruiseFormula::AsPrinted => p.u_tip,
    };
    let blade = p.profile_power_w() * (1.0 + 3.0 * v2 / tip);
    let v0_2 = p.v0 * p.v0;
    let induced_factor = ((1.0 + v2 * v2 / (4.0 * v0_2 * v0_2)).sqrt() - v2 / (2.0 * v0_2))
        .max(0.0)
        .sqrt();
    let induced = p.induced_power_w() * induced_factor;
    let parasite = 0.5 * p.d0 * p.rho * p.s_solidity * p.a_disc * v2 * v_mps;
    blade + induced + parasite
}

/// Remaining battery energy in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyQueue {
    q_joules: f64,
    q_init_joules: f64,
}

impl EnergyQueue {
    pub fn full(capacity_j: f64) -> Self {
        EnergyQueue {
            q_joules: capacity_j,
            q_init_joules: capacity_j,
        }
    }

    pub fn joules(&self) -> f64 {
        self.q_joules
    }

    pub fn capacity(&self) -> f64 {
        self.q_init_joules
    }

    /// Remaining energy as a fraction of the initial charge.
    pub fn fraction(&self) -> f64 {
        if self.q_init_joules > 0.0 {
            self.q_joules / self.q_init_joules
        } else {
            0.0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.q_joules <= 0.0
    }

    /// `q' = max(0, q - power * dt)`.
    pub fn step(self, power_w: f64, dt_s: f64) -> Self {
        let spent = (power_w * dt_s).max(0.0);
        EnergyQueue {
            q_joules: (self.q_joules - spent).max(0.0),
            ..self
        }
    }
}

pub fn queue_step(q: EnergyQueue, power_w: f64, dt_s: f64) -> EnergyQueue {
    q.step(power_w, dt_s)
}

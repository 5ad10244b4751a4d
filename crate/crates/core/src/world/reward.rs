//! UE association, link rates and the three reward factors.

use serde::{Deserialize, Serialize};

use super::overlap::{overlap_degree, Disk};
use super::{AgentMetrics, StepMetrics, UavId, UavSnapshot, UavState, WorldConfig, WorldState};
use crate::radio::{interference_mw, rx_power_dbm, LinkGeometry, RadioModel};

/// How residual energy enters the energy reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyReward {
    /// Fraction of the initial charge, in [0, 1].
    #[default]
    Fraction,
    /// Raw joules.
    Joules,
}

/// Serving UAV of every UE (`None` when outside every live footprint).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    pub served_by: Vec<Option<UavId>>,
}

impl Association {
    pub fn apply(&self, state: &mut WorldState) {
        for (ue, s) in state.ues.iter_mut().zip(&self.served_by) {
            ue.served_by = *s;
        }
    }

    pub fn served(&self) -> usize {
        self.served_by.iter().filter(|s| s.is_some()).count()
    }
}

fn covers(u: &UavState, ue_pos: crate::Vec3, cfg: &WorldConfig, radio: &RadioModel) -> bool {
    let r = radio.coverage.radius_m(u.pos.z, ue_pos.z, cfg.beamwidth_deg);
    r > 0.0 && u.pos.horizontal_distance(ue_pos) <= r
}

/// Attaches every UE to the live UAV with the strongest received power among
/// those whose footprint contains it; ties go to the lowest UAV id.
pub fn associate(state: &WorldState, cfg: &WorldConfig, radio: &RadioModel) -> Association {
    let served_by = state
        .ues
        .iter()
        .map(|ue| {
            let mut best: Option<(UavId, f64)> = None;
            for u in state.uavs.iter().filter(|u| u.alive) {
                if !covers(u, ue.pos, cfg, radio) {
                    continue;
                }
                let Ok(p) = rx_power_dbm(u.pos.distance(ue.pos), &radio.link) else {
                    continue;
                };
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((u.id, p));
                }
            }
            best.map(|(id, _)| id)
        })
        .collect();
    Association { served_by }
}

/// Fraction of UEs with a server.
pub fn support_rate(state: &WorldState) -> f64 {
    if state.ues.is_empty() {
        return 0.0;
    }
    state.ues.iter().filter(|u| u.served_by.is_some()).count() as f64 / state.ues.len() as f64
}

pub fn reward_energy(u: &UavState, mode: EnergyReward) -> f64 {
    let e = match mode {
        EnergyReward::Fraction => u.energy.fraction(),
        EnergyReward::Joules => u.energy.joules(),
    };
    e.max(0.0)
}

pub fn reward_common(tau: f64, omega: f64) -> f64 {
    tau / (1.0 + omega)
}

pub fn reward_total(r_e: f64, r_u: f64, r_c: f64) -> f64 {
    r_e * r_u * r_c
}

/// Per-link rates and QoS plus the system-level coverage figures.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    /// Actual rate of each UE's link, 0 when unserved.
    pub rate_mbps: Vec<f64>,
    /// QoS of each UE, 0 when unserved.
    pub qos: Vec<f64>,
    pub tau: f64,
    pub omega: f64,
}

impl LinkReport {
    pub fn compute(
        state: &WorldState,
        assoc: &Association,
        cfg: &WorldConfig,
        radio: &RadioModel,
    ) -> Self {
        // One beam per transmitting UAV, aimed at its nearest served UE.
        let beams: Vec<(UavId, LinkGeometry)> = state
            .uavs
            .iter()
            .filter(|u| u.alive)
            .filter_map(|u| {
                let target = state
                    .ues
                    .iter()
                    .zip(&assoc.served_by)
                    .filter(|(_, s)| **s == Some(u.id))
                    .map(|(ue, _)| ue.pos)
                    .min_by(|a, b| u.pos.distance(*a).total_cmp(&u.pos.distance(*b)))?;
                Some((u.id, LinkGeometry::aimed(u.pos, target)))
            })
            .collect();

        let n = state.ues.len();
        let mut rate_mbps = vec![0.0; n];
        let mut qos = vec![0.0; n];
        for (i, (ue, server)) in state.ues.iter().zip(&assoc.served_by).enumerate() {
            let Some(sid) = *server else { continue };
            let tx = state.uavs[sid].pos;
            let victim = LinkGeometry::aimed(tx, ue.pos);
            let others: Vec<LinkGeometry> = beams
                .iter()
                .filter(|(id, _)| *id != sid)
                .map(|(_, g)| *g)
                .collect();
            let rate = rx_power_dbm(tx.distance(ue.pos), &radio.link)
                .and_then(|rx| {
                    let itf = interference_mw(&victim, &others, &radio.link, &radio.antenna)?;
                    radio.link_rate_mbps(rx, itf)
                })
                .unwrap_or(0.0);
            rate_mbps[i] = rate;
            qos[i] = radio.quality.eval(rate, ue.service);
        }

        let tau = if n == 0 { 0.0 } else { assoc.served() as f64 / n as f64 };
        let disks: Vec<Disk> = state
            .uavs
            .iter()
            .filter(|u| u.alive)
            .map(|u| Disk {
                x: u.pos.x,
                y: u.pos.y,
                r: radio.coverage.radius_m(u.pos.z, 0.0, cfg.beamwidth_deg),
            })
            .collect();
        let omega = overlap_degree(&disks, cfg.overlap_samples, cfg.overlap_formula);
        LinkReport {
            rate_mbps,
            qos,
            tau,
            omega,
        }
    }

    /// Quality reward of one UAV: summed QoS of the UEs it serves.
    pub fn reward_quality(&self, id: UavId, state: &WorldState) -> f64 {
        state
            .ues
            .iter()
            .zip(&self.qos)
            .filter(|(ue, _)| ue.served_by == Some(id))
            .map(|(_, q)| q)
            .sum()
    }

    pub fn metrics(&self, state: &WorldState, cfg: &WorldConfig) -> StepMetrics {
        let r_c = reward_common(self.tau, self.omega);
        let agents: Vec<AgentMetrics> = state
            .agents()
            .map(|u| {
                let r_e = reward_energy(u, cfg.energy_reward);
                let r_u = self.reward_quality(u.id, state);
                AgentMetrics {
                    id: u.id,
                    r_e,
                    r_u,
                    r_total: reward_total(r_e, r_u, r_c),
                    energy_j: u.energy.joules(),
                    served: state.served_count(u.id),
                }
            })
            .collect();
        let served_agents = agents.iter().map(|a| a.served).sum();
        let served_total = state.ues.iter().filter(|u| u.served_by.is_some()).count();
        StepMetrics {
            step: state.step,
            tau: self.tau,
            omega: self.omega,
            r_common: r_c,
            agents,
            served_total,
            served_agents,
            served_nonagents: served_total - served_agents,
            total_qos: self.qos.iter().sum(),
            uavs: state
                .uavs
                .iter()
                .map(|u| UavSnapshot {
                    id: u.id,
                    kind: u.kind,
                    x: u.pos.x,
                    y: u.pos.y,
                    z: u.pos.z,
                    alive: u.alive,
                })
                .collect(),
        }
    }
}

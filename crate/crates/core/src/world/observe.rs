//! Fixed-width agent observations.
//!
//! Layout (all lengths normalized by the grid extent):
//!
//! ```text
//! [x, y, z, energy_fraction]
//! N   UE slots:        [present, dx, dy, dz, dist, served_any, served_by_self]
//! M-1 agent slots:     [present, dx, dy, dz, dist]
//! K   non-agent slots: [present, dx, dy, dz, dist]
//! ```
//!
//! Slots within a group are ordered by distance. Entities farther than the
//! observation radius (closed ball) or dead UAVs leave their slot zeroed with
//! `present = 0`. In FOMDP mode every live entity is present.

use super::{UavId, WorldConfig, WorldState};
use crate::Vec3;

pub const SELF_FEATURES: usize = 4;
pub const UE_FEATURES: usize = 7;
pub const UAV_FEATURES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationLayout {
    pub n_ues: usize,
    pub n_peers: usize,
    pub n_nonagents: usize,
}

impl ObservationLayout {
    pub fn new(cfg: &WorldConfig) -> Self {
        ObservationLayout {
            n_ues: cfg.n_ues,
            n_peers: cfg.m_agents - 1,
            n_nonagents: cfg.k_nonagents,
        }
    }

    pub fn width(&self) -> usize {
        SELF_FEATURES
            + UE_FEATURES * self.n_ues
            + UAV_FEATURES * (self.n_peers + self.n_nonagents)
    }

    pub fn ue_offset(&self, slot: usize) -> usize {
        SELF_FEATURES + UE_FEATURES * slot
    }

    pub fn peer_offset(&self, slot: usize) -> usize {
        SELF_FEATURES + UE_FEATURES * self.n_ues + UAV_FEATURES * slot
    }

    pub fn nonagent_offset(&self, slot: usize) -> usize {
        self.peer_offset(self.n_peers) + UAV_FEATURES * slot
    }
}

pub fn observation_width(cfg: &WorldConfig) -> usize {
    ObservationLayout::new(cfg).width()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub agent: UavId,
    pub features: Vec<f64>,
    /// Presence flag per slot, in layout order (UEs, peers, non-agents).
    pub mask: Vec<bool>,
}

struct Scale {
    grid: Vec3,
    diag: f64,
}

impl Scale {
    fn write(&self, out: &mut [f64], rel: Vec3, dist: f64) {
        out[0] = 1.0;
        out[1] = rel.x / self.grid.x;
        out[2] = rel.y / self.grid.y;
        out[3] = rel.z / self.grid.z;
        out[4] = dist / self.diag;
    }
}

pub fn observe(
    state: &WorldState,
    agent: UavId,
    cfg: &WorldConfig,
    layout: &ObservationLayout,
) -> Observation {
    let me = &state.uavs[agent];
    let grid = cfg.grid();
    let scale = Scale {
        grid,
        diag: grid.norm(),
    };
    let visible = |d: f64| cfg.fomdp || d <= cfg.obs_radius_m;

    let mut f = vec![0.0; layout.width()];
    let mut mask = vec![false; layout.n_ues + layout.n_peers + layout.n_nonagents];
    f[0] = me.pos.x / grid.x;
    f[1] = me.pos.y / grid.y;
    f[2] = me.pos.z / grid.z;
    f[3] = me.energy.fraction();

    let mut ues: Vec<(f64, usize)> = state
        .ues
        .iter()
        .enumerate()
        .map(|(i, ue)| (me.pos.distance(ue.pos), i))
        .collect();
    ues.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut slot = 0;
    for (d, i) in ues {
        if !visible(d) {
            continue;
        }
        let ue = &state.ues[i];
        let o = layout.ue_offset(slot);
        scale.write(&mut f[o..o + 5], ue.pos - me.pos, d);
        f[o + 5] = ue.served_by.is_some() as u8 as f64;
        f[o + 6] = (ue.served_by == Some(agent)) as u8 as f64;
        mask[slot] = true;
        slot += 1;
    }

    let mut fill = |ids: Vec<(f64, Vec3)>, offset: &dyn Fn(usize) -> usize, mask_base: usize| {
        let mut ids = ids;
        ids.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (slot, (d, rel)) in ids.into_iter().filter(|(d, _)| visible(*d)).enumerate() {
            let o = offset(slot);
            scale.write(&mut f[o..o + 5], rel, d);
            mask[mask_base + slot] = true;
        }
    };
    let peers: Vec<(f64, Vec3)> = state
        .agents()
        .filter(|u| u.id != agent && u.alive)
        .map(|u| (me.pos.distance(u.pos), u.pos - me.pos))
        .collect();
    fill(peers, &|s| layout.peer_offset(s), layout.n_ues);
    let others: Vec<(f64, Vec3)> = state
        .nonagents()
        .filter(|u| u.alive)
        .map(|u| (me.pos.distance(u.pos), u.pos - me.pos))
        .collect();
    fill(others, &|s| layout.nonagent_offset(s), layout.n_ues + layout.n_peers);

    Observation {
        agent,
        features: f,
        mask,
    }
}

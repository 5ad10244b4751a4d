//! Multi-UAV access-network environment.
//!
//! `M` agent UAV-BSs (one leader) and `K` fixed non-agent UAV-BSs serve `N`
//! moving UEs on a 3D grid. Each step the agents pick one of seven moves,
//! UEs drift, non-agents may malfunction, UEs re-associate, and every agent
//! receives `r_e * r_u * r_c`.

mod observe;
mod overlap;
mod reward;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

pub use crate::geom::Vec3;
use crate::energy::{cruise_power_w, hover_power_w, EnergyQueue, UavPowerParams, DEFAULT_CAPACITY_J};
use crate::radio::{RadioModel, ServiceType};
use crate::rng::{stream, stream_rng, SimRng};
use crate::{Error, Result};

pub use observe::{observation_width, observe, Observation, ObservationLayout};
pub use overlap::{overlap_degree, Disk, OverlapFormula};
pub use reward::{
    associate, reward_common, reward_energy, reward_total, support_rate, Association, EnergyReward,
    LinkReport,
};

pub type UavId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UavKind {
    LeaderAgent,
    Agent,
    NonAgent,
}

impl UavKind {
    pub fn is_agent(self) -> bool {
        !matches!(self, UavKind::NonAgent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub id: UavId,
    pub kind: UavKind,
    pub pos: Vec3,
    pub energy: EnergyQueue,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UeState {
    pub pos: Vec3,
    pub service: ServiceType,
    /// Velocity of the last drift step, m/s.
    pub velocity: Vec3,
    pub served_by: Option<UavId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Hover,
    XPlus,
    XMinus,
    YPlus,
    YMinus,
    ZUp,
    ZDown,
}

impl Action {
    pub const COUNT: usize = 7;
    pub const ALL: [Action; 7] = [
        Action::Hover,
        Action::XPlus,
        Action::XMinus,
        Action::YPlus,
        Action::YMinus,
        Action::ZUp,
        Action::ZDown,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }
}

/// `[world]` section of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub n_ues: usize,
    pub m_agents: usize,
    pub k_nonagents: usize,
    pub grid_x_m: f64,
    pub grid_y_m: f64,
    pub grid_z_m: f64,
    pub altitude_levels_m: Vec<f64>,
    pub beamwidth_deg: f64,
    pub step_dt_s: f64,
    pub episode_steps: usize,
    pub uav_speed_mps: f64,
    pub malfunction_prob: f64,
    pub obs_radius_m: f64,
    pub fomdp: bool,
    pub seed: u64,
    pub ue_max_speed_mps: f64,
    /// Mean of the per-axis exponential UE placement, measured from the
    /// origin corner.
    pub ue_mean_xy_m: f64,
    pub ue_mean_z_m: f64,
    pub nonagent_radius_m: f64,
    pub nonagent_alt_m: f64,
    /// Relative weights of video, gaming, web and VoIP at UE placement.
    pub service_weights: [f64; 4],
    pub overlap_samples: usize,
    pub overlap_formula: OverlapFormula,
    pub energy_reward: EnergyReward,
    pub battery_capacity_j: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_ues: 25,
            m_agents: 4,
            k_nonagents: 3,
            grid_x_m: 6000.0,
            grid_y_m: 6000.0,
            grid_z_m: 2500.0,
            altitude_levels_m: vec![1500.0, 2000.0, 2500.0],
            beamwidth_deg: 80.0,
            step_dt_s: 45.0,
            episode_steps: 40,
            uav_speed_mps: 20.0,
            malfunction_prob: 0.03,
            obs_radius_m: 2500.0,
            fomdp: false,
            seed: 0,
            ue_max_speed_mps: 3.0 / 3.6,
            ue_mean_xy_m: 1500.0,
            ue_mean_z_m: 1500.0,
            nonagent_radius_m: 3000.0,
            nonagent_alt_m: 2000.0,
            service_weights: [1.0; 4],
            overlap_samples: 10_000,
            overlap_formula: OverlapFormula::MultiCovered,
            energy_reward: EnergyReward::Fraction,
            battery_capacity_j: DEFAULT_CAPACITY_J,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.m_agents < 2 {
            return bad("m_agents must be >= 2 (a leader and at least one follower)");
        }
        if self.altitude_levels_m.is_empty()
            || self.altitude_levels_m.windows(2).any(|w| w[1] <= w[0])
        {
            return bad("altitude_levels_m must be non-empty and strictly ascending");
        }
        if self.altitude_levels_m.iter().any(|&z| z <= 0.0 || z > self.grid_z_m) {
            return bad("altitude levels must lie inside (0, grid_z_m]");
        }
        if !(self.grid_x_m > 0.0 && self.grid_y_m > 0.0 && self.grid_z_m > 0.0) {
            return bad("grid dimensions must be > 0");
        }
        if !(self.beamwidth_deg > 0.0 && self.beamwidth_deg < 180.0) {
            return bad("beamwidth_deg must be in (0, 180)");
        }
        if !(self.step_dt_s > 0.0) || self.episode_steps == 0 {
            return bad("step_dt_s and episode_steps must be > 0");
        }
        if !(0.0..=1.0).contains(&self.malfunction_prob) {
            return bad("malfunction_prob must be in [0, 1]");
        }
        if self.obs_radius_m < 0.0 || self.uav_speed_mps < 0.0 || self.ue_max_speed_mps < 0.0 {
            return bad("radii and speeds must be >= 0");
        }
        if !(self.ue_mean_xy_m > 0.0 && self.ue_mean_z_m > 0.0) {
            return bad("UE placement means must be > 0");
        }
        if self.service_weights.iter().any(|w| *w < 0.0) || self.service_weights.iter().sum::<f64>() <= 0.0 {
            return bad("service_weights must be non-negative with a positive sum");
        }
        if self.overlap_samples == 0 || !(self.battery_capacity_j > 0.0) {
            return bad("overlap_samples and battery_capacity_j must be > 0");
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec3 {
        Vec3::new(self.grid_x_m, self.grid_y_m, self.grid_z_m)
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new(self.grid_x_m / 2.0, self.grid_y_m / 2.0, self.middle_level())
    }

    pub fn middle_level(&self) -> f64 {
        self.altitude_levels_m[self.altitude_levels_m.len() / 2]
    }

    pub fn leader_id(&self) -> UavId {
        self.m_agents - 1
    }

    pub fn n_uavs(&self) -> usize {
        self.m_agents + self.k_nonagents
    }

    pub fn xy_step_m(&self) -> f64 {
        self.uav_speed_mps * self.step_dt_s
    }
}

/// Full simulation state at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub step: usize,
    pub uavs: Vec<UavState>,
    pub ues: Vec<UeState>,
}

impl WorldState {
    pub fn agents(&self) -> impl Iterator<Item = &UavState> {
        self.uavs.iter().filter(|u| u.kind.is_agent())
    }

    pub fn nonagents(&self) -> impl Iterator<Item = &UavState> {
        self.uavs.iter().filter(|u| !u.kind.is_agent())
    }

    pub fn served_count(&self, id: UavId) -> usize {
        self.ues.iter().filter(|u| u.served_by == Some(id)).count()
    }
}

/// Outcome of applying one action to one UAV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionEffect {
    Applied,
    /// The UAV is dead or not an agent; nothing changed.
    Ignored,
}

/// Moves an agent UAV and drains its battery for one step.
pub fn apply_action(
    u: &UavState,
    a: Action,
    cfg: &WorldConfig,
    power: &UavPowerParams,
) -> (UavState, ActionEffect) {
    if !u.alive || !u.kind.is_agent() {
        return (*u, ActionEffect::Ignored);
    }
    let step = cfg.xy_step_m();
    let mut pos = u.pos;
    match a {
        Action::Hover => {}
        Action::XPlus => pos.x += step,
        Action::XMinus => pos.x -= step,
        Action::YPlus => pos.y += step,
        Action::YMinus => pos.y -= step,
        Action::ZUp | Action::ZDown => {
            let levels = &cfg.altitude_levels_m;
            let cur = levels
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - pos.z).abs().total_cmp(&(b.1 - pos.z).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let next = if a == Action::ZUp {
                (cur + 1).min(levels.len() - 1)
            } else {
                cur.saturating_sub(1)
            };
            pos.z = levels[next];
        }
    }
    let power_w = if a == Action::Hover {
        hover_power_w(power)
    } else {
        cruise_power_w(cfg.uav_speed_mps, power)
    };
    let energy = u.energy.step(power_w, cfg.step_dt_s);
    let next = UavState {
        pos: pos.clamp_box(cfg.grid()),
        energy,
        alive: !energy.is_empty(),
        ..*u
    };
    (next, ActionEffect::Applied)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    pub id: UavId,
    pub r_e: f64,
    pub r_u: f64,
    pub r_total: f64,
    pub energy_j: f64,
    pub served: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavSnapshot {
    pub id: UavId,
    pub kind: UavKind,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alive: bool,
}

/// Per-step metrics record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub tau: f64,
    pub omega: f64,
    pub r_common: f64,
    pub agents: Vec<AgentMetrics>,
    pub served_total: usize,
    pub served_agents: usize,
    pub served_nonagents: usize,
    pub total_qos: f64,
    pub uavs: Vec<UavSnapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// `r_total` per agent, indexed by agent id.
    pub rewards: Vec<f64>,
    pub r_common: f64,
    pub observations: Vec<Observation>,
    pub done: bool,
    pub metrics: StepMetrics,
}

/// An episode executor: owns the state and its random streams.
#[derive(Debug, Clone)]
pub struct World {
    cfg: WorldConfig,
    radio: RadioModel,
    power: UavPowerParams,
    layout: ObservationLayout,
    state: WorldState,
    world_rng: SimRng,
    malfunction_rng: SimRng,
    episode: u64,
}

impl World {
    pub fn new(cfg: WorldConfig, radio: RadioModel, power: UavPowerParams) -> Result<Self> {
        cfg.validate()?;
        power.validate()?;
        let layout = ObservationLayout::new(&cfg);
        let seed = cfg.seed;
        let mut w = World {
            state: WorldState {
                step: 0,
                uavs: Vec::new(),
                ues: Vec::new(),
            },
            world_rng: stream_rng(seed, stream::WORLD, 0),
            malfunction_rng: stream_rng(seed, stream::MALFUNCTION, 0),
            cfg,
            radio,
            power,
            layout,
            episode: 0,
        };
        w.reset_episode(0);
        Ok(w)
    }

    pub fn with_defaults(cfg: WorldConfig) -> Result<Self> {
        World::new(cfg, RadioModel::default(), UavPowerParams::default())
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn radio(&self) -> &RadioModel {
        &self.radio
    }

    pub fn power(&self) -> &UavPowerParams {
        &self.power
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn layout(&self) -> &ObservationLayout {
        &self.layout
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn is_done(&self) -> bool {
        self.state.step >= self.cfg.episode_steps
    }

    /// Re-seeds the episode streams and returns the initial state.
    pub fn reset(&mut self) -> &WorldState {
        self.reset_episode(0)
    }

    /// Initial state of episode `episode`; each episode index gets its own
    /// UE layout and malfunction stream derived from the master seed.
    pub fn reset_episode(&mut self, episode: u64) -> &WorldState {
        let cfg = &self.cfg;
        self.episode = episode;
        self.world_rng = stream_rng(cfg.seed, stream::WORLD, episode);
        self.malfunction_rng = stream_rng(cfg.seed, stream::MALFUNCTION, episode);

        let mut uavs = Vec::with_capacity(cfg.n_uavs());
        let center = cfg.center();
        for id in 0..cfg.m_agents {
            uavs.push(UavState {
                id,
                kind: if id == cfg.leader_id() {
                    UavKind::LeaderAgent
                } else {
                    UavKind::Agent
                },
                pos: center,
                energy: EnergyQueue::full(cfg.battery_capacity_j),
                alive: true,
            });
        }
        for k in 0..cfg.k_nonagents {
            let theta = std::f64::consts::TAU * k as f64 / cfg.k_nonagents as f64;
            let pos = Vec3::new(
                center.x + cfg.nonagent_radius_m * theta.cos(),
                center.y + cfg.nonagent_radius_m * theta.sin(),
                cfg.nonagent_alt_m,
            )
            .clamp_box(cfg.grid());
            uavs.push(UavState {
                id: cfg.m_agents + k,
                kind: UavKind::NonAgent,
                pos,
                energy: EnergyQueue::full(cfg.battery_capacity_j),
                alive: true,
            });
        }

        let exp_xy = Exp::new(1.0 / cfg.ue_mean_xy_m).expect("positive rate");
        let exp_z = Exp::new(1.0 / cfg.ue_mean_z_m).expect("positive rate");
        let wsum: f64 = cfg.service_weights.iter().sum();
        let grid = cfg.grid();
        let rng = &mut self.world_rng;
        let ues = (0..cfg.n_ues)
            .map(|_| {
                let pos = Vec3::new(exp_xy.sample(rng), exp_xy.sample(rng), exp_z.sample(rng))
                    .clamp_box(grid);
                let mut pick = rng.random::<f64>() * wsum;
                let mut service = ServiceType::VoIP;
                for (s, w) in ServiceType::ALL.iter().zip(cfg.service_weights) {
                    if pick < w {
                        service = *s;
                        break;
                    }
                    pick -= w;
                }
                UeState {
                    pos,
                    service,
                    velocity: Vec3::ZERO,
                    served_by: None,
                }
            })
            .collect();

        self.state = WorldState { step: 0, uavs, ues };
        let assoc = associate(&self.state, &self.cfg, &self.radio);
        assoc.apply(&mut self.state);
        &self.state
    }

    pub fn observe(&self, agent: UavId) -> Observation {
        observe(&self.state, agent, &self.cfg, &self.layout)
    }

    /// Observations of every agent, by agent id.
    pub fn observations(&self) -> Vec<Observation> {
        (0..self.cfg.m_agents).map(|m| self.observe(m)).collect()
    }

    /// Association, link rates, overlap and rewards of the current state.
    pub fn evaluate(&self) -> (LinkReport, StepMetrics) {
        let assoc = associate(&self.state, &self.cfg, &self.radio);
        let report = LinkReport::compute(&self.state, &assoc, &self.cfg, &self.radio);
        let metrics = report.metrics(&self.state, &self.cfg);
        (report, metrics)
    }

    /// Advances one step under the per-agent `actions` (indexed by agent id).
    pub fn step(&mut self, actions: &[Action]) -> Result<StepOutcome> {
        if self.is_done() {
            return Err(Error::State(format!(
                "episode finished after {} steps",
                self.cfg.episode_steps
            )));
        }
        if actions.len() != self.cfg.m_agents {
            return Err(Error::Shape(format!(
                "expected {} actions, got {}",
                self.cfg.m_agents,
                actions.len()
            )));
        }

        for (m, &a) in actions.iter().enumerate() {
            let (next, _) = apply_action(&self.state.uavs[m], a, &self.cfg, &self.power);
            self.state.uavs[m] = next;
        }

        let dt = self.cfg.step_dt_s;
        let grid = self.cfg.grid();
        for ue in &mut self.state.ues {
            let heading = self.world_rng.random_range(0.0..std::f64::consts::TAU);
            let speed = self.world_rng.random_range(0.0..=self.cfg.ue_max_speed_mps);
            let v = Vec3::new(speed * heading.cos(), speed * heading.sin(), 0.0);
            ue.velocity = v;
            ue.pos = (ue.pos + v * dt).clamp_box(grid);
        }

        let p = self.cfg.malfunction_prob;
        for u in self.state.uavs.iter_mut().filter(|u| !u.kind.is_agent() && u.alive) {
            if self.malfunction_rng.random::<f64>() < p {
                u.alive = false;
            }
        }

        self.state.step += 1;
        let assoc = associate(&self.state, &self.cfg, &self.radio);
        assoc.apply(&mut self.state);
        let report = LinkReport::compute(&self.state, &assoc, &self.cfg, &self.radio);
        let metrics = report.metrics(&self.state, &self.cfg);
        Ok(StepOutcome {
            rewards: metrics.agents.iter().map(|a| a.r_total).collect(),
            r_common: metrics.r_common,
            observations: self.observations(),
            done: self.is_done(),
            metrics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(cfg: WorldConfig) -> World {
        World::with_defaults(cfg).unwrap()
    }

    #[test]
    fn reset_counts_and_placement() {
        let w = world(WorldConfig::default());
        let s = w.state();
        assert_eq!(s.ues.len(), 25);
        assert_eq!(s.agents().count(), 4);
        assert_eq!(s.nonagents().count(), 3);
        assert_eq!(s.uavs.iter().filter(|u| u.kind == UavKind::LeaderAgent).count(), 1);
        for a in s.agents() {
            assert_eq!(a.pos, Vec3::new(3000.0, 3000.0, 2000.0));
        }
        for h in s.nonagents() {
            let d = h.pos.horizontal_distance(Vec3::new(3000.0, 3000.0, 0.0));
            assert!((d - 3000.0).abs() < 1e-6);
        }
        for u in &s.uavs {
            assert!((u.energy.joules() - 321_206.4).abs() < 1e-6);
        }
        assert_eq!(s.step, 0);
    }

    #[test]
    fn reset_is_deterministic() {
        let a = world(WorldConfig { seed: 5, ..Default::default() });
        let b = world(WorldConfig { seed: 5, ..Default::default() });
        assert_eq!(a.state(), b.state());
        let c = world(WorldConfig { seed: 6, ..Default::default() });
        assert_ne!(a.state(), c.state());
    }

    #[test]
    fn invalid_configs_rejected() {
        let one_agent = WorldConfig { m_agents: 1, ..Default::default() };
        assert!(World::with_defaults(one_agent).is_err());
        let unsorted = WorldConfig {
            altitude_levels_m: vec![2000.0, 1500.0],
            ..Default::default()
        };
        assert!(World::with_defaults(unsorted).is_err());
    }

    #[test]
    fn action_kinematics() {
        let cfg = WorldConfig::default();
        let p = UavPowerParams::default();
        let u = UavState {
            id: 0,
            kind: UavKind::Agent,
            pos: Vec3::new(3000.0, 3000.0, 2000.0),
            energy: EnergyQueue::full(cfg.battery_capacity_j),
            alive: true,
        };
        let (x, _) = apply_action(&u, Action::XPlus, &cfg, &p);
        assert_eq!(x.pos, Vec3::new(3900.0, 3000.0, 2000.0));
        let (y, _) = apply_action(&u, Action::YMinus, &cfg, &p);
        assert_eq!(y.pos, Vec3::new(3000.0, 2100.0, 2000.0));

        let top = UavState { pos: Vec3::new(3000.0, 3000.0, 2500.0), ..u };
        assert_eq!(apply_action(&top, Action::ZUp, &cfg, &p).0.pos.z, 2500.0);
        assert_eq!(apply_action(&top, Action::ZDown, &cfg, &p).0.pos.z, 2000.0);
        let bottom = UavState { pos: Vec3::new(3000.0, 3000.0, 1500.0), ..u };
        assert_eq!(apply_action(&bottom, Action::ZDown, &cfg, &p).0.pos.z, 1500.0);

        let edge = UavState { pos: Vec3::new(5800.0, 100.0, 2000.0), ..u };
        assert_eq!(apply_action(&edge, Action::XPlus, &cfg, &p).0.pos.x, 6000.0);
        assert_eq!(apply_action(&edge, Action::YMinus, &cfg, &p).0.pos.y, 0.0);

        let (h, eff) = apply_action(&u, Action::Hover, &cfg, &p);
        assert_eq!(eff, ActionEffect::Applied);
        assert_eq!(h.pos, u.pos);
        let spent = u.energy.joules() - h.energy.joules();
        assert!((spent - 128.870 * 45.0).abs() < 0.1, "{spent}");
        let spent_move = u.energy.joules() - x.energy.joules();
        assert!((spent_move - cruise_power_w(20.0, &p) * 45.0).abs() < 1e-6);
    }

    #[test]
    fn dead_or_nonagent_uavs_ignore_actions() {
        let cfg = WorldConfig::default();
        let p = UavPowerParams::default();
        let u = UavState {
            id: 0,
            kind: UavKind::Agent,
            pos: Vec3::new(3000.0, 3000.0, 2000.0),
            energy: EnergyQueue::full(1.0),
            alive: false,
        };
        assert_eq!(apply_action(&u, Action::XPlus, &cfg, &p), (u, ActionEffect::Ignored));
        let h = UavState { kind: UavKind::NonAgent, alive: true, ..u };
        assert_eq!(apply_action(&h, Action::XPlus, &cfg, &p).1, ActionEffect::Ignored);
        // draining the last joules kills the agent
        let low = UavState { alive: true, ..u };
        let (after, _) = apply_action(&low, Action::Hover, &cfg, &p);
        assert!(!after.alive);
    }

    #[test]
    fn episode_ends_after_configured_steps() {
        let mut w = world(WorldConfig::default());
        let hover = vec![Action::Hover; 4];
        for t in 1..=40 {
            let out = w.step(&hover).unwrap();
            assert_eq!(out.done, t == 40);
            assert_eq!(out.metrics.step, t);
        }
        assert!(w.step(&hover).is_err());
    }

    #[test]
    fn wrong_action_count_rejected() {
        let mut w = world(WorldConfig::default());
        assert!(matches!(w.step(&[Action::Hover]), Err(Error::Shape(_))));
    }

    #[test]
    fn hovering_agents_stay_put() {
        let mut w = world(WorldConfig {
            malfunction_prob: 0.0,
            ..Default::default()
        });
        let before: Vec<Vec3> = w.state().uavs.iter().map(|u| u.pos).collect();
        for _ in 0..10 {
            w.step(&[Action::Hover; 4]).unwrap();
        }
        let after: Vec<Vec3> = w.state().uavs.iter().map(|u| u.pos).collect();
        assert_eq!(before, after);
        assert!(w.state().uavs.iter().all(|u| u.alive));
    }

    #[test]
    fn ue_drift_is_bounded() {
        let cfg = WorldConfig::default();
        let mut w = world(cfg.clone());
        let before: Vec<Vec3> = w.state().ues.iter().map(|u| u.pos).collect();
        w.step(&[Action::Hover; 4]).unwrap();
        for (b, ue) in before.iter().zip(&w.state().ues) {
            assert!(ue.velocity.norm() <= cfg.ue_max_speed_mps + 1e-12);
            assert!(b.distance(ue.pos) <= cfg.ue_max_speed_mps * cfg.step_dt_s + 1e-9);
            assert_eq!(b.z, ue.pos.z);
        }
    }

    #[test]
    fn service_weights_respected() {
        let w = world(WorldConfig {
            n_ues: 200,
            service_weights: [1.0, 0.0, 0.0, 0.0],
            ..Default::default()
        });
        assert!(w.state().ues.iter().all(|u| u.service == ServiceType::VideoStreaming));
    }

    #[test]
    fn action_index_roundtrip() {
        for (i, a) in Action::ALL.iter().enumerate() {
            assert_eq!(a.index(), i);
            assert_eq!(Action::from_index(i), Some(*a));
        }
        assert_eq!(Action::from_index(7), None);
    }
}

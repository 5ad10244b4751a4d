//! Policies, centralized critic, replay and the actor-critic training loop.

mod commnet;
mod critic;
mod policy;
mod replay;
mod trainer;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::world::Action;
use crate::{Error, Result};

pub use commnet::{commnet_forward, CommNetCache, CommNetParams};
pub use critic::{critic_q, encode_central, encode_local, CriticKind, CriticSet};
pub use policy::{Actor, ActorCache, Policies};
pub use replay::{ReplayBuffer, Transition};
pub use trainer::{bootstrap_target, rollout, EpisodeStats, Trainer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// CommNet leader, DNN followers.
    Proposed,
    /// Uniform random actions, no learning.
    Random,
    /// Independent DNN agents with local critics.
    Comp1,
    /// Every agent runs its own CommNet.
    Comp2,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Random, Method::Comp1, Method::Comp2];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Random => "random",
            Method::Comp1 => "comp1",
            Method::Comp2 => "comp2",
        }
    }

    pub fn trains(self) -> bool {
        self != Method::Random
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?} (expected proposed, random, comp1 or comp2)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CommMean {
    #[default]
    #[serde(rename = "exclude-self")]
    ExcludeSelf,
    #[serde(rename = "exclude-leader")]
    ExcludeLeader,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FollowerWeights {
    #[default]
    Shared,
    Independent,
}

/// Observations fed to the leader's CommNet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeaderInputs {
    /// The M-1 follower observations.
    #[default]
    Followers,
    /// Every agent's observation, the leader's own last.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticMode {
    /// One network, agent id one-hot appended.
    #[default]
    Shared,
    /// One centralized network per agent.
    PerAgent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Expected Q under the agent's own policy, other actions fixed.
    Counterfactual,
    /// Mean Q over the mini-batch.
    #[default]
    BatchMean,
    None,
    /// Exact expectation over the agent's own actions instead of the
    /// sampled one: every action's Q weighted by its probability.
    AllActions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lr: f64,
    /// Actor learning rate when it differs from `lr`.
    pub actor_lr: Option<f64>,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub warmup: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Fraction of `epochs` over which epsilon decays linearly.
    pub eps_decay_fraction: f64,
    /// Episodes between hard target syncs.
    pub target_update_cycle: u64,
    pub epochs: u64,
    pub seed: u64,
    pub hidden: usize,
    /// Hidden layers of the DNN policies and the critic (beyond the first).
    pub hidden_layers: usize,
    pub comm_layers: usize,
    pub comm_mean: CommMean,
    pub follower_weights: FollowerWeights,
    pub leader_inputs: LeaderInputs,
    pub critic_mode: CriticMode,
    pub baseline: Baseline,
    /// Environment steps between gradient updates.
    pub train_every: u64,
    pub reward_scale: f64,
    pub entropy_coef: f64,
    pub eval_episodes: u64,
    /// Epochs between checkpoints; 0 writes only the final one.
    pub checkpoint_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            lr: 1e-3,
            actor_lr: None,
            batch_size: 32,
            buffer_capacity: 50_000,
            warmup: 1_000,
            eps_start: 1.0,
            eps_end: 0.05,
            eps_decay_fraction: 0.6,
            target_update_cycle: 20,
            epochs: 50_000,
            seed: 0,
            hidden: 64,
            hidden_layers: 4,
            comm_layers: 4,
            comm_mean: CommMean::ExcludeSelf,
            follower_weights: FollowerWeights::Shared,
            leader_inputs: LeaderInputs::Followers,
            critic_mode: CriticMode::Shared,
            baseline: Baseline::BatchMean,
            train_every: 1,
            reward_scale: 1.0,
            entropy_coef: 0.0,
            eval_episodes: 20,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("train.gamma must be in [0, 1)");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite())
            || self.actor_lr.is_some_and(|a| !(a >= 0.0 && a.is_finite()))
        {
            return bad("train.lr and train.actor_lr must be finite and >= 0");
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return bad("train.batch_size and train.buffer_capacity must be >= 1");
        }
        if self.warmup > self.buffer_capacity {
            return bad("train.warmup cannot exceed train.buffer_capacity");
        }
        for (name, v) in [("eps_start", self.eps_start), ("eps_end", self.eps_end)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("train.{name} must be in [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.eps_decay_fraction) {
            return bad("train.eps_decay_fraction must be in [0, 1]");
        }
        if self.target_update_cycle == 0 || self.train_every == 0 {
            return bad("train.target_update_cycle and train.train_every must be >= 1");
        }
        if self.hidden == 0 {
            return bad("train.hidden must be >= 1");
        }
        if !(self.reward_scale.is_finite() && self.entropy_coef.is_finite() && self.entropy_coef >= 0.0)
        {
            return bad("train.reward_scale and train.entropy_coef must be finite");
        }
        Ok(())
    }

    /// Linear decay from `eps_start` to `eps_end` over the first
    /// `eps_decay_fraction * epochs` episodes, then constant.
    pub fn epsilon(&self, episode: u64) -> f64 {
        let horizon = self.eps_decay_fraction * self.epochs as f64;
        if horizon <= 0.0 {
            return self.eps_end;
        }
        let t = (episode as f64 / horizon).min(1.0);
        self.eps_start + (self.eps_end - self.eps_start) * t
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy over a 7-way distribution.
pub fn select_action<R: Rng + ?Sized>(dist: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..Action::COUNT)
    } else {
        argmax(dist)
    }
}

/// Total per-step inference cost of a method given per-policy costs.
pub fn method_flops(method: Method, dnn: u64, commnet: u64, m_agents: u64) -> u64 {
    match method {
        Method::Proposed => commnet + m_agents.saturating_sub(1) * dnn,
        Method::Comp1 => m_agents * dnn,
        Method::Comp2 => m_agents * commnet,
        Method::Random => 0,
    }
}

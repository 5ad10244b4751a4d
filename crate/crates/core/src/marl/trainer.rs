//! Centralized training, decentralized execution.

use serde::{Deserialize, Serialize};

use super::{Baseline, CriticSet, Method, Policies, ReplayBuffer, TrainConfig, Transition};
use crate::nn::{adam_step, AdamState, MlpParams};
use crate::rng::{stream, stream_rng, SimRng};
use crate::world::{Action, StepMetrics, StepOutcome, UavSnapshot, World};
use crate::{Error, Result};

/// `y = r` on terminal steps, `r + gamma * q_next` otherwise.
pub fn bootstrap_target(r: f64, done: bool, gamma: f64, q_next: f64) -> f64 {
    if done {
        r
    } else {
        r + gamma * q_next
    }
}

/// Aggregates of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub episode: u64,
    pub epsilon: f64,
    /// Sum over steps and agents of the per-agent total reward.
    pub total_reward: f64,
    pub agent_rewards: Vec<f64>,
    pub mean_tau: f64,
    pub final_tau: f64,
    pub mean_omega: f64,
    pub final_omega: f64,
    pub mean_qos: f64,
    pub final_qos: f64,
    /// UEs served per agent at the last step.
    pub served: Vec<usize>,
    /// Residual energy per agent at the last step.
    pub energy_j: Vec<f64>,
    /// UAV positions at the last step.
    pub uavs: Vec<UavSnapshot>,
    pub mean_loss: Option<f64>,
    pub updates: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepMetrics>,
}

struct StatsAcc {
    episode: u64,
    epsilon: f64,
    record: bool,
    total: f64,
    agents: Vec<f64>,
    tau: f64,
    omega: f64,
    qos: f64,
    n: usize,
    last: Option<StepMetrics>,
    steps: Vec<StepMetrics>,
}

impl StatsAcc {
    fn new(episode: u64, epsilon: f64, m_agents: usize, record: bool) -> Self {
        StatsAcc {
            episode,
            epsilon,
            record,
            total: 0.0,
            agents: vec![0.0; m_agents],
            tau: 0.0,
            omega: 0.0,
            qos: 0.0,
            n: 0,
            last: None,
            steps: Vec::new(),
        }
    }

    fn add(&mut self, out: &StepOutcome) {
        for (a, r) in self.agents.iter_mut().zip(&out.rewards) {
            *a += r;
            self.total += r;
        }
        let m = &out.metrics;
        self.tau += m.tau;
        self.omega += m.omega;
        self.qos += m.total_qos;
        self.n += 1;
        if self.record {
            self.steps.push(m.clone());
        }
        self.last = Some(m.clone());
    }

    fn finish(self, losses: &[f64], updates: u64) -> EpisodeStats {
        let n = self.n.max(1) as f64;
        let last = self.last;
        EpisodeStats {
            episode: self.episode,
            epsilon: self.epsilon,
            total_reward: self.total,
            agent_rewards: self.agents,
            mean_tau: self.tau / n,
            final_tau: last.as_ref().map_or(0.0, |m| m.tau),
            mean_omega: self.omega / n,
            final_omega: last.as_ref().map_or(0.0, |m| m.omega),
            mean_qos: self.qos / n,
            final_qos: last.as_ref().map_or(0.0, |m| m.total_qos),
            served: last
                .as_ref()
                .map_or_else(Vec::new, |m| m.agents.iter().map(|a| a.served).collect()),
            energy_j: last
                .as_ref()
                .map_or_else(Vec::new, |m| m.agents.iter().map(|a| a.energy_j).collect()),
            uavs: last.as_ref().map_or_else(Vec::new, |m| m.uavs.clone()),
            mean_loss: (!losses.is_empty())
                .then(|| losses.iter().sum::<f64>() / losses.len() as f64),
            updates,
            steps: self.steps,
        }
    }
}

fn features(world: &World) -> Vec<Vec<f64>> {
    world.observations().into_iter().map(|o| o.features).collect()
}

fn to_actions(idx: &[usize]) -> Result<Vec<Action>> {
    idx.iter()
        .map(|&i| Action::from_index(i).ok_or_else(|| Error::Shape(format!("no action {i}"))))
        .collect()
}

/// Runs one episode with `policies` at exploration rate `epsilon`, without
/// touching any training state.
pub fn rollout(
    policies: &Policies,
    world: &mut World,
    episode: u64,
    epsilon: f64,
    rng: &mut SimRng,
    record_steps: bool,
) -> Result<EpisodeStats> {
    world.reset_episode(episode);
    let mut acc = StatsAcc::new(episode, epsilon, policies.m_agents, record_steps);
    let mut obs = features(world);
    while !world.is_done() {
        let a = policies.act(&obs, epsilon, rng)?;
        let out = world.step(&to_actions(&a)?)?;
        acc.add(&out);
        obs = out.observations.into_iter().map(|o| o.features).collect();
    }
    Ok(acc.finish(&[], 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trainer {
    cfg: TrainConfig,
    pub policies: Policies,
    pub target_policies: Policies,
    pub critics: CriticSet,
    pub target_critics: CriticSet,
    actor_opt: Vec<AdamState>,
    critic_opt: Vec<AdamState>,
    buffer: ReplayBuffer,
    explore_rng: SimRng,
    replay_rng: SimRng,
    episodes_done: u64,
    env_steps: u64,
    updates: u64,
}

impl Trainer {
    pub fn new(method: Method, m_agents: usize, obs_dim: usize, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut init = stream_rng(cfg.seed, stream::POLICY_INIT, 0);
        let policies = Policies::new(method, m_agents, obs_dim, &cfg, &mut init)?;
        let kind = CriticSet::kind_for(method, cfg.critic_mode);
        let critics = if method.trains() {
            CriticSet::new(kind, m_agents, obs_dim, &cfg, &mut init)?
        } else {
            CriticSet {
                kind,
                m_agents,
                obs_dim,
                nets: Vec::new(),
            }
        };
        let actor_opt = policies
            .actors
            .iter()
            .map(|a| AdamState::for_params(a, cfg.actor_lr.unwrap_or(cfg.lr)))
            .collect();
        let critic_opt = critics
            .nets
            .iter()
            .map(|n| AdamState::for_params(n, cfg.lr))
            .collect();
        Ok(Trainer {
            buffer: ReplayBuffer::new(cfg.buffer_capacity, cfg.warmup)?,
            explore_rng: stream_rng(cfg.seed, stream::EXPLORATION, 0),
            replay_rng: stream_rng(cfg.seed, stream::REPLAY, 0),
            target_policies: policies.clone(),
            target_critics: critics.clone(),
            policies,
            critics,
            actor_opt,
            critic_opt,
            cfg,
            episodes_done: 0,
            env_steps: 0,
            updates: 0,
        })
    }

    pub fn for_world(method: Method, world: &World, cfg: TrainConfig) -> Result<Self> {
        Trainer::new(method, world.config().m_agents, world.layout().width(), cfg)
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn method(&self) -> Method {
        self.policies.method
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn buffer_mut(&mut self) -> &mut ReplayBuffer {
        &mut self.buffer
    }

    pub fn episodes_done(&self) -> u64 {
        self.episodes_done
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Hard copy of the online networks into the targets.
    pub fn sync_targets(&mut self) {
        self.target_policies = self.policies.clone();
        self.target_critics = self.critics.clone();
    }

    /// Bootstrapped critic target for agent `m` from the target networks.
    pub fn compute_target(&self, r: f64, done: bool, m: usize, next_obs: &[Vec<f64>]) -> Result<f64> {
        if done {
            return Ok(r);
        }
        let a = self.target_policies.greedy(next_obs)?;
        let q = self.target_critics.q(m, next_obs, &a)?;
        Ok(bootstrap_target(r, done, self.cfg.gamma, q))
    }

    /// One critic and actor update from a uniform mini-batch; returns the
    /// critic's mean squared TD error before the update.
    pub fn train_step(&mut self) -> Result<f64> {
        if !self.method().trains() {
            return Err(Error::State("the random method has nothing to train".into()));
        }
        let idx = self
            .buffer
            .sample_indices(self.cfg.batch_size, &mut self.replay_rng)?;
        let batch: Vec<Transition> = idx
            .iter()
            .map(|&i| self.buffer.get(i).expect("sampled index in range").clone())
            .collect();
        self.update_on(&batch)
    }

    /// The update of [`Trainer::train_step`] on an explicit batch.
    pub fn update_on(&mut self, batch: &[Transition]) -> Result<f64> {
        let m_agents = self.policies.m_agents;
        let scale = self.cfg.reward_scale;
        let bsz = batch.len() as f64;
        let decoded: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = batch
            .iter()
            .map(|t| (t.obs_f64(), t.next_obs_f64()))
            .collect();

        let mut ys = Vec::with_capacity(batch.len());
        for (t, (_, next)) in batch.iter().zip(&decoded) {
            let row = (0..m_agents)
                .map(|m| self.compute_target(t.rewards[m] * scale, t.done, m, next))
                .collect::<Result<Vec<_>>>()?;
            ys.push(row);
        }

        let mut cgrads: Vec<MlpParams> = self.critics.nets.iter().map(|n| n.zeros_like()).collect();
        let mut qs = vec![vec![0.0; m_agents]; batch.len()];
        let mut loss = 0.0;
        for (i, (t, (obs, _))) in batch.iter().zip(&decoded).enumerate() {
            for m in 0..m_agents {
                let k = self.critics.net_index(m);
                let x = self.critics.encode(m, obs, &t.actions)?;
                let net = &self.critics.nets[k];
                let (q, cache) = net.forward(&x)?;
                let q = q[0];
                qs[i][m] = q;
                let err = q - ys[i][m];
                loss += err * err / (bsz * m_agents as f64);
                let w = 1.0 / (bsz * self.critics.agents_on(k) as f64);
                net.backward_into(&cache, &[2.0 * err * w], &mut cgrads[k]);
            }
        }

        let mut agrads: Vec<_> = self.policies.actors.iter().map(|a| a.zeros_like()).collect();
        let users: Vec<usize> = (0..self.policies.actors.len())
            .map(|k| self.policies.actor_of.iter().filter(|&&a| a == k).count())
            .collect();
        let mean_q: Vec<f64> = (0..m_agents)
            .map(|m| qs.iter().map(|r| r[m]).sum::<f64>() / bsz)
            .collect();
        for (i, (t, (obs, _))) in batch.iter().zip(&decoded).enumerate() {
            for m in 0..m_agents {
                let k = self.policies.actor_of[m];
                let actor = &self.policies.actors[k];
                let (pi, cache) = actor.forward(&self.policies.inputs(m, obs))?;
                let a = t.actions[m];
                let w = 1.0 / (bsz * users[k] as f64);
                let mut g = vec![0.0; pi.len()];
                if self.cfg.baseline == Baseline::AllActions {
                    let mut alt = t.actions.clone();
                    for (b, gb) in g.iter_mut().enumerate() {
                        let q = if b == a {
                            qs[i][m]
                        } else {
                            alt[m] = b;
                            self.critics.q(m, obs, &alt)?
                        };
                        *gb = -q * w;
                    }
                } else {
                    let baseline = match self.cfg.baseline {
                        Baseline::None | Baseline::AllActions => 0.0,
                        Baseline::BatchMean => mean_q[m],
                        Baseline::Counterfactual => {
                            let mut alt = t.actions.clone();
                            let mut v = 0.0;
                            for (b, p) in pi.iter().enumerate() {
                                let q = if b == a {
                                    qs[i][m]
                                } else {
                                    alt[m] = b;
                                    self.critics.q(m, obs, &alt)?
                                };
                                v += p * q;
                            }
                            v
                        }
                    };
                    let adv = qs[i][m] - baseline;
                    g[a] = -adv / pi[a].max(1e-12) * w;
                }
                if self.cfg.entropy_coef > 0.0 {
                    for (gk, p) in g.iter_mut().zip(&pi) {
                        *gk += self.cfg.entropy_coef * (p.max(1e-12).ln() + 1.0) * w;
                    }
                }
                actor.backward_into(&cache, &g, &mut agrads[k]);
            }
        }

        for ((net, g), opt) in self
            .critics
            .nets
            .iter_mut()
            .zip(&cgrads)
            .zip(&mut self.critic_opt)
        {
            adam_step(net, g, opt)?;
        }
        for ((actor, g), opt) in self
            .policies
            .actors
            .iter_mut()
            .zip(&agrads)
            .zip(&mut self.actor_opt)
        {
            adam_step(actor, g, opt)?;
        }
        self.updates += 1;
        Ok(loss)
    }

    /// Plays training episode `episode`: epsilon-greedy actions, replay
    /// insertion, periodic updates and target syncs.
    pub fn train_episode(
        &mut self,
        world: &mut World,
        episode: u64,
        record_steps: bool,
    ) -> Result<EpisodeStats> {
        let trains = self.method().trains();
        let eps = if trains { self.cfg.epsilon(episode) } else { 1.0 };
        world.reset_episode(episode);
        let mut acc = StatsAcc::new(episode, eps, self.policies.m_agents, record_steps);
        let mut losses = Vec::new();
        let updates_before = self.updates;
        let mut obs = features(world);
        while !world.is_done() {
            let a = self.policies.act(&obs, eps, &mut self.explore_rng)?;
            let out = world.step(&to_actions(&a)?)?;
            acc.add(&out);
            let next: Vec<Vec<f64>> = out.observations.iter().map(|o| o.features.clone()).collect();
            self.env_steps += 1;
            if trains {
                self.buffer
                    .push(Transition::new(&obs, a, out.rewards.clone(), &next, out.done))?;
                if self.buffer.is_ready() && self.env_steps % self.cfg.train_every == 0 {
                    losses.push(self.train_step()?);
                }
            }
            obs = next;
        }
        self.episodes_done += 1;
        if trains && self.episodes_done % self.cfg.target_update_cycle == 0 {
            self.sync_targets();
        }
        Ok(acc.finish(&losses, self.updates - updates_before))
    }

    /// Greedy evaluation episode; never mutates training state.
    pub fn evaluate(
        &self,
        world: &mut World,
        episode: u64,
        record_steps: bool,
    ) -> Result<EpisodeStats> {
        let mut rng = stream_rng(self.cfg.seed, stream::EVAL, episode);
        rollout(&self.policies, world, episode, 0.0, &mut rng, record_steps)
    }
}

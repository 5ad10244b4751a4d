//! Per-method actor wiring.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    select_action, CommNetCache, CommNetParams, FollowerWeights, LeaderInputs, Method, TrainConfig,
};
use crate::nn::{flops_count, Activation, MlpCache, MlpParams, Params};
use crate::world::Action;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Actor {
    Dnn(MlpParams),
    CommNet(CommNetParams),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActorCache {
    Dnn(MlpCache),
    CommNet(CommNetCache),
}

impl Actor {
    pub fn forward(&self, inputs: &[&[f64]]) -> Result<(Vec<f64>, ActorCache)> {
        match self {
            Actor::Dnn(p) => {
                if inputs.len() != 1 {
                    return Err(Error::Shape("a DNN actor takes one observation".into()));
                }
                let (y, c) = p.forward(inputs[0])?;
                Ok((y, ActorCache::Dnn(c)))
            }
            Actor::CommNet(p) => {
                let (y, c) = p.forward(inputs)?;
                Ok((y, ActorCache::CommNet(c)))
            }
        }
    }

    pub fn backward_into(&self, cache: &ActorCache, g_out: &[f64], grads: &mut Actor) {
        match (self, cache, grads) {
            (Actor::Dnn(p), ActorCache::Dnn(c), Actor::Dnn(g)) => {
                p.backward_into(c, g_out, g);
            }
            (Actor::CommNet(p), ActorCache::CommNet(c), Actor::CommNet(g)) => {
                p.backward_into(c, g_out, g);
            }
            _ => panic!("actor, cache and gradient kinds disagree"),
        }
    }

    pub fn zeros_like(&self) -> Actor {
        match self {
            Actor::Dnn(p) => Actor::Dnn(p.zeros_like()),
            Actor::CommNet(p) => Actor::CommNet(p.zeros_like()),
        }
    }

    pub fn flops(&self) -> usize {
        match self {
            Actor::Dnn(p) => flops_count(p),
            Actor::CommNet(p) => p.flops(),
        }
    }
}

impl Params for Actor {
    fn slices(&self) -> Vec<&[f64]> {
        match self {
            Actor::Dnn(p) => p.slices(),
            Actor::CommNet(p) => p.slices(),
        }
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Actor::Dnn(p) => p.slices_mut(),
            Actor::CommNet(p) => p.slices_mut(),
        }
    }
}

/// The actors of one method and which agent uses which parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policies {
    pub method: Method,
    pub m_agents: usize,
    pub obs_dim: usize,
    pub actors: Vec<Actor>,
    /// `actor_of[m]` indexes `actors`; empty for `Random`.
    pub actor_of: Vec<usize>,
}

fn dnn<R: Rng + ?Sized>(obs_dim: usize, cfg: &TrainConfig, rng: &mut R) -> Result<Actor> {
    let mut dims = vec![obs_dim];
    dims.extend(std::iter::repeat_n(cfg.hidden, cfg.hidden_layers + 1));
    dims.push(Action::COUNT);
    MlpParams::xavier(&dims, Activation::ReLU, Activation::Softmax, rng).map(Actor::Dnn)
}

impl Policies {
    pub fn new<R: Rng + ?Sized>(
        method: Method,
        m_agents: usize,
        obs_dim: usize,
        cfg: &TrainConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if m_agents == 0 {
            return Err(Error::Config("at least one agent is required".into()));
        }
        let leader = m_agents - 1;
        let commnet = |n: usize, leader_input: Option<usize>, rng: &mut R| {
            CommNetParams::xavier(
                obs_dim,
                cfg.hidden,
                n,
                cfg.comm_layers,
                cfg.comm_mean,
                leader_input,
                rng,
            )
            .map(Actor::CommNet)
        };
        let (actors, actor_of) = match method {
            Method::Random => (Vec::new(), Vec::new()),
            Method::Comp1 => {
                let actors = (0..m_agents)
                    .map(|_| dnn(obs_dim, cfg, rng))
                    .collect::<Result<Vec<_>>>()?;
                (actors, (0..m_agents).collect())
            }
            Method::Comp2 => {
                let actors = (0..m_agents)
                    .map(|_| commnet(m_agents, Some(leader), rng))
                    .collect::<Result<Vec<_>>>()?;
                (actors, (0..m_agents).collect())
            }
            Method::Proposed => {
                if m_agents < 2 {
                    return Err(Error::Config(
                        "the proposed method needs a leader and at least one follower".into(),
                    ));
                }
                let mut actors = Vec::new();
                let mut actor_of = Vec::new();
                match cfg.follower_weights {
                    FollowerWeights::Shared => {
                        actors.push(dnn(obs_dim, cfg, rng)?);
                        actor_of.extend(std::iter::repeat_n(0, leader));
                    }
                    FollowerWeights::Independent => {
                        for m in 0..leader {
                            actors.push(dnn(obs_dim, cfg, rng)?);
                            actor_of.push(m);
                        }
                    }
                }
                actor_of.push(actors.len());
                actors.push(match cfg.leader_inputs {
                    LeaderInputs::Followers => commnet(leader, None, rng)?,
                    LeaderInputs::All => commnet(m_agents, Some(leader), rng)?,
                });
                (actors, actor_of)
            }
        };
        Ok(Policies {
            method,
            m_agents,
            obs_dim,
            actors,
            actor_of,
        })
    }

    /// Observations agent `m`'s actor consumes, in input order.
    pub fn inputs<'a>(&self, m: usize, obs: &'a [Vec<f64>]) -> Vec<&'a [f64]> {
        match self.method {
            Method::Proposed if m + 1 == self.m_agents => {
                let n = match self.actor(m) {
                    Some(Actor::CommNet(c)) => c.n_inputs,
                    _ => m,
                };
                obs[..n].iter().map(|o| o.as_slice()).collect()
            }
            Method::Comp2 => obs.iter().map(|o| o.as_slice()).collect(),
            _ => vec![obs[m].as_slice()],
        }
    }

    pub fn actor(&self, m: usize) -> Option<&Actor> {
        self.actor_of.get(m).map(|&i| &self.actors[i])
    }

    /// Action distribution of agent `m`; uniform for `Random`.
    pub fn distribution(&self, m: usize, obs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if obs.len() != self.m_agents {
            return Err(Error::Shape(format!(
                "expected {} observations, got {}",
                self.m_agents,
                obs.len()
            )));
        }
        match self.actor(m) {
            None => Ok(vec![1.0 / Action::COUNT as f64; Action::COUNT]),
            Some(a) => a.forward(&self.inputs(m, obs)).map(|(y, _)| y),
        }
    }

    /// Epsilon-greedy joint action. `Random` always samples uniformly.
    pub fn act<R: Rng + ?Sized>(
        &self,
        obs: &[Vec<f64>],
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        let eps = if self.method == Method::Random { 1.0 } else { epsilon };
        (0..self.m_agents)
            .map(|m| Ok(select_action(&self.distribution(m, obs)?, eps, rng)))
            .collect()
    }

    /// Greedy joint action (Random maps to action 0).
    pub fn greedy(&self, obs: &[Vec<f64>]) -> Result<Vec<usize>> {
        (0..self.m_agents)
            .map(|m| Ok(super::argmax(&self.distribution(m, obs)?)))
            .collect()
    }

    /// Per-step inference cost summed over agents.
    pub fn flops(&self) -> usize {
        self.actor_of.iter().map(|&i| self.actors[i].flops()).sum()
    }

    pub fn zeros_like(&self) -> Policies {
        Policies {
            actors: self.actors.iter().map(Actor::zeros_like).collect(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marl::method_flops;
    use crate::rng::stream_rng;

    fn obs(m: usize, d: usize) -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| (0..d).map(|j| ((i * d + j) as f64 * 0.13).sin()).collect())
            .collect()
    }

    #[test]
    fn proposed_wiring() {
        let cfg = TrainConfig::default();
        let p = Policies::new(Method::Proposed, 4, 10, &cfg, &mut stream_rng(0, "p", 0)).unwrap();
        assert_eq!(p.actors.len(), 2);
        assert_eq!(p.actor_of, vec![0, 0, 0, 1]);
        let o = obs(4, 10);
        assert_eq!(p.inputs(3, &o).len(), 3);
        assert_eq!(p.inputs(0, &o).len(), 1);
        for m in 0..4 {
            let d = p.distribution(m, &o).unwrap();
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let ind = Policies::new(
            Method::Proposed,
            4,
            10,
            &TrainConfig {
                follower_weights: FollowerWeights::Independent,
                ..cfg
            },
            &mut stream_rng(0, "p", 0),
        )
        .unwrap();
        assert_eq!(ind.actor_of, vec![0, 1, 2, 3]);
    }

    #[test]
    fn leader_sees_everyone_when_configured() {
        let cfg = TrainConfig {
            leader_inputs: LeaderInputs::All,
            ..TrainConfig::default()
        };
        let p = Policies::new(Method::Proposed, 3, 10, &cfg, &mut stream_rng(0, "p", 0)).unwrap();
        let mut o = obs(3, 10);
        assert_eq!(p.inputs(2, &o).len(), 3);
        match p.actor(2) {
            Some(Actor::CommNet(c)) => assert_eq!(c.leader_input, Some(2)),
            _ => panic!("leader is not a CommNet"),
        }
        let before = p.distribution(2, &o).unwrap();
        o[2][0] += 1.0;
        assert_ne!(p.distribution(2, &o).unwrap(), before);

        let f = Policies::new(Method::Proposed, 3, 10, &TrainConfig::default(), &mut stream_rng(0, "p", 0))
            .unwrap();
        let before = f.distribution(2, &o).unwrap();
        o[2][0] += 1.0;
        assert_eq!(f.distribution(2, &o).unwrap(), before);
    }

    #[test]
    fn six_dense_layers() {
        let cfg = TrainConfig::default();
        let p = Policies::new(Method::Proposed, 2, 70, &cfg, &mut stream_rng(0, "p", 0)).unwrap();
        match (&p.actors[0], &p.actors[1]) {
            (Actor::Dnn(d), Actor::CommNet(c)) => {
                assert_eq!(d.dims(), vec![70, 64, 64, 64, 64, 64, 7]);
                assert_eq!(1 + c.comm.len() + 1, 6);
            }
            _ => panic!("unexpected wiring"),
        }
    }

    #[test]
    fn flops_agree_with_method_flops() {
        let cfg = TrainConfig::default();
        let mut r = stream_rng(0, "p", 1);
        let m = 4;
        let d = 30;
        let dnn = Policies::new(Method::Comp1, m, d, &cfg, &mut r).unwrap();
        let comp2 = Policies::new(Method::Comp2, m, d, &cfg, &mut r).unwrap();
        let prop = Policies::new(Method::Proposed, m, d, &cfg, &mut r).unwrap();
        let per_dnn = dnn.actors[0].flops() as u64;
        let per_comm = comp2.actors[0].flops() as u64;
        assert_eq!(dnn.flops() as u64, method_flops(Method::Comp1, per_dnn, per_comm, 4));
        assert_eq!(comp2.flops() as u64, method_flops(Method::Comp2, per_dnn, per_comm, 4));
        let leader = prop.actors[1].flops() as u64;
        assert_eq!(prop.flops() as u64, method_flops(Method::Proposed, per_dnn, leader, 4));
    }

    #[test]
    fn random_is_uniform_and_needs_no_actors() {
        let cfg = TrainConfig::default();
        let p = Policies::new(Method::Random, 3, 5, &cfg, &mut stream_rng(0, "p", 2)).unwrap();
        assert!(p.actors.is_empty());
        assert_eq!(p.flops(), 0);
        let d = p.distribution(1, &obs(3, 5)).unwrap();
        assert!(d.iter().all(|v| (*v - 1.0 / 7.0).abs() < 1e-15));
        let a = p.act(&obs(3, 5), 0.0, &mut stream_rng(0, "p", 3)).unwrap();
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn proposed_needs_two_agents() {
        let cfg = TrainConfig::default();
        assert!(Policies::new(Method::Proposed, 1, 5, &cfg, &mut stream_rng(0, "p", 4)).is_err());
    }
}

//! Q-networks and their input encodings.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CriticMode, Method, TrainConfig};
use crate::nn::{Activation, MlpParams};
use crate::world::Action;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticKind {
    /// Sees every observation and action; `shared` uses one network for all
    /// agents.
    Central { shared: bool },
    /// Sees only the agent's own observation and action.
    Local,
}

fn one_hot_into(out: &mut Vec<f64>, idx: usize, n: usize) -> Result<()> {
    if idx >= n {
        return Err(Error::Shape(format!("one-hot index {idx} out of range {n}")));
    }
    out.extend((0..n).map(|i| if i == idx { 1.0 } else { 0.0 }));
    Ok(())
}

/// `[o_1 .. o_M, onehot(a_1) .. onehot(a_M), onehot(agent)]`.
pub fn encode_central(obs: &[Vec<f64>], actions: &[usize], agent: usize) -> Result<Vec<f64>> {
    let m = obs.len();
    if actions.len() != m || agent >= m {
        return Err(Error::Shape(format!(
            "critic encoding: {} observations, {} actions, agent {agent}",
            m,
            actions.len()
        )));
    }
    let d: usize = obs.iter().map(Vec::len).sum();
    let mut x = Vec::with_capacity(d + (Action::COUNT + 1) * m);
    for o in obs {
        x.extend_from_slice(o);
    }
    for &a in actions {
        one_hot_into(&mut x, a, Action::COUNT)?;
    }
    one_hot_into(&mut x, agent, m)?;
    Ok(x)
}

/// `[o_m, onehot(a_m)]`.
pub fn encode_local(obs: &[f64], action: usize) -> Result<Vec<f64>> {
    let mut x = Vec::with_capacity(obs.len() + Action::COUNT);
    x.extend_from_slice(obs);
    one_hot_into(&mut x, action, Action::COUNT)?;
    Ok(x)
}

/// Scalar value of a critic network on an encoded input.
pub fn critic_q(critic: &MlpParams, input: &[f64]) -> Result<f64> {
    if critic.output_dim() != 1 {
        return Err(Error::Shape("critic must have a single output".into()));
    }
    if input.len() != critic.input_dim() {
        return Err(Error::Shape(format!(
            "critic expects {} inputs, got {}",
            critic.input_dim(),
            input.len()
        )));
    }
    Ok(critic.predict(input)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticSet {
    pub kind: CriticKind,
    pub m_agents: usize,
    pub obs_dim: usize,
    pub nets: Vec<MlpParams>,
}

impl CriticSet {
    pub fn kind_for(method: Method, mode: CriticMode) -> CriticKind {
        match (method, mode) {
            (Method::Comp1, _) => CriticKind::Local,
            (_, CriticMode::Shared) => CriticKind::Central { shared: true },
            (_, CriticMode::PerAgent) => CriticKind::Central { shared: false },
        }
    }

    pub fn input_dim(kind: CriticKind, m_agents: usize, obs_dim: usize) -> usize {
        match kind {
            CriticKind::Central { .. } => m_agents * (obs_dim + Action::COUNT + 1),
            CriticKind::Local => obs_dim + Action::COUNT,
        }
    }

    pub fn new<R: Rng + ?Sized>(
        kind: CriticKind,
        m_agents: usize,
        obs_dim: usize,
        cfg: &TrainConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let n_nets = match kind {
            CriticKind::Central { shared: true } => 1,
            _ => m_agents,
        };
        let mut dims = vec![CriticSet::input_dim(kind, m_agents, obs_dim)];
        dims.extend(std::iter::repeat_n(cfg.hidden, cfg.hidden_layers + 1));
        dims.push(1);
        let nets = (0..n_nets)
            .map(|_| MlpParams::xavier(&dims, Activation::ReLU, Activation::Identity, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(CriticSet {
            kind,
            m_agents,
            obs_dim,
            nets,
        })
    }

    pub fn net_index(&self, m: usize) -> usize {
        if self.nets.len() == 1 {
            0
        } else {
            m
        }
    }

    /// Number of agents whose terms land on network `i`.
    pub fn agents_on(&self, i: usize) -> usize {
        (0..self.m_agents).filter(|&m| self.net_index(m) == i).count()
    }

    pub fn encode(&self, m: usize, obs: &[Vec<f64>], actions: &[usize]) -> Result<Vec<f64>> {
        match self.kind {
            CriticKind::Central { .. } => encode_central(obs, actions, m),
            CriticKind::Local => {
                let (o, a) = obs
                    .get(m)
                    .zip(actions.get(m))
                    .ok_or_else(|| Error::Shape(format!("no agent {m} in encoding")))?;
                encode_local(o, *a)
            }
        }
    }

    pub fn q(&self, m: usize, obs: &[Vec<f64>], actions: &[usize]) -> Result<f64> {
        critic_q(&self.nets[self.net_index(m)], &self.encode(m, obs, actions)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{max_relative_error, numerical_gradient};
    use crate::rng::stream_rng;

    fn obs() -> Vec<Vec<f64>> {
        vec![vec![0.1, -0.2, 0.3], vec![0.5, 0.0, -0.7]]
    }

    #[test]
    fn central_encoding_layout() {
        let x = encode_central(&obs(), &[2, 6], 1).unwrap();
        assert_eq!(x.len(), 6 + 14 + 2);
        assert_eq!(x[6 + 2], 1.0);
        assert_eq!(x[6 + 7 + 6], 1.0);
        assert_eq!(&x[20..], &[0.0, 1.0]);
        assert_eq!(x.iter().skip(6).filter(|v| **v == 1.0).count(), 3);
        assert!(encode_central(&obs(), &[7, 0], 0).is_err());
        assert!(encode_central(&obs(), &[0], 0).is_err());
        assert!(encode_central(&obs(), &[0, 0], 2).is_err());
    }

    #[test]
    fn zero_critic_is_zero() {
        let cfg = TrainConfig::default();
        let mut c = CriticSet::new(CriticKind::Central { shared: true }, 2, 3, &cfg, &mut stream_rng(0, "c", 0))
            .unwrap();
        c.nets[0] = c.nets[0].zeros_like();
        assert_eq!(c.q(0, &obs(), &[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn critic_is_deterministic_and_checks_width() {
        let cfg = TrainConfig::default();
        let c = CriticSet::new(CriticKind::Central { shared: false }, 2, 3, &cfg, &mut stream_rng(0, "c", 1))
            .unwrap();
        assert_eq!(c.nets.len(), 2);
        let a = c.q(1, &obs(), &[3, 4]).unwrap();
        let b = c.q(1, &obs(), &[3, 4]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(critic_q(&c.nets[0], &[0.0; 5]).is_err());
    }

    #[test]
    fn local_critic_ignores_others() {
        let cfg = TrainConfig::default();
        let c = CriticSet::new(CriticKind::Local, 2, 3, &cfg, &mut stream_rng(0, "c", 2)).unwrap();
        let a = c.q(0, &obs(), &[3, 4]).unwrap();
        let b = c.q(0, &obs(), &[3, 0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn action_block_gradient_is_nonzero() {
        let cfg = TrainConfig::default();
        let c = CriticSet::new(CriticKind::Central { shared: true }, 2, 3, &cfg, &mut stream_rng(0, "c", 3))
            .unwrap();
        let x = encode_central(&obs(), &[3, 4], 0).unwrap();
        let net = &c.nets[0];
        let (_, cache) = net.forward(&x).unwrap();
        let (_, dx) = net.backward(&cache, &[1.0]);
        let num = numerical_gradient(|x| critic_q(net, x).unwrap(), &x, 1e-5);
        assert!(max_relative_error(&dx, &num, 1e-7) < 1e-4);
        let block = &dx[6 + 7..6 + 14];
        assert!(block.iter().any(|g| g.abs() > 1e-9));
    }
}

//! CommNet: shared encoder, mean-field communication layers, concat head.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CommMean;
use crate::nn::{Activation, Dense, DenseCache, Params};
use crate::world::Action;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommNetParams {
    pub encoder: Dense,
    pub comm: Vec<Dense>,
    pub head: Dense,
    pub n_inputs: usize,
    pub mean: CommMean,
    /// Input slot holding the leader's observation, if it is among the inputs.
    pub leader_input: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommNetCache {
    encoder: Vec<DenseCache>,
    comm: Vec<Vec<DenseCache>>,
    head: DenseCache,
    /// `hidden[l][j]`: hidden vector of input `j` entering comm layer `l`;
    /// the last entry holds the final hiddens.
    pub hidden: Vec<Vec<Vec<f64>>>,
    /// `comm_vec[l][j]`: communication vector fed to comm layer `l`.
    pub comm_vec: Vec<Vec<Vec<f64>>>,
}

impl CommNetParams {
    pub fn xavier<R: Rng + ?Sized>(
        obs_dim: usize,
        hidden: usize,
        n_inputs: usize,
        comm_layers: usize,
        mean: CommMean,
        leader_input: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::Shape("CommNet needs at least one input".into()));
        }
        let encoder = Dense::xavier(obs_dim, hidden, Activation::ReLU, rng)?;
        let comm = (0..comm_layers)
            .map(|_| Dense::xavier(2 * hidden, hidden, Activation::ReLU, rng))
            .collect::<Result<Vec<_>>>()?;
        let head = Dense::xavier(n_inputs * hidden, Action::COUNT, Activation::Softmax, rng)?;
        Ok(CommNetParams {
            encoder,
            comm,
            head,
            n_inputs,
            mean,
            leader_input,
        })
    }

    pub fn zeros_like(&self) -> Self {
        let z = |d: &Dense| Dense::zeros(d.fan_in(), d.fan_out(), d.activation);
        CommNetParams {
            encoder: z(&self.encoder),
            comm: self.comm.iter().map(z).collect(),
            head: z(&self.head),
            ..self.clone()
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.fan_out()
    }

    pub fn obs_dim(&self) -> usize {
        self.encoder.fan_in()
    }

    /// Inputs whose hiddens are averaged into input `j`'s communication vector.
    pub fn peers(&self, j: usize) -> Vec<usize> {
        (0..self.n_inputs)
            .filter(|&k| match self.mean {
                CommMean::ExcludeSelf => k != j,
                CommMean::ExcludeLeader => Some(k) != self.leader_input,
            })
            .collect()
    }

    fn mean_of(&self, hs: &[Vec<f64>], j: usize) -> Vec<f64> {
        let peers = self.peers(j);
        let mut c = vec![0.0; self.hidden_dim()];
        if peers.is_empty() {
            return c;
        }
        for &k in &peers {
            for (ci, hi) in c.iter_mut().zip(&hs[k]) {
                *ci += hi;
            }
        }
        let n = peers.len() as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }

    pub fn forward(&self, obs: &[&[f64]]) -> Result<(Vec<f64>, CommNetCache)> {
        if obs.len() != self.n_inputs {
            return Err(Error::Shape(format!(
                "CommNet expects {} observations, got {}",
                self.n_inputs,
                obs.len()
            )));
        }
        let mut enc = Vec::with_capacity(self.n_inputs);
        let mut h = Vec::with_capacity(self.n_inputs);
        for o in obs {
            let (y, c) = self.encoder.forward(o)?;
            h.push(y);
            enc.push(c);
        }
        let mut hidden = vec![h];
        let mut comm_vec = Vec::with_capacity(self.comm.len());
        let mut comm_caches = Vec::with_capacity(self.comm.len());
        for layer in &self.comm {
            let hs = hidden.last().expect("non-empty");
            let cs: Vec<Vec<f64>> = (0..self.n_inputs).map(|j| self.mean_of(hs, j)).collect();
            let mut next = Vec::with_capacity(self.n_inputs);
            let mut caches = Vec::with_capacity(self.n_inputs);
            for j in 0..self.n_inputs {
                let x: Vec<f64> = hs[j].iter().chain(&cs[j]).copied().collect();
                let (y, c) = layer.forward(&x)?;
                next.push(y);
                caches.push(c);
            }
            comm_vec.push(cs);
            comm_caches.push(caches);
            hidden.push(next);
        }
        let cat: Vec<f64> = hidden.last().expect("non-empty").concat();
        let (out, head) = self.head.forward(&cat)?;
        Ok((
            out,
            CommNetCache {
                encoder: enc,
                comm: comm_caches,
                head,
                hidden,
                comm_vec,
            },
        ))
    }

    /// Accumulates into `grads`; returns `dL/d obs_j` for every input.
    pub fn backward_into(
        &self,
        cache: &CommNetCache,
        g_out: &[f64],
        grads: &mut CommNetParams,
    ) -> Vec<Vec<f64>> {
        let hdim = self.hidden_dim();
        let dcat = self.head.backward(&cache.head, g_out, &mut grads.head);
        let mut dh: Vec<Vec<f64>> = dcat.chunks(hdim).map(|c| c.to_vec()).collect();
        for (l, layer) in self.comm.iter().enumerate().rev() {
            let mut prev = vec![vec![0.0; hdim]; self.n_inputs];
            for j in 0..self.n_inputs {
                let dx = layer.backward(&cache.comm[l][j], &dh[j], &mut grads.comm[l]);
                let (dself, dc) = dx.split_at(hdim);
                for (p, d) in prev[j].iter_mut().zip(dself) {
                    *p += d;
                }
                let peers = self.peers(j);
                if peers.is_empty() {
                    continue;
                }
                let inv = 1.0 / peers.len() as f64;
                for k in peers {
                    for (p, d) in prev[k].iter_mut().zip(dc) {
                        *p += d * inv;
                    }
                }
            }
            dh = prev;
        }
        (0..self.n_inputs)
            .map(|j| {
                self.encoder
                    .backward(&cache.encoder[j], &dh[j], &mut grads.encoder)
            })
            .collect()
    }

    /// Dense-layer cost per input, the averaging adds, and the head.
    pub fn flops(&self) -> usize {
        let n = self.n_inputs;
        let avg: usize = (0..n).map(|j| self.peers(j).len() * self.hidden_dim()).sum();
        n * self.encoder.flops()
            + self.comm.iter().map(|l| n * l.flops() + avg).sum::<usize>()
            + self.head.flops()
    }
}

impl Params for CommNetParams {
    fn slices(&self) -> Vec<&[f64]> {
        let mut v = self.encoder.slices();
        for l in &self.comm {
            v.extend(l.slices());
        }
        v.extend(self.head.slices());
        v
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.encoder.slices_mut();
        for l in &mut self.comm {
            v.extend(l.slices_mut());
        }
        v.extend(self.head.slices_mut());
        v
    }
}

/// Action distribution of a CommNet over its input observations.
pub fn commnet_forward(params: &CommNetParams, observations: &[&[f64]]) -> Result<Vec<f64>> {
    params.forward(observations).map(|(y, _)| y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{max_relative_error, numerical_gradient};
    use crate::rng::stream_rng;

    fn net(n: usize, mean: CommMean, seed: u64) -> CommNetParams {
        CommNetParams::xavier(5, 6, n, 2, mean, None, &mut stream_rng(seed, "commnet", 0)).unwrap()
    }

    fn obs(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = stream_rng(seed, "commnet-obs", 0);
        (0..n)
            .map(|_| (0..5).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect()
    }

    fn refs(o: &[Vec<f64>]) -> Vec<&[f64]> {
        o.iter().map(|v| v.as_slice()).collect()
    }

    #[test]
    fn output_is_distribution() {
        let p = net(3, CommMean::ExcludeSelf, 1);
        let o = obs(3, 1);
        let y = commnet_forward(&p, &refs(&o)).unwrap();
        assert_eq!(y.len(), 7);
        assert!(y.iter().all(|v| *v >= 0.0));
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wrong_input_count() {
        let p = net(3, CommMean::ExcludeSelf, 1);
        let o = obs(2, 1);
        assert!(commnet_forward(&p, &refs(&o)).is_err());
    }

    #[test]
    fn identical_inputs_give_identical_comm() {
        let p = net(3, CommMean::ExcludeSelf, 2);
        let one = obs(1, 2).remove(0);
        let o = vec![one.clone(), one.clone(), one];
        let (_, c) = p.forward(&refs(&o)).unwrap();
        for l in 0..p.comm.len() {
            for j in 0..3 {
                assert_eq!(c.comm_vec[l][j], c.hidden[l][j]);
            }
        }
    }

    #[test]
    fn permutation_permutes_hiddens() {
        let p = net(3, CommMean::ExcludeSelf, 3);
        let o = obs(3, 3);
        let perm = [2, 0, 1];
        let po: Vec<Vec<f64>> = perm.iter().map(|&i| o[i].clone()).collect();
        let (_, a) = p.forward(&refs(&o)).unwrap();
        let (_, b) = p.forward(&refs(&po)).unwrap();
        for l in 0..a.hidden.len() {
            for (j, &src) in perm.iter().enumerate() {
                for (x, y) in b.hidden[l][j].iter().zip(&a.hidden[l][src]) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_net_is_uniform() {
        let p = net(2, CommMean::ExcludeSelf, 4).zeros_like();
        let o = obs(2, 4);
        for v in commnet_forward(&p, &refs(&o)).unwrap() {
            assert!((v - 1.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn self_excluded_from_own_comm() {
        let p = net(3, CommMean::ExcludeSelf, 5);
        let mut o = obs(3, 5);
        let (_, a) = p.forward(&refs(&o)).unwrap();
        o[1].iter_mut().for_each(|v| *v += 0.7);
        let (_, b) = p.forward(&refs(&o)).unwrap();
        assert_eq!(a.comm_vec[0][1], b.comm_vec[0][1]);
        assert_ne!(a.comm_vec[0][0], b.comm_vec[0][0]);

        let mut z = p.clone();
        z.encoder = z.zeros_like().encoder;
        let (_, a) = z.forward(&refs(&o)).unwrap();
        o[1].iter_mut().for_each(|v| *v -= 3.0);
        let (_, b) = z.forward(&refs(&o)).unwrap();
        assert_eq!(a.comm_vec[0][1], b.comm_vec[0][1]);
    }

    #[test]
    fn exclude_leader_variant() {
        let mut p = net(3, CommMean::ExcludeLeader, 6);
        p.leader_input = Some(2);
        assert_eq!(p.peers(0), vec![0, 1]);
        assert_eq!(p.peers(2), vec![0, 1]);
        let s = net(3, CommMean::ExcludeSelf, 6);
        assert_eq!(s.peers(1), vec![0, 2]);
    }

    #[test]
    fn single_input_has_zero_comm() {
        let p = net(1, CommMean::ExcludeSelf, 7);
        let o = obs(1, 7);
        let (y, c) = p.forward(&refs(&o)).unwrap();
        assert!(c.comm_vec[0][0].iter().all(|v| *v == 0.0));
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    fn grad_check(mean: CommMean, n: usize, seed: u64) -> f64 {
        let mut p = net(n, mean, 10 + seed);
        p.leader_input = Some(n - 1);
        let o = obs(n, 10 + seed);
        let coef: Vec<f64> = (0..7).map(|i| (i as f64 * 0.37).sin()).collect();
        let (_, cache) = p.forward(&refs(&o)).unwrap();
        let mut g = p.zeros_like();
        let dobs = p.backward_into(&cache, &coef, &mut g);
        let loss = |q: &CommNetParams, o: &[Vec<f64>]| -> f64 {
            commnet_forward(q, &refs(o))
                .unwrap()
                .iter()
                .zip(&coef)
                .map(|(a, b)| a * b)
                .sum()
        };
        let mut probe = p.clone();
        let num = numerical_gradient(
            |th| {
                probe.assign_flat(th).unwrap();
                loss(&probe, &o)
            },
            &p.flatten(),
            1e-5,
        );
        let mut err = max_relative_error(&g.flatten(), &num, 1e-7);
        let flat_obs: Vec<f64> = o.concat();
        let num_obs = numerical_gradient(
            |x| {
                let oo: Vec<Vec<f64>> = x.chunks(5).map(|c| c.to_vec()).collect();
                loss(&p, &oo)
            },
            &flat_obs,
            1e-5,
        );
        err = err.max(max_relative_error(&dobs.concat(), &num_obs, 1e-7));
        err
    }

    #[test]
    fn gradients_match_finite_differences() {
        for seed in 0..5 {
            assert!(grad_check(CommMean::ExcludeSelf, 3, seed) < 1e-4);
            assert!(grad_check(CommMean::ExcludeLeader, 3, seed) < 1e-4);
        }
        assert!(grad_check(CommMean::ExcludeSelf, 1, 0) < 1e-4);
    }

    #[test]
    fn flops_counts_every_input() {
        let p = net(3, CommMean::ExcludeSelf, 8);
        let dense = 3 * p.encoder.flops() + 2 * 3 * p.comm[0].flops() + p.head.flops();
        assert_eq!(p.flops(), dense + 2 * 3 * 2 * 6);
    }
}

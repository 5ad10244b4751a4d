//! Bounded experience replay with uniform sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One joint step. Observations are stored in single precision to halve
/// the buffer footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<Vec<f32>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_obs: Vec<Vec<f32>>,
    pub done: bool,
}

fn narrow(o: &[Vec<f64>]) -> Vec<Vec<f32>> {
    o.iter().map(|v| v.iter().map(|x| *x as f32).collect()).collect()
}

fn widen(o: &[Vec<f32>]) -> Vec<Vec<f64>> {
    o.iter().map(|v| v.iter().map(|x| *x as f64).collect()).collect()
}

impl Transition {
    pub fn new(
        obs: &[Vec<f64>],
        actions: Vec<usize>,
        rewards: Vec<f64>,
        next_obs: &[Vec<f64>],
        done: bool,
    ) -> Self {
        Transition {
            obs: narrow(obs),
            actions,
            rewards,
            next_obs: narrow(next_obs),
            done,
        }
    }

    pub fn obs_f64(&self) -> Vec<Vec<f64>> {
        widen(&self.obs)
    }

    pub fn next_obs_f64(&self) -> Vec<Vec<f64>> {
        widen(&self.next_obs)
    }

    fn shape(&self) -> (usize, Vec<usize>) {
        (self.actions.len(), self.obs.iter().map(Vec::len).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    warmup: usize,
    items: Vec<Transition>,
    next: usize,
    inserted: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, warmup: usize) -> Result<Self> {
        if capacity == 0 || warmup > capacity {
            return Err(Error::Config(format!(
                "replay capacity {capacity} must be >= 1 and >= warmup {warmup}"
            )));
        }
        Ok(ReplayBuffer {
            capacity,
            warmup,
            items: Vec::new(),
            next: 0,
            inserted: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn is_ready(&self) -> bool {
        !self.items.is_empty() && self.items.len() >= self.warmup
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    /// Inserts, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) -> Result<()> {
        if let Some(first) = self.items.first() {
            if first.shape() != t.shape() {
                return Err(Error::Shape("transition width differs from the buffer's".into()));
            }
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        self.inserted += 1;
        Ok(())
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if !self.is_ready() {
            return Err(Error::State(format!(
                "replay holds {} transitions, warm-up needs {}",
                self.items.len(),
                self.warmup.max(1)
            )));
        }
        Ok((0..n).map(|_| rng.random_range(0..self.items.len())).collect())
    }
}

//! Dense networks with hand-written reverse mode, Xavier init and Adam.

mod checkpoint;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use checkpoint::{read_mlp, write_mlp, MLP_SCHEMA};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    /// `y = self * x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in 4 * chunks..n {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// Uniform Xavier/Glorot initialization of a `fan_out x fan_in` weight.
pub fn xavier_init<R: Rng + ?Sized>(fan_out: usize, fan_in: usize, rng: &mut R) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Shape("xavier_init needs positive dimensions".into()));
    }
    let bound = xavier_bound(fan_in, fan_out);
    let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
    let data = (0..fan_in * fan_out).map(|_| dist.sample(rng)).collect();
    Ok(Matrix {
        rows: fan_out,
        cols: fan_in,
        data,
    })
}

pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Identity,
    Softmax,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::ReLU => "relu",
            Activation::Identity => "identity",
            Activation::Softmax => "softmax",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::ReLU),
            "identity" => Some(Activation::Identity),
            "softmax" => Some(Activation::Softmax),
            _ => None,
        }
    }

    fn apply(self, z: &mut [f64]) {
        match self {
            Activation::ReLU => z.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Identity => {}
            Activation::Softmax => softmax_in_place(z),
        }
    }

    /// Per-unit cost used by [`flops_count`].
    fn unit_cost(self) -> usize {
        match self {
            Activation::ReLU => 1,
            Activation::Identity => 0,
            Activation::Softmax => 3,
        }
    }
}

pub fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    softmax_in_place(&mut out);
    out
}

/// One affine layer followed by an activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// What [`Dense::backward`] needs from the forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

impl Dense {
    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        Dense {
            weight: Matrix::zeros(fan_out, fan_in),
            bias: vec![0.0; fan_out],
            activation,
        }
    }

    pub fn xavier<R: Rng + ?Sized>(
        fan_in: usize,
        fan_out: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(Dense {
            weight: xavier_init(fan_out, fan_in, rng)?,
            bias: vec![0.0; fan_out],
            activation,
        })
    }

    pub fn fan_in(&self) -> usize {
        self.weight.cols
    }

    pub fn fan_out(&self) -> usize {
        self.weight.rows
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
        if x.len() != self.fan_in() {
            return Err(Error::Shape(format!(
                "layer expects {} inputs, got {}",
                self.fan_in(),
                x.len()
            )));
        }
        let mut z = self.weight.matvec(x);
        for (v, b) in z.iter_mut().zip(&self.bias) {
            *v += b;
        }
        self.activation.apply(&mut z);
        let cache = DenseCache {
            input: x.to_vec(),
            output: z.clone(),
        };
        Ok((z, cache))
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub fn backward(&self, cache: &DenseCache, g_out: &[f64], grad: &mut Dense) -> Vec<f64> {
        let dz: Vec<f64> = match self.activation {
            Activation::Identity => g_out.to_vec(),
            Activation::ReLU => g_out
                .iter()
                .zip(&cache.output)
                .map(|(g, y)| if *y > 0.0 { *g } else { 0.0 })
                .collect(),
            Activation::Softmax => {
                let s = &cache.output;
                let dot: f64 = s.iter().zip(g_out).map(|(a, b)| a * b).sum();
                s.iter().zip(g_out).map(|(si, gi)| si * (gi - dot)).collect()
            }
        };
        let cols = self.fan_in();
        let mut dx = vec![0.0; cols];
        for (r, &d) in dz.iter().enumerate() {
            grad.bias[r] += d;
            if d == 0.0 {
                continue;
            }
            let w = self.weight.row(r);
            let gw = &mut grad.weight.data[r * cols..(r + 1) * cols];
            for ((g, x), (dxc, wc)) in gw.iter_mut().zip(&cache.input).zip(dx.iter_mut().zip(w)) {
                *g += d * x;
                *dxc += d * wc;
            }
        }
        dx
    }

    pub fn flops(&self) -> usize {
        let (i, o) = (self.fan_in(), self.fan_out());
        2 * i * o + o + o * self.activation.unit_cost()
    }
}

/// Parameter containers that can be walked as flat slices, in a fixed order.
pub trait Params {
    fn slices(&self) -> Vec<&[f64]>;
    fn slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn n_params(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        self.slices().concat()
    }

    fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                flat.len()
            )));
        }
        let mut off = 0;
        for s in self.slices_mut() {
            s.copy_from_slice(&flat[off..off + s.len()]);
            off += s.len();
        }
        Ok(())
    }

    fn scale(&mut self, k: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|v| *v *= k);
        }
    }
}

impl Params for Dense {
    fn slices(&self) -> Vec<&[f64]> {
        vec![&self.weight.data, &self.bias]
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.weight.data, &mut self.bias]
    }
}

/// A chain of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpCache {
    pub layers: Vec<DenseCache>,
}

impl MlpParams {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        let p = MlpParams { layers };
        p.validate()?;
        Ok(p)
    }

    /// Xavier-initialized `dims[0] -> dims[1] -> ... `, `hidden` activation on
    /// every layer except the last, which gets `output`.
    pub fn xavier<R: Rng + ?Sized>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Shape("an MLP needs at least two widths".into()));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| {
                let act = if i + 1 == n { output } else { hidden };
                Dense::xavier(dims[i], dims[i + 1], act, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        MlpParams::new(layers)
    }

    pub fn zeros_like(&self) -> Self {
        MlpParams {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.fan_in(), l.fan_out(), l.activation))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Shape("an MLP needs at least one layer".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.bias.len() != l.fan_out() {
                return Err(Error::Shape(format!("layer {i}: bias width mismatch")));
            }
            if l.activation == Activation::Softmax && i + 1 != self.layers.len() {
                return Err(Error::Shape(format!("layer {i}: softmax only allowed last")));
            }
        }
        for (i, w) in self.layers.windows(2).enumerate() {
            if w[0].fan_out() != w[1].fan_in() {
                return Err(Error::Shape(format!(
                    "layer {} outputs {} but layer {} takes {}",
                    i,
                    w[0].fan_out(),
                    i + 1,
                    w[1].fan_in()
                )));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.fan_out())
    }

    /// Widths `[in, h1, ..., out]`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.fan_out()))
            .collect()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, MlpCache)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for l in &self.layers {
            let (y, c) = l.forward(&h)?;
            caches.push(c);
            h = y;
        }
        Ok((h, MlpCache { layers: caches }))
    }

    /// Output only, no cache.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.forward(x).map(|(y, _)| y)
    }

    /// Accumulates into `grads` and returns `dL/dx`.
    pub fn backward_into(&self, cache: &MlpCache, g_out: &[f64], grads: &mut MlpParams) -> Vec<f64> {
        let mut g = g_out.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            g = l.backward(&cache.layers[i], &g, &mut grads.layers[i]);
        }
        g
    }

    pub fn backward(&self, cache: &MlpCache, g_out: &[f64]) -> (MlpParams, Vec<f64>) {
        let mut grads = self.zeros_like();
        let dx = self.backward_into(cache, g_out, &mut grads);
        (grads, dx)
    }
}

impl Params for MlpParams {
    fn slices(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.slices()).collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers.iter_mut().flat_map(|l| l.slices_mut()).collect()
    }
}

pub fn forward(p: &MlpParams, x: &[f64]) -> Result<(Vec<f64>, MlpCache)> {
    p.forward(x)
}

pub fn backward(p: &MlpParams, cache: &MlpCache, g_out: &[f64]) -> (MlpParams, Vec<f64>) {
    p.backward(cache, g_out)
}

/// Operation count: `2*in*out + out` per layer, plus one op per ReLU unit
/// and three per softmax unit.
pub fn flops_count(p: &MlpParams) -> usize {
    p.layers.iter().map(Dense::flops).sum()
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;
pub const DEFAULT_LR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub lr: f64,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            eps: ADAM_EPS,
            lr,
        }
    }

    pub fn for_params<P: Params>(p: &P, lr: f64) -> Self {
        AdamState::new(p.n_params(), lr)
    }
}

/// One bias-corrected Adam descent step: `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step<P: Params>(params: &mut P, grads: &P, state: &mut AdamState) -> Result<()> {
    let n = params.n_params();
    if grads.n_params() != n || state.m.len() != n || state.v.len() != n {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moments",
            n,
            grads.n_params(),
            state.m.len()
        )));
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    let mut i = 0;
    for (p, g) in params.slices_mut().into_iter().zip(grads.slices()) {
        for (pv, gv) in p.iter_mut().zip(g) {
            let m = b1 * state.m[i] + (1.0 - b1) * gv;
            let v = b2 * state.v[i] + (1.0 - b2) * gv * gv;
            state.m[i] = m;
            state.v[i] = v;
            *pv -= state.lr * (m / c1) / ((v / c2).sqrt() + state.eps);
            i += 1;
        }
    }
    Ok(())
}

/// Central-difference gradient of `f` at `x` with step `h`.
pub fn numerical_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max_i |a_i - b_i| / max(|a_i| + |b_i|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (x.abs() + y.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn rng(i: u64) -> crate::rng::SimRng {
        stream_rng(42, "nn-test", i)
    }

    #[test]
    fn xavier_bound_and_determinism() {
        assert!((xavier_bound(64, 64) - 0.216_506_350_946_109_66).abs() < 1e-12);
        let a = xavier_init(64, 64, &mut rng(0)).unwrap();
        let b = xavier_init(64, 64, &mut rng(0)).unwrap();
        assert_eq!(a, b);
        assert!(a.data().iter().all(|v| v.abs() <= xavier_bound(64, 64)));
        assert!(xavier_init(0, 3, &mut rng(0)).is_err());
    }

    #[test]
    fn xavier_mean_is_zero() {
        let m = xavier_init(400, 250, &mut rng(1)).unwrap();
        let b = xavier_bound(250, 400);
        let n = m.data().len() as f64;
        let mean = m.data().iter().sum::<f64>() / n;
        let sigma = b / 3f64.sqrt() / n.sqrt();
        assert!(mean.abs() < 3.0 * sigma);
    }

    #[test]
    fn zero_net_softmax_is_uniform() {
        let p = MlpParams::new(vec![Dense::zeros(5, 7, Activation::Softmax)]).unwrap();
        let (y, _) = p.forward(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap();
        for v in y {
            assert!((v - 1.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_layer_passes_through() {
        let mut l = Dense::zeros(3, 3, Activation::Identity);
        for i in 0..3 {
            l.weight.set(i, i, 1.0);
        }
        let x = [0.3, -1.5, 7.0];
        assert_eq!(l.forward(&x).unwrap().0, x.to_vec());
    }

    #[test]
    fn relu_elementwise() {
        let mut l = Dense::zeros(2, 2, Activation::ReLU);
        l.weight.set(0, 0, 1.0);
        l.weight.set(1, 1, 1.0);
        assert_eq!(l.forward(&[-1.0, 2.0]).unwrap().0, vec![0.0, 2.0]);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let p = MlpParams::xavier(&[3, 4, 2], Activation::ReLU, Activation::Identity, &mut rng(2))
            .unwrap();
        assert!(p.forward(&[1.0, 2.0]).is_err());
        let bad = MlpParams::new(vec![
            Dense::zeros(3, 4, Activation::ReLU),
            Dense::zeros(5, 2, Activation::Identity),
        ]);
        assert!(bad.is_err());
        let early_softmax = MlpParams::new(vec![
            Dense::zeros(3, 4, Activation::Softmax),
            Dense::zeros(4, 2, Activation::Identity),
        ]);
        assert!(early_softmax.is_err());
    }

    #[test]
    fn linear_gradient_closed_form() {
        let mut l = Dense::zeros(2, 3, Activation::Identity);
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        l.weight = Matrix::from_vec(3, 2, w.to_vec()).unwrap();
        let x = [0.5, -2.0];
        let g = [1.0, -1.0, 2.0];
        let (_, c) = l.forward(&x).unwrap();
        let mut grad = Dense::zeros(2, 3, Activation::Identity);
        let dx = l.backward(&c, &g, &mut grad);
        for r in 0..3 {
            for cidx in 0..2 {
                assert_eq!(grad.weight.get(r, cidx), g[r] * x[cidx]);
            }
        }
        assert_eq!(grad.bias, g.to_vec());
        assert_eq!(dx, vec![1.0 - 3.0 + 10.0, 2.0 - 4.0 + 12.0]);
    }

    #[test]
    fn relu_gradient_blocked_when_inactive() {
        let mut l = Dense::zeros(1, 2, Activation::ReLU);
        l.weight.set(0, 0, 1.0);
        l.weight.set(1, 0, -1.0);
        let (_, c) = l.forward(&[2.0]).unwrap();
        let mut grad = Dense::zeros(1, 2, Activation::ReLU);
        l.backward(&c, &[1.0, 1.0], &mut grad);
        assert_eq!(grad.weight.get(1, 0), 0.0);
        assert_eq!(grad.weight.get(0, 0), 2.0);
    }

    fn check_mlp(dims: &[usize], out: Activation, seed: u64) -> f64 {
        let mut r = rng(100 + seed);
        let p = MlpParams::xavier(dims, Activation::ReLU, out, &mut r).unwrap();
        let x: Vec<f64> = (0..dims[0]).map(|_| r.random_range(-1.0..1.0)).collect();
        let coef: Vec<f64> = (0..*dims.last().unwrap())
            .map(|_| r.random_range(-1.0..1.0))
            .collect();
        let loss = |p: &MlpParams| -> f64 {
            let y = p.predict(&x).unwrap();
            y.iter().zip(&coef).map(|(a, b)| a * b).sum()
        };
        let (_, cache) = p.forward(&x).unwrap();
        let (grads, _) = p.backward(&cache, &coef);
        let flat = p.flatten();
        let mut probe = p.clone();
        let numeric = numerical_gradient(
            |theta| {
                probe.assign_flat(theta).unwrap();
                loss(&probe)
            },
            &flat,
            1e-5,
        );
        max_relative_error(&grads.flatten(), &numeric, 1e-7)
    }

    #[test]
    fn gradient_check_random_nets() {
        for seed in 0..5 {
            assert!(check_mlp(&[6, 8, 8, 5], Activation::Softmax, seed) < 1e-4);
            assert!(check_mlp(&[6, 8, 8, 1], Activation::Identity, seed) < 1e-4);
        }
    }

    #[test]
    fn input_gradient_matches_fd() {
        let mut r = rng(7);
        let p = MlpParams::xavier(&[4, 6, 3], Activation::ReLU, Activation::Softmax, &mut r)
            .unwrap();
        let x = [0.2, -0.4, 0.9, 0.1];
        let (_, c) = p.forward(&x).unwrap();
        let g = [1.0, 0.0, -0.5];
        let (_, dx) = p.backward(&c, &g);
        let num = numerical_gradient(
            |x| p.predict(x).unwrap().iter().zip(&g).map(|(a, b)| a * b).sum(),
            &x,
            1e-5,
        );
        assert!(max_relative_error(&dx, &num, 1e-7) < 1e-4);
    }

    #[test]
    fn adam_zero_gradient_is_noop() {
        let mut p = MlpParams::xavier(&[3, 4, 2], Activation::ReLU, Activation::Identity, &mut rng(3))
            .unwrap();
        let before = p.clone();
        let mut s = AdamState::for_params(&p, DEFAULT_LR);
        adam_step(&mut p, &before.zeros_like(), &mut s).unwrap();
        assert_eq!(p, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn adam_first_step_is_lr_sign() {
        let mut p = MlpParams::new(vec![Dense::zeros(2, 2, Activation::Identity)]).unwrap();
        let mut g = p.zeros_like();
        g.assign_flat(&[0.3, -2.0, 1e-3, -5.0, 7.0, -0.01]).unwrap();
        let mut s = AdamState::for_params(&p, 1e-3);
        adam_step(&mut p, &g, &mut s).unwrap();
        for (pv, gv) in p.flatten().iter().zip(g.flatten()) {
            assert!((pv + 1e-3 * gv.signum()).abs() < 1e-7);
        }
    }

    #[test]
    fn adam_is_deterministic_and_checks_shapes() {
        let p0 = MlpParams::xavier(&[3, 4, 2], Activation::ReLU, Activation::Identity, &mut rng(4))
            .unwrap();
        let g = p0.clone();
        let run = || {
            let mut p = p0.clone();
            let mut s = AdamState::for_params(&p, 1e-3);
            adam_step(&mut p, &g, &mut s).unwrap();
            (p, s)
        };
        assert_eq!(run(), run());
        let other = MlpParams::new(vec![Dense::zeros(1, 1, Activation::Identity)]).unwrap();
        let mut p = p0.clone();
        let mut s = AdamState::for_params(&p, 1e-3);
        assert!(adam_step(&mut p, &other, &mut s).is_err());
    }

    #[test]
    fn flops_convention() {
        let one = MlpParams::new(vec![Dense::zeros(2, 3, Activation::Identity)]).unwrap();
        assert_eq!(flops_count(&one), 15);
        let a = Dense::zeros(4, 5, Activation::ReLU);
        let b = Dense::zeros(5, 7, Activation::Softmax);
        let both = MlpParams::new(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(flops_count(&both), a.flops() + b.flops());
        assert_eq!(a.flops(), 2 * 4 * 5 + 5 + 5);
        assert_eq!(b.flops(), 2 * 5 * 7 + 7 + 21);
    }

    #[test]
    fn forward_is_pure() {
        let p = MlpParams::xavier(&[5, 9, 7], Activation::ReLU, Activation::Softmax, &mut rng(5))
            .unwrap();
        let x = [0.1, 0.2, -0.3, 0.4, 0.5];
        let a = p.predict(&x).unwrap();
        let b = p.predict(&x).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn softmax_properties(z in proptest::collection::vec(-50.0f64..50.0, 1..12), shift in -100.0f64..100.0) {
                let s = softmax(&z);
                prop_assert!(s.iter().all(|v| *v >= 0.0));
                prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
                let t = softmax(&shifted);
                for (a, b) in s.iter().zip(&t) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}

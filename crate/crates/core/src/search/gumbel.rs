//! Categorical logits, Gumbel-Softmax sampling and the Adam update.
//!
//! The loss for one batch is
//!
//! ```text
//! L(γ) = 1/|B| Σ_b w_b Σ_i softmax((γ_i + g_bi) / τ)[c_bi]
//! ```
//!
//! where `c_bi` is the hard choice of sample `b` along dimension `i`, `g_bi`
//! its Gumbel noise and `w_b` the sample's (detached) cost. The gradient only
//! flows through the softmax.

use rand::Rng;
use rand_distr::{Distribution, Gumbel};
use serde::{Deserialize, Serialize};

/// One logit vector per design dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalParams {
    pub logits: Vec<Vec<f64>>,
}

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = x.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

/// First index of the maximum.
pub fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if *v > x[best] {
            best = i;
        }
    }
    best
}

impl CategoricalParams {
    /// All-zero logits, i.e. uniform distributions, for dimensions of the
    /// given sizes.
    pub fn uniform(lens: &[usize]) -> Self {
        CategoricalParams {
            logits: lens.iter().map(|&l| vec![0.0; l]).collect(),
        }
    }

    pub fn dims(&self) -> usize {
        self.logits.len()
    }

    pub fn num_params(&self) -> usize {
        self.logits.iter().map(Vec::len).sum()
    }

    pub fn probabilities(&self, dim: usize) -> Vec<f64> {
        softmax(&self.logits[dim])
    }

    /// Shannon entropy (nats) of dimension `dim`.
    pub fn entropy(&self, dim: usize) -> f64 {
        let plogp: f64 = self
            .probabilities(dim)
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum();
        0.0 - plogp
    }

    /// Per-dimension argmax, lowest index on ties.
    pub fn argmax(&self) -> Vec<usize> {
        self.logits.iter().map(|l| argmax(l)).collect()
    }

    /// Finite logits and every softmax sums to one within `1e-12`.
    pub fn is_valid(&self) -> bool {
        self.logits.iter().all(|l| {
            !l.is_empty() && l.iter().all(|v| v.is_finite()) && (softmax(l).iter().sum::<f64>() - 1.0).abs() <= 1e-12
        })
    }

    fn flat_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.logits.iter_mut().flatten()
    }
}

/// One Gumbel-Softmax draw across every dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GumbelSample {
    /// Hard choice per dimension, `argmax(soft)`.
    pub choices: Vec<usize>,
    /// `softmax((γ + g) / τ)` per dimension.
    pub soft: Vec<Vec<f64>>,
    /// The Gumbel(0, 1) noise that produced `soft`.
    pub noise: Vec<Vec<f64>>,
}

fn relaxed(logits: &[f64], noise: &[f64], tau: f64) -> Vec<f64> {
    let z: Vec<f64> = logits.iter().zip(noise).map(|(l, g)| (l + g) / tau).collect();
    softmax(&z)
}

pub fn gumbel_sample<R: Rng + ?Sized>(params: &CategoricalParams, tau: f64, rng: &mut R) -> GumbelSample {
    assert!(tau > 0.0, "temperature must be positive");
    let gumbel = Gumbel::new(0.0, 1.0).expect("standard Gumbel");
    let mut choices = Vec::with_capacity(params.dims());
    let mut soft = Vec::with_capacity(params.dims());
    let mut noise = Vec::with_capacity(params.dims());
    for logits in &params.logits {
        let g: Vec<f64> = logits.iter().map(|_| gumbel.sample(rng)).collect();
        let s = relaxed(logits, &g, tau);
        choices.push(argmax(&s));
        soft.push(s);
        noise.push(g);
    }
    GumbelSample { choices, soft, noise }
}

/// Adam hyper-parameters. Defaults: lr 1e-7, β₁ 0.5, β₂ 0.999.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "AdamConfig::default_lr")]
    pub lr: f64,
    #[serde(default = "AdamConfig::default_beta1")]
    pub beta1: f64,
    #[serde(default = "AdamConfig::default_beta2")]
    pub beta2: f64,
    #[serde(default = "AdamConfig::default_eps")]
    pub eps: f64,
}

impl AdamConfig {
    fn default_lr() -> f64 {
        1e-7
    }
    fn default_beta1() -> f64 {
        0.5
    }
    fn default_beta2() -> f64 {
        0.999
    }
    fn default_eps() -> f64 {
        1e-8
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: Self::default_lr(),
            beta1: Self::default_beta1(),
            beta2: Self::default_beta2(),
            eps: Self::default_eps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    /// Steps skipped because no sample in the batch had a finite cost.
    pub skipped_steps: u64,
}

impl AdamState {
    pub fn new(num_params: usize, config: AdamConfig) -> Self {
        AdamState {
            config,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
            skipped_steps: 0,
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.t
    }

    fn update(&mut self, params: &mut CategoricalParams, grad: &[f64]) {
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let bc1 = 1.0 - beta1.powi(self.t);
        let bc2 = 1.0 - beta2.powi(self.t);
        for (i, p) in params.flat_mut().enumerate() {
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * grad[i];
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

fn finite(batch: &[(GumbelSample, f64)]) -> impl Iterator<Item = &(GumbelSample, f64)> {
    batch.iter().filter(|(_, w)| w.is_finite())
}

/// Surrogate loss at `params`, recomputing the relaxed vectors from each
/// sample's stored noise. Samples with non-finite cost are ignored.
pub fn surrogate_loss(params: &CategoricalParams, batch: &[(GumbelSample, f64)], tau: f64) -> f64 {
    let kept: Vec<_> = finite(batch).collect();
    if kept.is_empty() {
        return 0.0;
    }
    let total: f64 = kept
        .iter()
        .map(|(s, w)| {
            let picked: f64 = params
                .logits
                .iter()
                .zip(&s.noise)
                .zip(&s.choices)
                .map(|((l, g), &c)| relaxed(l, g, tau)[c])
                .sum();
            w * picked
        })
        .sum();
    total / kept.len() as f64
}

/// Analytic gradient of [`surrogate_loss`], flattened dimension-major.
///
/// `∂ softmax(z/τ)[c] / ∂γ_j = s_c (δ_cj − s_j) / τ`.
pub fn surrogate_gradient(params: &CategoricalParams, batch: &[(GumbelSample, f64)], tau: f64) -> Vec<f64> {
    let mut grad = vec![0.0; params.num_params()];
    let kept: Vec<_> = finite(batch).collect();
    if kept.is_empty() {
        return grad;
    }
    let scale = 1.0 / kept.len() as f64;
    for (sample, w) in kept {
        let mut offset = 0;
        for ((logits, g), &c) in params.logits.iter().zip(&sample.noise).zip(&sample.choices) {
            let s = relaxed(logits, g, tau);
            for (j, sj) in s.iter().enumerate() {
                let delta = if j == c { 1.0 } else { 0.0 };
                grad[offset + j] += scale * w * s[c] * (delta - sj) / tau;
            }
            offset += logits.len();
        }
    }
    grad
}

/// One Adam step on the surrogate loss. Returns the updated logits; a batch
/// with no finite cost leaves them unchanged and bumps
/// [`AdamState::skipped_steps`].
pub fn step(
    params: &CategoricalParams,
    batch: &[(GumbelSample, f64)],
    tau: f64,
    adam: &mut AdamState,
) -> CategoricalParams {
    let mut next = params.clone();
    if finite(batch).next().is_none() {
        adam.skipped_steps += 1;
        return next;
    }
    let grad = surrogate_gradient(params, batch, tau);
    adam.update(&mut next, &grad);
    next
}

//! Statistical and search checks shared with the acceptance target.

#![allow(dead_code)]

use std::time::{Duration, Instant};

use oadse::search::{
    gumbel_sample, load_search_settings, surrogate_gradient, surrogate_loss, CategoricalParams, GumbelSample,
};
use oadse::{builtin_network, exhaustive_search, load_space, search, TechParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn config_path(rel: &str) -> String {
    format!("{}/../../configs/{rel}", env!("CARGO_MANIFEST_DIR"))
}

/// χ² goodness of fit of hard Gumbel-max choices against softmax(γ).
/// Returns (statistic, p-value).
pub fn gumbel_chi_square(logits: &[f64], draws: usize, seed: u64) -> (f64, f64) {
    let params = CategoricalParams {
        logits: vec![logits.to_vec()],
    };
    let probs = params.probabilities(0);
    let mut counts = vec![0usize; logits.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..draws {
        counts[gumbel_sample(&params, 1.0, &mut rng).choices[0]] += 1;
    }
    let stat: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&o, &p)| {
            let e = p * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((logits.len() - 1) as f64).unwrap();
    (stat, 1.0 - dist.cdf(stat))
}

/// Relative L2 error between the analytic surrogate gradient and central
/// finite differences, at τ = 1 with frozen noise.
pub fn gradient_fd_error(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lens = [4, 2, 5, 3];
    let params = CategoricalParams {
        logits: lens
            .iter()
            .map(|&l| (0..l).map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect(),
    };
    let tau = 1.0;
    let batch: Vec<(GumbelSample, f64)> = (0..8)
        .map(|_| (gumbel_sample(&params, tau, &mut rng), rng.random_range(-2.0..2.0)))
        .collect();
    let analytic = surrogate_gradient(&params, &batch, tau);
    let h = 1e-5;
    let mut numeric = Vec::with_capacity(analytic.len());
    for d in 0..params.logits.len() {
        for j in 0..params.logits[d].len() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.logits[d][j] += h;
            minus.logits[d][j] -= h;
            numeric.push((surrogate_loss(&plus, &batch, tau) - surrogate_loss(&minus, &batch, tau)) / (2.0 * h));
        }
    }
    let diff: f64 = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / norm
}

pub struct SearchEfficacy {
    pub optimum: f64,
    pub median: f64,
    pub gap: f64,
    pub slowest: Duration,
    pub all_feasible: bool,
}

/// Gumbel search on the shipped `small` space with the shipped TEA settings,
/// over seeds 0..10, against the exhaustive optimum.
pub fn small_space_efficacy() -> SearchEfficacy {
    let space = load_space(config_path("spaces/small.toml")).unwrap();
    let settings = load_search_settings(config_path("search/small_tea.toml")).unwrap();
    let model = builtin_network("lenet5").unwrap();
    let tech = TechParams::default();
    let exact = exhaustive_search(&model, &space, &tech, &settings.objective).unwrap();
    let mut bests = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut all_feasible = true;
    for seed in 0..10 {
        let t = Instant::now();
        let r = search(&model, &space, &tech, &settings.objective, &settings.budget, seed).unwrap();
        slowest = slowest.max(t.elapsed());
        all_feasible &= oadse::validate(&r.best_config, &space, &tech).is_ok();
        bests.push(r.best_objective);
    }
    bests.sort_by(f64::total_cmp);
    let median = (bests[4] + bests[5]) / 2.0;
    SearchEfficacy {
        optimum: exact.best_objective,
        median,
        gap: (median - exact.best_objective).abs() / exact.best_objective.abs(),
        slowest,
        all_feasible,
    }
}

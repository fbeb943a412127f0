//! The conditional randomization test.
//!
//! Under the null every graph with the observed degree sequence is equally
//! likely. Draws from the sequential sampler are reweighted by
//! `w_b = 1 / (c(Y_b) σ(Y_b))` to estimate that uniform reference
//! distribution: the class size, tail probabilities (p-values), and a
//! randomized critical value `(c_α, g_α)`.
//!
//! All weights stay in log space. They are exponentiated only after the
//! batch maximum has been subtracted, so every estimator here that is a
//! ratio of weighted sums is unaffected by a common rescaling of the
//! weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::{fit_mle, LinkProbabilities, MleError};
use crate::graph::Graph;
use crate::sampler::{sample_batch, SampleError, SampledDraw};
use crate::stats::{StatError, StatisticId};

/// Tolerance and iteration cap used when the statistic needs a β-model fit.
pub const MLE_TOLERANCE: f64 = 1e-10;
pub const MLE_MAX_ITER: usize = 200_000;

#[derive(Debug, Error)]
pub enum TestError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Statistic(#[from] StatError),
    #[error("β-model fit failed ({0}); use a statistic that does not need fitted link probabilities")]
    Mle(#[from] MleError),
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
    #[error("at least one draw is required")]
    NoDraws,
}

/// Direction of a tail probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    /// `T ≥ t_obs`
    AtLeast,
    /// `T > t_obs`
    Greater,
}

impl Comparison {
    #[inline]
    pub fn holds(self, value: f64, observed: f64) -> bool {
        match self {
            Comparison::AtLeast => value >= observed,
            Comparison::Greater => value > observed,
        }
    }
}

/// Importance weights of a batch, kept as logs plus a copy rescaled so the
/// largest weight is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceWeights {
    log: Vec<f64>,
    log_max: f64,
    scaled: Vec<f64>,
}

impl ImportanceWeights {
    pub fn from_log(log: Vec<f64>) -> Self {
        let log_max = log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scaled = log.iter().map(|&l| (l - log_max).exp()).collect();
        ImportanceWeights { log, log_max, scaled }
    }

    pub fn from_draws(draws: &[SampledDraw]) -> Self {
        Self::from_log(draws.iter().map(SampledDraw::log_weight).collect())
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log
    }

    /// Weights divided by the largest one.
    pub fn scaled(&self) -> &[f64] {
        &self.scaled
    }

    /// Kish effective sample size `(Σw)² / Σw²`.
    pub fn effective_sample_size(&self) -> f64 {
        let s: f64 = self.scaled.iter().sum();
        let s2: f64 = self.scaled.iter().map(|w| w * w).sum();
        if s2 == 0.0 {
            0.0
        } else {
            s * s / s2
        }
    }
}

/// Monte Carlo estimate of the class size, `(1/B) Σ_b w_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalityEstimate {
    pub log_value: f64,
    /// Log of the standard error of the mean weight.
    pub log_std_error: f64,
}

impl CardinalityEstimate {
    /// May overflow to infinity for large classes; prefer `log_value`.
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    pub fn std_error(&self) -> f64 {
        self.log_std_error.exp()
    }
}

pub fn estimate_cardinality_from_weights(weights: &ImportanceWeights) -> CardinalityEstimate {
    let b = weights.len() as f64;
    let scaled = weights.scaled();
    let mean = scaled.iter().sum::<f64>() / b;
    let var = if weights.len() > 1 {
        scaled.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (b - 1.0)
    } else {
        0.0
    };
    CardinalityEstimate {
        log_value: weights.log_max + mean.ln(),
        log_std_error: weights.log_max + 0.5 * (var / b).ln(),
    }
}

/// `|𝔻| ≈ (1/B) Σ_b 1 / (c(Y_b) σ(Y_b))`.
pub fn estimate_cardinality(draws: &[SampledDraw]) -> Result<CardinalityEstimate, TestError> {
    if draws.is_empty() {
        return Err(TestError::NoDraws);
    }
    Ok(estimate_cardinality_from_weights(&ImportanceWeights::from_draws(draws)))
}

/// A self-normalized tail-probability estimate with its delta-method
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    pub estimate: f64,
    pub std_error: f64,
}

/// `Σ_b w_b 1(T_b ⋈ t_obs) / Σ_b w_b`.
pub fn weighted_pvalue(values: &[f64], weights: &ImportanceWeights, observed: f64, comparison: Comparison) -> PValue {
    let w = weights.scaled();
    let total: f64 = w.iter().sum();
    let hit: f64 = values
        .iter()
        .zip(w)
        .filter(|(&v, _)| comparison.holds(v, observed))
        .fold(0.0, |acc, (_, &wb)| acc + wb);
    let p = (hit / total).clamp(0.0, 1.0);
    let var: f64 = values
        .iter()
        .zip(w)
        .map(|(&v, &wb)| {
            let ind = if comparison.holds(v, observed) { 1.0 } else { 0.0 };
            let r = wb * (ind - p);
            r * r
        })
        .sum::<f64>()
        / (total * total);
    PValue {
        estimate: p,
        std_error: var.sqrt(),
    }
}

/// Tail probability of `stat` at `observed` under the reweighted draws.
pub fn estimate_pvalue(
    observed: f64,
    draws: &[SampledDraw],
    stat: StatisticId,
    p_hat: Option<&LinkProbabilities>,
    comparison: Comparison,
) -> Result<PValue, TestError> {
    if draws.is_empty() {
        return Err(TestError::NoDraws);
    }
    let values = evaluate_draws(draws, stat, p_hat)?.0;
    Ok(weighted_pvalue(&values, &ImportanceWeights::from_draws(draws), observed, comparison))
}

/// Randomized critical value: reject when `T > c_alpha`, and with
/// probability `g_alpha` when `T = c_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub c_alpha: f64,
    pub g_alpha: f64,
}

/// Support points of the weighted distribution in ascending order with
/// their normalized masses.
pub fn weighted_support(values: &[f64], weights: &ImportanceWeights) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(weights.scaled().iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = weights.scaled().iter().sum();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, w) in pairs {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    for p in &mut out {
        p.1 /= total;
    }
    out
}

/// `c_alpha` is the smallest support point with
/// `P(T > c) <= alpha <= P(T >= c)`; `g_alpha = (alpha − P(T > c)) / P(T = c)`.
pub fn weighted_critical_value(values: &[f64], weights: &ImportanceWeights, alpha: f64) -> Result<CriticalValue, TestError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TestError::BadAlpha(alpha));
    }
    if values.is_empty() {
        return Err(TestError::NoDraws);
    }
    let support = weighted_support(values, weights);
    let mut above = 0.0;
    let mut best = None;
    for &(v, mass) in support.iter().rev() {
        let at_least = above + mass;
        if above <= alpha && alpha <= at_least {
            let g = if mass > 0.0 { ((alpha - above) / mass).clamp(0.0, 1.0) } else { 0.0 };
            best = Some(CriticalValue { c_alpha: v, g_alpha: g });
        }
        if above > alpha {
            break;
        }
        above = at_least;
    }
    // Rounding can leave the total mass a hair under alpha's bracket at
    // the bottom; fall back to the lowest point.
    Ok(best.unwrap_or_else(|| {
        let (v, mass) = support[0];
        let above = 1.0 - mass;
        CriticalValue {
            c_alpha: v,
            g_alpha: if mass > 0.0 { ((alpha - above) / mass).clamp(0.0, 1.0) } else { 0.0 },
        }
    }))
}

pub fn critical_value(
    draws: &[SampledDraw],
    stat: StatisticId,
    p_hat: Option<&LinkProbabilities>,
    alpha: f64,
) -> Result<CriticalValue, TestError> {
    let values = evaluate_draws(draws, stat, p_hat)?.0;
    weighted_critical_value(&values, &ImportanceWeights::from_draws(draws), alpha)
}

/// Weighted histogram of a reference distribution; masses sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

const CONTINUOUS_BINS: usize = 50;
const MAX_UNIT_BINS: usize = 200;

/// Integer-valued data with a modest range gets one bin per integer
/// (edges at half-integers); anything else gets equal-width bins over
/// `[min, max]`.
pub fn weighted_histogram(values: &[f64], weights: &ImportanceWeights) -> Histogram {
    if values.is_empty() {
        return Histogram {
            edges: Vec::new(),
            masses: Vec::new(),
        };
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let integral = values.iter().all(|v| v.fract() == 0.0);
    let edges: Vec<f64> = if integral && hi - lo < MAX_UNIT_BINS as f64 {
        let bins = (hi - lo) as usize + 1;
        (0..=bins).map(|k| lo - 0.5 + k as f64).collect()
    } else if hi == lo {
        vec![lo - 0.5, lo + 0.5]
    } else {
        let width = (hi - lo) / CONTINUOUS_BINS as f64;
        let mut e: Vec<f64> = (0..CONTINUOUS_BINS).map(|k| lo + k as f64 * width).collect();
        e.push(hi);
        e
    };
    let bins = edges.len() - 1;
    let mut masses = vec![0.0; bins];
    let w = weights.scaled();
    let total: f64 = w.iter().sum();
    for (&v, &wb) in values.iter().zip(w) {
        // Right-most bin is closed on the right.
        let k = edges[1..].partition_point(|&e| e <= v).min(bins - 1);
        masses[k] += wb / total;
    }
    Histogram { edges, masses }
}

/// Statistic values for each draw, in draw order, plus the number of draws
/// where the statistic was degenerate.
pub fn evaluate_draws(
    draws: &[SampledDraw],
    stat: StatisticId,
    p_hat: Option<&LinkProbabilities>,
) -> Result<(Vec<f64>, usize), TestError> {
    let evals: Vec<_> = draws
        .par_iter()
        .map(|d| stat.evaluate(&d.graph, p_hat))
        .collect::<Result<_, _>>()?;
    let degenerate = evals.iter().filter(|e| e.degenerate).count();
    Ok((evals.into_iter().map(|e| e.value).collect(), degenerate))
}

/// Output of [`run_test`]. Serializes to the report JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: StatisticId,
    pub observed: f64,
    #[serde(rename = "B")]
    pub draws: usize,
    pub seed: u64,
    pub alpha: f64,
    pub p_value_geq: f64,
    pub p_value_gt: f64,
    pub p_value_geq_se: f64,
    pub p_value_gt_se: f64,
    pub log_cardinality: f64,
    pub c_alpha: f64,
    pub g_alpha: f64,
    pub ess: f64,
    pub histogram: Histogram,
    pub degenerate_draw_count: usize,
}

impl TestReport {
    /// Class-size estimate; infinite when it overflows `f64`.
    pub fn cardinality_estimate(&self) -> f64 {
        self.log_cardinality.exp()
    }
}

/// The null reference distribution of one statistic for one observed graph.
#[derive(Debug, Clone)]
pub struct ReferenceDistribution {
    pub observed: f64,
    pub values: Vec<f64>,
    pub weights: ImportanceWeights,
    pub degenerate_draws: usize,
    pub draws: Vec<SampledDraw>,
}

/// Samples `draws` graphs with the degree sequence of `observed` and scores
/// them. For the optimal statistics the β-model is fitted once on the
/// observed graph and the same `p̂` is used for every draw.
pub fn reference_distribution(
    observed: &Graph,
    stat: StatisticId,
    draws: usize,
    seed: u64,
) -> Result<ReferenceDistribution, TestError> {
    let d = observed.degree_sequence();
    let p_hat = if stat.needs_link_probabilities() {
        Some(fit_mle(&d, MLE_TOLERANCE, MLE_MAX_ITER)?.a.link_probabilities())
    } else {
        None
    };
    let observed_value = stat.evaluate(observed, p_hat.as_ref())?.value;
    let sampled = sample_batch(&d, draws, seed)?;
    let (values, degenerate_draws) = evaluate_draws(&sampled, stat, p_hat.as_ref())?;
    Ok(ReferenceDistribution {
        observed: observed_value,
        values,
        weights: ImportanceWeights::from_draws(&sampled),
        degenerate_draws,
        draws: sampled,
    })
}

/// Runs the full conditional test of `stat` on `observed`.
///
/// ```
/// use netrand::graph::Graph;
/// use netrand::inference::run_test;
/// use netrand::stats::StatisticId;
///
/// // The triangle is the only graph with degrees (2,2,2).
/// let report = run_test(&Graph::complete(3), StatisticId::TriangleCount, 10, 0.05, 1).unwrap();
/// assert_eq!(report.p_value_geq, 1.0);
/// assert!(report.log_cardinality.abs() < 1e-12);
/// ```
pub fn run_test(observed: &Graph, stat: StatisticId, draws: usize, alpha: f64, seed: u64) -> Result<TestReport, TestError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(TestError::BadAlpha(alpha));
    }
    let reference = reference_distribution(observed, stat, draws, seed)?;
    Ok(report_from_reference(&reference, stat, alpha, seed))
}

pub fn report_from_reference(reference: &ReferenceDistribution, stat: StatisticId, alpha: f64, seed: u64) -> TestReport {
    let ReferenceDistribution {
        observed,
        values,
        weights,
        degenerate_draws,
        ..
    } = reference;
    let geq = weighted_pvalue(values, weights, *observed, Comparison::AtLeast);
    let gt = weighted_pvalue(values, weights, *observed, Comparison::Greater);
    let critical = weighted_critical_value(values, weights, alpha).expect("alpha and draws validated");
    TestReport {
        statistic: stat,
        observed: *observed,
        draws: values.len(),
        seed,
        alpha,
        p_value_geq: geq.estimate,
        p_value_gt: gt.estimate,
        p_value_geq_se: geq.std_error,
        p_value_gt_se: gt.std_error,
        log_cardinality: estimate_cardinality_from_weights(weights).log_value,
        c_alpha: critical.c_alpha,
        g_alpha: critical.g_alpha,
        ess: weights.effective_sample_size(),
        histogram: weighted_histogram(values, weights),
        degenerate_draw_count: *degenerate_draws,
    }
}

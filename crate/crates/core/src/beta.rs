//! The β-model: independent links with
//! `P(D_ij = 1) = exp(a_i + a_j) / (1 + exp(a_i + a_j))`, and a fixed-point
//! maximum likelihood fit of the node effects `a` from a degree sequence.

use serde::Serialize;
use thiserror::Error;

use crate::graph::DegreeSequence;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MleError {
    #[error("degree {degree} at node {node} exceeds n - 1 = {max}")]
    InvalidDegree { node: usize, degree: usize, max: usize },
    #[error("no convergence after {iterations} iterations (max degree residual {residual:.3e}); the MLE may not exist for this sequence")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Link probability under the β-model, stable for large `|a_i + a_j|`.
/// A `-∞` effect on either side gives 0.
#[inline]
pub fn link_prob(a_i: f64, a_j: f64) -> f64 {
    if a_i == f64::NEG_INFINITY || a_j == f64::NEG_INFINITY {
        return 0.0;
    }
    let s = a_i + a_j;
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// Node-level degree heterogeneity `Ã`. Entries are `-∞` for nodes that
/// never link and `+∞` for nodes linked to everyone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeterogeneityVector(Vec<f64>);

impl HeterogeneityVector {
    pub fn new(a: Vec<f64>) -> Self {
        HeterogeneityVector(a)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn link_probabilities(&self) -> LinkProbabilities {
        LinkProbabilities::from_fn(self.len(), |i, j| link_prob(self.0[i], self.0[j]))
    }

    /// `Σ_{j≠i} p_ij` for every node.
    pub fn expected_degrees(&self) -> Vec<f64> {
        expected_degrees(&self.0)
    }
}

fn expected_degrees(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let p = link_prob(a[i], a[j]);
            out[i] += p;
            out[j] += p;
        }
    }
    out
}

/// Symmetric table of pairwise link probabilities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkProbabilities {
    n: usize,
    p: Vec<f64>,
}

impl LinkProbabilities {
    /// Fills the table from `f(i, j)` for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                p[i * n + j] = v;
                p[j * n + i] = v;
            }
        }
        LinkProbabilities { n, p }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::from_fn(n, |_, _| value)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }
}

/// Result of [`fit_mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub a: HeterogeneityVector,
    pub iterations: usize,
    /// `max_i |Σ_j p̂_ij − d_i|` at the returned point.
    pub max_residual: f64,
}

/// Maximum likelihood estimate of `Ã` given a degree sequence.
///
/// Uses the fixed-point map `a_i ← ln d_i − ln Σ_{j≠i} 1 / (e^{−a_j} + e^{a_i})`,
/// started from half the logit of `d_i / (n − 1)`. Nodes with degree 0 are
/// pinned at `-∞` and nodes with degree `n − 1` at `+∞`; neither has a finite
/// estimate. Convergence means every expected degree is within `tol` of
/// the observed one. If the residual grows between iterations the update
/// is damped by one half from then on.
///
/// ```
/// use netrand::beta::fit_mle;
/// use netrand::graph::DegreeSequence;
///
/// // A 2-regular graph on 5 nodes: every p̂_ij is 2/4.
/// let fit = fit_mle(&DegreeSequence::new(vec![2; 5]), 1e-12, 1000).unwrap();
/// let p = fit.a.link_probabilities();
/// assert!((p.get(0, 3) - 0.5).abs() < 1e-12);
/// ```
pub fn fit_mle(d: &DegreeSequence, tol: f64, max_iter: usize) -> Result<MleFit, MleError> {
    let n = d.len();
    let max = n.saturating_sub(1);
    for (node, &degree) in d.iter().enumerate() {
        if degree > max {
            return Err(MleError::InvalidDegree { node, degree, max });
        }
    }
    let mut a: Vec<f64> = d
        .iter()
        .map(|&di| {
            if di == 0 {
                f64::NEG_INFINITY
            } else if di == max {
                f64::INFINITY
            } else {
                let q = di as f64 / max as f64;
                0.5 * (q / (1.0 - q)).ln()
            }
        })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| a[i].is_finite()).collect();
    let log_d: Vec<f64> = d.iter().map(|&x| (x as f64).ln()).collect();

    let residual_of = |a: &[f64]| -> f64 {
        expected_degrees(a)
            .iter()
            .zip(d.iter())
            .map(|(e, &di)| (e - di as f64).abs())
            .fold(0.0, f64::max)
    };

    let mut residual = residual_of(&a);
    let mut step = 1.0;
    let mut next = a.clone();
    for iteration in 0..max_iter {
        if residual < tol {
            return Ok(MleFit {
                a: HeterogeneityVector(a),
                iterations: iteration,
                max_residual: residual,
            });
        }
        for &i in &free {
            let ea = a[i].exp();
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 1.0 / ((-a[j]).exp() + ea))
                .sum();
            let target = log_d[i] - denom.ln();
            next[i] = a[i] + step * (target - a[i]);
        }
        let r = residual_of(&next);
        if r > residual && step == 1.0 {
            step = 0.5;
        }
        std::mem::swap(&mut a, &mut next);
        residual = r;
    }
    if residual < tol {
        return Ok(MleFit {
            a: HeterogeneityVector(a),
            iterations: max_iter,
            max_residual: residual,
        });
    }
    Err(MleError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

//! Sequential importance sampler for graphs with a prescribed degree
//! sequence.
//!
//! Each draw repeatedly takes the node with the smallest positive residual
//! degree (lowest index on ties) and links it, one partner at a time, until
//! its residual reaches zero. Partners are drawn from the admissible set
//! (see [`candidate_partners`](crate::graphicality::candidate_partners))
//! with probability proportional to their residual degree, so the
//! construction never gets stuck.
//!
//! Draws are not uniform over the class. Every draw records `ln σ(Y)`, the
//! log probability of the link sequence it produced, and `ln c(Y)`, the log
//! number of link sequences the sampler could have used to reach the same
//! graph. The importance weight `1 / (c(Y) σ(Y))` corrects for the
//! non-uniformity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DegreeSequence, Graph};
use crate::graphicality::{graphical_violation, PartnerCheck, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("degree sequence {sequence} is not graphical: {violation}")]
    NotGraphical {
        sequence: DegreeSequence,
        violation: Violation,
    },
    #[error("no admissible partner for node {node}; this is a sampler bug")]
    DeadEnd { node: usize },
    #[error("batch size must be at least 1")]
    EmptyBatch,
}

/// Identifies one reproducible random stream: the same `(seed, stream)`
/// always yields the same draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// One graph from the sampler together with its importance bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledDraw {
    pub graph: Graph,
    /// `ln σ(Y)`, the log probability of the emitted link sequence.
    pub log_sigma: f64,
    /// `ln c(Y)`, the log number of link orders that give the same graph.
    pub log_c: f64,
    /// Links in the order they were added; the first entry is the node
    /// being filled.
    pub link_sequence: Vec<(usize, usize)>,
}

impl SampledDraw {
    /// `ln(1 / (c(Y) σ(Y)))`.
    #[inline]
    pub fn log_weight(&self) -> f64 {
        -self.log_c - self.log_sigma
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|x| (x as f64).ln()).sum()
}

/// Draws one graph with degree sequence exactly `d`.
///
/// ```
/// use netrand::graph::DegreeSequence;
/// use netrand::sampler::{sample, RngStream};
///
/// let draw = sample(&DegreeSequence::new(vec![2, 2, 2]), RngStream::new(1, 1)).unwrap();
/// assert_eq!(draw.graph.edge_count(), 3);
/// // sigma = 1/2 and c = 2, so the importance weight is exactly 1.
/// assert!(draw.log_weight().abs() < 1e-12);
/// ```
pub fn sample(d: &DegreeSequence, stream: RngStream) -> Result<SampledDraw, SampleError> {
    if let Some(violation) = graphical_violation(d) {
        return Err(SampleError::NotGraphical {
            sequence: d.clone(),
            violation,
        });
    }
    let mut rng = stream.rng();
    let n = d.len();
    let mut residual = d.to_vec();
    let mut graph = Graph::empty(n);
    let mut log_sigma = 0.0;
    let mut log_c = 0.0;
    let mut links = Vec::with_capacity(d.total() / 2);
    let mut candidates: Vec<usize> = Vec::with_capacity(n);

    while let Some(i) = (0..n).filter(|&k| residual[k] > 0).min_by_key(|&k| (residual[k], k)) {
        log_c += ln_factorial(residual[i]);
        while residual[i] > 0 {
            candidates.clear();
            let mut total = 0usize;
            {
                let mut check = PartnerCheck::new(&residual, &graph, i);
                for j in 0..n {
                    if check.admissible(j) {
                        candidates.push(j);
                        total += residual[j];
                    }
                }
            }
            if candidates.is_empty() {
                return Err(SampleError::DeadEnd { node: i });
            }
            let mut ticket = rng.gen_range(0..total);
            let mut chosen = candidates[candidates.len() - 1];
            for &j in &candidates {
                if ticket < residual[j] {
                    chosen = j;
                    break;
                }
                ticket -= residual[j];
            }
            log_sigma += (residual[chosen] as f64).ln() - (total as f64).ln();
            graph.insert(i, chosen);
            residual[i] -= 1;
            residual[chosen] -= 1;
            links.push((i, chosen));
        }
    }
    Ok(SampledDraw {
        graph,
        log_sigma,
        log_c,
        link_sequence: links,
    })
}

/// `count` independent draws; draw `b` (1-based) uses stream `b`. The
/// result does not depend on how rayon schedules the work.
pub fn sample_batch(d: &DegreeSequence, count: usize, seed: u64) -> Result<Vec<SampledDraw>, SampleError> {
    if count == 0 {
        return Err(SampleError::EmptyBatch);
    }
    if let Some(violation) = graphical_violation(d) {
        return Err(SampleError::NotGraphical {
            sequence: d.clone(),
            violation,
        });
    }
    (1..=count as u64)
        .into_par_iter()
        .map(|b| sample(d, RngStream::new(seed, b)))
        .collect()
}

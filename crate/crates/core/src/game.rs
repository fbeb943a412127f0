//! A transferable-utility network formation game with a degree or
//! transitivity externality, and its pairwise stable networks.
//!
//! The pair `(i, j)` is linked when the joint surplus
//! `Ã_i + Ã_j + γ s̃_ij(D) − Ũ_ij` is non-negative. For `γ ≥ 0` the map
//! taking a network to the set of pairs with non-negative surplus is
//! monotone, so iterating it from the empty network (or the complete one)
//! climbs (or descends) to the least (or greatest) pairwise stable network.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::HeterogeneityVector;
use crate::graph::Graph;
use crate::sampler::RngStream;
use crate::stats::{transitivity_index, triangle_count, ExternalityKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("gamma must be finite and non-negative, got {0}")]
    NegativeGamma(f64),
    #[error("heterogeneity vector has {a} entries but the shock matrix is {u} x {u}")]
    SizeMismatch { a: usize, u: usize },
    #[error("no fixed point after {0} iterations")]
    IterationCap(usize),
    #[error("invalid heterogeneity distribution: mean {mean}, sd {sd}")]
    BadHeterogeneity { mean: f64, sd: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMode {
    Least,
    Greatest,
}

impl FixedPointMode {
    pub fn name(self) -> &'static str {
        match self {
            FixedPointMode::Least => "least",
            FixedPointMode::Greatest => "greatest",
        }
    }
}

/// Symmetric pair shocks `Ũ_ij`. The diagonal is never read.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockMatrix {
    n: usize,
    u: Vec<f64>,
}

impl ShockMatrix {
    /// Fills the matrix from `f(i, j)` for `i < j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut u = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                u[i * n + j] = v;
                u[j * n + i] = v;
            }
        }
        ShockMatrix { n, u }
    }

    /// Independent standard logistic draws, by inverse CDF.
    pub fn logistic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::from_fn(n, |_, _| {
            let p: f64 = rng.gen_range(f64::EPSILON..1.0);
            (p / (1.0 - p)).ln()
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub a_tilde: HeterogeneityVector,
    pub gamma: f64,
    pub kind: ExternalityKind,
    pub shocks: ShockMatrix,
    pub mode: FixedPointMode,
}

impl GameConfig {
    pub fn new(
        a_tilde: HeterogeneityVector,
        gamma: f64,
        kind: ExternalityKind,
        shocks: ShockMatrix,
        mode: FixedPointMode,
    ) -> Result<Self, GameError> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(GameError::NegativeGamma(gamma));
        }
        if a_tilde.len() != shocks.node_count() {
            return Err(GameError::SizeMismatch {
                a: a_tilde.len(),
                u: shocks.node_count(),
            });
        }
        Ok(GameConfig {
            a_tilde,
            gamma,
            kind,
            shocks,
            mode,
        })
    }

    pub fn node_count(&self) -> usize {
        self.a_tilde.len()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self, GameError> {
        Self::new(self.a_tilde.clone(), gamma, self.kind, self.shocks.clone(), self.mode)
    }

    pub fn with_mode(&self, mode: FixedPointMode) -> Self {
        GameConfig { mode, ..self.clone() }
    }
}

/// Externality term seen by the pair `(i, j)`, not counting the link
/// between them, so it is the same whether or not that link exists.
#[inline]
pub fn externality(g: &Graph, kind: ExternalityKind, i: usize, j: usize) -> f64 {
    match kind {
        ExternalityKind::Popularity => {
            let own = if g.has_edge(i, j) { 2 } else { 0 };
            (g.degree(i) + g.degree(j) - own) as f64
        }
        ExternalityKind::Transitivity => 2.0 * g.common_neighbors(i, j) as f64,
    }
}

/// Joint surplus `MU_ij + MU_ji = Ã_i + Ã_j + γ s̃_ij(D) − Ũ_ij`.
pub fn marginal_utility(cfg: &GameConfig, g: &Graph, i: usize, j: usize) -> f64 {
    assert_ne!(i, j, "marginal utility is defined for distinct nodes");
    let a = cfg.a_tilde.as_slice();
    let ext = if cfg.gamma == 0.0 {
        0.0
    } else {
        cfg.gamma * externality(g, cfg.kind, i, j)
    };
    a[i] + a[j] + ext - cfg.shocks.get(i, j)
}

/// The network of every pair with non-negative surplus at `g`.
pub fn phi_map(cfg: &GameConfig, g: &Graph) -> Graph {
    let n = cfg.node_count();
    let mut out = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if marginal_utility(cfg, g, i, j) >= 0.0 {
                out.insert(i, j);
            }
        }
    }
    out
}

/// Iterates [`phi_map`] from the empty network (`Least`) or the complete
/// network (`Greatest`) until it stops changing.
///
/// ```
/// use netrand::beta::HeterogeneityVector;
/// use netrand::game::{find_pairwise_stable, is_pairwise_stable, FixedPointMode, GameConfig, ShockMatrix};
/// use netrand::stats::ExternalityKind;
///
/// let shocks = ShockMatrix::from_fn(4, |i, j| (i + j) as f64 - 2.5);
/// let a = HeterogeneityVector::new(vec![0.0; 4]);
/// let cfg = GameConfig::new(a, 0.4, ExternalityKind::Transitivity, shocks, FixedPointMode::Least).unwrap();
/// let g = find_pairwise_stable(&cfg).unwrap();
/// assert!(is_pairwise_stable(&cfg, &g));
/// ```
pub fn find_pairwise_stable(cfg: &GameConfig) -> Result<Graph, GameError> {
    let n = cfg.node_count();
    let mut current = match cfg.mode {
        FixedPointMode::Least => Graph::empty(n),
        FixedPointMode::Greatest => Graph::complete(n),
    };
    let cap = n * n.saturating_sub(1) / 2 + 2;
    for _ in 0..cap {
        let next = phi_map(cfg, &current);
        if next == current {
            return Ok(current);
        }
        let monotone = match cfg.mode {
            FixedPointMode::Least => current.is_subgraph_of(&next),
            FixedPointMode::Greatest => next.is_subgraph_of(&current),
        };
        assert!(monotone, "fixed-point iteration moved against its direction");
        current = next;
    }
    Err(GameError::IterationCap(cap))
}

/// Present links have non-negative surplus and absent links negative
/// surplus.
pub fn is_pairwise_stable(cfg: &GameConfig, g: &Graph) -> bool {
    let n = cfg.node_count();
    if g.node_count() != n {
        return false;
    }
    (0..n).all(|i| ((i + 1)..n).all(|j| (marginal_utility(cfg, g, i, j) >= 0.0) == g.has_edge(i, j)))
}

/// Settings for a simulation sweep over a grid of externality strengths.
/// Each replication draws `Ã_i ~ N(a_mean, a_sd²)` and logistic shocks
/// once and reuses them across the whole grid and both modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub gamma_grid: Vec<f64>,
    pub kind: ExternalityKind,
    pub replications: usize,
    pub seed: u64,
    pub a_mean: f64,
    pub a_sd: f64,
}

/// One line of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub replication: usize,
    pub mode: FixedPointMode,
    pub edge_count: usize,
    pub triangle_count: u64,
    pub transitivity_index: f64,
}

/// Draws the primitives of replication `r`.
pub fn draw_instance(cfg: &SweepConfig, replication: usize) -> Result<(HeterogeneityVector, ShockMatrix), GameError> {
    let normal = Normal::new(cfg.a_mean, cfg.a_sd).map_err(|_| GameError::BadHeterogeneity {
        mean: cfg.a_mean,
        sd: cfg.a_sd,
    })?;
    let mut rng = RngStream::new(cfg.seed, replication as u64).rng();
    let a: Vec<f64> = (0..cfg.n).map(|_| normal.sample(&mut rng)).collect();
    let shocks = ShockMatrix::logistic(cfg.n, &mut rng);
    Ok((HeterogeneityVector::new(a), shocks))
}

/// Runs every replication (in parallel) and returns rows ordered by
/// replication, then gamma, then mode.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, GameError> {
    if let Some(&bad) = cfg.gamma_grid.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
        return Err(GameError::NegativeGamma(bad));
    }
    let per_rep: Vec<Vec<SweepRow>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let (a, shocks) = draw_instance(cfg, r)?;
            let mut rows = Vec::with_capacity(cfg.gamma_grid.len() * 2);
            for &gamma in &cfg.gamma_grid {
                for mode in [FixedPointMode::Least, FixedPointMode::Greatest] {
                    let game = GameConfig::new(a.clone(), gamma, cfg.kind, shocks.clone(), mode)?;
                    let g = find_pairwise_stable(&game)?;
                    rows.push(SweepRow {
                        gamma,
                        replication: r,
                        mode,
                        edge_count: g.edge_count(),
                        triangle_count: triangle_count(&g),
                        transitivity_index: transitivity_index(&g).value,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, GameError>>()?;
    Ok(per_rep.into_iter().flatten().collect())
}

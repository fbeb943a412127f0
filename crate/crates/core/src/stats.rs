//! Graph statistics used as test statistics: triad counts, transitivity,
//! density, path lengths, externality terms and the model-assisted
//! "optimal" statistics.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::beta::LinkProbabilities;
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatError {
    #[error("density needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("link probability table covers {table} nodes but the graph has {graph}")]
    DimensionMismatch { table: usize, graph: usize },
    #[error("statistic {0} needs fitted link probabilities")]
    MissingProbabilities(StatisticId),
    #[error("unknown statistic {given:?}; valid names: {}", StatisticId::names().join(", "))]
    UnknownStatistic { given: String },
}

/// Which externality the term `s̃_ij` measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExternalityKind {
    /// Partners' degrees.
    Popularity,
    /// Shared neighbours.
    Transitivity,
}

impl FromStr for ExternalityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "popularity" => Ok(ExternalityKind::Popularity),
            "transitivity" => Ok(ExternalityKind::Transitivity),
            other => Err(format!("unknown externality kind {other:?}; expected popularity or transitivity")),
        }
    }
}

impl fmt::Display for ExternalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExternalityKind::Popularity => "popularity",
            ExternalityKind::Transitivity => "transitivity",
        })
    }
}

pub fn triangle_count(g: &Graph) -> u64 {
    let closed: u64 = g.edges().map(|(i, j)| g.common_neighbors(i, j) as u64).sum();
    closed / 3
}

/// Triads with exactly two edges. Each has one missing pair whose ends
/// share the centre, so this counts common neighbours over non-adjacent
/// pairs.
pub fn two_star_count(g: &Graph) -> u64 {
    let n = g.node_count();
    let mut total = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                total += g.common_neighbors(i, j) as u64;
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitivityIndex {
    pub value: f64,
    /// No triad has two or more edges; `value` is set to 0.
    pub degenerate: bool,
}

/// Share of two-paths that are closed: `3T / (3T + S)` for `T` triangles
/// and `S` two-stars.
pub fn transitivity_index(g: &Graph) -> TransitivityIndex {
    transitivity_from_counts(triangle_count(g), two_star_count(g))
}

fn transitivity_from_counts(triangles: u64, two_stars: u64) -> TransitivityIndex {
    let denom = 3 * triangles + two_stars;
    if denom == 0 {
        TransitivityIndex {
            value: 0.0,
            degenerate: true,
        }
    } else {
        TransitivityIndex {
            value: (3 * triangles) as f64 / denom as f64,
            degenerate: false,
        }
    }
}

pub fn density(g: &Graph) -> Result<f64, StatError> {
    let n = g.node_count();
    if n < 2 {
        return Err(StatError::TooFewNodes(n));
    }
    Ok(g.edge_count() as f64 / (n * (n - 1) / 2) as f64)
}

/// Shortest-path summary over ordered pairs of distinct nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    /// Longest finite distance; `None` when no two nodes are connected.
    pub diameter: Option<u32>,
    /// Mean over connected ordered pairs; `None` when there are none.
    pub mean_distance: Option<f64>,
    pub unreachable_pairs: u64,
}

pub fn distances(g: &Graph) -> Distances {
    let n = g.node_count();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut diameter = 0u32;
    let mut sum = 0u64;
    let mut reached = 0u64;
    for s in 0..n {
        dist.fill(u32::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    diameter = diameter.max(dist[v]);
                    sum += dist[v] as u64;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
    }
    let ordered = (n as u64) * (n as u64).saturating_sub(1);
    Distances {
        diameter: (reached > 0).then_some(diameter),
        mean_distance: (reached > 0).then(|| sum as f64 / reached as f64),
        unreachable_pairs: ordered - reached,
    }
}

/// The dyad-level externality term `s̃_ij = s_ij + s_ji` on `g`:
/// `d_i + d_j` for popularity, twice the number of shared neighbours for
/// transitivity.
pub fn s_tilde(g: &Graph, kind: ExternalityKind, i: usize, j: usize) -> f64 {
    match kind {
        ExternalityKind::Popularity => (g.degree(i) + g.degree(j)) as f64,
        ExternalityKind::Transitivity => 2.0 * g.common_neighbors(i, j) as f64,
    }
}

fn check_dims(g: &Graph, p: &LinkProbabilities) -> Result<(), StatError> {
    if p.node_count() != g.node_count() {
        return Err(StatError::DimensionMismatch {
            table: p.node_count(),
            graph: g.node_count(),
        });
    }
    Ok(())
}

/// `Σ_{i<j} (D_ij − p̂_ij) s̃_ij(D)`: large when links that the fitted
/// null finds unlikely coincide with large externality terms.
pub fn optimal_stat(g: &Graph, p_hat: &LinkProbabilities, kind: ExternalityKind) -> Result<f64, StatError> {
    check_dims(g, p_hat)?;
    let n = g.node_count();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let s = s_tilde(g, kind, i, j);
            if s != 0.0 {
                let link = if g.has_edge(i, j) { 1.0 } else { 0.0 };
                total += (link - p_hat.get(i, j)) * s;
            }
        }
    }
    Ok(total)
}

/// The transitivity version of [`optimal_stat`] written over triads:
/// six times the triangle count minus a null-model expected count,
/// `6 [Σ D_ij D_ik D_jk − ⅓ Σ (p̂_ij D_ik D_jk + D_ij p̂_ik D_jk + D_ij D_ik p̂_jk)]`.
/// Kept as a separate route so the two forms can be checked against each other.
pub fn optimal_transitivity_by_triads(g: &Graph, p_hat: &LinkProbabilities) -> Result<f64, StatError> {
    check_dims(g, p_hat)?;
    let n = g.node_count();
    let link = |a: usize, b: usize| if g.has_edge(a, b) { 1.0 } else { 0.0 };
    let mut closed = 0.0;
    let mut expected = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = link(i, j);
            for k in (j + 1)..n {
                let (dik, djk) = (link(i, k), link(j, k));
                closed += dij * dik * djk;
                expected += p_hat.get(i, j) * dik * djk + dij * p_hat.get(i, k) * djk + dij * dik * p_hat.get(j, k);
            }
        }
    }
    Ok(6.0 * (closed - expected / 3.0))
}

/// The statistics a test can be run on. Names are the CLI and JSON names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticId {
    TriangleCount,
    TwoStarCount,
    TransitivityIndex,
    Density,
    Diameter,
    MeanDistance,
    OptimalTransitivity,
    OptimalPopularity,
}

/// A statistic value; `degenerate` marks graphs where the statistic is
/// undefined and was set to 0 (no two-paths, no connected pairs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub degenerate: bool,
}

impl Evaluation {
    fn plain(value: f64) -> Self {
        Evaluation {
            value,
            degenerate: false,
        }
    }
}

impl StatisticId {
    pub const ALL: [StatisticId; 8] = [
        StatisticId::TriangleCount,
        StatisticId::TwoStarCount,
        StatisticId::TransitivityIndex,
        StatisticId::Density,
        StatisticId::Diameter,
        StatisticId::MeanDistance,
        StatisticId::OptimalTransitivity,
        StatisticId::OptimalPopularity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatisticId::TriangleCount => "triangle_count",
            StatisticId::TwoStarCount => "two_star_count",
            StatisticId::TransitivityIndex => "transitivity_index",
            StatisticId::Density => "density",
            StatisticId::Diameter => "diameter",
            StatisticId::MeanDistance => "mean_distance",
            StatisticId::OptimalTransitivity => "optimal_transitivity",
            StatisticId::OptimalPopularity => "optimal_popularity",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|s| s.name()).collect()
    }

    /// Whether evaluation needs fitted β-model link probabilities.
    pub fn needs_link_probabilities(self) -> bool {
        matches!(self, StatisticId::OptimalTransitivity | StatisticId::OptimalPopularity)
    }

    pub fn evaluate(self, g: &Graph, p_hat: Option<&LinkProbabilities>) -> Result<Evaluation, StatError> {
        let optimal = |kind| {
            let p = p_hat.ok_or(StatError::MissingProbabilities(self))?;
            optimal_stat(g, p, kind).map(Evaluation::plain)
        };
        Ok(match self {
            StatisticId::TriangleCount => Evaluation::plain(triangle_count(g) as f64),
            StatisticId::TwoStarCount => Evaluation::plain(two_star_count(g) as f64),
            StatisticId::TransitivityIndex => {
                let t = transitivity_index(g);
                Evaluation {
                    value: t.value,
                    degenerate: t.degenerate,
                }
            }
            StatisticId::Density => Evaluation::plain(density(g)?),
            StatisticId::Diameter => {
                let d = distances(g);
                Evaluation {
                    value: d.diameter.unwrap_or(0) as f64,
                    degenerate: d.diameter.is_none(),
                }
            }
            StatisticId::MeanDistance => {
                let d = distances(g);
                Evaluation {
                    value: d.mean_distance.unwrap_or(0.0),
                    degenerate: d.mean_distance.is_none(),
                }
            }
            StatisticId::OptimalTransitivity => optimal(ExternalityKind::Transitivity)?,
            StatisticId::OptimalPopularity => optimal(ExternalityKind::Popularity)?,
        })
    }
}

impl fmt::Display for StatisticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticId {
    type Err = StatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| StatError::UnknownStatistic { given: s.to_string() })
    }
}

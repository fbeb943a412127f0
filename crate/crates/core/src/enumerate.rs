//! Exhaustive enumeration of every labeled simple graph with a given degree
//! sequence, for small node counts. This is the ground truth the sampler
//! and the Monte Carlo estimators are checked against.

use num_rational::Ratio;
use thiserror::Error;

use crate::graph::{DegreeSequence, Graph};
use crate::inference::Comparison;

pub const DEFAULT_NODE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerationError {
    #[error("enumeration is limited to {cap} nodes, got {n}")]
    TooLarge { n: usize, cap: usize },
    #[error("no graph has degree sequence {0}")]
    EmptyClass(DegreeSequence),
}

/// All graphs with degree sequence `d`, each once, sorted by edge list.
/// Empty when `d` is not graphical.
///
/// ```
/// use netrand::enumerate::{enumerate_graphs, DEFAULT_NODE_CAP};
/// use netrand::graph::DegreeSequence;
///
/// let class = enumerate_graphs(&DegreeSequence::new(vec![2, 2, 1, 1]), DEFAULT_NODE_CAP).unwrap();
/// assert_eq!(class.len(), 2);
/// ```
pub fn enumerate_graphs(d: &DegreeSequence, cap: usize) -> Result<Vec<Graph>, EnumerationError> {
    let n = d.len();
    if n > cap {
        return Err(EnumerationError::TooLarge { n, cap });
    }
    let mut search = Search {
        n,
        residual: d.to_vec(),
        graph: Graph::empty(n),
        out: Vec::new(),
    };
    if d.iter().all(|&x| x < n.max(1)) && d.total().is_multiple_of(2) {
        search.node(0);
    }
    let mut out = search.out;
    out.sort();
    Ok(out)
}

struct Search {
    n: usize,
    residual: Vec<usize>,
    graph: Graph,
    out: Vec<Graph>,
}

impl Search {
    fn node(&mut self, i: usize) {
        if i + 1 >= self.n {
            if self.residual.iter().all(|&r| r == 0) {
                self.out.push(self.graph.clone());
            }
            return;
        }
        self.pair(i, i + 1);
    }

    // Decide pair (i, j), then move on. Node i's row is complete once j
    // passes n - 1, so its residual must be zero by then.
    fn pair(&mut self, i: usize, j: usize) {
        if j == self.n {
            if self.residual[i] == 0 {
                self.node(i + 1);
            }
            return;
        }
        if self.residual[i] > self.n - j {
            return;
        }
        if self.residual[i] > 0 && self.residual[j] > 0 {
            self.residual[i] -= 1;
            self.residual[j] -= 1;
            self.graph.insert(i, j);
            self.pair(i, j + 1);
            self.graph.remove(i, j);
            self.residual[i] += 1;
            self.residual[j] += 1;
        }
        self.pair(i, j + 1);
    }
}

/// `|{G : stat(G) ⋈ observed}| / |class|` over the whole class.
pub fn exact_pvalue<F>(
    d: &DegreeSequence,
    stat: F,
    observed: f64,
    comparison: Comparison,
) -> Result<Ratio<u64>, EnumerationError>
where
    F: Fn(&Graph) -> f64,
{
    let class = enumerate_graphs(d, DEFAULT_NODE_CAP)?;
    if class.is_empty() {
        return Err(EnumerationError::EmptyClass(d.clone()));
    }
    let hits = class
        .iter()
        .filter(|g| comparison.holds(stat(g), observed))
        .count();
    Ok(Ratio::new(hits as u64, class.len() as u64))
}

/// Exact null distribution of `stat` over the class: ascending support
/// points with their probabilities.
pub fn exact_distribution<F>(d: &DegreeSequence, stat: F) -> Result<Vec<(f64, Ratio<u64>)>, EnumerationError>
where
    F: Fn(&Graph) -> f64,
{
    let class = enumerate_graphs(d, DEFAULT_NODE_CAP)?;
    if class.is_empty() {
        return Err(EnumerationError::EmptyClass(d.clone()));
    }
    let mut values: Vec<f64> = class.iter().map(stat).collect();
    values.sort_by(f64::total_cmp);
    let total = values.len() as u64;
    let mut out: Vec<(f64, Ratio<u64>)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((last, mass)) if *last == v => *mass += Ratio::new(1, total),
            _ => out.push((v, Ratio::new(1, total))),
        }
    }
    Ok(out)
}

/// Randomized critical value `(c, g)` from an exact distribution, in
/// rational arithmetic: `c` is the smallest support point with
/// `P(T > c) <= alpha <= P(T >= c)` and `g = (alpha - P(T > c)) / P(T = c)`.
pub fn exact_critical_value(dist: &[(f64, Ratio<u64>)], alpha: Ratio<u64>) -> (f64, Ratio<u64>) {
    let mut above = Ratio::from_integer(0u64);
    // Walk from the top; the last point satisfying the bracket going down
    // is the smallest one.
    let mut best = None;
    for &(v, mass) in dist.iter().rev() {
        let at_least = above + mass;
        if above <= alpha && alpha <= at_least {
            best = Some((v, (alpha - above) / mass));
        }
        if above > alpha {
            break;
        }
        above = at_least;
    }
    best.expect("alpha in (0,1) is always bracketed")
}

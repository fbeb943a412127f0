//! Graphicality of integer sequences.
//!
//! [`is_graphical`] runs the Erdős–Gallai inequalities. [`havel_hakimi`] is a
//! second, independent decider based on repeated Havel–Hakimi reduction and
//! exists mostly so the two can be checked against each other.
//!
//! [`candidate_partners`] answers the question the sequential sampler asks
//! at every step: which partners `j` can node `i` take next so that the
//! remaining stubs can still be wired up as a simple graph?

use std::fmt;
use std::ops::Deref;

use thiserror::Error;

use crate::graph::Graph;

/// Why a sequence fails to be graphical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    OddSum,
    /// The Erdős–Gallai inequality fails at `k` (1-based, on the sequence
    /// sorted in non-increasing order).
    ErdosGallai { k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OddSum => write!(f, "degree sum is odd"),
            Violation::ErdosGallai { k } => write!(f, "Erdős–Gallai inequality fails at k={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DegreeError {
    #[error("cannot decrement node {node}: residual degree is zero")]
    Underflow { node: usize },
    #[error("nodes must be distinct and in range, got ({0}, {1})")]
    BadPair(usize, usize),
    #[error("node {0} has no remaining stubs")]
    NoStubs(usize),
    #[error("no admissible partner for node {0} although the residual is graphical")]
    NoCandidates(usize),
    #[error("residual sequence has {residual} entries but the graph has {graph} nodes")]
    SizeMismatch { residual: usize, graph: usize },
}

/// Finds the first violated condition, or `None` for a graphical sequence.
pub fn graphical_violation(d: &[usize]) -> Option<Violation> {
    if d.iter().sum::<usize>() % 2 == 1 {
        return Some(Violation::OddSum);
    }
    let mut sorted = d.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let m = sorted.len();
    let mut lhs = 0usize;
    for k in 1..=m {
        lhs += sorted[k - 1];
        let tail: usize = sorted[k..].iter().map(|&x| x.min(k)).sum();
        if lhs > k * (k - 1) + tail {
            return Some(Violation::ErdosGallai { k });
        }
    }
    None
}

pub fn is_graphical(d: &[usize]) -> bool {
    graphical_violation(d).is_none()
}

/// Havel–Hakimi reduction at node `i`: drop entry `i` and subtract one from
/// the `d[i]` largest remaining entries. `None` when fewer than `d[i]` other
/// entries are positive, in which case `d` is not graphical.
///
/// Ties among the largest entries are broken by position; the result as a
/// multiset does not depend on it.
pub fn havel_hakimi_reduce(d: &[usize], i: usize) -> Option<Vec<usize>> {
    let need = d[i];
    let mut others: Vec<usize> = (0..d.len()).filter(|&k| k != i).collect();
    if others.iter().filter(|&&k| d[k] > 0).count() < need {
        return None;
    }
    others.sort_by(|&a, &b| d[b].cmp(&d[a]).then(a.cmp(&b)));
    let mut out = d.to_vec();
    for &k in &others[..need] {
        out[k] -= 1;
    }
    out.remove(i);
    Some(out)
}

/// Graphicality by repeated Havel–Hakimi reduction at the largest entry.
pub fn havel_hakimi(d: &[usize]) -> bool {
    let mut cur = d.to_vec();
    loop {
        let Some((i, &top)) = cur.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        else {
            return true;
        };
        if top == 0 {
            return true;
        }
        match havel_hakimi_reduce(&cur, i) {
            Some(next) => cur = next,
            None => return false,
        }
    }
}

/// Remaining stubs per node while a graph is being built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidualSequence(Vec<usize>);

impl ResidualSequence {
    pub fn new(degrees: Vec<usize>) -> Self {
        ResidualSequence(degrees)
    }

    pub fn is_graphical(&self) -> bool {
        is_graphical(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Subtracts one stub from `i` and from `j`.
    pub fn decrement(&self, i: usize, j: usize) -> Result<ResidualSequence, DegreeError> {
        if i == j || i >= self.0.len() || j >= self.0.len() {
            return Err(DegreeError::BadPair(i, j));
        }
        for node in [i, j] {
            if self.0[node] == 0 {
                return Err(DegreeError::Underflow { node });
            }
        }
        let mut out = self.0.clone();
        out[i] -= 1;
        out[j] -= 1;
        Ok(ResidualSequence(out))
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for ResidualSequence {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for ResidualSequence {
    fn from(v: Vec<usize>) -> Self {
        ResidualSequence(v)
    }
}

/// Nodes `j` that `i` may link to next, in ascending order.
///
/// `j` qualifies when it is not already adjacent to `i` in `g` and the
/// residual `d` with one stub removed from `i` and `j` can still be
/// realized without `i` re-linking to any of its current neighbours or to
/// `j`. Edges of `g` that do not touch `i` are assumed to join nodes with no
/// stubs left, which is always the case inside the sequential sampler.
///
/// ```
/// use netrand::graph::Graph;
/// use netrand::graphicality::{candidate_partners, ResidualSequence};
///
/// // Linking node 2 to node 3 would leave (2,2,0,0), which is not graphical.
/// let d = ResidualSequence::new(vec![2, 2, 1, 1]);
/// let partners = candidate_partners(&d, &Graph::empty(4), 2).unwrap();
/// assert_eq!(partners, vec![0, 1]);
/// ```
pub fn candidate_partners(d: &ResidualSequence, g: &Graph, i: usize) -> Result<Vec<usize>, DegreeError> {
    if d.len() != g.node_count() {
        return Err(DegreeError::SizeMismatch {
            residual: d.len(),
            graph: g.node_count(),
        });
    }
    if i >= d.len() {
        return Err(DegreeError::BadPair(i, i));
    }
    if d[i] == 0 {
        return Err(DegreeError::NoStubs(i));
    }
    let mut check = PartnerCheck::new(d, g, i);
    let out: Vec<usize> = (0..d.len()).filter(|&j| check.admissible(j)).collect();
    if out.is_empty() && d.is_graphical() {
        return Err(DegreeError::NoCandidates(i));
    }
    Ok(out)
}

/// Per-step admissibility test for partners of one node.
///
/// Nodes other than `i` are interchangeable apart from their residual
/// degree and whether they are already adjacent to `i`, so the answer for
/// a free partner depends only on its residual degree and is cached by it.
pub(crate) struct PartnerCheck<'a> {
    d: &'a [usize],
    g: &'a Graph,
    i: usize,
    // Histograms over residual degree of nodes other than i: those i may
    // still link to and those it may not (adjacent, or no stubs).
    free: Vec<usize>,
    blocked: Vec<usize>,
    cache: Vec<Option<bool>>,
    scratch: Scratch,
}

#[derive(Default)]
struct Scratch {
    hist: Vec<usize>,
    cnt_below: Vec<usize>,
    sum_below: Vec<usize>,
}

impl<'a> PartnerCheck<'a> {
    pub(crate) fn new(d: &'a [usize], g: &'a Graph, i: usize) -> Self {
        let top = d.iter().copied().max().unwrap_or(0);
        let mut free = vec![0; top + 1];
        let mut blocked = vec![0; top + 1];
        for (k, &dk) in d.iter().enumerate() {
            if k == i {
                continue;
            }
            if dk > 0 && !g.has_edge(i, k) {
                free[dk] += 1;
            } else {
                blocked[dk] += 1;
            }
        }
        PartnerCheck {
            d,
            g,
            i,
            free,
            blocked,
            cache: vec![None; top + 1],
            scratch: Scratch::default(),
        }
    }

    pub(crate) fn admissible(&mut self, j: usize) -> bool {
        let dj = self.d[j];
        if j == self.i || dj == 0 || self.g.has_edge(self.i, j) {
            return false;
        }
        if let Some(ans) = self.cache[dj] {
            return ans;
        }
        let ans = self.evaluate(dj);
        self.cache[dj] = Some(ans);
        ans
    }

    // Link i to a free node of residual degree v, then ask whether i's
    // remaining stubs can go to the highest free nodes and the rest of the
    // sequence is still graphical. Wiring i to the largest allowed
    // residuals loses nothing (standard Havel–Hakimi switching argument,
    // which never touches the forbidden pairs at i).
    fn evaluate(&mut self, v: usize) -> bool {
        let need = self.d[self.i] - 1;
        let top = self.free.len() - 1;
        let Scratch { hist, cnt_below, sum_below } = &mut self.scratch;
        hist.clear();
        hist.extend(self.free.iter().zip(&self.blocked).map(|(a, b)| a + b));
        let mut free = self.free.clone();
        free[v] -= 1;
        hist[v] -= 1;
        hist[v - 1] += 1;

        let mut remaining = need;
        for val in (1..=top).rev() {
            if remaining == 0 {
                break;
            }
            let take = free[val].min(remaining);
            hist[val] -= take;
            hist[val - 1] += take;
            remaining -= take;
        }
        if remaining > 0 {
            return false;
        }
        erdos_gallai_histogram(hist, cnt_below, sum_below)
    }
}

/// Erdős–Gallai on a degree histogram (`hist[v]` nodes of degree `v`).
/// Only the last index of each block of equal values needs checking.
fn erdos_gallai_histogram(hist: &[usize], cnt_below: &mut Vec<usize>, sum_below: &mut Vec<usize>) -> bool {
    let len = hist.len();
    cnt_below.clear();
    sum_below.clear();
    cnt_below.push(0);
    sum_below.push(0);
    for (v, &c) in hist.iter().enumerate() {
        cnt_below.push(cnt_below[v] + c);
        sum_below.push(sum_below[v] + v * c);
    }
    if sum_below[len] % 2 == 1 {
        return false;
    }
    let mut k = 0usize;
    let mut lhs = 0usize;
    for v in (1..len).rev() {
        let c = hist[v];
        if c == 0 {
            continue;
        }
        k += c;
        lhs += v * c;
        let t = v.min(k);
        let tail = sum_below[t] + k * (cnt_below[v] - cnt_below[t]);
        if lhs > k * (k - 1) + tail {
            return false;
        }
    }
    true
}

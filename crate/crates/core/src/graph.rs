//! Simple undirected graphs on nodes `0..n`, degree sequences, and the
//! plain-text edge-list format.
//!
//! A [`Graph`] keeps one adjacency bitset row per node, so edge lookups,
//! degrees and common-neighbour counts are cheap even when thousands of
//! sampled graphs are scored. Graphs are values: [`Graph::with_edge`] and
//! [`Graph::without_edge`] return new graphs and leave the receiver alone.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node {node} out of range for a graph on {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge ({0}, {1}) already present")]
    EdgeExists(usize, usize),
    #[error("edge ({0}, {1}) not present")]
    EdgeMissing(usize, usize),
}

/// Simple undirected graph with nodes `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    degrees: Vec<usize>,
    edge_count: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(WORD);
        Graph {
            n,
            words,
            bits: vec![0; n * words],
            degrees: vec![0; n],
            edge_count: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.insert(i, j);
            }
        }
        g
    }

    /// Builds a graph from node pairs. Repeated pairs (in either
    /// orientation) collapse to one edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (i, j) in edges {
            g.check_pair(i, j)?;
            if !g.has_edge(i, j) {
                g.insert(i, j);
            }
        }
        Ok(g)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), GraphError> {
        for node in [i, j] {
            if node >= self.n {
                return Err(GraphError::NodeOutOfRange { node, n: self.n });
            }
        }
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        Ok(())
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && (self.bits[i * self.words + j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence(self.degrees.clone())
    }

    /// Neighbours of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * WORD + bit)
            })
        })
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// Number of nodes adjacent to both `i` and `j`.
    #[inline]
    pub fn common_neighbors(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n == other.n && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn with_edge(&self, i: usize, j: usize) -> Result<Graph, GraphError> {
        self.check_pair(i, j)?;
        if self.has_edge(i, j) {
            return Err(GraphError::EdgeExists(i.min(j), i.max(j)));
        }
        let mut g = self.clone();
        g.insert(i, j);
        Ok(g)
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Result<Graph, GraphError> {
        self.check_pair(i, j)?;
        if !self.has_edge(i, j) {
            return Err(GraphError::EdgeMissing(i.min(j), i.max(j)));
        }
        let mut g = self.clone();
        g.remove(i, j);
        Ok(g)
    }

    // In-place toggles for builders inside the crate. Callers guarantee
    // i != j and the current state of the pair.
    #[inline]
    pub(crate) fn insert(&mut self, i: usize, j: usize) {
        debug_assert!(i != j && !self.has_edge(i, j));
        self.bits[i * self.words + j / WORD] |= 1 << (j % WORD);
        self.bits[j * self.words + i / WORD] |= 1 << (i % WORD);
        self.degrees[i] += 1;
        self.degrees[j] += 1;
        self.edge_count += 1;
    }

    #[inline]
    pub(crate) fn remove(&mut self, i: usize, j: usize) {
        debug_assert!(self.has_edge(i, j));
        self.bits[i * self.words + j / WORD] &= !(1 << (j % WORD));
        self.bits[j * self.words + i / WORD] &= !(1 << (i % WORD));
        self.degrees[i] -= 1;
        self.degrees[j] -= 1;
        self.edge_count -= 1;
    }

    /// Serializes to the edge-list format: a `# nodes N` header followed by
    /// sorted `i j` lines. [`parse_edge_list`] reads it back exactly,
    /// isolated nodes included.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes {}\n", self.n);
        for (i, j) in self.edges() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl PartialOrd for Graph {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders graphs by node count, then by their sorted edge lists.
impl Ord for Graph {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.edges().cmp(other.edges()))
    }
}

/// Per-node degree counts; the statistic the conditional test holds fixed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeSequence(Vec<usize>);

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Self {
        DegreeSequence(degrees)
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for DegreeSequence {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for DegreeSequence {
    fn from(v: Vec<usize>) -> Self {
        DegreeSequence(v)
    }
}

impl fmt::Display for DegreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parses `3,3,2,2` (commas and/or whitespace).
impl FromStr for DegreeSequence {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<usize>, _>>()
            .map(DegreeSequence)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: self-loop on label {label:?}")]
    SelfLoop { line: usize, label: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// A parsed edge list: the graph, the original label of each node, and
/// how many repeated edges were collapsed.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub graph: Graph,
    pub labels: Vec<String>,
    pub duplicate_edges: usize,
}

/// Parses the edge-list text format.
///
/// One edge per line as two whitespace-separated labels; lines starting
/// with `#` are comments and blank lines are skipped. Labels become dense
/// indices in order of first appearance. A `# nodes N` comment fixes the
/// node count instead; labels must then be integers in `0..N` and are used
/// as indices directly, which keeps isolated nodes.
///
/// ```
/// use netrand::graph::parse_edge_list;
///
/// let parsed = parse_edge_list("a b\nb c\na c\n").unwrap();
/// assert_eq!(parsed.graph.node_count(), 3);
/// assert_eq!(parsed.graph.edge_count(), 3);
/// assert_eq!(parsed.labels, ["a", "b", "c"]);
/// ```
pub fn parse_edge_list(text: &str) -> Result<EdgeList, ParseError> {
    let mut fixed_n: Option<usize> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("nodes") {
                if !pairs.is_empty() || fixed_n.is_some() {
                    return Err(ParseError::Malformed {
                        line,
                        reason: "node-count header must precede all edges".into(),
                    });
                }
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .filter(|_| words.next().is_none())
                    .ok_or_else(|| ParseError::Malformed {
                        line,
                        reason: format!("bad node-count header {trimmed:?}"),
                    })?;
                fixed_n = Some(n);
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(ParseError::Malformed {
                line,
                reason: format!("expected two labels, found {}", tokens.len()),
            });
        }
        if tokens[0] == tokens[1] {
            return Err(ParseError::SelfLoop {
                line,
                label: tokens[0].to_string(),
            });
        }
        let mut ends = [0usize; 2];
        for (slot, tok) in ends.iter_mut().zip(&tokens) {
            *slot = match fixed_n {
                Some(n) => match tok.parse::<usize>() {
                    Ok(v) if v < n => v,
                    _ => {
                        return Err(ParseError::Malformed {
                            line,
                            reason: format!("label {tok:?} is not an integer in 0..{n}"),
                        })
                    }
                },
                None => *index.entry(tok.to_string()).or_insert_with(|| {
                    labels.push(tok.to_string());
                    labels.len() - 1
                }),
            };
        }
        // "01" and "1" are distinct strings but the same index under a header.
        if ends[0] == ends[1] {
            return Err(ParseError::SelfLoop {
                line,
                label: tokens[0].to_string(),
            });
        }
        pairs.push((line, ends[0], ends[1]));
    }

    let n = match fixed_n {
        Some(n) => {
            labels = (0..n).map(|i| i.to_string()).collect();
            n
        }
        None => labels.len(),
    };
    let mut graph = Graph::empty(n);
    let mut duplicate_edges = 0;
    for (_, i, j) in pairs {
        if graph.has_edge(i, j) {
            duplicate_edges += 1;
        } else {
            graph.insert(i, j);
        }
    }
    Ok(EdgeList {
        graph,
        labels,
        duplicate_edges,
    })
}

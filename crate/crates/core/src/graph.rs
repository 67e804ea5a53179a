//! Weighted contact digraphs.
//!
//! Entry `a_ij` of the adjacency matrix is the contact strength from node `j`
//! to node `i`, i.e. how strongly infection at `j` drives infection at `i`.
//! The edge-list text format follows the same convention: the line `i j w`
//! sets `a_ij = w`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Matrix,
}

impl Graph {
    /// Wraps a nonnegative adjacency matrix. Strong connectivity is not
    /// required here; analyses that need it call [`Graph::ensure_strongly_connected`].
    pub fn new(adjacency: Matrix) -> Result<Self> {
        if adjacency.dim() == 0 {
            return Err(Error::EmptyInput);
        }
        if let Some(bad) = adjacency.entries().iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidMatrix(format!(
                "entries must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { adjacency })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Parses the edge-list text format.
    ///
    /// Each non-comment line is `i j w` with 1-based indices and a positive
    /// weight. An optional `n <count>` line fixes the node count; otherwise it
    /// is the largest index seen. Lines starting with `#` are ignored.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut declared_n: Option<usize> = None;
        let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let malformed = |reason: &str| Error::MalformedLine {
                line: line_no,
                reason: reason.to_string(),
            };
            match fields.as_slice() {
                ["n", count] => {
                    if declared_n.is_some() {
                        return Err(malformed("node count declared twice"));
                    }
                    let count: usize = count
                        .parse()
                        .map_err(|_| malformed("node count is not a positive integer"))?;
                    if count == 0 {
                        return Err(malformed("node count must be positive"));
                    }
                    declared_n = Some(count);
                }
                [i, j, w] => {
                    let i: usize = i.parse().map_err(|_| malformed("bad row index"))?;
                    let j: usize = j.parse().map_err(|_| malformed("bad column index"))?;
                    let w: f64 = w.parse().map_err(|_| malformed("bad weight"))?;
                    if !w.is_finite() || w <= 0.0 {
                        return Err(Error::NonPositiveWeight {
                            line: line_no,
                            weight: w,
                        });
                    }
                    edges.push((line_no, i, j, w));
                }
                _ => return Err(malformed("expected `i j w` or `n <count>`")),
            }
        }

        let n = match declared_n {
            Some(n) => n,
            None => {
                let max = edges.iter().map(|&(_, i, j, _)| i.max(j)).max();
                match max {
                    Some(m) if m > 0 => m,
                    Some(_) => {
                        let (line, ..) = edges[0];
                        return Err(Error::IndexOutOfRange { line, index: 0, n: 0 });
                    }
                    None => return Err(Error::EmptyInput),
                }
            }
        };

        let mut a = Matrix::zeros(n);
        for (line, i, j, w) in edges {
            for index in [i, j] {
                if index == 0 || index > n {
                    return Err(Error::IndexOutOfRange { line, index, n });
                }
            }
            if a.get(i - 1, j - 1) != 0.0 {
                return Err(Error::DuplicateEdge { line, i, j });
            }
            a.set(i - 1, j - 1, w);
        }
        Self::new(a)
    }

    /// Serializes to the edge-list format accepted by [`Graph::from_edge_list`].
    /// Weights use the shortest round-trip decimal form, so parsing the output
    /// reproduces the adjacency matrix exactly.
    pub fn to_edge_list(&self) -> String {
        let n = self.n();
        let mut out = format!("n {n}\n");
        for i in 0..n {
            for j in 0..n {
                let w = self.adjacency.get(i, j);
                if w > 0.0 {
                    let _ = writeln!(out, "{} {} {}", i + 1, j + 1, w);
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.adjacency.dim()
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adjacency
    }

    /// Degree vector `d = A 1`, the row sums of the adjacency matrix.
    pub fn degree_vector(&self) -> Vec<f64> {
        self.adjacency.row_sums()
    }

    /// Same graph with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
        }
        Ok(Self {
            adjacency: self.adjacency.scaled(c),
        })
    }

    pub fn is_strongly_connected(&self) -> bool {
        is_irreducible(&self.adjacency)
    }

    pub fn ensure_strongly_connected(&self) -> Result<()> {
        if self.is_strongly_connected() {
            Ok(())
        } else {
            Err(Error::ReducibleMatrix)
        }
    }

    pub(crate) fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n(),
                got: v.len(),
            })
        }
    }
}

/// True iff the digraph of positive entries is strongly connected. A 1×1
/// matrix counts as irreducible only with a positive self-loop.
pub fn is_irreducible(m: &Matrix) -> bool {
    let n = m.dim();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return m.get(0, 0) > 0.0;
    }
    // a_ij > 0 is an edge j -> i. Node 0 must reach everyone and be reached
    // by everyone.
    let forward = reachable_from_first(n, |u, v| m.get(v, u) > 0.0);
    forward && reachable_from_first(n, |u, v| m.get(u, v) > 0.0)
}

fn reachable_from_first(n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !seen[v] && edge(u, v) {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Strongly connected components of the digraph with an edge `j -> i`
/// whenever `m_ij > 0`. Returns the component index of every node.
pub(crate) fn strongly_connected_components(m: &Matrix) -> Vec<usize> {
    let n = m.dim();
    // Kosaraju: finish order on the forward graph, then sweep the reverse
    // graph in reverse finish order.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((u, next)) = stack.last_mut() {
            let u = *u;
            match (*next..n).find(|&v| !seen[v] && m.get(v, u) > 0.0) {
                Some(v) => {
                    *next = v + 1;
                    seen[v] = true;
                    stack.push((v, 0));
                }
                None => {
                    order.push(u);
                    stack.pop();
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        comp[root] = count;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if comp[v] == usize::MAX && m.get(u, v) > 0.0 {
                    comp[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    comp
}

/// Nodes reachable from `sources` along edges `j -> i` with `m_ij > 0`,
/// sources included.
pub(crate) fn reachable_set(m: &Matrix, sources: &[usize]) -> Vec<bool> {
    let n = m.dim();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = sources.iter().copied().collect();
    for &s in sources {
        seen[s] = true;
    }
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !seen[v] && m.get(v, u) > 0.0 {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

//! Maximum clique via the Motzkin-Straus program.
//!
//! For an adjacency matrix `A`, `max p^T A p` over the simplex equals
//! `1 - 1/omega(G)`. The growth map climbs `p^T A p` monotonically, so a
//! handful of random restarts usually lands on a maximum clique.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{FitnessModel, PayoffMatrix};
use crate::par::{map_range, Execution};
use crate::simplex::{derive_seed, sample_uniform};

use super::discrete::iterate_to_fixed_point;

pub const DEFAULT_LAMBDA: f64 = 0.5;
const MAX_ITERS: usize = 5_000;
const ITER_TOL: f64 = 1e-13;
/// Largest graph the exact oracle accepts.
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Simple undirected graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl GraphSpec {
    /// Builds a graph, storing each edge as `(min, max)`. Duplicate edges
    /// collapse; self-loops and out-of-range endpoints are errors.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("a graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Dimension(format!("edge ({u}, {v}) has an endpoint outside [0, {n})")));
            }
            if u == v {
                return Err(Error::Constraint(format!("self-loop at node {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(GraphSpec { n, edges: set })
    }

    pub fn complete(n: usize) -> Result<Self> {
        GraphSpec::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        GraphSpec::new(n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        GraphSpec::new(n, (1..n).map(|u| (u - 1, u)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes.iter().enumerate().all(|(k, &u)| nodes[k + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for &(u, v) in &self.edges {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
        a
    }

    fn neighbor_masks(&self) -> Vec<u32> {
        let mut masks = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            masks[u] |= 1 << v;
            masks[v] |= 1 << u;
        }
        masks
    }
}

/// Parses an edge list: one `u v` pair per line, 0-indexed, or DIMACS
/// `e u v` lines, which are 1-indexed. Blank lines and lines starting with
/// `#`, `%` or `c` are skipped. A `p n m` or
/// `p edge n m` header fixes the node count; otherwise it is one more than
/// the largest endpoint.
pub fn parse_edge_list(text: &str) -> Result<GraphSpec> {
    let mut header_n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty()
            || line.starts_with('#')
            || line.starts_with('%')
            || line == "c"
            || line.starts_with("c ")
        {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let parse = |tok: &str| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("expected a node index, found {tok:?}"),
            })
        };
        if tokens[0] == "p" {
            if header_n.is_some() {
                return Err(Error::Parse { line: line_no, message: "duplicate header".into() });
            }
            let rest: &[&str] = if tokens.get(1).is_some_and(|t| t.parse::<usize>().is_err()) {
                &tokens[2..]
            } else {
                &tokens[1..]
            };
            if rest.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header `p n m`, found {line:?}"),
                });
            }
            header_n = Some(parse(rest[0])?);
            parse(rest[1])?;
            continue;
        }
        let dimacs = tokens[0] == "e";
        let pair: &[&str] = if dimacs { &tokens[1..] } else { &tokens[..] };
        if pair.len() != 2 {
            return Err(Error::Parse { line: line_no, message: format!("expected `u v`, found {line:?}") });
        }
        let (mut u, mut v) = (parse(pair[0])?, parse(pair[1])?);
        if dimacs {
            if u == 0 || v == 0 {
                return Err(Error::Parse { line: line_no, message: "DIMACS nodes start at 1".into() });
            }
            (u, v) = (u - 1, v - 1);
        }
        if u == v {
            return Err(Error::Parse { line: line_no, message: format!("self-loop at node {u}") });
        }
        if let Some(n) = header_n {
            if u >= n || v >= n {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("edge ({u}, {v}) outside the declared {n} nodes"),
                });
            }
        }
        edges.push((u, v));
    }
    let n = match header_n {
        Some(n) => n,
        None => edges
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .ok_or(Error::Parse { line: 0, message: "no header and no edges".into() })?,
    };
    GraphSpec::new(n, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueReport {
    pub omega_estimate: usize,
    pub best_value: f64,
    /// Sorted node set; always a clique.
    pub clique: Vec<usize>,
    pub restarts: usize,
}

/// Shrinks `nodes` to a clique by repeatedly dropping the member with the
/// fewest neighbours inside the set (lowest weight, then highest index, on ties).
fn prune_to_clique(g: &GraphSpec, mut nodes: Vec<usize>, weight: &[f64]) -> Vec<usize> {
    while !g.is_clique(&nodes) {
        let degree = |u: usize| nodes.iter().filter(|&&v| v != u && g.has_edge(u, v)).count();
        let (pos, _) = nodes
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| {
                degree(a).cmp(&degree(b)).then(weight[a].total_cmp(&weight[b])).then(b.cmp(&a))
            })
            .expect("a non-clique set is non-empty");
        nodes.remove(pos);
    }
    nodes
}

fn clique_value(k: usize) -> f64 {
    1.0 - 1.0 / k as f64
}

/// One restart: climb from a uniform random start, read off the support,
/// prune it to a clique and keep the better of the iterate's value and the
/// clique barycenter's value `1 - 1/k`.
fn single_start(g: &GraphSpec, model: &FitnessModel, lambda: f64, seed: u64) -> Result<(f64, Vec<usize>)> {
    let n = g.n();
    let p0 = sample_uniform(n, seed)?.into_vec();
    let (p, value) = iterate_to_fixed_point(model, lambda, p0, MAX_ITERS, ITER_TOL)?;
    let threshold = 1.0 / (2.0 * n as f64);
    let support: Vec<usize> = (0..n).filter(|&i| p[i] > threshold).collect();
    let clique = prune_to_clique(g, support, &p);
    Ok((value.max(clique_value(clique.len())), clique))
}

/// Multi-start Motzkin-Straus search.
///
/// Restart `k` starts from a uniform point seeded with `derive_seed(seed, k)`,
/// so results do not depend on `exec`. The best restart wins by value (to
/// within 1e-12), then by larger clique, then by lexicographically smallest
/// node set.
pub fn motzkin_straus_clique(
    g: &GraphSpec,
    restarts: usize,
    lambda: f64,
    seed: u64,
    exec: Execution,
) -> Result<CliqueReport> {
    if restarts == 0 {
        return Err(Error::Parameter("restarts must be >= 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be > 0, got {lambda}")));
    }
    let n = g.n();
    if n == 1 {
        return Ok(CliqueReport { omega_estimate: 1, best_value: 0.0, clique: vec![0], restarts });
    }
    let model = FitnessModel::linear(PayoffMatrix::from_rows(&g.adjacency())?)?;
    let runs = map_range(exec, restarts, |k| single_start(g, &model, lambda, derive_seed(seed, k as u64)));
    let mut best: Option<(f64, Vec<usize>)> = None;
    for run in runs {
        let (value, clique) = run?;
        let better = match &best {
            None => true,
            Some((bv, bc)) => {
                if (value - bv).abs() > 1e-12 {
                    value > *bv
                } else if clique.len() != bc.len() {
                    clique.len() > bc.len()
                } else {
                    clique < *bc
                }
            }
        };
        if better {
            best = Some((value, clique));
        }
    }
    let (best_value, clique) = best.expect("restarts >= 1");
    let omega = (1.0 / (1.0 - best_value)).round();
    let omega_estimate = if omega.is_finite() { (omega as usize).clamp(1, n) } else { n };
    Ok(CliqueReport { omega_estimate, best_value, clique, restarts })
}

/// Exact clique number by branch-and-bound over bitmasks.
pub fn brute_force_clique_number(g: &GraphSpec) -> Result<usize> {
    if g.n() > BRUTE_FORCE_MAX_N {
        return Err(Error::Size(g.n()));
    }
    let masks = g.neighbor_masks();
    fn expand(masks: &[u32], size: usize, candidates: u32, best: &mut usize) {
        if candidates == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + candidates.count_ones() as usize <= *best {
            return;
        }
        let mut rest = candidates;
        while rest != 0 {
            if size + rest.count_ones() as usize <= *best {
                return;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            expand(masks, size + 1, rest & masks[v], best);
        }
    }
    let mut best = 0;
    expand(&masks, 0, (1u32 << g.n()) - 1, &mut best);
    Ok(best)
}

//! Exhaustive ground truth for small instances.
//!
//! Nothing here touches the algebraic machinery: matchings and f-factors are
//! found by plain search, determinants by Gaussian elimination.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeModulus};
use crate::graph::{DominatingMatchingInstance, FFactorInstance, Graph, Matching};

/// Size limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_vertices: usize,
    pub max_edges: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_vertices: 12,
            max_edges: 24,
        }
    }
}

impl EnumerationBudget {
    /// Budget for memoized matching searches on Tutte gadgets.
    pub fn gadget() -> Self {
        EnumerationBudget {
            max_vertices: 128,
            max_edges: usize::MAX,
        }
    }

    fn check_vertices(&self, n: usize) -> Result<()> {
        if n > self.max_vertices {
            return Err(Error::OverBudget(format!("{n} vertices > {}", self.max_vertices)));
        }
        Ok(())
    }

    fn check_edges(&self, m: usize) -> Result<()> {
        if m > self.max_edges {
            return Err(Error::OverBudget(format!("{m} edges > {}", self.max_edges)));
        }
        Ok(())
    }
}

/// Every perfect matching of `g`, each once, sorted.
///
/// Branches on the lowest unmatched vertex.
pub fn enumerate_perfect_matchings(g: &Graph, budget: EnumerationBudget) -> Result<Vec<Matching>> {
    budget.check_vertices(g.vertex_count())?;
    budget.check_edges(g.edge_count())?;
    let adj = g.adjacency();
    let mut out = Vec::new();
    if g.vertex_count().is_multiple_of(2) {
        let mut matched = vec![false; g.vertex_count()];
        let mut current = Vec::new();
        enumerate_from(&adj, &mut matched, &mut current, &mut out);
    }
    out.sort();
    Ok(out)
}

fn enumerate_from(
    adj: &[Vec<(usize, usize)>],
    matched: &mut [bool],
    current: &mut Vec<usize>,
    out: &mut Vec<Matching>,
) {
    let Some(v) = matched.iter().position(|&m| !m) else {
        out.push(Matching::new(current.clone()));
        return;
    };
    matched[v] = true;
    for &(u, e) in &adj[v] {
        if matched[u] {
            continue;
        }
        matched[u] = true;
        current.push(e);
        enumerate_from(adj, matched, current, out);
        current.pop();
        matched[u] = false;
    }
    matched[v] = false;
}

/// Whether some perfect matching meets every threshold.
///
/// Depth-first search on the lowest unmatched vertex, memoizing failed
/// `(matched set, outstanding thresholds)` states. Only the vertex budget
/// applies (at most 128 vertices).
pub fn oracle_dominating_matching(inst: &DominatingMatchingInstance, budget: EnumerationBudget) -> Result<bool> {
    let n = inst.graph.vertex_count();
    budget.check_vertices(n)?;
    if n > 128 {
        return Err(Error::OverBudget(format!("{n} vertices > 128")));
    }
    if !n.is_multiple_of(2) {
        return Ok(false);
    }
    let mut search = MatchingSearch {
        adj: inst.graph.adjacency(),
        class_of: (0..inst.graph.edge_count()).map(|e| inst.classes.class_of(e)).collect(),
        full: if n == 128 { u128::MAX } else { (1u128 << n) - 1 },
        failed: HashSet::new(),
    };
    let mut need = inst.thresholds.clone();
    Ok(search.run(0, &mut need))
}

struct MatchingSearch {
    adj: Vec<Vec<(usize, usize)>>,
    class_of: Vec<Option<usize>>,
    full: u128,
    failed: HashSet<(u128, Vec<usize>)>,
}

impl MatchingSearch {
    fn run(&mut self, mask: u128, need: &mut Vec<usize>) -> bool {
        if mask == self.full {
            return need.iter().all(|&x| x == 0);
        }
        let remaining_edges = (self.full.count_ones() - mask.count_ones()) as usize / 2;
        if need.iter().sum::<usize>() > remaining_edges {
            return false;
        }
        let key = (mask, need.clone());
        if self.failed.contains(&key) {
            return false;
        }
        let v = (!mask).trailing_zeros() as usize;
        for i in 0..self.adj[v].len() {
            let (u, e) = self.adj[v][i];
            if mask & (1u128 << u) != 0 {
                continue;
            }
            let class = self.class_of[e];
            let lowered = class.filter(|&c| need[c] > 0);
            if let Some(c) = lowered {
                need[c] -= 1;
            }
            let found = self.run(mask | (1u128 << v) | (1u128 << u), need);
            if let Some(c) = lowered {
                need[c] += 1;
            }
            if found {
                return true;
            }
        }
        self.failed.insert(key);
        false
    }
}

/// Whether some set of non-blue host edges has exactly the prescribed degrees
/// and meets every threshold. Depth-first over the allowed edges with degree
/// pruning; the edge budget bounds the `2^|E|` search space.
pub fn oracle_f_factor(inst: &FFactorInstance, budget: EnumerationBudget) -> Result<bool> {
    let n = inst.host.vertex_count();
    budget.check_vertices(n)?;
    let allowed = inst.allowed_edges();
    budget.check_edges(allowed.len())?;
    if inst.degrees.iter().sum::<usize>() % 2 != 0 {
        return Ok(false);
    }
    let edges: Vec<(usize, usize, Option<usize>)> = allowed
        .iter()
        .map(|&e| {
            let (u, v) = inst.host.edge(e);
            (u, v, inst.classes.class_of(e))
        })
        .collect();
    // suffix[t][v]: allowed edges at v with index >= t; same per class.
    let k = inst.classes.class_count();
    let mut suffix = vec![vec![0usize; n]; edges.len() + 1];
    let mut class_suffix = vec![vec![0usize; k]; edges.len() + 1];
    for t in (0..edges.len()).rev() {
        suffix[t] = suffix[t + 1].clone();
        class_suffix[t] = class_suffix[t + 1].clone();
        let (u, v, c) = edges[t];
        suffix[t][u] += 1;
        suffix[t][v] += 1;
        if let Some(c) = c {
            class_suffix[t][c] += 1;
        }
    }
    let search = FactorSearch {
        edges,
        suffix,
        class_suffix,
    };
    let mut rem = inst.degrees.clone();
    let mut need = inst.thresholds.clone();
    Ok(search.run(0, &mut rem, &mut need))
}

struct FactorSearch {
    edges: Vec<(usize, usize, Option<usize>)>,
    suffix: Vec<Vec<usize>>,
    class_suffix: Vec<Vec<usize>>,
}

impl FactorSearch {
    fn run(&self, t: usize, rem: &mut [usize], need: &mut [usize]) -> bool {
        if rem.iter().zip(&self.suffix[t]).any(|(r, s)| r > s) {
            return false;
        }
        if need.iter().zip(&self.class_suffix[t]).any(|(r, s)| r > s) {
            return false;
        }
        if t == self.edges.len() {
            return rem.iter().all(|&r| r == 0) && need.iter().all(|&x| x == 0);
        }
        let (u, v, c) = self.edges[t];
        if rem[u] > 0 && rem[v] > 0 {
            rem[u] -= 1;
            rem[v] -= 1;
            let lowered = c.filter(|&c| need[c] > 0);
            if let Some(c) = lowered {
                need[c] -= 1;
            }
            let found = self.run(t + 1, rem, need);
            rem[u] += 1;
            rem[v] += 1;
            if let Some(c) = lowered {
                need[c] += 1;
            }
            if found {
                return true;
            }
        }
        self.run(t + 1, rem, need)
    }
}

/// Determinant of a square matrix of residues by Gaussian elimination.
pub fn determinant(rows: &[Vec<u64>], p: PrimeModulus) -> FieldElement {
    let n = rows.len();
    let mut a: Vec<Vec<FieldElement>> = rows.iter().map(|r| r.iter().map(|&x| p.element(x)).collect()).collect();
    let mut det = p.one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return p.zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        let inv = a[col][col].inverse().expect("nonzero pivot");
        for r in col + 1..n {
            let factor = a[r][col] * inv;
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let sub = factor * a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

/// One representative of every isomorphism class of graphs on `n <= 10`
/// vertices, generated edge by edge with canonical forms.
pub fn nonisomorphic_graphs(n: usize) -> Vec<Graph> {
    assert!(n <= 10, "canonical codes use one bit per vertex pair");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut all = BTreeSet::new();
    let mut level = BTreeSet::from([0u64]);
    while !level.is_empty() {
        let mut next = BTreeSet::new();
        for &code in &level {
            for bit in 0..pairs.len() {
                if code & (1 << bit) == 0 {
                    let adj = adjacency_of(n, &pairs, code | (1 << bit));
                    next.insert(canonical_code(n, &pairs, &adj));
                }
            }
        }
        all.extend(level);
        level = next;
    }
    all.into_iter()
        .map(|code| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(bit, _)| code & (1 << bit) != 0)
                .map(|(_, &e)| e);
            Graph::new(n, edges).expect("simple")
        })
        .collect()
}

fn adjacency_of(n: usize, pairs: &[(usize, usize)], code: u64) -> Vec<u16> {
    let mut adj = vec![0u16; n];
    for (bit, &(u, v)) in pairs.iter().enumerate() {
        if code & (1 << bit) != 0 {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
    }
    adj
}

// Iterated degree refinement gives an isomorphism-invariant ordered partition;
// the canonical code is the smallest code over labelings that respect it.
fn canonical_code(n: usize, pairs: &[(usize, usize)], adj: &[u16]) -> u64 {
    let mut color: Vec<usize> = adj.iter().map(|a| a.count_ones() as usize).collect();
    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = (0..n).filter(|&u| adj[v] & (1 << u) != 0).map(|u| color[u]).collect();
                nb.sort_unstable();
                (color[v], nb)
            })
            .collect();
        let distinct: BTreeSet<_> = signatures.iter().cloned().collect();
        let ranked: Vec<_> = distinct.into_iter().collect();
        let refined: Vec<usize> = signatures
            .iter()
            .map(|s| ranked.binary_search(s).expect("present"))
            .collect();
        let classes_before = color.iter().collect::<BTreeSet<_>>().len();
        color = refined;
        if color.iter().collect::<BTreeSet<_>>().len() == classes_before {
            break;
        }
    }
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for c in 0..n {
        let cell: Vec<usize> = (0..n).filter(|&v| color[v] == c).collect();
        if !cell.is_empty() {
            cells.push(cell);
        }
    }
    let mut best = u64::MAX;
    let mut order = Vec::with_capacity(n);
    visit_labelings(&cells, 0, &mut vec![false; n], &mut order, &mut |order| {
        // order[new] = old
        let mut code = 0u64;
        for (bit, &(a, b)) in pairs.iter().enumerate() {
            if adj[order[a]] & (1 << order[b]) != 0 {
                code |= 1 << bit;
            }
        }
        best = best.min(code);
    });
    best
}

fn visit_labelings(
    cells: &[Vec<usize>],
    cell: usize,
    used: &mut Vec<bool>,
    order: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if cell == cells.len() {
        f(order);
        return;
    }
    let placed_in_cell = order.len() - cells[..cell].iter().map(Vec::len).sum::<usize>();
    if placed_in_cell == cells[cell].len() {
        visit_labelings(cells, cell + 1, used, order, f);
        return;
    }
    for &v in &cells[cell] {
        if !used[v] {
            used[v] = true;
            order.push(v);
            visit_labelings(cells, cell, used, order, f);
            order.pop();
            used[v] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeClassAssignment;

    fn c4_red_green(thresholds: Vec<usize>) -> DominatingMatchingInstance {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let red = vec![g.edge_index(0, 1).unwrap(), g.edge_index(2, 3).unwrap()];
        let green = vec![g.edge_index(1, 2).unwrap(), g.edge_index(0, 3).unwrap()];
        let classes = EdgeClassAssignment::from_class_lists(4, &[red, green]).unwrap();
        DominatingMatchingInstance::new(g, classes, thresholds).unwrap()
    }

    fn plain(host: Graph, degrees: Vec<usize>) -> FFactorInstance {
        let n = host.vertex_count();
        let classes = EdgeClassAssignment::unclassified(host.edge_count());
        FFactorInstance::new(host, degrees, classes, vec![], Graph::empty(n)).unwrap()
    }

    #[test]
    fn matching_counts() {
        let b = EnumerationBudget::default();
        assert_eq!(enumerate_perfect_matchings(&Graph::complete(4), b).unwrap().len(), 3);
        assert_eq!(
            enumerate_perfect_matchings(&c4_red_green(vec![0, 0]).graph, b)
                .unwrap()
                .len(),
            2
        );
        assert!(enumerate_perfect_matchings(&Graph::complete(5), b).unwrap().is_empty());
        assert_eq!(enumerate_perfect_matchings(&Graph::empty(0), b).unwrap().len(), 1);
    }

    #[test]
    fn complete_graph_double_factorial() {
        let b = EnumerationBudget {
            max_vertices: 10,
            max_edges: 45,
        };
        let mut expected = 1;
        for n in 1..=5usize {
            expected *= 2 * n - 1;
            assert_eq!(
                enumerate_perfect_matchings(&Graph::complete(2 * n), b).unwrap().len(),
                expected
            );
        }
    }

    #[test]
    fn enumeration_is_unique_and_order_independent() {
        let g = Graph::complete(6);
        let b = EnumerationBudget::default();
        let ms = enumerate_perfect_matchings(&g, b).unwrap();
        let unique: BTreeSet<_> = ms.iter().collect();
        assert_eq!(unique.len(), ms.len());
        assert!(ms.iter().all(|m| m.is_perfect_in(&g)));
    }

    #[test]
    fn budget_is_enforced() {
        let b = EnumerationBudget::default();
        assert!(matches!(
            enumerate_perfect_matchings(&Graph::complete(14), b),
            Err(Error::OverBudget(_))
        ));
        assert!(matches!(
            enumerate_perfect_matchings(&Graph::complete(8), b),
            Err(Error::OverBudget(_))
        ));
        let f = plain(Graph::complete(8), vec![1; 8]);
        assert!(matches!(oracle_f_factor(&f, b), Err(Error::OverBudget(_))));
    }

    #[test]
    fn dominating_oracle_examples() {
        let b = EnumerationBudget::default();
        assert!(oracle_dominating_matching(&c4_red_green(vec![2, 0]), b).unwrap());
        assert!(!oracle_dominating_matching(&c4_red_green(vec![1, 2]), b).unwrap());
        assert!(oracle_dominating_matching(&c4_red_green(vec![0, 0]), b).unwrap());
        let path = DominatingMatchingInstance::perfect_matching(Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap());
        assert!(!oracle_dominating_matching(&path, b).unwrap());
    }

    #[test]
    fn f_factor_examples() {
        let b = EnumerationBudget::default();
        assert!(oracle_f_factor(&plain(Graph::complete(3), vec![2, 2, 2]), b).unwrap());
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(!oracle_f_factor(&plain(p3, vec![2, 2, 2]), b).unwrap());
        let mut f = plain(Graph::complete(3), vec![2, 2, 2]);
        f.blue = Graph::new(3, [(0, 1)]).unwrap();
        assert!(!oracle_f_factor(&f, b).unwrap());
    }

    #[test]
    fn determinant_small_cases() {
        let p = PrimeModulus::new(7).unwrap();
        assert_eq!(determinant(&[vec![1, 2], vec![3, 4]], p), p.element(7 - 2));
        assert_eq!(determinant(&[vec![0, 1], vec![1, 0]], p), -p.one());
        assert_eq!(determinant(&[], p), p.one());
    }

    #[test]
    fn graph_census() {
        // Unlabeled graph counts on n vertices.
        let expected = [1usize, 1, 2, 4, 11, 34, 156, 1044];
        for (n, &count) in expected.iter().enumerate() {
            assert_eq!(nonisomorphic_graphs(n).len(), count, "n = {n}");
        }
    }
}

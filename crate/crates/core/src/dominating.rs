//! Monte-Carlo decision and construction for the dominating matching problem.
//!
//! Each edge `e = {i, j}` gets a variable `x_e`, and each class `l` a variable
//! `z_l`. The skew matrix `A*` has entry `±x_e` for unclassified edges and
//! `±x_e z_l` for class-`l` edges, signed by a fixed orientation, so `Pf(A*)` is a
//! sum over perfect matchings with one distinct `x`-monomial per matching, and the
//! exponent of `z_l` counts class-`l` edges.
//!
//! The iterated difference `prod_l D_{z_l}^{m_l} Pf(A*)`, where
//! `D_z f = f(z) - f(z - 1)`, kills exactly the matchings that miss some
//! threshold. Expanded, it is the weighted grid sum
//!
//! ```text
//! sum_{0 <= u_l <= m_l} prod_l (-1)^{u_l} C(m_l, u_l) * Pf(A*(z_1 - u_1, ..., z_k - u_k))
//! ```
//!
//! which is evaluated at uniformly random points of GF(p), `p >= 2n^2` for a
//! graph on `2n` vertices. A nonzero value certifies a solution; a zero value on
//! a feasible instance happens with probability at most `2n/p`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{binomial_mod_p, is_prime, next_prime_at_least, FieldElement, PrimeModulus};
use crate::graph::{
    validate_solution_matching, DominatingMatchingInstance, EdgeClassAssignment, Graph, Matching, MatchingObstruction,
};
use crate::pfaffian::{pfaffian, SkewMatrix};

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_GRID_CAP: u64 = 1_000_000;
pub const DEFAULT_CONSTRUCTION_ATTEMPTS: usize = 5;

// Below this many entries per grid sweep the rayon overhead dominates.
const PARALLEL_GRID_WORK: u128 = 1 << 15;

/// Per-edge orientation; `true` means the edge points from its lower to its
/// higher endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    low_to_high: Vec<bool>,
}

impl Orientation {
    /// Every edge oriented low id -> high id.
    pub fn canonical(g: &Graph) -> Self {
        Orientation {
            low_to_high: vec![true; g.edge_count()],
        }
    }

    pub fn from_flags(low_to_high: Vec<bool>) -> Self {
        Orientation { low_to_high }
    }

    pub fn low_to_high(&self, edge: usize) -> bool {
        self.low_to_high[edge]
    }
}

/// One random point: `x` per edge, `z` per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableAssignment {
    pub x: Vec<FieldElement>,
    pub z: Vec<FieldElement>,
}

impl VariableAssignment {
    pub fn random<R: RngCore + ?Sized>(inst: &DominatingMatchingInstance, p: PrimeModulus, rng: &mut R) -> Self {
        let x = (0..inst.graph.edge_count()).map(|_| p.random(rng)).collect();
        let z = (0..inst.classes.class_count()).map(|_| p.random(rng)).collect();
        VariableAssignment { x, z }
    }
}

/// Numeric `A*` with every `z_l` replaced by `z_l - shift[l]`.
pub fn build_skew_evaluation(
    inst: &DominatingMatchingInstance,
    orient: &Orientation,
    assign: &VariableAssignment,
    shift: &[usize],
) -> SkewMatrix {
    let p = assign
        .x
        .first()
        .or(assign.z.first())
        .map(|e| e.modulus())
        .unwrap_or_else(|| next_prime_at_least(3));
    build_with_modulus(inst, orient, assign, shift, p)
}

fn build_with_modulus(
    inst: &DominatingMatchingInstance,
    orient: &Orientation,
    assign: &VariableAssignment,
    shift: &[usize],
    p: PrimeModulus,
) -> SkewMatrix {
    let n = inst.graph.vertex_count();
    let mut m = SkewMatrix::zeros(n, p).expect("even vertex count");
    let shifted: Vec<FieldElement> = assign
        .z
        .iter()
        .zip(shift)
        .map(|(&z, &u)| z - p.element(u as u64))
        .collect();
    for (e, &(u, v)) in inst.graph.edges().iter().enumerate() {
        let mut val = assign.x[e];
        if let Some(c) = inst.classes.class_of(e) {
            val *= shifted[c];
        }
        if orient.low_to_high(e) {
            m.set(u, v, val);
        } else {
            m.set(v, u, val);
        }
    }
    m
}

/// Result of one grid sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridEvaluation {
    pub value: FieldElement,
    pub pfaffian_evaluations: u64,
}

/// The weighted sum of `prod (m_l + 1)` Pfaffians at one assignment.
pub fn difference_grid_value(
    inst: &DominatingMatchingInstance,
    orient: &Orientation,
    assign: &VariableAssignment,
    p: PrimeModulus,
    grid_cap: u64,
) -> Result<GridEvaluation> {
    let grid = inst.grid_size();
    if grid > grid_cap as u128 {
        return Err(Error::GridTooLarge {
            size: grid,
            cap: grid_cap,
        });
    }
    let weights: Vec<Vec<FieldElement>> = inst
        .thresholds
        .iter()
        .map(|&m| {
            (0..=m as u64)
                .map(|u| {
                    let c = binomial_mod_p(m as u64, u, p).expect("u <= m");
                    if u % 2 == 1 {
                        -c
                    } else {
                        c
                    }
                })
                .collect()
        })
        .collect();

    let counter = AtomicU64::new(0);
    let term = |index: u64| -> FieldElement {
        let mut rest = index;
        let mut shift = Vec::with_capacity(inst.thresholds.len());
        let mut weight = p.one();
        for (l, &m) in inst.thresholds.iter().enumerate() {
            let radix = m as u64 + 1;
            let u = (rest % radix) as usize;
            rest /= radix;
            shift.push(u);
            weight *= weights[l][u];
        }
        let a = build_with_modulus(inst, orient, assign, &shift, p);
        counter.fetch_add(1, Ordering::Relaxed);
        weight * pfaffian(&a)
    };

    let order = inst.graph.vertex_count() as u128;
    let grid = grid as u64;
    let value = if grid > 1 && grid as u128 * order * order * order >= PARALLEL_GRID_WORK {
        (0..grid).into_par_iter().map(term).reduce(|| p.zero(), |a, b| a + b)
    } else {
        (0..grid).map(term).fold(p.zero(), |a, b| a + b)
    };
    Ok(GridEvaluation {
        value,
        pfaffian_evaluations: counter.into_inner(),
    })
}

/// Tunables shared by decision and construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOptions {
    pub trials: usize,
    pub grid_cap: u64,
    /// Use this prime instead of the smallest one `>= 2n^2`; must itself be
    /// prime and `>= 2n^2`.
    pub prime_override: Option<u64>,
    pub construction_attempts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            trials: DEFAULT_TRIALS,
            grid_cap: DEFAULT_GRID_CAP,
            prime_override: None,
            construction_attempts: DEFAULT_CONSTRUCTION_ATTEMPTS,
        }
    }
}

/// `2n^2` for a graph on `vertex_count = 2n` vertices, at least 3.
pub fn prime_lower_bound(vertex_count: usize) -> u64 {
    let half = (vertex_count / 2) as u64;
    (2 * half * half).max(3)
}

/// The field used for a graph of the given size.
pub fn choose_prime(vertex_count: usize, prime_override: Option<u64>) -> Result<PrimeModulus> {
    let required = prime_lower_bound(vertex_count);
    match prime_override {
        None => Ok(next_prime_at_least(required)),
        Some(p) if p >= required && is_prime(p) => PrimeModulus::new(p),
        Some(p) => Err(Error::PrimeOverrideRejected { p, required }),
    }
}

/// Probability bound `(numerator / denominator)^exponent` that a FALSE answer is
/// wrong. A zero numerator means the answer is certain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailureBound {
    pub numerator: u64,
    pub denominator: u64,
    pub exponent: u32,
}

impl FailureBound {
    pub const CERTAIN: FailureBound = FailureBound {
        numerator: 0,
        denominator: 1,
        exponent: 1,
    };

    pub fn value(&self) -> f64 {
        (self.numerator as f64 / self.denominator as f64).powi(self.exponent as i32)
    }
}

impl fmt::Display for FailureBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.numerator == 0 {
            write!(f, "0")
        } else {
            write!(f, "({}/{})^{}", self.numerator, self.denominator, self.exponent)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionReport {
    pub answer: bool,
    pub trials_run: usize,
    pub prime: PrimeModulus,
    pub per_trial_values: Vec<FieldElement>,
    pub failure_bound: FailureBound,
    pub grid_size: u128,
    pub pfaffian_evaluations: u64,
    /// Set when the answer was settled without any algebra.
    pub obstruction: Option<MatchingObstruction>,
}

/// Decides the dominating matching problem with up to `options.trials` random
/// evaluations of the grid sum. TRUE is always correct; FALSE is wrong with
/// probability at most `failure_bound`.
pub fn decide(inst: &DominatingMatchingInstance, options: &SolverOptions, seed: u64) -> Result<DecisionReport> {
    let n = inst.graph.vertex_count();
    let prime = choose_prime(n, options.prime_override)?;
    let grid_size = inst.grid_size();
    if let Some(obstruction) = inst.obstructions().into_iter().next() {
        return Ok(DecisionReport {
            answer: false,
            trials_run: 0,
            prime,
            per_trial_values: Vec::new(),
            failure_bound: FailureBound::CERTAIN,
            grid_size,
            pfaffian_evaluations: 0,
            obstruction: Some(obstruction),
        });
    }
    if grid_size > options.grid_cap as u128 {
        return Err(Error::GridTooLarge {
            size: grid_size,
            cap: options.grid_cap,
        });
    }

    let orient = Orientation::canonical(&inst.graph);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(options.trials);
    let mut evaluations = 0;
    for _ in 0..options.trials {
        let assign = VariableAssignment::random(inst, prime, &mut rng);
        let eval = difference_grid_value(inst, &orient, &assign, prime, options.grid_cap)?;
        evaluations += eval.pfaffian_evaluations;
        values.push(eval.value);
        if !eval.value.is_zero() {
            break;
        }
    }
    let answer = values.last().is_some_and(|v| !v.is_zero());
    let failure_bound = if answer {
        FailureBound::CERTAIN
    } else {
        FailureBound {
            numerator: n as u64,
            denominator: prime.value(),
            exponent: values.len() as u32,
        }
    };
    Ok(DecisionReport {
        answer,
        trials_run: values.len(),
        prime,
        per_trial_values: values,
        failure_bound,
        grid_size,
        pfaffian_evaluations: evaluations,
        obstruction: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub matching: Matching,
    /// Decision on the full instance that preceded the edge-by-edge search.
    pub initial: DecisionReport,
    pub decide_calls: usize,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructOutcome {
    Solved(Construction),
    Infeasible(DecisionReport),
}

// Residual instance during construction: surviving vertices and edges plus the
// thresholds still to meet.
struct Residual<'a> {
    inst: &'a DominatingMatchingInstance,
    vertex_alive: Vec<bool>,
    edge_alive: Vec<bool>,
    thresholds: Vec<usize>,
}

impl<'a> Residual<'a> {
    fn new(inst: &'a DominatingMatchingInstance) -> Self {
        Residual {
            inst,
            vertex_alive: vec![true; inst.graph.vertex_count()],
            edge_alive: vec![true; inst.graph.edge_count()],
            thresholds: inst.thresholds.clone(),
        }
    }

    fn compact(&self) -> DominatingMatchingInstance {
        let mut relabel = vec![usize::MAX; self.vertex_alive.len()];
        let mut count = 0;
        for (v, &alive) in self.vertex_alive.iter().enumerate() {
            if alive {
                relabel[v] = count;
                count += 1;
            }
        }
        let mut edges = Vec::new();
        let mut class_of = Vec::new();
        for (e, &(u, v)) in self.inst.graph.edges().iter().enumerate() {
            if self.edge_alive[e] {
                edges.push((relabel[u], relabel[v]));
                class_of.push(self.inst.classes.class_of(e));
            }
        }
        // Relabeling is monotone, so the surviving edges stay in canonical order.
        let graph = Graph::new(count, edges).expect("subgraph of a simple graph");
        let classes = EdgeClassAssignment::new(class_of, self.thresholds.len()).expect("same class ids");
        DominatingMatchingInstance {
            graph,
            classes,
            thresholds: self.thresholds.clone(),
        }
    }

    fn alive_degree(&self, v: usize) -> usize {
        self.inst
            .graph
            .edges()
            .iter()
            .enumerate()
            .filter(|&(e, &(a, b))| self.edge_alive[e] && (a == v || b == v))
            .count()
    }

    fn fix(&mut self, e: usize) {
        let (u, v) = self.inst.graph.edge(e);
        self.vertex_alive[u] = false;
        self.vertex_alive[v] = false;
        for (f, &(a, b)) in self.inst.graph.edges().iter().enumerate() {
            if a == u || a == v || b == u || b == v {
                self.edge_alive[f] = false;
            }
        }
        if let Some(c) = self.inst.classes.class_of(e) {
            self.thresholds[c] = self.thresholds[c].saturating_sub(1);
        }
    }
}

/// Builds a solution by self-reduction: each edge in canonical order is deleted
/// when the instance without it stays feasible, and otherwise fixed into the
/// matching (its endpoints removed, its class threshold lowered by one).
///
/// The result is checked with [`validate_solution_matching`]; a failed check
/// restarts the search with fresh randomness.
pub fn construct(inst: &DominatingMatchingInstance, options: &SolverOptions, seed: u64) -> Result<ConstructOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = decide(inst, options, rng.next_u64())?;
    if !initial.answer {
        return Ok(ConstructOutcome::Infeasible(initial));
    }
    let mut decide_calls = 1;
    for attempt in 1..=options.construction_attempts {
        let mut residual = Residual::new(inst);
        let mut chosen = Vec::new();
        for e in 0..inst.graph.edge_count() {
            if !residual.edge_alive[e] {
                continue;
            }
            let (u, v) = inst.graph.edge(e);
            // Deleting the last edge at a vertex strands it: no decision needed.
            let must_keep = residual.alive_degree(u) == 1 || residual.alive_degree(v) == 1;
            residual.edge_alive[e] = false;
            let deletable = !must_keep && {
                decide_calls += 1;
                decide(&residual.compact(), options, rng.next_u64())?.answer
            };
            if !deletable {
                residual.edge_alive[e] = true;
                residual.fix(e);
                chosen.push(e);
            }
        }
        let matching = Matching::new(chosen);
        if validate_solution_matching(inst, &matching) {
            return Ok(ConstructOutcome::Solved(Construction {
                matching,
                initial,
                decide_calls,
                attempts: attempt,
            }));
        }
    }
    Err(Error::ConstructionFailed {
        attempts: options.construction_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeClassAssignment;

    fn gf(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn k2_with_class(m: usize) -> DominatingMatchingInstance {
        let g = Graph::complete(2);
        let classes = EdgeClassAssignment::from_class_lists(1, &[vec![0]]).unwrap();
        DominatingMatchingInstance::new(g, classes, vec![m]).unwrap()
    }

    fn c4_red_green(thresholds: Vec<usize>) -> DominatingMatchingInstance {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let red = vec![g.edge_index(0, 1).unwrap(), g.edge_index(2, 3).unwrap()];
        let green = vec![g.edge_index(1, 2).unwrap(), g.edge_index(0, 3).unwrap()];
        let classes = EdgeClassAssignment::from_class_lists(4, &[red, green]).unwrap();
        DominatingMatchingInstance::new(g, classes, thresholds).unwrap()
    }

    #[test]
    fn skew_evaluation_single_edge() {
        let p = gf(37);
        let inst = k2_with_class(1);
        let orient = Orientation::canonical(&inst.graph);
        let assign = VariableAssignment {
            x: vec![p.element(5)],
            z: vec![p.element(9)],
        };
        let a = build_skew_evaluation(&inst, &orient, &assign, &[0]);
        assert_eq!(a.get(0, 1).value(), 8);
        assert_eq!(a.get(1, 0), -p.element(8));
        let a = build_skew_evaluation(&inst, &orient, &assign, &[9]);
        assert!(a.get(0, 1).is_zero());

        let flipped = build_skew_evaluation(&inst, &Orientation::from_flags(vec![false]), &assign, &[0]);
        assert_eq!(flipped.get(0, 1), -p.element(8));
    }

    #[test]
    fn skew_evaluation_non_edges_are_zero() {
        let p = gf(37);
        let inst = c4_red_green(vec![0, 0]);
        let assign = VariableAssignment {
            x: vec![p.element(3); 4],
            z: vec![p.element(2); 2],
        };
        let a = build_skew_evaluation(&inst, &Orientation::canonical(&inst.graph), &assign, &[0, 0]);
        assert!(a.get(0, 2).is_zero());
        assert!(a.get(1, 3).is_zero());
        assert_eq!(a.get(0, 1).value(), 6);
    }

    #[test]
    fn grid_on_single_edge_telescopes() {
        let p = gf(37);
        let inst = k2_with_class(1);
        let orient = Orientation::canonical(&inst.graph);
        for x in 0..37 {
            for z in [0u64, 1, 17, 36] {
                let assign = VariableAssignment {
                    x: vec![p.element(x)],
                    z: vec![p.element(z)],
                };
                let g = difference_grid_value(&inst, &orient, &assign, p, DEFAULT_GRID_CAP).unwrap();
                assert_eq!(g.value, p.element(x));
                assert_eq!(g.pfaffian_evaluations, 2);
            }
        }
    }

    #[test]
    fn grid_vanishes_above_the_degree() {
        let p = gf(37);
        let inst = k2_with_class(2);
        let orient = Orientation::canonical(&inst.graph);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let assign = VariableAssignment::random(&inst, p, &mut rng);
            let g = difference_grid_value(&inst, &orient, &assign, p, DEFAULT_GRID_CAP).unwrap();
            assert!(g.value.is_zero());
        }
    }

    #[test]
    fn grid_cap_is_enforced() {
        let p = gf(37);
        let inst = c4_red_green(vec![2, 2]);
        let assign = VariableAssignment::random(&inst, p, &mut ChaCha8Rng::seed_from_u64(0));
        let err = difference_grid_value(&inst, &Orientation::canonical(&inst.graph), &assign, p, 8);
        assert_eq!(err, Err(Error::GridTooLarge { size: 9, cap: 8 }));
        let opts = SolverOptions {
            grid_cap: 8,
            ..SolverOptions::default()
        };
        assert!(matches!(decide(&inst, &opts, 1), Err(Error::GridTooLarge { .. })));
    }

    #[test]
    fn c4_single_trial_nonzero_rate() {
        // p = 37 and 2n = 4: a feasible instance vanishes with probability <= 4/37.
        let p = gf(37);
        let inst = c4_red_green(vec![2, 0]);
        let orient = Orientation::canonical(&inst.graph);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let nonzero = (0..1000)
            .filter(|_| {
                let assign = VariableAssignment::random(&inst, p, &mut rng);
                !difference_grid_value(&inst, &orient, &assign, p, DEFAULT_GRID_CAP)
                    .unwrap()
                    .value
                    .is_zero()
            })
            .count();
        assert!(
            nonzero as f64 / 1000.0 >= 1.0 - 4.0 / 37.0 - 0.05,
            "rate {nonzero}/1000"
        );
    }

    #[test]
    fn decide_examples() {
        let opts = SolverOptions::default();
        let yes = decide(&c4_red_green(vec![2, 0]), &opts, 42).unwrap();
        assert!(yes.answer);
        assert_eq!(yes.prime.value(), 11);
        assert_eq!(yes.failure_bound, FailureBound::CERTAIN);

        let no = decide(&c4_red_green(vec![1, 2]), &opts, 42).unwrap();
        assert!(!no.answer);
        assert_eq!(no.trials_run, DEFAULT_TRIALS);
        assert_eq!(
            no.failure_bound,
            FailureBound {
                numerator: 4,
                denominator: 11,
                exponent: 20
            }
        );
        assert!(no.per_trial_values.iter().all(|v| v.is_zero()));

        let tri = DominatingMatchingInstance::perfect_matching(Graph::complete(3));
        let r = decide(&tri, &opts, 0).unwrap();
        assert!(!r.answer);
        assert_eq!(r.failure_bound.value(), 0.0);
        assert_eq!(r.obstruction, Some(MatchingObstruction::OddVertexCount(3)));
    }

    #[test]
    fn prime_override_checks() {
        let inst = c4_red_green(vec![2, 0]);
        let ok = SolverOptions {
            prime_override: Some(101),
            ..SolverOptions::default()
        };
        assert_eq!(decide(&inst, &ok, 1).unwrap().prime.value(), 101);
        for bad in [7u64, 15] {
            let opts = SolverOptions {
                prime_override: Some(bad),
                ..SolverOptions::default()
            };
            assert!(matches!(
                decide(&inst, &opts, 1),
                Err(Error::PrimeOverrideRejected { .. })
            ));
        }
    }

    #[test]
    fn decide_is_deterministic() {
        let inst = c4_red_green(vec![1, 1]);
        let opts = SolverOptions::default();
        assert_eq!(decide(&inst, &opts, 5).unwrap(), decide(&inst, &opts, 5).unwrap());
    }

    #[test]
    fn construct_examples() {
        let opts = SolverOptions::default();
        let inst = c4_red_green(vec![2, 0]);
        let ConstructOutcome::Solved(c) = construct(&inst, &opts, 3).unwrap() else {
            panic!("expected a matching");
        };
        let e = |u, v| inst.graph.edge_index(u, v).unwrap();
        assert_eq!(c.matching, Matching::new(vec![e(0, 1), e(2, 3)]));

        let k2 = DominatingMatchingInstance::perfect_matching(Graph::complete(2));
        let ConstructOutcome::Solved(c) = construct(&k2, &opts, 3).unwrap() else {
            panic!("expected a matching");
        };
        assert_eq!(c.matching.edges, vec![0]);

        assert!(matches!(
            construct(&c4_red_green(vec![1, 2]), &opts, 3).unwrap(),
            ConstructOutcome::Infeasible(_)
        ));
    }

    #[test]
    fn failure_bound_display() {
        let b = FailureBound {
            numerator: 8,
            denominator: 37,
            exponent: 20,
        };
        assert_eq!(b.to_string(), "(8/37)^20");
        let expected = (8.0f64 / 37.0).powi(20);
        assert!((b.value() - expected).abs() <= 1e-12 * expected);
        assert_eq!(FailureBound::CERTAIN.to_string(), "0");
    }
}

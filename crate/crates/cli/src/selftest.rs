//! Exhaustive small-instance checks against the brute-force oracles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use pfaffmatch::field::next_prime_at_least;
use pfaffmatch::oracle::{
    determinant, enumerate_perfect_matchings, nonisomorphic_graphs, oracle_dominating_matching, oracle_f_factor,
    EnumerationBudget,
};
use pfaffmatch::pfaffian::{pfaffian_combinatorial, SkewMatrix};
use pfaffmatch::reductions::{build_gadget, reduce_exact_matching};
use pfaffmatch::{
    decide, DominatingMatchingInstance, EdgeClassAssignment, FFactorInstance, FieldElement, Graph, PrimeModulus,
    SolverOptions,
};

pub const DEFAULT_SIZE_LIMIT: usize = 8;

pub type PfaffianFn = fn(&SkewMatrix) -> FieldElement;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn tally(name: &'static str, failures: Vec<Option<String>>) -> Self {
        let failed = failures.iter().filter(|f| f.is_some()).count();
        SuiteResult {
            name,
            passed: failures.len() - failed,
            failed,
            first_failure: failures.into_iter().flatten().next(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

pub fn random_skew<R: Rng>(order: usize, p: PrimeModulus, rng: &mut R) -> SkewMatrix {
    let mut a = SkewMatrix::zeros(order, p).expect("even order");
    for i in 0..order {
        for j in i + 1..order {
            a.set(i, j, p.random(rng));
        }
    }
    a
}

/// A random prime in `[lo, hi)`.
pub fn random_prime<R: Rng>(lo: u64, hi: u64, rng: &mut R) -> PrimeModulus {
    loop {
        let p = next_prime_at_least(rng.gen_range(lo..hi));
        if p.value() < hi {
            return p;
        }
    }
}

/// Checks `pf(A)^2 = det(A)` for even orders up to 20, and agreement with the
/// matching sum up to order 8.
pub fn pfaffian_suite(pf: PfaffianFn, count: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(SkewMatrix, usize)> = (0..count)
        .map(|i| {
            let p = random_prime(3, 1 << 31, &mut rng);
            let order = 2 * (1 + i % 10);
            (random_skew(order, p, &mut rng), order)
        })
        .collect();
    let failures = cases
        .par_iter()
        .map(|(a, order)| {
            let value = pf(a);
            let det = determinant(&a.rows(), a.modulus());
            if value * value != det {
                return Some(format!(
                    "Cayley identity fails at order {order} over GF({})",
                    a.modulus().value()
                ));
            }
            if *order <= 8 && pfaffian_combinatorial(a).ok() != Some(value) {
                return Some(format!("matching sum disagrees at order {order}"));
            }
            None
        })
        .collect();
    SuiteResult::tally("pfaffian", failures)
}

/// Each class gets a random subset of the edges (some edges stay unclassified)
/// and a threshold of at most 3.
pub fn random_classes<R: Rng>(g: &Graph, max_classes: usize, rng: &mut R) -> DominatingMatchingInstance {
    let k = rng.gen_range(1..=max_classes);
    let class_of: Vec<Option<usize>> = (0..g.edge_count())
        .map(|_| {
            let c = rng.gen_range(0..=k);
            (c < k).then_some(c)
        })
        .collect();
    let classes = EdgeClassAssignment::new(class_of, k).expect("in range");
    let sizes = classes.class_sizes();
    let thresholds = sizes.iter().map(|&s| rng.gen_range(0..=s.min(3))).collect();
    DominatingMatchingInstance::new(g.clone(), classes, thresholds).expect("consistent shapes")
}

/// All non-isomorphic graphs of even order up to `size_limit`, each with three
/// random class assignments.
pub fn matching_suite(size_limit: usize, seed: u64) -> Vec<DominatingMatchingInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in (0..=size_limit).step_by(2) {
        for g in nonisomorphic_graphs(n) {
            for _ in 0..3 {
                out.push(random_classes(&g, 3, &mut rng));
            }
        }
    }
    out
}

/// Decide against the oracle with the default 20 trials: any TRUE on an
/// infeasible instance is a soundness failure, any FALSE on a feasible one a
/// (vanishingly unlikely) completeness failure.
pub fn decision_suite(size_limit: usize, seed: u64) -> SuiteResult {
    let suite = matching_suite(size_limit, seed);
    let opts = SolverOptions::default();
    let failures = suite
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let truth = oracle_dominating_matching(inst, EnumerationBudget::default()).expect("small");
            match decide(inst, &opts, seed ^ i as u64) {
                Ok(r) if r.answer == truth => None,
                Ok(r) => Some(format!("instance {i}: decide {} but oracle {truth}", r.answer)),
                Err(e) => Some(format!("instance {i}: {e}")),
            }
        })
        .collect();
    SuiteResult::tally("decide", failures)
}

/// Random f-factor instance on `n` vertices: a random host, random target
/// degrees, at most two classes, optionally blue edges.
pub fn random_f_factor<R: Rng>(n: usize, with_blue: bool, rng: &mut R) -> FFactorInstance {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let host = Graph::new(n, all.iter().copied().filter(|_| rng.gen_bool(0.7))).expect("simple");
    let blue = if with_blue {
        Graph::new(n, all.iter().copied().filter(|_| rng.gen_bool(0.2))).expect("simple")
    } else {
        Graph::empty(n)
    };
    // Degrees of a random subgraph keep roughly half of the instances feasible.
    let mut chosen: Vec<(usize, usize)> = host.edges().to_vec();
    chosen.shuffle(rng);
    chosen.truncate(rng.gen_range(0..=host.edge_count()));
    let mut degrees = vec![0; n];
    for &(u, v) in &chosen {
        degrees[u] += 1;
        degrees[v] += 1;
    }
    if rng.gen_bool(0.3) {
        let v = rng.gen_range(0..n);
        degrees[v] = rng.gen_range(0..n);
    }
    let k = rng.gen_range(0..=2);
    let class_of: Vec<Option<usize>> = (0..host.edge_count())
        .map(|_| {
            let c = rng.gen_range(0..=k);
            (c < k).then_some(c)
        })
        .collect();
    let classes = EdgeClassAssignment::new(class_of, k).expect("in range");
    let thresholds = classes
        .class_sizes()
        .iter()
        .map(|&s| rng.gen_range(0..=s.min(2)))
        .collect();
    FFactorInstance::new(host, degrees, classes, thresholds, blue).expect("consistent shapes")
}

pub fn f_factor_family(count: usize, max_vertices: usize, seed: u64) -> Vec<FFactorInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(1..=max_vertices);
            random_f_factor(n, i % 2 == 1, &mut rng)
        })
        .collect()
}

/// `oracle_f_factor(F)` against the matching oracle on the gadget of `F`.
pub fn gadget_suite(count: usize, max_vertices: usize, seed: u64) -> SuiteResult {
    let family = f_factor_family(count, max_vertices, seed);
    let failures = family
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let direct = match oracle_f_factor(f, EnumerationBudget::default()) {
                Ok(b) => b,
                Err(e) => return Some(format!("instance {i}: {e}")),
            };
            let via_gadget = match build_gadget(f) {
                Err(_) => false,
                Ok(g) => match oracle_dominating_matching(&g.instance(), EnumerationBudget::gadget()) {
                    Ok(b) => b,
                    Err(e) => return Some(format!("instance {i}: {e}")),
                },
            };
            (direct != via_gadget).then(|| format!("instance {i}: f-factor {direct}, gadget {via_gadget}"))
        })
        .collect();
    SuiteResult::tally("gadget", failures)
}

/// Random graph of even order with a random red set.
pub fn random_red_graph<R: Rng>(max_vertices: usize, rng: &mut R) -> (Graph, Vec<usize>) {
    let n = 2 * rng.gen_range(1..=max_vertices / 2);
    let density = rng.gen_range(0.3..0.9);
    let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let g = Graph::new(n, all.into_iter().filter(|_| rng.gen_bool(density))).expect("simple");
    let red = (0..g.edge_count()).filter(|_| rng.gen_bool(0.5)).collect();
    (g, red)
}

/// For every `m`, the reduction plus decide against counting red edges in every
/// perfect matching.
pub fn exact_matching_agreement(g: &Graph, red: &[usize], seed: u64) -> Result<(), String> {
    let matchings = enumerate_perfect_matchings(
        g,
        EnumerationBudget {
            max_vertices: 12,
            max_edges: 66,
        },
    )
    .map_err(|e| e.to_string())?;
    let opts = SolverOptions::default();
    for m in 0..=g.vertex_count() / 2 {
        let truth = matchings
            .iter()
            .any(|mm| mm.edges.iter().filter(|e| red.contains(e)).count() == m);
        let inst = reduce_exact_matching(g, red, m).map_err(|e| e.to_string())?;
        let r = decide(&inst, &opts, seed.wrapping_add(m as u64)).map_err(|e| e.to_string())?;
        if r.answer != truth {
            return Err(format!("m = {m}: decide {} but enumeration {truth}", r.answer));
        }
    }
    Ok(())
}

pub fn exact_matching_suite(count: usize, max_vertices: usize, seed: u64) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(Graph, Vec<usize>)> = (0..count).map(|_| random_red_graph(max_vertices, &mut rng)).collect();
    let failures = cases
        .par_iter()
        .enumerate()
        .map(|(i, (g, red))| {
            exact_matching_agreement(g, red, seed ^ i as u64)
                .err()
                .map(|e| format!("graph {i}: {e}"))
        })
        .collect();
    SuiteResult::tally("exact-matching", failures)
}

/// Every suite at the given vertex limit.
pub fn run_all(pf: PfaffianFn, size_limit: usize, seed: u64) -> Vec<SuiteResult> {
    vec![
        pfaffian_suite(pf, 200, seed),
        decision_suite(size_limit, seed),
        gadget_suite(100, size_limit.min(6), seed),
        exact_matching_suite(20, size_limit.max(2), seed),
    ]
}

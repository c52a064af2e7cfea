//! Reductions onto the dominating matching problem.
//!
//! * f-factor (with forbidden blue edges) -> perfect matching in the Tutte gadget;
//! * PAM realization -> f-factor on the complement of the blue graph;
//! * exact matching -> dominating matching with a red and a green class.

use std::collections::BTreeMap;
use std::fmt;

use crate::dominating::{construct, decide, ConstructOutcome, Construction, DecisionReport, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::{
    validate_pam, DominatingMatchingInstance, EdgeClassAssignment, FFactorInstance, FactorSubgraph, Graph, Matching,
    PamInstance, PamViolation,
};

/// Tutte gadget of an f-factor instance.
///
/// For every vertex `v` with allowed neighbors `S_v` there is a pair vertex `v^u`
/// per `u in S_v` and `|S_v| - d(v)` helper vertices `a^v_i`. Pair edges
/// `{v^u, u^v}` stand for original edges `{u, v}`; helper edges join every `v^u`
/// to every `a^v_i`. Vertex ids are assigned per `v` in order: pair vertices by
/// ascending `u`, then helpers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TutteGadget {
    pub graph: Graph,
    pub classes: EdgeClassAssignment,
    pub thresholds: Vec<usize>,
    original_vertex_count: usize,
    pair_vertex: BTreeMap<(usize, usize), usize>,
    helpers: Vec<Vec<usize>>,
    edge_back: Vec<Option<(usize, usize)>>,
}

/// Some vertex has fewer allowed neighbors than its prescribed degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetObstruction {
    pub vertex: usize,
    pub allowed: usize,
    pub degree: usize,
}

impl fmt::Display for GadgetObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vertex {} needs degree {} but has only {} allowed neighbors",
            self.vertex, self.degree, self.allowed
        )
    }
}

impl TutteGadget {
    pub fn instance(&self) -> DominatingMatchingInstance {
        DominatingMatchingInstance {
            graph: self.graph.clone(),
            classes: self.classes.clone(),
            thresholds: self.thresholds.clone(),
        }
    }

    pub fn original_vertex_count(&self) -> usize {
        self.original_vertex_count
    }

    /// Id of the pair vertex `v^u`.
    pub fn pair_vertex(&self, v: usize, u: usize) -> Option<usize> {
        self.pair_vertex.get(&(v, u)).copied()
    }

    pub fn helpers(&self, v: usize) -> &[usize] {
        &self.helpers[v]
    }

    /// Original pair `{u, v}` (`u < v`) of a pair edge; `None` for helper edges.
    pub fn original_pair(&self, gadget_edge: usize) -> Option<(usize, usize)> {
        self.edge_back[gadget_edge]
    }
}

/// Builds the Tutte gadget; `S_v` is the set of host neighbors of `v` joined by a
/// non-blue edge. Classes move from host edges to the matching pair edges.
pub fn build_gadget(inst: &FFactorInstance) -> std::result::Result<TutteGadget, GadgetObstruction> {
    let n = inst.host.vertex_count();
    let mut allowed: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut class_of_pair = BTreeMap::new();
    for e in inst.allowed_edges() {
        let (u, v) = inst.host.edge(e);
        allowed[u].push(v);
        allowed[v].push(u);
        class_of_pair.insert((u, v), inst.classes.class_of(e));
    }
    for list in &mut allowed {
        list.sort_unstable();
    }
    for v in 0..n {
        if allowed[v].len() < inst.degrees[v] {
            return Err(GadgetObstruction {
                vertex: v,
                allowed: allowed[v].len(),
                degree: inst.degrees[v],
            });
        }
    }

    let mut pair_vertex = BTreeMap::new();
    let mut helpers = vec![Vec::new(); n];
    let mut next = 0;
    for v in 0..n {
        for &u in &allowed[v] {
            pair_vertex.insert((v, u), next);
            next += 1;
        }
        let spare = allowed[v].len() - inst.degrees[v];
        helpers[v] = (next..next + spare).collect();
        next += spare;
    }

    let mut edges = Vec::new();
    let mut back = BTreeMap::new();
    for (&(u, v), &class) in &class_of_pair {
        let (a, b) = (pair_vertex[&(u, v)], pair_vertex[&(v, u)]);
        let key = (a.min(b), a.max(b));
        edges.push(key);
        back.insert(key, ((u, v), class));
    }
    for v in 0..n {
        for &u in &allowed[v] {
            let pv = pair_vertex[&(v, u)];
            for &h in &helpers[v] {
                edges.push((pv, h));
            }
        }
    }
    let graph = Graph::new(next, edges).expect("gadget is simple");
    let mut class_of = Vec::with_capacity(graph.edge_count());
    let mut edge_back = Vec::with_capacity(graph.edge_count());
    for &key in graph.edges() {
        match back.get(&key) {
            Some(&(pair, class)) => {
                edge_back.push(Some(pair));
                class_of.push(class);
            }
            None => {
                edge_back.push(None);
                class_of.push(None);
            }
        }
    }
    let classes = EdgeClassAssignment::new(class_of, inst.classes.class_count()).expect("same class ids");
    Ok(TutteGadget {
        graph,
        classes,
        thresholds: inst.thresholds.clone(),
        original_vertex_count: n,
        pair_vertex,
        helpers,
        edge_back,
    })
}

/// Original edges whose pair edge is in the gadget matching.
pub fn project_matching(g: &TutteGadget, m: &Matching) -> Result<FactorSubgraph> {
    if !m.is_perfect_in(&g.graph) {
        return Err(Error::NotPerfectMatching);
    }
    Ok(FactorSubgraph::new(m.edges.iter().filter_map(|&e| g.original_pair(e))))
}

/// PAM realization as a dominating f-factor problem on the complement of the blue
/// graph, one class per unordered pair of partition classes `i <= j` (ordered
/// lexicographically) with threshold `c(i, j)`.
///
/// The sum identities make the thresholds add up to the edge count of every
/// realization, so meeting each threshold means meeting it exactly.
pub fn reduce_pam(inst: &PamInstance) -> std::result::Result<FFactorInstance, Vec<PamViolation>> {
    let violations = validate_pam(inst);
    if !violations.is_empty() {
        return Err(violations);
    }
    let class = inst.class_index().expect("validated partition");
    let k = inst.partition.len();
    let mut pair_id = vec![vec![0; k]; k];
    let mut thresholds = Vec::new();
    for i in 0..k {
        for j in i..k {
            pair_id[i][j] = thresholds.len();
            pair_id[j][i] = thresholds.len();
            thresholds.push(inst.pam[i][j]);
        }
    }
    let host = inst.blue.complement();
    let class_of = host
        .edges()
        .iter()
        .map(|&(u, v)| Some(pair_id[class[u]][class[v]]))
        .collect();
    let classes = EdgeClassAssignment::new(class_of, thresholds.len()).expect("ids in range");
    let n = inst.vertex_count;
    Ok(FFactorInstance::new(host, inst.degrees.clone(), classes, thresholds, Graph::empty(n)).expect("shapes agree"))
}

/// Exact matching (exactly `m` red edges) as a dominating matching with classes
/// red (threshold `m`) and green (threshold `n/2 - m`).
pub fn reduce_exact_matching(g: &Graph, red: &[usize], m: usize) -> Result<DominatingMatchingInstance> {
    let n = g.vertex_count();
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidInstance(format!("odd vertex count {n}")));
    }
    if m > n / 2 {
        return Err(Error::InvalidInstance(format!(
            "m = {m} exceeds the matching size {}",
            n / 2
        )));
    }
    let mut is_red = vec![false; g.edge_count()];
    for &e in red {
        let slot = is_red
            .get_mut(e)
            .ok_or_else(|| Error::InvalidInstance(format!("red edge index {e} out of range")))?;
        if *slot {
            return Err(Error::InvalidInstance(format!("red edge {e} listed twice")));
        }
        *slot = true;
    }
    let class_of = is_red.iter().map(|&r| Some(if r { 0 } else { 1 })).collect();
    let classes = EdgeClassAssignment::new(class_of, 2)?;
    DominatingMatchingInstance::new(g.clone(), classes, vec![m, n / 2 - m])
}

/// Infeasibility proven without any randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refutation {
    Conditions(Vec<PamViolation>),
    Gadget(GadgetObstruction),
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Refutation::Conditions(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "necessary conditions violated: {}", parts.join("; "))
            }
            Refutation::Gadget(o) => write!(f, "gadget: {o}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReducedDecision {
    Decided {
        report: DecisionReport,
        gadget_vertex_count: usize,
    },
    Refuted(Refutation),
}

impl ReducedDecision {
    pub fn answer(&self) -> bool {
        matches!(self, ReducedDecision::Decided { report, .. } if report.answer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReducedSolution {
    Realized {
        subgraph: FactorSubgraph,
        construction: Construction,
        gadget_vertex_count: usize,
    },
    Infeasible {
        report: DecisionReport,
        gadget_vertex_count: usize,
    },
    Refuted(Refutation),
}

impl ReducedSolution {
    pub fn subgraph(&self) -> Option<&FactorSubgraph> {
        match self {
            ReducedSolution::Realized { subgraph, .. } => Some(subgraph),
            _ => None,
        }
    }
}

pub fn decide_f_factor(inst: &FFactorInstance, options: &SolverOptions, seed: u64) -> Result<ReducedDecision> {
    match build_gadget(inst) {
        Err(o) => Ok(ReducedDecision::Refuted(Refutation::Gadget(o))),
        Ok(g) => Ok(ReducedDecision::Decided {
            report: decide(&g.instance(), options, seed)?,
            gadget_vertex_count: g.graph.vertex_count(),
        }),
    }
}

/// Gadget, construction, projection; the projected subgraph is re-checked
/// against the f-factor instance.
pub fn solve_f_factor(inst: &FFactorInstance, options: &SolverOptions, seed: u64) -> Result<ReducedSolution> {
    let gadget = match build_gadget(inst) {
        Err(o) => return Ok(ReducedSolution::Refuted(Refutation::Gadget(o))),
        Ok(g) => g,
    };
    let gadget_vertex_count = gadget.graph.vertex_count();
    match construct(&gadget.instance(), options, seed)? {
        ConstructOutcome::Infeasible(report) => Ok(ReducedSolution::Infeasible {
            report,
            gadget_vertex_count,
        }),
        ConstructOutcome::Solved(construction) => {
            let subgraph = project_matching(&gadget, &construction.matching)?;
            if !inst.accepts(&subgraph) {
                return Err(Error::Certification(
                    "projected subgraph misses the f-factor constraints".into(),
                ));
            }
            Ok(ReducedSolution::Realized {
                subgraph,
                construction,
                gadget_vertex_count,
            })
        }
    }
}

fn pam_front_end(inst: &PamInstance) -> Result<std::result::Result<FFactorInstance, Refutation>> {
    match reduce_pam(inst) {
        Ok(f) => Ok(Ok(f)),
        Err(violations) if violations.iter().any(PamViolation::is_structural) => {
            let parts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidInstance(parts.join("; ")))
        }
        Err(violations) => Ok(Err(Refutation::Conditions(violations))),
    }
}

pub fn decide_pam(inst: &PamInstance, options: &SolverOptions, seed: u64) -> Result<ReducedDecision> {
    match pam_front_end(inst)? {
        Err(r) => Ok(ReducedDecision::Refuted(r)),
        Ok(f) => decide_f_factor(&f, options, seed),
    }
}

/// Full PAM pipeline. A returned realization has exactly the prescribed degrees
/// and class counts and no blue edge.
pub fn solve_pam(inst: &PamInstance, options: &SolverOptions, seed: u64) -> Result<ReducedSolution> {
    let f = match pam_front_end(inst)? {
        Err(r) => return Ok(ReducedSolution::Refuted(r)),
        Ok(f) => f,
    };
    let out = solve_f_factor(&f, options, seed)?;
    if let Some(sub) = out.subgraph() {
        if !inst.is_realized_by(&sub.edges) {
            return Err(Error::Certification("realization does not reproduce the PAM".into()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{enumerate_perfect_matchings, oracle_dominating_matching, EnumerationBudget};

    fn degree_instance(n: usize, degrees: Vec<usize>, blue: &[(usize, usize)]) -> FFactorInstance {
        let host = Graph::complete(n);
        let classes = EdgeClassAssignment::unclassified(host.edge_count());
        FFactorInstance::new(
            host,
            degrees,
            classes,
            vec![],
            Graph::new(n, blue.iter().copied()).unwrap(),
        )
        .unwrap()
    }

    fn two_plus_two(c12: usize, blue: &[(usize, usize)]) -> PamInstance {
        PamInstance {
            vertex_count: 4,
            degrees: vec![1; 4],
            partition: vec![vec![0, 1], vec![2, 3]],
            pam: vec![vec![0, c12], vec![c12, 0]],
            blue: Graph::new(4, blue.iter().copied()).unwrap(),
        }
    }

    #[test]
    fn triangle_gadget() {
        let g = build_gadget(&degree_instance(3, vec![2, 2, 2], &[])).unwrap();
        assert_eq!(g.graph.vertex_count(), 2 * 3 * 2 - 6);
        let all_pairs: Vec<usize> = (0..g.graph.edge_count())
            .filter(|&e| g.original_pair(e).is_some())
            .collect();
        assert_eq!(all_pairs.len(), 3);
        let m = Matching::new(all_pairs);
        assert!(m.is_perfect_in(&g.graph));
        assert_eq!(project_matching(&g, &m).unwrap().edges, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn blocked_vertex_is_infeasible() {
        let err = build_gadget(&degree_instance(2, vec![1, 1], &[(0, 1)])).unwrap_err();
        assert_eq!(
            err,
            GadgetObstruction {
                vertex: 0,
                allowed: 0,
                degree: 1
            }
        );
    }

    #[test]
    fn zero_degrees_match_helpers_only() {
        let g = build_gadget(&degree_instance(2, vec![0, 0], &[])).unwrap();
        assert_eq!(g.graph.vertex_count(), 4);
        let ms = enumerate_perfect_matchings(&g.graph, EnumerationBudget::default()).unwrap();
        assert_eq!(ms.len(), 1);
        assert!(ms[0].edges.iter().all(|&e| g.original_pair(e).is_none()));
        assert!(project_matching(&g, &ms[0]).unwrap().edges.is_empty());
    }

    #[test]
    fn single_edge_projection() {
        let g = build_gadget(&degree_instance(2, vec![1, 1], &[])).unwrap();
        let ms = enumerate_perfect_matchings(&g.graph, EnumerationBudget::default()).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(project_matching(&g, &ms[0]).unwrap().edges, vec![(0, 1)]);
    }

    #[test]
    fn projection_rejects_imperfect_matchings() {
        let g = build_gadget(&degree_instance(3, vec![2, 2, 2], &[])).unwrap();
        assert_eq!(
            project_matching(&g, &Matching::new(vec![0])),
            Err(Error::NotPerfectMatching)
        );
    }

    #[test]
    fn gadget_layout() {
        let g = build_gadget(&degree_instance(3, vec![1, 1, 0], &[(0, 2)])).unwrap();
        // S_0 = {1}, S_1 = {0, 2}, S_2 = {1}.
        assert_eq!(g.pair_vertex(0, 1), Some(0));
        assert_eq!(g.pair_vertex(0, 2), None);
        assert_eq!(g.pair_vertex(1, 0), Some(1));
        assert_eq!(g.pair_vertex(1, 2), Some(2));
        assert_eq!(g.helpers(1), &[3]);
        assert_eq!(g.pair_vertex(2, 1), Some(4));
        assert_eq!(g.helpers(2), &[5]);
        for (e, &(a, b)) in g.graph.edges().iter().enumerate() {
            let is_pair = g.original_pair(e).is_some();
            let helper = g.helpers.iter().flatten().any(|&h| h == a || h == b);
            assert!(is_pair != helper);
        }
    }

    #[test]
    fn pam_reduction_shape() {
        let f = reduce_pam(&two_plus_two(2, &[])).unwrap();
        assert_eq!(f.thresholds, vec![0, 2, 0]);
        assert_eq!(f.classes.class_sizes(), vec![1, 4, 1]);
        assert_eq!(f.host.edge_count(), 6);

        let f = reduce_pam(&two_plus_two(2, &[(0, 2)])).unwrap();
        assert!(!f.host.has_edge(0, 2));
        assert_eq!(f.classes.class_sizes(), vec![1, 3, 1]);
    }

    #[test]
    fn pam_solutions() {
        let opts = SolverOptions::default();
        let inst = two_plus_two(2, &[]);
        let sub = solve_pam(&inst, &opts, 1).unwrap();
        let edges = &sub.subgraph().unwrap().edges;
        assert!(edges == &vec![(0, 2), (1, 3)] || edges == &vec![(0, 3), (1, 2)]);

        let inst = two_plus_two(2, &[(0, 2)]);
        let sub = solve_pam(&inst, &opts, 1).unwrap();
        assert_eq!(sub.subgraph().unwrap().edges, vec![(0, 3), (1, 2)]);

        // Odd cross count breaks the class sum identity.
        let out = solve_pam(&two_plus_two(1, &[]), &opts, 1).unwrap();
        assert!(matches!(out, ReducedSolution::Refuted(Refutation::Conditions(_))));
    }

    #[test]
    fn structural_pam_errors_are_input_errors() {
        let mut inst = two_plus_two(2, &[]);
        inst.partition = vec![vec![0, 1, 2]];
        assert!(matches!(
            solve_pam(&inst, &SolverOptions::default(), 1),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn exact_matching_reduction() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let red = [g.edge_index(0, 1).unwrap(), g.edge_index(2, 3).unwrap()];
        let opts = SolverOptions::default();
        let inst = reduce_exact_matching(&g, &red, 2).unwrap();
        assert_eq!(inst.thresholds, vec![2, 0]);
        assert!(decide(&inst, &opts, 0).unwrap().answer);
        let inst = reduce_exact_matching(&g, &red, 1).unwrap();
        assert!(!decide(&inst, &opts, 0).unwrap().answer);
        assert!(!oracle_dominating_matching(&inst, EnumerationBudget::default()).unwrap());

        let plain = reduce_exact_matching(&g, &[], 0).unwrap();
        assert_eq!(plain.thresholds, vec![0, 2]);
        assert!(decide(&plain, &opts, 0).unwrap().answer);

        assert!(reduce_exact_matching(&g, &red, 3).is_err());
        assert!(reduce_exact_matching(&Graph::complete(3), &[], 0).is_err());
        assert!(reduce_exact_matching(&g, &[0, 0], 1).is_err());
    }
}

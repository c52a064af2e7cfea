use std::path::Path;
use std::time::Instant;

use pfaffmatch::dominating::{DEFAULT_CONSTRUCTION_ATTEMPTS, DEFAULT_GRID_CAP, DEFAULT_TRIALS};
use pfaffmatch::graph::validate_solution_matching;
use pfaffmatch::oracle::{oracle_dominating_matching, oracle_f_factor, EnumerationBudget};
use pfaffmatch::reductions::{
    build_gadget, decide_f_factor, decide_pam, reduce_exact_matching, reduce_pam, solve_f_factor, solve_pam,
};
use pfaffmatch::{
    construct, decide, ConstructOutcome, DominatingMatchingInstance, Error, FFactorInstance, Matching, ReducedDecision,
    ReducedSolution, SolverOptions,
};

use crate::instance::{self, Problem, Resolved};
use crate::report::RunReport;

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GRID_CAP: i32 = 3;
pub const EXIT_CONSTRUCTION: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub trials: usize,
    pub seed: u64,
    pub grid_cap: u64,
    pub prime_override: Option<u64>,
    pub verify: bool,
}

impl RunOptions {
    pub fn with_seed(seed: u64) -> Self {
        RunOptions {
            trials: DEFAULT_TRIALS,
            seed,
            grid_cap: DEFAULT_GRID_CAP,
            prime_override: None,
            verify: false,
        }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            trials: self.trials,
            grid_cap: self.grid_cap,
            prime_override: self.prime_override,
            construction_attempts: DEFAULT_CONSTRUCTION_ATTEMPTS,
        }
    }
}

/// Result of one command: the exit code, the report if one was produced, and
/// messages for standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Option<RunReport>,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    fn failure(exit_code: i32, diagnostics: Vec<String>) -> Self {
        Outcome {
            exit_code,
            report: None,
            diagnostics,
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::GridTooLarge { .. } => EXIT_GRID_CAP,
        Error::ConstructionFailed { .. } | Error::Certification(_) => EXIT_CONSTRUCTION,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Decide,
    Construct,
}

pub fn cmd_decide(path: &Path, opts: &RunOptions) -> Outcome {
    run_file(path, Command::Decide, opts)
}

pub fn cmd_construct(path: &Path, opts: &RunOptions) -> Outcome {
    run_file(path, Command::Construct, opts)
}

pub fn decide_text(text: &str, opts: &RunOptions) -> Outcome {
    run_text(text, Command::Decide, opts)
}

pub fn construct_text(text: &str, opts: &RunOptions) -> Outcome {
    run_text(text, Command::Construct, opts)
}

fn run_file(path: &Path, command: Command, opts: &RunOptions) -> Outcome {
    match std::fs::read_to_string(path) {
        Ok(text) => run_text(&text, command, opts),
        Err(e) => Outcome::failure(EXIT_INPUT, vec![format!("{}: {e}", path.display())]),
    }
}

fn run_text(text: &str, command: Command, opts: &RunOptions) -> Outcome {
    let resolved = match instance::parse(text) {
        Ok(r) => r,
        Err(diags) => return Outcome::failure(EXIT_INPUT, diags.iter().map(|d| d.to_string()).collect()),
    };
    let start = Instant::now();
    let name = if command == Command::Decide {
        "decide"
    } else {
        "construct"
    };
    let mut report = RunReport::new(resolved.problem.kind(), name, opts.trials, opts.seed);
    let result = match command {
        Command::Decide => run_decide(&resolved, opts, &mut report),
        Command::Construct => run_construct(&resolved, opts, &mut report),
    };
    let positive = match result {
        Ok(b) => b,
        Err(e) => return Outcome::failure(exit_code_for(&e), vec![e.to_string()]),
    };
    let mut diagnostics = Vec::new();
    if opts.verify {
        let verdict = verify(&resolved);
        match verdict {
            Ok(truth) if truth == positive => report.verified = Some("agree".into()),
            Ok(truth) => {
                report.verified = Some("disagree".into());
                diagnostics.push(format!("oracle says {truth}, solver says {positive}"));
            }
            Err(reason) => report.verified = Some(format!("skipped: {reason}")),
        }
    }
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    Outcome {
        exit_code: if positive { EXIT_TRUE } else { EXIT_FALSE },
        report: Some(report),
        diagnostics,
    }
}

fn run_decide(r: &Resolved, opts: &RunOptions, report: &mut RunReport) -> pfaffmatch::Result<bool> {
    let solver = opts.solver();
    let positive = match &r.problem {
        Problem::DominatingMatching(inst) => {
            let d = decide(inst, &solver, opts.seed)?;
            report.absorb(&d, inst.graph.vertex_count());
            d.answer
        }
        Problem::ExactMatching { graph, red, m } => {
            let inst = reduce_exact_matching(graph, red, *m)?;
            let d = decide(&inst, &solver, opts.seed)?;
            report.absorb(&d, graph.vertex_count());
            d.answer
        }
        Problem::FFactor(inst) => absorb_reduced(decide_f_factor(inst, &solver, opts.seed)?, report),
        Problem::Pam(inst) => {
            report.note = Some(pam_note());
            absorb_reduced(decide_pam(inst, &solver, opts.seed)?, report)
        }
    };
    report.answer = if positive { "TRUE" } else { "FALSE" }.into();
    Ok(positive)
}

fn absorb_reduced(d: ReducedDecision, report: &mut RunReport) -> bool {
    match &d {
        ReducedDecision::Decided {
            report: dr,
            gadget_vertex_count,
        } => report.absorb(dr, *gadget_vertex_count),
        ReducedDecision::Refuted(why) => report.refutation = Some(why.to_string()),
    }
    d.answer()
}

fn pam_note() -> String {
    "class thresholds sum to the edge count of any realization, so meeting each lower bound means meeting it exactly"
        .into()
}

fn name_edges(r: &Resolved, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<[String; 2]> {
    edges
        .into_iter()
        .map(|(u, v)| [r.names[u].clone(), r.names[v].clone()])
        .collect()
}

fn run_construct(r: &Resolved, opts: &RunOptions, report: &mut RunReport) -> pfaffmatch::Result<bool> {
    let solver = opts.solver();
    let solved = match &r.problem {
        Problem::DominatingMatching(inst) => matching_construct(r, inst, &solver, opts.seed, report)?.is_some(),
        Problem::ExactMatching { graph, red, m } => {
            let inst = reduce_exact_matching(graph, red, *m)?;
            let found = matching_construct(r, &inst, &solver, opts.seed, report)?;
            if let Some(matching) = &found {
                let reds = inst.classes.count_in(&matching.edges)[0];
                if reds != *m {
                    return Err(Error::Certification(format!(
                        "matching has {reds} red edges, wanted {m}"
                    )));
                }
            }
            found.is_some()
        }
        Problem::FFactor(inst) => absorb_solution(r, solve_f_factor(inst, &solver, opts.seed)?, report),
        Problem::Pam(inst) => {
            report.note = Some(pam_note());
            absorb_solution(r, solve_pam(inst, &solver, opts.seed)?, report)
        }
    };
    report.answer = if solved { "SOLVED" } else { "INFEASIBLE" }.into();
    Ok(solved)
}

fn matching_construct(
    r: &Resolved,
    inst: &DominatingMatchingInstance,
    solver: &SolverOptions,
    seed: u64,
    report: &mut RunReport,
) -> pfaffmatch::Result<Option<Matching>> {
    match construct(inst, solver, seed)? {
        ConstructOutcome::Infeasible(d) => {
            report.absorb(&d, inst.graph.vertex_count());
            Ok(None)
        }
        ConstructOutcome::Solved(c) => {
            if !validate_solution_matching(inst, &c.matching) {
                return Err(Error::Certification("matching misses a class threshold".into()));
            }
            report.absorb(&c.initial, inst.graph.vertex_count());
            report.decide_calls = Some(c.decide_calls);
            report.construction_attempts = Some(c.attempts);
            report.solution = Some(name_edges(r, c.matching.edges.iter().map(|&e| inst.graph.edge(e))));
            Ok(Some(c.matching))
        }
    }
}

fn absorb_solution(r: &Resolved, s: ReducedSolution, report: &mut RunReport) -> bool {
    match s {
        ReducedSolution::Realized {
            subgraph,
            construction,
            gadget_vertex_count,
        } => {
            report.absorb(&construction.initial, gadget_vertex_count);
            report.decide_calls = Some(construction.decide_calls);
            report.construction_attempts = Some(construction.attempts);
            report.solution = Some(name_edges(r, subgraph.edges.iter().copied()));
            true
        }
        ReducedSolution::Infeasible {
            report: d,
            gadget_vertex_count,
        } => {
            report.absorb(&d, gadget_vertex_count);
            false
        }
        ReducedSolution::Refuted(why) => {
            report.refutation = Some(why.to_string());
            false
        }
    }
}

// Budget for the gadget fallback when the direct f-factor search has too many
// edges.
const VERIFY_GADGET_VERTICES: usize = 64;

fn verify_f_factor(inst: &FFactorInstance) -> Result<bool, String> {
    match oracle_f_factor(inst, EnumerationBudget::default()) {
        Ok(b) => Ok(b),
        Err(Error::OverBudget(direct)) => match build_gadget(inst) {
            Err(_) => Ok(false),
            Ok(g) => oracle_dominating_matching(
                &g.instance(),
                EnumerationBudget {
                    max_vertices: VERIFY_GADGET_VERTICES,
                    ..EnumerationBudget::gadget()
                },
            )
            .map_err(|e| format!("{direct}; gadget {e}")),
        },
        Err(e) => Err(e.to_string()),
    }
}

/// Ground truth from exhaustive search, or why it was not attempted.
fn verify(r: &Resolved) -> Result<bool, String> {
    let budget = EnumerationBudget::default();
    match &r.problem {
        Problem::DominatingMatching(inst) => oracle_dominating_matching(inst, budget).map_err(|e| e.to_string()),
        Problem::ExactMatching { graph, red, m } => {
            let inst = reduce_exact_matching(graph, red, *m).map_err(|e| e.to_string())?;
            oracle_dominating_matching(&inst, budget).map_err(|e| e.to_string())
        }
        Problem::FFactor(inst) => verify_f_factor(inst),
        Problem::Pam(inst) => match reduce_pam(inst) {
            // necessary conditions fail, so nothing realizes it
            Err(_) => Ok(false),
            Ok(f) => verify_f_factor(&f),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C4_EXACT: &str = r#"{"problem": "exact-matching", "vertices": ["1","2","3","4"],
        "edges": [["1","2"],["2","3"],["3","4"],["4","1"]], "red": [0, 2], "m": M}"#;

    fn c4(m: usize) -> String {
        C4_EXACT.replace('M', &m.to_string())
    }

    #[test]
    fn exact_matching_c4() {
        let opts = RunOptions::with_seed(7);
        let yes = decide_text(&c4(2), &opts);
        assert_eq!(yes.exit_code, EXIT_TRUE);
        assert_eq!(yes.report.unwrap().answer, "TRUE");
        let no = decide_text(&c4(1), &opts);
        assert_eq!(no.exit_code, EXIT_FALSE);
        let report = no.report.unwrap();
        assert_eq!(report.prime, Some(11));
        assert_eq!(report.failure_bound_exact, "(4/11)^20");
        assert!(report.failure_bound <= (4f64 / 11.0).powi(20) * (1.0 + 1e-12));
    }

    #[test]
    fn malformed_input() {
        let out = decide_text("{\"problem\": \"pam\"", &RunOptions::with_seed(1));
        assert_eq!(out.exit_code, EXIT_INPUT);
        assert!(out.report.is_none());
        assert!(!out.diagnostics.is_empty());
    }

    #[test]
    fn bad_prime_override_is_input_error() {
        let mut opts = RunOptions::with_seed(1);
        opts.prime_override = Some(7);
        assert_eq!(decide_text(&c4(2), &opts).exit_code, EXIT_INPUT);
        opts.prime_override = Some(33);
        assert_eq!(decide_text(&c4(2), &opts).exit_code, EXIT_INPUT);
        opts.prime_override = Some(101);
        let out = decide_text(&c4(2), &opts);
        assert_eq!(out.report.unwrap().prime, Some(101));
    }

    #[test]
    fn grid_cap_exit() {
        let mut opts = RunOptions::with_seed(1);
        opts.grid_cap = 2;
        assert_eq!(decide_text(&c4(2), &opts).exit_code, EXIT_GRID_CAP);
    }

    #[test]
    fn pam_two_plus_two() {
        let doc = r#"{"problem": "pam", "degrees": {"a":1,"b":1,"c":1,"d":1},
            "partition": [["a","b"],["c","d"]], "pam": [[0,2],[2,0]], "blue_edges": [["a","c"]]}"#;
        let mut opts = RunOptions::with_seed(3);
        opts.verify = true;
        let out = construct_text(doc, &opts);
        assert_eq!(out.exit_code, EXIT_TRUE, "{:?}", out.diagnostics);
        let report = out.report.unwrap();
        assert_eq!(report.answer, "SOLVED");
        assert_eq!(
            report.solution.unwrap(),
            vec![["a".to_string(), "d".to_string()], ["b".to_string(), "c".to_string()]]
        );
        assert_eq!(report.verified.as_deref(), Some("agree"));

        let infeasible = doc.replace("[[0,2],[2,0]]", "[[0,1],[1,0]]");
        let out = construct_text(&infeasible, &opts);
        assert_eq!(out.exit_code, EXIT_FALSE);
        let report = out.report.unwrap();
        assert_eq!(report.answer, "INFEASIBLE");
        assert!(report.refutation.is_some());
        assert_eq!(report.verified.as_deref(), Some("agree"));
    }

    #[test]
    fn verify_on_eight_vertices() {
        let doc = r#"{"problem": "dominating-matching",
            "vertices": ["0","1","2","3","4","5","6","7"],
            "edges": [["0","1"],["1","2"],["2","3"],["3","4"],["4","5"],["5","6"],["6","7"],["7","0"],["0","4"],["1","5"]],
            "classes": [{"name": "chords", "edges": [8, 9], "min": 2}]}"#;
        let mut opts = RunOptions::with_seed(11);
        opts.verify = true;
        let out = construct_text(doc, &opts);
        let report = out.report.unwrap();
        assert_eq!(report.verified.as_deref(), Some("agree"));
        assert_eq!(out.exit_code, EXIT_TRUE);
    }

    #[test]
    fn reports_repeat_under_a_seed() {
        let opts = RunOptions::with_seed(99);
        let a = construct_text(&c4(1), &opts).report.unwrap();
        let b = construct_text(&c4(1), &opts).report.unwrap();
        assert_eq!(a.timeless().to_json(), b.timeless().to_json());
    }
}

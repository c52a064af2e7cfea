use serde::{Deserialize, Serialize};

use pfaffmatch::{DecisionReport, FailureBound};

/// What a `decide` or `construct` run prints on standard output.
///
/// `wall_time_ms` is the only field that differs between runs with the same
/// input, flags and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub command: String,
    /// `TRUE`/`FALSE` for decide, `SOLVED`/`INFEASIBLE` for construct.
    pub answer: String,
    /// Edges over the original vertex names, re-validated before printing.
    pub solution: Option<Vec<[String; 2]>>,
    pub prime: Option<u64>,
    pub trials: usize,
    pub trials_run: usize,
    pub seed: u64,
    pub failure_bound: f64,
    pub failure_bound_exact: String,
    pub grid_size: Option<u128>,
    pub pfaffian_evaluations: u64,
    /// Vertex count of the graph the Pfaffians were taken over.
    pub matrix_order: Option<usize>,
    pub decide_calls: Option<usize>,
    pub construction_attempts: Option<usize>,
    pub refutation: Option<String>,
    pub note: Option<String>,
    /// `agree`, `disagree` or `skipped: <reason>` when `--verify` was given.
    pub verified: Option<String>,
    pub wall_time_ms: u64,
}

impl RunReport {
    pub fn new(problem: &str, command: &str, trials: usize, seed: u64) -> Self {
        RunReport {
            problem: problem.into(),
            command: command.into(),
            answer: String::new(),
            solution: None,
            prime: None,
            trials,
            trials_run: 0,
            seed,
            failure_bound: 0.0,
            failure_bound_exact: FailureBound::CERTAIN.to_string(),
            grid_size: None,
            pfaffian_evaluations: 0,
            matrix_order: None,
            decide_calls: None,
            construction_attempts: None,
            refutation: None,
            note: None,
            verified: None,
            wall_time_ms: 0,
        }
    }

    pub fn absorb(&mut self, d: &DecisionReport, matrix_order: usize) {
        self.prime = Some(d.prime.value());
        self.trials_run = d.trials_run;
        self.failure_bound = d.failure_bound.value();
        self.failure_bound_exact = d.failure_bound.to_string();
        self.grid_size = Some(d.grid_size);
        self.pfaffian_evaluations = d.pfaffian_evaluations;
        self.matrix_order = Some(matrix_order);
        if let Some(o) = &d.obstruction {
            self.refutation = Some(o.to_string());
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The report with `wall_time_ms` zeroed, for run-to-run comparison.
    pub fn timeless(&self) -> RunReport {
        RunReport {
            wall_time_ms: 0,
            ..self.clone()
        }
    }
}

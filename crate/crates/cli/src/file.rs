//! The JSON problem file.

use std::path::Path;

use serde::{Deserialize, Serialize};
use subproj_core::feasibility::{DEFAULT_EPSILON, DEFAULT_MAX_ITER, DEFAULT_TOL};
use subproj_core::{ControlSequence, FunctionSpec, Problem, Relaxation, SelectionStrategy, Vector};

use crate::error::{CliError, CliResult};

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dimension: usize,
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub control: ControlSequence,
    #[serde(default)]
    pub relaxation: Relaxation,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Defaults to the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vector>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_witness: Option<Vector>,
}

impl ProblemFile {
    /// Parses and checks dimensions; numerics are not touched.
    pub fn parse(text: &str) -> CliResult<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        file.check_dimensions()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    fn check_dimensions(&self) -> CliResult<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(CliError::Schema("dimension must be positive".into()));
        }
        if self.functions.is_empty() {
            return Err(CliError::Schema("functions must not be empty".into()));
        }
        let dims = self.functions.iter().map(FunctionSpec::dim);
        let vectors = [&self.x0, &self.feasible_witness].into_iter().flatten().map(Vector::dim);
        match dims.chain(vectors).find(|&k| k != d) {
            Some(got) => Err(CliError::Schema(format!("dimension is {d} but an entry has dimension {got}"))),
            None => Ok(()),
        }
    }

    /// The single function of a projection or analysis file.
    pub fn single_function(&self) -> CliResult<&FunctionSpec> {
        match self.functions.as_slice() {
            [f] => Ok(f),
            fs => Err(CliError::Schema(format!("expected exactly one function, found {}", fs.len()))),
        }
    }

    /// The solver problem, every function using `strategy`.
    pub fn to_problem(&self, strategy: SelectionStrategy) -> Problem {
        let mut p = Problem::new(self.functions.clone(), self.x0.clone().unwrap_or_else(|| Vector::zeros(self.dimension)))
            .with_control(self.control.clone())
            .with_relaxation(self.relaxation.clone())
            .with_epsilon(self.epsilon)
            .with_tol(self.tol)
            .with_max_iter(self.max_iter)
            .with_selections(vec![strategy; self.functions.len()]);
        p.feasible_witness = self.feasible_witness.clone();
        p
    }

    pub fn from_problem(p: &Problem) -> Self {
        ProblemFile {
            dimension: p.dimension(),
            functions: p.functions.clone(),
            control: p.control.clone(),
            relaxation: p.relaxation.clone(),
            epsilon: p.epsilon,
            x0: Some(p.x0.clone()),
            tol: p.tol,
            max_iter: p.max_iter,
            feasible_witness: p.feasible_witness.clone(),
        }
    }
}

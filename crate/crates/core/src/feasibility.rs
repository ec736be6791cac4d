//! Relaxed quasi-cyclic subgradient projection method for
//! `find x with fᵢ(x) ≤ 0 for all i`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{FunctionSpec, SelectionStrategy};
use crate::projector::{relax, sproj, Status};
use crate::vector::Vector;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_EPSILON: f64 = 0.05;
const MIN_STEP: f64 = 1e-300;

/// Order in which constraints are visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSequence {
    /// `0, 1, …, m−1, 0, 1, …`; every window of length `m` covers all indices.
    #[default]
    Cyclic,
    /// Most violated constraint first, among the picks after which every
    /// index `i` can still recur within each window of length `windows[i]`.
    QuasiCyclic { windows: Vec<usize> },
    /// Periodic repetition of `indices`, with optional declared windows
    /// (default: the period).
    Explicit {
        indices: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        windows: Option<Vec<usize>>,
    },
}

/// Relaxation parameters `λₙ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Relaxation {
    Constant { lambda: f64 },
    /// `λₙ = values[n mod len]`.
    Cyclic { values: Vec<f64> },
}

impl Default for Relaxation {
    fn default() -> Self {
        Relaxation::Constant { lambda: 1.0 }
    }
}

impl Relaxation {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Relaxation::Constant { lambda } => *lambda,
            Relaxation::Cyclic { values } => values[n % values.len()],
        }
    }

    /// Every value must lie in `[ε, 2−ε]`.
    pub fn validate(&self, epsilon: f64) -> Result<()> {
        let values: &[f64] = match self {
            Relaxation::Constant { lambda } => std::slice::from_ref(lambda),
            Relaxation::Cyclic { values } => values,
        };
        if values.is_empty() {
            return Err(Error::InvalidParameter("relaxation schedule is empty".into()));
        }
        let (lo, hi) = (epsilon, 2.0 - epsilon);
        match values.iter().find(|l| !(lo..=hi).contains(*l)) {
            Some(&lambda) => Err(Error::RelaxationOutOfRange { lambda, lo, hi }),
            None => Ok(()),
        }
    }
}

/// Index `i` missing from the window `[window_start, window_start + window_len)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlViolation {
    pub index: usize,
    pub window_start: usize,
    pub window_len: usize,
}

fn windows_for(c: &ControlSequence, m: usize) -> Vec<usize> {
    match c {
        ControlSequence::Cyclic => vec![m; m],
        ControlSequence::QuasiCyclic { windows } => windows.clone(),
        ControlSequence::Explicit { indices, windows } => windows.clone().unwrap_or_else(|| vec![indices.len(); m]),
    }
}

/// Cap on the states explored when certifying that windows can still be met.
const VIABILITY_BUDGET: usize = 1_000_000;

/// Scheduler behind the quasi-cyclic control.
///
/// The state is the slack `r[i]`: index `i` must be visited within the next
/// `r[i] + 1` steps. A pick is admissible when some infinite continuation from
/// the resulting state meets every window; admissibility is decided by a
/// depth-first search for a cycle in the finite state graph.
struct Scheduler {
    windows: Vec<usize>,
    slack: Vec<usize>,
    last: Vec<i64>,
    viable: HashMap<Vec<usize>, bool>,
}

impl Scheduler {
    fn new(windows: Vec<usize>) -> Self {
        let m = windows.len();
        let slack = windows.iter().map(|w| w.saturating_sub(1)).collect();
        Scheduler { windows, slack, last: vec![-1; m], viable: HashMap::new() }
    }

    fn successor(&self, r: &[usize], j: usize) -> Option<Vec<usize>> {
        let mut next = Vec::with_capacity(r.len());
        for (i, &ri) in r.iter().enumerate() {
            if i == j {
                next.push(self.windows[i] - 1);
            } else if ri == 0 {
                return None;
            } else {
                next.push(ri - 1);
            }
        }
        Some(next)
    }

    /// Candidates in order of urgency, used to steer the search.
    fn by_urgency(r: &[usize]) -> Vec<usize> {
        let mut order: Vec<usize> = (0..r.len()).collect();
        order.sort_by_key(|&i| (r[i], i));
        order
    }

    fn is_viable(&mut self, root: &[usize]) -> Result<bool> {
        if let Some(&known) = self.viable.get(root) {
            return Ok(known);
        }
        let mut on_stack: HashMap<Vec<usize>, ()> = HashMap::new();
        // (state, remaining children, found a viable child)
        let mut stack: Vec<(Vec<usize>, Vec<usize>, bool)> = Vec::new();
        on_stack.insert(root.to_vec(), ());
        stack.push((root.to_vec(), Self::by_urgency(root), false));
        let mut explored = 0usize;
        while let Some(top) = stack.last_mut() {
            if top.2 || top.1.is_empty() {
                let (state, _, ok) = stack.pop().expect("nonempty");
                on_stack.remove(&state);
                self.viable.insert(state, ok);
                if let Some(parent) = stack.last_mut() {
                    parent.2 |= ok;
                }
                continue;
            }
            let j = top.1.remove(0);
            let state = top.0.clone();
            let Some(child) = self.successor(&state, j) else { continue };
            if on_stack.contains_key(&child) {
                stack.last_mut().expect("nonempty").2 = true;
                continue;
            }
            if let Some(&known) = self.viable.get(&child) {
                stack.last_mut().expect("nonempty").2 |= known;
                continue;
            }
            explored += 1;
            if explored > VIABILITY_BUDGET {
                return Err(Error::InvalidControl(format!(
                    "could not certify windows {:?} within {VIABILITY_BUDGET} states",
                    self.windows
                )));
            }
            on_stack.insert(child.clone(), ());
            let order = Self::by_urgency(&child);
            stack.push((child, order, false));
        }
        Ok(self.viable[root])
    }

    /// Checks that the windows can be met from the start.
    fn check(&mut self) -> Result<()> {
        if self.windows.contains(&0) {
            return Err(Error::InvalidControl("windows must be positive".into()));
        }
        let start = self.slack.clone();
        if !self.is_viable(&start)? {
            return Err(Error::InvalidControl(format!("no schedule meets windows {:?}", self.windows)));
        }
        Ok(())
    }

    /// Picks the largest violation, or the least recently visited index
    /// without violation data, among the picks that keep every window
    /// satisfiable; ties go to the lowest index.
    fn next(&mut self, n: usize, violations: Option<&[f64]>) -> Result<usize> {
        let m = self.windows.len();
        let mut order: Vec<usize> = (0..m).collect();
        match violations {
            Some(v) => order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b))),
            None => order.sort_by_key(|&i| (self.last[i], i)),
        }
        for j in order {
            let r = self.slack.clone();
            if let Some(child) = self.successor(&r, j) {
                if self.is_viable(&child)? {
                    self.slack = child;
                    self.last[j] = n as i64;
                    return Ok(j);
                }
            }
        }
        Err(Error::InvalidControl(format!("no schedule meets windows {:?}", self.windows)))
    }
}

/// The first `len` indices of a state-free control sequence. Quasi-cyclic
/// control is rendered without violation data, preferring the least recently
/// visited index; the prefix stops early if the windows cannot be met.
pub fn control_prefix(c: &ControlSequence, m: usize, len: usize) -> Vec<usize> {
    match c {
        ControlSequence::Cyclic => (0..len).map(|n| n % m).collect(),
        ControlSequence::Explicit { indices, .. } => (0..len).map(|n| indices[n % indices.len()]).collect(),
        ControlSequence::QuasiCyclic { windows } if windows.contains(&0) => Vec::new(),
        ControlSequence::QuasiCyclic { windows } => {
            let mut s = Scheduler::new(windows.clone());
            (0..len).map_while(|n| s.next(n, None).ok()).collect()
        }
    }
}

/// Windows of length `windows[i]` inside `sequence` that miss index `i`.
pub fn scan_windows(sequence: &[usize], windows: &[usize]) -> Vec<ControlViolation> {
    let mut out = Vec::new();
    for (index, &len) in windows.iter().enumerate() {
        if len == 0 || len > sequence.len() {
            out.push(ControlViolation { index, window_start: 0, window_len: len });
            continue;
        }
        for start in 0..=sequence.len() - len {
            if !sequence[start..start + len].contains(&index) {
                out.push(ControlViolation { index, window_start: start, window_len: len });
            }
        }
    }
    out
}

/// Coverage check over `horizon` steps: empty iff every index appears in
/// every window of its declared length.
pub fn validate_control(c: &ControlSequence, m: usize, horizon: usize) -> Vec<ControlViolation> {
    let windows = windows_for(c, m);
    if let ControlSequence::Explicit { indices, .. } = c {
        if indices.is_empty() || indices.iter().any(|&i| i >= m) {
            return (0..m).map(|index| ControlViolation { index, window_start: 0, window_len: 0 }).collect();
        }
    }
    if windows.len() != m {
        return (0..m).map(|index| ControlViolation { index, window_start: 0, window_len: 0 }).collect();
    }
    scan_windows(&control_prefix(c, m, horizon), &windows)
}

/// A feasibility problem and its solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub functions: Vec<FunctionSpec>,
    /// One per function; empty means least-index everywhere.
    pub selections: Vec<SelectionStrategy>,
    pub control: ControlSequence,
    pub relaxation: Relaxation,
    pub epsilon: f64,
    pub x0: Vector,
    pub tol: f64,
    pub max_iter: usize,
    pub feasible_witness: Option<Vector>,
}

impl Problem {
    /// Defaults: cyclic control, `λ ≡ 1`, `ε = 0.05`, `tol = 1e−8`,
    /// `max_iter = 10⁵`.
    pub fn new(functions: Vec<FunctionSpec>, x0: Vector) -> Self {
        Problem {
            functions,
            selections: Vec::new(),
            control: ControlSequence::Cyclic,
            relaxation: Relaxation::default(),
            epsilon: DEFAULT_EPSILON,
            x0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            feasible_witness: None,
        }
    }

    pub fn with_control(mut self, control: ControlSequence) -> Self {
        self.control = control;
        self
    }

    pub fn with_relaxation(mut self, relaxation: Relaxation) -> Self {
        self.relaxation = relaxation;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_selections(mut self, selections: Vec<SelectionStrategy>) -> Self {
        self.selections = selections;
        self
    }

    pub fn with_witness(mut self, witness: Vector) -> Self {
        self.feasible_witness = Some(witness);
        self
    }

    pub fn dimension(&self) -> usize {
        self.x0.dim()
    }

    pub fn selection(&self, i: usize) -> SelectionStrategy {
        self.selections.get(i).copied().unwrap_or_default()
    }

    /// Checks every invariant that does not need the iterates.
    pub fn validate(&self) -> Result<()> {
        let m = self.functions.len();
        if m == 0 {
            return Err(Error::InvalidParameter("problem needs at least one function".into()));
        }
        let dim = self.dimension();
        for f in &self.functions {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: f.dim() });
            }
            if f.has_bare_indicator() {
                return Err(Error::UnsupportedAtom("bare indicator in a feasibility problem".into()));
            }
            if !f.is_real_valued() {
                return Err(Error::InvalidParameter(format!("{} is not finite on the whole space", f.label())));
            }
        }
        if !self.selections.is_empty() && self.selections.len() != m {
            return Err(Error::InvalidParameter(format!("{} selections for {m} functions", self.selections.len())));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1], got {}", self.epsilon)));
        }
        self.relaxation.validate(self.epsilon)?;
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if let Some(y) = &self.feasible_witness {
            y.check_dim(dim)?;
            for f in &self.functions {
                let fy = f.eval(y)?.to_f64();
                if fy > 0.0 {
                    return Err(Error::InfeasibleWitness { value: fy });
                }
            }
        }
        let windows = windows_for(&self.control, m);
        if windows.len() != m || windows.contains(&0) {
            return Err(Error::InvalidControl(format!("need one positive window per function, got {windows:?}")));
        }
        if let ControlSequence::Explicit { indices, .. } = &self.control {
            if indices.is_empty() || indices.iter().any(|&i| i >= m) {
                return Err(Error::InvalidControl("explicit indices must be nonempty and < m".into()));
            }
        }
        let period = match &self.control {
            ControlSequence::Cyclic => Some(m),
            ControlSequence::Explicit { indices, .. } => Some(indices.len()),
            ControlSequence::QuasiCyclic { .. } => None,
        };
        if let ControlSequence::QuasiCyclic { windows } = &self.control {
            Scheduler::new(windows.clone()).check()?;
        }
        if let Some(period) = period {
            let horizon = period + windows.iter().copied().max().unwrap_or(1);
            let violations = validate_control(&self.control, m, horizon);
            if let Some(v) = violations.first() {
                return Err(Error::InvalidControl(format!(
                    "index {} missing from window starting at {} of length {}",
                    v.index, v.window_start, v.window_len
                )));
            }
        }
        Ok(())
    }
}

/// `maxᵢ [fᵢ(x)]⁺`.
pub fn residual(p: &Problem, x: &Vector) -> Result<f64> {
    Ok(values(p, x)?.into_iter().fold(0.0, |acc, v| acc.max(v)))
}

fn values(p: &Problem, x: &Vector) -> Result<Vec<f64>> {
    p.functions.iter().map(|f| f.eval_finite(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    MaxIterReached,
}

/// One solver step, recorded before the update `xₙ ↦ xₙ₊₁`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    pub index: usize,
    pub lambda: f64,
    /// `maxᵢ [fᵢ(xₙ)]⁺`.
    pub residual: f64,
    /// `‖xₙ₊₁ − xₙ‖`.
    pub step_norm: f64,
    /// `‖xₙ − y‖` for the witness `y`.
    pub dist_to_witness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub x_final: Vector,
    pub final_residual: f64,
    pub assumptions: Vec<String>,
}

pub const BOUNDED_SUBDIFFERENTIAL_ASSUMPTION: &str =
    "subdifferentials are assumed bounded on bounded sets; this is not verified for user oracles";

/// Runs `xₙ₊₁ = xₙ + λₙ(G_{f_{i(n)}} xₙ − xₙ)` until the residual drops to
/// `tol` or `max_iter` steps are taken.
pub fn solve(p: &Problem) -> Result<(Vector, SolveTrace)> {
    p.validate()?;
    let m = p.functions.len();
    let windows = windows_for(&p.control, m);
    let mut scheduler = Scheduler::new(windows.clone());
    let mut visited = Vec::new();
    let mut x = p.x0.clone();
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIterReached;
    for n in 0..=p.max_iter {
        let vals = values(p, &x)?;
        let res = vals.iter().fold(0.0f64, |acc, v| acc.max(*v));
        if res <= p.tol {
            status = SolveStatus::Converged;
            break;
        }
        if n == p.max_iter {
            break;
        }
        let i = match &p.control {
            ControlSequence::Cyclic => n % m,
            ControlSequence::Explicit { indices, .. } => indices[n % indices.len()],
            ControlSequence::QuasiCyclic { .. } => scheduler.next(n, Some(&vals))?,
        };
        visited.push(i);
        let lambda = p.relaxation.at(n);
        let out = sproj(&p.functions[i], &x, p.selection(i))?;
        if out.status == Status::Projected {
            let u = out.subgradient_used.as_ref().expect("projected outcome carries u");
            let step = out.f_value / u.norm_sq();
            if step < MIN_STEP {
                return Err(Error::StalledStep { iteration: n, step });
            }
        }
        let next = relax(&x, &out.point, lambda)?.ensure_finite("iterate")?;
        records.push(IterationRecord {
            n,
            index: i,
            lambda,
            residual: res,
            step_norm: next.dist(&x),
            dist_to_witness: p.feasible_witness.as_ref().map(|y| x.dist(y)),
        });
        x = next;
    }
    if let ControlSequence::QuasiCyclic { .. } = p.control {
        if let Some(v) = scan_windows(&visited, &windows).into_iter().find(|v| v.window_len <= visited.len()) {
            return Err(Error::InvalidControl(format!(
                "executed sequence misses index {} in window starting at {}",
                v.index, v.window_start
            )));
        }
    }
    let final_residual = residual(p, &x)?;
    let trace = SolveTrace {
        records,
        status,
        x_final: x.clone(),
        final_residual,
        assumptions: vec![BOUNDED_SUBDIFFERENTIAL_ASSUMPTION.to_string()],
    };
    Ok((x, trace))
}

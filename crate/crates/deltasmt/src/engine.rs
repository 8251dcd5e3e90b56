//! The solver state machine: assignment refinement, conflict resolution,
//! backjumping and linearisation orchestrated over the separated form, with
//! resource limits, statistics and a replayable trace.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_traits::Signed;
use thiserror::Error;

use crate::linarith::{
    backjump_prefix, clause_feasible_values, falsified_at, feasible_set, pick_value, IntervalSet,
};
use crate::linearise::{box_exclusion_clause, nlin_step, LinMode, NlinStepResult};
use crate::num::Rational;
use crate::realeval::modulus::{uniform_modulus, Modulus};
use crate::term::{
    Assignment, LinearClause, Status, SymbolTable, SolverState, VarId,
};
use crate::transform::{bounds_analysis, BoundsReport, SeparatedForm};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("delta must be positive")]
    InvalidDelta,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Resource limits for a run.
#[derive(Clone, Debug)]
pub struct Limits {
    pub max_steps: u64,
    pub wall_clock: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 1_000_000,
            wall_clock: None,
        }
    }
}

/// One rule application, with enough payload to replay the run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Assign {
        step: u64,
        var: VarId,
        value: Rational,
    },
    Resolve {
        step: u64,
        var: VarId,
        clauses: Vec<LinearClause>,
    },
    Backjump {
        step: u64,
        prefix: usize,
    },
    Linearise {
        step: u64,
        constraint: usize,
        center: Vec<(VarId, Rational)>,
        eps: Rational,
        mode: LinMode,
    },
    Sat {
        step: u64,
    },
    Unsat {
        step: u64,
    },
    DeltaSat {
        step: u64,
    },
}

impl TraceEvent {
    pub fn rule(&self) -> &'static str {
        match self {
            TraceEvent::Assign { .. } => "A",
            TraceEvent::Resolve { .. } => "R",
            TraceEvent::Backjump { .. } => "B",
            TraceEvent::Linearise { .. } => "L",
            TraceEvent::Sat { .. } => "FSAT",
            TraceEvent::Unsat { .. } => "FUNSAT",
            TraceEvent::DeltaSat { .. } => "FDSAT",
        }
    }

    /// One JSON object per line with a fixed key order.
    pub fn to_json_line(&self, symbols: &SymbolTable) -> String {
        fn q(s: &str) -> String {
            let mut out = String::with_capacity(s.len() + 2);
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    c => out.push(c),
                }
            }
            out.push('"');
            out
        }
        fn clause_json(c: &LinearClause, symbols: &SymbolTable) -> String {
            let atoms: Vec<String> = c
                .atoms()
                .iter()
                .map(|a| {
                    let coeffs: Vec<String> = a
                        .coeffs()
                        .iter()
                        .map(|(v, cf)| format!("{}:{}", q(symbols.name(*v)), q(&cf.to_string())))
                        .collect();
                    format!(
                        "{{\"const\":{},\"coeffs\":{{{}}},\"rel\":{}}}",
                        q(&a.constant().to_string()),
                        coeffs.join(","),
                        q(a.rel().symbol())
                    )
                })
                .collect();
            format!("[{}]", atoms.join(","))
        }
        match self {
            TraceEvent::Assign { step, var, value } => format!(
                "{{\"step\":{},\"rule\":\"A\",\"var\":{},\"value\":{}}}",
                step,
                q(symbols.name(*var)),
                q(&value.to_string())
            ),
            TraceEvent::Resolve { step, var, clauses } => {
                let cs: Vec<String> = clauses.iter().map(|c| clause_json(c, symbols)).collect();
                format!(
                    "{{\"step\":{},\"rule\":\"R\",\"var\":{},\"clauses\":[{}]}}",
                    step,
                    q(symbols.name(*var)),
                    cs.join(",")
                )
            }
            TraceEvent::Backjump { step, prefix } => {
                format!("{{\"step\":{step},\"rule\":\"B\",\"prefix\":{prefix}}}")
            }
            TraceEvent::Linearise {
                step,
                constraint,
                center,
                eps,
                mode,
            } => {
                let c: Vec<String> = center
                    .iter()
                    .map(|(v, x)| format!("{}:{}", q(symbols.name(*v)), q(&x.to_string())))
                    .collect();
                format!(
                    "{{\"step\":{},\"rule\":\"L\",\"constraint\":{},\"center\":{{{}}},\"eps\":{},\"strategy\":{}}}",
                    step,
                    constraint,
                    c.join(","),
                    q(&eps.to_string()),
                    q(mode.tag())
                )
            }
            TraceEvent::Sat { step } => format!("{{\"step\":{step},\"rule\":\"FSAT\"}}"),
            TraceEvent::Unsat { step } => format!("{{\"step\":{step},\"rule\":\"FUNSAT\"}}"),
            TraceEvent::DeltaSat { step } => format!("{{\"step\":{step},\"rule\":\"FDSAT\"}}"),
        }
    }
}

/// Per-constraint linearisation statistics.
#[derive(Clone, Debug, Default)]
pub struct LinStats {
    pub count: u64,
    pub eps_min: Option<Rational>,
    pub eps_max: Option<Rational>,
}

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub steps: u64,
    pub assigns: u64,
    pub resolutions: u64,
    pub backjumps: u64,
    pub linearisations: u64,
    pub per_constraint: Vec<LinStats>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub model: Option<Assignment>,
    pub trace: Vec<TraceEvent>,
    pub stats: Stats,
    pub notes: Vec<String>,
    pub bounds: BoundsReport,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub delta: Rational,
    pub mode: LinMode,
    pub limits: Limits,
}

struct FeasibleMemo {
    trail: Vec<(VarId, Rational)>,
    var: VarId,
    set: IntervalSet,
    clauses_seen: usize,
}

/// The solver: a state plus the scratch structures that keep stepping cheap.
pub struct Solver {
    state: SolverState,
    n_vars: usize,
    moduli: Vec<Option<Modulus>>,
    delta: Rational,
    mode: LinMode,
    limits: Limits,
    clause_index: HashSet<LinearClause>,
    /// indices of clauses known false under the current assignment
    pending_false: Vec<usize>,
    memo: Option<FeasibleMemo>,
    stats: Stats,
    trace: Vec<TraceEvent>,
    notes: Vec<String>,
    started: Instant,
}

impl Solver {
    pub fn new(sf: &SeparatedForm, opts: &SolveOptions, bounds: &BoundsReport) -> Result<Self, SolveError> {
        if !opts.delta.is_positive() {
            return Err(SolveError::InvalidDelta);
        }
        let mut moduli = Vec::with_capacity(sf.nonlinear.len());
        let mut notes = Vec::new();
        for (i, p) in sf.nonlinear.iter().enumerate() {
            let m = match &bounds.constraint_boxes[i] {
                Some(box_) => match uniform_modulus(p.term(), p.vars(), box_) {
                    Ok(m) => Some(m),
                    Err(_) => {
                        notes.push(format!(
                            "constraint {i}: no uniform modulus; local fallback"
                        ));
                        None
                    }
                },
                None => {
                    notes.push(format!(
                        "constraint {i}: unbounded domain box; local fallback"
                    ));
                    None
                }
            };
            moduli.push(m);
        }
        let state = SolverState::initial(sf.linear.clone(), sf.nonlinear.clone());
        let clause_index: HashSet<LinearClause> = state.linear.iter().cloned().collect();
        Ok(Solver {
            state,
            n_vars: sf.symbols.len(),
            moduli,
            delta: opts.delta.clone(),
            mode: opts.mode,
            limits: opts.limits.clone(),
            clause_index,
            pending_false: Vec::new(),
            memo: None,
            stats: Stats {
                per_constraint: vec![LinStats::default(); sf.nonlinear.len()],
                ..Stats::default()
            },
            trace: Vec::new(),
            notes,
            started: Instant::now(),
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    fn first_unassigned(&self) -> Option<VarId> {
        (0..self.n_vars as u32)
            .map(VarId)
            .find(|v| !self.state.alpha.is_assigned(*v))
    }

    /// Feasible set for `z` under the current assignment, reusing the last
    /// computation when only new clauses were added since.
    fn feasible_for(&mut self, z: VarId) -> Result<IntervalSet, SolveError> {
        let trail = self.state.alpha.trail().to_vec();
        if let Some(memo) = &mut self.memo {
            if memo.var == z && memo.trail == trail {
                let mut set = memo.set.clone();
                for clause in &self.state.linear[memo.clauses_seen..] {
                    if let Some(vals) = clause_feasible_values(clause, &self.state.alpha, z) {
                        set = set.intersect(&vals);
                    }
                }
                memo.set = set.clone();
                memo.clauses_seen = self.state.linear.len();
                return Ok(set);
            }
        }
        let set = feasible_set(&self.state.linear, &self.state.alpha, z)
            .map_err(|e| SolveError::Internal(e.to_string()))?;
        self.memo = Some(FeasibleMemo {
            trail,
            var: z,
            set: set.clone(),
            clauses_seen: self.state.linear.len(),
        });
        Ok(set)
    }

    fn insert_clause(&mut self, clause: LinearClause, falsified: bool) -> Result<(), SolveError> {
        if !self.clause_index.insert(clause.clone()) {
            return Err(SolveError::Internal(
                "clause inserted twice; lemmas must never repeat".into(),
            ));
        }
        self.state.linear.push(clause);
        if falsified {
            self.pending_false.push(self.state.linear.len() - 1);
        }
        Ok(())
    }

    /// Applies exactly one rule. The rule choice follows the calculus flow:
    /// a falsified linear set backjumps (or closes the run on a ground
    /// contradiction); otherwise an unassigned variable is refined or
    /// resolved; otherwise the nonlinear check either accepts exactly,
    /// accepts up to delta, or linearises.
    pub fn step(&mut self) -> Result<TraceEvent, SolveError> {
        debug_assert_eq!(self.state.status, Status::Running);
        let step = self.stats.steps + 1;

        if let Some(limit) = self.limits.wall_clock {
            if self.started.elapsed() > limit {
                self.state.status = Status::ResourceOut;
                self.notes.push("wall clock limit exceeded".into());
                return Ok(TraceEvent::Backjump { step, prefix: self.state.alpha.len() });
            }
        }

        // 1. linear falsity: backjump or final unsat
        if !self.pending_false.is_empty() {
            let pending: Vec<LinearClause> = self
                .pending_false
                .iter()
                .map(|&i| self.state.linear[i].clone())
                .collect();
            debug_assert!(pending
                .iter()
                .all(|c| c.eval(&self.state.alpha) == Some(false)));
            let t = falsified_at(&pending, &self.state.alpha)
                .ok_or_else(|| SolveError::Internal("pending clause not false".into()))?;
            let event = if t == 0 {
                self.state.status = Status::Unsat;
                TraceEvent::Unsat { step }
            } else {
                let gamma = backjump_prefix(&pending, &self.state.alpha)
                    .map_err(|e| SolveError::Internal(e.to_string()))?;
                let prefix = gamma.len();
                self.state.alpha = gamma;
                self.pending_false.clear();
                TraceEvent::Backjump { step, prefix }
            };
            self.stats.steps = step;
            self.stats.backjumps += u64::from(matches!(event, TraceEvent::Backjump { .. }));
            self.trace.push(event.clone());
            return Ok(event);
        }

        // 2. assignment refinement or resolution
        if let Some(z) = self.first_unassigned() {
            let fs = self.feasible_for(z)?;
            let event = if let Some(q) = pick_value(&fs) {
                self.state.alpha.push(z, q.clone());
                self.stats.assigns += 1;
                TraceEvent::Assign {
                    step,
                    var: z,
                    value: q,
                }
            } else {
                let clauses = crate::linarith::resolvent(&self.state.linear, &self.state.alpha, z)
                    .map_err(|e| SolveError::Internal(e.to_string()))?;
                for c in &clauses {
                    self.insert_clause(c.clone(), true)?;
                }
                self.stats.resolutions += 1;
                TraceEvent::Resolve {
                    step,
                    var: z,
                    clauses,
                }
            };
            self.stats.steps = step;
            self.trace.push(event.clone());
            return Ok(event);
        }

        // 3. total assignment: exact check, then the delta rule
        if self.exact_sat_check() {
            self.state.status = Status::Sat;
            let event = TraceEvent::Sat { step };
            self.stats.steps = step;
            self.trace.push(event.clone());
            return Ok(event);
        }
        match nlin_step(
            &self.state.nonlinear,
            &self.moduli,
            &self.state.alpha,
            &self.delta,
            self.mode,
        ) {
            Ok(NlinStepResult::DeltaSat) => {
                self.state.status = Status::DeltaSat;
                let event = TraceEvent::DeltaSat { step };
                self.stats.steps = step;
                self.trace.push(event.clone());
                Ok(event)
            }
            Ok(NlinStepResult::Lin {
                constraint,
                clause,
                center,
                eps,
                mode_used,
            }) => {
                self.insert_clause(clause, true)?;
                self.stats.linearisations += 1;
                let st = &mut self.stats.per_constraint[constraint];
                st.count += 1;
                st.eps_min = Some(match st.eps_min.take() {
                    Some(m) => m.min(eps.clone()),
                    None => eps.clone(),
                });
                st.eps_max = Some(match st.eps_max.take() {
                    Some(m) => m.max(eps.clone()),
                    None => eps.clone(),
                });
                let event = TraceEvent::Linearise {
                    step,
                    constraint,
                    center,
                    eps,
                    mode: mode_used,
                };
                self.stats.steps = step;
                self.trace.push(event.clone());
                Ok(event)
            }
            Err(e) => {
                self.state.status = Status::ResourceOut;
                self.notes.push(format!("evaluation failure: {e}"));
                let event = TraceEvent::Backjump {
                    step,
                    prefix: self.state.alpha.len(),
                };
                self.stats.steps = step;
                Ok(event)
            }
        }
    }

    /// Exact satisfaction is decidable only when every nonlinear term is a
    /// polynomial; then the final-sat rule may fire.
    fn exact_sat_check(&self) -> bool {
        self.state
            .nonlinear
            .iter()
            .all(|p| p.term().is_polynomial())
            && self.state.nonlinear.iter().all(|p| {
                p.term()
                    .eval_exact(&self.state.alpha)
                    .is_some_and(|v| p.rel().as_rel().holds(&v))
            })
    }

    fn finish(self) -> Outcome {
        let model = match self.state.status {
            Status::Sat | Status::DeltaSat => Some(self.state.alpha.clone()),
            _ => None,
        };
        Outcome {
            status: self.state.status,
            model,
            trace: self.trace,
            stats: self.stats,
            notes: self.notes,
            bounds: BoundsReport {
                var_bounds: vec![],
                bounded: true,
                constraint_boxes: vec![],
                domain_violations: vec![],
            },
        }
    }
}

/// Runs the solver to a terminal status. Domain violations reported by the
/// bounds analysis yield an unknown result; unbounded instances run anyway
/// under the step limit with a warning.
pub fn solve(sf: &SeparatedForm, opts: &SolveOptions) -> Result<Outcome, SolveError> {
    let bounds = bounds_analysis(sf);
    if !bounds.domain_violations.is_empty() {
        return Ok(Outcome {
            status: Status::ResourceOut,
            model: None,
            trace: vec![],
            stats: Stats::default(),
            notes: bounds
                .domain_violations
                .iter()
                .map(|v| format!("domain violation: {v}"))
                .collect(),
            bounds,
        });
    }
    let mut solver = Solver::new(sf, opts, &bounds)?;
    if !bounds.bounded {
        solver
            .notes
            .push("instance is not bounded; termination is not guaranteed".into());
    }
    while solver.state.status == Status::Running {
        if solver.stats.steps >= solver.limits.max_steps {
            solver.state.status = Status::ResourceOut;
            solver.notes.push("step limit exceeded".into());
            break;
        }
        solver.step()?;
    }
    let mut outcome = solver.finish();
    outcome.bounds = bounds;
    Ok(outcome)
}

/// Replays a trace against the initial state, reproducing the final state.
pub fn replay(sf: &SeparatedForm, trace: &[TraceEvent]) -> SolverState {
    let mut state = SolverState::initial(sf.linear.clone(), sf.nonlinear.clone());
    for event in trace {
        match event {
            TraceEvent::Assign { var, value, .. } => state.alpha.push(*var, value.clone()),
            TraceEvent::Resolve { clauses, .. } => {
                for c in clauses {
                    state.linear.push(c.clone());
                }
            }
            TraceEvent::Backjump { prefix, .. } => state.alpha.truncate(*prefix),
            TraceEvent::Linearise { center, eps, .. } => {
                state.linear.push(box_exclusion_clause(center, eps));
            }
            TraceEvent::Sat { .. } => state.status = Status::Sat,
            TraceEvent::Unsat { .. } => state.status = Status::Unsat,
            TraceEvent::DeltaSat { .. } => state.status = Status::DeltaSat,
        }
    }
    state
}

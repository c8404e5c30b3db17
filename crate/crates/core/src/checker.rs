//! Bounded exhaustive exploration over error sequences.
//!
//! The only nondeterminism left in the lockstep models is whether each
//! receive event is corrupted, so a run is fully determined by its
//! [`InterleavedTrace`]. Exploration walks the binary tree of error choices
//! depth-first, checking the invariant after every event. Once both
//! schedules are delivered the run stutters, and the whole remaining subtree
//! is counted without being walked.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::faults::{InterleavedTrace, TraceError, MAX_ENUM_LEN};
use crate::protocols::ab::{AbReception, PendingMsg};
use crate::protocols::legacy::OutputLine;
use crate::protocols::lynch::{LynchReception, LynchState};
use crate::protocols::{
    ab_init, is_prefix, lynch_init, AbConfig, AbState, Label, LynchIc, Outcome, ProtocolError,
    Schedules, Terminal, GARBAGE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("simulation says IC {ic} is {simulated} but the analytic predicate says {predicted}")]
    OracleMismatch {
        ic: String,
        simulated: &'static str,
        predicted: &'static str,
    },
}

fn check_bound(n: usize) -> Result<(), CheckError> {
    if n > MAX_ENUM_LEN {
        return Err(TraceError::BoundExceeded {
            requested: n,
            max: MAX_ENUM_LEN,
        }
        .into());
    }
    Ok(())
}

/// One receive event of an AB run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunStep {
    /// 1-based event index.
    pub event: usize,
    pub receiver: Terminal,
    pub error: bool,
    pub outcome: Outcome,
    pub incoming: PendingMsg,
    /// State after the receiver's send.
    pub state: AbState,
    pub line: OutputLine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub init: AbState,
    pub errors: InterleavedTrace,
    pub steps: Vec<RunStep>,
}

impl RunTrace {
    pub fn final_state(&self) -> &AbState {
        self.steps.last().map(|s| &s.state).unwrap_or(&self.init)
    }

    pub fn output_lines(&self) -> Vec<OutputLine> {
        self.steps.iter().map(|s| s.line.clone()).collect()
    }

    /// First event after which both schedules are delivered.
    pub fn completed_at(&self) -> Option<usize> {
        if self.init.is_complete() {
            return Some(0);
        }
        self.steps
            .iter()
            .find(|s| s.state.is_complete())
            .map(|s| s.event)
    }
}

/// Value printed in the legacy `error(counter)` field: A's flag for the round.
fn printed_error(errors: &InterleavedTrace, counter: u32) -> bool {
    errors.event(2 * counter as usize - 1).unwrap_or(false)
}

/// Drives an AB run through every event of `errors`.
pub fn run_trace(init: &AbState, errors: &InterleavedTrace) -> Result<RunTrace, CheckError> {
    let mut st = init.clone();
    let mut steps = Vec::with_capacity(errors.len());
    for (i, &error) in errors.bits().iter().enumerate() {
        let rec = st.event(error)?;
        let line = rec.output_line(printed_error(errors, rec.counter));
        st = rec.state.clone();
        steps.push(RunStep {
            event: i + 1,
            receiver: rec.receiver,
            error,
            outcome: rec.outcome,
            incoming: rec.incoming,
            state: rec.state,
            line,
        });
    }
    Ok(RunTrace {
        init: init.clone(),
        errors: errors.clone(),
        steps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LynchRunStep {
    pub event: usize,
    pub reception: LynchReception,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LynchRunTrace {
    pub init: LynchState,
    pub errors: InterleavedTrace,
    pub steps: Vec<LynchRunStep>,
}

impl LynchRunTrace {
    pub fn final_state(&self) -> &LynchState {
        self.steps
            .last()
            .map(|s| &s.reception.state)
            .unwrap_or(&self.init)
    }
}

pub fn run_trace_lynch(
    init: &LynchState,
    errors: &InterleavedTrace,
) -> Result<LynchRunTrace, CheckError> {
    let mut st = init.clone();
    let mut steps = Vec::with_capacity(errors.len());
    for (i, &error) in errors.bits().iter().enumerate() {
        let rec = st.event(error)?;
        st = rec.state.clone();
        steps.push(LynchRunStep {
            event: i + 1,
            reception: rec,
        });
    }
    Ok(LynchRunTrace {
        init: init.clone(),
        errors: errors.clone(),
        steps,
    })
}

/// Each terminal's stored list is a prefix of what the other side sends.
pub fn check_consistent_prefix(st: &AbState) -> bool {
    Terminal::ALL
        .iter()
        .all(|&t| is_prefix(&st.terminal(t).stored, st.schedules.expected_at(t)))
}

/// Structural sanity: bounded stored lists, positive counter, pending message
/// addressed to the terminal whose receive phase it is.
pub fn check_sanity(st: &AbState) -> bool {
    let bounded = Terminal::ALL
        .iter()
        .all(|&t| st.terminal(t).stored.len() <= st.schedules.expected_at(t).len());
    let routed = !st.phase.is_receive() || st.pending.receiver == st.phase.terminal();
    bounded && routed && st.counter >= 1
}

/// Named state predicates exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    ConsistentPrefix,
    Sanity,
    All,
}

impl Invariant {
    pub fn holds(self, st: &AbState) -> bool {
        match self {
            Invariant::ConsistentPrefix => check_consistent_prefix(st),
            Invariant::Sanity => check_sanity(st),
            Invariant::All => check_consistent_prefix(st) && check_sanity(st),
        }
    }
}

impl std::str::FromStr for Invariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "consistent-prefix" => Ok(Invariant::ConsistentPrefix),
            "sanity" => Ok(Invariant::Sanity),
            "all" => Ok(Invariant::All),
            _ => Err(format!(
                "unknown invariant {s:?} (expected consistent-prefix, sanity or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Full-length trace; events after the violation are error-free.
    pub trace: InterleavedTrace,
    /// Event after which the invariant failed (0 = initial state).
    pub step: usize,
    pub state: AbState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    /// Number of complete runs accounted for; always `2^n`.
    pub explored: u64,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "holds (explored {})", self.explored),
            Some(c) => write!(
                f,
                "violated at event {} (trace {}, explored {})",
                c.step, c.trace, self.explored
            ),
        }
    }
}

pub type StepFn = fn(&AbState, bool) -> Result<AbReception, ProtocolError>;

fn standard_step(st: &AbState, error: bool) -> Result<AbReception, ProtocolError> {
    st.event(error)
}

/// Exploration settings. The step function is swappable so that mutants of
/// the protocol can be checked with the same machinery.
#[derive(Clone)]
pub struct Explorer {
    pub init: AbState,
    pub step: StepFn,
    /// Worker threads; 1 runs on the calling thread.
    pub workers: usize,
}

impl Default for Explorer {
    fn default() -> Self {
        Explorer {
            init: ab_init(&AbConfig::default()).expect("default configuration is valid"),
            step: standard_step,
            workers: 1,
        }
    }
}

#[derive(Default)]
struct Acc {
    explored: u64,
    /// Lowest violating prefix index with its depth and state.
    best: Option<(u64, usize, AbState)>,
}

impl Acc {
    fn violation(&mut self, index: u64, depth: usize, st: &AbState) {
        if self.best.as_ref().is_none_or(|(b, _, _)| index < *b) {
            self.best = Some((index, depth, st.clone()));
        }
    }

    fn absorb(&mut self, other: Acc) {
        self.explored += other.explored;
        if let Some((i, d, s)) = other.best {
            self.violation(i, d, &s);
        }
    }
}

struct Node {
    state: AbState,
    depth: usize,
    index: u64,
}

impl Explorer {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_step(mut self, step: StepFn) -> Self {
        self.step = step;
        self
    }

    /// Walks the subtree below `node`. Nodes at `stop` depth are handed to
    /// `frontier` instead of being expanded.
    fn walk<I>(
        &self,
        node: Node,
        n: usize,
        stop: usize,
        inv: &I,
        acc: &mut Acc,
        frontier: &mut Vec<Node>,
    ) -> Result<(), CheckError>
    where
        I: Fn(&AbState) -> bool,
    {
        let remaining = n - node.depth;
        if remaining == 0 || node.state.is_complete() {
            acc.explored += 1u64 << remaining;
            return Ok(());
        }
        if node.depth == stop {
            frontier.push(node);
            return Ok(());
        }
        for error in [false, true] {
            let rec = (self.step)(&node.state, error)?;
            let index = node.index | (u64::from(error) << node.depth);
            let depth = node.depth + 1;
            if !inv(&rec.state) {
                acc.violation(index, depth, &rec.state);
                acc.explored += 1u64 << (n - depth);
                continue;
            }
            self.walk(
                Node {
                    state: rec.state,
                    depth,
                    index,
                },
                n,
                stop,
                inv,
                acc,
                frontier,
            )?;
        }
        Ok(())
    }

    /// Checks `inv` after every event of every error sequence of length `n`.
    pub fn explore<I>(&self, n: usize, inv: I) -> Result<Verdict, CheckError>
    where
        I: Fn(&AbState) -> bool + Sync,
    {
        check_bound(n)?;
        let mut acc = Acc::default();
        if !inv(&self.init) {
            acc.violation(0, 0, &self.init);
            acc.explored = 1u64 << n;
        } else if self.workers <= 1 {
            let root = Node {
                state: self.init.clone(),
                depth: 0,
                index: 0,
            };
            self.walk(root, n, usize::MAX, &inv, &mut acc, &mut Vec::new())?;
        } else {
            // Expand a shallow prefix sequentially, then fan out.
            let split = (usize::BITS - (4 * self.workers).leading_zeros()) as usize;
            let split = split.min(n);
            let root = Node {
                state: self.init.clone(),
                depth: 0,
                index: 0,
            };
            let mut frontier = Vec::new();
            self.walk(root, n, split, &inv, &mut acc, &mut frontier)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .expect("thread pool");
            let parts: Vec<Result<Acc, CheckError>> = pool.install(|| {
                frontier
                    .into_par_iter()
                    .map(|node| {
                        let mut a = Acc::default();
                        self.walk(node, n, usize::MAX, &inv, &mut a, &mut Vec::new())?;
                        Ok(a)
                    })
                    .collect()
            });
            for p in parts {
                acc.absorb(p?);
            }
        }
        let counterexample = acc.best.map(|(index, step, state)| Counterexample {
            trace: InterleavedTrace::from_index(index, n),
            step,
            state,
        });
        Ok(Verdict {
            holds: counterexample.is_none(),
            counterexample,
            explored: acc.explored,
        })
    }

    /// First trace (error-free choices tried first, event 1 first) whose run
    /// completes exactly at event `n`.
    pub fn search_completion(&self, n: usize) -> Result<Option<InterleavedTrace>, CheckError> {
        check_bound(n)?;
        if self.init.is_complete() {
            return Ok((n == 0).then(InterleavedTrace::default));
        }
        let mut bits = Vec::with_capacity(n);
        if self.search(&self.init, n, &mut bits)? {
            Ok(Some(InterleavedTrace::new(bits)))
        } else {
            Ok(None)
        }
    }

    fn search(&self, st: &AbState, n: usize, bits: &mut Vec<bool>) -> Result<bool, CheckError> {
        let depth = bits.len();
        if st.is_complete() {
            return Ok(depth == n);
        }
        // Each event delivers at most one file.
        let missing: usize = Terminal::ALL
            .iter()
            .map(|&t| {
                st.schedules
                    .expected_at(t)
                    .len()
                    .saturating_sub(st.terminal(t).stored.len())
            })
            .sum();
        if depth + missing > n {
            return Ok(false);
        }
        for error in [false, true] {
            let rec = (self.step)(st, error)?;
            bits.push(error);
            if self.search(&rec.state, n, bits)? {
                return Ok(true);
            }
            bits.pop();
        }
        Ok(false)
    }
}

/// [`Explorer::explore`] from the default AB configuration.
pub fn explore<I>(n: usize, inv: I) -> Result<Verdict, CheckError>
where
    I: Fn(&AbState) -> bool + Sync,
{
    Explorer::default().explore(n, inv)
}

/// [`Explorer::search_completion`] from the default AB configuration.
pub fn search_completion(n: usize) -> Result<Option<InterleavedTrace>, CheckError> {
    Explorer::default().search_completion(n)
}

/// Outcome of one initial-condition experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IcResult {
    /// Row number for Lynch ICs; `None` for AB.
    pub number: Option<u8>,
    /// The initial bits, e.g. `"0001"` or `"11"`.
    pub bits: String,
    pub valid: bool,
    /// First divergence when invalid.
    pub witness: Option<String>,
}

impl fmt::Display for IcResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.number {
            write!(f, "IC {n:>2} ")?;
        }
        write!(
            f,
            "{}: {}",
            self.bits,
            if self.valid { "valid" } else { "invalid" }
        )?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

/// Analytic validity predicate: `ALT_A(0) != ALTT_B(0)` and
/// `ALTT_A(0) == ALT_B(0)`.
pub fn ic_valid_lynch(ic: LynchIc) -> bool {
    ic.alt_a != ic.altt_b && ic.altt_a == ic.alt_b
}

/// Compares the first two stored files with the expected ones. Leading
/// entries listed in `sacrificial` are skipped first.
fn first_two_divergence(
    at: Terminal,
    stored: &[Label],
    expected: &[Label],
    sacrificial: &[Label],
) -> Option<String> {
    let real: Vec<&Label> = stored
        .iter()
        .skip_while(|l| sacrificial.contains(l))
        .collect();
    for (i, want) in expected.iter().take(2).enumerate() {
        match real.get(i) {
            Some(got) if *got == want => {}
            Some(got) => return Some(format!("{at} stored {got} where {want} was due")),
            None => return Some(format!("{at} never stored {want}")),
        }
    }
    None
}

const SWEEP_ROUNDS: usize = 3;

/// Runs all 16 Lynch initial conditions error-free (B starts) and checks the
/// verdicts against [`ic_valid_lynch`].
pub fn sweep_lynch() -> Result<Vec<IcResult>, CheckError> {
    let schedules = Schedules::default();
    let errors = InterleavedTrace::error_free(2 * SWEEP_ROUNDS);
    LynchIc::all()
        .map(|ic| {
            let init = lynch_init(ic, Terminal::B, schedules.clone())?;
            let run = run_trace_lynch(&init, &errors)?;
            let st = run.final_state();
            let witness = Terminal::ALL.iter().find_map(|&t| {
                first_two_divergence(t, &st.terminal(t).stored, schedules.expected_at(t), &[])
            });
            let valid = witness.is_none();
            let predicted = ic_valid_lynch(ic);
            if valid != predicted {
                let word = |v: bool| if v { "valid" } else { "invalid" };
                return Err(CheckError::OracleMismatch {
                    ic: ic.number().to_string(),
                    simulated: word(valid),
                    predicted: word(predicted),
                });
            }
            Ok(IcResult {
                number: Some(ic.number()),
                bits: format!(
                    "{}{}{}{}",
                    ic.alt_a as u8, ic.altt_a as u8, ic.alt_b as u8, ic.altt_b as u8
                ),
                valid,
                witness,
            })
        })
        .collect()
}

/// Runs the four `(ALTT_A(0), ALTT_B(0))` combinations error-free.
pub fn sweep_ab(starter: Terminal, dummy_first: bool) -> Result<Vec<IcResult>, CheckError> {
    let errors = InterleavedTrace::error_free(2 * (SWEEP_ROUNDS + 1));
    let base = Schedules::default();
    let mut out = Vec::with_capacity(4);
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        let cfg = AbConfig::default()
            .with_starter(starter)
            .with_altt0(a, b)
            .with_dummy_first(dummy_first);
        let init = ab_init(&cfg)?;
        let run = run_trace(&init, &errors)?;
        let st = run.final_state();
        let sacrificial: Vec<Label> = if dummy_first {
            vec![Label::from(GARBAGE), crate::protocols::dummy_label(starter)]
        } else {
            Vec::new()
        };
        let witness = Terminal::ALL.iter().find_map(|&t| {
            first_two_divergence(t, &st.terminal(t).stored, base.expected_at(t), &sacrificial)
        });
        out.push(IcResult {
            number: None,
            bits: format!("{}{}", a as u8, b as u8),
            valid: witness.is_none(),
            witness,
        });
    }
    Ok(out)
}

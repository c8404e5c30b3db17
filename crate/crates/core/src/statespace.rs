//! Per-terminal labels, the 16-cell system state space, FSM extraction and
//! error-sequence motifs.
//!
//! Every receive event labels the receiver by its outcome (2 error, 3
//! duplicate, 4 accepted and sending) and the other terminal 1 (waiting).
//! Position 1 is the starter's initial send. Events after completion change
//! nothing and produce no position.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::checker::{CheckError, RunTrace};
use crate::faults::{InterleavedTrace, TraceError};
use crate::protocols::{ab_init, AbConfig, AbState, Outcome, Terminal};

pub const MAX_REACHABLE_LEN: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum TerminalLabel {
    Idle = 1,
    Error = 2,
    Duplicate = 3,
    Active = 4,
}

impl TerminalLabel {
    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(v: u8) -> Option<Self> {
        match v {
            1 => Some(TerminalLabel::Idle),
            2 => Some(TerminalLabel::Error),
            3 => Some(TerminalLabel::Duplicate),
            4 => Some(TerminalLabel::Active),
            _ => None,
        }
    }
}

impl From<TerminalLabel> for u8 {
    fn from(l: TerminalLabel) -> u8 {
        l.value()
    }
}

impl TryFrom<u8> for TerminalLabel {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        TerminalLabel::from_value(v).ok_or_else(|| format!("terminal label {v} outside 1..=4"))
    }
}

impl fmt::Display for TerminalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Things a terminal can be doing at a global position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Accepted,
    Rejected,
    Error,
    Send,
    Idle,
}

impl From<Outcome> for EventKind {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Accepted => EventKind::Accepted,
            Outcome::Rejected => EventKind::Rejected,
            Outcome::Error => EventKind::Error,
            Outcome::Stutter => EventKind::Idle,
        }
    }
}

pub fn label_event(kind: EventKind) -> TerminalLabel {
    match kind {
        EventKind::Error => TerminalLabel::Error,
        EventKind::Rejected => TerminalLabel::Duplicate,
        EventKind::Accepted | EventKind::Send => TerminalLabel::Active,
        EventKind::Idle => TerminalLabel::Idle,
    }
}

pub fn sys_index(a: TerminalLabel, b: TerminalLabel) -> u8 {
    (a.value() - 1) * 4 + b.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SysState {
    pub a: TerminalLabel,
    pub b: TerminalLabel,
}

impl SysState {
    pub fn new(a: TerminalLabel, b: TerminalLabel) -> Self {
        SysState { a, b }
    }

    pub fn index(self) -> u8 {
        sys_index(self.a, self.b)
    }

    pub fn from_index(i: u8) -> Option<Self> {
        if !(1..=16).contains(&i) {
            return None;
        }
        let a = TerminalLabel::from_value((i - 1) / 4 + 1)?;
        let b = TerminalLabel::from_value((i - 1) % 4 + 1)?;
        Some(SysState { a, b })
    }

    /// `t` carries `label`, the other terminal is idle.
    pub fn with_active(t: Terminal, label: TerminalLabel) -> Self {
        match t {
            Terminal::A => SysState::new(label, TerminalLabel::Idle),
            Terminal::B => SysState::new(TerminalLabel::Idle, label),
        }
    }
}

impl fmt::Display for SysState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

fn initial_position(init: &AbState) -> SysState {
    SysState::with_active(init.starter, label_event(EventKind::Send))
}

fn event_position(receiver: Terminal, outcome: Outcome) -> Option<SysState> {
    (outcome != Outcome::Stutter)
        .then(|| SysState::with_active(receiver, label_event(outcome.into())))
}

/// One system state per global position.
pub fn system_trace(run: &RunTrace) -> Vec<SysState> {
    std::iter::once(initial_position(&run.init))
        .chain(
            run.steps
                .iter()
                .filter_map(|s| event_position(s.receiver, s.outcome)),
        )
        .collect()
}

/// Every system state visited by any error sequence of length up to `n_max`
/// from the default configuration.
pub fn reachable(n_max: usize) -> Result<BTreeSet<u8>, CheckError> {
    if n_max > MAX_REACHABLE_LEN {
        return Err(TraceError::BoundExceeded {
            requested: n_max,
            max: MAX_REACHABLE_LEN,
        }
        .into());
    }
    let init = ab_init(&AbConfig::default())?;
    let mut seen = BTreeSet::from([initial_position(&init).index()]);
    // Prefixes of longer sequences are shorter sequences, so one walk to
    // depth n_max covers every length.
    let mut stack = vec![(init, 0usize)];
    while let Some((st, depth)) = stack.pop() {
        if depth == n_max || st.is_complete() {
            continue;
        }
        for error in [false, true] {
            let rec = st.event(error)?;
            if let Some(p) = event_position(rec.receiver, rec.outcome) {
                seen.insert(p.index());
            }
            stack.push((rec.state, depth + 1));
        }
    }
    Ok(seen)
}

/// Counted transitions between consecutive system states.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsmGraph {
    pub nodes: BTreeSet<u8>,
    pub edges: BTreeMap<(u8, u8), u64>,
}

impl FsmGraph {
    pub fn add_trace(&mut self, trace: &[SysState]) {
        self.nodes.extend(trace.iter().map(|s| s.index()));
        for w in trace.windows(2) {
            *self.edges.entry((w[0].index(), w[1].index())).or_insert(0) += 1;
        }
    }

    pub fn edge_set(&self) -> BTreeSet<(u8, u8)> {
        self.edges.keys().copied().collect()
    }
}

pub fn extract_fsm(runs: &[RunTrace]) -> FsmGraph {
    let mut g = FsmGraph::default();
    for r in runs {
        g.add_trace(&system_trace(r));
    }
    g
}

fn node_color(n: u8) -> Option<&'static str> {
    match n {
        2 | 5 => Some("red"),
        3 | 9 => Some("green"),
        _ => None,
    }
}

pub fn to_dot(g: &FsmGraph) -> String {
    let mut out = String::from("digraph fsm {\n");
    for &n in &g.nodes {
        match node_color(n) {
            Some(c) => writeln!(out, "  {n} [style=filled, fillcolor={c}];"),
            None => writeln!(out, "  {n};"),
        }
        .unwrap();
    }
    for (&(from, to), count) in &g.edges {
        writeln!(out, "  {from} -> {to} [label=\"{count}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}

/// Label traces and edge set induced by one error sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    pub error_seq: InterleavedTrace,
    pub a_trace: Vec<TerminalLabel>,
    pub b_trace: Vec<TerminalLabel>,
    pub edges: BTreeSet<(u8, u8)>,
}

impl Motif {
    pub fn system(&self) -> Vec<SysState> {
        self.a_trace
            .iter()
            .zip(&self.b_trace)
            .map(|(&a, &b)| SysState::new(a, b))
            .collect()
    }
}

fn labels_to_string(ls: &[TerminalLabel]) -> String {
    ls.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sys: Vec<String> = self.system().iter().map(|s| s.to_string()).collect();
        writeln!(f, "errors: {}", self.error_seq)?;
        writeln!(f, "A:      {}", labels_to_string(&self.a_trace))?;
        writeln!(f, "B:      {}", labels_to_string(&self.b_trace))?;
        write!(f, "system: {}", sys.join(" "))
    }
}

pub fn motif(error_seq: &InterleavedTrace) -> Result<Motif, CheckError> {
    let init = ab_init(&AbConfig::default())?;
    let run = crate::checker::run_trace(&init, error_seq)?;
    let sys = system_trace(&run);
    let mut g = FsmGraph::default();
    g.add_trace(&sys);
    Ok(Motif {
        error_seq: error_seq.clone(),
        a_trace: sys.iter().map(|s| s.a).collect(),
        b_trace: sys.iter().map(|s| s.b).collect(),
        edges: g.edge_set(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpositionReport {
    /// `si XOR sj`.
    pub sum: InterleavedTrace,
    pub edges_sum: BTreeSet<(u8, u8)>,
    pub edges_union: BTreeSet<(u8, u8)>,
    pub additive: bool,
}

/// Whether the motif of `si XOR sj` has exactly the union of the two motifs'
/// edges.
pub fn superpose_check(
    si: &InterleavedTrace,
    sj: &InterleavedTrace,
) -> Result<SuperpositionReport, CheckError> {
    let sum = si.xor(sj)?;
    let mi = motif(si)?;
    let mj = motif(sj)?;
    let ms = motif(&sum)?;
    let edges_union: BTreeSet<_> = mi.edges.union(&mj.edges).copied().collect();
    Ok(SuperpositionReport {
        additive: ms.edges == edges_union,
        sum,
        edges_sum: ms.edges,
        edges_union,
    })
}

//! JSON form of a simulated run. Field names follow the message-buffer
//! model's variables (`alt`, `msgt`, `storedMsgs`, `pendingMsg`).

use std::collections::BTreeMap;

use altbit_core::checker::{LynchRunTrace, RunTrace};
use altbit_core::protocols::ab::PendingMsg;
use altbit_core::protocols::lynch::LynchPending;
use altbit_core::protocols::{AbState, LynchState, Outcome, Phase, Terminal};
use serde::{Deserialize, Serialize};

type PerTerminal<T> = BTreeMap<Terminal, T>;

fn per_terminal<T>(f: impl Fn(Terminal) -> T) -> PerTerminal<T> {
    Terminal::ALL.iter().map(|&t| (t, f(t))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PendingDoc {
    pub receiver: Terminal,
    pub msgr: String,
    pub altr: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vfy: Option<bool>,
}

impl From<&PendingMsg> for PendingDoc {
    fn from(p: &PendingMsg) -> Self {
        PendingDoc {
            receiver: p.receiver,
            msgr: p.payload.to_string(),
            altr: p.alt,
            vfy: None,
        }
    }
}

impl From<&LynchPending> for PendingDoc {
    fn from(p: &LynchPending) -> Self {
        PendingDoc {
            receiver: p.receiver,
            msgr: p.payload.to_string(),
            altr: p.alt,
            vfy: Some(p.vfy),
        }
    }
}

/// Lynch-only terminal variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyBits {
    pub last_accepted_alt: PerTerminal<bool>,
    pub vfyt: PerTerminal<bool>,
    pub vfyr: PerTerminal<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Snapshot {
    /// Outgoing alternation bit (`altt`).
    pub alt: PerTerminal<bool>,
    pub altr: PerTerminal<bool>,
    pub msgt: PerTerminal<String>,
    pub counter_msgs: PerTerminal<u32>,
    pub stored_msgs: PerTerminal<Vec<String>>,
    pub pending_msg: PendingDoc,
    pub counter: u32,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBits>,
}

impl From<&AbState> for Snapshot {
    fn from(s: &AbState) -> Self {
        Snapshot {
            alt: per_terminal(|t| s.terminal(t).altt),
            altr: per_terminal(|t| s.terminal(t).altr),
            msgt: per_terminal(|t| s.terminal(t).msgt.to_string()),
            counter_msgs: per_terminal(|t| s.counter_msgs(t)),
            stored_msgs: per_terminal(|t| {
                s.terminal(t).stored.iter().map(|l| l.to_string()).collect()
            }),
            pending_msg: (&s.pending).into(),
            counter: s.counter,
            phase: s.phase,
            verify: None,
        }
    }
}

impl From<&LynchState> for Snapshot {
    fn from(s: &LynchState) -> Self {
        Snapshot {
            alt: per_terminal(|t| s.terminal(t).altt),
            altr: per_terminal(|t| s.terminal(t).altr),
            msgt: per_terminal(|t| s.terminal(t).msgt.to_string()),
            counter_msgs: per_terminal(|t| s.terminal(t).file_number + 1),
            stored_msgs: per_terminal(|t| {
                s.terminal(t).stored.iter().map(|l| l.to_string()).collect()
            }),
            pending_msg: (&s.pending).into(),
            counter: s.counter,
            phase: s.phase,
            verify: Some(VerifyBits {
                last_accepted_alt: per_terminal(|t| s.terminal(t).alt),
                vfyt: per_terminal(|t| s.terminal(t).vfyt),
                vfyr: per_terminal(|t| s.terminal(t).vfyr),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StepDoc {
    pub event: usize,
    /// Receive phase in which the event happened.
    pub phase: Phase,
    pub pending_msg: PendingDoc,
    pub error: bool,
    pub accepted: bool,
    pub outcome: Outcome,
    pub state: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InitDoc {
    pub description: String,
    pub state: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceDocument {
    pub protocol: String,
    pub init: InitDoc,
    pub errors: String,
    pub steps: Vec<StepDoc>,
    pub output: Vec<String>,
}

impl TraceDocument {
    pub fn from_ab(run: &RunTrace, description: String) -> Self {
        TraceDocument {
            protocol: "ab".into(),
            init: InitDoc {
                description,
                state: (&run.init).into(),
            },
            errors: run.errors.to_string(),
            steps: run
                .steps
                .iter()
                .map(|s| StepDoc {
                    event: s.event,
                    phase: Phase::receive_of(s.receiver),
                    pending_msg: (&s.incoming).into(),
                    error: s.error,
                    accepted: s.outcome == Outcome::Accepted,
                    outcome: s.outcome,
                    state: (&s.state).into(),
                })
                .collect(),
            output: run.steps.iter().map(|s| s.line.to_string()).collect(),
        }
    }

    pub fn from_lynch(run: &LynchRunTrace, description: String) -> Self {
        TraceDocument {
            protocol: "lynch".into(),
            init: InitDoc {
                description,
                state: (&run.init).into(),
            },
            errors: run.errors.to_string(),
            steps: run
                .steps
                .iter()
                .map(|s| {
                    let r = &s.reception;
                    StepDoc {
                        event: s.event,
                        phase: Phase::receive_of(r.receiver),
                        pending_msg: (&r.incoming).into(),
                        error: r.error,
                        accepted: r.outcome == Outcome::Accepted,
                        outcome: r.outcome,
                        state: (&r.state).into(),
                    }
                })
                .collect(),
            output: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

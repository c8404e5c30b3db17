//! Lockstep half-duplex protocol models.
//!
//! Both protocols run the same phase cycle: the starter's first message is
//! already in flight at initialization, and every receive event is followed
//! by the receiver's send. Payloads are labels made of a direction prefix and
//! a 1-based index (`"BA3"` is B's third file for A).

pub mod ab;
pub mod asm_model;
pub mod legacy;
pub mod lynch;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::KernelError;

pub use ab::{ab_accept, ab_init, ab_receive, ab_round, AbConfig, AbState, AbTerminal};
pub use legacy::{format_output_line, OutputLine};
pub use lynch::{lynch_init, lynch_receive, lynch_run, LynchIc, LynchState, LynchTerminal};

/// Payload label. Shared so that state snapshots clone cheaply.
pub type Label = Arc<str>;

/// Payload held by a terminal that has not fetched any file yet.
pub const GARBAGE: &str = "garbage";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Terminal {
    A,
    B,
}

impl Terminal {
    pub const ALL: [Terminal; 2] = [Terminal::A, Terminal::B];

    pub fn other(self) -> Terminal {
        match self {
            Terminal::A => Terminal::B,
            Terminal::B => Terminal::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Terminal::A => "A",
            Terminal::B => "B",
        }
    }
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Terminal {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Terminal::A),
            "B" | "b" => Ok(Terminal::B),
            _ => Err(ProtocolError::InvalidConfig(format!(
                "unknown terminal {s:?}"
            ))),
        }
    }
}

/// Lockstep phase. `SendB` is B's send, `RecvA` is A's receive and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    SendB,
    RecvA,
    SendA,
    RecvB,
}

impl Phase {
    pub fn next(self) -> Phase {
        match self {
            Phase::SendB => Phase::RecvA,
            Phase::RecvA => Phase::SendA,
            Phase::SendA => Phase::RecvB,
            Phase::RecvB => Phase::SendB,
        }
    }

    /// The terminal that acts in this phase.
    pub fn terminal(self) -> Terminal {
        match self {
            Phase::SendB | Phase::RecvB => Terminal::B,
            Phase::RecvA | Phase::SendA => Terminal::A,
        }
    }

    pub fn is_receive(self) -> bool {
        matches!(self, Phase::RecvA | Phase::RecvB)
    }

    pub fn receive_of(t: Terminal) -> Phase {
        match t {
            Terminal::A => Phase::RecvA,
            Terminal::B => Phase::RecvB,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("{op} is not allowed in phase {phase:?}")]
    Phase { op: &'static str, phase: Phase },
    #[error(
        "pending message is addressed to {pending} but phase {phase:?} receives at {expected}"
    )]
    Misrouted {
        pending: Terminal,
        expected: Terminal,
        phase: Phase,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// The per-direction send schedules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedules {
    /// Files A sends to B.
    pub a_to_b: Vec<Label>,
    /// Files B sends to A.
    pub b_to_a: Vec<Label>,
}

impl Schedules {
    /// `AB1..ABn` and `BA1..BAn`.
    pub fn standard(n: usize) -> Self {
        Schedules {
            a_to_b: (1..=n).map(|i| Label::from(format!("AB{i}"))).collect(),
            b_to_a: (1..=n).map(|i| Label::from(format!("BA{i}"))).collect(),
        }
    }

    /// What `t` sends.
    pub fn of(&self, t: Terminal) -> &[Label] {
        match t {
            Terminal::A => &self.a_to_b,
            Terminal::B => &self.b_to_a,
        }
    }

    /// What `t` is expected to store.
    pub fn expected_at(&self, t: Terminal) -> &[Label] {
        self.of(t.other())
    }

    /// Prepends the sacrificial payload (`"BA0"` / `"AB0"`) to `t`'s schedule.
    pub fn with_dummy_first(mut self, t: Terminal) -> Self {
        let dummy = dummy_label(t);
        match t {
            Terminal::A => self.a_to_b.insert(0, dummy),
            Terminal::B => self.b_to_a.insert(0, dummy),
        }
        self
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.a_to_b.is_empty() || self.b_to_a.is_empty() {
            return Err(ProtocolError::InvalidConfig(
                "both send schedules must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules::standard(6)
    }
}

pub fn dummy_label(t: Terminal) -> Label {
    Label::from(format!("{}{}0", t, t.other()))
}

/// What happened at a receive event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// Error-free and stored.
    Accepted,
    /// Error-free but refused (duplicate or out-of-turn bit).
    Rejected,
    /// Corrupted in transit; nothing stored.
    Error,
    /// Both schedules already delivered; the event changes nothing.
    Stutter,
}

impl Outcome {
    pub fn accepted(self) -> bool {
        self == Outcome::Accepted
    }
}

/// True iff `stored` equals the first `stored.len()` entries of `schedule`.
pub fn is_prefix(stored: &[Label], schedule: &[Label]) -> bool {
    stored.len() <= schedule.len() && stored.iter().zip(schedule).all(|(a, b)| a == b)
}

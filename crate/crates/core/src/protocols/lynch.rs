//! Lynch's symmetric 2-bit half-duplex protocol.
//!
//! Every message carries the sender's file, its alternation bit `altt` and a
//! verify bit `vfyt`. The two directions are independent:
//!
//! * receive direction: an error-free message is stored iff its bit differs
//!   from the local `alt`, which then takes the received bit;
//! * send direction: a received verify bit of 1 loads the next file and flips
//!   `altt`, a 0 resends the current file.
//!
//! A corrupted message updates nothing except `vfyt := 0`, so the sender
//! repeats its file on the next turn. The starter pretends its "previous"
//! transfer succeeded (`vfyt = 1`).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Label, Outcome, Phase, ProtocolError, Schedules, Terminal, GARBAGE};
use crate::faults::InterleavedTrace;

/// Initial bits `(ALT_A, ALTT_A, ALT_B, ALTT_B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LynchIc {
    pub alt_a: bool,
    pub altt_a: bool,
    pub alt_b: bool,
    pub altt_b: bool,
}

impl LynchIc {
    pub fn new(alt_a: bool, altt_a: bool, alt_b: bool, altt_b: bool) -> Self {
        LynchIc {
            alt_a,
            altt_a,
            alt_b,
            altt_b,
        }
    }

    /// Row number 1..=16, reading the four bits as a binary number plus one.
    pub fn number(&self) -> u8 {
        1 + ((self.alt_a as u8) << 3)
            + ((self.altt_a as u8) << 2)
            + ((self.alt_b as u8) << 1)
            + self.altt_b as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        if !(1..=16).contains(&n) {
            return None;
        }
        let v = n - 1;
        Some(LynchIc::new(v & 8 != 0, v & 4 != 0, v & 2 != 0, v & 1 != 0))
    }

    pub fn all() -> impl Iterator<Item = LynchIc> {
        (1..=16).filter_map(LynchIc::from_number)
    }
}

impl fmt::Display for LynchIc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.alt_a as u8, self.altt_a as u8, self.alt_b as u8, self.altt_b as u8
        )
    }
}

impl FromStr for LynchIc {
    type Err = ProtocolError;

    /// Four bits, e.g. `"0001"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ProtocolError::InvalidConfig(format!(
                    "initial condition must be four 0/1 digits, got {s:?}"
                ))),
            })
            .collect::<Result<_, _>>()?;
        match bits[..] {
            [a, b, c, d] => Ok(LynchIc::new(a, b, c, d)),
            _ => Err(ProtocolError::InvalidConfig(format!(
                "initial condition must be four 0/1 digits, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LynchPending {
    pub receiver: Terminal,
    pub payload: Label,
    pub alt: bool,
    pub vfy: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LynchTerminal {
    /// Bit of the last accepted file.
    pub alt: bool,
    pub altt: bool,
    pub altr: bool,
    pub vfyt: bool,
    pub vfyr: bool,
    pub file_number: u32,
    pub msgt: Label,
    pub stored: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LynchState {
    pub a: LynchTerminal,
    pub b: LynchTerminal,
    pub pending: LynchPending,
    pub counter: u32,
    pub phase: Phase,
    pub starter: Terminal,
    pub schedules: Arc<Schedules>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LynchReception {
    pub state: LynchState,
    pub receiver: Terminal,
    pub error: bool,
    pub outcome: Outcome,
    pub incoming: LynchPending,
    /// The receiver moved on to its next file.
    pub loaded_next: bool,
}

pub fn lynch_init(
    ic: LynchIc,
    starter: Terminal,
    schedules: Schedules,
) -> Result<LynchState, ProtocolError> {
    schedules.validate()?;
    let fresh = |alt: bool, altt: bool| LynchTerminal {
        alt,
        altt,
        altr: false,
        vfyt: false,
        vfyr: false,
        file_number: 0,
        msgt: Label::from(GARBAGE),
        stored: Vec::new(),
    };
    let mut a = fresh(ic.alt_a, ic.altt_a);
    let mut b = fresh(ic.alt_b, ic.altt_b);
    let first = schedules.of(starter)[0].clone();
    let s = match starter {
        Terminal::A => &mut a,
        Terminal::B => &mut b,
    };
    s.vfyt = true;
    s.file_number = 1;
    s.msgt = first.clone();
    let pending = LynchPending {
        receiver: starter.other(),
        payload: first,
        alt: s.altt,
        vfy: true,
    };
    Ok(LynchState {
        a,
        b,
        pending,
        counter: 1,
        phase: Phase::receive_of(starter.other()),
        starter,
        schedules: Arc::new(schedules),
    })
}

impl LynchState {
    pub fn terminal(&self, t: Terminal) -> &LynchTerminal {
        match t {
            Terminal::A => &self.a,
            Terminal::B => &self.b,
        }
    }

    pub fn terminal_mut(&mut self, t: Terminal) -> &mut LynchTerminal {
        match t {
            Terminal::A => &mut self.a,
            Terminal::B => &mut self.b,
        }
    }

    pub fn is_complete(&self) -> bool {
        Terminal::ALL
            .iter()
            .all(|&t| self.terminal(t).stored.len() >= self.schedules.expected_at(t).len())
    }

    pub fn count_delivered(&self) -> (usize, usize) {
        (self.a.stored.len(), self.b.stored.len())
    }

    pub fn receive(&self, error: bool) -> Result<LynchReception, ProtocolError> {
        if !self.phase.is_receive() {
            return Err(ProtocolError::Phase {
                op: "receive",
                phase: self.phase,
            });
        }
        let r = self.phase.terminal();
        if self.pending.receiver != r {
            return Err(ProtocolError::Misrouted {
                pending: self.pending.receiver,
                expected: r,
                phase: self.phase,
            });
        }
        let incoming = self.pending.clone();
        let mut next = self.clone();
        let mut loaded_next = false;

        let outcome = if self.is_complete() {
            Outcome::Stutter
        } else if error {
            next.terminal_mut(r).vfyt = false;
            Outcome::Error
        } else {
            let schedule = Arc::clone(&next.schedules);
            let t = next.terminal_mut(r);
            t.altr = incoming.alt;
            t.vfyr = incoming.vfy;
            let outcome = if t.altr != t.alt {
                t.stored.push(incoming.payload.clone());
                t.alt = t.altr;
                Outcome::Accepted
            } else {
                Outcome::Rejected
            };
            t.vfyt = true;
            if t.vfyr {
                // With nothing left to load the current file is repeated
                // with the same bit, which the peer rejects as a duplicate.
                if let Some(f) = schedule.of(r).get(t.file_number as usize) {
                    t.file_number += 1;
                    t.msgt = f.clone();
                    t.altt = !t.altt;
                    loaded_next = true;
                }
            }
            outcome
        };

        let t = next.terminal(r);
        next.pending = LynchPending {
            receiver: r.other(),
            payload: t.msgt.clone(),
            alt: t.altt,
            vfy: t.vfyt,
        };
        next.phase = next.phase.next();
        if r == self.starter {
            next.counter += 1;
        }
        Ok(LynchReception {
            state: next,
            receiver: r,
            error,
            outcome,
            incoming,
            loaded_next,
        })
    }

    pub fn send(&self) -> Result<LynchState, ProtocolError> {
        if self.phase.is_receive() {
            return Err(ProtocolError::Phase {
                op: "send",
                phase: self.phase,
            });
        }
        let mut next = self.clone();
        next.phase = next.phase.next();
        Ok(next)
    }

    pub fn event(&self, error: bool) -> Result<LynchReception, ProtocolError> {
        let mut rec = self.receive(error)?;
        rec.state = rec.state.send()?;
        Ok(rec)
    }
}

pub fn lynch_receive(st: &LynchState, error: bool) -> Result<LynchState, ProtocolError> {
    Ok(st.receive(error)?.state)
}

/// Runs `2 * rounds` receive events; missing trace entries count as
/// error-free. Returns the final state and `(stored at A, stored at B)`.
pub fn lynch_run(
    init: &LynchState,
    errors: &InterleavedTrace,
    rounds: usize,
) -> Result<(LynchState, (usize, usize)), ProtocolError> {
    if rounds == 0 {
        return Err(ProtocolError::InvalidConfig(
            "rounds must be at least 1".into(),
        ));
    }
    let mut st = init.clone();
    for k in 1..=2 * rounds {
        st = st.event(errors.event(k).unwrap_or(false))?.state;
    }
    let counts = st.count_delivered();
    Ok((st, counts))
}

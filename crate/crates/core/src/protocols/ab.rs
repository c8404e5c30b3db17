//! The 1-bit alternating-bit protocol.
//!
//! The acceptance test is asymmetric: A accepts a message whose bit equals
//! its own `altt`, B accepts one whose bit differs. Accepting stores the
//! payload, flips `altt`, and fetches the next file; anything else resends the
//! current file with the current bit.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::legacy::OutputLine;
use super::{Label, Outcome, Phase, ProtocolError, Schedules, Terminal, GARBAGE};
use crate::faults::PerRoundTraces;

/// Message in flight.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PendingMsg {
    pub receiver: Terminal,
    pub payload: Label,
    pub alt: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbTerminal {
    /// Bit attached to outgoing files.
    pub altt: bool,
    /// Last bit received without error.
    pub altr: bool,
    /// Files fetched so far (the starter begins at 1).
    pub file_number: u32,
    /// File currently being sent.
    pub msgt: Label,
    pub stored: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AbState {
    pub a: AbTerminal,
    pub b: AbTerminal,
    pub pending: PendingMsg,
    /// Round counter, starting at 1.
    pub counter: u32,
    pub phase: Phase,
    pub starter: Terminal,
    pub schedules: Arc<Schedules>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbConfig {
    pub starter: Terminal,
    /// Initial `altt` of A and B.
    pub altt0: (bool, bool),
    pub schedules: Schedules,
    /// Prepend a sacrificial file to the starter's schedule.
    pub dummy_first: bool,
}

impl Default for AbConfig {
    fn default() -> Self {
        AbConfig {
            starter: Terminal::B,
            altt0: (true, true),
            schedules: Schedules::default(),
            dummy_first: false,
        }
    }
}

impl AbConfig {
    pub fn with_altt0(mut self, a: bool, b: bool) -> Self {
        self.altt0 = (a, b);
        self
    }

    pub fn with_starter(mut self, starter: Terminal) -> Self {
        self.starter = starter;
        self
    }

    pub fn with_dummy_first(mut self, on: bool) -> Self {
        self.dummy_first = on;
        self
    }
}

/// Builds the initial state with the starter's first file already in flight.
pub fn ab_init(config: &AbConfig) -> Result<AbState, ProtocolError> {
    config.schedules.validate()?;
    let schedules = if config.dummy_first {
        config.schedules.clone().with_dummy_first(config.starter)
    } else {
        config.schedules.clone()
    };
    let starter = config.starter;
    let fresh = |altt: bool| AbTerminal {
        altt,
        altr: false,
        file_number: 0,
        msgt: Label::from(GARBAGE),
        stored: Vec::new(),
    };
    let mut a = fresh(config.altt0.0);
    let mut b = fresh(config.altt0.1);
    let first = schedules.of(starter)[0].clone();
    let s = match starter {
        Terminal::A => &mut a,
        Terminal::B => &mut b,
    };
    s.file_number = 1;
    s.msgt = first.clone();
    let pending = PendingMsg {
        receiver: starter.other(),
        payload: first,
        alt: s.altt,
    };
    Ok(AbState {
        a,
        b,
        pending,
        counter: 1,
        phase: Phase::receive_of(starter.other()),
        starter,
        schedules: Arc::new(schedules),
    })
}

/// The acceptance test. Errors always reject.
pub fn ab_accept(receiver: Terminal, msg_bit: bool, receiver_altt: bool, error: bool) -> bool {
    if error {
        return false;
    }
    match receiver {
        Terminal::A => msg_bit == receiver_altt,
        Terminal::B => msg_bit != receiver_altt,
    }
}

/// Result of a single receive, with the values the legacy printer shows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbReception {
    /// State after the receive; its phase is the receiver's send phase.
    pub state: AbState,
    pub receiver: Terminal,
    pub error: bool,
    pub outcome: Outcome,
    pub incoming: PendingMsg,
    /// Round counter at the time of the receive.
    pub counter: u32,
    /// Sender's `fileNumber` at the time of the receive.
    pub sender_file_number: u32,
    /// Receiver's `altr` after the bit was read (stale on error).
    pub altr_shown: bool,
    /// Receiver's `altt` before any flip.
    pub altt_shown: bool,
}

impl AbReception {
    /// The legacy line for this event; `printed_error` is the value the
    /// legacy printer shows in the `error(..)` field.
    pub fn output_line(&self, printed_error: bool) -> OutputLine {
        let sender = self.receiver.other();
        OutputLine {
            line_no: OutputLine::number(self.counter, self.receiver),
            receiver: self.receiver,
            sender_label: format!("{sender}{}{}", self.receiver, self.sender_file_number),
            counter: self.counter,
            printed_error,
            altr_shown: self.altr_shown,
            altt_shown: self.altt_shown,
        }
    }
}

impl AbState {
    pub fn terminal(&self, t: Terminal) -> &AbTerminal {
        match t {
            Terminal::A => &self.a,
            Terminal::B => &self.b,
        }
    }

    pub fn terminal_mut(&mut self, t: Terminal) -> &mut AbTerminal {
        match t {
            Terminal::A => &mut self.a,
            Terminal::B => &mut self.b,
        }
    }

    /// Both terminals hold (at least) the counterparty's whole schedule.
    pub fn is_complete(&self) -> bool {
        Terminal::ALL
            .iter()
            .all(|&t| self.terminal(t).stored.len() >= self.schedules.expected_at(t).len())
    }

    pub fn count_delivered(&self) -> (usize, usize) {
        (self.a.stored.len(), self.b.stored.len())
    }

    /// Message counter: index of the next file to fetch.
    pub fn counter_msgs(&self, t: Terminal) -> u32 {
        self.terminal(t).file_number + 1
    }

    fn expect_receive(&self) -> Result<Terminal, ProtocolError> {
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
        Ok(r)
    }

    /// Receive the pending message at the terminal whose receive phase it is.
    pub fn receive(&self, error: bool) -> Result<AbReception, ProtocolError> {
        let r = self.expect_receive()?;
        let incoming = self.pending.clone();
        let counter = self.counter;
        let sender_file_number = self.terminal(r.other()).file_number;
        let mut next = self.clone();
        let altt_shown = next.terminal(r).altt;

        let outcome = if self.is_complete() {
            Outcome::Stutter
        } else if error {
            Outcome::Error
        } else {
            let schedule = Arc::clone(&next.schedules);
            let t = next.terminal_mut(r);
            t.altr = incoming.alt;
            if ab_accept(r, incoming.alt, t.altt, false) {
                t.stored.push(incoming.payload.clone());
                t.altt = !t.altt;
                t.file_number += 1;
                if let Some(f) = schedule.of(r).get(t.file_number as usize - 1) {
                    t.msgt = f.clone();
                }
                Outcome::Accepted
            } else {
                Outcome::Rejected
            }
        };

        let altr_shown = next.terminal(r).altr;
        let t = next.terminal(r);
        next.pending = PendingMsg {
            receiver: r.other(),
            payload: t.msgt.clone(),
            alt: t.altt,
        };
        next.phase = next.phase.next();
        if r == self.starter {
            next.counter += 1;
        }
        Ok(AbReception {
            state: next,
            receiver: r,
            error,
            outcome,
            incoming,
            counter,
            sender_file_number,
            altr_shown,
            altt_shown,
        })
    }

    /// The send phase. The outgoing message was prepared by the preceding
    /// receive, so only the phase advances.
    pub fn send(&self) -> Result<AbState, ProtocolError> {
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

    /// One receive event followed by the receiver's send. The returned
    /// reception's `state` is already in the next receive phase.
    pub fn event(&self, error: bool) -> Result<AbReception, ProtocolError> {
        let mut rec = self.receive(error)?;
        rec.state = rec.state.send()?;
        Ok(rec)
    }
}

/// [`AbState::receive`] without the bookkeeping.
pub fn ab_receive(st: &AbState, error: bool) -> Result<AbState, ProtocolError> {
    Ok(st.receive(error)?.state)
}

/// One lockstep round starting at A's receive: RecvA, SendA, RecvB, SendB.
/// The legacy `error(..)` field of both lines shows `err_a`.
pub fn ab_round(
    st: &AbState,
    err_a: bool,
    err_b: bool,
) -> Result<(AbState, [OutputLine; 2]), ProtocolError> {
    if st.phase != Phase::RecvA {
        return Err(ProtocolError::Phase {
            op: "round",
            phase: st.phase,
        });
    }
    let ra = st.event(err_a)?;
    let rb = ra.state.event(err_b)?;
    let lines = [ra.output_line(err_a), rb.output_line(err_a)];
    Ok((rb.state, lines))
}

/// Runs `rounds` lockstep rounds, returning the final state and all lines.
pub fn ab_run_rounds(
    init: &AbState,
    errors: &PerRoundTraces,
    rounds: usize,
) -> Result<(AbState, Vec<OutputLine>), ProtocolError> {
    let mut st = init.clone();
    let mut lines = Vec::with_capacity(2 * rounds);
    for k in 1..=rounds {
        let (next, ls) = ab_round(&st, errors.a(k), errors.b(k))?;
        lines.extend(ls);
        st = next;
    }
    Ok((st, lines))
}

pub fn count_delivered(st: &AbState) -> (usize, usize) {
    st.count_delivered()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::canonical;

    fn default_init() -> AbState {
        ab_init(&AbConfig::default()).unwrap()
    }

    #[test]
    fn init_defaults() {
        let s = default_init();
        assert_eq!(s.pending.receiver, Terminal::A);
        assert_eq!(&*s.pending.payload, "BA1");
        assert!(s.pending.alt);
        assert_eq!(&*s.a.msgt, GARBAGE);
        assert_eq!(&*s.b.msgt, "BA1");
        assert_eq!((s.a.file_number, s.b.file_number), (0, 1));
        assert_eq!((s.a.altt, s.b.altt), (true, true));
        assert_eq!((s.a.altr, s.b.altr), (false, false));
        assert_eq!(s.counter, 1);
        assert_eq!(s.phase, Phase::RecvA);
        assert_eq!(s.count_delivered(), (0, 0));
    }

    #[test]
    fn init_rejects_empty_schedules() {
        let cfg = AbConfig {
            schedules: Schedules {
                a_to_b: vec![],
                b_to_a: vec![],
            },
            ..AbConfig::default()
        };
        assert!(matches!(
            ab_init(&cfg),
            Err(ProtocolError::InvalidConfig(_))
        ));
    }

    #[test]
    fn accept_rule() {
        assert!(ab_accept(Terminal::A, true, true, false));
        assert!(!ab_accept(Terminal::B, true, true, false));
        assert!(!ab_accept(Terminal::A, true, true, true));
    }

    #[test]
    fn first_receive_accepts() {
        let s = ab_receive(&default_init(), false).unwrap();
        assert_eq!(s.a.stored, vec![Label::from("BA1")]);
        assert!(!s.a.altt);
        assert_eq!(
            s.pending,
            PendingMsg {
                receiver: Terminal::B,
                payload: "AB1".into(),
                alt: false
            }
        );
    }

    #[test]
    fn first_receive_error_resends() {
        let init = default_init();
        let rec = init.receive(true).unwrap();
        assert_eq!(rec.outcome, Outcome::Error);
        let s = rec.state;
        assert_eq!(s.a, init.a);
        assert_eq!(s.b, init.b);
        // A has nothing fetched yet, so it answers with its garbage payload.
        assert_eq!(s.pending.receiver, Terminal::B);
        assert_eq!(&*s.pending.payload, GARBAGE);
        assert_eq!(s.pending.alt, init.a.altt);
        // B then refuses the garbage and resends BA1 with its unchanged bit.
        let back = s.send().unwrap().receive(false).unwrap();
        assert_eq!(back.outcome, Outcome::Rejected);
        assert_eq!(&*back.state.pending.payload, "BA1");
        assert_eq!(back.state.pending.alt, init.pending.alt);
    }

    #[test]
    fn receive_in_send_phase_fails() {
        let s = ab_receive(&default_init(), false).unwrap();
        assert_eq!(s.phase, Phase::SendA);
        assert!(matches!(
            ab_receive(&s, false),
            Err(ProtocolError::Phase { op: "receive", .. })
        ));
        assert!(default_init().send().is_err());
    }

    #[test]
    fn round_five_rejects_duplicate() {
        let errs = canonical();
        let (st, _) = ab_run_rounds(&default_init(), &errs, 4).unwrap();
        let rec = st.receive(errs.a(5)).unwrap();
        assert_eq!(rec.outcome, Outcome::Rejected);
        assert_eq!(&*rec.incoming.payload, "BA3");
        assert!(rec.altr_shown);
        assert!(!rec.altt_shown);
        assert_eq!(rec.state.a.stored, st.a.stored);
    }

    #[test]
    fn canonical_rounds_deliver_everything() {
        let (st, lines) = ab_run_rounds(&default_init(), &canonical(), 11).unwrap();
        let s = Schedules::standard(6);
        assert_eq!(st.a.stored, s.b_to_a);
        assert_eq!(st.b.stored, s.a_to_b);
        assert_eq!(count_delivered(&st), (6, 6));
        let nums: Vec<u32> = lines.iter().map(|l| l.line_no).collect();
        assert_eq!(nums, (1..=22).collect::<Vec<_>>());
    }

    #[test]
    fn round_three_double_error_only_resends() {
        let errs = canonical();
        let (before, _) = ab_run_rounds(&default_init(), &errs, 2).unwrap();
        let (after, lines) = ab_round(&before, true, true).unwrap();
        assert_eq!(after.a, before.a);
        assert_eq!(after.b, before.b);
        assert_eq!(after.counter, before.counter + 1);
        assert_eq!(lines[0].line_no, 5);
        assert_eq!(lines[1].line_no, 6);
    }

    #[test]
    fn schedule_exhaustion_keeps_msgt() {
        let errs = PerRoundTraces::error_free(6);
        let (st, _) = ab_run_rounds(&default_init(), &errs, 6).unwrap();
        assert!(st.is_complete());
        assert_eq!(&*st.b.msgt, "BA6");
        assert_eq!(st.counter_msgs(Terminal::B), 8);
        // Past completion every event stutters.
        let rec = st.receive(false).unwrap();
        assert_eq!(rec.outcome, Outcome::Stutter);
        assert_eq!(rec.state.a, st.a);
        assert_eq!(rec.state.pending.receiver, Terminal::B);
        let mut s = st;
        for _ in 0..10 {
            s = s.event(false).unwrap().state;
        }
        assert_eq!(s.count_delivered(), (6, 6));
    }

    #[test]
    fn round_requires_recv_a() {
        let s = default_init().event(false).unwrap().state;
        assert!(matches!(
            ab_round(&s, false, false),
            Err(ProtocolError::Phase { op: "round", .. })
        ));
    }
}

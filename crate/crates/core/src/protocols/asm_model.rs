//! The alternating-bit protocol written as kernel rules, following the
//! round-based reference model: the receiver reads the sender's current
//! `ALTT` directly instead of going through a message buffer, and printing is
//! an update of the `output(n)` location.
//!
//! This is an independent route to the legacy output; [`super::ab`] is the
//! message-buffer model that the checker drives.

use crate::faults::PerRoundTraces;
use crate::kernel::{forall_merge, par, seq, step, Location, MachineState, Rule, Value};

use super::legacy::OutputLine;
use super::{ProtocolError, Terminal};

fn t_val(t: Terminal) -> Value {
    Value::from(t.as_str())
}

pub fn file_number(t: Terminal) -> Location {
    Location::unary("fileNumber", t_val(t))
}

pub fn altt(t: Terminal) -> Location {
    Location::unary("ALTT", t_val(t))
}

pub fn altr(t: Terminal) -> Location {
    Location::unary("ALTR", t_val(t))
}

pub fn counter() -> Location {
    Location::nullary("counter")
}

pub fn initialized() -> Location {
    Location::nullary("initialized")
}

pub fn output(n: i64) -> Location {
    Location::unary("output", n)
}

fn err_trace(t: Terminal, round: i64) -> Location {
    let name = match t {
        Terminal::A => "errTraceA",
        Terminal::B => "errTraceB",
    };
    Location::unary(name, round)
}

fn int(s: &MachineState, loc: &Location) -> i64 {
    s.get(loc).as_int().unwrap_or(0)
}

fn boolean(s: &MachineState, loc: &Location) -> bool {
    s.get(loc).as_bool().unwrap_or(false)
}

/// Binds the static error-trace functions.
pub fn with_error_traces(s: MachineState, errors: &PerRoundTraces) -> MachineState {
    let mut s = s;
    for k in 1..=errors.rounds() {
        s = s
            .with(err_trace(Terminal::A, k as i64), errors.a(k))
            .with(err_trace(Terminal::B, k as i64), errors.b(k));
    }
    s
}

/// `fileNumber(A) := 0, fileNumber(B) := 1, ALTT(t) := true, ALTR(t) := false,
/// counter := 1, initialized := true`, all in parallel.
pub fn initialize() -> Rule {
    par(vec![
        Rule::set(file_number(Terminal::A), 0i64),
        Rule::set(file_number(Terminal::B), 1i64),
        forall_merge(Terminal::ALL.to_vec(), |t| Rule::set(altt(*t), true)),
        forall_merge(Terminal::ALL.to_vec(), |t| Rule::set(altr(*t), false)),
        Rule::set(counter(), 1i64),
        Rule::set(initialized(), true),
    ])
}

/// `ALTR(t) := ALTT(other(t))`.
pub fn receive_bit(t: Terminal) -> Rule {
    let src = altt(t.other());
    Rule::assign(altr(t), move |s| Value::Bool(boolean(s, &src)))
}

/// The legacy line for a receive at `t` in the current state.
pub fn output_line(s: &MachineState, t: Terminal) -> OutputLine {
    let c = int(s, &counter());
    OutputLine {
        line_no: OutputLine::number(c as u32, t),
        receiver: t,
        sender_label: format!("{}{}{}", t.other(), t, int(s, &file_number(t.other()))),
        counter: c as u32,
        printed_error: boolean(s, &err_trace(Terminal::A, c)),
        altr_shown: boolean(s, &altr(t)),
        altt_shown: boolean(s, &altt(t)),
    }
}

/// `output(n) := outputLine(t)`.
pub fn print_line(t: Terminal) -> Rule {
    Rule::new(format!("print({t})"), move |s| {
        let line = output_line(s, t);
        Ok(crate::kernel::UpdateSet::single(
            output(line.line_no as i64),
            line.to_string(),
        ))
    })
}

/// The acceptance condition evaluated against the current `ALTR`.
pub fn accept_condition(s: &MachineState, t: Terminal) -> bool {
    let r = boolean(s, &altr(t));
    let own = boolean(s, &altt(t));
    match t {
        Terminal::A => r == own,
        Terminal::B => r == !own,
    }
}

/// `if condition then { fileNumber(t) += 1, ALTT(t) := not ALTT(t) }`.
pub fn accept_test(t: Terminal) -> Rule {
    let fnum = file_number(t);
    let bit = altt(t);
    par(vec![
        Rule::assign(fnum.clone(), move |s| Value::Int(int(s, &fnum) + 1)),
        Rule::assign(bit.clone(), move |s| Value::Bool(!boolean(s, &bit))),
    ])
    .when(move |s| accept_condition(s, t))
}

/// `receiveBit(t) seq print seq acceptTest(t)`.
pub fn receive_success(t: Terminal) -> Rule {
    seq(vec![receive_bit(t), print_line(t), accept_test(t)])
}

/// Receives at `t` under `errTrace<t>(counter)`.
pub fn receive_msg(t: Terminal) -> Rule {
    receive_success(t).or_else(
        move |s| !boolean(s, &err_trace(t, int(s, &counter()))),
        print_line(t),
    )
}

/// One round: A receives, then B receives while the counter advances.
pub fn round() -> Rule {
    seq(vec![
        Rule::skip(),
        receive_msg(Terminal::A),
        Rule::skip(),
        par(vec![
            receive_msg(Terminal::B),
            Rule::assign(counter(), |s| Value::Int(int(s, &counter()) + 1)),
        ]),
    ])
}

/// Top-level rule: initialize once, then run rounds while `counter <= rounds`.
pub fn run(rounds: usize) -> Rule {
    let limit = rounds as i64;
    let go = round().when(move |s| int(s, &counter()) <= limit);
    initialize().or_else(|s| !boolean(s, &initialized()), go)
}

/// Executes [`run`] to its fixpoint and returns the final state plus the
/// printed lines in order.
pub fn execute(
    errors: &PerRoundTraces,
    rounds: usize,
) -> Result<(MachineState, Vec<String>), ProtocolError> {
    let rule = run(rounds);
    let mut s = with_error_traces(MachineState::new(), errors);
    // One step to initialize plus one per round.
    for _ in 0..=rounds {
        s = step(&s, &rule)?;
    }
    let lines = (1..=2 * rounds as i64)
        .map(|n| s.get(&output(n)).as_label().unwrap_or_default().to_owned())
        .collect();
    Ok((s, lines))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::canonical;

    #[test]
    fn initialize_from_empty() {
        let s = step(&MachineState::new(), &initialize()).unwrap();
        assert_eq!(s.get(&altt(Terminal::A)), &Value::Bool(true));
        assert_eq!(s.get(&altt(Terminal::B)), &Value::Bool(true));
        assert_eq!(s.get(&file_number(Terminal::A)), &Value::Int(0));
        assert_eq!(s.get(&file_number(Terminal::B)), &Value::Int(1));
        assert_eq!(s.get(&counter()), &Value::Int(1));
        assert_eq!(s.get(&initialized()), &Value::Bool(true));
    }

    #[test]
    fn receive_success_reads_bit_before_testing() {
        // ALTR(A) starts false, ALTT(A) and ALTT(B) true: the acceptance test
        // only passes if it sees the freshly received bit.
        let s = step(&MachineState::new(), &initialize()).unwrap();
        assert!(!accept_condition(&s, Terminal::A));
        let s2 = step(&s, &receive_success(Terminal::A)).unwrap();
        assert_eq!(s2.get(&file_number(Terminal::A)), &Value::Int(1));
        assert_eq!(s2.get(&altt(Terminal::A)), &Value::Bool(false));

        // The parallel version evaluates the test against the stale ALTR.
        let parallel = par(vec![receive_bit(Terminal::A), accept_test(Terminal::A)]);
        let s3 = step(&s, &parallel).unwrap();
        assert_eq!(s3.get(&file_number(Terminal::A)), &Value::Int(0));
    }

    #[test]
    fn rule_evaluation_is_pure() {
        let s = with_error_traces(MachineState::new(), &canonical());
        let s = step(&s, &initialize()).unwrap();
        let r = round();
        assert_eq!(r.eval(&s).unwrap(), r.eval(&s).unwrap());
    }

    #[test]
    fn canonical_first_lines() {
        let (_, lines) = execute(&canonical(), 11).unwrap();
        assert_eq!(lines.len(), 22);
        assert_eq!(
            lines[0],
            "1 Terminal B is sending BA1, error(1) = false, ALTR(A) = true, ALTT(A) = true"
        );
        assert_eq!(
            lines[21],
            "22 Terminal A is sending AB6, error(11) = false, ALTR(B) = true, ALTT(B) = false"
        );
    }
}

//! The 22-step complete trace reported by the bounded model checker for the
//! message-buffer model, replayed state by state.

use altbit_core::checker::run_trace;
use altbit_core::protocols::{ab_init, AbConfig, AbState, Terminal};
use altbit_core::InterleavedTrace;

/// alt(A), alt(B), counterMsgs(A), counterMsgs(B), msgt(A), msgt(B),
/// pending bit, pending payload, pending receiver, |stored(A)|, |stored(B)|.
type Row = (
    u8,
    u8,
    u32,
    u32,
    &'static str,
    &'static str,
    u8,
    &'static str,
    char,
    usize,
    usize,
);

#[rustfmt::skip]
const TRACE: [Row; 23] = [
    (1, 1, 1, 2, "garbage", "BA1", 1, "BA1", 'A', 0, 0),
    (0, 1, 2, 2, "AB1", "BA1", 0, "AB1", 'B', 1, 0),
    (0, 0, 2, 3, "AB1", "BA2", 0, "BA2", 'A', 1, 1),
    (1, 0, 3, 3, "AB2", "BA2", 1, "AB2", 'B', 2, 1),
    (1, 1, 3, 4, "AB2", "BA3", 1, "BA3", 'A', 2, 2),
    (0, 1, 4, 4, "AB3", "BA3", 0, "AB3", 'B', 3, 2),
    (0, 0, 4, 5, "AB3", "BA4", 0, "BA4", 'A', 3, 3),
    (1, 0, 5, 5, "AB4", "BA4", 1, "AB4", 'B', 4, 3),
    (1, 0, 5, 5, "AB4", "BA4", 0, "BA4", 'A', 4, 3),
    (1, 0, 5, 5, "AB4", "BA4", 1, "AB4", 'B', 4, 3),
    (1, 0, 5, 5, "AB4", "BA4", 0, "BA4", 'A', 4, 3),
    (1, 0, 5, 5, "AB4", "BA4", 1, "AB4", 'B', 4, 3),
    (1, 1, 5, 6, "AB4", "BA5", 1, "BA5", 'A', 4, 4),
    (0, 1, 6, 6, "AB5", "BA5", 0, "AB5", 'B', 5, 4),
    (0, 1, 6, 6, "AB5", "BA5", 1, "BA5", 'A', 5, 4),
    (0, 1, 6, 6, "AB5", "BA5", 0, "AB5", 'B', 5, 4),
    (0, 1, 6, 6, "AB5", "BA5", 1, "BA5", 'A', 5, 4),
    (0, 1, 6, 6, "AB5", "BA5", 0, "AB5", 'B', 5, 4),
    (0, 1, 6, 6, "AB5", "BA5", 1, "BA5", 'A', 5, 4),
    (0, 1, 6, 6, "AB5", "BA5", 0, "AB5", 'B', 5, 4),
    (0, 0, 6, 7, "AB5", "BA6", 0, "BA6", 'A', 5, 5),
    (1, 0, 7, 7, "AB6", "BA6", 1, "AB6", 'B', 6, 5),
    (1, 1, 7, 8, "AB6", "BA6", 1, "BA6", 'A', 6, 6),
];

const ERRORS: &str = "0000000111100111111000";

type Owned = (
    u8,
    u8,
    u32,
    u32,
    String,
    String,
    u8,
    String,
    char,
    usize,
    usize,
);

fn owned(r: &Row) -> Owned {
    (
        r.0,
        r.1,
        r.2,
        r.3,
        r.4.into(),
        r.5.into(),
        r.6,
        r.7.into(),
        r.8,
        r.9,
        r.10,
    )
}

fn row_of(s: &AbState) -> Owned {
    let receiver = match s.pending.receiver {
        Terminal::A => 'A',
        Terminal::B => 'B',
    };
    (
        s.a.altt as u8,
        s.b.altt as u8,
        s.counter_msgs(Terminal::A),
        s.counter_msgs(Terminal::B),
        s.a.msgt.to_string(),
        s.b.msgt.to_string(),
        s.pending.alt as u8,
        s.pending.payload.to_string(),
        receiver,
        s.a.stored.len(),
        s.b.stored.len(),
    )
}

#[test]
fn replays_all_23_states() {
    let init = ab_init(&AbConfig::default()).unwrap();
    let errors: InterleavedTrace = ERRORS.parse().unwrap();
    assert_eq!(errors.len(), 22);
    let run = run_trace(&init, &errors).unwrap();
    let states: Vec<&AbState> = std::iter::once(&run.init)
        .chain(run.steps.iter().map(|s| &s.state))
        .collect();
    assert_eq!(states.len(), 23);
    for (i, (st, want)) in states.iter().zip(TRACE.iter()).enumerate() {
        assert_eq!(row_of(st), owned(want), "state {}", i + 1);
        for t in Terminal::ALL {
            let expected = st.schedules.expected_at(t);
            assert_eq!(
                st.terminal(t).stored[..],
                expected[..st.terminal(t).stored.len()]
            );
        }
    }
    assert_eq!(run.completed_at(), Some(22));
}

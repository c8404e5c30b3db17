use altbit_core::checker::{check_consistent_prefix, run_trace};
use altbit_core::protocols::{ab_init, AbConfig, AbState, Outcome, Phase, Terminal};
use altbit_core::InterleavedTrace;
use proptest::prelude::*;

fn trace(max: usize) -> impl Strategy<Value = InterleavedTrace> {
    prop::collection::vec(any::<bool>(), 0..=max).prop_map(InterleavedTrace::new)
}

fn init() -> AbState {
    ab_init(&AbConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn deterministic(t in trace(40)) {
        prop_assert_eq!(run_trace(&init(), &t).unwrap(), run_trace(&init(), &t).unwrap());
    }

    #[test]
    fn stored_is_always_a_prefix(t in trace(40)) {
        let run = run_trace(&init(), &t).unwrap();
        for s in &run.steps {
            prop_assert!(check_consistent_prefix(&s.state));
        }
    }

    #[test]
    fn altt_flips_exactly_on_accept(t in trace(40)) {
        let run = run_trace(&init(), &t).unwrap();
        let mut prev = run.init.clone();
        for s in &run.steps {
            let before = prev.terminal(s.receiver);
            let after = s.state.terminal(s.receiver);
            prop_assert_eq!(before.altt != after.altt, s.outcome == Outcome::Accepted);
            prop_assert_eq!(
                after.stored.len(),
                before.stored.len() + usize::from(s.outcome == Outcome::Accepted)
            );
            prev = s.state.clone();
        }
    }

    #[test]
    fn errors_leave_the_receiver_alone(t in trace(40)) {
        let run = run_trace(&init(), &t).unwrap();
        let mut prev = run.init.clone();
        for s in &run.steps {
            if s.error {
                prop_assert_eq!(prev.terminal(s.receiver), s.state.terminal(s.receiver));
            }
            // The sender is never touched by the other side's receive.
            prop_assert_eq!(prev.terminal(s.receiver.other()), s.state.terminal(s.receiver.other()));
            prev = s.state.clone();
        }
    }

    #[test]
    fn phases_cycle(t in trace(40)) {
        let run = run_trace(&init(), &t).unwrap();
        let mut expect = Terminal::A;
        for s in &run.steps {
            prop_assert_eq!(s.receiver, expect);
            prop_assert_eq!(s.state.phase, Phase::receive_of(expect.other()));
            prop_assert_eq!(s.state.pending.receiver, expect.other());
            expect = expect.other();
        }
    }

    #[test]
    fn lines_are_numbered_by_event(t in trace(40)) {
        let run = run_trace(&init(), &t).unwrap();
        for s in &run.steps {
            prop_assert_eq!(s.line.line_no as usize, s.event);
        }
    }

    #[test]
    fn stutter_only_after_completion(t in trace(40)) {
        let run = run_trace(&init(), &t).unwrap();
        let done = run.completed_at();
        for s in &run.steps {
            prop_assert_eq!(s.outcome == Outcome::Stutter, done.is_some_and(|d| s.event > d));
        }
    }
}

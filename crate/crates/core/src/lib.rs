//! Models of the alternating-bit protocol and Lynch's two-bit variant, with
//! a small ASM update-set kernel, a bounded exhaustive checker and system
//! state-space tools.

pub mod checker;
pub mod faults;
pub mod kernel;
pub mod protocols;
pub mod statespace;

pub use checker::{
    explore, run_trace, search_completion, sweep_ab, sweep_lynch, CheckError, Counterexample,
    Explorer, IcResult, Invariant, RunTrace, Verdict,
};
pub use faults::{InterleavedTrace, PerRoundTraces, TraceError};
pub use kernel::{KernelError, Location, MachineState, Rule, UpdateSet, Value};
pub use protocols::{
    AbConfig, AbState, Label, LynchIc, LynchState, Outcome, Phase, ProtocolError, Schedules,
    Terminal,
};
pub use statespace::{FsmGraph, Motif, SysState, TerminalLabel};

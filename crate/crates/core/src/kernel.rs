//! Minimal abstract-state-machine execution layer.
//!
//! A [`MachineState`] binds [`Location`]s to [`Value`]s. Rules never mutate a
//! state: they evaluate to an [`UpdateSet`], and [`apply`] produces the next
//! snapshot. Locations absent from an update set keep their value.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// The value universe shared by every model in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Value {
    #[default]
    Undef,
    Bool(bool),
    Int(i64),
    Label(String),
    Labels(Vec<String>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<&str> {
        match self {
            Value::Label(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_labels(&self) -> Option<&[String]> {
        match self {
            Value::Labels(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_undef(&self) -> bool {
        matches!(self, Value::Undef)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undef => f.write_str("undef"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Label(s) => f.write_str(s),
            Value::Labels(v) => write!(f, "<<{}>>", v.join(", ")),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Label(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Label(s)
    }
}

/// A function name applied to an argument tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub name: String,
    pub args: Vec<Value>,
}

impl Location {
    pub fn new(name: impl Into<String>, args: Vec<Value>) -> Self {
        Location {
            name: name.into(),
            args,
        }
    }

    /// A nullary location such as `counter`.
    pub fn nullary(name: impl Into<String>) -> Self {
        Location::new(name, Vec::new())
    }

    pub fn unary(name: impl Into<String>, arg: impl Into<Value>) -> Self {
        Location::new(name, vec![arg.into()])
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("inconsistent update set: {loc} := {first} and {loc} := {second}")]
    Conflict {
        loc: Location,
        first: Value,
        second: Value,
    },
    #[error("choose over an empty range")]
    EmptyChoice,
    #[error("rule evaluation failed: {0}")]
    Eval(String),
}

/// A single location-value pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub loc: Location,
    pub value: Value,
}

impl Update {
    pub fn new(loc: Location, value: impl Into<Value>) -> Self {
        Update {
            loc,
            value: value.into(),
        }
    }
}

/// A consistent set of updates. Construction rejects a second write of a
/// different value to the same location, so every `UpdateSet` value is
/// consistent by construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UpdateSet {
    updates: BTreeMap<Location, Value>,
}

impl UpdateSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(loc: Location, value: impl Into<Value>) -> Self {
        let mut u = UpdateSet::new();
        u.updates.insert(loc, value.into());
        u
    }

    /// Builds a set from arbitrary updates, failing on the first conflict.
    pub fn from_updates<I: IntoIterator<Item = Update>>(iter: I) -> Result<Self, KernelError> {
        let mut u = UpdateSet::new();
        for up in iter {
            u.insert(up.loc, up.value)?;
        }
        Ok(u)
    }

    pub fn insert(&mut self, loc: Location, value: impl Into<Value>) -> Result<(), KernelError> {
        let value = value.into();
        match self.updates.get(&loc) {
            Some(existing) if *existing != value => Err(KernelError::Conflict {
                loc,
                first: existing.clone(),
                second: value,
            }),
            Some(_) => Ok(()),
            None => {
                self.updates.insert(loc, value);
                Ok(())
            }
        }
    }

    pub fn get(&self, loc: &Location) -> Option<&Value> {
        self.updates.get(loc)
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    pub fn locations(&self) -> impl Iterator<Item = &Location> {
        self.updates.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Location, &Value)> {
        self.updates.iter()
    }

    /// Sequential composition: `later` wins on shared locations.
    fn overridden_by(mut self, later: UpdateSet) -> UpdateSet {
        self.updates.extend(later.updates);
        self
    }
}

/// Union of two update sets. Equal-value duplicates collapse; a location
/// written with two different values is a [`KernelError::Conflict`].
pub fn merge(a: &UpdateSet, b: &UpdateSet) -> Result<UpdateSet, KernelError> {
    let mut out = a.clone();
    for (loc, v) in &b.updates {
        out.insert(loc.clone(), v.clone())?;
    }
    Ok(out)
}

/// Snapshot of the global state. Unbound locations read as `undef`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MachineState {
    bindings: BTreeMap<Location, Value>,
}

static UNDEF: Value = Value::Undef;

impl MachineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, loc: &Location) -> &Value {
        self.bindings.get(loc).unwrap_or(&UNDEF)
    }

    /// Shorthand for reading `name(arg)`.
    pub fn read(&self, name: &str, arg: impl Into<Value>) -> &Value {
        self.get(&Location::unary(name, arg))
    }

    pub fn read0(&self, name: &str) -> &Value {
        self.get(&Location::nullary(name))
    }

    pub fn with(mut self, loc: Location, value: impl Into<Value>) -> Self {
        self.bindings.insert(loc, value.into());
        self
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&Location, &Value)> {
        self.bindings.iter()
    }

    /// Locations whose value is something other than `undef`.
    pub fn defined_len(&self) -> usize {
        self.bindings.values().filter(|v| !v.is_undef()).count()
    }
}

/// Returns `s` with every location in `u` rebound. Because `UpdateSet` is
/// consistent by construction this cannot fail; the `Result` mirrors the
/// rule-level API.
pub fn apply(s: &MachineState, u: &UpdateSet) -> Result<MachineState, KernelError> {
    let mut next = s.clone();
    for (loc, v) in &u.updates {
        next.bindings.insert(loc.clone(), v.clone());
    }
    Ok(next)
}

type RuleFn = dyn Fn(&MachineState) -> Result<UpdateSet, KernelError> + Send + Sync;

/// A deterministic transition rule: a pure function from state to update set.
#[derive(Clone)]
pub struct Rule {
    name: Arc<str>,
    eval: Arc<RuleFn>,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Rule").field(&self.name).finish()
    }
}

impl Rule {
    pub fn new<F>(name: impl Into<Arc<str>>, f: F) -> Self
    where
        F: Fn(&MachineState) -> Result<UpdateSet, KernelError> + Send + Sync + 'static,
    {
        Rule {
            name: name.into(),
            eval: Arc::new(f),
        }
    }

    pub fn skip() -> Self {
        Rule::new("skip", |_| Ok(UpdateSet::new()))
    }

    /// `loc := f(state)`.
    pub fn assign<F>(loc: Location, f: F) -> Self
    where
        F: Fn(&MachineState) -> Value + Send + Sync + 'static,
    {
        let name = format!("{loc} := ..");
        Rule::new(name, move |s| Ok(UpdateSet::single(loc.clone(), f(s))))
    }

    /// `loc := value`.
    pub fn set(loc: Location, value: impl Into<Value>) -> Self {
        let value = value.into();
        let name = format!("{loc} := {value}");
        Rule::new(name, move |_| {
            Ok(UpdateSet::single(loc.clone(), value.clone()))
        })
    }

    /// `if guard then self`.
    pub fn when<G>(self, guard: G) -> Self
    where
        G: Fn(&MachineState) -> bool + Send + Sync + 'static,
    {
        let name = format!("if .. then {}", self.name);
        Rule::new(name, move |s| {
            if guard(s) {
                self.eval(s)
            } else {
                Ok(UpdateSet::new())
            }
        })
    }

    /// `if guard then self else other`.
    pub fn or_else<G>(self, guard: G, other: Rule) -> Self
    where
        G: Fn(&MachineState) -> bool + Send + Sync + 'static,
    {
        let name = format!("if .. then {} else {}", self.name, other.name);
        Rule::new(name, move |s| {
            if guard(s) {
                self.eval(s)
            } else {
                other.eval(s)
            }
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, s: &MachineState) -> Result<UpdateSet, KernelError> {
        (self.eval)(s)
    }
}

/// Parallel block: every sub-rule sees the same state, results are merged.
pub fn par(rules: Vec<Rule>) -> Rule {
    let name = format!(
        "{{ {} }}",
        rules.iter().map(Rule::name).collect::<Vec<_>>().join(" ")
    );
    Rule::new(name, move |s| {
        rules
            .iter()
            .try_fold(UpdateSet::new(), |acc, r| merge(&acc, &r.eval(s)?))
    })
}

/// Fires `r` once: `apply(s, r(s))`.
pub fn step(s: &MachineState, r: &Rule) -> Result<MachineState, KernelError> {
    apply(s, &r.eval(s)?)
}

/// Sequential composition. Each stage sees the state produced by the
/// previous stages; the result is the composed update set, where later
/// stages override earlier writes to the same location.
pub fn seq(rules: Vec<Rule>) -> Rule {
    let name = format!(
        "{{| {} |}}",
        rules
            .iter()
            .map(Rule::name)
            .collect::<Vec<_>>()
            .join(" seq ")
    );
    Rule::new(name, move |s| {
        let mut cur = s.clone();
        let mut net = UpdateSet::new();
        for r in &rules {
            let u = r.eval(&cur)?;
            cur = apply(&cur, &u)?;
            net = net.overridden_by(u);
        }
        Ok(net)
    })
}

/// `forall x in range do body(x)`: the bodies run in parallel and are merged.
pub fn forall_merge<T, F>(range: Vec<T>, body: F) -> Rule
where
    T: Send + Sync + 'static,
    F: Fn(&T) -> Rule + Send + Sync + 'static,
{
    Rule::new("forall", move |s| {
        range
            .iter()
            .try_fold(UpdateSet::new(), |acc, x| merge(&acc, &body(x).eval(s)?))
    })
}

/// `choose x in range do body(x)`: one candidate update set per element, in
/// range order. The caller decides which branch fires (or explores all).
pub fn choose_branches<T, F>(
    s: &MachineState,
    range: &[T],
    body: F,
) -> Result<Vec<UpdateSet>, KernelError>
where
    F: Fn(&T) -> Rule,
{
    if range.is_empty() {
        return Err(KernelError::EmptyChoice);
    }
    range.iter().map(|x| body(x).eval(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Location {
        Location::nullary("x")
    }

    fn y() -> Location {
        Location::nullary("y")
    }

    #[test]
    fn merge_empty() {
        let m = merge(&UpdateSet::new(), &UpdateSet::new()).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn merge_equal_values_dedup() {
        let a = UpdateSet::single(x(), 1i64);
        let m = merge(&a, &a.clone()).unwrap();
        assert_eq!(m, a);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn merge_conflict_reports_both_values() {
        let err = merge(&UpdateSet::single(x(), 1i64), &UpdateSet::single(x(), 2i64)).unwrap_err();
        assert_eq!(
            err,
            KernelError::Conflict {
                loc: x(),
                first: Value::Int(1),
                second: Value::Int(2)
            }
        );
    }

    #[test]
    fn apply_examples() {
        let s = MachineState::new().with(x(), 1i64);
        assert_eq!(apply(&s, &UpdateSet::new()).unwrap(), s);

        let s2 = apply(&s, &UpdateSet::single(y(), 2i64)).unwrap();
        assert_eq!(s2.get(&x()), &Value::Int(1));
        assert_eq!(s2.get(&y()), &Value::Int(2));

        let s3 = apply(&s, &UpdateSet::single(x(), Value::Undef)).unwrap();
        assert!(s3.get(&x()).is_undef());
    }

    #[test]
    fn unbound_reads_undef() {
        assert!(MachineState::new().read("ALTR", "A").is_undef());
    }

    #[test]
    fn step_noop_and_parallel_increment() {
        let s = MachineState::new().with(x(), 5i64);
        assert_eq!(step(&s, &Rule::skip()).unwrap(), s);

        let inc = || Rule::assign(x(), |s| Value::Int(s.get(&x()).as_int().unwrap() + 1));
        let twice = par(vec![inc(), inc()]);
        let s2 = step(&s, &twice).unwrap();
        assert_eq!(s2.get(&x()), &Value::Int(6));
    }

    #[test]
    fn seq_empty_is_identity() {
        let s = MachineState::new().with(x(), 3i64);
        assert!(seq(vec![]).eval(&s).unwrap().is_empty());
    }

    #[test]
    fn seq_read_after_write() {
        let s = MachineState::new().with(x(), 0i64);
        let r = seq(vec![
            Rule::set(x(), 1i64),
            Rule::assign(y(), |s| s.get(&Location::nullary("x")).clone()),
        ]);
        let net = r.eval(&s).unwrap();
        assert_eq!(net.get(&x()), Some(&Value::Int(1)));
        assert_eq!(net.get(&y()), Some(&Value::Int(1)));
        assert_eq!(net.len(), 2);
    }

    #[test]
    fn seq_stage_conflict_propagates() {
        let r = seq(vec![par(vec![Rule::set(x(), 1i64), Rule::set(x(), 2i64)])]);
        assert!(matches!(
            r.eval(&MachineState::new()),
            Err(KernelError::Conflict { .. })
        ));
    }

    #[test]
    fn forall_examples() {
        let empty = forall_merge(Vec::<i64>::new(), |_| Rule::set(x(), 1i64));
        assert!(empty.eval(&MachineState::new()).unwrap().is_empty());

        let both = forall_merge(vec!["A", "B"], |t| {
            Rule::set(Location::unary("ALTT", *t), true)
        });
        let u = both.eval(&MachineState::new()).unwrap();
        assert_eq!(
            u.get(&Location::unary("ALTT", "A")),
            Some(&Value::Bool(true))
        );
        assert_eq!(
            u.get(&Location::unary("ALTT", "B")),
            Some(&Value::Bool(true))
        );

        let clash = forall_merge(vec![1i64, 2], |v| Rule::set(x(), *v));
        assert!(matches!(
            clash.eval(&MachineState::new()),
            Err(KernelError::Conflict { .. })
        ));
    }

    #[test]
    fn choose_examples() {
        let s = MachineState::new();
        let err = Location::nullary("error");
        let one = choose_branches(&s, &[false], |b| Rule::set(err.clone(), *b)).unwrap();
        assert_eq!(one.len(), 1);

        let two = choose_branches(&s, &[false, true], |b| Rule::set(err.clone(), *b)).unwrap();
        assert_eq!(two.len(), 2);
        assert_ne!(two[0], two[1]);

        let none = choose_branches(&s, &[] as &[bool], |b| Rule::set(err.clone(), *b));
        assert_eq!(none.unwrap_err(), KernelError::EmptyChoice);
    }

    #[test]
    fn location_display() {
        assert_eq!(Location::unary("ALTT", "A").to_string(), "ALTT(A)");
        assert_eq!(Location::nullary("counter").to_string(), "counter");
    }
}

//! Forward chaining of production rules.
//!
//! Rules fire in definition order; each round re-scans every rule against the
//! current state, and chaining stops after a round in which nothing fired. An
//! instantiation fires when its actions change the state, or when it emits
//! events and was not already satisfied before the TELL began.

use std::collections::BTreeSet;

use super::model::{Assertion, EmittedEvent, RuleAction, StateDelta, Value};
use super::query::{Binding, Term};
use super::{Kb, KbError};

type Instantiation = (String, Binding);

fn resolve(t: &Term, b: &Binding) -> Value {
    match t {
        Term::Var(v) => b.get(v).cloned().expect("rule variables are bound by the condition"),
        Term::Const(c) => c.clone(),
    }
}

fn subject(t: &Term, b: &Binding) -> String {
    resolve(t, b).to_string()
}

impl Kb {
    /// Instantiations of event-emitting rules satisfied in the current state.
    pub(super) fn emitting_instantiations(&self) -> Result<BTreeSet<Instantiation>, KbError> {
        let mut out = BTreeSet::new();
        for rule in &self.rules {
            if rule.actions.iter().any(|a| matches!(a, RuleAction::Emit(..))) {
                for b in self.solve(&rule.condition)? {
                    out.insert((rule.id.clone(), b));
                }
            }
        }
        Ok(out)
    }

    pub(super) fn run_rules(
        &mut self,
        delta: &mut StateDelta,
        pre_satisfied: &BTreeSet<Instantiation>,
    ) -> Result<(), KbError> {
        if self.rules.is_empty() {
            return Ok(());
        }
        let mut emitted: BTreeSet<Instantiation> = BTreeSet::new();
        let mut round = 0;
        loop {
            if round >= self.rule_cap {
                let still: Vec<String> = self.firing_now()?;
                return Err(KbError::RuleLoop { rounds: round, rules: still });
            }
            round += 1;
            let mut fired_any = false;
            for ri in 0..self.rules.len() {
                let rule = self.rules[ri].clone();
                for b in self.solve(&rule.condition)? {
                    let mut changed = false;
                    let mut events = Vec::new();
                    for action in &rule.actions {
                        match action {
                            RuleAction::AssertFiller(x, r, y) => {
                                let a = Assertion::Filler {
                                    instance: subject(x, &b),
                                    role: r.clone(),
                                    value: resolve(y, &b),
                                };
                                changed |= self.apply(&a, delta)?;
                            }
                            RuleAction::RetractFiller(x, r, y) => {
                                let a = Assertion::RetractFiller {
                                    instance: subject(x, &b),
                                    role: r.clone(),
                                    value: Some(resolve(y, &b)),
                                };
                                changed |= self.apply(&a, delta)?;
                            }
                            RuleAction::AssertType(x, c) => {
                                let a = Assertion::Type { instance: subject(x, &b), concept: c.clone() };
                                changed |= self.apply(&a, delta)?;
                            }
                            RuleAction::Emit(name, args) => events.push(EmittedEvent {
                                rule: rule.id.clone(),
                                name: name.clone(),
                                args: args.iter().map(|t| resolve(t, &b)).collect(),
                            }),
                        }
                    }
                    let key = (rule.id.clone(), b);
                    let emits_new = !events.is_empty()
                        && !pre_satisfied.contains(&key)
                        && !emitted.contains(&key);
                    if changed || emits_new {
                        fired_any = true;
                        if !delta.fired_rules.contains(&rule.id) {
                            delta.fired_rules.push(rule.id.clone());
                        }
                        if !events.is_empty() && emitted.insert(key) {
                            delta.events.extend(events);
                        }
                    }
                    if changed {
                        self.reclassify_all();
                    }
                }
            }
            if !fired_any {
                return Ok(());
            }
        }
    }

    /// Rules with at least one satisfied instantiation (loop diagnostics).
    fn firing_now(&self) -> Result<Vec<String>, KbError> {
        let mut out = Vec::new();
        for rule in &self.rules {
            if self.holds(&rule.condition)? {
                out.push(rule.id.clone());
            }
        }
        Ok(out)
    }
}

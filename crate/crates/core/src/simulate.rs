//! Executing plans against the knowledge base.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kb::{Atom, Kb, KbError, Query, StateDelta, Term};
use crate::plan::{expand_plan, ExpandedPlan, ExpandedStep, PlanAction, PlanError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditionResult {
    pub query: Query,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Executed,
    SkippedByCondition,
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub action: String,
    pub precondition_results: Vec<PreconditionResult>,
    pub delta: StateDelta,
    pub fired_rules: Vec<String>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub plan: String,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn blocked(&self) -> Option<&TraceEntry> {
        self.entries.last().filter(|e| e.status == Status::Blocked)
    }

    pub fn status_of(&self, action: &str) -> Option<Status> {
        self.entries.iter().find(|e| e.action == action).map(|e| e.status)
    }

    /// The part of the expanded plan this trace actually walked: skipped branches
    /// and anything after a blocked action are dropped.
    pub fn retained(&self, expanded: &ExpandedPlan) -> ExpandedPlan {
        let walked: BTreeSet<&str> = self
            .entries
            .iter()
            .filter(|e| e.status != Status::SkippedByCondition)
            .map(|e| e.action.as_str())
            .collect();
        fn keep(steps: &[ExpandedStep], walked: &BTreeSet<&str>) -> Vec<ExpandedStep> {
            steps
                .iter()
                .filter_map(|s| match s {
                    ExpandedStep::Leaf { action } => walked.contains(action.id.as_str()).then(|| s.clone()),
                    ExpandedStep::Refined { action, via, steps } => {
                        let kept = keep(steps, walked);
                        (!kept.is_empty()).then(|| ExpandedStep::Refined {
                            action: action.clone(),
                            via: via.clone(),
                            steps: kept,
                        })
                    }
                    ExpandedStep::Conditional { id, condition, then, otherwise } => {
                        let then = keep(then, walked);
                        let otherwise = keep(otherwise, walked);
                        (!then.is_empty() || !otherwise.is_empty()).then(|| ExpandedStep::Conditional {
                            id: id.clone(),
                            condition: condition.clone(),
                            then,
                            otherwise,
                        })
                    }
                })
                .collect()
        }
        ExpandedPlan { plan: expanded.plan.clone(), steps: keep(&expanded.steps, &walked) }
    }
}

/// Evaluates every precondition on the current state without mutating it.
pub fn check_preconditions(action: &PlanAction, kb: &Kb) -> Result<Vec<PreconditionResult>, KbError> {
    action
        .preconditions
        .iter()
        .map(|q| Ok(PreconditionResult { query: q.clone(), holds: kb.holds(q)? }))
        .collect()
}

/// Performs the action if its preconditions hold. A postcondition error leaves the KB untouched.
pub fn execute_action(action: &PlanAction, kb: &mut Kb) -> Result<TraceEntry, KbError> {
    let precondition_results = check_preconditions(action, kb)?;
    if precondition_results.iter().any(|r| !r.holds) {
        return Ok(TraceEntry {
            action: action.id.clone(),
            precondition_results,
            delta: StateDelta::default(),
            fired_rules: Vec::new(),
            status: Status::Blocked,
        });
    }
    let delta = kb.tell_all(&action.postconditions)?;
    Ok(TraceEntry {
        action: action.id.clone(),
        precondition_results,
        fired_rules: delta.fired_rules.clone(),
        delta,
        status: Status::Executed,
    })
}

fn skipped(steps: &[ExpandedStep], trace: &mut Vec<TraceEntry>) {
    for s in steps {
        match s {
            ExpandedStep::Leaf { action } => trace.push(TraceEntry {
                action: action.id.clone(),
                precondition_results: Vec::new(),
                delta: StateDelta::default(),
                fired_rules: Vec::new(),
                status: Status::SkippedByCondition,
            }),
            ExpandedStep::Refined { steps, .. } => skipped(steps, trace),
            ExpandedStep::Conditional { then, otherwise, .. } => {
                skipped(then, trace);
                skipped(otherwise, trace);
            }
        }
    }
}

/// Walks steps in order; returns false once an action blocks.
fn run(steps: &[ExpandedStep], kb: &mut Kb, trace: &mut Vec<TraceEntry>) -> Result<bool, KbError> {
    for s in steps {
        match s {
            ExpandedStep::Leaf { action } => {
                let entry = execute_action(action, kb)?;
                let blocked = entry.status == Status::Blocked;
                trace.push(entry);
                if blocked {
                    return Ok(false);
                }
            }
            ExpandedStep::Refined { action, steps, .. } => {
                let pre = check_preconditions(action, kb)?;
                if pre.iter().any(|r| !r.holds) {
                    trace.push(TraceEntry {
                        action: action.id.clone(),
                        precondition_results: pre,
                        delta: StateDelta::default(),
                        fired_rules: Vec::new(),
                        status: Status::Blocked,
                    });
                    return Ok(false);
                }
                if !run(steps, kb, trace)? {
                    return Ok(false);
                }
                let delta = kb.tell_all(&action.postconditions)?;
                trace.push(TraceEntry {
                    action: action.id.clone(),
                    precondition_results: pre,
                    fired_rules: delta.fired_rules.clone(),
                    delta,
                    status: Status::Executed,
                });
            }
            ExpandedStep::Conditional { condition, then, otherwise, .. } => {
                let (taken, not_taken) = if kb.holds(condition)? { (then, otherwise) } else { (otherwise, then) };
                skipped(not_taken, trace);
                if !run(taken, kb, trace)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Simulates the plan on a copy of the knowledge base.
pub fn simulate(plan_id: &str, kb: &Kb) -> Result<Trace, PlanError> {
    let mut scratch = kb.clone();
    simulate_live(plan_id, &mut scratch)
}

/// Simulates the plan directly on `kb`, leaving the post-simulation state behind.
pub fn simulate_live(plan_id: &str, kb: &mut Kb) -> Result<Trace, PlanError> {
    let expanded = expand_plan(kb, plan_id)?;
    let mut entries = Vec::new();
    run(&expanded.steps, kb, &mut entries)?;
    Ok(Trace { plan: plan_id.to_string(), entries })
}

/// Three-valued status of a condition given the data actually asserted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    Unknown,
}

fn decide_atom(atom: &Atom, kb: &Kb) -> Decision {
    let q = Query::single(atom.clone());
    if kb.holds(&q).unwrap_or(false) {
        return Decision::True;
    }
    let subject = match atom.subject() {
        Term::Const(v) => v.as_str().map(str::to_string),
        Term::Var(_) => None,
    };
    let Some(subject) = subject.filter(|s| kb.has_instance(s)) else {
        return Decision::Unknown;
    };
    let inst = kb.instance(&subject).expect("checked");
    match atom {
        Atom::Filler(_, role, _) | Atom::Compare(_, role, _, _) => {
            if inst.fillers_of(role).next().is_some() {
                Decision::False
            } else {
                Decision::Unknown
            }
        }
        Atom::Type(_, c) => match kb.concept(c) {
            Ok(concept) if concept.primitive => Decision::False,
            _ => Decision::Unknown,
        },
    }
}

/// A condition is false only if an asserted filler falsifies it; missing data is unknown.
pub fn decide(condition: &Query, kb: &Kb) -> Decision {
    let mut all_true = true;
    for atom in condition.atoms() {
        match decide_atom(atom, kb) {
            Decision::False => return Decision::False,
            Decision::Unknown => all_true = false,
            Decision::True => {}
        }
    }
    if all_true && kb.holds(condition).unwrap_or(false) {
        Decision::True
    } else {
        Decision::Unknown
    }
}

/// Drops branches the current device state rules out.
pub fn filter_relevant_steps(plan_id: &str, kb: &Kb) -> Result<ExpandedPlan, PlanError> {
    let expanded = expand_plan(kb, plan_id)?;
    Ok(filter_expanded(&expanded, kb))
}

pub fn filter_expanded(expanded: &ExpandedPlan, kb: &Kb) -> ExpandedPlan {
    fn prune(steps: &[ExpandedStep], kb: &Kb) -> Vec<ExpandedStep> {
        let mut out = Vec::new();
        for s in steps {
            match s {
                ExpandedStep::Leaf { .. } => out.push(s.clone()),
                ExpandedStep::Refined { action, via, steps } => out.push(ExpandedStep::Refined {
                    action: action.clone(),
                    via: via.clone(),
                    steps: prune(steps, kb),
                }),
                ExpandedStep::Conditional { id, condition, then, otherwise } => match decide(condition, kb) {
                    Decision::False => out.extend(prune(otherwise, kb)),
                    Decision::True => out.push(ExpandedStep::Conditional {
                        id: id.clone(),
                        condition: condition.clone(),
                        then: prune(then, kb),
                        otherwise: Vec::new(),
                    }),
                    Decision::Unknown => out.push(ExpandedStep::Conditional {
                        id: id.clone(),
                        condition: condition.clone(),
                        then: prune(then, kb),
                        otherwise: prune(otherwise, kb),
                    }),
                },
            }
        }
        out
    }
    ExpandedPlan { plan: expanded.plan.clone(), steps: prune(&expanded.steps, kb) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kb::Assertion;

    fn action(json: &str) -> PlanAction {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn preconditions_follow_state() {
        let mut kb = fixtures::car();
        let drain = action(
            r#"{"id":"drain-oil","process":"open","category":"primitive-motor-action",
                "participants":{"patient":"drain-bolt-1"},
                "preconditions":[[{"type":["drain-bolt-1","loosely-connected"]}]]}"#,
        );
        let r = check_preconditions(&drain, &kb).unwrap();
        assert_eq!(r.len(), 1);
        assert!(!r[0].holds);
        let bare = action(r#"{"id":"x","process":"open","category":"primitive-motor-action"}"#);
        assert!(check_preconditions(&bare, &kb).unwrap().is_empty());
        kb.tell(Assertion::filler("drain-bolt-1", "connection-state", "loose")).unwrap();
        assert!(check_preconditions(&drain, &kb).unwrap()[0].holds);
    }

    #[test]
    fn execute_reclassifies_and_fires_rules() {
        let mut kb = fixtures::car();
        kb.tell(Assertion::filler("drain-bolt-1", "connection-state", "loose")).unwrap();
        let tighten = action(
            r#"{"id":"tighten","process":"tighten","category":"primitive-motor-action","participants":{"patient":"drain-bolt-1"},
                "postconditions":[{"op":"filler","instance":"drain-bolt-1","role":"connection-state","value":"tight"}]}"#,
        );
        let e = execute_action(&tighten, &mut kb).unwrap();
        assert_eq!(e.status, Status::Executed);
        assert!(e.delta.gained("drain-bolt-1", "tightly-connected"));

        let fill = kb.plan("refill-washer-fluid").unwrap().actions()[1].clone();
        let e = execute_action(&fill, &mut kb).unwrap();
        assert_eq!(e.fired_rules, ["r-ready"]);
    }

    #[test]
    fn blocked_action_leaves_state() {
        let mut kb = fixtures::car();
        let before = kb.snapshot();
        let a = action(
            r#"{"id":"x","process":"open","category":"primitive-motor-action",
                "preconditions":[[{"type":["drain-bolt-1","loosely-connected"]}]],
                "postconditions":[{"op":"filler","instance":"drain-bolt-1","role":"connection-state","value":"disconnected"}]}"#,
        );
        assert_eq!(execute_action(&a, &mut kb).unwrap().status, Status::Blocked);
        assert_eq!(kb.snapshot(), before);
    }

    #[test]
    fn low_level_takes_add_oil_branch() {
        let mut kb = fixtures::car();
        kb.tell(Assertion::filler("oil-level-1", "level-state", "low")).unwrap();
        let trace = simulate("check-oil-level", &kb).unwrap();
        assert_eq!(trace.status_of("add-oil"), Some(Status::Executed));
        assert!(trace.blocked().is_none());
        let mut live = kb.clone();
        simulate_live("check-oil-level", &mut live).unwrap();
        assert!(live.holds(&serde_json::from_str(r#"[{"filler":["oil-level-1","level-state","ok"]}]"#).unwrap()).unwrap());
        assert_eq!(simulate("check-oil-level", &kb).unwrap(), trace);
    }

    #[test]
    fn ok_level_skips_add_oil() {
        let mut kb = fixtures::car();
        kb.tell(Assertion::filler("oil-level-1", "level-state", "ok")).unwrap();
        let trace = simulate("check-oil-level", &kb).unwrap();
        assert_eq!(trace.status_of("add-oil"), Some(Status::SkippedByCondition));
        let expanded = expand_plan(&kb, "check-oil-level").unwrap();
        assert_eq!(trace.retained(&expanded).leaves().len(), 6);
    }

    #[test]
    fn blocked_third_step_ends_trace() {
        let mut kb = fixtures::car();
        let p: crate::plan::Plan = serde_json::from_str(
            r#"{"id":"p","target_device":"car-1","steps":[
                {"action":{"id":"s1","process":"open","category":"primitive-motor-action"}},
                {"action":{"id":"s2","process":"open","category":"primitive-motor-action"}},
                {"action":{"id":"s3","process":"open","category":"primitive-motor-action",
                    "preconditions":[[{"type":["drain-bolt-1","loosely-connected"]}]]}},
                {"action":{"id":"s4","process":"open","category":"primitive-motor-action"}}]}"#,
        )
        .unwrap();
        kb.add_plan(p).unwrap();
        let trace = simulate("p", &kb).unwrap();
        assert_eq!(trace.entries.len(), 3);
        assert_eq!(trace.blocked().unwrap().action, "s3");
    }

    #[test]
    fn pruning_is_three_valued() {
        let mut kb = fixtures::car();
        // No level data: the conditional stays.
        let unknown = filter_relevant_steps("check-oil-level", &kb).unwrap();
        assert_eq!(unknown, expand_plan(&kb, "check-oil-level").unwrap());
        kb.tell(Assertion::filler("oil-level-1", "level-state", "ok")).unwrap();
        let pruned = filter_relevant_steps("check-oil-level", &kb).unwrap();
        assert!(pruned.leaves().iter().all(|a| a.id != "add-oil"));
        assert_eq!(pruned.leaves().len(), 6);
        let same = filter_relevant_steps("refill-washer-fluid", &kb).unwrap();
        assert_eq!(same, expand_plan(&kb, "refill-washer-fluid").unwrap());
    }
}

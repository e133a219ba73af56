//! A small KL-ONE style knowledge base.
//!
//! Concepts form an inheritance network with role restrictions; defined
//! concepts are recognized automatically from an instance's fillers, so a
//! TELL that changes a filler can move the instance into or out of them.
//! Queries are evaluated under the closed-world assumption over asserted and
//! derived facts. Production rules run forward to a fixpoint after every TELL.

mod ask;
mod io;
mod model;
mod query;
mod reason;
mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub use io::KbDocument;
pub use model::*;
pub use query::{Answer, Atom, Binding, CmpOp, Query, Term};
pub use reason::Taxonomy;

use crate::plan::Plan;

/// Default bound on forward-chaining rounds before a rule loop is reported.
pub const DEFAULT_RULE_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("duplicate {kind} id `{id}`")]
    Duplicate { kind: &'static str, id: String },
    #[error("unknown concept `{0}`")]
    UnknownConcept(String),
    #[error("concept `{concept}` has unknown parent `{parent}`")]
    UnknownParent { concept: String, parent: String },
    #[error("unknown role `{0}`")]
    UnknownRole(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),
    #[error("inheritance cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("invalid restriction on concept `{concept}`: {reason}")]
    InvalidRestriction { concept: String, reason: String },
    #[error("range violation: {instance}.{role} = {value}: {reason}")]
    RangeViolation { instance: String, role: String, value: String, reason: String },
    #[error("rule loop: no fixpoint after {rounds} rounds (still firing: {})", .rules.join(", "))]
    RuleLoop { rounds: usize, rules: Vec<String> },
    #[error("malformed query: {0}")]
    MalformedQuery(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct Kb {
    roles: BTreeMap<String, Role>,
    concepts: BTreeMap<String, Concept>,
    /// Definition order; parents always precede children.
    concept_order: Vec<String>,
    instances: BTreeMap<String, Instance>,
    rules: Vec<Rule>,
    plans: BTreeMap<String, Plan>,
    taxonomy: OnceLock<Arc<Taxonomy>>,
    rule_cap: usize,
}

impl Default for Kb {
    fn default() -> Self {
        Self::new()
    }
}

impl Kb {
    /// An empty knowledge base holding only the root concept.
    pub fn new() -> Self {
        let mut concepts = BTreeMap::new();
        concepts.insert(THING.to_string(), Concept::primitive(THING, &[]));
        Kb {
            roles: BTreeMap::new(),
            concepts,
            concept_order: vec![THING.to_string()],
            instances: BTreeMap::new(),
            rules: Vec::new(),
            plans: BTreeMap::new(),
            taxonomy: OnceLock::new(),
            rule_cap: DEFAULT_RULE_CAP,
        }
    }

    pub fn set_rule_cap(&mut self, cap: usize) {
        self.rule_cap = cap;
    }

    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.roles.values()
    }

    pub fn role(&self, id: &str) -> Result<&Role, KbError> {
        self.roles.get(id).ok_or_else(|| KbError::UnknownRole(id.to_string()))
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concept_order.iter().map(|id| &self.concepts[id])
    }

    pub fn concept(&self, id: &str) -> Result<&Concept, KbError> {
        self.concepts.get(id).ok_or_else(|| KbError::UnknownConcept(id.to_string()))
    }

    pub fn has_concept(&self, id: &str) -> bool {
        self.concepts.contains_key(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn instance(&self, id: &str) -> Result<&Instance, KbError> {
        self.instances.get(id).ok_or_else(|| KbError::UnknownInstance(id.to_string()))
    }

    pub fn has_instance(&self, id: &str) -> bool {
        self.instances.contains_key(id)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn plans(&self) -> impl Iterator<Item = &Plan> {
        self.plans.values()
    }

    pub fn plan(&self, id: &str) -> Result<&Plan, KbError> {
        self.plans.get(id).ok_or_else(|| KbError::UnknownPlan(id.to_string()))
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn define_role(&mut self, role: Role) -> Result<String, KbError> {
        if self.roles.contains_key(&role.id) {
            return Err(KbError::Duplicate { kind: "role", id: role.id });
        }
        self.concept(&role.domain)?;
        if let Range::Concept(c) = &role.range {
            self.concept(c)?;
        }
        let id = role.id.clone();
        self.roles.insert(id.clone(), role);
        Ok(id)
    }

    /// Adds a concept to the taxonomy. Existing instances are not reclassified.
    pub fn define_concept(&mut self, mut def: Concept) -> Result<String, KbError> {
        if self.concepts.contains_key(&def.id) {
            return Err(KbError::Duplicate { kind: "concept", id: def.id });
        }
        if def.parents.contains(&def.id) {
            return Err(KbError::Cycle(vec![def.id.clone(), def.id.clone()]));
        }
        if def.parents.is_empty() {
            def.parents.insert(THING.to_string());
        }
        for p in &def.parents {
            if !self.concepts.contains_key(p) {
                return Err(KbError::UnknownParent { concept: def.id.clone(), parent: p.clone() });
            }
        }
        for r in &mut def.restrictions {
            self.check_restriction(&def.id, r)?;
        }
        let id = def.id.clone();
        self.concepts.insert(id.clone(), def);
        self.concept_order.push(id.clone());
        self.taxonomy = OnceLock::new();
        Ok(id)
    }

    fn check_restriction(&self, concept: &str, r: &mut Restriction) -> Result<(), KbError> {
        let role = self.role(r.role())?.clone();
        let invalid = |reason: String| KbError::InvalidRestriction { concept: concept.to_string(), reason };
        match r {
            Restriction::All { concept: target, .. } => {
                if !matches!(role.range, Range::Concept(_)) {
                    return Err(invalid(format!("value restriction on literal role `{}`", role.id)));
                }
                self.concept(target)?;
            }
            Restriction::Filler { value, .. } => {
                *value = self.coerce(&role, value).map_err(|e| invalid(e.to_string()))?;
            }
            Restriction::Card { min, max, .. } => {
                if let Some(max) = max {
                    if *min > *max {
                        return Err(invalid(format!("cardinality min {min} > max {max}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Brings a filler into the representation the role's range requires.
    pub(crate) fn coerce(&self, role: &Role, value: &Value) -> Result<Value, KbError> {
        let violation = |reason: &str| KbError::RangeViolation {
            instance: String::new(),
            role: role.id.clone(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        match (&role.range, value) {
            (Range::Concept(_), Value::Ref(id) | Value::Text(id)) => Ok(Value::Ref(id.clone())),
            (Range::Concept(c), _) => Err(violation(&format!("expected an instance of `{c}`"))),
            (Range::Literal { literal: LiteralKind::Number }, Value::Number(n)) => Ok(Value::Number(*n)),
            (Range::Literal { literal: LiteralKind::Boolean }, Value::Bool(b)) => Ok(Value::Bool(*b)),
            (Range::Literal { literal: LiteralKind::String }, Value::Text(s) | Value::Ref(s)) => {
                Ok(Value::Text(s.clone()))
            }
            (Range::Enum { values }, Value::Text(s) | Value::Ref(s)) => {
                if values.contains(s) {
                    Ok(Value::Text(s.clone()))
                } else {
                    Err(violation(&format!("not one of {}", values.join("|"))))
                }
            }
            (Range::Literal { literal }, _) => Err(violation(&format!("expected a {literal:?} literal"))),
            (Range::Enum { .. }, _) => Err(violation("expected an enum symbol")),
        }
    }

    /// Coerces and type-checks a filler against the role range in the current state.
    fn check_filler(&self, instance: &str, role: &Role, value: &Value) -> Result<Value, KbError> {
        let v = self.coerce(role, value).map_err(|e| match e {
            KbError::RangeViolation { role, value, reason, .. } => {
                KbError::RangeViolation { instance: instance.to_string(), role, value, reason }
            }
            other => other,
        })?;
        if let (Range::Concept(c), Value::Ref(target)) = (&role.range, &v) {
            let t = self.instance(target)?;
            if !t.derived.contains(c) {
                return Err(KbError::RangeViolation {
                    instance: instance.to_string(),
                    role: role.id.clone(),
                    value: target.clone(),
                    reason: format!("`{target}` is not a `{c}`"),
                });
            }
        }
        Ok(v)
    }

    /// Stores a new instance and classifies it.
    pub fn create_instance(&mut self, mut inst: Instance) -> Result<String, KbError> {
        if self.instances.contains_key(&inst.id) {
            return Err(KbError::Duplicate { kind: "instance", id: inst.id });
        }
        for t in &inst.asserted {
            self.concept(t)?;
        }
        let mut checked = BTreeMap::new();
        for (role_id, values) in &inst.fillers {
            let role = self.role(role_id)?.clone();
            let mut set = BTreeSet::new();
            for v in values {
                set.insert(self.check_filler(&inst.id, &role, v)?);
            }
            checked.insert(role_id.clone(), set);
        }
        inst.fillers = checked;
        let id = inst.id.clone();
        self.instances.insert(id.clone(), inst);
        self.reclassify_all();
        Ok(id)
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<String, KbError> {
        if self.rules.iter().any(|r| r.id == rule.id) {
            return Err(KbError::Duplicate { kind: "rule", id: rule.id });
        }
        self.validate_query(&rule.condition)?;
        let bound = rule.condition.variables();
        for action in &rule.actions {
            let terms: Vec<&Term> = match action {
                RuleAction::AssertFiller(x, r, y) | RuleAction::RetractFiller(x, r, y) => {
                    self.role(r)?;
                    vec![x, y]
                }
                RuleAction::AssertType(x, c) => {
                    self.concept(c)?;
                    vec![x]
                }
                RuleAction::Emit(_, args) => args.iter().collect(),
            };
            for t in terms {
                if let Term::Var(v) = t {
                    if !bound.contains(v) {
                        return Err(KbError::MalformedQuery(format!(
                            "rule `{}` uses unbound variable ?{v}",
                            rule.id
                        )));
                    }
                }
            }
        }
        let id = rule.id.clone();
        self.rules.push(rule);
        Ok(id)
    }

    pub fn add_plan(&mut self, plan: Plan) -> Result<String, KbError> {
        if self.plans.contains_key(&plan.id) {
            return Err(KbError::Duplicate { kind: "plan", id: plan.id });
        }
        let id = plan.id.clone();
        self.plans.insert(id.clone(), plan);
        Ok(id)
    }

    /// Inserts or replaces a plan (authoring drafts).
    pub fn upsert_plan(&mut self, plan: Plan) {
        self.plans.insert(plan.id.clone(), plan);
    }

    pub fn taxonomy(&self) -> Arc<Taxonomy> {
        self.taxonomy.get_or_init(|| Arc::new(Taxonomy::build(self))).clone()
    }

    /// True iff every instance of `specific` is necessarily an instance of `general`.
    pub fn subsumes(&self, general: &str, specific: &str) -> Result<bool, KbError> {
        self.concept(general)?;
        self.concept(specific)?;
        Ok(self.taxonomy().subsumers(specific).contains(general))
    }

    /// Whether `instance` currently belongs to `concept` (closed world).
    pub fn is_a(&self, instance: &str, concept: &str) -> bool {
        self.instances.get(instance).is_some_and(|i| i.derived.contains(concept))
    }

    /// Recomputes the instance's derived types and returns its most specific concepts.
    pub fn classify(&mut self, instance: &str) -> Result<BTreeSet<String>, KbError> {
        self.instance(instance)?;
        self.reclassify_all();
        self.most_specific(instance)
    }

    /// Minimal elements of the instance's derived types under subsumption.
    pub fn most_specific(&self, instance: &str) -> Result<BTreeSet<String>, KbError> {
        let inst = self.instance(instance)?;
        let tax = self.taxonomy();
        Ok(inst
            .derived
            .iter()
            .filter(|c| {
                !inst.derived.iter().any(|d| {
                    d != *c && tax.subsumers(d).contains(*c) && !tax.subsumers(c).contains(d)
                })
            })
            .cloned()
            .collect())
    }

    /// Recomputes derived types of every instance to the least fixpoint.
    pub fn reclassify_all(&mut self) {
        let tax = self.taxonomy();
        let derived = reason::classify_all(self, &tax);
        for (id, types) in derived {
            if let Some(inst) = self.instances.get_mut(&id) {
                inst.derived = types;
            }
        }
    }

    /// Applies one assertion and runs rules to fixpoint.
    pub fn tell(&mut self, assertion: Assertion) -> Result<StateDelta, KbError> {
        self.tell_all(std::slice::from_ref(&assertion))
    }

    /// Applies assertions atomically: on any error the knowledge base is unchanged.
    pub fn tell_all(&mut self, assertions: &[Assertion]) -> Result<StateDelta, KbError> {
        let backup = self.clone();
        match self.tell_inner(assertions) {
            Ok(delta) => Ok(delta),
            Err(e) => {
                *self = backup;
                Err(e)
            }
        }
    }

    fn tell_inner(&mut self, assertions: &[Assertion]) -> Result<StateDelta, KbError> {
        let before = self.derived_map();
        let pre_satisfied = self.emitting_instantiations()?;
        let mut delta = StateDelta::default();
        for a in assertions {
            self.apply(a, &mut delta)?;
            self.reclassify_all();
        }
        self.run_rules(&mut delta, &pre_satisfied)?;
        self.diff_types(&before, &mut delta);
        Ok(delta)
    }

    fn derived_map(&self) -> BTreeMap<String, BTreeSet<String>> {
        self.instances.iter().map(|(id, i)| (id.clone(), i.derived.clone())).collect()
    }

    fn diff_types(&self, before: &BTreeMap<String, BTreeSet<String>>, delta: &mut StateDelta) {
        let empty = BTreeSet::new();
        for (id, inst) in &self.instances {
            let old = before.get(id).unwrap_or(&empty);
            for c in inst.derived.difference(old) {
                delta.type_gains.push(TypeChange { instance: id.clone(), concept: c.clone() });
            }
            for c in old.difference(&inst.derived) {
                delta.type_losses.push(TypeChange { instance: id.clone(), concept: c.clone() });
            }
        }
    }

    /// Applies a single assertion without reclassifying; returns whether anything changed.
    fn apply(&mut self, a: &Assertion, delta: &mut StateDelta) -> Result<bool, KbError> {
        match a {
            Assertion::Type { instance, concept } => {
                self.concept(concept)?;
                let inst = self
                    .instances
                    .get_mut(instance)
                    .ok_or_else(|| KbError::UnknownInstance(instance.clone()))?;
                if inst.asserted.insert(concept.clone()) {
                    delta.asserted_changes.push(AssertedTypeChange {
                        instance: instance.clone(),
                        concept: concept.clone(),
                        added: true,
                    });
                    return Ok(true);
                }
                Ok(false)
            }
            Assertion::RetractType { instance, concept } => {
                self.concept(concept)?;
                let inst = self
                    .instances
                    .get_mut(instance)
                    .ok_or_else(|| KbError::UnknownInstance(instance.clone()))?;
                if inst.asserted.remove(concept) {
                    delta.asserted_changes.push(AssertedTypeChange {
                        instance: instance.clone(),
                        concept: concept.clone(),
                        added: false,
                    });
                    return Ok(true);
                }
                Ok(false)
            }
            Assertion::Filler { instance, role, value } => {
                self.instance(instance)?;
                let role = self.role(role)?.clone();
                let value = self.check_filler(instance, &role, value)?;
                let inst = self.instances.get_mut(instance).expect("checked above");
                let slot = inst.fillers.entry(role.id.clone()).or_default();
                if slot.contains(&value) {
                    return Ok(false);
                }
                if role.functional && !slot.is_empty() {
                    let old: Vec<Value> = std::mem::take(slot).into_iter().collect();
                    let mut olds = old.into_iter();
                    let first = olds.next();
                    for extra in olds {
                        delta.filler_changes.push(FillerChange {
                            instance: instance.clone(),
                            role: role.id.clone(),
                            old: Some(extra),
                            new: None,
                        });
                    }
                    slot.insert(value.clone());
                    delta.filler_changes.push(FillerChange {
                        instance: instance.clone(),
                        role: role.id.clone(),
                        old: first,
                        new: Some(value),
                    });
                } else {
                    slot.insert(value.clone());
                    delta.filler_changes.push(FillerChange {
                        instance: instance.clone(),
                        role: role.id.clone(),
                        old: None,
                        new: Some(value),
                    });
                }
                Ok(true)
            }
            Assertion::RetractFiller { instance, role, value } => {
                self.instance(instance)?;
                let role = self.role(role)?.clone();
                let value = value.as_ref().map(|v| self.coerce(&role, v)).transpose()?;
                let inst = self.instances.get_mut(instance).expect("checked above");
                let Some(slot) = inst.fillers.get_mut(&role.id) else {
                    return Ok(false);
                };
                let removed: Vec<Value> = match value {
                    Some(v) => slot.take(&v).into_iter().collect(),
                    None => std::mem::take(slot).into_iter().collect(),
                };
                if slot.is_empty() {
                    inst.fillers.remove(&role.id);
                }
                let changed = !removed.is_empty();
                for old in removed {
                    delta.filler_changes.push(FillerChange {
                        instance: instance.clone(),
                        role: role.id.clone(),
                        old: Some(old),
                        new: None,
                    });
                }
                Ok(changed)
            }
        }
    }

    /// Replays a delta's asserted-level changes onto the current state.
    pub fn apply_delta(&mut self, delta: &StateDelta) -> Result<(), KbError> {
        for c in &delta.asserted_changes {
            let inst = self.inst_mut(&c.instance)?;
            if c.added {
                inst.asserted.insert(c.concept.clone());
            } else {
                inst.asserted.remove(&c.concept);
            }
        }
        for ch in &delta.filler_changes {
            self.replay_filler(&ch.instance, &ch.role, ch.old.as_ref(), ch.new.as_ref())?;
        }
        self.reclassify_all();
        Ok(())
    }

    /// Undoes a delta previously produced on this state.
    pub fn revert_delta(&mut self, delta: &StateDelta) -> Result<(), KbError> {
        for ch in delta.filler_changes.iter().rev() {
            self.replay_filler(&ch.instance, &ch.role, ch.new.as_ref(), ch.old.as_ref())?;
        }
        for c in delta.asserted_changes.iter().rev() {
            let inst = self.inst_mut(&c.instance)?;
            if c.added {
                inst.asserted.remove(&c.concept);
            } else {
                inst.asserted.insert(c.concept.clone());
            }
        }
        self.reclassify_all();
        Ok(())
    }

    fn inst_mut(&mut self, id: &str) -> Result<&mut Instance, KbError> {
        self.instances.get_mut(id).ok_or_else(|| KbError::UnknownInstance(id.to_string()))
    }

    fn replay_filler(
        &mut self,
        instance: &str,
        role: &str,
        remove: Option<&Value>,
        add: Option<&Value>,
    ) -> Result<(), KbError> {
        let inst = self.inst_mut(instance)?;
        let slot = inst.fillers.entry(role.to_string()).or_default();
        if let Some(v) = remove {
            slot.remove(v);
        }
        if let Some(v) = add {
            slot.insert(v.clone());
        }
        if slot.is_empty() {
            inst.fillers.remove(role);
        }
        Ok(())
    }

    /// Instances whose derived types include `concept`, sorted by id.
    pub fn instances_of(&self, concept: &str) -> Vec<&Instance> {
        self.instances.values().filter(|i| i.derived.contains(concept)).collect()
    }

    /// The instance and role for which `referent` is the only filler, if any.
    pub fn unique_filler_of(&self, referent: &str) -> Option<(&str, &str)> {
        let target = Value::Ref(referent.to_string());
        self.instances.values().find_map(|i| {
            i.fillers
                .iter()
                .find(|(_, vs)| vs.len() == 1 && vs.contains(&target))
                .map(|(r, _)| (i.id.as_str(), r.as_str()))
        })
    }
}

//! Maintenance plans: actions with pre/postconditions and recursive refinement.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{Assertion, Atom, Kb, KbError, Query, Range, Term, Value};

/// Participant slots every action may fill. Each is also a KB role on `action`.
pub const PARTICIPANT_ROLES: [&str; 5] = ["patient", "instrument", "source", "destination", "location"];

/// Concept every process concept descends from.
pub const ACTION_CONCEPT: &str = "action";

pub const READER: &str = "reader";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    CheckAttribute,
    AddSubstance,
    ReplacePart,
    PrimitiveMotorAction,
}

fn reader() -> String {
    READER.to_string()
}

fn is_reader(s: &str) -> bool {
    s == READER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanAction {
    pub id: String,
    /// Process concept in the KB (e.g. `check`, `pull-out`); also the lexicon key.
    pub process: String,
    pub category: Category,
    #[serde(default = "reader", skip_serializing_if = "is_reader")]
    pub actor: String,
    /// Participant role → instance id, or `$name` placeholder inside refinement plans.
    #[serde(default)]
    pub participants: BTreeMap<String, String>,
    /// The attribute role a check-attribute action inspects.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preconditions: Vec<Query>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub postconditions: Vec<Assertion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<String>,
}

impl PlanAction {
    pub fn patient(&self) -> Option<&str> {
        self.participants.get("patient").map(String::as_str)
    }

    fn substitute(&self, prefix: &str, bindings: &BTreeMap<String, String>) -> Result<PlanAction, PlanError> {
        let resolve = |s: &str| -> Result<String, PlanError> {
            match s.strip_prefix('$') {
                Some(name) => bindings.get(name).cloned().ok_or_else(|| PlanError::UnresolvedPlaceholder {
                    action: self.id.clone(),
                    placeholder: name.to_string(),
                }),
                None => Ok(s.to_string()),
            }
        };
        let mut participants = BTreeMap::new();
        for (role, v) in &self.participants {
            participants.insert(role.clone(), resolve(v)?);
        }
        let preconditions: Vec<Query> = self.preconditions.iter().map(|q| q.substitute(bindings)).collect();
        if let Some(p) = preconditions.iter().flat_map(|q| q.placeholders()).next() {
            return Err(PlanError::UnresolvedPlaceholder { action: self.id.clone(), placeholder: p });
        }
        let mut postconditions = Vec::new();
        for a in &self.postconditions {
            postconditions.push(substitute_assertion(a, &resolve)?);
        }
        Ok(PlanAction {
            id: format!("{prefix}{}", self.id),
            participants,
            preconditions,
            postconditions,
            ..self.clone()
        })
    }
}

fn substitute_assertion(
    a: &Assertion,
    resolve: &dyn Fn(&str) -> Result<String, PlanError>,
) -> Result<Assertion, PlanError> {
    let value = |v: &Value| -> Result<Value, PlanError> {
        Ok(match v {
            Value::Text(s) if s.starts_with('$') => Value::Text(resolve(s)?),
            Value::Ref(s) if s.starts_with('$') => Value::Ref(resolve(s)?),
            other => other.clone(),
        })
    };
    Ok(match a {
        Assertion::Type { instance, concept } => {
            Assertion::Type { instance: resolve(instance)?, concept: concept.clone() }
        }
        Assertion::RetractType { instance, concept } => {
            Assertion::RetractType { instance: resolve(instance)?, concept: concept.clone() }
        }
        Assertion::Filler { instance, role, value: v } => {
            Assertion::Filler { instance: resolve(instance)?, role: role.clone(), value: value(v)? }
        }
        Assertion::RetractFiller { instance, role, value: v } => Assertion::RetractFiller {
            instance: resolve(instance)?,
            role: role.clone(),
            value: v.as_ref().map(value).transpose()?,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalStep {
    pub id: String,
    pub condition: Query,
    pub then: Vec<Step>,
    #[serde(default, rename = "else", skip_serializing_if = "Vec::is_empty")]
    pub otherwise: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Action(PlanAction),
    If(ConditionalStep),
}

/// What the section heading names: a process applied to a patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Title {
    pub process: String,
    pub patient: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<Title>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Query>,
    /// Device the plan maintains; refinement plans have none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_device: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub preconditions: Vec<Query>,
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replacement_items: Vec<String>,
    /// Site where the work happens.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location_info: Option<String>,
    /// Object whose location the section opens with; defaults to the first patient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
}

impl Plan {
    pub fn actions(&self) -> Vec<&PlanAction> {
        fn walk<'a>(steps: &'a [Step], out: &mut Vec<&'a PlanAction>) {
            for s in steps {
                match s {
                    Step::Action(a) => out.push(a),
                    Step::If(c) => {
                        walk(&c.then, out);
                        walk(&c.otherwise, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.steps, &mut out);
        out
    }

    pub fn located_object(&self) -> Option<&str> {
        self.subject.as_deref().or_else(|| self.actions().into_iter().find_map(|a| a.patient()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("refinement cycle: {}", .0.join(" -> "))]
    RefinementCycle(Vec<String>),
    #[error("action `{action}` has unresolved placeholder `${placeholder}`")]
    UnresolvedPlaceholder { action: String, placeholder: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum ExpandedStep {
    Leaf { action: PlanAction },
    /// An action elaborated by the steps of the refinement plan `via`.
    Refined { action: PlanAction, via: String, steps: Vec<ExpandedStep> },
    Conditional {
        id: String,
        condition: Query,
        then: Vec<ExpandedStep>,
        #[serde(default, rename = "else")]
        otherwise: Vec<ExpandedStep>,
    },
}

/// A plan with every refinement inlined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedPlan {
    pub plan: String,
    pub steps: Vec<ExpandedStep>,
}

impl ExpandedPlan {
    /// Unrefined actions in document order, both branches of conditionals included.
    pub fn leaves(&self) -> Vec<&PlanAction> {
        fn walk<'a>(steps: &'a [ExpandedStep], out: &mut Vec<&'a PlanAction>) {
            for s in steps {
                match s {
                    ExpandedStep::Leaf { action } => out.push(action),
                    ExpandedStep::Refined { steps, .. } => walk(steps, out),
                    ExpandedStep::Conditional { then, otherwise, .. } => {
                        walk(then, out);
                        walk(otherwise, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.steps, &mut out);
        out
    }

    /// Expands any refinement references still present; a no-op on expansion output.
    pub fn expand(&self, kb: &Kb) -> Result<ExpandedPlan, PlanError> {
        fn walk(kb: &Kb, steps: &[ExpandedStep], path: &mut Vec<String>) -> Result<Vec<ExpandedStep>, PlanError> {
            steps
                .iter()
                .map(|s| match s {
                    ExpandedStep::Leaf { action } if action.refinement.is_some() => {
                        expand_action(kb, action, path)
                    }
                    ExpandedStep::Leaf { .. } => Ok(s.clone()),
                    ExpandedStep::Refined { action, via, steps } => Ok(ExpandedStep::Refined {
                        action: action.clone(),
                        via: via.clone(),
                        steps: walk(kb, steps, path)?,
                    }),
                    ExpandedStep::Conditional { id, condition, then, otherwise } => Ok(ExpandedStep::Conditional {
                        id: id.clone(),
                        condition: condition.clone(),
                        then: walk(kb, then, path)?,
                        otherwise: walk(kb, otherwise, path)?,
                    }),
                })
                .collect()
        }
        let mut path = vec![self.plan.clone()];
        Ok(ExpandedPlan { plan: self.plan.clone(), steps: walk(kb, &self.steps, &mut path)? })
    }
}

fn expand_action(kb: &Kb, action: &PlanAction, path: &mut Vec<String>) -> Result<ExpandedStep, PlanError> {
    let Some(sub_id) = &action.refinement else {
        return Ok(ExpandedStep::Leaf { action: action.clone() });
    };
    if path.contains(sub_id) {
        let mut cycle = path.clone();
        cycle.push(sub_id.clone());
        return Err(PlanError::RefinementCycle(cycle));
    }
    let sub = kb.plan(sub_id)?;
    path.push(sub_id.clone());
    let bindings = action.participants.clone();
    let child_prefix = format!("{}/", action.id);
    let steps = expand_steps(kb, &sub.steps, &child_prefix, &bindings, path)?;
    path.pop();
    let mut parent = action.clone();
    parent.refinement = None;
    Ok(ExpandedStep::Refined { action: parent, via: sub_id.clone(), steps })
}

fn expand_steps(
    kb: &Kb,
    steps: &[Step],
    prefix: &str,
    bindings: &BTreeMap<String, String>,
    path: &mut Vec<String>,
) -> Result<Vec<ExpandedStep>, PlanError> {
    let mut out = Vec::with_capacity(steps.len());
    for s in steps {
        out.push(match s {
            Step::Action(a) => {
                let bound = a.substitute(prefix, bindings)?;
                expand_action(kb, &bound, path)?
            }
            Step::If(c) => {
                let condition = c.condition.substitute(bindings);
                if let Some(p) = condition.placeholders().into_iter().next() {
                    return Err(PlanError::UnresolvedPlaceholder { action: c.id.clone(), placeholder: p });
                }
                ExpandedStep::Conditional {
                    id: format!("{prefix}{}", c.id),
                    condition,
                    then: expand_steps(kb, &c.then, prefix, bindings, path)?,
                    otherwise: expand_steps(kb, &c.otherwise, prefix, bindings, path)?,
                }
            }
        });
    }
    Ok(out)
}

/// Inlines every refinement depth-first, substituting parent participants for `$placeholders`.
pub fn expand_plan(kb: &Kb, plan_id: &str) -> Result<ExpandedPlan, PlanError> {
    let plan = kb.plan(plan_id)?;
    let mut path = vec![plan_id.to_string()];
    let steps = expand_steps(kb, &plan.steps, "", &BTreeMap::new(), &mut path)?;
    Ok(ExpandedPlan { plan: plan_id.to_string(), steps })
}

/// Plans that fit the device's current classification and whose preconditions hold now.
pub fn applicable_plans(kb: &Kb, device: &str) -> Result<Vec<String>, KbError> {
    let dev = kb.instance(device)?;
    let mut out = Vec::new();
    for plan in kb.plans() {
        let Some(target) = &plan.target_device else { continue };
        let Ok(target) = kb.instance(target) else { continue };
        if !target.asserted.iter().all(|t| dev.derived.contains(t)) || target.asserted.is_empty() {
            continue;
        }
        let mut ok = true;
        for q in &plan.preconditions {
            if !kb.holds(q)? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(plan.id.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<String>,
}

impl Diagnostic {
    fn error(code: &str, at: &str, message: String) -> Self {
        Diagnostic { severity: Severity::Error, code: code.into(), message, at: Some(at.into()) }
    }

    fn warning(code: &str, at: &str, message: String) -> Self {
        Diagnostic { severity: Severity::Warning, code: code.into(), message, at: Some(at.into()) }
    }
}

/// Concepts a participant of `process` in `role` must belong to: the role's
/// range plus every value restriction on the role in the process concept's definition.
pub fn participant_constraints(kb: &Kb, process: &str, role: &str) -> Vec<String> {
    let mut out: Vec<String> = kb.range_concept(role).map(str::to_string).into_iter().collect();
    if kb.has_concept(process) {
        let tax = kb.taxonomy();
        for c in tax.subsumers(process) {
            if let Ok(concept) = kb.concept(c) {
                for r in &concept.restrictions {
                    if let crate::kb::Restriction::All { role: rr, concept: target } = r {
                        if rr == role && !out.contains(target) {
                            out.push(target.clone());
                        }
                    }
                }
            }
        }
    }
    out
}

/// Checks one participant filler; `None` when it type-checks.
pub fn check_participant(kb: &Kb, process: &str, role: &str, instance: &str) -> Option<String> {
    let Ok(inst) = kb.instance(instance) else {
        return Some(format!("unknown instance `{instance}`"));
    };
    participant_constraints(kb, process, role)
        .into_iter()
        .find(|c| !inst.derived.contains(c))
        .map(|c| format!("`{instance}` is not a `{c}` as required for {process}.{role}"))
}

fn validate_action(kb: &Kb, a: &PlanAction, allow_placeholders: bool, out: &mut Vec<Diagnostic>) {
    match kb.concept(&a.process) {
        Err(_) => out.push(Diagnostic::error("unknown-process", &a.id, format!("unknown process concept `{}`", a.process))),
        Ok(_) => {
            if kb.has_concept(ACTION_CONCEPT) && !kb.subsumes(ACTION_CONCEPT, &a.process).unwrap_or(false) {
                out.push(Diagnostic::error("not-an-action", &a.id, format!("`{}` is not an action concept", a.process)));
            }
        }
    }
    for (role, filler) in &a.participants {
        if kb.role(role).is_err() {
            out.push(Diagnostic::error("unknown-role", &a.id, format!("unknown participant role `{role}`")));
            continue;
        }
        if filler.starts_with('$') {
            if !allow_placeholders {
                out.push(Diagnostic::error("placeholder", &a.id, format!("placeholder `{filler}` outside a refinement plan")));
            }
            continue;
        }
        if let Some(msg) = check_participant(kb, &a.process, role, filler) {
            out.push(Diagnostic::error("participant-type", &a.id, msg));
        }
    }
    if a.category == Category::CheckAttribute {
        match a.attribute.as_deref().map(|r| kb.role(r)) {
            None => out.push(Diagnostic::error("missing-attribute", &a.id, "check-attribute action names no attribute role".into())),
            Some(Err(e)) => out.push(Diagnostic::error("unknown-role", &a.id, e.to_string())),
            Some(Ok(role)) => {
                if !role.range.is_attribute() {
                    out.push(Diagnostic::error("attribute-range", &a.id, format!("attribute `{}` is not number- or enum-ranged", role.id)));
                }
                if let Some(p) = a.patient().filter(|p| !p.starts_with('$')) {
                    if kb.has_instance(p) && !kb.is_a(p, &role.domain) {
                        out.push(Diagnostic::error("attribute-domain", &a.id, format!("`{p}` has no attribute `{}`", role.id)));
                    }
                }
            }
        }
    }
    for q in &a.preconditions {
        if !(allow_placeholders && !q.placeholders().is_empty()) {
            if let Err(e) = kb.validate_query(q) {
                out.push(Diagnostic::error("precondition", &a.id, e.to_string()));
            }
        }
    }
    for p in &a.postconditions {
        validate_postcondition(kb, &a.id, p, allow_placeholders, out);
    }
    if let Some(r) = &a.refinement {
        if kb.plan(r).is_err() {
            out.push(Diagnostic::error("unknown-refinement", &a.id, format!("refinement plan `{r}` does not exist")));
        }
    }
}

fn validate_postcondition(kb: &Kb, at: &str, p: &Assertion, allow_placeholders: bool, out: &mut Vec<Diagnostic>) {
    let inst = p.instance();
    if inst.starts_with('$') {
        if !allow_placeholders {
            out.push(Diagnostic::error("placeholder", at, format!("placeholder `{inst}` outside a refinement plan")));
        }
    } else if !kb.has_instance(inst) {
        out.push(Diagnostic::error("postcondition", at, format!("unknown instance `{inst}`")));
    }
    match p {
        Assertion::Type { concept, .. } | Assertion::RetractType { concept, .. } => {
            if !kb.has_concept(concept) {
                out.push(Diagnostic::error("postcondition", at, format!("unknown concept `{concept}`")));
            }
        }
        Assertion::Filler { role, value, .. } | Assertion::RetractFiller { role, value: Some(value), .. } => {
            match kb.role(role) {
                Err(_) => out.push(Diagnostic::error("postcondition", at, format!("unknown role `{role}`"))),
                Ok(r) => {
                    let placeholder = value.as_str().is_some_and(|s| s.starts_with('$'));
                    if !placeholder {
                        if let Err(e) = kb.coerce(r, value) {
                            out.push(Diagnostic::error("postcondition-range", at, e.to_string()));
                        } else if let (Range::Concept(c), Some(t)) = (&r.range, value.as_str()) {
                            if kb.has_instance(t) && !kb.is_a(t, c) {
                                out.push(Diagnostic::error("postcondition-range", at, format!("`{t}` is not a `{c}`")));
                            }
                        }
                    }
                }
            }
        }
        Assertion::RetractFiller { role, value: None, .. } => {
            if kb.role(role).is_err() {
                out.push(Diagnostic::error("postcondition", at, format!("unknown role `{role}`")));
            }
        }
    }
}

/// Atoms that can never hold because the subject is outside the role's domain.
fn type_unsatisfiable(kb: &Kb, q: &Query) -> Option<String> {
    for atom in q.atoms() {
        let (Atom::Filler(Term::Const(s), r, _) | Atom::Compare(Term::Const(s), r, _, _)) = atom else { continue };
        let (Some(subject), Ok(role)) = (s.as_str(), kb.role(r)) else { continue };
        if kb.has_instance(subject) && !kb.is_a(subject, &role.domain) {
            return Some(format!("`{subject}` is not a `{}`, so `{r}` never applies", role.domain));
        }
    }
    None
}

fn validate_steps(kb: &Kb, steps: &[Step], allow_placeholders: bool, out: &mut Vec<Diagnostic>) {
    for s in steps {
        match s {
            Step::Action(a) => validate_action(kb, a, allow_placeholders, out),
            Step::If(c) => {
                if !(allow_placeholders && !c.condition.placeholders().is_empty()) {
                    if let Err(e) = kb.validate_query(&c.condition) {
                        out.push(Diagnostic::error("condition", &c.id, e.to_string()));
                    } else if let Some(msg) = type_unsatisfiable(kb, &c.condition) {
                        out.push(Diagnostic::warning("unsatisfiable-condition", &c.id, msg));
                    }
                }
                if c.then.is_empty() {
                    out.push(Diagnostic::error("empty-branch", &c.id, "conditional without steps".into()));
                }
                validate_steps(kb, &c.then, allow_placeholders, out);
                validate_steps(kb, &c.otherwise, allow_placeholders, out);
            }
        }
    }
}

/// Diagnostics for a stored plan; empty iff it is well-formed.
pub fn validate_plan(kb: &Kb, plan_id: &str) -> Vec<Diagnostic> {
    match kb.plan(plan_id) {
        Ok(plan) => validate(kb, plan),
        Err(e) => vec![Diagnostic::error("unknown-plan", plan_id, e.to_string())],
    }
}

/// Diagnostics for a plan that may not be stored yet (authoring drafts).
pub fn validate(kb: &Kb, plan: &Plan) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let refinement_plan = plan.target_device.is_none();
    if plan.steps.is_empty() {
        out.push(Diagnostic::error("empty-plan", &plan.id, "plan has no steps".into()));
    }
    if let Some(d) = &plan.target_device {
        if !kb.has_instance(d) {
            out.push(Diagnostic::error("unknown-device", &plan.id, format!("unknown target device `{d}`")));
        }
    }
    if let Some(l) = &plan.location_info {
        if !kb.has_instance(l) {
            out.push(Diagnostic::error("unknown-location", &plan.id, format!("unknown location `{l}`")));
        }
    }
    if let Some(s) = &plan.subject {
        if !kb.has_instance(s) {
            out.push(Diagnostic::error("unknown-subject", &plan.id, format!("unknown subject `{s}`")));
        }
    }
    for item in &plan.replacement_items {
        if !kb.has_instance(item) && !kb.has_concept(item) {
            out.push(Diagnostic::error("unknown-replacement", &plan.id, format!("unknown replacement item `{item}`")));
        }
    }
    for q in plan.preconditions.iter().chain(plan.goal.iter()) {
        if let Err(e) = kb.validate_query(q) {
            out.push(Diagnostic::error("plan-condition", &plan.id, e.to_string()));
        }
    }
    if let Some(t) = &plan.title {
        if !kb.has_concept(&t.process) || !kb.has_instance(&t.patient) {
            out.push(Diagnostic::error("title", &plan.id, "title names an unknown process or patient".into()));
        }
    }
    validate_steps(kb, &plan.steps, refinement_plan, &mut out);
    if out.iter().all(|d| d.severity != Severity::Error) && !refinement_plan {
        let mut scratch = kb.clone();
        scratch.upsert_plan(plan.clone());
        if let Err(e) = expand_plan(&scratch, &plan.id) {
            out.push(Diagnostic::error("expansion", &plan.id, e.to_string()));
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

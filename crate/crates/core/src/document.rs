//! Language-independent document representation.
//!
//! A section has a fixed macrostructure (location, replacement parts, activities)
//! and each block is a rhetorical-structure tree whose leaves are propositions
//! over KB instances. Every language is realized from the same tree.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kb::{Atom, CmpOp, Kb, Query, Term, Value};
use crate::plan::{expand_plan, ExpandedPlan, ExpandedStep, PlanAction, PlanError};
use crate::simulate::Trace;

/// Predicate of a location-block proposition.
pub const BE_LOCATED: &str = "be-located";
/// Predicate of a replacement-block proposition.
pub const NEED: &str = "need";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Sequence,
    Purpose,
    Condition,
    Elaboration,
    Means,
    Motivation,
    Precondition,
    Result,
    Until,
    Joint,
    Contrast,
}

impl Relation {
    pub fn is_multinuclear(self) -> bool {
        matches!(self, Relation::Sequence | Relation::Joint | Relation::Contrast)
    }

    /// Satellites of these relations state a condition on the world.
    pub fn is_conditional(self) -> bool {
        matches!(self, Relation::Condition | Relation::Precondition | Relation::Until)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeechAct {
    Instruction,
    Description,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prominence {
    Main,
    Aside,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub speech_act: SpeechAct,
    pub prominence: Prominence,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub hints: BTreeSet<String>,
}

impl Annotation {
    fn new(speech_act: SpeechAct, prominence: Prominence) -> Self {
        Annotation { speech_act, prominence, hints: BTreeSet::new() }
    }
}

/// Where a proposition came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Origin {
    Action { action: String },
    Condition,
    Description,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposition {
    /// Process concept, description predicate, or (for conditions) the attribute role or concept tested.
    pub predicate: String,
    pub participants: BTreeMap<String, String>,
    /// Attribute value a condition tests for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<CmpOp>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negated: bool,
    pub origin: Origin,
    pub annotation: Annotation,
}

impl Proposition {
    pub fn action_id(&self) -> Option<&str> {
        match &self.origin {
            Origin::Action { action } => Some(action),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Satellite {
    pub relation: Relation,
    pub node: RstNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum RstNode {
    Leaf {
        id: u32,
        proposition: Proposition,
    },
    /// A nucleus with satellites; `relation` is the relation of the first satellite.
    Span {
        id: u32,
        relation: Relation,
        nucleus: Box<RstNode>,
        satellites: Vec<Satellite>,
    },
    Multi {
        id: u32,
        relation: Relation,
        nuclei: Vec<RstNode>,
    },
}

impl RstNode {
    pub fn id(&self) -> u32 {
        match self {
            RstNode::Leaf { id, .. } | RstNode::Span { id, .. } | RstNode::Multi { id, .. } => *id,
        }
    }

    /// Leaves in nucleus-first depth-first order.
    pub fn leaves(&self) -> Vec<&Proposition> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let RstNode::Leaf { proposition, .. } = n {
                out.push(proposition);
            }
        });
        out
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a RstNode)) {
        f(self);
        match self {
            RstNode::Leaf { .. } => {}
            RstNode::Span { nucleus, satellites, .. } => {
                nucleus.walk(f);
                for s in satellites {
                    s.node.walk(f);
                }
            }
            RstNode::Multi { nuclei, .. } => nuclei.iter().for_each(|n| n.walk(f)),
        }
    }

    fn child_ids(&self) -> Vec<u32> {
        match self {
            RstNode::Leaf { .. } => Vec::new(),
            RstNode::Span { nucleus, satellites, .. } => {
                std::iter::once(nucleus.id()).chain(satellites.iter().map(|s| s.node.id())).collect()
            }
            RstNode::Multi { nuclei, .. } => nuclei.iter().map(RstNode::id).collect(),
        }
    }
}

/// One documentation section. Slot order is location, replacements, activities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSchema {
    pub plan: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<Proposition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<RstNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacements: Option<RstNode>,
    pub activities: RstNode,
}

impl SectionSchema {
    pub fn blocks(&self) -> Vec<&RstNode> {
        self.location.iter().chain(self.replacements.iter()).chain(std::iter::once(&self.activities)).collect()
    }

    /// Hex SHA-256 over the canonical JSON form. Nothing language-specific is in the schema.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schemas always serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn check(&self) -> Vec<TreeDiagnostic> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for b in self.blocks() {
            check_into(b, &mut seen, &mut out);
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("plan `{0}` has no steps to document")]
    EmptyPlan(String),
    #[error("`{at}`: participant {role} = `{instance}` is not a KB instance")]
    UnresolvedParticipant { at: String, role: String, instance: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDiagnostic {
    pub code: String,
    pub node: u32,
    pub message: String,
}

fn diag(code: &str, node: u32, message: String) -> TreeDiagnostic {
    TreeDiagnostic { code: code.into(), node, message }
}

/// Tree-ness, relation arity and annotation legality. Empty iff valid.
pub fn check_tree(root: &RstNode) -> Vec<TreeDiagnostic> {
    let mut out = Vec::new();
    check_into(root, &mut BTreeSet::new(), &mut out);
    out
}

fn check_into(root: &RstNode, seen: &mut BTreeSet<u32>, out: &mut Vec<TreeDiagnostic>) {
    root.walk(&mut |n| {
        let id = n.id();
        if !seen.insert(id) {
            out.push(diag("shared-node", id, format!("node {id} is reachable from more than one parent")));
        }
        match n {
            RstNode::Leaf { proposition: p, .. } => {
                let from_action = matches!(p.origin, Origin::Action { .. });
                if p.annotation.speech_act == SpeechAct::Instruction && !from_action {
                    out.push(diag("annotation", id, "instruction on a proposition not derived from an action".into()));
                }
            }
            RstNode::Multi { relation, nuclei, .. } => {
                if !relation.is_multinuclear() {
                    out.push(diag("relation", id, format!("{relation:?} is not multinuclear")));
                }
                if nuclei.len() < 2 {
                    out.push(diag("arity", id, format!("{relation:?} needs at least 2 nuclei, has {}", nuclei.len())));
                }
            }
            RstNode::Span { relation, satellites, .. } => {
                if satellites.is_empty() {
                    out.push(diag("arity", id, "span without satellites".into()));
                } else if satellites[0].relation != *relation {
                    out.push(diag("relation", id, "span relation differs from its first satellite".into()));
                }
                for s in satellites {
                    if s.relation.is_multinuclear() {
                        out.push(diag("relation", id, format!("{:?} used as a satellite relation", s.relation)));
                    }
                    if s.relation.is_conditional()
                        && s.node.leaves().iter().any(|p| p.origin != Origin::Condition)
                    {
                        out.push(diag(
                            "annotation",
                            s.node.id(),
                            format!("{:?} satellite must consist of condition propositions", s.relation),
                        ));
                    }
                }
            }
        }
        let children = n.child_ids();
        let unique: BTreeSet<u32> = children.iter().copied().collect();
        if unique.len() != children.len() {
            out.push(diag("shared-node", id, "the same child appears twice".into()));
        }
    });
}

/// Digest identifying the language-independent content of a schema.
pub fn language_independence_certificate(schema: &SectionSchema) -> String {
    schema.digest()
}

struct Builder<'a> {
    kb: &'a Kb,
    next_id: u32,
}

impl Builder<'_> {
    fn id(&mut self) -> u32 {
        self.next_id += 1;
        self.next_id
    }

    fn leaf(&mut self, proposition: Proposition) -> RstNode {
        RstNode::Leaf { id: self.id(), proposition }
    }

    fn group(&mut self, relation: Relation, mut nodes: Vec<RstNode>) -> Option<RstNode> {
        match nodes.len() {
            0 => None,
            1 => nodes.pop(),
            _ => Some(RstNode::Multi { id: self.id(), relation, nuclei: nodes }),
        }
    }

    fn resolve(&self, at: &str, participants: &BTreeMap<String, String>) -> Result<(), DocError> {
        for (role, inst) in participants {
            if !self.kb.has_instance(inst) {
                return Err(DocError::UnresolvedParticipant {
                    at: at.to_string(),
                    role: role.clone(),
                    instance: inst.clone(),
                });
            }
        }
        Ok(())
    }

    fn action(&mut self, a: &PlanAction) -> Result<RstNode, DocError> {
        self.resolve(&a.id, &a.participants)?;
        Ok(self.leaf(Proposition {
            predicate: a.process.clone(),
            participants: a.participants.clone(),
            value: None,
            comparison: None,
            negated: false,
            origin: Origin::Action { action: a.id.clone() },
            annotation: Annotation::new(SpeechAct::Instruction, Prominence::Main),
        }))
    }

    fn condition(&mut self, at: &str, q: &Query, negated: bool) -> Result<RstNode, DocError> {
        let mut leaves = Vec::new();
        for atom in q.atoms() {
            let subject = match atom.subject() {
                Term::Const(v) => v.to_string(),
                Term::Var(v) => format!("?{v}"),
            };
            let participants = BTreeMap::from([("patient".to_string(), subject)]);
            self.resolve(at, &participants)?;
            let (predicate, value, comparison) = match atom {
                Atom::Type(_, c) => (c.clone(), None, None),
                Atom::Filler(_, r, Term::Const(v)) => (r.clone(), Some(v.clone()), None),
                Atom::Filler(_, r, Term::Var(_)) => (r.clone(), None, None),
                Atom::Compare(_, r, op, n) => (r.clone(), Some(Value::Number(*n)), Some(*op)),
            };
            leaves.push(self.leaf(Proposition {
                predicate,
                participants,
                value,
                comparison,
                negated,
                origin: Origin::Condition,
                annotation: Annotation::new(SpeechAct::Description, Prominence::Aside),
            }));
        }
        Ok(self.group(Relation::Joint, leaves).expect("queries are non-empty"))
    }

    /// Nodes for a step list; refinements without their own effects are spliced in.
    fn steps(&mut self, steps: &[ExpandedStep]) -> Result<Vec<RstNode>, DocError> {
        let mut out = Vec::new();
        for s in steps {
            match s {
                ExpandedStep::Leaf { action } => out.push(self.action(action)?),
                ExpandedStep::Refined { action, steps, .. } => {
                    let children = self.steps(steps)?;
                    if action.postconditions.is_empty() {
                        out.extend(children);
                        continue;
                    }
                    let nucleus = self.action(action)?;
                    match self.group(Relation::Sequence, children) {
                        Some(means) => out.push(RstNode::Span {
                            id: self.id(),
                            relation: Relation::Means,
                            nucleus: Box::new(nucleus),
                            satellites: vec![Satellite { relation: Relation::Means, node: means }],
                        }),
                        None => out.push(nucleus),
                    }
                }
                ExpandedStep::Conditional { id, condition, then, otherwise } => {
                    for (branch, negated) in [(then, false), (otherwise, true)] {
                        let nodes = self.steps(branch)?;
                        if let Some(nucleus) = self.group(Relation::Sequence, nodes) {
                            let cond = self.condition(id, condition, negated)?;
                            out.push(RstNode::Span {
                                id: self.id(),
                                relation: Relation::Condition,
                                nucleus: Box::new(nucleus),
                                satellites: vec![Satellite { relation: Relation::Condition, node: cond }],
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn description(&mut self, predicate: &str, participants: BTreeMap<String, String>) -> Result<RstNode, DocError> {
        self.resolve(predicate, &participants)?;
        Ok(self.leaf(Proposition {
            predicate: predicate.to_string(),
            participants,
            value: None,
            comparison: None,
            negated: false,
            origin: Origin::Description,
            annotation: Annotation::new(SpeechAct::Description, Prominence::Main),
        }))
    }
}

/// Builds the section for an expanded (possibly pruned) plan.
pub fn build_document(expanded: &ExpandedPlan, kb: &Kb) -> Result<SectionSchema, DocError> {
    let plan = kb.plan(&expanded.plan).map_err(PlanError::from)?;
    let mut b = Builder { kb, next_id: 0 };

    let title = match &plan.title {
        Some(t) => {
            let participants = BTreeMap::from([("patient".to_string(), t.patient.clone())]);
            b.resolve(&plan.id, &participants)?;
            Some(Proposition {
                predicate: t.process.clone(),
                participants,
                value: None,
                comparison: None,
                negated: false,
                origin: Origin::Description,
                annotation: Annotation::new(SpeechAct::Description, Prominence::Main),
            })
        }
        None => None,
    };

    let location = match (plan.located_object(), &plan.location_info) {
        (Some(object), Some(site)) => Some(b.description(
            BE_LOCATED,
            BTreeMap::from([("patient".to_string(), object.to_string()), ("location".to_string(), site.clone())]),
        )?),
        _ => None,
    };

    let mut needs = Vec::new();
    for item in &plan.replacement_items {
        needs.push(b.description(NEED, BTreeMap::from([("patient".to_string(), item.clone())]))?);
    }
    let replacements = b.group(Relation::Joint, needs);

    let nodes = b.steps(&expanded.steps)?;
    let activities = b.group(Relation::Sequence, nodes).ok_or_else(|| DocError::EmptyPlan(plan.id.clone()))?;
    Ok(SectionSchema { plan: plan.id.clone(), title, location, replacements, activities })
}

/// Builds the section for a stored plan, all branches included.
pub fn build_for_plan(plan_id: &str, kb: &Kb) -> Result<SectionSchema, DocError> {
    build_document(&expand_plan(kb, plan_id)?, kb)
}

/// Builds the section from the part of the plan a simulation walked.
pub fn build_from_trace(trace: &Trace, kb: &Kb) -> Result<SectionSchema, DocError> {
    let expanded = expand_plan(kb, &trace.plan)?;
    build_document(&trace.retained(&expanded), kb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kb::Assertion;
    use crate::simulate::simulate;

    #[test]
    fn check_oil_level_structure() {
        let kb = fixtures::car();
        let schema = build_for_plan("check-oil-level", &kb).unwrap();
        assert_eq!(schema.blocks().len(), 3);
        let RstNode::Multi { relation: Relation::Sequence, nuclei, .. } = &schema.activities else {
            panic!("{:?}", schema.activities)
        };
        assert_eq!(nuclei.len(), 7);
        let RstNode::Span { relation: Relation::Condition, nucleus, satellites, .. } = &nuclei[6] else {
            panic!("{:?}", nuclei[6])
        };
        assert_eq!(nucleus.leaves()[0].action_id(), Some("add-oil"));
        let cond = satellites[0].node.leaves();
        assert_eq!(cond[0].predicate, "level-state");
        assert_eq!(cond[0].value, Some(Value::Text("low".into())));
        assert_eq!(cond[0].participants["patient"], "oil-level-1");
        for leaf in schema.activities.leaves() {
            if leaf.origin != Origin::Condition {
                assert_eq!(leaf.annotation.speech_act, SpeechAct::Instruction);
            }
        }
        assert_eq!(schema.check(), vec![]);
    }

    #[test]
    fn single_step_plan_is_a_lone_leaf() {
        let mut kb = fixtures::car();
        let p = serde_json::from_str(
            r#"{"id":"one","target_device":"car-1","steps":[{"action":{"id":"a","process":"open","category":"primitive-motor-action","participants":{"patient":"washer-reservoir-1"}}}]}"#,
        )
        .unwrap();
        kb.add_plan(p).unwrap();
        let schema = build_for_plan("one", &kb).unwrap();
        assert!(schema.location.is_none() && schema.replacements.is_none());
        assert!(matches!(schema.activities, RstNode::Leaf { .. }));
    }

    #[test]
    fn pruned_trace_lacks_condition() {
        let mut kb = fixtures::car();
        kb.tell(Assertion::filler("oil-level-1", "level-state", "ok")).unwrap();
        let trace = simulate("check-oil-level", &kb).unwrap();
        let schema = build_from_trace(&trace, &kb).unwrap();
        let mut conditions = 0;
        schema.activities.walk(&mut |n| {
            if let RstNode::Span { relation: Relation::Condition, .. } = n {
                conditions += 1;
            }
        });
        assert_eq!(conditions, 0);
        assert_eq!(schema.activities.leaves().len(), 6);
    }

    #[test]
    fn refinement_with_effects_becomes_means() {
        let kb = fixtures::car();
        let schema = build_for_plan("replace-spark-plugs", &kb).unwrap();
        let RstNode::Multi { nuclei, .. } = &schema.activities else { panic!() };
        assert_eq!(nuclei.len(), 2);
        assert!(matches!(&nuclei[1], RstNode::Span { relation: Relation::Means, .. }));
        assert_eq!(schema.check(), vec![]);
    }

    #[test]
    fn check_tree_reports_problems() {
        let kb = fixtures::car();
        let schema = build_for_plan("check-oil-level", &kb).unwrap();
        let RstNode::Multi { id, relation, mut nuclei } = schema.activities.clone() else { panic!() };
        let dup = nuclei[0].clone();
        nuclei.push(dup);
        let shared = RstNode::Multi { id, relation, nuclei: nuclei.clone() };
        assert!(check_tree(&shared).iter().any(|d| d.code == "shared-node"));

        let lone = RstNode::Multi { id, relation, nuclei: vec![nuclei.remove(0)] };
        assert!(check_tree(&lone).iter().any(|d| d.code == "arity"));
    }

    #[test]
    fn digests_identify_plans() {
        let kb = fixtures::car();
        let a = build_for_plan("check-oil-level", &kb).unwrap();
        let b = build_for_plan("check-oil-level", &kb).unwrap();
        let c = build_for_plan("refill-washer-fluid", &kb).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_eq!(a.digest().len(), 64);
        let json = serde_json::to_string(&a).unwrap();
        let back: SectionSchema = serde_json::from_str(&json).unwrap();
        assert_eq!(back.digest(), a.digest());
    }

    #[test]
    fn unresolved_participant_is_an_error() {
        let mut kb = fixtures::car();
        let p = serde_json::from_str(
            r#"{"id":"bad","target_device":"car-1","steps":[{"action":{"id":"a","process":"open","category":"primitive-motor-action","participants":{"patient":"ghost"}}}]}"#,
        )
        .unwrap();
        kb.add_plan(p).unwrap();
        assert!(matches!(build_for_plan("bad", &kb), Err(DocError::UnresolvedParticipant { .. })));
    }
}

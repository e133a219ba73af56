//! Sentence planning: linearizing the document tree and choosing referring expressions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::document::{Proposition, Relation, RstNode, SectionSchema, SpeechAct};
use crate::kb::{CmpOp, Kb, Value};

/// Role linking a component to the device it belongs to.
pub const PART_OF: &str = "part-of";
/// Concept whose instances are mass nouns (no article on first mention).
pub const SUBSTANCE: &str = "substance";

/// Lists nest at most this deep; deeper sequences become running sentences.
const MAX_LIST_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemRole {
    Actee,
    Instrument,
    Location,
    Source,
    Destination,
}

impl SemRole {
    pub fn from_participant(role: &str) -> Option<SemRole> {
        Some(match role {
            "patient" => SemRole::Actee,
            "instrument" => SemRole::Instrument,
            "location" => SemRole::Location,
            "source" => SemRole::Source,
            "destination" => SemRole::Destination,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SemRole::Actee => "actee",
            SemRole::Instrument => "instrument",
            SemRole::Location => "location",
            SemRole::Source => "source",
            SemRole::Destination => "destination",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Indefinite,
    Definite,
    Pronoun,
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Antecedent {
    pub plan: usize,
    pub role: SemRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferringExpression {
    pub referent: String,
    pub form: Form,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent: Option<Antecedent>,
    /// Enum value distinguishing the referent from others of its kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modifier: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mood {
    Imperative,
    Declarative,
    /// A nominalized heading ("Checking the ...").
    Title,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListContext {
    pub list: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePlan {
    pub id: usize,
    pub process: String,
    pub participants: BTreeMap<SemRole, ReferringExpression>,
    pub mood: Mood,
    pub polarity: Polarity,
    /// For attribute conditions: the value tested and how.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<CmpOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Box<SentencePlan>>,
    /// Further conditions joined to this one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjoined: Vec<SentencePlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_context: Option<ListContext>,
    /// Plan action this sentence instructs, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    pub node: u32,
}

impl SentencePlan {
    /// This plan and every embedded plan, in text order (conditions first).
    pub fn in_text_order(&self) -> Vec<&SentencePlan> {
        let mut out = Vec::new();
        if let Some(c) = &self.condition {
            out.extend(c.in_text_order());
        }
        out.push(self);
        for c in &self.conjoined {
            out.extend(c.in_text_order());
        }
        out
    }

    fn in_text_order_mut(&mut self, f: &mut impl FnMut(&mut SentencePlan)) {
        if let Some(c) = &mut self.condition {
            c.in_text_order_mut(f);
        }
        f(self);
        for c in &mut self.conjoined {
            c.in_text_order_mut(f);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatKind {
    Heading,
    ParagraphBreak,
    ListBegin,
    ListItem,
    ListEnd,
    Emphasis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatInstruction {
    pub kind: FormatKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "lowercase")]
pub enum Item {
    Plan(SentencePlan),
    Format(FormatInstruction),
}

impl Item {
    fn format(kind: FormatKind, payload: Option<String>) -> Item {
        Item::Format(FormatInstruction { kind, payload })
    }
}

/// Every top-level sentence plan in order.
pub fn plans(items: &[Item]) -> impl Iterator<Item = &SentencePlan> {
    items.iter().filter_map(|i| match i {
        Item::Plan(p) => Some(p),
        Item::Format(_) => None,
    })
}

/// Every plan including embedded conditions, in text order.
pub fn all_plans(items: &[Item]) -> Vec<&SentencePlan> {
    plans(items).flat_map(SentencePlan::in_text_order).collect()
}

struct Linearizer {
    items: Vec<Item>,
    next_plan: usize,
    next_list: usize,
    lists: Vec<ListContext>,
}

impl Linearizer {
    fn plan(&mut self, p: &Proposition, node: u32, mood: Mood) -> SentencePlan {
        self.next_plan += 1;
        let participants = p
            .participants
            .iter()
            .filter_map(|(role, inst)| {
                SemRole::from_participant(role).map(|r| {
                    (r, ReferringExpression { referent: inst.clone(), form: Form::Definite, antecedent: None, modifier: None })
                })
            })
            .collect();
        SentencePlan {
            id: self.next_plan,
            process: p.predicate.clone(),
            participants,
            mood,
            polarity: if p.negated { Polarity::Negative } else { Polarity::Positive },
            value: p.value.clone(),
            comparison: p.comparison,
            condition: None,
            conjoined: Vec::new(),
            list_context: self.lists.last().copied(),
            action: p.action_id().map(str::to_string),
            node,
        }
    }

    fn leaf(&mut self, p: &Proposition, node: u32) -> SentencePlan {
        let mood = match (p.annotation.speech_act, &p.origin) {
            (SpeechAct::Instruction, _) => Mood::Imperative,
            _ => Mood::Declarative,
        };
        self.plan(p, node, mood)
    }

    /// A condition subtree as one plan with any further conjuncts attached.
    fn condition(&mut self, node: &RstNode) -> SentencePlan {
        let mut plans: Vec<SentencePlan> = Vec::new();
        let mut leaves = Vec::new();
        node.walk(&mut |n| {
            if let RstNode::Leaf { id, proposition } = n {
                leaves.push((*id, proposition.clone()));
            }
        });
        for (id, p) in leaves {
            plans.push(self.plan(&p, id, Mood::Declarative));
        }
        let mut first = plans.remove(0);
        first.conjoined = plans;
        first
    }

    fn node(&mut self, n: &RstNode) {
        match n {
            RstNode::Leaf { id, proposition } => {
                let p = self.leaf(proposition, *id);
                self.items.push(Item::Plan(p));
            }
            RstNode::Multi { relation: Relation::Sequence, nuclei, .. }
                if nuclei.len() >= 3 && self.lists.len() < MAX_LIST_DEPTH =>
            {
                self.next_list += 1;
                let list = self.next_list;
                self.items.push(Item::format(FormatKind::ListBegin, Some(list.to_string())));
                for (i, nucleus) in nuclei.iter().enumerate() {
                    let ctx = ListContext { list, position: i + 1 };
                    self.items.push(Item::format(FormatKind::ListItem, Some(ctx.position.to_string())));
                    self.lists.push(ctx);
                    self.node(nucleus);
                    self.lists.pop();
                }
                self.items.push(Item::format(FormatKind::ListEnd, Some(list.to_string())));
            }
            RstNode::Multi { nuclei, .. } => nuclei.iter().for_each(|c| self.node(c)),
            RstNode::Span { nucleus, satellites, .. } => {
                let (conditions, others): (Vec<_>, Vec<_>) =
                    satellites.iter().partition(|s| s.relation.is_conditional());
                let mut condition = conditions.first().map(|s| self.condition(&s.node));
                let start = self.items.len();
                self.node(nucleus);
                if let Some(c) = condition.take() {
                    // Attach to the first sentence of the nucleus.
                    if let Some(Item::Plan(host)) = self.items[start..].iter_mut().find(|i| matches!(i, Item::Plan(_))) {
                        host.condition = Some(Box::new(c));
                    }
                }
                for s in others {
                    self.node(&s.node);
                }
            }
        }
    }
}

/// Orders the document into sentence plans and formatting instructions:
/// heading, location, replacements, then the activities, depth-first and nucleus first.
pub fn linearize(schema: &SectionSchema) -> Vec<Item> {
    let mut lin = Linearizer { items: Vec::new(), next_plan: 0, next_list: 0, lists: Vec::new() };
    if let Some(t) = &schema.title {
        lin.items.push(Item::format(FormatKind::Heading, None));
        let p = lin.plan(t, 0, Mood::Title);
        lin.items.push(Item::Plan(p));
    }
    for block in schema.blocks() {
        if !lin.items.is_empty() {
            lin.items.push(Item::format(FormatKind::ParagraphBreak, None));
        }
        lin.node(block);
    }
    lin.items
}

/// Concept an instance is named by: its first asserted type.
pub fn lexical_concept(kb: &Kb, instance: &str) -> Option<String> {
    kb.instance(instance).ok().and_then(|i| i.asserted.iter().next().cloned())
}

fn first_mention_form(kb: &Kb, referent: &str) -> Form {
    let Ok(inst) = kb.instance(referent) else { return Form::Definite };
    if inst.derived.contains(SUBSTANCE) {
        Form::Bare
    } else if kb.unique_filler_of(referent).is_some() || inst.fillers_of(PART_OF).next().is_some() {
        Form::Definite
    } else {
        Form::Indefinite
    }
}

/// Enum role whose values tell apart every referent in the group.
fn distinguishing_values(kb: &Kb, group: &[&str]) -> Option<BTreeMap<String, String>> {
    let enum_roles: Vec<&str> =
        kb.roles().filter(|r| matches!(r.range, crate::kb::Range::Enum { .. })).map(|r| r.id.as_str()).collect();
    enum_roles.into_iter().find_map(|role| {
        let mut values = BTreeMap::new();
        for &r in group {
            let inst = kb.instance(r).ok()?;
            let mut vs = inst.fillers_of(role);
            let v = vs.next()?.as_str()?.to_string();
            if vs.next().is_some() {
                return None;
            }
            values.insert(r.to_string(), v);
        }
        let distinct: BTreeSet<&String> = values.values().collect();
        (distinct.len() == group.len()).then_some(values)
    })
}

/// Assigns a referring form to every participant. Recomputed from scratch, so idempotent.
///
/// First mentions are definite when the referent is part of the device or the
/// only filler of some role, bare for substances, and indefinite otherwise.
/// A referent repeated in the same role as in the directly preceding sentence
/// becomes a pronoun linked to its last full mention, unless another referent
/// of the same concept is in view. Referents that share a concept with another
/// referent of the section are always definite, with a distinguishing modifier.
/// Later full mentions are definite, except substances, which stay bare.
pub fn plan_references(items: &mut [Item], kb: &Kb) {
    let mut by_concept: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for p in all_plans(items) {
        if p.mood == Mood::Title {
            continue;
        }
        for re in p.participants.values() {
            if let Some(c) = lexical_concept(kb, &re.referent) {
                by_concept.entry(c).or_default().insert(re.referent.clone());
            }
        }
    }
    let mut modifiers: BTreeMap<String, Option<String>> = BTreeMap::new();
    for group in by_concept.values().filter(|g| g.len() > 1) {
        let members: Vec<&str> = group.iter().map(String::as_str).collect();
        let values = distinguishing_values(kb, &members);
        for m in members {
            modifiers.insert(m.to_string(), values.as_ref().and_then(|v| v.get(m).cloned()));
        }
    }

    let mut mentioned: BTreeSet<String> = BTreeSet::new();
    let mut last_full: BTreeMap<String, Antecedent> = BTreeMap::new();
    let mut previous: Vec<(String, SemRole)> = Vec::new();

    for item in items.iter_mut() {
        let Item::Plan(top) = item else { continue };
        top.in_text_order_mut(&mut |p| {
            if p.mood == Mood::Title {
                for re in p.participants.values_mut() {
                    re.form = if first_mention_form(kb, &re.referent) == Form::Bare { Form::Bare } else { Form::Definite };
                    re.antecedent = None;
                    re.modifier = modifiers.get(&re.referent).cloned().flatten();
                }
                return;
            }
            let current: Vec<(String, SemRole)> =
                p.participants.iter().map(|(r, re)| (re.referent.clone(), *r)).collect();
            for (role, re) in p.participants.iter_mut() {
                re.antecedent = None;
                re.modifier = None;
                let r = re.referent.clone();
                if let Some(m) = modifiers.get(&r) {
                    re.form = Form::Definite;
                    re.modifier = m.clone();
                } else if previous.iter().any(|(pr, prole)| *pr == r && prole == role)
                    && last_full.contains_key(&r)
                    && !same_concept_in_view(kb, &r, &previous, &current)
                {
                    re.form = Form::Pronoun;
                    re.antecedent = last_full.get(&r).copied();
                } else {
                    let first = first_mention_form(kb, &r);
                    // Substances stay bare: "add engine oil" after "you need engine oil".
                    re.form = if mentioned.contains(&r) && first != Form::Bare { Form::Definite } else { first };
                }
                mentioned.insert(r.clone());
                if re.form != Form::Pronoun {
                    last_full.insert(r, Antecedent { plan: p.id, role: *role });
                }
            }
            previous = current;
        });
    }
}

fn same_concept_in_view(kb: &Kb, referent: &str, previous: &[(String, SemRole)], current: &[(String, SemRole)]) -> bool {
    let concept = lexical_concept(kb, referent);
    previous.iter().chain(current).any(|(other, _)| other != referent && lexical_concept(kb, other) == concept)
}

/// Linearizes and plans references in one step.
pub fn plan_sentences(schema: &SectionSchema, kb: &Kb) -> Vec<Item> {
    let mut items = linearize(schema);
    plan_references(&mut items, kb);
    items
}

/// Condition plans are never instructions.
pub fn is_condition(p: &SentencePlan) -> bool {
    p.action.is_none() && p.mood == Mood::Declarative && p.value.is_some()
}

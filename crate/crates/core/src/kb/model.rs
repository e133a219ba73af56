//! Terminological and assertional entities of the knowledge base.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::query::Query;

/// The root concept. Every concept descends from it and every instance belongs to it.
pub const THING: &str = "THING";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiteralKind {
    Number,
    String,
    Boolean,
}

/// What a role's fillers may be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Range {
    /// Fillers are instances of the named concept.
    Concept(String),
    Literal { literal: LiteralKind },
    Enum {
        #[serde(rename = "enum")]
        values: Vec<String>,
    },
}

impl Range {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Range::Literal { literal: LiteralKind::Number })
    }

    pub fn is_attribute(&self) -> bool {
        matches!(self, Range::Enum { .. } | Range::Literal { literal: LiteralKind::Number })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Role {
    pub id: String,
    pub domain: String,
    pub range: Range,
    /// A functional role holds at most one filler; telling a new one replaces the old.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub functional: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Restriction {
    /// Every filler of `role` is an instance of `concept`.
    #[serde(rename = "all")]
    All { role: String, concept: String },
    /// `value` is among the fillers of `role`.
    #[serde(rename = "filler")]
    Filler { role: String, value: Value },
    /// The number of fillers of `role` lies in `[min, max]`; a missing max is unbounded.
    #[serde(rename = "card")]
    Card {
        role: String,
        min: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<u32>,
    },
}

impl Restriction {
    pub fn role(&self) -> &str {
        match self {
            Restriction::All { role, .. }
            | Restriction::Filler { role, .. }
            | Restriction::Card { role, .. } => role,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    #[serde(default)]
    pub parents: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub restrictions: Vec<Restriction>,
    /// Primitive concepts are only entered by assertion; defined concepts are
    /// recognized from their parents and restrictions.
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub primitive: bool,
}

fn default_true() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl Concept {
    pub fn primitive(id: impl Into<String>, parents: &[&str]) -> Self {
        Concept {
            id: id.into(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            restrictions: Vec::new(),
            primitive: true,
        }
    }

    pub fn defined(id: impl Into<String>, parents: &[&str], restrictions: Vec<Restriction>) -> Self {
        Concept {
            id: id.into(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
            restrictions,
            primitive: false,
        }
    }
}

/// A role filler: an instance reference or a literal.
///
/// In JSON, references and strings/enum symbols are both plain strings; the
/// knowledge base disambiguates them by the role's range when loading.
#[derive(Debug, Clone)]
pub enum Value {
    Ref(String),
    Number(f64),
    Text(String),
    Bool(bool),
}

impl Value {
    pub fn as_ref_id(&self) -> Option<&str> {
        match self {
            Value::Ref(id) => Some(id),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Ref(s) | Value::Text(s) => Some(s),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Number(_) => 1,
            Value::Ref(_) => 2,
            Value::Text(_) => 3,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Ref(s) | Value::Text(s) => f.write_str(s),
            Value::Number(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Number(a), Value::Number(b)) => a.total_cmp(b),
            (Value::Ref(a), Value::Ref(b)) | (Value::Text(a), Value::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Ref(v) | Value::Text(v) => s.serialize_str(v),
            Value::Number(n) => s.serialize_f64(*n),
            Value::Bool(b) => s.serialize_bool(*b),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match RawValue::deserialize(d)? {
            RawValue::Bool(b) => Value::Bool(b),
            RawValue::Number(n) => Value::Number(n),
            RawValue::Text(t) => Value::Text(t),
        })
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Number(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    #[serde(default, rename = "types")]
    pub asserted: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fillers: BTreeMap<String, BTreeSet<Value>>,
    /// Maintained by classification; never serialized.
    #[serde(skip)]
    pub derived: BTreeSet<String>,
}

impl Instance {
    pub fn new(id: impl Into<String>, types: &[&str]) -> Self {
        Instance {
            id: id.into(),
            asserted: types.iter().map(|t| t.to_string()).collect(),
            fillers: BTreeMap::new(),
            derived: BTreeSet::new(),
        }
    }

    pub fn with_filler(mut self, role: &str, value: impl Into<Value>) -> Self {
        self.fillers.entry(role.to_string()).or_default().insert(value.into());
        self
    }

    pub fn fillers_of(&self, role: &str) -> impl Iterator<Item = &Value> {
        self.fillers.get(role).into_iter().flatten()
    }
}

/// One effect of a production rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleAction {
    AssertFiller(super::query::Term, String, super::query::Term),
    AssertType(super::query::Term, String),
    RetractFiller(super::query::Term, String, super::query::Term),
    /// Recorded in the state delta for an output medium to pick up.
    Emit(String, #[serde(default)] Vec<super::query::Term>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub condition: Query,
    pub actions: Vec<RuleAction>,
}

/// A TELL: a fact to add or retract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Assertion {
    Type { instance: String, concept: String },
    Filler { instance: String, role: String, value: Value },
    RetractType { instance: String, concept: String },
    /// Retracts one filler, or every filler of the role when `value` is absent.
    RetractFiller {
        instance: String,
        role: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<Value>,
    },
}

impl Assertion {
    pub fn filler(instance: &str, role: &str, value: impl Into<Value>) -> Self {
        Assertion::Filler { instance: instance.into(), role: role.into(), value: value.into() }
    }

    pub fn type_of(instance: &str, concept: &str) -> Self {
        Assertion::Type { instance: instance.into(), concept: concept.into() }
    }

    pub fn instance(&self) -> &str {
        match self {
            Assertion::Type { instance, .. }
            | Assertion::Filler { instance, .. }
            | Assertion::RetractType { instance, .. }
            | Assertion::RetractFiller { instance, .. } => instance,
        }
    }

    /// The query that holds once this assertion is in effect, if it is positive.
    pub fn as_query(&self) -> Option<Query> {
        use super::query::{Atom, Term};
        match self {
            Assertion::Type { instance, concept } => Some(Query(vec![Atom::Type(
                Term::Const(Value::Ref(instance.clone())),
                concept.clone(),
            )])),
            Assertion::Filler { instance, role, value } => Some(Query(vec![Atom::Filler(
                Term::Const(Value::Ref(instance.clone())),
                role.clone(),
                Term::Const(value.clone()),
            )])),
            _ => None,
        }
    }
}

/// Change of one filler: `old` removed, `new` added.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillerChange {
    pub instance: String,
    pub role: String,
    pub old: Option<Value>,
    pub new: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeChange {
    pub instance: String,
    pub concept: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertedTypeChange {
    pub instance: String,
    pub concept: String,
    pub added: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmittedEvent {
    pub rule: String,
    pub name: String,
    pub args: Vec<Value>,
}

/// Everything a TELL changed, directly and through rules.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateDelta {
    pub type_gains: Vec<TypeChange>,
    pub type_losses: Vec<TypeChange>,
    pub filler_changes: Vec<FillerChange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub asserted_changes: Vec<AssertedTypeChange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fired_rules: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EmittedEvent>,
}

impl StateDelta {
    pub fn is_empty(&self) -> bool {
        self.type_gains.is_empty()
            && self.type_losses.is_empty()
            && self.filler_changes.is_empty()
            && self.asserted_changes.is_empty()
            && self.fired_rules.is_empty()
            && self.events.is_empty()
    }

    pub fn gained(&self, instance: &str, concept: &str) -> bool {
        self.type_gains.iter().any(|c| c.instance == instance && c.concept == concept)
    }

    /// Appends `other` after this delta; type changes are recomputed by the caller.
    pub fn extend(&mut self, other: StateDelta) {
        self.filler_changes.extend(other.filler_changes);
        self.asserted_changes.extend(other.asserted_changes);
        for r in other.fired_rules {
            if !self.fired_rules.contains(&r) {
                self.fired_rules.push(r);
            }
        }
        self.events.extend(other.events);
    }
}

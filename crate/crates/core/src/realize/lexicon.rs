//! Concept-keyed multilingual lexicon.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Language, RealizeError};
use crate::document::{BE_LOCATED, NEED};
use crate::kb::{Atom, Kb, Term};
use crate::plan::{Plan, Step};
use crate::sentence::SemRole;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    M,
    F,
    N,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::M => "m",
            Gender::F => "f",
            Gender::N => "n",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subject {
    /// The sentence subject is the actee ("the dipstick is ...").
    Actee,
    /// The sentence subject is the reader ("you need ...").
    Reader,
}

/// How a verb marks one of its participants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleFrame {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<String>,
    /// German case governed by the preposition (or the verb, for the actee).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub lemma: String,
    pub pos: Pos,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    /// Inflection class in the language's morphology tables.
    pub class: String,
    /// English verb particle or German separable prefix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particle: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reflexive: bool,
    /// Fixed words following a noun (French "de huile moteur") or a verb (French "besoin").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub roles: BTreeMap<SemRole, RoleFrame>,
    /// Nominalization used in headings, where the language does not derive one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal: Option<String>,
    /// Adjective keys always attached to the noun.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modifiers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<Subject>,
}

pub type Translations = BTreeMap<Language, Entry>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    #[serde(default)]
    pub concepts: BTreeMap<String, Translations>,
    /// Attribute values and noun modifiers.
    #[serde(default)]
    pub adjectives: BTreeMap<String, Translations>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Self, RealizeError> {
        let lex: Lexicon = serde_json::from_str(text).map_err(|e| RealizeError::Data(format!("lexicon: {e}")))?;
        for (id, tr) in lex.concepts.iter().chain(&lex.adjectives) {
            for (lang, e) in tr {
                if e.pos == Pos::Noun && *lang != Language::En && e.gender.is_none() {
                    return Err(RealizeError::Data(format!("{lang:?} noun for `{id}` has no gender")));
                }
            }
        }
        Ok(lex)
    }

    pub fn concept(&self, id: &str, lang: Language) -> Result<&Entry, RealizeError> {
        self.concepts
            .get(id)
            .and_then(|t| t.get(&lang))
            .ok_or_else(|| RealizeError::Unlexicalized { concept: id.to_string(), language: lang })
    }

    pub fn adjective(&self, id: &str, lang: Language) -> Result<&Entry, RealizeError> {
        self.adjectives
            .get(id)
            .and_then(|t| t.get(&lang))
            .ok_or_else(|| RealizeError::Unlexicalized { concept: id.to_string(), language: lang })
    }

    /// The concept naming an instance in `lang`: its first asserted type with an entry.
    pub fn concept_for_instance<'a>(&'a self, kb: &Kb, instance: &str, lang: Language) -> Result<(&'a str, &'a Entry), RealizeError> {
        let inst = kb.instance(instance).map_err(|e| RealizeError::Data(e.to_string()))?;
        for t in &inst.asserted {
            if let Some((id, tr)) = self.concepts.get_key_value(t) {
                if let Some(e) = tr.get(&lang) {
                    return Ok((id, e));
                }
            }
        }
        let first = inst.asserted.iter().next().cloned().unwrap_or_else(|| crate::kb::THING.to_string());
        Err(RealizeError::Unlexicalized { concept: first, language: lang })
    }
}

/// A concept or value some language has no entry for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageGap {
    pub concept: String,
    pub missing: Vec<Language>,
}

/// What the given plans need lexicalized, keyed by whether it is a concept or an adjective.
fn used_vocabulary(kb: &Kb, plans: &[&Plan]) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut concepts = BTreeSet::new();
    let mut adjectives = BTreeSet::new();
    let mut instances = BTreeSet::new();
    let mut conditions = Vec::new();
    for plan in plans {
        if let Some(t) = &plan.title {
            concepts.insert(t.process.clone());
            instances.insert(t.patient.clone());
        }
        if plan.location_info.is_some() {
            concepts.insert(BE_LOCATED.to_string());
            instances.extend(plan.location_info.clone());
            instances.extend(plan.located_object().map(str::to_string));
        }
        if !plan.replacement_items.is_empty() {
            concepts.insert(NEED.to_string());
            instances.extend(plan.replacement_items.iter().cloned());
        }
        for a in plan.actions() {
            concepts.insert(a.process.clone());
            instances.extend(a.participants.values().filter(|v| !v.starts_with('$')).cloned());
            if let Some(r) = &a.refinement {
                if let Ok(sub) = kb.plan(r) {
                    let (c, adj) = used_vocabulary(kb, &[sub]);
                    concepts.extend(c);
                    adjectives.extend(adj);
                }
            }
        }
        fn walk<'a>(steps: &'a [Step], out: &mut Vec<&'a crate::kb::Query>) {
            for s in steps {
                if let Step::If(c) = s {
                    out.push(&c.condition);
                    walk(&c.then, out);
                    walk(&c.otherwise, out);
                }
            }
        }
        walk(&plan.steps, &mut conditions);
    }
    for q in conditions {
        for atom in q.atoms() {
            if let Term::Const(v) = atom.subject() {
                instances.insert(v.to_string());
            }
            match atom {
                Atom::Filler(_, _, Term::Const(v)) => {
                    adjectives.insert(v.to_string());
                }
                Atom::Type(_, c) => {
                    concepts.insert(c.clone());
                }
                _ => {}
            }
        }
    }
    for i in instances {
        if let Ok(inst) = kb.instance(&i) {
            if let Some(t) = inst.asserted.iter().next() {
                concepts.insert(t.clone());
            }
        }
    }
    (concepts, adjectives)
}

/// Concepts and values used by the plans that lack an entry in some language.
pub fn coverage_report(lexicon: &Lexicon, kb: &Kb, plans: &[&Plan]) -> Vec<CoverageGap> {
    let (concepts, adjectives) = used_vocabulary(kb, plans);
    let mut out = Vec::new();
    let mut check = |id: &String, table: &BTreeMap<String, Translations>| {
        let missing: Vec<Language> =
            Language::ALL.into_iter().filter(|l| table.get(id).is_none_or(|t| !t.contains_key(l))).collect();
        if !missing.is_empty() {
            out.push(CoverageGap { concept: id.clone(), missing });
        }
    };
    for c in &concepts {
        check(c, &lexicon.concepts);
    }
    for a in &adjectives {
        check(a, &lexicon.adjectives);
    }
    out.sort_by(|a, b| a.concept.cmp(&b.concept));
    out
}

//! Queries a reader or author can ask about generated text and the knowledge base.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::emit::{phrases, AlignmentMap, AnnotatedDocument, Phrase, Span};
use crate::kb::{Atom, Kb, Query, Term, Value};
use crate::plan::{applicable_plans, participant_constraints};
use crate::realize::Language;
use crate::sentence::lexical_concept;

pub const LOCATION_ILLUSTRATION: &str = "location-illustration";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("no annotated phrase at {0}")]
    NoSuchSpan(String),
    #[error("`{0}` is not a pronoun")]
    NotAPronoun(String),
    #[error("pronoun `{0}` has no recorded antecedent")]
    NoAntecedent(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("`{0}` has no location illustration")]
    NoIllustration(String),
    #[error("illustration `{id}` lacks `{role}`")]
    IncompleteIllustration { id: String, role: String },
    #[error("no document in language {0}")]
    NoDocument(Language),
}

/// The phrase of `doc` covering `span` (any span inside a phrase selects it).
pub fn phrase_at(doc: &AnnotatedDocument, span: &Span) -> Result<Phrase, QueryError> {
    let sentence = doc.sentence(span.sentence).ok_or_else(|| QueryError::NoSuchSpan(span.to_string()))?;
    phrases(sentence)
        .into_iter()
        .find(|p| p.span.start <= span.start && span.end <= p.span.end && span.start < span.end)
        .ok_or_else(|| QueryError::NoSuchSpan(span.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntecedentAnswer {
    pub referent: String,
    pub pronoun: Phrase,
    pub antecedent: Phrase,
}

/// The full noun phrase a pronoun refers back to.
pub fn antecedent(doc: &AnnotatedDocument, span: &Span) -> Result<AntecedentAnswer, QueryError> {
    let pronoun = phrase_at(doc, span)?;
    if !pronoun.pronoun {
        return Err(QueryError::NotAPronoun(pronoun.text));
    }
    let token = doc
        .sentence(span.sentence)
        .and_then(|s| s.tokens.iter().find(|t| t.start == pronoun.span.start))
        .ok_or_else(|| QueryError::NoSuchSpan(span.to_string()))?;
    let ante = token.antecedent.ok_or_else(|| QueryError::NoAntecedent(pronoun.text.clone()))?;
    let sentence = doc.sentence_containing(ante.plan).ok_or_else(|| QueryError::NoAntecedent(pronoun.text.clone()))?;
    let antecedent = phrases(sentence)
        .into_iter()
        .find(|p| p.plan == ante.plan && p.kb == pronoun.kb && p.role == ante.role.as_str() && !p.pronoun)
        .ok_or_else(|| QueryError::NoAntecedent(pronoun.text.clone()))?;
    Ok(AntecedentAnswer { referent: pronoun.kb.clone(), pronoun, antecedent })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignAnswer {
    pub kb: String,
    pub plan: usize,
    pub source: Phrase,
    pub counterparts: BTreeMap<Language, Vec<Phrase>>,
}

/// The phrases in the other languages that express what the selected phrase expresses.
pub fn align_span(map: &AlignmentMap, docs: &BTreeMap<Language, AnnotatedDocument>, language: Language, span: &Span) -> Result<AlignAnswer, QueryError> {
    let doc = docs.get(&language).ok_or(QueryError::NoDocument(language))?;
    let source = phrase_at(doc, span)?;
    let counterparts = docs
        .keys()
        .filter(|l| **l != language)
        .map(|l| (*l, map.counterparts(&source, *l).into_iter().cloned().collect()))
        .collect();
    Ok(AlignAnswer { kb: source.kb.clone(), plan: source.plan, source, counterparts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationAnswer {
    pub instance: String,
    pub illustration: String,
    pub image: String,
    pub caption: String,
    pub region: Region,
}

fn single<'a>(kb: &'a Kb, id: &str, role: &str) -> Result<&'a Value, QueryError> {
    let inst = kb.instance(id).map_err(|_| QueryError::UnknownInstance(id.to_string()))?;
    inst.fillers_of(role)
        .next()
        .ok_or_else(|| QueryError::IncompleteIllustration { id: id.to_string(), role: role.to_string() })
}

/// Where an object is, as an image and the rectangle showing it.
pub fn location(kb: &Kb, instance: &str) -> Result<LocationAnswer, QueryError> {
    let inst = kb.instance(instance).map_err(|_| QueryError::UnknownInstance(instance.to_string()))?;
    let illus = inst
        .fillers_of(LOCATION_ILLUSTRATION)
        .find_map(Value::as_ref_id)
        .ok_or_else(|| QueryError::NoIllustration(instance.to_string()))?
        .to_string();
    let text = |role: &str| -> Result<String, QueryError> {
        let v = single(kb, &illus, role)?;
        v.as_str().map(str::to_string).ok_or_else(|| QueryError::IncompleteIllustration { id: illus.clone(), role: role.into() })
    };
    let number = |role: &str| -> Result<f64, QueryError> {
        single(kb, &illus, role)?
            .as_number()
            .ok_or_else(|| QueryError::IncompleteIllustration { id: illus.clone(), role: role.into() })
    };
    Ok(LocationAnswer {
        instance: instance.to_string(),
        image: text("image")?,
        caption: text("caption")?,
        region: Region { x: number("region-x")?, y: number("region-y")?, w: number("region-w")?, h: number("region-h")? },
        illustration: illus,
    })
}

/// What an authoring menu is being filled for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "context", rename_all = "kebab-case")]
pub enum MenuContext {
    /// Plans that apply to a device in its current state.
    Device { device: String },
    /// Processes a draft action may use.
    Process,
    /// Fillers for one participant role of a draft action.
    Participant { process: String, role: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MenuOption {
    pub id: String,
    /// Concept to display the option by.
    pub concept: String,
}

pub const ACTION: &str = "action";

/// Options for an authoring menu, built from the current knowledge-base state.
pub fn menu(kb: &Kb, context: &MenuContext) -> Result<Vec<MenuOption>, QueryError> {
    match context {
        MenuContext::Device { device } => {
            let plans = applicable_plans(kb, device).map_err(|_| QueryError::UnknownInstance(device.clone()))?;
            Ok(plans
                .into_iter()
                .map(|id| {
                    let concept = kb
                        .plan(&id)
                        .ok()
                        .and_then(|p| p.title.as_ref().map(|t| t.process.clone()))
                        .unwrap_or_else(|| "plan".to_string());
                    MenuOption { id, concept }
                })
                .collect())
        }
        MenuContext::Process => {
            let tax = kb.taxonomy();
            let mut out: Vec<MenuOption> = kb
                .concepts()
                .filter(|c| c.id != ACTION && tax.subsumers(&c.id).contains(ACTION))
                .filter(|c| !kb.concepts().any(|d| d.id != c.id && tax.subsumers(&d.id).contains(&c.id)))
                .map(|c| MenuOption { id: c.id.clone(), concept: c.id.clone() })
                .collect();
            out.sort();
            Ok(out)
        }
        MenuContext::Participant { process, role } => {
            // One ASK over the conjunction of every type the role demands.
            let x = Term::var("x");
            let mut atoms: Vec<Atom> =
                participant_constraints(kb, process, role).into_iter().map(|c| Atom::Type(x.clone(), c)).collect();
            if atoms.is_empty() {
                atoms.push(Atom::Type(x, crate::kb::THING.to_string()));
            }
            let bindings = kb.solve(&Query(atoms)).unwrap_or_default();
            let mut out: Vec<MenuOption> = bindings
                .iter()
                .filter_map(|b| b.get("x").and_then(Value::as_ref_id))
                .filter(|id| kb.has_instance(id))
                .map(|id| MenuOption {
                    id: id.to_string(),
                    concept: lexical_concept(kb, id).unwrap_or_else(|| crate::kb::THING.to_string()),
                })
                .collect();
            out.sort();
            out.dedup();
            Ok(out)
        }
    }
}

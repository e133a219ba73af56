//! Surface realization: sentence plans to annotated EN/DE/FR sentences.

pub mod lexicon;
pub mod morph;
mod postlex;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::{CmpOp, Kb, Value};
use crate::sentence::{Antecedent, Form, Mood, Polarity, ReferringExpression, SemRole, SentencePlan};
use lexicon::{Entry, Gender, Lexicon, Pos, Position, Subject};
use morph::{features, Features, Morphology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    De,
    Fr,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::En, Language::De, Language::Fr];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
            Language::Fr => "fr",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = RealizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Language::ALL
            .into_iter()
            .find(|l| l.code() == s)
            .ok_or_else(|| RealizeError::Data(format!("unknown language `{s}`")))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizeError {
    #[error("resource data: {0}")]
    Data(String),
    #[error("no {language} entry for `{concept}`")]
    Unlexicalized { concept: String, language: Language },
    #[error("unknown inflection class `{class}` ({language:?})")]
    UnknownClass { language: Option<Language>, class: String },
    #[error("no inflection of `{lemma}` ({class}) for {features}")]
    NoInflection { lemma: String, class: String, features: String },
}

/// Lexicon plus one morphology table per language.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: Lexicon,
    pub morphology: BTreeMap<Language, Morphology>,
}

impl Resources {
    pub fn parse(lexicon: &str, morphology: &[(Language, &str)]) -> Result<Self, RealizeError> {
        let lexicon = Lexicon::parse(lexicon)?;
        let mut tables = BTreeMap::new();
        for (lang, text) in morphology {
            let mut m = Morphology::parse(text)?;
            m.language = Some(*lang);
            tables.insert(*lang, m);
        }
        if let Some(l) = Language::ALL.into_iter().find(|l| !tables.contains_key(l)) {
            return Err(RealizeError::Data(format!("no morphology for {l}")));
        }
        Ok(Resources { lexicon, morphology: tables })
    }

    /// The lexicon and tables shipped with the crate.
    pub fn bundled() -> &'static Resources {
        static BUNDLED: OnceLock<Resources> = OnceLock::new();
        BUNDLED.get_or_init(|| {
            Resources::parse(
                include_str!("../../data/lexicon.json"),
                &[
                    (Language::En, include_str!("../../data/morphology/en.json")),
                    (Language::De, include_str!("../../data/morphology/de.json")),
                    (Language::Fr, include_str!("../../data/morphology/fr.json")),
                ],
            )
            .expect("bundled linguistic resources are valid")
        })
    }

    pub fn morphology(&self, lang: Language) -> &Morphology {
        &self.morphology[&lang]
    }
}

/// One surface word or punctuation mark with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Character offsets into the sentence text.
    pub start: usize,
    pub end: usize,
    /// Instance, concept or value this token expresses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb: Option<String>,
    pub plan: usize,
    pub role: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pronoun: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antecedent: Option<Antecedent>,
}

impl Token {
    /// Tokens carrying knowledge-base content, as opposed to function words and punctuation.
    pub fn is_content(&self) -> bool {
        self.kb.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub language: Language,
    pub plan: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

/// Working token: the separator preceding it is kept so post-lexical rules can glue words.
#[derive(Debug, Clone)]
pub(crate) struct Tok {
    pub sep: String,
    pub surface: String,
    pub kb: Option<String>,
    pub role: String,
    pub plan: usize,
    pub antecedent: Option<Antecedent>,
    /// Articles, prepositions and preverbal clitics subject to elision and contraction.
    pub proclitic: bool,
    pub pronoun: bool,
}

impl Tok {
    fn new(surface: impl Into<String>, kb: Option<&str>, role: &str, plan: usize) -> Tok {
        Tok {
            sep: " ".into(),
            surface: surface.into(),
            kb: kb.map(str::to_string),
            role: role.to_string(),
            plan,
            antecedent: None,
            proclitic: false,
            pronoun: false,
        }
    }

    fn function(surface: impl Into<String>, plan: usize) -> Tok {
        Tok::new(surface, None, "function", plan)
    }

    fn clitic(mut self) -> Tok {
        self.proclitic = true;
        self
    }

    fn glued(mut self, sep: &str) -> Tok {
        self.sep = sep.to_string();
        self
    }
}

/// Splits a multi-word string into tokens sharing one annotation.
fn words(s: &str, kb: Option<&str>, role: &str, plan: usize) -> Vec<Tok> {
    s.split_whitespace()
        .map(|w| {
            let t = Tok::new(w, kb, role, plan);
            if matches!(w, "de" | "à") {
                t.clitic()
            } else {
                t
            }
        })
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn default_frame(lang: Language, role: SemRole) -> (&'static str, &'static str) {
    use SemRole::*;
    match (lang, role) {
        (_, Actee) => ("", "acc"),
        (Language::En, Instrument) => ("with", ""),
        (Language::En, Location) => ("at", ""),
        (Language::En, Source) => ("from", ""),
        (Language::En, Destination) => ("into", ""),
        (Language::De, Instrument) => ("mit", "dat"),
        (Language::De, Location) => ("an", "dat"),
        (Language::De, Source) => ("aus", "dat"),
        (Language::De, Destination) => ("in", "acc"),
        (Language::Fr, Instrument) => ("avec", ""),
        (Language::Fr, Location) => ("sur", ""),
        (Language::Fr, Source) => ("de", ""),
        (Language::Fr, Destination) => ("dans", ""),
    }
}

/// Where a French bare noun phrase stands, which decides its article.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Governor {
    None,
    De,
    Other,
}

struct Realizer<'a> {
    kb: &'a Kb,
    lex: &'a Lexicon,
    morph: &'a Morphology,
    lang: Language,
}

impl Realizer<'_> {
    fn inflect(&self, lemma: &str, class: &str, feats: &Features) -> Result<String, RealizeError> {
        self.morph.inflect(lemma, class, feats)
    }

    fn verb(&self, process: &str) -> Result<&Entry, RealizeError> {
        self.lex.concept(process, self.lang)
    }

    fn gender_of(&self, referent: &str) -> Result<Gender, RealizeError> {
        let (_, e) = self.lex.concept_for_instance(self.kb, referent, self.lang)?;
        Ok(e.gender.unwrap_or(Gender::N))
    }

    fn pronoun(&self, re: &ReferringExpression, role: &str, case: &str, plan: usize) -> Result<Tok, RealizeError> {
        let gender = self.gender_of(&re.referent)?;
        let surface = match self.lang {
            Language::En => self.inflect("it", "pron-3", &features(&[("case", case), ("number", "sg")]))?,
            Language::De => {
                self.inflect("er", "pron-3", &features(&[("case", case), ("gender", gender.code()), ("number", "sg")]))?
            }
            Language::Fr => {
                self.inflect("il", "pron-3", &features(&[("case", case), ("gender", gender.code()), ("number", "sg")]))?
            }
        };
        let mut t = Tok::new(surface, Some(&re.referent), role, plan);
        t.antecedent = re.antecedent;
        t.pronoun = true;
        Ok(t)
    }

    fn adjective(&self, key: &str, feats: &Features) -> Result<String, RealizeError> {
        let e = self.lex.adjective(key, self.lang)?;
        self.inflect(&e.lemma, &e.class, feats)
    }

    /// A full or pronominal noun phrase for `re`.
    fn noun_phrase(
        &self,
        re: &ReferringExpression,
        role: &str,
        case: &str,
        plan: usize,
        governor: Governor,
    ) -> Result<Vec<Tok>, RealizeError> {
        if re.form == Form::Pronoun {
            return Ok(vec![self.pronoun(re, role, case, plan)?]);
        }
        let (_, entry) = self.lex.concept_for_instance(self.kb, &re.referent, self.lang)?;
        let kb = Some(re.referent.as_str());
        let gender = entry.gender.unwrap_or(Gender::N).code();
        let mut out = Vec::new();
        let mut adjs: Vec<&str> = entry.modifiers.iter().map(String::as_str).collect();
        if let Some(m) = &re.modifier {
            adjs.push(m);
        }
        match self.lang {
            Language::En => {
                match re.form {
                    Form::Definite => out.push(Tok::new("the", kb, role, plan).clitic()),
                    Form::Indefinite => out.push(Tok::new("a", kb, role, plan).clitic()),
                    _ => {}
                }
                for a in adjs {
                    out.extend(words(&self.adjective(a, &Features::new())?, kb, role, plan));
                }
                let noun = self.inflect(&entry.lemma, &entry.class, &features(&[("number", "sg")]))?;
                out.extend(words(&noun, kb, role, plan));
            }
            Language::De => {
                let agr = [("case", case), ("gender", gender), ("number", "sg")];
                let decl = match re.form {
                    Form::Definite => {
                        out.push(Tok::new(self.inflect("der", "det-def", &features(&agr))?, kb, role, plan).clitic());
                        "weak"
                    }
                    Form::Indefinite => {
                        out.push(Tok::new(self.inflect("ein", "det-indef", &features(&agr))?, kb, role, plan).clitic());
                        "mixed"
                    }
                    _ => "strong",
                };
                let mut af = features(&agr);
                af.insert("decl".into(), decl.into());
                for a in adjs {
                    out.extend(words(&self.adjective(a, &af)?, kb, role, plan));
                }
                let noun = self.inflect(&entry.lemma, &entry.class, &features(&[("case", case), ("number", "sg")]))?;
                out.extend(words(&noun, kb, role, plan));
            }
            Language::Fr => {
                let agr = features(&[("gender", gender), ("number", "sg")]);
                match (re.form, governor) {
                    (Form::Definite, _) => {
                        out.push(Tok::new(self.inflect("le", "det-def", &agr)?, kb, role, plan).clitic())
                    }
                    (Form::Indefinite, _) => {
                        out.push(Tok::new(self.inflect("un", "det-indef", &agr)?, kb, role, plan).clitic())
                    }
                    (_, Governor::De) => {}
                    _ => {
                        // Partitive article.
                        out.push(Tok::function("de", plan).clitic());
                        out.push(Tok::new(self.inflect("le", "det-def", &agr)?, kb, role, plan).clitic());
                    }
                }
                let mut post = Vec::new();
                for a in adjs {
                    let e = self.lex.adjective(a, self.lang)?;
                    let toks = words(&self.inflect(&e.lemma, &e.class, &agr)?, kb, role, plan);
                    if e.position == Some(Position::Pre) {
                        out.extend(toks);
                    } else {
                        post.extend(toks);
                    }
                }
                let noun = self.inflect(&entry.lemma, &entry.class, &features(&[("number", "sg")]))?;
                out.extend(words(&noun, kb, role, plan));
                if let Some(c) = &entry.complement {
                    out.extend(words(c, kb, role, plan));
                }
                out.extend(post);
            }
        }
        Ok(out)
    }

    /// An indefinite phrase naming a concept rather than an instance.
    fn concept_phrase(&self, concept: &str, case: &str, plan: usize) -> Result<Vec<Tok>, RealizeError> {
        let e = self.lex.concept(concept, self.lang)?;
        if e.pos != Pos::Noun {
            return Err(RealizeError::Data(format!("`{concept}` is not lexicalized as a noun")));
        }
        let kb = Some(concept);
        let gender = e.gender.unwrap_or(Gender::N).code();
        let det = match self.lang {
            Language::En => "a".to_string(),
            Language::De => {
                self.inflect("ein", "det-indef", &features(&[("case", case), ("gender", gender), ("number", "sg")]))?
            }
            Language::Fr => self.inflect("un", "det-indef", &features(&[("gender", gender), ("number", "sg")]))?,
        };
        let mut out = vec![Tok::function(det, plan).clitic()];
        let feats = if self.lang == Language::De {
            features(&[("case", case), ("number", "sg")])
        } else {
            features(&[("number", "sg")])
        };
        out.extend(words(&self.inflect(&e.lemma, &e.class, &feats)?, kb, "value", plan));
        if let Some(c) = &e.complement {
            out.extend(words(c, kb, "value", plan));
        }
        Ok(out)
    }

    /// Non-actee participants with their prepositions, in role order.
    fn obliques(&self, entry: &Entry, plan: &SentencePlan) -> Result<Vec<Tok>, RealizeError> {
        let mut out = Vec::new();
        for (role, re) in plan.participants.iter().filter(|(r, _)| **r != SemRole::Actee) {
            out.extend(self.prepositional(entry, *role, re, plan.id)?);
        }
        Ok(out)
    }

    fn prepositional(
        &self,
        entry: &Entry,
        role: SemRole,
        re: &ReferringExpression,
        plan: usize,
    ) -> Result<Vec<Tok>, RealizeError> {
        let (dprep, dcase) = default_frame(self.lang, role);
        let frame = entry.roles.get(&role);
        let prep = frame.and_then(|f| f.prep.as_deref()).unwrap_or(dprep);
        let mut case = frame.and_then(|f| f.case.as_deref()).unwrap_or(dcase);
        if self.lang == Language::Fr {
            case = "obl";
        } else if self.lang == Language::En || case.is_empty() {
            case = if self.lang == Language::De { "dat" } else { "acc" };
        }
        let governor = if prep == "de" { Governor::De } else { Governor::Other };
        let mut out: Vec<Tok> = prep.split_whitespace().map(|p| Tok::function(p, plan).clitic()).collect();
        out.extend(self.noun_phrase(re, role.as_str(), case, plan, governor)?);
        Ok(out)
    }

    /// The actee as direct object, or with the preposition the verb governs.
    fn object(&self, entry: &Entry, re: &ReferringExpression, plan: usize) -> Result<Vec<Tok>, RealizeError> {
        let frame = entry.roles.get(&SemRole::Actee);
        if frame.is_some_and(|f| f.prep.is_some()) {
            return self.prepositional(entry, SemRole::Actee, re, plan);
        }
        let case = frame.and_then(|f| f.case.as_deref()).unwrap_or("acc");
        self.noun_phrase(re, "actee", case, plan, Governor::None)
    }

    fn verb_form(&self, entry: &Entry, feats: &[(&str, &str)]) -> Result<String, RealizeError> {
        self.inflect(&entry.lemma, &entry.class, &features(feats))
    }

    fn imperative(&self, plan: &SentencePlan) -> Result<Vec<Tok>, RealizeError> {
        let entry = self.verb(&plan.process)?;
        let p = plan.id;
        let pk = Some(plan.process.as_str());
        let neg = plan.polarity == Polarity::Negative;
        let actee = plan.participants.get(&SemRole::Actee);
        let imp = [("mood", "imp"), ("person", "2"), ("number", "pl")];
        let verb = Tok::new(self.verb_form(entry, &imp)?, pk, "process", p);
        let particle = |out: &mut Vec<Tok>| {
            if let Some(pt) = &entry.particle {
                out.extend(words(pt, pk, "process", p));
            }
        };
        let complement = |out: &mut Vec<Tok>| {
            if let Some(c) = &entry.complement {
                out.extend(words(c, pk, "process", p));
            }
        };
        let mut out = Vec::new();
        match self.lang {
            Language::En => {
                if neg {
                    out.push(Tok::function("do", p));
                    out.push(Tok::function("not", p));
                }
                out.push(verb);
                match actee {
                    Some(re) if re.form == Form::Pronoun => {
                        out.extend(self.object(entry, re, p)?);
                        particle(&mut out);
                    }
                    Some(re) => {
                        particle(&mut out);
                        out.extend(self.object(entry, re, p)?);
                    }
                    None => particle(&mut out),
                }
                complement(&mut out);
                out.extend(self.obliques(entry, plan)?);
            }
            Language::De => {
                out.push(verb);
                out.push(Tok::new("Sie", None, "actor", p));
                if entry.reflexive {
                    out.push(Tok::function("sich", p));
                }
                if let Some(re) = actee {
                    out.extend(self.object(entry, re, p)?);
                }
                out.extend(self.obliques(entry, plan)?);
                if neg {
                    out.push(Tok::function("nicht", p));
                }
                complement(&mut out);
                particle(&mut out);
            }
            Language::Fr => {
                let clitic = match actee {
                    Some(re) if re.form == Form::Pronoun && !entry.roles.get(&SemRole::Actee).is_some_and(|f| f.prep.is_some()) => {
                        Some(self.pronoun(re, "actee", "acc", p)?)
                    }
                    _ => None,
                };
                if neg {
                    out.push(Tok::function("ne", p).clitic());
                    if entry.reflexive {
                        out.push(Tok::function("vous", p));
                    }
                    if let Some(c) = &clitic {
                        out.push(c.clone().clitic());
                    }
                    out.push(verb);
                    out.push(Tok::function("pas", p));
                } else {
                    out.push(verb);
                    if entry.reflexive {
                        out.push(Tok::function("vous", p).glued("-"));
                    }
                    if let Some(c) = &clitic {
                        out.push(c.clone().glued("-"));
                    }
                }
                complement(&mut out);
                if clitic.is_none() {
                    if let Some(re) = actee {
                        out.extend(self.object(entry, re, p)?);
                    }
                }
                out.extend(self.obliques(entry, plan)?);
            }
        }
        Ok(out)
    }

    /// A statement about the actee or the reader. `inverted` puts the German verb first.
    fn declarative(&self, plan: &SentencePlan, inverted: bool) -> Result<Vec<Tok>, RealizeError> {
        let entry = self.verb(&plan.process)?;
        let p = plan.id;
        let pk = Some(plan.process.as_str());
        let neg = plan.polarity == Polarity::Negative;
        let actee = plan.participants.get(&SemRole::Actee);
        let reader = entry.subject == Some(Subject::Reader) || actee.is_none();
        let (subject, object) = if reader {
            let s = match self.lang {
                Language::En => "you",
                Language::De => "Sie",
                Language::Fr => "vous",
            };
            (vec![Tok::new(s, None, "actor", p)], actee)
        } else {
            (self.noun_phrase(actee.unwrap(), "actee", "nom", p, Governor::None)?, None)
        };
        let agr: [(&str, &str); 3] = match (reader, self.lang) {
            (false, _) => [("mood", "ind"), ("person", "3"), ("number", "sg")],
            (true, Language::De) => [("mood", "ind"), ("person", "3"), ("number", "pl")],
            (true, _) => [("mood", "ind"), ("person", "2"), ("number", "pl")],
        };
        let mut out = Vec::new();
        let obj = |out: &mut Vec<Tok>| -> Result<(), RealizeError> {
            if let Some(re) = object {
                out.extend(self.object(entry, re, p)?);
            }
            Ok(())
        };
        let extra = |out: &mut Vec<Tok>, s: &Option<String>| {
            if let Some(s) = s {
                out.extend(words(s, pk, "process", p));
            }
        };
        match self.lang {
            Language::En => {
                out.extend(subject);
                if neg && entry.lemma != "be" {
                    let aux = self.inflect("do", "v-regular", &features(&agr))?;
                    out.push(Tok::function(aux, p));
                    out.push(Tok::function("not", p));
                    out.push(Tok::new(entry.lemma.clone(), pk, "process", p));
                } else {
                    out.push(Tok::new(self.verb_form(entry, &agr)?, pk, "process", p));
                    if neg {
                        out.push(Tok::function("not", p));
                    }
                }
                extra(&mut out, &entry.particle);
                extra(&mut out, &entry.complement);
                obj(&mut out)?;
                out.extend(self.obliques(entry, plan)?);
            }
            Language::De => {
                let verb = Tok::new(self.verb_form(entry, &agr)?, pk, "process", p);
                if inverted {
                    out.push(verb);
                    out.extend(subject);
                } else {
                    out.extend(subject);
                    out.push(verb);
                }
                if entry.reflexive {
                    out.push(Tok::function("sich", p));
                }
                obj(&mut out)?;
                out.extend(self.obliques(entry, plan)?);
                if neg {
                    out.push(Tok::function("nicht", p));
                }
                extra(&mut out, &entry.complement);
                extra(&mut out, &entry.particle);
            }
            Language::Fr => {
                out.extend(subject);
                if neg {
                    out.push(Tok::function("ne", p).clitic());
                }
                if entry.reflexive {
                    out.push(Tok::function(if reader { "vous" } else { "se" }, p).clitic());
                }
                out.push(Tok::new(self.verb_form(entry, &agr)?, pk, "process", p));
                if neg {
                    out.push(Tok::function("pas", p));
                }
                extra(&mut out, &entry.complement);
                obj(&mut out)?;
                out.extend(self.obliques(entry, plan)?);
            }
        }
        Ok(out)
    }

    /// The predicate of a condition: an attribute value, a comparison, or a concept.
    fn predicate(&self, plan: &SentencePlan, subject_gender: Gender) -> Result<Vec<Tok>, RealizeError> {
        let p = plan.id;
        match (&plan.value, plan.comparison) {
            (Some(v @ Value::Number(_)), op) => {
                let op = op.unwrap_or(CmpOp::Eq);
                let words_for = match (self.lang, op) {
                    (Language::En, CmpOp::Eq) => "",
                    (Language::En, CmpOp::Ne) => "other than",
                    (Language::En, CmpOp::Lt) => "below",
                    (Language::En, CmpOp::Le) => "at most",
                    (Language::En, CmpOp::Gt) => "above",
                    (Language::En, CmpOp::Ge) => "at least",
                    (Language::De, CmpOp::Eq) => "",
                    (Language::De, CmpOp::Ne) => "ungleich",
                    (Language::De, CmpOp::Lt) => "unter",
                    (Language::De, CmpOp::Le) => "höchstens",
                    (Language::De, CmpOp::Gt) => "über",
                    (Language::De, CmpOp::Ge) => "mindestens",
                    (Language::Fr, CmpOp::Eq) => "égal à",
                    (Language::Fr, CmpOp::Ne) => "différent de",
                    (Language::Fr, CmpOp::Lt) => "inférieur à",
                    (Language::Fr, CmpOp::Le) => "au plus",
                    (Language::Fr, CmpOp::Gt) => "supérieur à",
                    (Language::Fr, CmpOp::Ge) => "au moins",
                };
                let mut out: Vec<Tok> = words_for.split_whitespace().map(|w| Tok::function(w, p)).collect();
                let n = v.to_string();
                out.push(Tok::new(n.clone(), Some(&n), "value", p));
                Ok(out)
            }
            (Some(v), None) => {
                let key = v.to_string();
                let feats = match self.lang {
                    Language::En => Features::new(),
                    Language::De => features(&[("decl", "pred")]),
                    Language::Fr => features(&[("gender", subject_gender.code()), ("number", "sg")]),
                };
                Ok(words(&self.adjective(&key, &feats)?, Some(&key), "value", p))
            }
            (Some(v), Some(_)) => Err(RealizeError::Data(format!("cannot compare non-numeric value `{v}`"))),
            (None, _) => self.concept_phrase(&plan.process, "nom", p),
        }
    }

    /// "the level is low" / "der Stand niedrig ist" (subordinate) / "le niveau est bas".
    fn condition_clause(&self, plan: &SentencePlan, subordinate: bool) -> Result<Vec<Tok>, RealizeError> {
        let p = plan.id;
        let neg = plan.polarity == Polarity::Negative;
        let re = plan
            .participants
            .get(&SemRole::Actee)
            .ok_or_else(|| RealizeError::Data(format!("condition plan {p} has no subject")))?;
        let gender = self.gender_of(&re.referent)?;
        let subject = self.noun_phrase(re, "actee", "nom", p, Governor::None)?;
        let pred = self.predicate(plan, gender)?;
        let cop = |lemma: &str, class: &str| self.inflect(lemma, class, &features(&[("mood", "ind"), ("person", "3"), ("number", "sg")]));
        let mut out = subject;
        match self.lang {
            Language::En => {
                out.push(Tok::function(cop("be", "v-regular")?, p));
                if neg {
                    out.push(Tok::function("not", p));
                }
                out.extend(pred);
            }
            Language::De => {
                let copula = Tok::function(cop("sein", "v-weak")?, p);
                if subordinate {
                    if neg {
                        out.push(Tok::function("nicht", p));
                    }
                    out.extend(pred);
                    out.push(copula);
                } else {
                    out.push(copula);
                    if neg {
                        out.push(Tok::function("nicht", p));
                    }
                    out.extend(pred);
                }
            }
            Language::Fr => {
                if neg {
                    out.push(Tok::function("ne", p).clitic());
                }
                out.push(Tok::function(cop("être", "v-er")?, p));
                if neg {
                    out.push(Tok::function("pas", p));
                }
                out.extend(pred);
            }
        }
        Ok(out)
    }

    /// A condition with its conjuncts, optionally introduced by "if".
    fn conditions(&self, plan: &SentencePlan, subordinate: bool) -> Result<Vec<Tok>, RealizeError> {
        let mut out = Vec::new();
        if subordinate {
            let conj = match self.lang {
                Language::En => "if",
                Language::De => "wenn",
                Language::Fr => "si",
            };
            out.push(Tok::function(conj, plan.id).clitic());
        }
        out.extend(self.condition_clause(plan, subordinate)?);
        for c in &plan.conjoined {
            let and = match self.lang {
                Language::En => "and",
                Language::De => "und",
                Language::Fr => "et",
            };
            out.push(Tok::function(and, c.id));
            out.extend(self.condition_clause(c, subordinate)?);
        }
        Ok(out)
    }

    fn title(&self, plan: &SentencePlan) -> Result<Vec<Tok>, RealizeError> {
        let entry = self.verb(&plan.process)?;
        let p = plan.id;
        let pk = Some(plan.process.as_str());
        let actee = plan.participants.get(&SemRole::Actee);
        let mut out = Vec::new();
        match self.lang {
            Language::En => {
                out.push(Tok::new(self.verb_form(entry, &[("form", "gerund")])?, pk, "process", p));
                if let Some(pt) = &entry.particle {
                    out.extend(words(pt, pk, "process", p));
                }
                if let Some(re) = actee {
                    out.extend(self.noun_phrase(re, "actee", "acc", p, Governor::None)?);
                }
            }
            Language::De => {
                let nominal = match &entry.nominal {
                    Some(n) => n.clone(),
                    None => {
                        let prefix: String = entry.particle.as_deref().unwrap_or("").split_whitespace().collect();
                        capitalize(&format!("{prefix}{}", entry.lemma))
                    }
                };
                out.push(Tok::new(nominal, pk, "process", p));
                if let Some(re) = actee {
                    if re.form == Form::Bare {
                        out.push(Tok::function("von", p).clitic());
                        out.extend(self.noun_phrase(re, "actee", "dat", p, Governor::Other)?);
                    } else {
                        out.extend(self.noun_phrase(re, "actee", "gen", p, Governor::None)?);
                    }
                }
            }
            Language::Fr => {
                let nominal = entry.nominal.clone().unwrap_or_else(|| entry.lemma.clone());
                out.extend(words(&nominal, pk, "process", p));
                if let Some(re) = actee {
                    out.push(Tok::function("de", p).clitic());
                    out.extend(self.noun_phrase(re, "actee", "obl", p, Governor::De)?);
                }
            }
        }
        Ok(out)
    }

    fn sentence(&self, plan: &SentencePlan) -> Result<Vec<Tok>, RealizeError> {
        if plan.mood == Mood::Title {
            return self.title(plan);
        }
        let mut out = Vec::new();
        if let Some(c) = &plan.condition {
            out.extend(self.conditions(c, true)?);
            out.push(Tok::new(",", None, "punct", plan.id).glued(""));
        }
        let inverted = plan.condition.is_some();
        match plan.mood {
            Mood::Imperative => out.extend(self.imperative(plan)?),
            _ if plan.action.is_none() && (plan.value.is_some() || self.is_concept_test(plan)) => {
                out.extend(self.conditions(plan, false)?)
            }
            _ => out.extend(self.declarative(plan, inverted)?),
        }
        out.push(Tok::new(".", None, "punct", plan.id).glued(""));
        Ok(out)
    }

    /// A standalone type condition names a concept lexicalized as a noun.
    fn is_concept_test(&self, plan: &SentencePlan) -> bool {
        self.lex.concept(&plan.process, self.lang).is_ok_and(|e| e.pos == Pos::Noun)
    }
}

fn assemble(lang: Language, plan: usize, mut toks: Vec<Tok>) -> AnnotatedSentence {
    postlex::apply(lang, &mut toks);
    if let Some(first) = toks.first_mut() {
        first.sep = String::new();
        first.surface = capitalize(&first.surface);
    }
    let mut text = String::new();
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(toks.len());
    for t in toks {
        text.push_str(&t.sep);
        pos += t.sep.chars().count();
        let len = t.surface.chars().count();
        text.push_str(&t.surface);
        tokens.push(Token {
            surface: t.surface,
            start: pos,
            end: pos + len,
            kb: t.kb,
            plan: t.plan,
            role: t.role,
            pronoun: t.pronoun,
            antecedent: t.antecedent,
        });
        pos += len;
    }
    AnnotatedSentence { language: lang, plan, text, tokens }
}

/// Realizes one sentence plan (with any embedded conditions) in `language`.
pub fn realize(
    plan: &SentencePlan,
    language: Language,
    kb: &Kb,
    resources: &Resources,
) -> Result<AnnotatedSentence, RealizeError> {
    let r = Realizer { kb, lex: &resources.lexicon, morph: resources.morphology(language), lang: language };
    let toks = r.sentence(plan)?;
    Ok(assemble(language, plan.id, toks))
}

#[cfg(test)]
mod tests;

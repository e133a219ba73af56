//! Plan → section schema → sentence plans → documents, in one call.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{build_document, build_for_plan, build_from_trace, DocError, SectionSchema};
use crate::emit::{align, annotate, emit, AlignmentMap, AnnotatedDocument, Document, EmitError, Format};
use crate::kb::Kb;
use crate::plan::PlanError;
use crate::realize::{Language, RealizeError, Resources};
use crate::sentence::{plan_sentences, Item};
use crate::simulate::{filter_relevant_steps, simulate, Trace};

/// Which steps a document covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every step and branch of the plan.
    #[default]
    Static,
    /// The steps a simulation on a copy of the knowledge base walked.
    Simulate,
    /// Every step except branches the current state rules out.
    StateFiltered,
}

impl FromStr for Mode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Mode::Static),
            "simulate" => Ok(Mode::Simulate),
            "state-filtered" => Ok(Mode::StateFiltered),
            _ => Err(PipelineError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),
    #[error("unknown mode `{0}` (expected static, simulate or state-filtered)")]
    UnknownMode(String),
    #[error("no languages requested")]
    NoLanguages,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Document(#[from] DocError),
    #[error(transparent)]
    Realize(#[from] RealizeError),
    #[error(transparent)]
    Emit(#[from] EmitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationRequest<'a> {
    pub plan: &'a str,
    pub languages: &'a [Language],
    pub mode: Mode,
}

/// Everything generated for one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub plan: String,
    pub mode: Mode,
    pub schema: SectionSchema,
    pub digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
    pub items: Vec<Item>,
    pub documents: BTreeMap<Language, AnnotatedDocument>,
}

impl Generation {
    pub fn emit(&self, language: Language, format: Format) -> Option<Document> {
        self.documents.get(&language).map(|d| emit(d, format))
    }

    pub fn alignment(&self) -> AlignmentMap {
        let docs: Vec<&AnnotatedDocument> = self.documents.values().collect();
        align(&docs).expect("documents of one generation share a digest")
    }
}

/// The section schema for a plan in the given mode, plus the trace when simulating.
pub fn schema_for(kb: &Kb, plan: &str, mode: Mode) -> Result<(SectionSchema, Option<Trace>), PipelineError> {
    if kb.plan(plan).is_err() {
        return Err(PipelineError::UnknownPlan(plan.to_string()));
    }
    Ok(match mode {
        Mode::Static => (build_for_plan(plan, kb)?, None),
        Mode::Simulate => {
            let trace = simulate(plan, kb)?;
            (build_from_trace(&trace, kb)?, Some(trace))
        }
        Mode::StateFiltered => (build_document(&filter_relevant_steps(plan, kb)?, kb)?, None),
    })
}

pub fn generate(kb: &Kb, request: GenerationRequest, resources: &Resources) -> Result<Generation, PipelineError> {
    if request.languages.is_empty() {
        return Err(PipelineError::NoLanguages);
    }
    let (schema, trace) = schema_for(kb, request.plan, request.mode)?;
    let digest = schema.digest();
    let items = plan_sentences(&schema, kb);
    let mut documents = BTreeMap::new();
    for &lang in request.languages {
        documents.insert(lang, annotate(request.plan, &digest, &items, lang, kb, resources)?);
    }
    Ok(Generation { plan: request.plan.to_string(), mode: request.mode, schema, digest, trace, items, documents })
}

/// Parses a comma-separated language list such as `en,de,fr`.
pub fn parse_languages(s: &str) -> Result<Vec<Language>, RealizeError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let l: Language = part.parse()?;
        if !out.contains(&l) {
            out.push(l);
        }
    }
    Ok(out)
}

//! Table-driven inflection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Language, RealizeError};

pub type Features = BTreeMap<String, String>;

/// Builds a feature bundle from pairs.
pub fn features(pairs: &[(&str, &str)]) -> Features {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// One row of an inflection table. The first row whose `when` is contained in
/// the requested features (and whose `ending` matches the lemma) applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphRule {
    #[serde(default)]
    pub when: Features,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ending: Option<String>,
    /// Replaces the whole word.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub strip: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub suffix: String,
}

impl MorphRule {
    fn matches(&self, lemma: &str, feats: &Features) -> bool {
        self.when.iter().all(|(k, v)| feats.get(k) == Some(v))
            && self.ending.as_deref().is_none_or(|e| lemma.ends_with(e))
    }

    fn apply(&self, lemma: &str) -> String {
        if let Some(f) = &self.form {
            return f.clone();
        }
        let stem = lemma.strip_suffix(self.strip.as_str()).unwrap_or(lemma);
        format!("{stem}{}", self.suffix)
    }

    pub fn is_catch_all(&self) -> bool {
        self.when.is_empty() && self.ending.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Morphology {
    pub language: Option<Language>,
    /// Inflection class → ordered rules.
    pub classes: BTreeMap<String, Vec<MorphRule>>,
    /// Per-lemma rules tried before the class table.
    #[serde(default)]
    pub lemmas: BTreeMap<String, Vec<MorphRule>>,
}

impl Morphology {
    pub fn parse(text: &str) -> Result<Self, RealizeError> {
        serde_json::from_str(text).map_err(|e| RealizeError::Data(format!("morphology: {e}")))
    }

    pub fn inflect(&self, lemma: &str, class: &str, feats: &Features) -> Result<String, RealizeError> {
        if let Some(rule) = self.lemmas.get(lemma).and_then(|rs| rs.iter().find(|r| r.matches(lemma, feats))) {
            return Ok(rule.apply(lemma));
        }
        let rules = self.classes.get(class).ok_or_else(|| RealizeError::UnknownClass {
            language: self.language,
            class: class.to_string(),
        })?;
        rules
            .iter()
            .find(|r| r.matches(lemma, feats))
            .map(|r| r.apply(lemma))
            .ok_or_else(|| RealizeError::NoInflection {
                lemma: lemma.to_string(),
                class: class.to_string(),
                features: feats.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(","),
            })
    }

    /// Classes lacking a final catch-all row (tables must be total).
    pub fn partial_classes(&self) -> Vec<&str> {
        self.classes
            .iter()
            .filter(|(_, rules)| !rules.last().is_some_and(MorphRule::is_catch_all))
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

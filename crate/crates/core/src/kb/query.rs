//! Conjunctive queries over the assertional state.
//!
//! JSON form: a query is an array of atoms, each a single-key object:
//! `{"type": ["?x", "tank"]}`, `{"filler": ["?x", "level-state", "low"]}`,
//! `{"compare": ["?x", "quantity", ">=", 2]}`. Strings starting with `?` are
//! variables; strings starting with `$` are plan placeholders.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::model::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.trim_start_matches('?').to_string())
    }

    pub fn inst(id: &str) -> Self {
        Term::Const(Value::Ref(id.to_string()))
    }

    pub fn text(s: &str) -> Self {
        Term::Const(Value::Text(s.to_string()))
    }

    pub fn as_const_str(&self) -> Option<&str> {
        match self {
            Term::Const(v) => v.as_str(),
            Term::Var(_) => None,
        }
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        match s.strip_prefix('?') {
            Some(v) => Term::Var(v.to_string()),
            None => Term::Const(Value::Text(s.to_string())),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Term::Var(v) => s.serialize_str(&format!("?{v}")),
            Term::Const(c) => c.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Value::deserialize(d)? {
            Value::Text(t) if t.starts_with('?') => Term::Var(t[1..].to_string()),
            other => Term::Const(other),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CmpOp {
    pub fn eval(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Atom {
    Type(Term, String),
    Filler(Term, String, Term),
    Compare(Term, String, CmpOp, f64),
}

impl Atom {
    pub fn subject(&self) -> &Term {
        match self {
            Atom::Type(x, _) | Atom::Filler(x, _, _) | Atom::Compare(x, _, _, _) => x,
        }
    }

    pub fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Type(x, _) | Atom::Compare(x, _, _, _) => vec![x],
            Atom::Filler(x, _, y) => vec![x, y],
        }
    }
}

/// A non-empty conjunction of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Query(pub Vec<Atom>);

impl Query {
    pub fn single(atom: Atom) -> Self {
        Query(vec![atom])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for atom in &self.0 {
            for t in atom.terms() {
                if let Term::Var(v) = t {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.variables().is_empty()
    }

    /// Replaces `$name` placeholders in constant positions.
    pub fn substitute(&self, bindings: &BTreeMap<String, String>) -> Query {
        let sub = |t: &Term| match t {
            Term::Const(Value::Text(s)) | Term::Const(Value::Ref(s)) if s.starts_with('$') => {
                match bindings.get(&s[1..]) {
                    Some(b) => Term::Const(Value::Text(b.clone())),
                    None => t.clone(),
                }
            }
            other => other.clone(),
        };
        Query(
            self.0
                .iter()
                .map(|a| match a {
                    Atom::Type(x, c) => Atom::Type(sub(x), c.clone()),
                    Atom::Filler(x, r, y) => Atom::Filler(sub(x), r.clone(), sub(y)),
                    Atom::Compare(x, r, op, v) => Atom::Compare(sub(x), r.clone(), *op, *v),
                })
                .collect(),
        )
    }

    /// Placeholders (`$name`) still present.
    pub fn placeholders(&self) -> Vec<String> {
        self.0
            .iter()
            .flat_map(|a| a.terms())
            .filter_map(|t| t.as_const_str())
            .filter(|s| s.starts_with('$'))
            .map(|s| s[1..].to_string())
            .collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            match atom {
                Atom::Type(x, c) => write!(f, "{c}({x})")?,
                Atom::Filler(x, r, y) => write!(f, "{r}({x}, {y})")?,
                Atom::Compare(x, r, op, v) => {
                    let op = serde_json::to_value(op).unwrap_or_default();
                    write!(f, "{r}({x}) {} {v}", op.as_str().unwrap_or("?"))?
                }
            }
        }
        Ok(())
    }
}

/// A variable assignment produced by an open query.
pub type Binding = BTreeMap<String, Value>;

/// Answer to an ASK: a truth value for ground queries, bindings otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Answer {
    Truth(bool),
    Bindings(Vec<Binding>),
}

impl Answer {
    pub fn is_true(&self) -> bool {
        match self {
            Answer::Truth(b) => *b,
            Answer::Bindings(b) => !b.is_empty(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_atoms_and_variables() {
        let q: Query = serde_json::from_str(
            r#"[{"type": ["?x", "tank"]}, {"filler": ["?x", "has-level", "?l"]},
                {"compare": ["?l", "quantity", ">=", 2]}]"#,
        )
        .unwrap();
        assert_eq!(q.variables(), vec!["x".to_string(), "l".to_string()]);
        assert!(matches!(&q.0[2], Atom::Compare(_, _, CmpOp::Ge, v) if *v == 2.0));
        let back = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<Query>(&back).unwrap(), q);
    }

    #[test]
    fn substitutes_placeholders() {
        let q: Query = serde_json::from_str(r#"[{"filler": ["$patient", "connection-state", "tight"]}]"#).unwrap();
        assert_eq!(q.placeholders(), vec!["patient".to_string()]);
        let mut b = BTreeMap::new();
        b.insert("patient".to_string(), "bolt-1".to_string());
        let s = q.substitute(&b);
        assert!(s.placeholders().is_empty());
        assert_eq!(s.0[0].subject().as_const_str(), Some("bolt-1"));
    }
}

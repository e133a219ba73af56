//! Closed-world evaluation of conjunctive queries.

use super::model::{Range, Value};
use super::query::{Answer, Atom, Binding, Query, Term};
use super::{Kb, KbError};

impl Kb {
    pub fn validate_query(&self, q: &Query) -> Result<(), KbError> {
        if q.0.is_empty() {
            return Err(KbError::MalformedQuery("empty conjunction".into()));
        }
        for atom in &q.0 {
            match atom {
                Atom::Type(_, c) => {
                    self.concept(c)?;
                }
                Atom::Filler(_, r, _) => {
                    self.role(r)?;
                }
                Atom::Compare(_, r, _, _) => {
                    if !self.role(r)?.range.is_numeric() {
                        return Err(KbError::MalformedQuery(format!(
                            "comparison on non-numeric role `{r}`"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// ASK: a truth value for ground queries, sorted bindings for open ones.
    pub fn ask(&self, q: &Query) -> Result<Answer, KbError> {
        let bindings = self.solve(q)?;
        if q.is_ground() {
            Ok(Answer::Truth(!bindings.is_empty()))
        } else {
            Ok(Answer::Bindings(bindings))
        }
    }

    pub fn holds(&self, q: &Query) -> Result<bool, KbError> {
        Ok(!self.solve(q)?.is_empty())
    }

    /// All satisfying assignments, sorted and deduplicated.
    pub fn solve(&self, q: &Query) -> Result<Vec<Binding>, KbError> {
        self.validate_query(q)?;
        let mut out = Vec::new();
        let mut binding = Binding::new();
        self.search(&q.0, &mut binding, &mut out);
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn subject_of(&self, t: &Term, b: &Binding) -> Option<Option<String>> {
        match t {
            Term::Var(v) => match b.get(v) {
                Some(Value::Ref(id)) => Some(Some(id.clone())),
                Some(_) => None,
                None => Some(None),
            },
            Term::Const(Value::Ref(id) | Value::Text(id)) => Some(Some(id.clone())),
            Term::Const(_) => None,
        }
    }

    fn search(&self, atoms: &[Atom], b: &mut Binding, out: &mut Vec<Binding>) {
        let Some((atom, rest)) = atoms.split_first() else {
            out.push(b.clone());
            return;
        };
        let Some(subject) = self.subject_of(atom.subject(), b) else { return };
        let candidates: Vec<&str> = match &subject {
            Some(id) => self.instances.get(id).map(|i| i.id.as_str()).into_iter().collect(),
            None => self.instances.keys().map(String::as_str).collect(),
        };
        let bind_subject = match atom.subject() {
            Term::Var(v) if subject.is_none() => Some(v.clone()),
            _ => None,
        };
        for id in candidates {
            let inst = &self.instances[id];
            if let Some(v) = &bind_subject {
                b.insert(v.clone(), Value::Ref(id.to_string()));
            }
            match atom {
                Atom::Type(_, c) => {
                    if inst.derived.contains(c) {
                        self.search(rest, b, out);
                    }
                }
                Atom::Compare(_, r, op, n) => {
                    if inst.fillers_of(r).filter_map(Value::as_number).any(|x| op.eval(x, *n)) {
                        self.search(rest, b, out);
                    }
                }
                Atom::Filler(_, r, y) => {
                    let role = &self.roles[r];
                    for v in inst.fillers_of(r) {
                        match y {
                            Term::Var(name) => match b.get(name) {
                                Some(bound) => {
                                    if bound == v {
                                        self.search(rest, b, out);
                                    }
                                }
                                None => {
                                    b.insert(name.clone(), v.clone());
                                    self.search(rest, b, out);
                                    b.remove(name);
                                }
                            },
                            Term::Const(c) => {
                                if self.coerce(role, c).is_ok_and(|c| c == *v) {
                                    self.search(rest, b, out);
                                }
                            }
                        }
                    }
                }
            }
            if let Some(v) = &bind_subject {
                b.remove(v);
            }
        }
    }

    /// Concept a role's fillers must belong to, if it is instance-valued.
    pub fn range_concept(&self, role: &str) -> Option<&str> {
        match &self.roles.get(role)?.range {
            Range::Concept(c) => Some(c),
            _ => None,
        }
    }
}

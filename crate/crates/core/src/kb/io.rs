//! JSON documents: loading and canonical snapshots.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::model::{Concept, Instance, Role, Rule, THING};
use super::{Kb, KbError};
use crate::plan::Plan;

/// The on-disk form of a knowledge base. A canonical snapshot sorts every array by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KbDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub roles: Vec<Role>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub concepts: Vec<Concept>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<Instance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<Rule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plans: Vec<Plan>,
}

impl KbDocument {
    pub fn parse(text: &str) -> Result<Self, KbError> {
        serde_json::from_str(text).map_err(|e| KbError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize") + "\n"
    }

    /// Sorts every array by id (rules keep their firing order).
    pub fn canonicalize(&mut self) {
        self.roles.sort_by(|a, b| a.id.cmp(&b.id));
        self.concepts.sort_by(|a, b| a.id.cmp(&b.id));
        self.instances.sort_by(|a, b| a.id.cmp(&b.id));
        self.plans.sort_by(|a, b| a.id.cmp(&b.id));
    }
}

/// Orders concepts so parents come first; reports dangling parents and cycles.
fn topo_order(kb: &Kb, concepts: &[Concept]) -> Result<Vec<usize>, KbError> {
    let index: BTreeMap<&str, usize> =
        concepts.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    for c in concepts {
        for p in &c.parents {
            if !index.contains_key(p.as_str()) && !kb.has_concept(p) {
                return Err(KbError::UnknownParent { concept: c.id.clone(), parent: p.clone() });
            }
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        i: usize,
        concepts: &[Concept],
        index: &BTreeMap<&str, usize>,
        marks: &mut [Mark],
        stack: &mut Vec<String>,
        out: &mut Vec<usize>,
    ) -> Result<(), KbError> {
        match marks[i] {
            Mark::Done => return Ok(()),
            Mark::Active => {
                let start = stack.iter().position(|s| *s == concepts[i].id).unwrap_or(0);
                let mut cycle = stack[start..].to_vec();
                cycle.push(concepts[i].id.clone());
                return Err(KbError::Cycle(cycle));
            }
            Mark::New => {}
        }
        marks[i] = Mark::Active;
        stack.push(concepts[i].id.clone());
        for p in &concepts[i].parents {
            if let Some(&j) = index.get(p.as_str()) {
                visit(j, concepts, index, marks, stack, out)?;
            }
        }
        stack.pop();
        marks[i] = Mark::Done;
        out.push(i);
        Ok(())
    }
    let mut marks = vec![Mark::New; concepts.len()];
    let mut out = Vec::with_capacity(concepts.len());
    let mut stack = Vec::new();
    for i in 0..concepts.len() {
        visit(i, concepts, &index, &mut marks, &mut stack, &mut out)?;
    }
    Ok(out)
}

impl Kb {
    pub fn from_document(doc: &KbDocument) -> Result<Kb, KbError> {
        let mut kb = Kb::new();
        kb.extend(doc)?;
        Ok(kb)
    }

    pub fn load_str(text: &str) -> Result<Kb, KbError> {
        Kb::from_document(&KbDocument::parse(text)?)
    }

    /// Layers a document on top of the current contents (e.g. a domain over a shared middle model).
    pub fn extend(&mut self, doc: &KbDocument) -> Result<(), KbError> {
        // Roles may refer to concepts defined in the same document, so concepts
        // are inserted first without restriction checks, then roles, then restrictions.
        let order = topo_order(self, &doc.concepts)?;
        let mut deferred = Vec::new();
        for i in order {
            let mut c = doc.concepts[i].clone();
            if c.id == THING {
                continue;
            }
            let restrictions = std::mem::take(&mut c.restrictions);
            let id = self.define_concept(c)?;
            deferred.push((id, restrictions));
        }
        for role in &doc.roles {
            self.define_role(role.clone())?;
        }
        for (id, mut restrictions) in deferred {
            for r in &mut restrictions {
                self.check_restriction(&id, r)?;
            }
            self.concepts.get_mut(&id).expect("just defined").restrictions = restrictions;
        }
        self.taxonomy = Default::default();

        let mut pending = Vec::new();
        for inst in &doc.instances {
            if self.instances.contains_key(&inst.id) || pending.contains(&inst.id) {
                return Err(KbError::Duplicate { kind: "instance", id: inst.id.clone() });
            }
            for t in &inst.asserted {
                self.concept(t)?;
            }
            let mut fillers = BTreeMap::new();
            for (role_id, values) in &inst.fillers {
                let role = self.role(role_id)?.clone();
                let mut set = BTreeSet::new();
                for v in values {
                    set.insert(self.coerce(&role, v).map_err(|e| match e {
                        KbError::RangeViolation { role, value, reason, .. } => {
                            KbError::RangeViolation { instance: inst.id.clone(), role, value, reason }
                        }
                        e => e,
                    })?);
                }
                fillers.insert(role_id.clone(), set);
            }
            let mut stored = inst.clone();
            stored.fillers = fillers;
            pending.push(inst.id.clone());
            self.instances.insert(inst.id.clone(), stored);
        }
        for id in &pending {
            let inst = &self.instances[id];
            for v in inst.fillers.values().flatten() {
                if let Some(target) = v.as_ref_id() {
                    if !self.instances.contains_key(target) {
                        return Err(KbError::UnknownInstance(target.to_string()));
                    }
                }
            }
        }
        self.reclassify_all();
        for id in &pending {
            let inst = self.instances[id].clone();
            for (role_id, values) in &inst.fillers {
                let role = self.role(role_id)?.clone();
                for v in values {
                    self.check_filler(id, &role, v)?;
                }
            }
        }
        for rule in &doc.rules {
            self.add_rule(rule.clone())?;
        }
        for plan in &doc.plans {
            self.add_plan(plan.clone())?;
        }
        Ok(())
    }

    /// Canonical document for the current state.
    pub fn snapshot(&self) -> KbDocument {
        let mut doc = KbDocument {
            roles: self.roles.values().cloned().collect(),
            concepts: self.concepts.values().filter(|c| c.id != THING).cloned().collect(),
            instances: self
                .instances
                .values()
                .map(|i| Instance { derived: BTreeSet::new(), ..i.clone() })
                .collect(),
            rules: self.rules.clone(),
            plans: self.plans.values().cloned().collect(),
        };
        for c in &mut doc.concepts {
            if c.parents.len() == 1 && c.parents.contains(THING) {
                c.parents.clear();
            }
        }
        doc.canonicalize();
        doc
    }
}

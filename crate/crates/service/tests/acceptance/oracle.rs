//! Brute-force instance classification, written against the document form
//! only: no taxonomy, no caching, no structural subsumption.
//!
//! An instance belongs to THING, to every told ancestor of its asserted
//! types, and to every defined concept whose parents it belongs to and whose
//! restrictions its fillers satisfy. Memberships are grown from that start
//! until nothing changes.

use std::collections::{BTreeMap, BTreeSet};

use techdoc_core::kb::{KbDocument, Restriction, Value, THING};

pub type Memberships = BTreeMap<String, BTreeSet<String>>;

fn told_ancestors(doc: &KbDocument, concept: &str, out: &mut BTreeSet<String>) {
    if !out.insert(concept.to_string()) {
        return;
    }
    if let Some(c) = doc.concepts.iter().find(|c| c.id == concept) {
        for p in &c.parents {
            told_ancestors(doc, p, out);
        }
    }
}

fn satisfied(fillers: Option<&BTreeSet<Value>>, r: &Restriction, m: &Memberships) -> bool {
    let empty = BTreeSet::new();
    let fillers = fillers.unwrap_or(&empty);
    match r {
        Restriction::All { concept, .. } => fillers.iter().all(|v| match v {
            Value::Ref(id) => m.get(id).is_some_and(|s| s.contains(concept)),
            _ => false,
        }),
        Restriction::Filler { value, .. } => fillers.contains(value),
        Restriction::Card { min, max, .. } => {
            let n = fillers.len() as u32;
            n >= *min && max.is_none_or(|x| n <= x)
        }
    }
}

pub fn classify(doc: &KbDocument) -> Memberships {
    let mut m: Memberships = BTreeMap::new();
    for inst in &doc.instances {
        let mut set = BTreeSet::from([THING.to_string()]);
        for a in &inst.asserted {
            told_ancestors(doc, a, &mut set);
        }
        m.insert(inst.id.clone(), set);
    }
    loop {
        let mut changed = false;
        for inst in &doc.instances {
            for c in doc.concepts.iter().filter(|c| !c.primitive) {
                if m[&inst.id].contains(&c.id) {
                    continue;
                }
                let parents_ok = c.parents.iter().all(|p| p == THING || m[&inst.id].contains(p));
                let restrictions_ok = c.restrictions.iter().all(|r| satisfied(inst.fillers.get(r.role()), r, &m));
                if parents_ok && restrictions_ok {
                    let mut add = BTreeSet::new();
                    told_ancestors(doc, &c.id, &mut add);
                    m.get_mut(&inst.id).unwrap().extend(add);
                    changed = true;
                }
            }
        }
        if !changed {
            return m;
        }
    }
}

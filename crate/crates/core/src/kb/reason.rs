//! Subsumption and instance classification.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use super::model::{Concept, Instance, Restriction, Value, THING};
use super::Kb;

/// Recursion bound for value-restriction subsumption through role targets.
const MAX_DEPTH: usize = 24;

/// Cached subsumer sets for every concept.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    subsumers: HashMap<String, BTreeSet<String>>,
    /// Defined concepts in definition order.
    defined: Vec<String>,
    /// Concept ids by index, in definition order.
    ids: Vec<String>,
    index: HashMap<String, usize>,
    /// Subsumer sets again, as bitsets over concept indices.
    subsumer_bits: Vec<FixedBitSet>,
    /// Defined concepts with names resolved to indices.
    definitions: Vec<Definition>,
}

#[derive(Debug, Clone)]
struct Definition {
    concept: usize,
    parents: Vec<usize>,
    /// Each restriction with the index of its value-restriction target, if any.
    restrictions: Vec<(Restriction, Option<usize>)>,
}

impl Taxonomy {
    pub(crate) fn build(kb: &Kb) -> Taxonomy {
        let ids: Vec<String> = kb.concept_order.clone();
        let index: HashMap<String, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = ids.len();
        let mut told: Vec<FixedBitSet> = Vec::with_capacity(n);
        for id in &ids {
            let mut set = FixedBitSet::with_capacity(n);
            set.insert(index[id]);
            for p in &kb.concepts[id].parents {
                if let Some(&pi) = index.get(p) {
                    let parent = told[pi].clone();
                    set.union_with(&parent);
                }
            }
            told.push(set);
        }
        let concepts: Vec<&Concept> = ids.iter().map(|id| &kb.concepts[id]).collect();
        let effective: Vec<Vec<&Restriction>> =
            told.iter().map(|t| t.ones().flat_map(|a| concepts[a].restrictions.iter()).collect()).collect();
        let view = TBox { concepts: &concepts, index: &index, told: &told, effective: &effective, memo: RefCell::default() };
        let defined: Vec<usize> = (0..n).filter(|&i| !concepts[i].primitive).collect();

        let mut bits: Vec<FixedBitSet> = told.clone();
        for (s, row) in bits.iter_mut().enumerate() {
            for &g in &defined {
                if !row.contains(g) && view.subsumes(g, s) {
                    row.insert(g);
                }
            }
        }
        loop {
            let mut changed = false;
            for s in 0..n {
                let mut closed = bits[s].clone();
                for g in bits[s].ones() {
                    closed.union_with(&bits[g]);
                }
                if closed != bits[s] {
                    bits[s] = closed;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let subsumers = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), bits[i].ones().map(|g| ids[g].clone()).collect()))
            .collect();
        let definitions = defined
            .iter()
            .map(|&i| Definition {
                concept: i,
                parents: concepts[i].parents.iter().filter_map(|p| index.get(p).copied()).collect(),
                restrictions: concepts[i]
                    .restrictions
                    .iter()
                    .map(|r| {
                        let target = match r {
                            Restriction::All { concept, .. } => index.get(concept).copied(),
                            _ => None,
                        };
                        (r.clone(), target)
                    })
                    .collect(),
            })
            .collect();
        Taxonomy {
            subsumers,
            defined: defined.iter().map(|&i| ids[i].clone()).collect(),
            ids,
            index,
            subsumer_bits: bits,
            definitions,
        }
    }

    /// All concepts subsuming `concept`, itself included.
    pub fn subsumers(&self, concept: &str) -> &BTreeSet<String> {
        static EMPTY: BTreeSet<String> = BTreeSet::new();
        self.subsumers.get(concept).unwrap_or(&EMPTY)
    }

    pub fn defined(&self) -> &[String] {
        &self.defined
    }
}

struct TBox<'a> {
    concepts: &'a [&'a Concept],
    index: &'a HashMap<String, usize>,
    told: &'a [FixedBitSet],
    /// Restrictions each concept inherits through told parents, its own included.
    effective: &'a [Vec<&'a Restriction>],
    /// Settled answers; results cut off by the depth bound are not stored.
    memo: RefCell<HashMap<(usize, usize), bool>>,
}

impl TBox<'_> {
    fn subsumes(&self, general: usize, specific: usize) -> bool {
        self.subsumes_at(general, specific, 0).0
    }

    /// The answer, and whether the depth bound cut the search short.
    fn subsumes_at(&self, general: usize, specific: usize, depth: usize) -> (bool, bool) {
        if general == specific || self.told[specific].contains(general) {
            return (true, false);
        }
        let g = self.concepts[general];
        if g.id == THING {
            return (true, false);
        }
        if g.primitive {
            return (false, false);
        }
        if let Some(&known) = self.memo.borrow().get(&(general, specific)) {
            return (known, false);
        }
        if depth > MAX_DEPTH {
            return (false, true);
        }
        let mut cut = false;
        let mut holds = true;
        for p in &g.parents {
            let Some(&pi) = self.index.get(p) else { continue };
            let (ok, c) = self.subsumes_at(pi, specific, depth + 1);
            cut |= c;
            if !ok {
                holds = false;
                break;
            }
        }
        if holds {
            for r in &g.restrictions {
                let (ok, c) = self.entails(specific, r, depth + 1);
                cut |= c;
                if !ok {
                    holds = false;
                    break;
                }
            }
        }
        if !cut {
            self.memo.borrow_mut().insert((general, specific), holds);
        }
        (holds, cut)
    }

    /// Does every instance of `concept` satisfy `r` by virtue of its definition?
    fn entails(&self, concept: usize, r: &Restriction, depth: usize) -> (bool, bool) {
        let eff = &self.effective[concept];
        match r {
            Restriction::All { role, concept: target } => {
                let Some(&ti) = self.index.get(target) else { return (false, false) };
                let mut cut = false;
                for e in eff {
                    match e {
                        Restriction::All { role: er, concept: d } if er == role => {
                            let Some(&di) = self.index.get(d) else { continue };
                            let (ok, c) = self.subsumes_at(ti, di, depth + 1);
                            cut |= c;
                            if ok {
                                return (true, false);
                            }
                        }
                        Restriction::Card { role: er, max: Some(0), .. } if er == role => return (true, false),
                        _ => {}
                    }
                }
                (false, cut)
            }
            Restriction::Filler { role, value } => (
                eff.iter().any(|e| matches!(e, Restriction::Filler { role: er, value: ev } if er == role && ev == value)),
                false,
            ),
            Restriction::Card { role, min, max } => {
                let (lo, hi) = interval(eff, role);
                (lo >= *min && max.is_none_or(|m| hi.is_some_and(|h| h <= m)), false)
            }
        }
    }
}

/// Cardinality interval for `role` implied by a set of restrictions.
fn interval(restrictions: &[&Restriction], role: &str) -> (u32, Option<u32>) {
    let mut lo = 0;
    let mut hi: Option<u32> = None;
    let mut fillers = BTreeSet::new();
    for r in restrictions {
        match r {
            Restriction::Card { role: rr, min, max } if rr == role => {
                lo = lo.max(*min);
                if let Some(m) = max {
                    hi = Some(hi.map_or(*m, |h| h.min(*m)));
                }
            }
            Restriction::Filler { role: rr, value } if rr == role => {
                fillers.insert(value);
            }
            _ => {}
        }
    }
    (lo.max(fillers.len() as u32), hi)
}

/// Instances and concepts by index, for one classification run.
struct Abox<'a> {
    tax: &'a Taxonomy,
    instances: Vec<&'a Instance>,
    index: HashMap<&'a str, usize>,
}

impl Abox<'_> {
    /// Does the instance satisfy `r`, given the current memberships of all instances?
    fn satisfies(
        &self,
        inst: &Instance,
        (r, target): &(Restriction, Option<usize>),
        own: &FixedBitSet,
        memberships: &[FixedBitSet],
    ) -> bool {
        match r {
            Restriction::All { role, .. } => {
                let Some(ci) = *target else { return false };
                inst.fillers_of(role).all(|v| match v {
                    Value::Ref(id) if *id == inst.id => own.contains(ci),
                    Value::Ref(id) => self.index.get(id.as_str()).is_some_and(|&j| memberships[j].contains(ci)),
                    _ => false,
                })
            }
            Restriction::Filler { role, value } => inst.fillers_of(role).any(|v| v == value),
            Restriction::Card { role, min, max } => {
                let n = inst.fillers_of(role).count() as u32;
                n >= *min && max.is_none_or(|m| n <= m)
            }
        }
    }

    fn base(&self, inst: &Instance) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.tax.ids.len());
        for a in std::iter::once(THING).chain(inst.asserted.iter().map(String::as_str)) {
            if let Some(&ai) = self.tax.index.get(a) {
                set.union_with(&self.tax.subsumer_bits[ai]);
            }
        }
        set
    }

    fn classify_one(&self, i: usize, memberships: &[FixedBitSet]) -> FixedBitSet {
        let inst = self.instances[i];
        let mut set = self.base(inst);
        loop {
            let mut grew = false;
            for d in &self.tax.definitions {
                if set.contains(d.concept) {
                    continue;
                }
                if d.parents.iter().all(|&p| set.contains(p))
                    && d.restrictions.iter().all(|r| self.satisfies(inst, r, &set, memberships))
                {
                    set.union_with(&self.tax.subsumer_bits[d.concept]);
                    grew = true;
                }
            }
            if !grew {
                return set;
            }
        }
    }
}

/// Least fixpoint of instance memberships.
///
/// Memberships only grow, so after the first sweep an instance needs another
/// look only when something it points to has changed.
pub(crate) fn classify_all(kb: &Kb, tax: &Taxonomy) -> BTreeMap<String, BTreeSet<String>> {
    let instances: Vec<&Instance> = kb.instances.values().collect();
    let index: HashMap<&str, usize> = instances.iter().enumerate().map(|(i, inst)| (inst.id.as_str(), i)).collect();
    let abox = Abox { tax, instances, index };
    let mut memberships: Vec<FixedBitSet> = abox.instances.iter().map(|i| abox.base(i)).collect();

    let mut referrers: Vec<Vec<usize>> = vec![Vec::new(); abox.instances.len()];
    for (i, inst) in abox.instances.iter().enumerate() {
        for v in inst.fillers.values().flatten() {
            if let Some(&j) = v.as_ref_id().and_then(|id| abox.index.get(id)) {
                if j != i && !referrers[j].contains(&i) {
                    referrers[j].push(i);
                }
            }
        }
    }

    let mut queued = vec![true; abox.instances.len()];
    let mut queue: std::collections::VecDeque<usize> = (0..abox.instances.len()).collect();
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        let next = abox.classify_one(i, &memberships);
        if next != memberships[i] {
            memberships[i] = next;
            for &r in &referrers[i] {
                if !queued[r] {
                    queued[r] = true;
                    queue.push_back(r);
                }
            }
        }
    }
    abox.instances
        .iter()
        .zip(memberships)
        .map(|(inst, bits)| (inst.id.clone(), bits.ones().map(|c| tax.ids[c].clone()).collect()))
        .collect()
}

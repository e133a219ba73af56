//! Randomly generated knowledge bases for oracle and scale tests.
//!
//! Primitive concepts carry no restrictions and sit only under other
//! primitives, so an instance's memberships are fully determined by its
//! asserted types and fillers. Defined concepts may sit anywhere.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::kb::{Assertion, Concept, Instance, KbDocument, Range, Restriction, Role, Value, THING};

pub const LINK_ROLES: [&str; 3] = ["syn-link-0", "syn-link-1", "syn-link-2"];
pub const ATTRIBUTE_ROLES: [&str; 2] = ["syn-attr-0", "syn-attr-1"];
pub const SYMBOLS: [&str; 3] = ["v0", "v1", "v2"];

fn roles() -> Vec<Role> {
    let mut out: Vec<Role> = LINK_ROLES
        .iter()
        .map(|id| Role { id: id.to_string(), domain: THING.into(), range: Range::Concept(THING.into()), functional: false })
        .collect();
    out.extend(ATTRIBUTE_ROLES.iter().map(|id| Role {
        id: id.to_string(),
        domain: THING.into(),
        range: Range::Enum { values: SYMBOLS.iter().map(|s| s.to_string()).collect() },
        functional: false,
    }));
    out
}

fn restriction(rng: &mut StdRng, earlier: &[String]) -> Restriction {
    match rng.gen_range(0..3) {
        0 if !earlier.is_empty() => Restriction::All {
            role: LINK_ROLES.choose(rng).unwrap().to_string(),
            concept: earlier.choose(rng).unwrap().clone(),
        },
        1 => Restriction::Filler {
            role: ATTRIBUTE_ROLES.choose(rng).unwrap().to_string(),
            value: Value::Text(SYMBOLS.choose(rng).unwrap().to_string()),
        },
        _ => {
            let role = if rng.gen_bool(0.5) { LINK_ROLES.choose(rng) } else { ATTRIBUTE_ROLES.choose(rng) };
            let min = rng.gen_range(0..=2);
            let max = rng.gen_bool(0.5).then(|| rng.gen_range(min..=2));
            Restriction::Card { role: role.unwrap().to_string(), min, max }
        }
    }
}

/// A random document with `concepts` concepts and `instances` instances whose
/// ids all start with `syn-`. Identical seeds give identical documents.
pub fn random_kb(seed: u64, concepts: usize, instances: usize) -> KbDocument {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut all: Vec<String> = Vec::new();
    let mut primitives: Vec<String> = Vec::new();
    let mut defs = Vec::new();
    for n in 0..concepts {
        let id = format!("syn-c{n}");
        let defined = n > 0 && rng.gen_bool(0.5);
        let concept = if defined {
            let mut parents = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=2) {
                parents.insert(if rng.gen_bool(0.3) { THING.to_string() } else { all.choose(&mut rng).unwrap().clone() });
            }
            let restrictions = (0..rng.gen_range(1..=2)).map(|_| restriction(&mut rng, &all)).collect();
            Concept { id: id.clone(), parents, restrictions, primitive: false }
        } else {
            let parent = if primitives.is_empty() || rng.gen_bool(0.3) {
                THING.to_string()
            } else {
                primitives.choose(&mut rng).unwrap().clone()
            };
            primitives.push(id.clone());
            Concept { id: id.clone(), parents: BTreeSet::from([parent]), restrictions: Vec::new(), primitive: true }
        };
        all.push(id);
        defs.push(concept);
    }
    let ids: Vec<String> = (0..instances).map(|n| format!("syn-i{n}")).collect();
    let mut insts = Vec::new();
    for id in &ids {
        let mut inst = Instance::new(id.clone(), &[]);
        if !primitives.is_empty() && rng.gen_bool(0.8) {
            inst.asserted.insert(primitives.choose(&mut rng).unwrap().clone());
        }
        for role in ATTRIBUTE_ROLES {
            for _ in 0..rng.gen_range(0..=2) {
                inst = inst.with_filler(role, *SYMBOLS.choose(&mut rng).unwrap());
            }
        }
        for role in LINK_ROLES {
            for _ in 0..rng.gen_range(0..=1) {
                inst = inst.with_filler(role, Value::Ref(ids.choose(&mut rng).unwrap().clone()));
            }
        }
        insts.push(inst);
    }
    KbDocument { roles: roles(), concepts: defs, instances: insts, rules: Vec::new(), plans: Vec::new() }
}

/// Random filler changes against the instances of a [`random_kb`] document.
pub fn random_tells(seed: u64, doc: &KbDocument, count: usize) -> Vec<Assertion> {
    let mut rng = StdRng::seed_from_u64(seed);
    let ids: Vec<&str> = doc.instances.iter().map(|i| i.id.as_str()).collect();
    if ids.is_empty() {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let instance = ids.choose(&mut rng).unwrap().to_string();
            match rng.gen_range(0..4) {
                0 => Assertion::Filler {
                    instance,
                    role: ATTRIBUTE_ROLES.choose(&mut rng).unwrap().to_string(),
                    value: Value::Text(SYMBOLS.choose(&mut rng).unwrap().to_string()),
                },
                1 => Assertion::Filler {
                    instance,
                    role: LINK_ROLES.choose(&mut rng).unwrap().to_string(),
                    value: Value::Ref(ids.choose(&mut rng).unwrap().to_string()),
                },
                2 => Assertion::RetractFiller {
                    instance,
                    role: ATTRIBUTE_ROLES.choose(&mut rng).unwrap().to_string(),
                    value: None,
                },
                _ => Assertion::RetractFiller {
                    instance,
                    role: LINK_ROLES.choose(&mut rng).unwrap().to_string(),
                    value: None,
                },
            }
        })
        .collect()
}

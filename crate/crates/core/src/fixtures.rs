//! Bundled domain models.

use crate::kb::{Kb, KbDocument, KbError};

/// Directory holding the bundled models and their illustration assets.
pub const DATA_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

pub const MIDDLE_MODEL: &str = include_str!("../data/middle-model.json");
pub const CAR: &str = include_str!("../data/car.json");
pub const AIRCRAFT: &str = include_str!("../data/aircraft.json");

/// Loads the shared middle model followed by each domain document in turn.
pub fn layered(domains: &[&str]) -> Result<Kb, KbError> {
    let mut kb = Kb::load_str(MIDDLE_MODEL)?;
    for d in domains {
        kb.extend(&KbDocument::parse(d)?)?;
    }
    Ok(kb)
}

pub fn car() -> Kb {
    layered(&[CAR]).expect("bundled car model is valid")
}

pub fn aircraft() -> Kb {
    layered(&[AIRCRAFT]).expect("bundled aircraft model is valid")
}

pub mod synthetic;

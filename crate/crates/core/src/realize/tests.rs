use super::*;
use crate::document::build_for_plan;
use crate::fixtures;
use crate::sentence::{plan_sentences, plans, ListContext};

fn texts(plan: &str, lang: Language) -> Vec<String> {
    let kb = fixtures::car();
    let items = plan_sentences(&build_for_plan(plan, &kb).unwrap(), &kb);
    plans(&items).map(|p| realize(p, lang, &kb, Resources::bundled()).unwrap().text).collect()
}

#[test]
fn check_oil_level_english() {
    assert_eq!(
        texts("check-oil-level", Language::En),
        [
            "Checking the engine oil level",
            "The dipstick is in the engine compartment.",
            "You need engine oil.",
            "Switch off the engine.",
            "Pull out the dipstick.",
            "Wipe it with a clean cloth.",
            "Reinsert it.",
            "Pull it out.",
            "Read the engine oil level on the dipstick.",
            "If it is low, add engine oil.",
        ]
    );
}

#[test]
fn check_oil_level_german() {
    assert_eq!(
        texts("check-oil-level", Language::De),
        [
            "Prüfen des Motorölstands",
            "Der Ölmessstab befindet sich im Motorraum.",
            "Sie benötigen Motoröl.",
            "Stellen Sie den Motor ab.",
            "Ziehen Sie den Ölmessstab heraus.",
            "Wischen Sie ihn mit einem sauberen Tuch ab.",
            "Führen Sie ihn wieder ein.",
            "Ziehen Sie ihn heraus.",
            "Lesen Sie den Motorölstand am Ölmessstab ab.",
            "Wenn er niedrig ist, füllen Sie Motoröl nach.",
        ]
    );
}

#[test]
fn check_oil_level_french() {
    assert_eq!(
        texts("check-oil-level", Language::Fr),
        [
            "Vérification du niveau d'huile moteur",
            "La jauge se trouve dans le compartiment moteur.",
            "Vous avez besoin d'huile moteur.",
            "Arrêtez le moteur.",
            "Retirez la jauge.",
            "Essuyez-la avec un chiffon propre.",
            "Réinsérez-la.",
            "Retirez-la.",
            "Lisez le niveau d'huile moteur sur la jauge.",
            "S'il est bas, ajoutez de l'huile moteur.",
        ]
    );
}

fn single(process: &str, patient: &str, form: Form) -> SentencePlan {
    SentencePlan {
        id: 1,
        process: process.into(),
        participants: BTreeMap::from([(
            SemRole::Actee,
            ReferringExpression { referent: patient.into(), form, antecedent: None, modifier: None },
        )]),
        mood: Mood::Imperative,
        polarity: Polarity::Positive,
        value: None,
        comparison: None,
        condition: None,
        conjoined: vec![],
        list_context: Some(ListContext { list: 1, position: 1 }),
        action: Some("a".into()),
        node: 1,
    }
}

#[test]
fn simple_imperatives() {
    let kb = fixtures::car();
    let p = single("check", "oil-level-1", Form::Definite);
    let r = Resources::bundled();
    assert_eq!(realize(&p, Language::En, &kb, r).unwrap().text, "Check the engine oil level.");
    assert_eq!(realize(&p, Language::De, &kb, r).unwrap().text, "Prüfen Sie den Motorölstand.");
    assert_eq!(realize(&p, Language::Fr, &kb, r).unwrap().text, "Vérifiez le niveau d'huile moteur.");
}

#[test]
fn negative_imperatives() {
    let kb = fixtures::car();
    let mut p = single("pull-out", "dipstick-1", Form::Pronoun);
    p.polarity = Polarity::Negative;
    let r = Resources::bundled();
    assert_eq!(realize(&p, Language::En, &kb, r).unwrap().text, "Do not pull it out.");
    assert_eq!(realize(&p, Language::De, &kb, r).unwrap().text, "Ziehen Sie ihn nicht heraus.");
    assert_eq!(realize(&p, Language::Fr, &kb, r).unwrap().text, "Ne la retirez pas.");
}

#[test]
fn pronoun_tokens_carry_antecedents() {
    let kb = fixtures::car();
    let items = plan_sentences(&build_for_plan("check-oil-level", &kb).unwrap(), &kb);
    let wipe = plans(&items).find(|p| p.process == "wipe").unwrap();
    for lang in Language::ALL {
        let s = realize(wipe, lang, &kb, Resources::bundled()).unwrap();
        let pron: Vec<&Token> = s.tokens.iter().filter(|t| t.pronoun).collect();
        assert_eq!(pron.len(), 1, "{lang}: {}", s.text);
        assert_eq!(pron[0].kb.as_deref(), Some("dipstick-1"));
        assert!(pron[0].antecedent.is_some());
    }
}

#[test]
fn offsets_index_the_text() {
    let kb = fixtures::car();
    let items = plan_sentences(&build_for_plan("check-oil-level", &kb).unwrap(), &kb);
    for lang in Language::ALL {
        for p in plans(&items) {
            let s = realize(p, lang, &kb, Resources::bundled()).unwrap();
            let chars: Vec<char> = s.text.chars().collect();
            for t in &s.tokens {
                let span: String = chars[t.start..t.end].iter().collect();
                assert_eq!(span, t.surface);
            }
        }
    }
}

#[test]
fn missing_entry_is_an_error() {
    let kb = fixtures::car();
    let mut r = Resources::bundled().clone();
    r.lexicon.concepts.remove("check");
    let p = single("check", "oil-level-1", Form::Definite);
    assert_eq!(
        realize(&p, Language::De, &kb, &r).unwrap_err(),
        RealizeError::Unlexicalized { concept: "check".into(), language: Language::De }
    );
}

#[test]
fn other_fixture_plans_realize() {
    let kb = fixtures::car();
    for plan in ["refill-washer-fluid", "replace-spark-plugs"] {
        for lang in Language::ALL {
            let t = texts(plan, lang);
            assert!(t.len() >= 3, "{plan} {lang}: {t:?}");
        }
    }
    let _ = kb;
}

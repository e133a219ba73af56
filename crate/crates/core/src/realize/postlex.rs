//! Post-lexical rules: elision, contraction and article allomorphy.

use super::{Language, Tok};

fn starts_with_vowel(s: &str) -> bool {
    s.chars()
        .next()
        .map(|c| "aeiouyàâäéèêëîïôöûùühAEIOUYÀÂÉÈÊÎÔÛH".contains(c))
        .unwrap_or(false)
}

/// Keeps the capitalization of `old`'s first letter on `new`.
fn keep_case(old: &str, new: &str) -> String {
    if old.chars().next().is_some_and(char::is_uppercase) {
        let mut c = new.chars();
        match c.next() {
            Some(f) => f.to_uppercase().chain(c).collect(),
            None => String::new(),
        }
    } else {
        new.to_string()
    }
}

fn elide(toks: &mut [Tok]) {
    for i in 0..toks.len().saturating_sub(1) {
        if !toks[i].proclitic || toks[i + 1].sep != " " {
            continue;
        }
        let word = toks[i].surface.to_lowercase();
        let next = toks[i + 1].surface.to_lowercase();
        let elides = match word.as_str() {
            "le" | "la" | "de" | "se" | "ne" | "que" => starts_with_vowel(&next),
            "si" => next == "il" || next == "ils",
            _ => false,
        };
        if elides {
            let mut short: String = word.chars().next().unwrap().to_string();
            short.push('\'');
            toks[i].surface = keep_case(&toks[i].surface, &short);
            toks[i + 1].sep = String::new();
        }
    }
}

/// Merges a preposition with the following article into one token that keeps
/// the article's annotation.
fn contract(toks: &mut Vec<Tok>, table: &[(&str, &str, &str)]) {
    let mut i = 0;
    while i + 1 < toks.len() {
        let (a, b) = (&toks[i], &toks[i + 1]);
        if a.proclitic && b.proclitic && b.sep == " " {
            let la = a.surface.to_lowercase();
            let lb = b.surface.to_lowercase();
            if let Some((_, _, merged)) = table.iter().find(|(x, y, _)| *x == la && *y == lb) {
                let mut m = toks.remove(i + 1);
                m.surface = keep_case(&toks[i].surface, merged);
                m.sep = toks[i].sep.clone();
                toks[i] = m;
            }
        }
        i += 1;
    }
}

const FR_CONTRACTIONS: [(&str, &str, &str); 4] =
    [("de", "le", "du"), ("de", "les", "des"), ("à", "le", "au"), ("à", "les", "aux")];

const DE_CONTRACTIONS: [(&str, &str, &str); 7] = [
    ("an", "dem", "am"),
    ("in", "dem", "im"),
    ("von", "dem", "vom"),
    ("zu", "dem", "zum"),
    ("zu", "der", "zur"),
    ("in", "das", "ins"),
    ("an", "das", "ans"),
];

pub(crate) fn apply(lang: Language, toks: &mut Vec<Tok>) {
    match lang {
        Language::Fr => {
            elide(toks);
            contract(toks, &FR_CONTRACTIONS);
        }
        Language::De => contract(toks, &DE_CONTRACTIONS),
        Language::En => {
            for i in 0..toks.len().saturating_sub(1) {
                if toks[i].proclitic
                    && toks[i].surface.eq_ignore_ascii_case("a")
                    && starts_with_vowel(&toks[i + 1].surface)
                    && !toks[i + 1].surface.to_lowercase().starts_with('h')
                {
                    toks[i].surface = keep_case(&toks[i].surface, "an");
                }
            }
        }
    }
}

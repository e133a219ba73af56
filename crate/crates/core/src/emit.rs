//! Document emission (plain, HTML, LaTeX, annotated JSON) and cross-language alignment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kb::Kb;
use crate::realize::{realize, AnnotatedSentence, Language, RealizeError, Resources, Token};
use crate::sentence::{FormatInstruction, FormatKind, Item};

/// Version of the annotated-json schema written by [`annotated_json`].
pub const FORMAT_VERSION: u32 = 1;

/// Plain text line width.
pub const WIDTH: usize = 72;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Html,
    Latex,
    Plain,
    AnnotatedJson,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Html, Format::Latex, Format::Plain, Format::AnnotatedJson];

    pub fn name(self) -> &'static str {
        match self {
            Format::Html => "html",
            Format::Latex => "latex",
            Format::Plain => "plain",
            Format::AnnotatedJson => "annotated-json",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Html => "html",
            Format::Latex => "tex",
            Format::Plain => "txt",
            Format::AnnotatedJson => "json",
        }
    }
}

impl FromStr for Format {
    type Err = EmitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Format::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| EmitError::UnknownFormat(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmitError {
    #[error("unknown format `{0}` (expected html, latex, plain or annotated-json)")]
    UnknownFormat(String),
    #[error("unsupported annotated-json format_version {0}")]
    Version(u32),
    #[error("malformed annotated-json: {0}")]
    Json(String),
    #[error("documents come from different section schemas ({0} vs {1})")]
    DigestMismatch(String, String),
    #[error(transparent)]
    Realize(#[from] RealizeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "item", rename_all = "lowercase")]
pub enum DocItem {
    Sentence(AnnotatedSentence),
    Format(FormatInstruction),
}

/// The canonical document every format is projected from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub format_version: u32,
    pub plan: String,
    pub language: Language,
    /// Digest of the language-independent section schema.
    pub digest: String,
    pub items: Vec<DocItem>,
}

impl AnnotatedDocument {
    pub fn sentences(&self) -> impl Iterator<Item = &AnnotatedSentence> {
        self.items.iter().filter_map(|i| match i {
            DocItem::Sentence(s) => Some(s),
            DocItem::Format(_) => None,
        })
    }

    pub fn sentence(&self, plan: usize) -> Option<&AnnotatedSentence> {
        self.sentences().find(|s| s.plan == plan)
    }

    /// The sentence containing plan `plan`, which may be a condition embedded in it.
    pub fn sentence_containing(&self, plan: usize) -> Option<&AnnotatedSentence> {
        self.sentences().find(|s| s.tokens.iter().any(|t| t.plan == plan))
    }
}

/// Realizes every sentence plan of a linearized section.
pub fn annotate(
    plan: &str,
    digest: &str,
    items: &[Item],
    language: Language,
    kb: &Kb,
    resources: &Resources,
) -> Result<AnnotatedDocument, RealizeError> {
    let items = items
        .iter()
        .map(|i| match i {
            Item::Plan(p) => realize(p, language, kb, resources).map(DocItem::Sentence),
            Item::Format(f) => Ok(DocItem::Format(f.clone())),
        })
        .collect::<Result<_, _>>()?;
    Ok(AnnotatedDocument {
        format_version: FORMAT_VERSION,
        plan: plan.to_string(),
        language,
        digest: digest.to_string(),
        items,
    })
}

/// Location of a phrase: a sentence (by its top-level plan id) and a character range in its text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// Parses `sentence:start-end`.
    pub fn parse(s: &str) -> Option<Span> {
        let (sentence, range) = s.split_once(':')?;
        let (start, end) = range.split_once('-')?;
        Some(Span { sentence: sentence.parse().ok()?, start: start.parse().ok()?, end: end.parse().ok()? })
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}-{}", self.sentence, self.start, self.end)
    }
}

/// Consecutive content tokens expressing the same thing in the same role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phrase {
    pub span: Span,
    pub text: String,
    pub kb: String,
    /// Plan the phrase belongs to (an embedded condition has its own).
    pub plan: usize,
    pub role: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub pronoun: bool,
}

fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

/// Groups a sentence's content tokens into phrases.
pub fn phrases(s: &AnnotatedSentence) -> Vec<Phrase> {
    let mut out: Vec<Phrase> = Vec::new();
    let mut last: Option<&Token> = None;
    for t in &s.tokens {
        let Some(kb) = &t.kb else {
            last = None;
            continue;
        };
        let extends = last.is_some_and(|l| {
            l.kb.as_ref() == Some(kb) && l.plan == t.plan && l.role == t.role && !l.pronoun && !t.pronoun
        });
        match out.last_mut() {
            Some(p) if extends => {
                p.span.end = t.end;
                p.text = char_slice(&s.text, p.span.start, t.end);
            }
            _ => out.push(Phrase {
                span: Span { sentence: s.plan, start: t.start, end: t.end },
                text: t.surface.clone(),
                kb: kb.clone(),
                plan: t.plan,
                role: t.role.clone(),
                pronoun: t.pronoun,
            }),
        }
        last = Some(t);
    }
    out
}

/// An emitted document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub language: Language,
    pub format: Format,
    pub body: String,
    /// Annotated phrases (html and annotated-json only).
    pub span_index: Vec<SpanEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanEntry {
    pub span: Span,
    pub kb: String,
    pub plan: usize,
}

pub fn emit(doc: &AnnotatedDocument, format: Format) -> Document {
    let body = match format {
        Format::Plain => plain(doc),
        Format::Html => html(doc),
        Format::Latex => latex(doc),
        Format::AnnotatedJson => annotated_json(doc),
    };
    let span_index = match format {
        Format::Html | Format::AnnotatedJson => doc
            .sentences()
            .flat_map(phrases)
            .map(|p| SpanEntry { span: p.span, kb: p.kb, plan: p.plan })
            .collect(),
        _ => Vec::new(),
    };
    Document { language: doc.language, format, body, span_index }
}

// ---- layout shared by the text formats ----

enum Block<'a> {
    Heading(&'a AnnotatedSentence),
    Paragraph(Vec<&'a AnnotatedSentence>),
    List(Vec<Entry<'a>>),
}

struct Entry<'a> {
    number: usize,
    content: Vec<Block<'a>>,
}

fn format_of(i: &DocItem) -> Option<&FormatInstruction> {
    match i {
        DocItem::Format(f) => Some(f),
        DocItem::Sentence(_) => None,
    }
}

fn blocks<'a>(items: &'a [DocItem], i: &mut usize, in_list: bool) -> Vec<Block<'a>> {
    let mut out = Vec::new();
    let mut para: Vec<&AnnotatedSentence> = Vec::new();
    let mut heading = false;
    let flush = |para: &mut Vec<&'a AnnotatedSentence>, out: &mut Vec<Block<'a>>| {
        if !para.is_empty() {
            out.push(Block::Paragraph(std::mem::take(para)));
        }
    };
    while *i < items.len() {
        match &items[*i] {
            DocItem::Sentence(s) => {
                if heading {
                    out.push(Block::Heading(s));
                    heading = false;
                } else {
                    para.push(s);
                }
                *i += 1;
            }
            DocItem::Format(f) => match f.kind {
                FormatKind::Heading => {
                    flush(&mut para, &mut out);
                    heading = true;
                    *i += 1;
                }
                FormatKind::ParagraphBreak => {
                    flush(&mut para, &mut out);
                    *i += 1;
                }
                FormatKind::ListBegin => {
                    flush(&mut para, &mut out);
                    *i += 1;
                    out.push(Block::List(list(items, i)));
                }
                FormatKind::ListItem | FormatKind::ListEnd if in_list => break,
                FormatKind::ListItem | FormatKind::ListEnd | FormatKind::Emphasis => *i += 1,
            },
        }
    }
    flush(&mut para, &mut out);
    out
}

fn list<'a>(items: &'a [DocItem], i: &mut usize) -> Vec<Entry<'a>> {
    let mut entries = Vec::new();
    while *i < items.len() {
        match format_of(&items[*i]).map(|f| (f.kind, f.payload.as_deref())) {
            Some((FormatKind::ListItem, payload)) => {
                *i += 1;
                let number = payload.and_then(|p| p.parse().ok()).unwrap_or(entries.len() + 1);
                let content = blocks(items, i, true);
                entries.push(Entry { number, content });
            }
            Some((FormatKind::ListEnd, _)) => {
                *i += 1;
                break;
            }
            _ => {
                // Content before the first item joins an unnumbered-looking entry.
                let content = blocks(items, i, true);
                entries.push(Entry { number: entries.len() + 1, content });
            }
        }
    }
    entries
}

fn layout(doc: &AnnotatedDocument) -> Vec<Block<'_>> {
    let mut i = 0;
    blocks(&doc.items, &mut i, false)
}

fn heading_text(doc: &AnnotatedDocument) -> String {
    layout(doc)
        .iter()
        .find_map(|b| match b {
            Block::Heading(s) => Some(s.text.clone()),
            _ => None,
        })
        .unwrap_or_else(|| doc.plan.clone())
}

// ---- plain ----

/// Greedy word wrap; continuation lines are indented by `indent` columns.
fn wrap(text: &str, first_prefix: &str, indent: usize, out: &mut Vec<String>) {
    let mut line = first_prefix.to_string();
    let mut len = line.chars().count();
    let mut empty = true;
    for word in text.split(' ').filter(|w| !w.is_empty()) {
        let wl = word.chars().count();
        if !empty && len + 1 + wl > WIDTH {
            out.push(std::mem::take(&mut line));
            line = " ".repeat(indent);
            len = indent;
            empty = true;
        }
        if !empty {
            line.push(' ');
            len += 1;
        }
        line.push_str(word);
        len += wl;
        empty = false;
    }
    out.push(line.trim_end().to_string());
}

fn plain_blocks(blocks: &[Block], indent: usize, first_prefix: Option<&str>, out: &mut Vec<String>) {
    let mut prefix = first_prefix;
    for b in blocks {
        let pad = " ".repeat(indent);
        let lead = prefix.take().map(str::to_string).unwrap_or_else(|| pad.clone());
        match b {
            Block::Heading(s) => {
                out.push(format!("{lead}{}", s.text));
                out.push(format!("{pad}{}", "=".repeat(s.text.chars().count())));
            }
            Block::Paragraph(ss) => {
                let text = ss.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
                wrap(&text, &lead, indent, out);
            }
            Block::List(entries) => {
                let mut first = Some(lead);
                for e in entries {
                    let marker = format!("{}. ", e.number);
                    let lead = first.take().unwrap_or_else(|| pad.clone());
                    let p = format!("{lead}{marker}");
                    if e.content.is_empty() {
                        out.push(p.trim_end().to_string());
                    } else {
                        plain_blocks(&e.content, indent + marker.chars().count(), Some(&p), out);
                    }
                }
            }
        }
    }
}

/// Numbered, 72-column wrapped text.
pub fn plain(doc: &AnnotatedDocument) -> String {
    let blocks = layout(doc);
    let mut parts = Vec::new();
    for b in &blocks {
        let mut lines = Vec::new();
        plain_blocks(std::slice::from_ref(b), 0, None, &mut lines);
        parts.push(lines.join("\n"));
    }
    let mut out = parts.join("\n\n");
    out.push('\n');
    out
}

// ---- html ----

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn html_sentence(s: &AnnotatedSentence) -> String {
    let mut out = format!("<span class=\"sentence\" data-plan=\"{}\">", s.plan);
    let mut pos = 0;
    for p in phrases(s) {
        out.push_str(&escape_html(&char_slice(&s.text, pos, p.span.start)));
        let _ = write!(
            out,
            "<span data-kb=\"{}\" data-plan=\"{}\" data-role=\"{}\" data-span=\"{}\"",
            escape_html(&p.kb),
            p.plan,
            escape_html(&p.role),
            p.span
        );
        if p.pronoun {
            out.push_str(" data-pronoun=\"true\"");
        }
        let _ = write!(out, ">{}</span>", escape_html(&p.text));
        pos = p.span.end;
    }
    out.push_str(&escape_html(&char_slice(&s.text, pos, s.text.chars().count())));
    out.push_str("</span>");
    out
}

fn html_blocks(blocks: &[Block], inline: bool, out: &mut String) {
    for b in blocks {
        match b {
            Block::Heading(s) => {
                let _ = writeln!(out, "<h1>{}</h1>", html_sentence(s));
            }
            Block::Paragraph(ss) => {
                let body = ss.iter().map(|s| html_sentence(s)).collect::<Vec<_>>().join(" ");
                if inline {
                    out.push_str(&body);
                } else {
                    let _ = writeln!(out, "<p>{body}</p>");
                }
            }
            Block::List(entries) => {
                if inline {
                    out.push('\n');
                }
                out.push_str("<ol>\n");
                for e in entries {
                    let _ = write!(out, "<li value=\"{}\">", e.number);
                    html_blocks(&e.content, true, out);
                    out.push_str("</li>\n");
                }
                out.push_str("</ol>\n");
            }
        }
    }
}

/// A complete XHTML-compatible page with per-phrase `data-kb`/`data-plan` attributes.
pub fn html(doc: &AnnotatedDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<!DOCTYPE html>");
    let _ = writeln!(out, "<html lang=\"{}\">", doc.language);
    let _ = writeln!(out, "<head>\n<meta charset=\"utf-8\"/>\n<title>{}</title>\n</head>", escape_html(&heading_text(doc)));
    let _ = writeln!(out, "<body>");
    let _ = writeln!(
        out,
        "<article data-plan-id=\"{}\" data-digest=\"{}\">",
        escape_html(&doc.plan),
        escape_html(&doc.digest)
    );
    html_blocks(&layout(doc), false, &mut out);
    let _ = writeln!(out, "</article>\n</body>\n</html>");
    out
}

// ---- latex ----

pub fn escape_latex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' => out.push_str("\\{"),
            '}' => out.push_str("\\}"),
            '#' => out.push_str("\\#"),
            '$' => out.push_str("\\$"),
            '%' => out.push_str("\\%"),
            '&' => out.push_str("\\&"),
            '_' => out.push_str("\\_"),
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            _ => out.push(c),
        }
    }
    out
}

fn latex_blocks(blocks: &[Block], out: &mut String) {
    for (n, b) in blocks.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        match b {
            Block::Heading(s) => {
                let _ = writeln!(out, "\\section*{{{}}}", escape_latex(&s.text));
            }
            Block::Paragraph(ss) => {
                let text = ss.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
                let _ = writeln!(out, "{}", escape_latex(&text));
            }
            Block::List(entries) => {
                out.push_str("\\begin{enumerate}\n");
                for e in entries {
                    let _ = write!(out, "\\item ");
                    let mut inner = String::new();
                    latex_blocks(&e.content, &mut inner);
                    out.push_str(inner.trim_end());
                    out.push('\n');
                }
                out.push_str("\\end{enumerate}\n");
            }
        }
    }
}

fn babel(lang: Language) -> &'static str {
    match lang {
        Language::En => "english",
        Language::De => "ngerman",
        Language::Fr => "french",
    }
}

/// A standalone article.
pub fn latex(doc: &AnnotatedDocument) -> String {
    let mut out = String::new();
    out.push_str("\\documentclass{article}\n\\usepackage[T1]{fontenc}\n\\usepackage[utf8]{inputenc}\n");
    let _ = writeln!(out, "\\usepackage[{}]{{babel}}", babel(doc.language));
    out.push_str("\\begin{document}\n\n");
    latex_blocks(&layout(doc), &mut out);
    out.push_str("\n\\end{document}\n");
    out
}

// ---- annotated json ----

pub fn annotated_json(doc: &AnnotatedDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("annotated document serializes");
    s.push('\n');
    s
}

pub fn parse_annotated(text: &str) -> Result<AnnotatedDocument, EmitError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| EmitError::Json(e.to_string()))?;
    let version = value.get("format_version").and_then(|v| v.as_u64()).ok_or_else(|| EmitError::Json("missing format_version".into()))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(EmitError::Version(version as u32));
    }
    serde_json::from_value(value).map_err(|e| EmitError::Json(e.to_string()))
}

// ---- alignment ----

/// Phrases per plan and per referent, per language.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMap {
    pub digest: String,
    pub by_plan: BTreeMap<usize, BTreeMap<Language, Vec<Phrase>>>,
    pub by_referent: BTreeMap<String, BTreeMap<Language, Vec<Phrase>>>,
}

impl AlignmentMap {
    /// Phrases in `lang` expressing the same thing in the same plan as `phrase`.
    pub fn counterparts(&self, phrase: &Phrase, lang: Language) -> Vec<&Phrase> {
        self.by_referent
            .get(&phrase.kb)
            .and_then(|m| m.get(&lang))
            .map(|ps| ps.iter().filter(|p| p.plan == phrase.plan).collect())
            .unwrap_or_default()
    }
}

pub fn align(docs: &[&AnnotatedDocument]) -> Result<AlignmentMap, EmitError> {
    let mut map = AlignmentMap::default();
    if let Some(first) = docs.first() {
        map.digest = first.digest.clone();
        if let Some(d) = docs.iter().find(|d| d.digest != first.digest) {
            return Err(EmitError::DigestMismatch(first.digest.clone(), d.digest.clone()));
        }
    }
    for doc in docs {
        for s in doc.sentences() {
            for t in &s.tokens {
                map.by_plan.entry(t.plan).or_default().entry(doc.language).or_default();
            }
            for p in phrases(s) {
                map.by_plan.entry(p.plan).or_default().entry(doc.language).or_default().push(p.clone());
                map.by_referent.entry(p.kb.clone()).or_default().entry(doc.language).or_default().push(p);
            }
        }
    }
    Ok(map)
}

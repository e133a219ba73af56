//! Well-formedness checks for the HTML and LaTeX projections.

use quick_xml::events::Event;
use quick_xml::Reader;

/// Parses the page as XML: every tag closed in order, attributes quoted,
/// entities valid. Returns the number of elements seen.
pub fn check_html(body: &str) -> Result<usize, String> {
    let mut reader = Reader::from_str(body);
    reader.config_mut().check_end_names = true;
    let mut depth = 0i64;
    let mut elements = 0;
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) => {
                depth += 1;
                elements += 1;
                for a in e.attributes() {
                    a.map_err(|err| format!("bad attribute: {err}"))?;
                }
            }
            Ok(Event::Empty(e)) => {
                elements += 1;
                for a in e.attributes() {
                    a.map_err(|err| format!("bad attribute: {err}"))?;
                }
            }
            Ok(Event::End(_)) => depth -= 1,
            Ok(Event::Text(t)) => {
                let raw: &str = &t;
                if raw.contains('<') || raw.contains('>') {
                    return Err(format!("unescaped markup in text `{raw}`"));
                }
            }
            Ok(Event::GeneralRef(r)) => {
                let name: &str = &r;
                if !["amp", "lt", "gt", "quot", "apos"].contains(&name) && !r.is_char_ref() {
                    return Err(format!("unknown entity &{name};"));
                }
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(e) => return Err(format!("at byte {}: {e}", reader.buffer_position())),
        }
        if depth < 0 {
            return Err("end tag without start tag".into());
        }
    }
    if depth != 0 {
        return Err(format!("{depth} unclosed elements"));
    }
    Ok(elements)
}

const RESERVED: [char; 5] = ['#', '$', '%', '&', '_'];

/// Braces and environments balance, and reserved characters only appear escaped.
pub fn check_latex(body: &str) -> Result<usize, String> {
    let chars: Vec<char> = body.chars().collect();
    let mut braces = 0i64;
    let mut envs: Vec<String> = Vec::new();
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_alphabetic() {
                j += 1;
            }
            let name: String = chars[i + 1..j].iter().collect();
            if name.is_empty() {
                // Control symbol such as \{ or \%; skip the escaped character.
                i += 2;
                continue;
            }
            if name == "begin" || name == "end" {
                let rest: String = chars[j..].iter().collect();
                let arg = rest
                    .strip_prefix('{')
                    .and_then(|r| r.split_once('}'))
                    .map(|(a, _)| a.to_string())
                    .ok_or_else(|| format!("\\{name} without argument"))?;
                if name == "begin" {
                    envs.push(arg);
                    count += 1;
                } else if envs.pop().as_deref() != Some(arg.as_str()) {
                    return Err(format!("\\end{{{arg}}} does not close the open environment"));
                }
            }
            i = j;
            continue;
        }
        match c {
            '{' => braces += 1,
            '}' => {
                braces -= 1;
                if braces < 0 {
                    return Err("unbalanced `}`".into());
                }
            }
            '~' | '^' => return Err(format!("unescaped `{c}`")),
            _ if RESERVED.contains(&c) => return Err(format!("unescaped `{c}`")),
            _ => {}
        }
        i += 1;
    }
    if braces != 0 {
        return Err(format!("{braces} unclosed braces"));
    }
    if let Some(e) = envs.last() {
        return Err(format!("environment `{e}` never closed"));
    }
    Ok(count)
}


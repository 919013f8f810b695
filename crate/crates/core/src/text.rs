//! Code-point helpers shared by every span-aware module.
//!
//! All offsets in this crate are Unicode scalar (code point) indices, never
//! byte offsets.

/// Number of code points in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// The code-point slice `s[start..end]`, or `None` when out of bounds.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = s.char_indices().map(|(b, _)| b).chain(std::iter::once(s.len()));
    let begin = indices.nth(start)?;
    let finish = if end == start {
        begin
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&s[begin..finish])
}

/// Length-preserving case fold of a single code point.
///
/// Characters whose lowercase form expands to several code points (for
/// example `İ`) are left unchanged so folded strings keep their offsets.
pub fn fold_char(c: char) -> char {
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}

/// Case fold used for every case-insensitive comparison in the pipeline.
pub fn casefold(s: &str) -> String {
    s.chars().map(fold_char).collect()
}

/// Code-point index of the first case-insensitive occurrence of `needle`.
pub fn find_casefolded(haystack: &str, needle: &str) -> Option<usize> {
    let hay: Vec<char> = haystack.chars().map(fold_char).collect();
    let pat: Vec<char> = needle.chars().map(fold_char).collect();
    if pat.is_empty() {
        return None;
    }
    hay.windows(pat.len()).position(|w| w == pat.as_slice())
}

/// Escapes a TSV field: backslash, tab, newline and carriage return.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_field`]. Fails on a dangling or unknown escape.
pub fn unescape_field(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(format!("unknown escape sequence \\{other}")),
            None => return Err("dangling backslash at end of field".to_string()),
        }
    }
    Ok(out)
}

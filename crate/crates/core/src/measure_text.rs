//! Measurement detection, prefix-free rewriting, tokenization and
//! scale-index annotation of running text.

use std::fmt::Write as _;

use once_cell::sync::Lazy;
use regex::Regex;

use crate::numerics::{self, Notation};
use crate::units::{self, Measurement, Unit, UnitInventory};

/// Default upper bound on scale indices; longer numeric runs clamp here.
pub const DEFAULT_SCALE_CAP: usize = 16;

static NUMBER_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(numerics::NUMBER_PATTERN).expect("number pattern"));

/// A number literal immediately followed by a unit, as byte offsets into the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementSpan {
    pub byte_start: usize,
    pub byte_end: usize,
    pub number_text: String,
    pub unit_text: String,
}

impl MeasurementSpan {
    pub fn measurement(&self) -> Measurement {
        Measurement::from_parts(&self.number_text, &self.unit_text)
            .expect("span components parse by construction")
    }

    pub fn notation(&self) -> Notation {
        Notation::of_literal(&self.number_text)
    }
}

fn is_unit_char(c: char) -> bool {
    c.is_ascii_alphabetic() || matches!(c, '#' | '/' | 'µ' | 'μ')
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// A number literal must not continue a word or another number.
fn starts_number_at(text: &str, pos: usize) -> bool {
    match text[..pos].chars().next_back() {
        None => true,
        Some(c) => !(is_word_char(c) || c == '.'),
    }
}

/// A unit ends at a non-word character other than `/` (or at end of text).
fn unit_boundary(text: &str, end: usize) -> bool {
    match text[end..].chars().next() {
        None => true,
        Some(c) => !(is_word_char(c) || c == '/' || c == '#'),
    }
}

/// Longest unit starting at `pos` that parses, is known to the inventory and
/// ends on a boundary. Returns its byte length.
fn match_unit(text: &str, pos: usize, inventory: &UnitInventory) -> Option<(usize, Unit)> {
    let run: usize = text[pos..].chars().take_while(|&c| is_unit_char(c)).map(char::len_utf8).sum();
    let mut ends: Vec<usize> = text[pos..pos + run].char_indices().map(|(i, c)| pos + i + c.len_utf8()).collect();
    ends.reverse();
    for end in ends {
        if !unit_boundary(text, end) {
            continue;
        }
        if let Ok(unit) = units::parse_unit(&text[pos..end]) {
            if inventory.knows_dimension(&unit) {
                return Some((end - pos, unit));
            }
        }
    }
    None
}

static DIGIT_UNIT_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"^[A-Za-zµμ#]+/[0-9]+[A-Za-zµμ]+").expect("digit unit pattern"));

/// Units whose denominator carries a number, e.g. `mg/100ml`. Both sides must
/// parse as units on their own.
fn match_digit_bearing_unit(text: &str, pos: usize) -> Option<usize> {
    let m = DIGIT_UNIT_RE.find(&text[pos..])?;
    let end = pos + m.end();
    if !unit_boundary(text, end) {
        return None;
    }
    let (num, den) = m.as_str().split_once('/')?;
    let den = den.trim_start_matches(|c: char| c.is_ascii_digit());
    (units::parse_unit(num).is_ok() && units::parse_unit(den).is_ok()).then_some(m.end())
}

/// Finds measurements left to right with the built-in unit inventory.
pub fn detect_measurements(text: &str) -> Vec<MeasurementSpan> {
    detect_measurements_with(text, UnitInventory::builtin())
}

/// Finds measurements: a number literal directly followed by the longest
/// inventory unit. Spans never overlap.
pub fn detect_measurements_with(text: &str, inventory: &UnitInventory) -> Vec<MeasurementSpan> {
    let mut spans = Vec::new();
    let mut cursor = 0;
    while let Some(m) = NUMBER_RE.find_at(text, cursor) {
        cursor = m.end().max(m.start() + 1);
        if !starts_number_at(text, m.start()) {
            continue;
        }
        if let Some(len) = match_digit_bearing_unit(text, m.end()) {
            cursor = m.end() + len;
            continue;
        }
        if let Some((len, _)) = match_unit(text, m.end(), inventory) {
            let end = m.end() + len;
            spans.push(MeasurementSpan {
                byte_start: m.start(),
                byte_end: end,
                number_text: m.as_str().to_string(),
                unit_text: text[m.end()..end].to_string(),
            });
            cursor = end;
        }
    }
    spans
}

/// Rewrites every prefixed measurement into prefix-free form, keeping the
/// source notation. All other bytes are copied verbatim.
pub fn rule_convert_text(text: &str) -> String {
    rule_convert_text_with(text, UnitInventory::builtin())
}

pub fn rule_convert_text_with(text: &str, inventory: &UnitInventory) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    let mut last = 0;
    for span in detect_measurements_with(text, inventory) {
        let m = span.measurement();
        if m.unit.is_prefix_free() {
            continue;
        }
        out.push_str(&text[last..span.byte_start]);
        let canonical = units::canonicalize(&m);
        let rendered = units::render_measurement(&canonical, span.notation())
            .unwrap_or_else(|_| units::render_measurement(&canonical, Notation::Decimal).expect("decimal never overflows"));
        out.push_str(&rendered);
        last = span.byte_end;
    }
    out.push_str(&text[last..]);
    out
}

/// Tokens with numeric flags. Number literals are split into characters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedText {
    pub tokens: Vec<String>,
    pub numeric_flags: Vec<bool>,
}

/// Tokens, flags and scale indices for one text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScaleIndexedText {
    pub tokens: Vec<String>,
    pub numeric_flags: Vec<bool>,
    pub scale_indices: Vec<usize>,
}

pub const PUNCTUATION: &[char] = &[',', ':', ';', '(', ')'];

/// Splits text into tokens.
///
/// Number literals become one numeric token per character (digits, `.`, and
/// in scientific notation `E`, sign and exponent digits). A unit directly
/// after a number is one non-numeric token, including units that contain
/// digits such as `mg/100ml`. Bracketed specials like `[MASK]`, words and
/// punctuation are single non-numeric tokens. Whitespace only separates.
pub fn tokenize(text: &str) -> TokenizedText {
    tokenize_with(text, UnitInventory::builtin())
}

pub fn tokenize_with(text: &str, inventory: &UnitInventory) -> TokenizedText {
    let mut out = TokenizedText::default();
    let push = |tok: &str, numeric: bool, out: &mut TokenizedText| {
        out.tokens.push(tok.to_string());
        out.numeric_flags.push(numeric);
    };
    let mut pos = 0;
    while pos < text.len() {
        let rest = &text[pos..];
        let c = rest.chars().next().unwrap();
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        if c == '[' {
            if let Some(close) = rest.find(']') {
                let special = &rest[..=close];
                if special[1..close].chars().all(|c| c.is_ascii_uppercase() || c == '_') && close > 1 {
                    push(special, false, &mut out);
                    pos += special.len();
                    continue;
                }
            }
        }
        if c.is_ascii_digit() && starts_number_at(text, pos) {
            let m = NUMBER_RE.find_at(text, pos).expect("digit starts a literal");
            debug_assert_eq!(m.start(), pos);
            for ch in m.as_str().chars() {
                push(ch.encode_utf8(&mut [0; 4]), true, &mut out);
            }
            pos = m.end();
            let unit_len = match_digit_bearing_unit(text, pos)
                .or_else(|| match_unit(text, pos, inventory).map(|(len, _)| len));
            if let Some(len) = unit_len {
                push(&text[pos..pos + len], false, &mut out);
                pos += len;
            }
            continue;
        }
        if PUNCTUATION.contains(&c) {
            push(&rest[..c.len_utf8()], false, &mut out);
            pos += c.len_utf8();
            continue;
        }
        let len: usize = rest
            .chars()
            .take_while(|&ch| !ch.is_whitespace() && !PUNCTUATION.contains(&ch) && ch != '[')
            .map(char::len_utf8)
            .sum();
        let len = len.max(c.len_utf8());
        push(&rest[..len], false, &mut out);
        pos += len;
    }
    out
}

/// Scale indices from right to left: a non-numeric token resets the index to
/// zero, a numeric token takes its right neighbour's index plus one. Indices
/// are clamped to `cap`.
pub fn assign_scale_indices(numeric_flags: &[bool], cap: usize) -> Vec<usize> {
    let mut indices = vec![0; numeric_flags.len()];
    let mut run = 0usize;
    for (i, &numeric) in numeric_flags.iter().enumerate().rev() {
        run = if numeric { run + 1 } else { 0 };
        indices[i] = run.min(cap);
    }
    indices
}

/// Tokenizes and annotates a text with scale indices.
pub fn annotate(text: &str, cap: usize) -> ScaleIndexedText {
    annotate_with(text, cap, UnitInventory::builtin())
}

pub fn annotate_with(text: &str, cap: usize, inventory: &UnitInventory) -> ScaleIndexedText {
    let TokenizedText { tokens, numeric_flags } = tokenize_with(text, inventory);
    let scale_indices = assign_scale_indices(&numeric_flags, cap);
    ScaleIndexedText { tokens, numeric_flags, scale_indices }
}

impl ScaleIndexedText {
    /// One line per token: `token<TAB>flag<TAB>index`, flag as `1`/`0`.
    pub fn to_dump(&self) -> String {
        let mut s = String::new();
        for ((t, f), i) in self.tokens.iter().zip(&self.numeric_flags).zip(&self.scale_indices) {
            let _ = writeln!(s, "{t}\t{}\t{i}", u8::from(*f));
        }
        s
    }

    /// Parses the dump format written by [`ScaleIndexedText::to_dump`].
    pub fn from_dump(text: &str) -> Result<Self, String> {
        let mut out = ScaleIndexedText::default();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split('\t').collect();
            let [tok, flag, idx] = fields[..] else {
                return Err(format!("line {}: expected 3 tab-separated fields", n + 1));
            };
            let flag = match flag {
                "1" => true,
                "0" => false,
                other => return Err(format!("line {}: bad flag {other:?}", n + 1)),
            };
            let idx = idx.parse().map_err(|_| format!("line {}: bad index {idx:?}", n + 1))?;
            out.tokens.push(tok.to_string());
            out.numeric_flags.push(flag);
            out.scale_indices.push(idx);
        }
        Ok(out)
    }
}

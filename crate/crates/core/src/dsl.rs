//! The `.chains` document format.
//!
//! ```text
//! # comment
//! alert: A12/02261/23
//! case: burn
//! component "hair dryer"
//! control "power I [A]"
//! effect "Joule-Lenz-Heating"
//! harm "burn"
//! ---
//! alert: ...
//! ```
//!
//! Chains are separated by a line holding only `---`. Each chain has the
//! two headers followed by its steps. Names are double-quoted; `\"`, `\\`,
//! `\n`, `\r` and `\t` are the recognised escapes. `#` starts a comment on
//! its own line or after a step.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{validate_chain, ChainSet, FactorCategory, FactorKey, FailureChain, Step, Violation};

pub const SEPARATOR: &str = "---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line,
            column,
            message: message.into(),
        }
    }

    fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line,
            column,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Parsed {
    pub chains: ChainSet,
    pub diagnostics: Vec<Diagnostic>,
}

impl Parsed {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }

    pub fn has_warnings(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Warning)
    }
}

#[derive(Debug, Default)]
struct Block {
    start_line: Option<usize>,
    alert: Option<String>,
    case: Option<String>,
    /// (step, line, column of the keyword)
    steps: Vec<(Step, usize, usize)>,
    failed: bool,
}

impl Block {
    fn touch(&mut self, line: usize) {
        self.start_line.get_or_insert(line);
    }

    fn is_empty(&self) -> bool {
        self.start_line.is_none()
    }
}

struct DocumentParser {
    chains: Vec<FailureChain>,
    diagnostics: Vec<Diagnostic>,
    spellings: HashMap<FactorKey, String>,
}

/// Parses a chain document. Never fails: malformed lines and invalid chains
/// become Error diagnostics and the affected chains are dropped; everything
/// else is returned.
pub fn parse_document(source: &str) -> Parsed {
    let mut parser = DocumentParser {
        chains: Vec::new(),
        diagnostics: Vec::new(),
        spellings: HashMap::new(),
    };
    let mut block = Block::default();
    let mut separator_line: Option<usize> = None;

    for (idx, raw) in source.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed == SEPARATOR {
            let finished = std::mem::take(&mut block);
            parser.finish(finished, separator_line.unwrap_or(line_no));
            separator_line = Some(line_no);
            continue;
        }
        parser.content_line(&mut block, line, line_no);
    }
    if let Some(sep) = separator_line {
        parser.finish(block, sep);
    } else if !block.is_empty() {
        parser.finish(block, 1);
    }

    Parsed {
        chains: ChainSet::new(parser.chains),
        diagnostics: parser.diagnostics,
    }
}

impl DocumentParser {
    fn content_line(&mut self, block: &mut Block, line: &str, line_no: usize) {
        block.touch(line_no);
        let chars: Vec<char> = line.chars().collect();
        let mut pos = chars.iter().take_while(|c| c.is_whitespace()).count();
        let word_start = pos;
        while pos < chars.len() && (chars[pos].is_alphanumeric() || chars[pos] == '_' || chars[pos] == '-') {
            pos += 1;
        }
        let word: String = chars[word_start..pos].iter().collect();
        let col = word_start + 1;

        if word.is_empty() {
            self.fail(block, Diagnostic::error(line_no, col, "expected a header or a step"));
            return;
        }

        if chars.get(pos) == Some(&':') {
            let value: String = chars[pos + 1..].iter().collect::<String>().trim().to_string();
            self.header(block, &word, value, line_no, col);
            return;
        }

        let Some(category) = FactorCategory::from_keyword(&word) else {
            self.fail(
                block,
                Diagnostic::error(line_no, col, format!("unknown category '{word}'")),
            );
            return;
        };

        while pos < chars.len() && chars[pos].is_whitespace() {
            pos += 1;
        }
        if chars.get(pos) != Some(&'"') {
            self.fail(
                block,
                Diagnostic::error(line_no, pos + 1, format!("expected a quoted name after '{word}'")),
            );
            return;
        }
        let quote_col = pos + 1;
        let (name, end) = match read_quoted(&chars, pos + 1) {
            Ok(ok) => ok,
            Err(QuoteError::Unterminated) => {
                self.fail(block, Diagnostic::error(line_no, quote_col, "unterminated quoted name"));
                return;
            }
            Err(QuoteError::BadEscape(at, c)) => {
                self.fail(
                    block,
                    Diagnostic::error(line_no, at + 1, format!("unknown escape '\\{c}'")),
                );
                return;
            }
        };
        let rest: String = chars[end..].iter().collect();
        let rest = rest.trim_start();
        if !rest.is_empty() && !rest.starts_with('#') {
            let rest_col = chars.len() - rest.chars().count() + 1;
            self.fail(
                block,
                Diagnostic::error(line_no, rest_col, "unexpected text after the quoted name"),
            );
            return;
        }
        block.steps.push((Step::new(category, name), line_no, col));
    }

    fn header(&mut self, block: &mut Block, key: &str, value: String, line_no: usize, col: usize) {
        let slot = match key {
            "alert" => &mut block.alert,
            "case" => &mut block.case,
            other => {
                self.fail(block, Diagnostic::error(line_no, col, format!("unknown header '{other}'")));
                return;
            }
        };
        if slot.is_some() {
            self.fail(block, Diagnostic::error(line_no, col, format!("duplicate '{key}' header")));
            return;
        }
        if value.is_empty() {
            self.fail(block, Diagnostic::error(line_no, col, format!("'{key}' header has no value")));
            return;
        }
        *slot = Some(value);
        if !block.steps.is_empty() {
            self.fail(
                block,
                Diagnostic::error(line_no, col, format!("'{key}' header must precede the steps")),
            );
        }
    }

    fn fail(&mut self, block: &mut Block, diagnostic: Diagnostic) {
        block.failed = true;
        self.diagnostics.push(diagnostic);
    }

    fn finish(&mut self, mut block: Block, separator_line: usize) {
        let Some(start) = block.start_line else {
            self.diagnostics
                .push(Diagnostic::warning(separator_line, 1, "empty chain block"));
            return;
        };
        let syntax_failed = block.failed;
        if block.alert.is_none() {
            self.fail(&mut block, Diagnostic::error(start, 1, "chain is missing the 'alert' header"));
        }
        if block.case.is_none() {
            self.fail(&mut block, Diagnostic::error(start, 1, "chain is missing the 'case' header"));
        }

        let chain = FailureChain::new(
            block.alert.clone().unwrap_or_default(),
            block.case.clone().unwrap_or_default(),
            block.steps.iter().map(|(s, _, _)| s.clone()).collect(),
        );
        let violations = if syntax_failed { Vec::new() } else { validate_chain(&chain) };
        for violation in violations {
            let (line, col) = match violation.step {
                Some(i) => (block.steps[i - 1].1, block.steps[i - 1].2),
                None => (start, 1),
            };
            self.fail(&mut block, Diagnostic::error(line, col, violation.to_string()));
        }
        if block.failed {
            return;
        }

        for (step, line, col) in &block.steps {
            let Ok(key) = step.key() else { continue };
            let spelled = step.name.trim();
            match self.spellings.get(&key) {
                Some(first) if first != spelled => self.diagnostics.push(Diagnostic::warning(
                    *line,
                    *col,
                    format!("{} \"{}\" is spelled \"{}\" elsewhere; treated as the same factor", step.category, spelled, first),
                )),
                Some(_) => {}
                None => {
                    self.spellings.insert(key, spelled.to_string());
                }
            }
        }
        self.chains.push(chain);
    }
}

enum QuoteError {
    Unterminated,
    BadEscape(usize, char),
}

/// Reads a quoted name starting right after the opening quote. Returns the
/// unescaped name and the index just past the closing quote.
fn read_quoted(chars: &[char], mut pos: usize) -> Result<(String, usize), QuoteError> {
    let mut out = String::new();
    while pos < chars.len() {
        match chars[pos] {
            '"' => return Ok((out, pos + 1)),
            '\\' => {
                let Some(&next) = chars.get(pos + 1) else {
                    return Err(QuoteError::Unterminated);
                };
                out.push(match next {
                    '"' => '"',
                    '\\' => '\\',
                    'n' => '\n',
                    'r' => '\r',
                    't' => '\t',
                    other => return Err(QuoteError::BadEscape(pos, other)),
                });
                pos += 2;
            }
            c => {
                out.push(c);
                pos += 1;
            }
        }
    }
    Err(QuoteError::Unterminated)
}

pub(crate) fn quote(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 2);
    out.push('"');
    for c in name.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("chain {chain} is invalid: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidChain {
        /// 0-based position in the chain set.
        chain: usize,
        violations: Vec<Violation>,
    },
    #[error("chain {chain} has an unrepresentable '{header}' header value {value:?}")]
    InvalidHeader {
        chain: usize,
        header: &'static str,
        value: String,
    },
}

fn header_ok(value: &str) -> bool {
    !value.is_empty() && value.trim() == value && !value.contains(['\n', '\r'])
}

/// Writes chains in document form. Refuses chains that `parse_document`
/// would reject, so that parsing the output reproduces the input.
pub fn serialize_document(chains: &ChainSet) -> Result<String, SerializeError> {
    let mut out = String::new();
    for (i, chain) in chains.iter().enumerate() {
        let violations = validate_chain(chain);
        if !violations.is_empty() {
            return Err(SerializeError::InvalidChain { chain: i, violations });
        }
        for (header, value) in [("alert", &chain.source_alert), ("case", &chain.case_label)] {
            if !header_ok(value) {
                return Err(SerializeError::InvalidHeader {
                    chain: i,
                    header,
                    value: value.clone(),
                });
            }
        }
        if i > 0 {
            out.push_str(SEPARATOR);
            out.push('\n');
        }
        out.push_str(&format!("alert: {}\ncase: {}\n", chain.source_alert, chain.case_label));
        for step in &chain.steps {
            out.push_str(step.category.keyword());
            out.push(' ');
            out.push_str(&quote(&step.name));
            out.push('\n');
        }
    }
    Ok(out)
}

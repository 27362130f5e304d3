//! Corpus ingestion: lexing, method extraction, token windows, and
//! per-warning-kind labeling.

mod extract;
mod lexer;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use extract::extract_methods;
pub use lexer::lex;

/// Lexical class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenClass {
    Keyword,
    Identifier,
    Separator,
    Operator,
    Literal,
}

/// One lexical unit: the lexeme, its class, and its 1-based source line.
/// Comments never produce tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub lexeme: String,
    pub class: TokenClass,
    pub line: u32,
}

impl Token {
    pub fn new(lexeme: impl Into<String>, class: TokenClass, line: u32) -> Self {
        let lexeme = lexeme.into();
        debug_assert!(!lexeme.is_empty());
        debug_assert!(line >= 1);
        Token {
            lexeme,
            class,
            line,
        }
    }
}

/// A non-abstract method as extracted from one compilation unit: every token
/// from the first signature token through the matching closing brace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMethod {
    pub method_id: String,
    pub file: String,
    pub tokens: Vec<Token>,
}

/// An analyzer warning joined to a method.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub kind: String,
    pub line: u32,
    pub method_id: String,
}

/// All methods of a corpus partitioned by whether they carry a warning of one
/// kind inside their token window. The two sides are disjoint and cover the
/// corpus.
#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    pub kind: String,
    pub buggy: Vec<RawMethod>,
    pub non_buggy: Vec<RawMethod>,
}

/// One slot of a fixed-length token window: a real token or trailing padding.
#[derive(Debug, Clone, PartialEq)]
pub enum WindowSlot {
    Token(Token),
    Pad,
}

impl WindowSlot {
    pub fn is_pad(&self) -> bool {
        matches!(self, WindowSlot::Pad)
    }
}

/// A method's leading token window of fixed length `n`, padding included.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSequence {
    pub method_id: String,
    /// Exactly `n` slots; padding occurs only as a suffix.
    pub window: Vec<WindowSlot>,
    /// Source line of the final non-pad token.
    pub last_real_line: u32,
}

impl MethodSequence {
    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Iterates the real (non-pad) tokens of the window.
    pub fn real_tokens(&self) -> impl Iterator<Item = &Token> {
        self.window.iter().filter_map(|slot| match slot {
            WindowSlot::Token(t) => Some(t),
            WindowSlot::Pad => None,
        })
    }
}

/// Cuts a method down to its leading window of exactly `n` tokens,
/// right-padded when the method is shorter.
pub fn truncate(method: &RawMethod, n: usize) -> MethodSequence {
    assert!(n >= 1, "window length must be at least 1");
    assert!(
        !method.tokens.is_empty(),
        "method {} has no tokens",
        method.method_id
    );
    let real = method.tokens.len().min(n);
    let mut window: Vec<WindowSlot> = method.tokens[..real]
        .iter()
        .cloned()
        .map(WindowSlot::Token)
        .collect();
    let last_real_line = method.tokens[real - 1].line;
    window.resize(n, WindowSlot::Pad);
    MethodSequence {
        method_id: method.method_id.clone(),
        window,
        last_real_line,
    }
}

/// Labeling outcome: the partitioned corpus plus the warnings that referenced
/// unknown methods and were skipped.
#[derive(Debug)]
pub struct LabelOutcome {
    pub corpus: LabeledCorpus,
    pub skipped: Vec<Warning>,
}

/// Partitions methods by one warning kind. A method is buggy iff it carries at
/// least one warning of this kind at a line inside its `n`-token window;
/// methods whose warnings of this kind all lie beyond the window count as
/// non-buggy. Warnings referencing unknown method ids are skipped and
/// reported.
pub fn label(methods: &[RawMethod], warnings: &[Warning], kind: &str, n: usize) -> LabelOutcome {
    let last_lines: HashMap<&str, u32> = methods
        .iter()
        .map(|m| (m.method_id.as_str(), truncate(m, n).last_real_line))
        .collect();

    let mut buggy_ids: HashSet<&str> = HashSet::new();
    let mut skipped = Vec::new();
    for w in warnings {
        if w.kind != kind {
            continue;
        }
        match last_lines.get(w.method_id.as_str()) {
            Some(&last) if w.line <= last => {
                buggy_ids.insert(w.method_id.as_str());
            }
            Some(_) => {} // beyond the window: stays non-buggy
            None => skipped.push(w.clone()),
        }
    }

    let mut buggy = Vec::new();
    let mut non_buggy = Vec::new();
    for m in methods {
        if buggy_ids.contains(m.method_id.as_str()) {
            buggy.push(m.clone());
        } else {
            non_buggy.push(m.clone());
        }
    }
    LabelOutcome {
        corpus: LabeledCorpus {
            kind: kind.to_string(),
            buggy,
            non_buggy,
        },
        skipped,
    }
}

//! Synthetic corpus generator: plausible Java-like token streams with a
//! planted lexical trigger in buggy methods, a configurable confounder form
//! in part of the non-buggy methods, and ground-truth warnings at the
//! trigger line.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hash::fnv1a64_parts;
use crate::ingest::{RawMethod, Token, TokenClass, Warning};

/// How the trigger shows up inside confounding non-buggy methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfounderStyle {
    /// The exact trigger statement; indistinguishable from a buggy one.
    Exact,
    /// The trigger token in a benign position (not the trigger subsequence).
    Scattered,
    /// The trigger subsequence with an extra call argument, the way a
    /// charset-taking overload differs from the defaulting one.
    Guarded,
}

impl fmt::Display for ConfounderStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConfounderStyle::Exact => "exact",
            ConfounderStyle::Scattered => "scattered",
            ConfounderStyle::Guarded => "guarded",
        };
        f.write_str(s)
    }
}

impl FromStr for ConfounderStyle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(ConfounderStyle::Exact),
            "scattered" => Ok(ConfounderStyle::Scattered),
            "guarded" => Ok(ConfounderStyle::Guarded),
            other => Err(format!(
                "unknown confounder style {other:?} (expected exact, scattered, or guarded)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub methods: usize,
    /// Fraction of methods that carry the planted bug; must lie in (0, 1).
    pub bug_rate: f64,
    /// Fraction of non-buggy methods that carry the confounder form.
    pub confounder_rate: f64,
    pub kind: String,
    pub style: ConfounderStyle,
    /// Token window the trigger must land inside.
    pub window: usize,
    pub min_stmts: usize,
    pub max_stmts: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            methods: 2000,
            bug_rate: 0.1,
            confounder_rate: 0.3,
            kind: "DefaultCharset".to_string(),
            style: ConfounderStyle::Scattered,
            window: 50,
            min_stmts: 4,
            max_stmts: 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub methods: Vec<RawMethod>,
    pub warnings: Vec<Warning>,
}

const TYPES: &[&str] = &[
    "String", "List", "Map", "File", "Buffer", "Stream", "Result", "Entry", "Task", "Node",
    "Helper", "Builder", "Context", "Writer",
];
const IDS: &[&str] = &[
    "value", "result", "count", "index", "name", "data", "buffer", "item", "list", "key", "obj",
    "tmp", "size", "node", "next", "input", "output", "flag", "state", "path", "line", "text",
];
const CALLS: &[&str] = &[
    "get", "set", "add", "run", "close", "open", "read", "write", "parse", "format", "append",
    "update", "clear", "apply", "check", "find",
];
const LITS: &[&str] = &[
    "0", "1", "2", "5", "10", "42", "100", "\"msg\"", "\"name\"", "\"key\"", "'c'", "true",
    "false", "null",
];
const CMP_OPS: &[&str] = &["==", "!=", "<", ">"];
const ARITH_OPS: &[&str] = &["+", "-", "*"];

/// Tokens lexed from the trigger statement, with the line filled in later.
type Stmt = Vec<(&'static str, TokenClass)>;

fn kw(l: &'static str) -> (&'static str, TokenClass) {
    (l, TokenClass::Keyword)
}
fn id(l: &'static str) -> (&'static str, TokenClass) {
    (l, TokenClass::Identifier)
}
fn sep(l: &'static str) -> (&'static str, TokenClass) {
    (l, TokenClass::Separator)
}
fn op(l: &'static str) -> (&'static str, TokenClass) {
    (l, TokenClass::Operator)
}
fn lit(l: &'static str) -> (&'static str, TokenClass) {
    (l, TokenClass::Literal)
}

/// The planted bug: a writer built without a charset argument.
fn trigger_stmt() -> Stmt {
    vec![
        id("Writer"),
        id("out"),
        op("="),
        kw("new"),
        id("FileWriter"),
        sep("("),
        id("path"),
        sep(")"),
        sep(";"),
    ]
}

/// Benign twin of the trigger with an explicit second argument. Every token
/// also occurs in filler statements, so only the arrangement distinguishes it.
fn guarded_stmt() -> Stmt {
    vec![
        id("Writer"),
        id("out"),
        op("="),
        kw("new"),
        id("FileWriter"),
        sep("("),
        id("path"),
        sep(","),
        id("name"),
        sep(")"),
        sep(";"),
    ]
}

/// The trigger token used benignly: a type position instead of a constructor.
fn scattered_stmt() -> Stmt {
    vec![
        id("FileWriter"),
        id("out"),
        op("="),
        id("obj"),
        sep("."),
        id("open"),
        sep("("),
        id("path"),
        sep(")"),
        sep(";"),
    ]
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn pick<'a>(&mut self, pool: &[&'a str]) -> &'a str {
        pool[self.rng.random_range(0..pool.len())]
    }

    fn filler_stmt(&mut self) -> Stmt {
        match self.rng.random_range(0..5u32) {
            // Type name = new Type(args);
            0 => {
                let mut s = vec![id(self.pick(TYPES)), id(self.pick(IDS)), op("=")];
                s.push(kw("new"));
                s.push(id(self.pick(TYPES)));
                s.push(sep("("));
                self.args(&mut s);
                s.push(sep(")"));
                s.push(sep(";"));
                s
            }
            // name = obj.call(args);
            1 => {
                let mut s = vec![id(self.pick(IDS)), op("=")];
                s.push(id(self.pick(IDS)));
                s.push(sep("."));
                s.push(id(self.pick(CALLS)));
                s.push(sep("("));
                self.args(&mut s);
                s.push(sep(")"));
                s.push(sep(";"));
                s
            }
            // obj.call(args);
            2 => {
                let mut s = vec![id(self.pick(IDS)), sep("."), id(self.pick(CALLS)), sep("(")];
                self.args(&mut s);
                s.push(sep(")"));
                s.push(sep(";"));
                s
            }
            // int name = value op lit;
            3 => {
                vec![
                    kw("int"),
                    id(self.pick(IDS)),
                    op("="),
                    id(self.pick(IDS)),
                    op(self.pick(ARITH_OPS)),
                    lit(self.pick(LITS)),
                    sep(";"),
                ]
            }
            // if (name cmp lit) { obj.call(); }
            _ => {
                vec![
                    kw("if"),
                    sep("("),
                    id(self.pick(IDS)),
                    op(self.pick(CMP_OPS)),
                    lit(self.pick(LITS)),
                    sep(")"),
                    sep("{"),
                    id(self.pick(IDS)),
                    sep("."),
                    id(self.pick(CALLS)),
                    sep("("),
                    sep(")"),
                    sep(";"),
                    sep("}"),
                ]
            }
        }
    }

    fn args(&mut self, s: &mut Stmt) {
        let count = self.rng.random_range(0..=2u32);
        for k in 0..count {
            if k > 0 {
                s.push(sep(","));
            }
            if self.rng.random_bool(0.5) {
                s.push(id(self.pick(IDS)));
            } else {
                s.push(lit(self.pick(LITS)));
            }
        }
    }

    fn signature(&mut self) -> Stmt {
        let mut s = vec![kw(if self.rng.random_bool(0.5) {
            "public"
        } else {
            "private"
        })];
        if self.rng.random_bool(0.25) {
            s.push(kw("static"));
        }
        s.push(match self.rng.random_range(0..3u32) {
            0 => kw("void"),
            1 => kw("int"),
            _ => id(self.pick(TYPES)),
        });
        s.push(id(self.pick(CALLS)));
        s.push(sep("("));
        let params = self.rng.random_range(0..=2u32);
        for k in 0..params {
            if k > 0 {
                s.push(sep(","));
            }
            s.push(id(self.pick(TYPES)));
            s.push(id(self.pick(IDS)));
        }
        s.push(sep(")"));
        s.push(sep("{"));
        s
    }
}

/// Generates a corpus with exactly `round(bug_rate * methods)` buggy methods
/// and `round(confounder_rate * non_buggy)` confounding non-buggy methods.
/// Identical seeds give identical corpora.
pub fn generate(spec: &SynthSpec, seed: u64) -> Result<SynthCorpus> {
    if !(spec.bug_rate > 0.0 && spec.bug_rate < 1.0) {
        return Err(Error::InvalidRate {
            name: "bug_rate",
            range: "(0, 1)",
            value: spec.bug_rate,
        });
    }
    if !(0.0..1.0).contains(&spec.confounder_rate) {
        return Err(Error::InvalidRate {
            name: "confounder_rate",
            range: "[0, 1)",
            value: spec.confounder_rate,
        });
    }
    assert!(spec.methods >= 2, "need at least two methods");
    assert!(spec.min_stmts >= 1 && spec.min_stmts <= spec.max_stmts);

    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };

    let buggy_count = ((spec.methods as f64) * spec.bug_rate).round() as usize;
    let mut is_buggy = vec![false; spec.methods];
    for flag in is_buggy.iter_mut().take(buggy_count) {
        *flag = true;
    }
    is_buggy.shuffle(&mut gen.rng);

    let non_buggy_count = spec.methods - buggy_count;
    let confounder_count = ((non_buggy_count as f64) * spec.confounder_rate).round() as usize;
    let mut confounder_flags = vec![false; non_buggy_count];
    for flag in confounder_flags.iter_mut().take(confounder_count) {
        *flag = true;
    }
    confounder_flags.shuffle(&mut gen.rng);

    let mut methods = Vec::with_capacity(spec.methods);
    let mut warnings = Vec::new();
    let mut non_buggy_seen = 0;
    for i in 0..spec.methods {
        let buggy = is_buggy[i];
        let planted: Option<Stmt> = if buggy {
            Some(trigger_stmt())
        } else {
            let confound = confounder_flags[non_buggy_seen];
            non_buggy_seen += 1;
            if confound {
                Some(match spec.style {
                    ConfounderStyle::Exact => trigger_stmt(),
                    ConfounderStyle::Scattered => scattered_stmt(),
                    ConfounderStyle::Guarded => guarded_stmt(),
                })
            } else {
                None
            }
        };

        let signature = gen.signature();
        let stmt_count = gen.rng.random_range(spec.min_stmts..=spec.max_stmts);
        let stmts: Vec<Stmt> = (0..stmt_count).map(|_| gen.filler_stmt()).collect();

        // Insert the planted statement at a boundary whose token prefix keeps
        // the whole statement inside the window.
        let insert_at = match &planted {
            Some(planted_stmt) => {
                let budget = spec
                    .window
                    .saturating_sub(signature.len() + planted_stmt.len());
                let mut allowed = vec![0usize];
                let mut cum = 0;
                for (idx, st) in stmts.iter().enumerate() {
                    cum += st.len();
                    if cum <= budget {
                        allowed.push(idx + 1);
                    }
                }
                Some(allowed[gen.rng.random_range(0..allowed.len())])
            }
            None => None,
        };

        let file = format!("m{i:05}.java");
        let mut tokens: Vec<Token> = Vec::new();
        let mut line: u32 = 1;
        for (lexeme, class) in &signature {
            tokens.push(Token::new(*lexeme, *class, line));
        }
        let mut warning_line = None;
        for slot in 0..=stmts.len() {
            if insert_at == Some(slot) {
                line += 1;
                if buggy {
                    warning_line = Some(line);
                }
                for (lexeme, class) in planted.as_ref().unwrap() {
                    tokens.push(Token::new(*lexeme, *class, line));
                }
            }
            if slot < stmts.len() {
                line += 1;
                for (lexeme, class) in &stmts[slot] {
                    tokens.push(Token::new(*lexeme, *class, line));
                }
            }
        }
        line += 1;
        tokens.push(Token::new("}", TokenClass::Separator, line));

        let sig_hash = fnv1a64_parts(signature.iter().map(|(l, _)| *l));
        let method_id = format!("{file}:1:{sig_hash:016x}");
        if let Some(wline) = warning_line {
            warnings.push(Warning {
                kind: spec.kind.clone(),
                line: wline,
                method_id: method_id.clone(),
            });
        }
        methods.push(RawMethod {
            method_id,
            file,
            tokens,
        });
    }

    Ok(SynthCorpus { methods, warnings })
}

/// True when the method's tokens contain the contiguous buggy trigger.
pub fn contains_trigger(method: &RawMethod) -> bool {
    let want: Vec<&str> = trigger_stmt().iter().map(|(l, _)| *l).collect();
    method
        .tokens
        .windows(want.len())
        .any(|w| w.iter().map(|t| t.lexeme.as_str()).eq(want.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn spec(methods: usize, bug_rate: f64, confounder_rate: f64) -> SynthSpec {
        SynthSpec {
            methods,
            bug_rate,
            confounder_rate,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn buggy_count_is_exact() {
        let corpus = generate(&spec(2000, 0.1, 0.3), 1).unwrap();
        assert_eq!(corpus.methods.len(), 2000);
        let flagged: HashSet<&str> = corpus
            .warnings
            .iter()
            .map(|w| w.method_id.as_str())
            .collect();
        assert_eq!(flagged.len(), 200);
    }

    #[test]
    fn zero_confounder_rate_keeps_trigger_buggy_only() {
        let corpus = generate(&spec(300, 0.2, 0.0), 7).unwrap();
        let flagged: HashSet<&str> = corpus
            .warnings
            .iter()
            .map(|w| w.method_id.as_str())
            .collect();
        for m in &corpus.methods {
            assert_eq!(
                contains_trigger(m),
                flagged.contains(m.method_id.as_str()),
                "method {}",
                m.method_id
            );
        }
    }

    #[test]
    fn exact_style_plants_trigger_in_confounders_too() {
        let corpus = generate(
            &SynthSpec {
                style: ConfounderStyle::Exact,
                ..spec(300, 0.2, 0.5)
            },
            7,
        )
        .unwrap();
        let flagged: HashSet<&str> = corpus
            .warnings
            .iter()
            .map(|w| w.method_id.as_str())
            .collect();
        let confounders = corpus
            .methods
            .iter()
            .filter(|m| !flagged.contains(m.method_id.as_str()) && contains_trigger(m))
            .count();
        assert_eq!(confounders, 120); // round(0.5 * 240)
    }

    #[test]
    fn scattered_confounders_have_token_but_not_subsequence() {
        let corpus = generate(&spec(300, 0.2, 0.5), 7).unwrap();
        let flagged: HashSet<&str> = corpus
            .warnings
            .iter()
            .map(|w| w.method_id.as_str())
            .collect();
        let mut with_token = 0;
        for m in corpus
            .methods
            .iter()
            .filter(|m| !flagged.contains(m.method_id.as_str()))
        {
            assert!(!contains_trigger(m));
            if m.tokens.iter().any(|t| t.lexeme == "FileWriter") {
                with_token += 1;
            }
        }
        assert_eq!(with_token, 120);
    }

    #[test]
    fn same_seed_gives_identical_bytes() {
        let a = generate(&spec(100, 0.2, 0.3), 9).unwrap();
        let b = generate(&spec(100, 0.2, 0.3), 9).unwrap();
        let ser = |c: &SynthCorpus| {
            (
                serde_json::to_string(&c.methods).unwrap(),
                serde_json::to_string(&c.warnings).unwrap(),
            )
        };
        assert_eq!(ser(&a), ser(&b));
        let c = generate(&spec(100, 0.2, 0.3), 10).unwrap();
        assert_ne!(ser(&a), ser(&c));
    }

    #[test]
    fn warnings_sit_inside_the_window() {
        let corpus = generate(&spec(400, 0.25, 0.2), 3).unwrap();
        let by_id: std::collections::HashMap<&str, &RawMethod> = corpus
            .methods
            .iter()
            .map(|m| (m.method_id.as_str(), m))
            .collect();
        for w in &corpus.warnings {
            let m = by_id[w.method_id.as_str()];
            let window_last_line = m.tokens[..m.tokens.len().min(50)]
                .last()
                .unwrap()
                .line;
            assert!(w.line <= window_last_line, "warning beyond window");
        }
    }

    #[test]
    fn bad_rates_are_rejected() {
        assert!(matches!(
            generate(&spec(10, 0.0, 0.1), 1),
            Err(Error::InvalidRate { name: "bug_rate", .. })
        ));
        assert!(matches!(
            generate(&spec(10, 1.0, 0.1), 1),
            Err(Error::InvalidRate { name: "bug_rate", .. })
        ));
        assert!(matches!(
            generate(&spec(10, 0.5, 1.0), 1),
            Err(Error::InvalidRate {
                name: "confounder_rate",
                ..
            })
        ));
    }

    #[test]
    fn trigger_lands_fully_inside_the_window() {
        let corpus = generate(&spec(500, 0.3, 0.0), 11).unwrap();
        let flagged: HashSet<&str> = corpus
            .warnings
            .iter()
            .map(|w| w.method_id.as_str())
            .collect();
        let want: Vec<&str> = trigger_stmt().iter().map(|(l, _)| *l).collect();
        for m in corpus
            .methods
            .iter()
            .filter(|m| flagged.contains(m.method_id.as_str()))
        {
            let pos = m
                .tokens
                .windows(want.len())
                .position(|w| w.iter().map(|t| t.lexeme.as_str()).eq(want.iter().copied()))
                .expect("trigger present");
            assert!(pos + want.len() <= 50, "trigger crosses the window edge");
        }
    }
}

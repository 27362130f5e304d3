//! Hand-written Java lexer. Produces the five token classes used by the
//! pipeline and drops comments. It never needs a full parse: any
//! syntactically plausible fragment lexes.

use crate::error::{Error, Result};

use super::{Token, TokenClass};

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

// Multi-character operators, longest first so munching is maximal.
const MULTI_OPS: &[&str] = &[
    ">>>=", ">>>", ">>=", "<<=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=", "&=", "|=", "^=", "%=", "<<", ">>", "->",
];

const SINGLE_OPS: &[char] = &[
    '=', '>', '<', '!', '~', '?', ':', '+', '-', '*', '/', '&', '|', '^', '%',
];

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    out: Vec<Token>,
}

impl Lexer {
    fn new(source: &str) -> Self {
        Lexer {
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            out: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    /// Consumes one char, keeping the line counter in step. CR, LF, and CRLF
    /// each count as one line terminator.
    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' || (c == '\r' && self.peek() != Some('\n')) {
            self.line += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn push(&mut self, lexeme: String, class: TokenClass, line: u32) {
        self.out.push(Token {
            lexeme,
            class,
            line,
        });
    }

    fn run(mut self) -> Result<Vec<Token>> {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if self.starts_with("//") {
                while let Some(c) = self.peek() {
                    if c == '\n' || c == '\r' {
                        break;
                    }
                    self.bump();
                }
            } else if self.starts_with("/*") {
                self.block_comment()?;
            } else if c == '"' {
                self.string_literal()?;
            } else if c == '\'' {
                self.char_literal()?;
            } else if c.is_ascii_digit() || (c == '.' && is_digit(self.peek_at(1))) {
                self.number();
            } else if is_ident_start(c) {
                self.word();
            } else {
                self.symbol()?;
            }
        }
        Ok(self.out)
    }

    fn block_comment(&mut self) -> Result<()> {
        let start = self.line;
        self.bump();
        self.bump();
        loop {
            if self.starts_with("*/") {
                self.bump();
                self.bump();
                return Ok(());
            }
            if self.bump().is_none() {
                return Err(Error::Unterminated {
                    what: "block comment",
                    line: start,
                });
            }
        }
    }

    fn string_literal(&mut self) -> Result<()> {
        let start = self.line;
        let mut lexeme = String::new();
        lexeme.push(self.bump().unwrap());
        loop {
            match self.peek() {
                None | Some('\n') | Some('\r') => {
                    return Err(Error::Unterminated {
                        what: "string literal",
                        line: start,
                    })
                }
                Some('\\') => {
                    lexeme.push(self.bump().unwrap());
                    match self.bump() {
                        Some(c) => lexeme.push(c),
                        None => {
                            return Err(Error::Unterminated {
                                what: "string literal",
                                line: start,
                            })
                        }
                    }
                }
                Some('"') => {
                    lexeme.push(self.bump().unwrap());
                    self.push(lexeme, TokenClass::Literal, start);
                    return Ok(());
                }
                Some(_) => lexeme.push(self.bump().unwrap()),
            }
        }
    }

    fn char_literal(&mut self) -> Result<()> {
        let start = self.line;
        let mut lexeme = String::new();
        lexeme.push(self.bump().unwrap());
        loop {
            match self.peek() {
                None | Some('\n') | Some('\r') => {
                    return Err(Error::Unterminated {
                        what: "character literal",
                        line: start,
                    })
                }
                Some('\\') => {
                    lexeme.push(self.bump().unwrap());
                    match self.bump() {
                        Some(c) => lexeme.push(c),
                        None => {
                            return Err(Error::Unterminated {
                                what: "character literal",
                                line: start,
                            })
                        }
                    }
                }
                Some('\'') => {
                    lexeme.push(self.bump().unwrap());
                    self.push(lexeme, TokenClass::Literal, start);
                    return Ok(());
                }
                Some(_) => lexeme.push(self.bump().unwrap()),
            }
        }
    }

    fn number(&mut self) {
        let line = self.line;
        let mut lexeme = String::new();
        if self.peek() == Some('0')
            && matches!(self.peek_at(1), Some('x') | Some('X') | Some('b') | Some('B'))
        {
            lexeme.push(self.bump().unwrap());
            lexeme.push(self.bump().unwrap());
            while let Some(c) = self.peek() {
                if c.is_ascii_hexdigit() || c == '_' {
                    lexeme.push(self.bump().unwrap());
                } else {
                    break;
                }
            }
            if matches!(self.peek(), Some('l') | Some('L')) {
                lexeme.push(self.bump().unwrap());
            }
            self.push(lexeme, TokenClass::Literal, line);
            return;
        }

        self.digits(&mut lexeme);
        if self.peek() == Some('.') && !matches!(self.peek_at(1), Some('.')) {
            lexeme.push(self.bump().unwrap());
            self.digits(&mut lexeme);
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let sign_ok = matches!(self.peek_at(1), Some(c) if c.is_ascii_digit())
                || (matches!(self.peek_at(1), Some('+') | Some('-'))
                    && matches!(self.peek_at(2), Some(c) if c.is_ascii_digit()));
            if sign_ok {
                lexeme.push(self.bump().unwrap());
                if matches!(self.peek(), Some('+') | Some('-')) {
                    lexeme.push(self.bump().unwrap());
                }
                self.digits(&mut lexeme);
            }
        }
        if matches!(
            self.peek(),
            Some('f') | Some('F') | Some('d') | Some('D') | Some('l') | Some('L')
        ) {
            lexeme.push(self.bump().unwrap());
        }
        self.push(lexeme, TokenClass::Literal, line);
    }

    fn digits(&mut self, lexeme: &mut String) {
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == '_' {
                lexeme.push(self.bump().unwrap());
            } else {
                break;
            }
        }
    }

    fn word(&mut self) {
        let line = self.line;
        let mut lexeme = String::new();
        while let Some(c) = self.peek() {
            if is_ident_part(c) {
                lexeme.push(self.bump().unwrap());
            } else {
                break;
            }
        }
        // true/false/null are literals in the Java grammar, not keywords.
        let class = if KEYWORDS.contains(&lexeme.as_str()) {
            TokenClass::Keyword
        } else if matches!(lexeme.as_str(), "true" | "false" | "null") {
            TokenClass::Literal
        } else {
            TokenClass::Identifier
        };
        self.push(lexeme, class, line);
    }

    fn symbol(&mut self) -> Result<()> {
        let line = self.line;
        // Multi-character separators first.
        for sep in ["...", "::"] {
            if self.starts_with(sep) {
                for _ in 0..sep.len() {
                    self.bump();
                }
                self.push(sep.to_string(), TokenClass::Separator, line);
                return Ok(());
            }
        }
        for op in MULTI_OPS {
            if self.starts_with(op) {
                for _ in 0..op.len() {
                    self.bump();
                }
                self.push((*op).to_string(), TokenClass::Operator, line);
                return Ok(());
            }
        }
        let c = self.peek().unwrap();
        if matches!(c, '(' | ')' | '{' | '}' | '[' | ']' | ';' | ',' | '.' | '@') {
            self.bump();
            self.push(c.to_string(), TokenClass::Separator, line);
            return Ok(());
        }
        if SINGLE_OPS.contains(&c) {
            self.bump();
            self.push(c.to_string(), TokenClass::Operator, line);
            return Ok(());
        }
        Err(Error::UnexpectedChar { ch: c, line })
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    is_ident_start(c) || c.is_numeric()
}

fn is_digit(c: Option<char>) -> bool {
    matches!(c, Some(c) if c.is_ascii_digit())
}

/// Lexes a source fragment into tokens. Comments and whitespace produce no
/// tokens; every other lexical unit yields exactly one token in source order.
pub fn lex(source: &str) -> Result<Vec<Token>> {
    Lexer::new(source).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(tokens: &[Token]) -> Vec<(String, TokenClass, u32)> {
        tokens
            .iter()
            .map(|t| (t.lexeme.clone(), t.class, t.line))
            .collect()
    }

    #[test]
    fn statement_lexes_to_five_tokens() {
        let tokens = lex("int x = 5;").unwrap();
        assert_eq!(
            kinds(&tokens),
            vec![
                ("int".into(), TokenClass::Keyword, 1),
                ("x".into(), TokenClass::Identifier, 1),
                ("=".into(), TokenClass::Operator, 1),
                ("5".into(), TokenClass::Literal, 1),
                (";".into(), TokenClass::Separator, 1),
            ]
        );
    }

    #[test]
    fn line_comment_dropped_and_line_counted() {
        let tokens = lex("// note\nreturn;").unwrap();
        assert_eq!(
            kinds(&tokens),
            vec![
                ("return".into(), TokenClass::Keyword, 2),
                (";".into(), TokenClass::Separator, 2),
            ]
        );
    }

    #[test]
    fn call_with_string_argument() {
        let tokens = lex("a.equals(\"abc\")").unwrap();
        let lexemes: Vec<&str> = tokens.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(lexemes, vec!["a", ".", "equals", "(", "\"abc\"", ")"]);
        let classes: Vec<TokenClass> = tokens.iter().map(|t| t.class).collect();
        assert_eq!(
            classes,
            vec![
                TokenClass::Identifier,
                TokenClass::Separator,
                TokenClass::Identifier,
                TokenClass::Separator,
                TokenClass::Literal,
                TokenClass::Separator,
            ]
        );
    }

    #[test]
    fn block_comment_spans_lines() {
        let tokens = lex("/* a\n b\n c */ x").unwrap();
        assert_eq!(kinds(&tokens), vec![("x".into(), TokenClass::Identifier, 3)]);
    }

    #[test]
    fn annotation_lexes_as_at_plus_identifier() {
        let tokens = lex("@Override\nvoid f()").unwrap();
        assert_eq!(tokens[0].lexeme, "@");
        assert_eq!(tokens[0].class, TokenClass::Separator);
        assert_eq!(tokens[1].lexeme, "Override");
        assert_eq!(tokens[1].class, TokenClass::Identifier);
    }

    #[test]
    fn generics_lex_as_angle_operators() {
        let tokens = lex("List<String> xs").unwrap();
        assert_eq!(tokens[1].lexeme, "<");
        assert_eq!(tokens[1].class, TokenClass::Operator);
        assert_eq!(tokens[3].lexeme, ">");
        assert_eq!(tokens[3].class, TokenClass::Operator);
    }

    #[test]
    fn numeric_literal_shapes() {
        for (src, want) in [
            ("0x1A_F", "0x1A_F"),
            ("0b1010L", "0b1010L"),
            ("1_000_000", "1_000_000"),
            ("1.5e-3", "1.5e-3"),
            ("2.0f", "2.0f"),
            (".5d", ".5d"),
            ("42L", "42L"),
            ("1.", "1."),
        ] {
            let tokens = lex(src).unwrap();
            assert_eq!(tokens.len(), 1, "source {src:?}");
            assert_eq!(tokens[0].lexeme, want);
            assert_eq!(tokens[0].class, TokenClass::Literal);
        }
    }

    #[test]
    fn boolean_and_null_are_literals() {
        let tokens = lex("true false null").unwrap();
        assert!(tokens.iter().all(|t| t.class == TokenClass::Literal));
    }

    #[test]
    fn string_with_escaped_quote() {
        let tokens = lex(r#"s = "a\"b";"#).unwrap();
        assert_eq!(tokens[2].lexeme, r#""a\"b""#);
        assert_eq!(tokens[2].class, TokenClass::Literal);
    }

    #[test]
    fn char_escapes() {
        let tokens = lex(r"c = '\n';").unwrap();
        assert_eq!(tokens[2].lexeme, r"'\n'");
        assert_eq!(tokens[2].class, TokenClass::Literal);
    }

    #[test]
    fn unterminated_string_names_line() {
        let err = lex("int x;\nString s = \"oops").unwrap_err();
        match err {
            Error::Unterminated { what, line } => {
                assert_eq!(what, "string literal");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unterminated_block_comment_names_line() {
        let err = lex("x;\n/* never closed").unwrap_err();
        match err {
            Error::Unterminated { what, line } => {
                assert_eq!(what, "block comment");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn shift_operators_munch_maximally() {
        let tokens = lex("a >>>= b >>> c >> d").unwrap();
        let ops: Vec<&str> = tokens
            .iter()
            .filter(|t| t.class == TokenClass::Operator)
            .map(|t| t.lexeme.as_str())
            .collect();
        assert_eq!(ops, vec![">>>=", ">>>", ">>"]);
    }

    #[test]
    fn varargs_and_method_ref_are_separators() {
        let tokens = lex("f(int... xs); String::length").unwrap();
        assert!(tokens
            .iter()
            .any(|t| t.lexeme == "..." && t.class == TokenClass::Separator));
        assert!(tokens
            .iter()
            .any(|t| t.lexeme == "::" && t.class == TokenClass::Separator));
    }

    #[test]
    fn crlf_counts_one_line() {
        let tokens = lex("a\r\nb\rc\nd").unwrap();
        let lines: Vec<u32> = tokens.iter().map(|t| t.line).collect();
        assert_eq!(lines, vec![1, 2, 3, 4]);
    }

    // Re-lexing the space-joined lexemes reproduces the same lexemes and
    // classes (lines collapse to one).
    #[test]
    fn relex_of_rendered_stream_is_fixpoint() {
        let sources = [
            "public int f(int a, int b) { return a + b; // sum\n}",
            "List<Map<String, Integer>> m = new HashMap<>();",
            "if (a >= 0 && b != null) { c = a << 2; }",
            "double d = .5e+10d; char c = '\\'';",
            "@SuppressWarnings(\"unchecked\") void g() {}",
        ];
        for src in sources {
            let first = lex(src).unwrap();
            let rendered: String = first
                .iter()
                .map(|t| t.lexeme.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let second = lex(&rendered).unwrap();
            assert_eq!(
                first.iter().map(|t| (&t.lexeme, t.class)).collect::<Vec<_>>(),
                second
                    .iter()
                    .map(|t| (&t.lexeme, t.class))
                    .collect::<Vec<_>>(),
                "fixpoint failed for {src:?}"
            );
        }
    }
}

//! Brace-matching method extraction from a lexed compilation unit.
//!
//! The extractor scans member declarations inside type bodies. A member that
//! ends in a parameter list followed by a braced body is a method (or
//! constructor); its tokens run from the first signature token through the
//! matching closing brace. Bodiless members (abstract and interface
//! signatures, fields) produce nothing. Nested and anonymous classes stay
//! inside the enclosing method's token span.

use crate::error::{Error, Result};
use crate::hash::fnv1a64_parts;

use super::{RawMethod, Token, TokenClass};

/// Extracts every non-abstract method from one compilation unit's tokens.
pub fn extract_methods(tokens: &[Token], file: &str) -> Result<Vec<RawMethod>> {
    let mut out = Vec::new();
    let end = scan_members(tokens, 0, file, false, &mut out)?;
    debug_assert_eq!(end, tokens.len());
    Ok(out)
}

/// Walks the members of one container (compilation unit or type body)
/// starting at `start`. Returns the index just past the container's closing
/// brace (or `tokens.len()` at the top level).
fn scan_members(
    tokens: &[Token],
    start: usize,
    file: &str,
    nested: bool,
    out: &mut Vec<RawMethod>,
) -> Result<usize> {
    let mut i = start;
    let mut member_start = start;
    while i < tokens.len() {
        match tokens[i].lexeme.as_str() {
            ";" => {
                i += 1;
                member_start = i;
            }
            "}" => {
                if nested {
                    return Ok(i + 1);
                }
                return Err(Error::UnbalancedBraces {
                    line: tokens[i].line,
                });
            }
            "{" => {
                let member = &tokens[member_start..i];
                if is_type_declaration(member) {
                    i = scan_members(tokens, i + 1, file, true, out)?;
                    member_start = i;
                } else if let Some(params_close) = method_signature_end(member) {
                    let close = find_block_end(tokens, i)?;
                    let span = tokens[member_start..=close].to_vec();
                    let signature = &tokens[member_start..=member_start + params_close];
                    out.push(RawMethod {
                        method_id: method_id(file, signature),
                        file: file.to_string(),
                        tokens: span,
                    });
                    i = close + 1;
                    member_start = i;
                } else {
                    // Initializer block, enum-constant body, field initialized
                    // with an anonymous class, and similar: skip wholesale.
                    let close = find_block_end(tokens, i)?;
                    i = close + 1;
                    member_start = i;
                }
            }
            _ => i += 1,
        }
    }
    if nested {
        // Ran out of tokens inside a type body.
        return Err(Error::UnbalancedBraces {
            line: tokens.last().map(|t| t.line).unwrap_or(1),
        });
    }
    Ok(i)
}

/// Stable method identity: `<file>:<startline>:<fnv1a64 of signature lexemes>`.
fn method_id(file: &str, signature: &[Token]) -> String {
    let hash = fnv1a64_parts(signature.iter().map(|t| t.lexeme.as_str()));
    format!("{}:{}:{:016x}", file, signature[0].line, hash)
}

/// True when the member tokens start a class/interface/enum/annotation body.
fn is_type_declaration(member: &[Token]) -> bool {
    let mut depth = 0i32;
    for t in member {
        match t.lexeme.as_str() {
            "(" | "[" => depth += 1,
            ")" | "]" => depth -= 1,
            "class" | "interface" | "enum" if depth == 0 && t.class == TokenClass::Keyword => {
                return true;
            }
            _ => {}
        }
    }
    false
}

/// Checks whether `member` (the tokens between the previous member boundary
/// and an opening brace) is a method header. Returns the index of the `)`
/// closing the parameter list if so.
fn method_signature_end(member: &[Token]) -> Option<usize> {
    // Strip a trailing throws clause (identifiers, dots, commas, annotations).
    let mut j = member.len();
    while j > 0 {
        let t = &member[j - 1];
        let strippable = t.class == TokenClass::Identifier
            || matches!(t.lexeme.as_str(), "," | "." | "@")
            || (t.class == TokenClass::Keyword && t.lexeme == "throws");
        if strippable {
            j -= 1;
        } else {
            break;
        }
    }
    if j == 0 || member[j - 1].lexeme != ")" {
        return None;
    }
    let close = j - 1;

    // Matching '(' of the parameter list.
    let mut depth = 0i32;
    let mut open = None;
    for k in (0..=close).rev() {
        match member[k].lexeme.as_str() {
            ")" => depth += 1,
            "(" => {
                depth -= 1;
                if depth == 0 {
                    open = Some(k);
                    break;
                }
            }
            _ => {}
        }
    }
    let open = open?;
    if open == 0 {
        return None;
    }

    // The token before '(' must be the method (or constructor) name.
    let name = &member[open - 1];
    if name.class != TokenClass::Identifier {
        return None;
    }
    if open >= 2 {
        let before = &member[open - 2];
        // `new Foo(...) {` is an anonymous class; `record Foo(...) {` a record.
        if before.lexeme == "new" || before.lexeme == "record" {
            return None;
        }
    }

    // A top-level '=' earlier in the member means a field initializer.
    let mut d = 0i32;
    for t in &member[..open - 1] {
        match t.lexeme.as_str() {
            "(" | "[" => d += 1,
            ")" | "]" => d -= 1,
            "=" if d == 0 && t.class == TokenClass::Operator => return None,
            _ => {}
        }
    }
    Some(close)
}

/// Index of the `}` matching the `{` at `open`.
fn find_block_end(tokens: &[Token], open: usize) -> Result<usize> {
    let mut depth = 0i32;
    for (k, t) in tokens.iter().enumerate().skip(open) {
        match t.lexeme.as_str() {
            "{" => depth += 1,
            "}" => {
                depth -= 1;
                if depth == 0 {
                    return Ok(k);
                }
            }
            _ => {}
        }
    }
    Err(Error::UnbalancedBraces {
        line: tokens[open].line,
    })
}

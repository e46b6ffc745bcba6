//! A small tokenizer shared by the script-like manifests (meson, xmake,
//! conanfile.py). It only knows enough about each language to skip comments
//! and pull out string literals with their line numbers.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Syntax {
    /// `#` comments, `'`/`"` strings with `'''`/`"""` long forms.
    Python,
    /// `--` and `--[[ ]]` comments, `'`/`"` strings and `[[ ]]` long strings.
    Lua,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Str(String),
    Punct(char),
    Newline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub line: usize,
}

impl Token {
    pub(crate) fn is_punct(&self, c: char) -> bool {
        self.kind == TokenKind::Punct(c)
    }

    pub(crate) fn as_str_lit(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Str(s) => Some(s),
            _ => None,
        }
    }

    pub(crate) fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(s) => Some(s),
            _ => None,
        }
    }
}

pub(crate) fn tokenize(src: &str, syntax: Syntax) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                tokens.push(Token {
                    kind: TokenKind::Newline,
                    line,
                });
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' if syntax == Syntax::Python => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '-' if syntax == Syntax::Lua && chars.get(i + 1) == Some(&'-') => {
                i += 2;
                if let Some(level) = long_bracket_level(&chars, i) {
                    let (end, lines) = skip_long_bracket(&chars, i, level);
                    line += lines;
                    i = end;
                } else {
                    while i < chars.len() && chars[i] != '\n' {
                        i += 1;
                    }
                }
            }
            '[' if syntax == Syntax::Lua && long_bracket_level(&chars, i).is_some() => {
                let level = long_bracket_level(&chars, i).unwrap_or(0);
                let body_start = i + level + 2;
                let (end, lines) = skip_long_bracket(&chars, i, level);
                let body_end = if end >= body_start + level + 2 && chars[end - 1] == ']' {
                    end - (level + 2)
                } else {
                    end
                };
                let body: String = chars[body_start..body_end.max(body_start)].iter().collect();
                tokens.push(Token {
                    kind: TokenKind::Str(body.trim_start_matches('\n').to_string()),
                    line,
                });
                line += lines;
                i = end;
            }
            '\'' | '"' => {
                let (value, end, lines) = read_quoted(&chars, i, syntax, false);
                tokens.push(Token {
                    kind: TokenKind::Str(value),
                    line,
                });
                line += lines;
                i = end;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                // Python string prefixes: r'', b'', f'', rb'' ...
                if syntax == Syntax::Python
                    && i < chars.len()
                    && (chars[i] == '\'' || chars[i] == '"')
                    && word.len() <= 2
                    && word.chars().all(|ch| "rRbBfFuU".contains(ch))
                {
                    let raw = word.contains(['r', 'R']);
                    let (value, end, lines) = read_quoted(&chars, i, syntax, raw);
                    tokens.push(Token {
                        kind: TokenKind::Str(value),
                        line,
                    });
                    line += lines;
                    i = end;
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Ident(word),
                        line,
                    });
                }
            }
            c => {
                tokens.push(Token {
                    kind: TokenKind::Punct(c),
                    line,
                });
                i += 1;
            }
        }
    }
    tokens
}

/// `[[`, `[=[`, `[==[` ... returns the number of `=` signs.
fn long_bracket_level(chars: &[char], at: usize) -> Option<usize> {
    if chars.get(at) != Some(&'[') {
        return None;
    }
    let mut j = at + 1;
    while chars.get(j) == Some(&'=') {
        j += 1;
    }
    (chars.get(j) == Some(&'[')).then_some(j - at - 1)
}

/// Returns the index just past the closing bracket and the newlines crossed.
fn skip_long_bracket(chars: &[char], at: usize, level: usize) -> (usize, usize) {
    let mut i = at + level + 2;
    let mut lines = 0;
    while i < chars.len() {
        if chars[i] == '\n' {
            lines += 1;
        }
        if chars[i] == ']' {
            let mut j = i + 1;
            let mut eq = 0;
            while chars.get(j) == Some(&'=') {
                eq += 1;
                j += 1;
            }
            if eq == level && chars.get(j) == Some(&']') {
                return (j + 1, lines);
            }
        }
        i += 1;
    }
    (chars.len(), lines)
}

/// Reads a quoted string starting at `at`. Returns (value, end index, newlines crossed).
fn read_quoted(chars: &[char], at: usize, syntax: Syntax, raw: bool) -> (String, usize, usize) {
    let quote = chars[at];
    let triple = syntax == Syntax::Python
        && chars.get(at + 1) == Some(&quote)
        && chars.get(at + 2) == Some(&quote);
    let mut i = if triple { at + 3 } else { at + 1 };
    let mut value = String::new();
    let mut lines = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' && !raw {
            if let Some(&next) = chars.get(i + 1) {
                if next == '\n' {
                    lines += 1;
                }
                value.push(next);
                i += 2;
                continue;
            }
        }
        if c == quote {
            if !triple {
                return (value, i + 1, lines);
            }
            if chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                return (value, i + 3, lines);
            }
        }
        if c == '\n' {
            if !triple {
                // unterminated single-line string
                return (value, i, lines);
            }
            lines += 1;
        }
        value.push(c);
        i += 1;
    }
    (value, i, lines)
}

/// Finds the index of the token closing the bracket opened at `open`.
pub(crate) fn matching_close(tokens: &[Token], open: usize) -> usize {
    let mut depth = 0i32;
    for (idx, tok) in tokens.iter().enumerate().skip(open) {
        match tok.kind {
            TokenKind::Punct('(') | TokenKind::Punct('[') | TokenKind::Punct('{') => depth += 1,
            TokenKind::Punct(')') | TokenKind::Punct(']') | TokenKind::Punct('}') => {
                depth -= 1;
                if depth == 0 {
                    return idx;
                }
            }
            _ => {}
        }
    }
    tokens.len()
}

/// String literals directly inside the call whose `(` is at `open`, skipping
/// anything nested in inner brackets.
pub(crate) fn top_level_strings(tokens: &[Token], open: usize) -> Vec<&Token> {
    let close = matching_close(tokens, open);
    let mut depth = 0i32;
    let mut out = Vec::new();
    for tok in &tokens[open..close.min(tokens.len())] {
        match tok.kind {
            TokenKind::Punct('(') | TokenKind::Punct('[') | TokenKind::Punct('{') => depth += 1,
            TokenKind::Punct(')') | TokenKind::Punct(']') | TokenKind::Punct('}') => depth -= 1,
            TokenKind::Str(_) if depth == 1 => out.push(tok),
            _ => {}
        }
    }
    out
}

/// First positional argument of the call at `open`, if it is a string literal.
pub(crate) fn first_string_arg(tokens: &[Token], open: usize) -> Option<&Token> {
    let next = tokens[open + 1..]
        .iter()
        .find(|t| t.kind != TokenKind::Newline)?;
    next.as_str_lit().map(|_| next)
}

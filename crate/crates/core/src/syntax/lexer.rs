use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    Skip,
    If,
    Then,
    Else,
    End,
    While,
    Do,
    Begin,
    Var,
    Proc,
    Is,
    Call,
    Remove,
    Par,
    Not,
    And,
    Or,
    True,
    False,
    Lambda,
    RunB,
    RunC,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    EqEq,
    Gt,
    Ge,
    Lt,
    Le,
    Ne,
    Plus,
    Minus,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Skip => "skip",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::End => "end",
            Tok::While => "while",
            Tok::Do => "do",
            Tok::Begin => "begin",
            Tok::Var => "var",
            Tok::Proc => "proc",
            Tok::Is => "is",
            Tok::Call => "call",
            Tok::Remove => "remove",
            Tok::Par => "par",
            Tok::Not => "not",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Lambda => "λ",
            Tok::RunB => "runB",
            Tok::RunC => "runC",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Ne => "!=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "skip" => Tok::Skip,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "end" => Tok::End,
        "while" => Tok::While,
        "do" => Tok::Do,
        "begin" => Tok::Begin,
        "var" => Tok::Var,
        "proc" => Tok::Proc,
        "is" => Tok::Is,
        "call" => Tok::Call,
        "remove" => Tok::Remove,
        "par" => Tok::Par,
        "not" => Tok::Not,
        "and" => Tok::And,
        "or" => Tok::Or,
        "true" => Tok::True,
        "false" => Tok::False,
        "lambda" => Tok::Lambda,
        "runB" => Tok::RunB,
        "runC" => Tok::RunC,
        _ => return None,
    })
}

/// Split source text into tokens. `//` starts a line comment.
///
/// Identifiers may carry `:`-separated prefixes and a `.N` version suffix so
/// that renamed construct identifiers such as `c1:c2:b2.3` lex as one token.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let is_start = |c: char| c.is_ascii_alphabetic() || c == '_';
    let is_cont = |c: char| c.is_ascii_alphanumeric() || c == '_';

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok: Tok| {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            })
        };
        if is_start(c) {
            let start = i;
            i += 1;
            loop {
                while i < chars.len() && is_cont(chars[i]) {
                    i += 1;
                }
                match (chars.get(i), chars.get(i + 1)) {
                    (Some(':'), Some(&n)) if is_start(n) => i += 1,
                    (Some('.'), Some(&n)) if n.is_ascii_digit() => i += 1,
                    _ => break,
                }
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            push(&mut out, keyword(&word).unwrap_or(Tok::Ident(word)));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse::<i64>().map_err(|_| SyntaxError {
                line: tl,
                col: tc,
                message: format!("integer literal `{text}` out of range"),
            })?;
            push(&mut out, Tok::Int(n));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let double = match two.as_str() {
            "==" => Some(Tok::EqEq),
            ">=" => Some(Tok::Ge),
            "<=" => Some(Tok::Le),
            "!=" => Some(Tok::Ne),
            _ => None,
        };
        if let Some(tok) = double {
            advance(2, &mut i, &mut col);
            push(&mut out, tok);
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '=' => Tok::Assign,
            '>' => Tok::Gt,
            '<' => Tok::Lt,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            'λ' => Tok::Lambda,
            '¬' => Tok::Not,
            '∧' => Tok::And,
            '∨' => Tok::Or,
            other => {
                return Err(SyntaxError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        advance(1, &mut i, &mut col);
        push(&mut out, tok);
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn renamed_identifiers_are_single_tokens() {
        assert_eq!(
            kinds("begin c1:c2:b2 w1.0"),
            vec![
                Tok::Begin,
                Tok::Ident("c1:c2:b2".into()),
                Tok::Ident("w1.0".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn operators_and_positions() {
        let toks = tokenize("x >= 1;\n  y != -2").unwrap();
        assert_eq!(toks[1].tok, Tok::Ge);
        assert_eq!((toks[4].line, toks[4].col), (2, 3));
        assert_eq!(toks[5].tok, Tok::Ne);
        assert_eq!(toks[6].tok, Tok::Minus);
    }

    #[test]
    fn bad_character_reports_location() {
        let err = tokenize("x = 1;\n y = 2 $").unwrap_err();
        assert_eq!((err.line, err.col), (2, 8));
    }
}

use thiserror::Error;

use crate::logic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("unexpected `{0}` at column {1}")]
    Unexpected(String, usize),
    #[error("unexpected end of expression")]
    Eof,
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if "~&|^()!".contains(ch) {
            out.push((Tok::Op(if ch == '!' { '~' } else { ch }), i + 1));
            i += 1;
        } else if ch.is_ascii_alphanumeric() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start + 1));
        } else {
            return Err(ExprError::Unexpected(ch.to_string(), i + 1));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    ports: &'a [&'a str],
}

// Precedence, loosest first: |, ^, &, then unary ~.
impl Parser<'_> {
    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn binary(&mut self, level: usize) -> Result<u8, ExprError> {
        const OPS: [char; 3] = ['|', '^', '&'];
        if level == OPS.len() {
            return self.unary();
        }
        let mut acc = self.binary(level + 1)?;
        while self.peek_op() == Some(OPS[level]) {
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            acc = match OPS[level] {
                '|' => acc | rhs,
                '^' => acc ^ rhs,
                _ => acc & rhs,
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<u8, ExprError> {
        let Some((tok, col)) = self.toks.get(self.pos).cloned() else {
            return Err(ExprError::Eof);
        };
        self.pos += 1;
        match tok {
            Tok::Op('~') => Ok(!self.unary()?),
            Tok::Op('(') => {
                let v = self.binary(0)?;
                match self.toks.get(self.pos) {
                    Some((Tok::Op(')'), _)) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    Some((t, c)) => Err(ExprError::Unexpected(show(t), *c)),
                    None => Err(ExprError::Eof),
                }
            }
            Tok::Ident(s) if s == "0" => Ok(logic::FALSE),
            Tok::Ident(s) if s == "1" => Ok(logic::TRUE),
            Tok::Ident(s) => match self.ports.iter().position(|p| *p == s) {
                Some(i) => Ok(logic::VARS[i]),
                None => Err(ExprError::UnknownVar(s)),
            },
            t => Err(ExprError::Unexpected(show(&t), col)),
        }
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => s.clone(),
        Tok::Op(c) => c.to_string(),
    }
}

/// Compiles a boolean expression over up to three named ports into a truth
/// table (port `i` is cell input `i`).
pub fn parse_expr(text: &str, ports: &[&str]) -> Result<u8, ExprError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, ports };
    let v = p.binary(0)?;
    match p.toks.get(p.pos) {
        None => Ok(v),
        Some((t, c)) => Err(ExprError::Unexpected(show(t), *c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: [&str; 3] = ["a", "b", "c"];

    #[test]
    fn operators_and_precedence() {
        assert_eq!(parse_expr("a & b", &P).unwrap(), logic::AND);
        assert_eq!(parse_expr("~a & b", &P).unwrap(), logic::ANDNOT);
        assert_eq!(parse_expr("a | b & c", &P).unwrap(), logic::VAR_A | (logic::VAR_B & logic::VAR_C));
        assert_eq!(parse_expr("a ^ b ^ c", &P).unwrap(), logic::XOR3);
        assert_eq!(parse_expr("(b&c)|a&(b^c)", &P).unwrap(), logic::MAJ);
        assert_eq!(parse_expr("~((a & b) | (~a & c))", &P).unwrap(), !logic::SEL);
        assert_eq!(parse_expr("0", &P).unwrap(), 0);
        assert_eq!(parse_expr("1", &P).unwrap(), 0xFF);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_expr("a &", &P), Err(ExprError::Eof));
        assert_eq!(parse_expr("a b", &P), Err(ExprError::Unexpected("b".into(), 3)));
        assert_eq!(parse_expr("d", &P), Err(ExprError::UnknownVar("d".into())));
        assert!(matches!(parse_expr("a + b", &P), Err(ExprError::Unexpected(..))));
        assert_eq!(parse_expr("c", &P[..2]), Err(ExprError::UnknownVar("c".into())));
    }
}

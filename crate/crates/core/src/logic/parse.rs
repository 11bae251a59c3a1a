//! Text syntax for formulas.
//!
//! ```text
//! formula := or ("=>" formula)?            right associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" atom | "D{" ids "}" unary | "C{" ids "}" unary | primary
//! primary := "true" | "false" | atom | variable | "(" formula ")"
//!          | "nu" variable "." formula     body extends maximally right
//! atom    := ("input" | "decide") ("(" num ")" | "_" num) "=" num
//! ```
//!
//! `~` applies to atoms only; `=>` requires a propositional antecedent and
//! expands to a disjunction; `C{..}` expands to its fixpoint definition.

use crate::error::{Error, Result};
use crate::logic::{common_knowledge, implies, AtomicProp, Formula};
use crate::simplicial::ProcessId;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Eq,
    Implies,
    Tilde,
    Amp,
    Pipe,
}

fn syntax<T>(pos: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::FormulaSyntax { pos, message: message.into() })
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, start));
                i += 1;
            }
            '{' => {
                toks.push((Tok::LBrace, start));
                i += 1;
            }
            '}' => {
                toks.push((Tok::RBrace, start));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, start));
                i += 1;
            }
            '.' => {
                toks.push((Tok::Dot, start));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Tilde, start));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, start));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, start));
                i += 1;
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Implies, start));
                    i += 2;
                } else {
                    toks.push((Tok::Eq, start));
                    i += 1;
                }
            }
            '0'..='9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let num: u32 = text[i..j]
                    .parse()
                    .map_err(|_| Error::FormulaSyntax {
                        pos: start,
                        message: format!("number out of range: {}", &text[i..j]),
                    })?;
                toks.push((Tok::Num(num), start));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && ((bytes[j] as char).is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                toks.push((Tok::Ident(text[i..j].to_string()), start));
                i = j;
            }
            other => return syntax(start, format!("unexpected character {other:?}")),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            syntax(self.here(), format!("expected {what}"))
        }
    }

    fn expect_num(&mut self, what: &str) -> Result<u32> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => syntax(self.here(), format!("expected {what}")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            let arrow = self.here();
            self.pos += 1;
            let rhs = self.formula()?;
            return implies(&lhs, rhs).map_err(|_| Error::FormulaSyntax {
                pos: arrow,
                message: "antecedent of => must be propositional".into(),
            });
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn group(&mut self) -> Result<BTreeSet<ProcessId>> {
        let open = self.here();
        self.expect(Tok::LBrace, "{")?;
        let mut ids = BTreeSet::new();
        loop {
            ids.insert(ProcessId(self.expect_num("process id")?));
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::RBrace) => break,
                _ => return syntax(open, "unterminated process group"),
            }
        }
        Ok(ids)
    }

    fn unary(&mut self) -> Result<Formula> {
        enum Head {
            Neg,
            Dist,
            Common,
            Other,
        }
        let head = match self.peek() {
            Some(Tok::Tilde) => Head::Neg,
            Some(Tok::Ident(id)) if id == "D" && self.next_is_brace() => Head::Dist,
            Some(Tok::Ident(id)) if id == "C" && self.next_is_brace() => Head::Common,
            _ => Head::Other,
        };
        let at = self.here();
        match head {
            Head::Neg => {
                self.pos += 1;
                let is_atom = matches!(self.peek(), Some(Tok::Ident(id)) if is_atom_head(id));
                if is_atom {
                    Ok(Formula::NegAtom(self.atom()?))
                } else {
                    syntax(at, "~ applies to an atom")
                }
            }
            Head::Dist => {
                self.pos += 1;
                let group = self.group()?;
                let body = self.unary()?;
                Ok(Formula::DKnow(group, Box::new(body)))
            }
            Head::Common => {
                self.pos += 1;
                let group = self.group()?;
                let body = self.unary()?;
                common_knowledge(group, body).map_err(|e| Error::FormulaSyntax {
                    pos: at,
                    message: format!("bad common knowledge: {e}"),
                })
            }
            Head::Other => self.primary(),
        }
    }

    fn next_is_brace(&self) -> bool {
        matches!(self.toks.get(self.pos + 1), Some((Tok::LBrace, _)))
    }

    fn primary(&mut self) -> Result<Formula> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, ")")?;
                Ok(f)
            }
            Some(Tok::Ident(id)) => match id.as_str() {
                "true" => {
                    self.pos += 1;
                    Ok(Formula::truth())
                }
                "false" => {
                    self.pos += 1;
                    Ok(Formula::falsity())
                }
                "nu" => {
                    self.pos += 1;
                    let var = match self.bump() {
                        Some(Tok::Ident(v)) if !is_keyword(&v) && !is_atom_head(&v) => v,
                        _ => return syntax(at, "expected fixpoint variable after nu"),
                    };
                    self.expect(Tok::Dot, ". after fixpoint variable")?;
                    let body = self.formula()?;
                    Ok(Formula::Nu(var, Box::new(body)))
                }
                _ if is_atom_head(&id) => Ok(Formula::Atom(self.atom()?)),
                _ if is_keyword(&id) => syntax(at, format!("unexpected keyword {id}")),
                _ => {
                    self.pos += 1;
                    Ok(Formula::Var(id))
                }
            },
            _ => syntax(at, "expected a formula"),
        }
    }

    /// Both spellings: `input(0)=1` and `input_0=1`.
    fn atom(&mut self) -> Result<AtomicProp> {
        let at = self.here();
        let Some(Tok::Ident(id)) = self.bump() else {
            return syntax(at, "expected an atom");
        };
        let (kind, rest) = if let Some(rest) = id.strip_prefix("input") {
            (crate::logic::AtomKind::Input, rest)
        } else if let Some(rest) = id.strip_prefix("decide") {
            (crate::logic::AtomKind::Decide, rest)
        } else {
            return syntax(at, format!("expected input or decide, got {id}"));
        };
        let process = if rest.is_empty() {
            self.expect(Tok::LParen, "( after atom name")?;
            let p = self.expect_num("process id")?;
            self.expect(Tok::RParen, ")")?;
            p
        } else {
            match rest.strip_prefix('_').map(str::parse) {
                Some(Ok(p)) => p,
                _ => return syntax(at, format!("bad process id in atom {id}")),
            }
        };
        self.expect(Tok::Eq, "= after atom process")?;
        let value = self.expect_num("atom value")?;
        Ok(AtomicProp { kind, process: ProcessId(process), value })
    }
}

fn is_keyword(id: &str) -> bool {
    matches!(id, "true" | "false" | "nu" | "D" | "C")
}

fn is_atom_head(id: &str) -> bool {
    id == "input"
        || id == "decide"
        || id.strip_prefix("input_").is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
        || id.strip_prefix("decide_").is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

/// Parses one formula, consuming the whole input.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return syntax(p.here(), "trailing input after formula");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(f: &Formula) {
        let text = f.to_string();
        let parsed = parse_formula(&text).unwrap();
        assert_eq!(&parsed, f, "through {text}");
    }

    #[test]
    fn both_atom_spellings_parse_identically() {
        let a = parse_formula("input(0)=1").unwrap();
        let b = parse_formula("input_0=1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, Formula::Atom(AtomicProp::input(0, 1)));
        assert_eq!(
            parse_formula("decide_2=0").unwrap(),
            Formula::Atom(AtomicProp::decide(2, 0))
        );
    }

    #[test]
    fn precedence_is_tilde_and_or_implies() {
        let f = parse_formula("~input_0=0 & input_1=1 | decide_0=0").unwrap();
        assert_eq!(
            f,
            Formula::or([
                Formula::and([
                    Formula::NegAtom(AtomicProp::input(0, 0)),
                    Formula::Atom(AtomicProp::input(1, 1)),
                ]),
                Formula::Atom(AtomicProp::decide(0, 0)),
            ])
        );
        let g = parse_formula("input_0=0 => input_1=1 => decide_0=0").unwrap();
        // right associative: a => (b => c), expanded to disjunctions
        assert_eq!(
            g.to_string(),
            "~input_0=0 | ~input_1=1 | decide_0=0"
        );
    }

    #[test]
    fn modalities_bind_tighter_than_conjunction() {
        let f = parse_formula("D{0,1} input_0=1 & input_1=1").unwrap();
        assert_eq!(
            f,
            Formula::and([
                Formula::dknow([0, 1], Formula::Atom(AtomicProp::input(0, 1))),
                Formula::Atom(AtomicProp::input(1, 1)),
            ])
        );
        let g = parse_formula("D{0} D{1} input_0=1").unwrap();
        assert_eq!(
            g,
            Formula::dknow([0], Formula::dknow([1], Formula::Atom(AtomicProp::input(0, 1))))
        );
    }

    #[test]
    fn fixpoint_body_extends_to_the_right() {
        let f = parse_formula("nu Z. input_0=1 & D{0} Z | decide_0=0").unwrap();
        let Formula::Nu(z, body) = f else { panic!("expected nu") };
        assert_eq!(z, "Z");
        assert!(matches!(*body, Formula::Or(_)));
    }

    #[test]
    fn common_knowledge_expands_at_parse_time() {
        let f = parse_formula("C{0,1} input_0=1").unwrap();
        let direct = common_knowledge(
            [ProcessId(0), ProcessId(1)],
            Formula::Atom(AtomicProp::input(0, 1)),
        )
        .unwrap();
        assert_eq!(f, direct);
    }

    #[test]
    fn implication_antecedent_must_be_propositional() {
        assert!(parse_formula("input_0=0 => decide_0=0").is_ok());
        let err = parse_formula("D{0} input_0=0 => decide_0=0").unwrap_err();
        assert!(matches!(err, Error::FormulaSyntax { .. }));
    }

    #[test]
    fn error_positions_point_at_the_offence() {
        match parse_formula("input_0=1 & $").unwrap_err() {
            Error::FormulaSyntax { pos, .. } => assert_eq!(pos, 12),
            other => panic!("unexpected {other}"),
        }
        match parse_formula("input_0=1 input_1=1").unwrap_err() {
            Error::FormulaSyntax { pos, .. } => assert_eq!(pos, 10),
            other => panic!("unexpected {other}"),
        }
        assert!(parse_formula("").is_err());
        assert!(parse_formula("~D{0} input_0=1").is_err());
        assert!(parse_formula("nu input_0=1 . true").is_err());
        assert!(parse_formula("input_0").is_err());
    }

    #[test]
    fn display_and_parse_are_mutually_inverse() {
        let samples = [
            "true",
            "false",
            "~input_0=2",
            "input_0=1 & decide_1=0 | ~input_2=2",
            "(input_0=1 | decide_1=0) & input_2=2",
            "D{0,2} (input_0=1 & decide_1=0)",
            "nu Z. input_0=1 & D{0} Z",
            "nu Z. (nu Y. Y & Z) | input_0=0",
        ];
        for text in samples {
            roundtrip(&parse_formula(text).unwrap());
        }
    }
}

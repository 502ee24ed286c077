//! Text formats: formula source, signature declarations, and formula files
//! with embedded `#!` declaration lines.
//!
//! Grammar (binding tightest last):
//! ```text
//! formula  := implies ("<->" implies)*
//! implies  := or ("->" implies)?
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "~" unary | "forall" VAR unary | "exists" VAR unary | primary
//! primary  := "true" | "false" | "(" formula ")" | VAR "=" VAR
//!           | IDENT [ "(" [VAR ("," VAR)*] ")" ]
//! ```
//! Variables are literally `x1`, `x2`, …; `#` starts a line comment.

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(usize),
    LParen,
    RParen,
    Comma,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    IffArrow,
    EqSign,
    Forall,
    Exists,
    True,
    False,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            '~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            '|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            '=' => {
                toks.push((Tok::EqSign, i));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(syntax(i, "expected `->`"));
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((Tok::IffArrow, i));
                    i += 3;
                } else {
                    return Err(syntax(i, "expected `<->`"));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ if word.len() > 1
                        && word.starts_with('x')
                        && word[1..].chars().all(|c| c.is_ascii_digit()) =>
                    {
                        let n: usize = word[1..]
                            .parse()
                            .map_err(|_| syntax(start, "variable index out of range"))?;
                        if n == 0 {
                            return Err(syntax(start, "variables are numbered from x1"));
                        }
                        Tok::Var(n)
                    }
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            _ => return Err(syntax(i, format!("unexpected character `{c}`"))),
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    sig: &'a Signature,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|&(_, p)| p).unwrap_or(self.end)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(syntax(self.pos(), format!("expected {what}")))
        }
    }

    fn expect_var(&mut self) -> Result<usize> {
        match self.peek() {
            Some(&Tok::Var(v)) => {
                self.i += 1;
                Ok(v)
            }
            _ => Err(syntax(self.pos(), "expected a variable `xN`")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut l = self.implies()?;
        while self.eat(&Tok::IffArrow) {
            let r = self.implies()?;
            l = Formula::iff(l, r);
        }
        Ok(l)
    }

    fn implies(&mut self) -> Result<Formula> {
        let l = self.or()?;
        if self.eat(&Tok::Arrow) {
            let r = self.implies()?;
            Ok(Formula::implies(l, r))
        } else {
            Ok(l)
        }
    }

    fn or(&mut self) -> Result<Formula> {
        let mut l = self.and()?;
        while self.eat(&Tok::Pipe) {
            let r = self.and()?;
            l = Formula::or(l, r);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut l = self.unary()?;
        while self.eat(&Tok::Amp) {
            let r = self.unary()?;
            l = Formula::and(l, r);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat(&Tok::Forall) {
            let v = self.expect_var()?;
            return Ok(Formula::forall(v, self.unary()?));
        }
        if self.eat(&Tok::Exists) {
            let v = self.expect_var()?;
            return Ok(Formula::exists(v, self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::True) => {
                self.i += 1;
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.i += 1;
                Ok(Formula::False)
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Var(v)) => {
                self.i += 1;
                let eq_pos = self.pos();
                self.expect(&Tok::EqSign, "`=` after a variable")?;
                if !self.sig.equality_enabled() {
                    return Err(Error::EqualityDisabled);
                }
                let _ = eq_pos;
                let w = self.expect_var()?;
                Ok(Formula::Eq(v, w))
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expect_var()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(&Tok::RParen, "`)`")?;
                    }
                }
                match self.sig.arity(&name) {
                    None => Err(Error::UnknownPredicate(name)),
                    Some(a) if a != args.len() => Err(Error::ArityMismatch {
                        pred: name,
                        declared: a,
                        used: args.len(),
                    }),
                    Some(_) => Ok(Formula::Atom { pred: name, args }),
                }
            }
            _ => Err(syntax(self.pos(), "expected a formula")),
        }
    }
}

/// Parses one formula. Every predicate must be declared in `sig`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        i: 0,
        sig,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.i < p.toks.len() {
        return Err(syntax(p.pos(), "unexpected trailing input"));
    }
    Ok(f)
}

/// Applies one declaration line (without any `#!` prefix) to `sig`.
/// Forms: `pred name/arity`, `transitive name`, `equality on|off`.
pub fn apply_declaration(line: &str, sig: &mut Signature) -> Result<()> {
    let words: Vec<&str> = line.split_whitespace().collect();
    match words.split_first() {
        Some((&"pred", rest)) if !rest.is_empty() => {
            let spec = rest.concat();
            let (name, arity) = spec.split_once('/').ok_or_else(|| {
                Error::Signature(format!("expected `name/arity` in `{line}`"))
            })?;
            let arity: usize = arity
                .parse()
                .map_err(|_| Error::Signature(format!("bad arity in `{line}`")))?;
            sig.declare(name, arity)
        }
        Some((&"transitive", [name])) => sig.declare_transitive(name),
        Some((&"equality", [mode])) => match *mode {
            "on" => {
                sig.set_equality(true);
                Ok(())
            }
            "off" => {
                sig.set_equality(false);
                Ok(())
            }
            _ => Err(Error::Signature(format!(
                "expected `equality on` or `equality off`, got `{line}`"
            ))),
        },
        _ => Err(Error::Signature(format!(
            "unrecognized declaration `{line}`"
        ))),
    }
}

/// Parses a signature file: one declaration per line, `#` comments.
/// Lines may carry the `#!` prefix used inside formula files.
pub fn parse_signature_text(text: &str) -> Result<Signature> {
    let mut sig = Signature::new();
    for raw in text.lines() {
        let line = raw.trim();
        if let Some(decl) = line.strip_prefix("#!") {
            apply_declaration(decl, &mut sig)?;
        } else if line.is_empty() || line.starts_with('#') {
            continue;
        } else {
            apply_declaration(line, &mut sig)?;
        }
    }
    Ok(sig)
}

/// Parses a formula file that declares its own signature in `#!` lines,
/// on top of the declarations already present in `base`.
pub fn parse_file_with(text: &str, base: &Signature) -> Result<(Signature, Formula)> {
    let mut sig = base.clone();
    let mut body = String::new();
    for raw in text.lines() {
        let line = raw.trim();
        if let Some(decl) = line.strip_prefix("#!") {
            apply_declaration(decl, &mut sig)?;
        } else {
            body.push_str(raw);
            body.push('\n');
        }
    }
    let f = parse_formula(&body, &sig)?;
    Ok((sig, f))
}

/// Parses a self-contained formula file (all predicates declared inline).
pub fn parse_file(text: &str) -> Result<(Signature, Formula)> {
    parse_file_with(text, &Signature::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn demo_sig() -> Signature {
        let mut sig = Signature::new();
        sig.declare("student", 1).unwrap();
        sig.declare("prof", 1).unwrap();
        sig.declare("admires", 2).unwrap();
        sig.declare("p", 1).unwrap();
        sig.declare("q", 1).unwrap();
        sig.declare("r", 2).unwrap();
        sig.declare("z", 0).unwrap();
        sig.declare_transitive("t").unwrap();
        sig
    }

    #[test]
    fn parses_the_admires_sentence() {
        let sig = demo_sig();
        let text = "forall x1 (student(x1) -> ~forall x2 (prof(x2) -> admires(x1,x2)))";
        let f = parse_formula(text, &sig).unwrap();
        assert_eq!(f.to_string(), text);
    }

    #[test]
    fn parses_constants_and_zero_ary() {
        let sig = demo_sig();
        assert_eq!(parse_formula("true", &sig).unwrap(), Formula::True);
        assert_eq!(
            parse_formula("z", &sig).unwrap(),
            Formula::atom("z", &[])
        );
        assert_eq!(
            parse_formula("z()", &sig).unwrap(),
            Formula::atom("z", &[])
        );
    }

    #[test]
    fn reports_syntax_error_position() {
        let sig = demo_sig();
        let err = parse_formula("forall x1 (p(x1", &sig).unwrap_err();
        match err {
            Error::Syntax { pos, .. } => assert_eq!(pos, 15),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn reports_signature_errors() {
        let sig = demo_sig();
        assert!(matches!(
            parse_formula("unknown(x1)", &sig),
            Err(Error::UnknownPredicate(_))
        ));
        assert!(matches!(
            parse_formula("p(x1,x2)", &sig),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            parse_formula("x1 = x2", &sig),
            Err(Error::EqualityDisabled)
        ));
        let mut eq_sig = demo_sig();
        eq_sig.set_equality(true);
        assert_eq!(
            parse_formula("x1 = x2", &eq_sig).unwrap(),
            Formula::Eq(1, 2)
        );
    }

    #[test]
    fn comments_are_ignored() {
        let sig = demo_sig();
        let f = parse_formula("# leading comment\np(x1) # trailing\n& q(x1)", &sig).unwrap();
        assert_eq!(f.to_string(), "p(x1) & q(x1)");
    }

    #[test]
    fn precedence_matches_display() {
        let sig = demo_sig();
        let f = parse_formula("z & z | z -> z <-> z", &sig).unwrap();
        // & over |, | over ->, -> over <->
        assert_eq!(f.to_string(), "z & z | z -> z <-> z");
        let g = parse_formula("z -> z -> z", &sig).unwrap();
        assert_eq!(
            g,
            Formula::implies(
                Formula::atom("z", &[]),
                Formula::implies(Formula::atom("z", &[]), Formula::atom("z", &[]))
            )
        );
    }

    #[test]
    fn parses_directives_and_files() {
        let text = "#! pred p/1\n#! transitive t\n# a comment\nforall x1 (p(x1) -> exists x2 t(x1,x2))\n";
        let (sig, f) = parse_file(text).unwrap();
        assert!(sig.is_distinguished("t"));
        assert_eq!(sig.arity("p"), Some(1));
        assert_eq!(
            f.to_string(),
            "forall x1 (p(x1) -> exists x2 t(x1,x2))"
        );

        let sig2 = parse_signature_text("pred p/1\ntransitive t\nequality on\n").unwrap();
        assert!(sig2.equality_enabled());
        assert_eq!(sig2.arity("t"), Some(2));
    }

    fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> Formula {
        let leaf = depth == 0;
        let kind = if leaf { rng.gen_range(0..4) } else { rng.gen_range(0..11) };
        match kind {
            0 => Formula::True,
            1 => Formula::False,
            2 => Formula::atom("z", &[]),
            3 => match rng.gen_range(0..3) {
                0 => Formula::atom("p", &[rng.gen_range(1..=3)]),
                1 => Formula::atom("q", &[rng.gen_range(1..=3)]),
                _ => Formula::atom("r", &[1, 2]),
            },
            4 => Formula::not(random_formula(rng, depth - 1)),
            5 => Formula::and(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            6 => Formula::or(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            7 => Formula::implies(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            8 => Formula::iff(
                random_formula(rng, depth - 1),
                random_formula(rng, depth - 1),
            ),
            9 => Formula::exists(rng.gen_range(1..=3), random_formula(rng, depth - 1)),
            _ => Formula::forall(rng.gen_range(1..=3), random_formula(rng, depth - 1)),
        }
    }

    #[test]
    fn print_parse_round_trip_on_random_asts() {
        let sig = demo_sig();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        for _ in 0..300 {
            let f = random_formula(&mut rng, 5);
            let printed = f.to_string();
            let reparsed = parse_formula(&printed, &sig)
                .unwrap_or_else(|e| panic!("failed to reparse `{printed}`: {e}"));
            assert_eq!(reparsed, f, "round trip changed `{printed}`");
        }
    }
}

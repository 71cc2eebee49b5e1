use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{Formula, Regime, Sentence, Term};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let advance = |c: char, line: &mut usize, column: &mut usize| {
            if c == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
        };
        match c {
            '(' | ')' => {
                chars.next();
                advance(c, &mut line, &mut column);
                out.push(Token {
                    tok: if c == '(' { Tok::Open } else { Tok::Close },
                    line: l,
                    column: col,
                });
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    advance(c, &mut line, &mut column);
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                advance(c, &mut line, &mut column);
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c == '(' || c == ')' || c == ';' || c.is_whitespace() {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    advance(c, &mut line, &mut column);
                }
                out.push(Token {
                    tok: Tok::Atom(s),
                    line: l,
                    column: col,
                });
            }
        }
    }
    Ok(out)
}

const RESERVED: &[&str] = &[
    "root", "true", "false", "and", "or", "not", "implies", "exists", "forall", "exists-set",
    "forall-set", "=", "leq", "rel", "hat", "in", "const",
];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    regime: Option<Regime>,
}

impl Parser {
    fn err_at(&self, tok: Option<&Token>, message: impl Into<String>) -> ParseError {
        let (line, column) = tok.map(|t| (t.line, t.column)).unwrap_or(self.end);
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        let t = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err_at(None, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_open(&mut self) -> Result<Token, ParseError> {
        let t = self.next()?;
        if t.tok != Tok::Open {
            return Err(self.err_at(Some(&t), "expected `(`"));
        }
        Ok(t)
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        let t = self.next()?;
        if t.tok != Tok::Close {
            return Err(self.err_at(Some(&t), "expected `)`"));
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<(String, Token), ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Atom(s) => Ok((s.clone(), t.clone())),
            _ => Err(self.err_at(Some(&t), "expected a symbol")),
        }
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        let (s, t) = self.atom()?;
        if RESERVED.contains(&s.as_str()) {
            return Err(self.err_at(Some(&t), format!("`{s}` is reserved and cannot name a variable")));
        }
        Ok(s)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Atom(s) if s == "root" => Ok(Term::Root),
            Tok::Atom(s) if RESERVED.contains(&s.as_str()) => {
                Err(self.err_at(Some(&t), format!("`{s}` is not a term")))
            }
            Tok::Atom(s) => Ok(Term::Var(s.clone())),
            Tok::Open => {
                let (head, ht) = self.atom()?;
                if head != "const" {
                    return Err(self.err_at(Some(&ht), "expected `const`"));
                }
                let (name, _) = self.atom()?;
                self.expect_close()?;
                Ok(Term::Const(name))
            }
            Tok::Close => Err(self.err_at(Some(&t), "expected a term")),
        }
    }

    fn terms_until_close(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut ts = Vec::new();
        while let Some(t) = self.peek() {
            if t.tok == Tok::Close {
                break;
            }
            ts.push(self.term()?);
        }
        self.expect_close()?;
        Ok(ts)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Atom(s) if s == "true" => return Ok(Formula::True),
            Tok::Atom(s) if s == "false" => return Ok(Formula::False),
            Tok::Atom(s) => return Err(self.err_at(Some(&t), format!("expected a formula, found `{s}`"))),
            Tok::Close => return Err(self.err_at(Some(&t), "expected a formula, found `)`")),
            Tok::Open => {}
        }
        let (head, ht) = self.atom()?;
        let f = match head.as_str() {
            "and" | "or" => {
                let mut parts = vec![self.formula()?, self.formula()?];
                while self.peek().is_some_and(|t| t.tok != Tok::Close) {
                    parts.push(self.formula()?);
                }
                self.expect_close()?;
                let combine = if head == "and" { Formula::and } else { Formula::or };
                let mut it = parts.into_iter();
                let first = it.next().unwrap();
                return Ok(it.fold(first, combine));
            }
            "not" => Formula::not(self.formula()?),
            "implies" => {
                let a = self.formula()?;
                let b = self.formula()?;
                Formula::implies(a, b)
            }
            "exists" | "forall" => {
                let v = self.identifier()?;
                let body = self.formula()?;
                if head == "exists" {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
            "exists-set" | "forall-set" => {
                if self.regime == Some(Regime::Fo) {
                    return Err(self.err_at(Some(&ht), "set quantifier in an `fo` sentence"));
                }
                let v = self.identifier()?;
                let body = self.formula()?;
                if head == "exists-set" {
                    Formula::exists_set(v, body)
                } else {
                    Formula::forall_set(v, body)
                }
            }
            "=" => {
                let a = self.term()?;
                let b = self.term()?;
                Formula::Eq(a, b)
            }
            "leq" => {
                let a = self.term()?;
                let b = self.term()?;
                Formula::PrefLeq(a, b)
            }
            "rel" | "hat" => {
                let (name, _) = self.atom()?;
                let ts = self.terms_until_close()?;
                if ts.is_empty() {
                    return Err(self.err_at(Some(&ht), format!("`{head} {name}` needs at least one argument")));
                }
                return Ok(if head == "rel" {
                    Formula::Rel(name, ts)
                } else {
                    Formula::HatRel(name, ts)
                });
            }
            "in" => {
                let t = self.term()?;
                let v = self.identifier()?;
                Formula::Mem(t, v)
            }
            other => return Err(self.err_at(Some(&ht), format!("unknown form `{other}`"))),
        };
        self.expect_close()?;
        Ok(f)
    }

    fn finish(&self) -> Result<(), ParseError> {
        if let Some(t) = self.peek() {
            return Err(self.err_at(Some(t), "trailing input after formula"));
        }
        Ok(())
    }
}

fn parser(text: &str) -> Result<Parser, ParseError> {
    let tokens = tokenize(text)?;
    let mut line = 1;
    let mut column = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    Ok(Parser {
        tokens,
        pos: 0,
        end: (line, column),
        regime: None,
    })
}

/// Parses `(regime formula)`.
pub fn parse_sentence(text: &str) -> Result<Sentence, ParseError> {
    let mut p = parser(text)?;
    p.expect_open()?;
    let (kw, t) = p.atom()?;
    let regime = Regime::from_keyword(&kw)
        .ok_or_else(|| p.err_at(Some(&t), format!("unknown regime `{kw}` (expected fo, w, ch, mch or full)")))?;
    p.regime = Some(regime);
    let formula = p.formula()?;
    p.expect_close()?;
    p.finish()?;
    let formula = resolve(formula)
        .and_then(|f| f.side().map(|_| f))
        .map_err(|m| ParseError {
            line: 1,
            column: 1,
            message: m,
        })?;
    Ok(Sentence { regime, formula })
}

/// Parses a bare formula without a regime header.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = parser(text)?;
    let formula = p.formula()?;
    p.finish()?;
    resolve(formula).map_err(|m| ParseError {
        line: 1,
        column: 1,
        message: m,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Ind,
    Set,
}

/// Renames shadowing binders apart and checks that every variable is used
/// consistently as an individual or as a set.
fn resolve(f: Formula) -> Result<Formula, String> {
    let mut names = BTreeSet::new();
    f.visit(&mut |g| match g {
        Formula::ExistsInd(v, _) | Formula::ExistsSet(v, _) | Formula::Mem(_, v) => {
            names.insert(v.clone());
        }
        _ => {}
    });
    f.visit(&mut |g| {
        let mut add = |t: &Term| {
            if let Term::Var(v) = t {
                names.insert(v.clone());
            }
        };
        match g {
            Formula::Eq(a, b) | Formula::PrefLeq(a, b) => {
                add(a);
                add(b);
            }
            Formula::Rel(_, ts) | Formula::HatRel(_, ts) => ts.iter().for_each(&mut add),
            Formula::Mem(t, _) => add(t),
            _ => {}
        }
    });
    let mut r = Resolver {
        used: names,
        scope: Vec::new(),
        free_kinds: HashMap::new(),
    };
    r.go(f)
}

struct Resolver {
    used: BTreeSet<String>,
    scope: Vec<(String, String, Kind)>,
    free_kinds: HashMap<String, Kind>,
}

impl Resolver {
    fn lookup(&mut self, name: &str, kind: Kind) -> Result<String, String> {
        if let Some((_, renamed, k)) = self.scope.iter().rev().find(|(orig, _, _)| orig == name) {
            if *k != kind {
                return Err(kind_error(name, *k));
            }
            return Ok(renamed.clone());
        }
        match self.free_kinds.get(name) {
            Some(&k) if k != kind => Err(kind_error(name, k)),
            _ => {
                self.free_kinds.insert(name.to_string(), kind);
                Ok(name.to_string())
            }
        }
    }

    fn term(&mut self, t: Term) -> Result<Term, String> {
        match t {
            Term::Var(v) => Ok(Term::Var(self.lookup(&v, Kind::Ind)?)),
            other => Ok(other),
        }
    }

    fn fresh(&mut self, name: &str) -> String {
        let mut i = 1;
        loop {
            let candidate = format!("{name}_{i}");
            if !self.used.contains(&candidate) {
                self.used.insert(candidate.clone());
                return candidate;
            }
            i += 1;
        }
    }

    fn binder(&mut self, v: String, kind: Kind, body: Formula) -> Result<(String, Formula), String> {
        let shadowing = self.scope.iter().any(|(_, renamed, _)| *renamed == v)
            || self.scope.iter().any(|(orig, _, _)| *orig == v);
        let renamed = if shadowing { self.fresh(&v) } else { v.clone() };
        self.scope.push((v, renamed.clone(), kind));
        let body = self.go(body);
        self.scope.pop();
        Ok((renamed, body?))
    }

    fn go(&mut self, f: Formula) -> Result<Formula, String> {
        Ok(match f {
            Formula::True | Formula::False => f,
            Formula::Eq(a, b) => Formula::Eq(self.term(a)?, self.term(b)?),
            Formula::PrefLeq(a, b) => Formula::PrefLeq(self.term(a)?, self.term(b)?),
            Formula::Rel(r, ts) => Formula::Rel(r, ts.into_iter().map(|t| self.term(t)).collect::<Result<_, _>>()?),
            Formula::HatRel(r, ts) => {
                Formula::HatRel(r, ts.into_iter().map(|t| self.term(t)).collect::<Result<_, _>>()?)
            }
            Formula::Mem(t, s) => {
                let t = self.term(t)?;
                Formula::Mem(t, self.lookup(&s, Kind::Set)?)
            }
            Formula::Not(g) => Formula::not(self.go(*g)?),
            Formula::And(a, b) => Formula::and(self.go(*a)?, self.go(*b)?),
            Formula::ExistsInd(v, g) => {
                let (v, g) = self.binder(v, Kind::Ind, *g)?;
                Formula::exists(v, g)
            }
            Formula::ExistsSet(v, g) => {
                let (v, g) = self.binder(v, Kind::Set, *g)?;
                Formula::exists_set(v, g)
            }
        })
    }
}

fn kind_error(name: &str, k: Kind) -> String {
    match k {
        Kind::Ind => format!("individual variable `{name}` used as a set"),
        Kind::Set => format!("set variable `{name}` used as an individual"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_multichain_example() {
        let s = parse_sentence("(mch (exists-set X (exists x (in x X))))").unwrap();
        assert_eq!(s.regime, Regime::Multichain);
        assert_eq!(
            s.formula,
            Formula::exists_set("X", Formula::exists("x", Formula::mem(Term::var("x"), "X")))
        );
    }

    #[test]
    fn fo_rejects_set_quantifier() {
        let e = parse_sentence("(fo (exists-set X (in x X)))").unwrap_err();
        assert_eq!((e.line, e.column), (1, 6));
        assert!(e.message.contains("set quantifier"));
    }

    #[test]
    fn reports_positions() {
        let e = parse_sentence("(fo\n  (exists x (frob x)))").unwrap_err();
        assert_eq!((e.line, e.column), (2, 14));
        let e = parse_sentence("(fo (exists x (= x root))").unwrap_err();
        assert!(e.message.contains("end of input"));
        let e = parse_sentence("(xx true)").unwrap_err();
        assert!(e.message.contains("unknown regime"));
    }

    #[test]
    fn renames_shadowing_binders() {
        let s = parse_sentence("(fo (exists x (and (hat R x) (exists x (= x x)))))").unwrap();
        assert!(!s.formula.has_shadowing());
        let expected = Formula::exists(
            "x",
            Formula::and(
                Formula::HatRel("R".into(), vec![Term::var("x")]),
                Formula::exists("x_1", Formula::Eq(Term::var("x_1"), Term::var("x_1"))),
            ),
        );
        assert_eq!(s.formula, expected);
    }

    #[test]
    fn sugar_elaborates_to_core() {
        let s = parse_sentence("(fo (forall x (or (= x root) (implies true false))))").unwrap();
        let body = Formula::or(
            Formula::Eq(Term::var("x"), Term::Root),
            Formula::implies(Formula::True, Formula::False),
        );
        assert_eq!(s.formula, Formula::forall("x", body));
    }

    #[test]
    fn kind_clash_is_an_error() {
        assert!(parse_sentence("(mch (exists-set X (= X X)))").is_err());
        assert!(parse_sentence("(fo (exists x (in root x)))").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let s = parse_sentence("; header\n(fo ; regime\n (= root root))").unwrap();
        assert_eq!(s.formula, Formula::Eq(Term::Root, Term::Root));
    }
}

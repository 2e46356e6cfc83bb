use std::collections::BTreeSet;

use crate::signature::{HDSignature, Symbol};

use super::check::{check_open, Scope};
use super::{Action, Sentence, SyntaxError, Term, Var};

pub const KEYWORDS: [&str; 6] = ["exists", "forall", "down", "true", "false", "at"];

const PUNCT: [&str; 19] =
    ["<->", "->", "!=", "@", "<", ">", "[", "]", "(", ")", "~", "&", "|", "=", ",", ".", ":", ";", "*"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Lexer;

impl Lexer {
    /// Splits `src` into tokens tagged with 1-based line and column.
    pub fn tokenize(src: &str, line0: usize) -> Result<Vec<(Tok, usize, usize)>, SyntaxError> {
        let mut out = Vec::new();
        let chars: Vec<char> = src.chars().collect();
        let (mut i, mut line, mut col) = (0, line0, 1);
        while i < chars.len() {
            let c = chars[i];
            if c == '\n' {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            if c == '#' {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), line, col));
                col += i - start;
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            match PUNCT.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    out.push((Tok::Punct(p), line, col));
                    i += p.len();
                    col += p.len();
                }
                None => {
                    return Err(SyntaxError::Parse { line, col, msg: format!("unexpected character `{c}`") });
                }
            }
        }
        out.push((Tok::Eof, line, col));
        Ok(out)
    }
}

/// Signature-aware recursive-descent parser for terms, actions and sentences.
pub struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    sig: &'a HDSignature,
    scope: Scope,
}

impl<'a> Parser<'a> {
    pub fn new(sig: &'a HDSignature, src: &str, line0: usize) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: Lexer::tokenize(src, line0)?, pos: 0, sig, scope: Scope::default() })
    }

    pub fn with_vars(mut self, vars: &[Var]) -> Self {
        self.scope.vars.extend(vars.iter().cloned());
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].0
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let (_, line, col) = &self.toks[self.pos];
        Err(SyntaxError::Parse { line: *line, col: *col, msg: msg.into() })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), SyntaxError> {
        if self.eat(p) {
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    pub fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn finish(&self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    fn is_nominal(&self, k: &str) -> bool {
        match self.scope.get(k) {
            Some(v) => v.sort == self.sig.nominal_sort(),
            None => self.sig.is_nominal(k),
        }
    }

    fn normalize(&self, sym: Symbol) -> Symbol {
        let rigid = self.sig.is_rigid_op(&sym.name) || self.sig.is_rigid_rel(&sym.name);
        if rigid {
            Symbol::plain(&sym.name)
        } else {
            sym
        }
    }

    /// `f`, or `(at k f)`.
    fn symbol(&mut self) -> Result<Symbol, SyntaxError> {
        if self.is_punct("(") && matches!(self.peek_at(1), Tok::Ident(s) if s == "at") {
            self.pos += 2;
            let k = self.ident()?;
            let f = self.ident()?;
            self.expect(")")?;
            return Ok(self.normalize(Symbol::at(&k, &f)));
        }
        Ok(Symbol::plain(&self.ident()?))
    }

    fn args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = Vec::new();
        if self.eat("(") {
            loop {
                args.push(self.term()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        Ok(args)
    }

    pub fn term(&mut self) -> Result<Term, SyntaxError> {
        let op = self.symbol()?;
        let args = self.args()?;
        Ok(Term { op, args })
    }

    pub fn action(&mut self) -> Result<Action, SyntaxError> {
        let mut a = self.action_seq()?;
        while self.eat("|") {
            a = Action::union(a, self.action_seq()?);
        }
        Ok(a)
    }

    fn action_seq(&mut self) -> Result<Action, SyntaxError> {
        let mut a = self.action_post()?;
        while self.eat(";") {
            a = Action::seq(a, self.action_post()?);
        }
        Ok(a)
    }

    fn action_post(&mut self) -> Result<Action, SyntaxError> {
        let mut a = if self.eat("(") {
            let a = self.action()?;
            self.expect(")")?;
            a
        } else {
            Action::Atom(self.ident()?)
        };
        while self.eat("*") {
            a = Action::star(a);
        }
        Ok(a)
    }

    pub fn sentence(&mut self) -> Result<Sentence, SyntaxError> {
        let a = self.implication()?;
        if self.eat("<->") {
            let b = self.implication()?;
            return Ok(and_raw(vec![or_raw(vec![Sentence::not(a.clone()), b.clone()]), or_raw(vec![Sentence::not(b), a])]));
        }
        Ok(a)
    }

    fn implication(&mut self) -> Result<Sentence, SyntaxError> {
        let a = self.disjunction()?;
        if self.eat("->") {
            let b = self.implication()?;
            return Ok(or_raw(vec![Sentence::not(a), b]));
        }
        Ok(a)
    }

    fn disjunction(&mut self) -> Result<Sentence, SyntaxError> {
        let first = self.conjunction()?;
        if !self.is_punct("|") {
            return Ok(first);
        }
        let mut ms = vec![first];
        while self.eat("|") {
            ms.push(self.conjunction()?);
        }
        Ok(or_raw(ms))
    }

    fn conjunction(&mut self) -> Result<Sentence, SyntaxError> {
        let first = self.unary()?;
        if !self.is_punct("&") {
            return Ok(first);
        }
        let mut ms = vec![first];
        while self.eat("&") {
            ms.push(self.unary()?);
        }
        Ok(and_raw(ms))
    }

    fn vars(&mut self) -> Result<Vec<Var>, SyntaxError> {
        let mut vs = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect(":")?;
            let sort = self.ident()?;
            if sort != self.sig.nominal_sort() && !self.sig.body.sorts.contains(&sort) {
                return self.err(format!("unknown sort `{sort}`"));
            }
            vs.push(Var { name, sort });
            if !self.eat(",") {
                return Ok(vs);
            }
        }
    }

    fn binder_body(&mut self, vs: &[Var]) -> Result<Sentence, SyntaxError> {
        self.expect(".")?;
        let n = self.scope.vars.len();
        self.scope.vars.extend(vs.iter().cloned());
        let body = self.sentence();
        self.scope.vars.truncate(n);
        body
    }

    fn unary(&mut self) -> Result<Sentence, SyntaxError> {
        if self.eat("~") {
            return Ok(Sentence::not(self.unary()?));
        }
        if self.eat("@") {
            let k = self.ident()?;
            return Ok(Sentence::at(&k, self.unary()?));
        }
        if self.eat("<") {
            let a = self.action()?;
            self.expect(">")?;
            return Ok(Sentence::dia(a, self.unary()?));
        }
        if self.eat("[") {
            let a = self.action()?;
            self.expect("]")?;
            return Ok(Sentence::boxm(a, self.unary()?));
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            let universal = self.is_kw("forall");
            self.pos += 1;
            let vs = self.vars()?;
            let body = self.binder_body(&vs)?;
            let set: BTreeSet<Var> = vs.into_iter().collect();
            return Ok(if universal {
                Sentence::not(Sentence::Exists(set, Box::new(Sentence::not(body))))
            } else {
                Sentence::Exists(set, Box::new(body))
            });
        }
        if self.is_kw("down") {
            self.pos += 1;
            let z = self.ident()?;
            let body = self.binder_body(&[Var::new(&z, self.sig.nominal_sort())])?;
            return Ok(Sentence::store(&z, body));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Sentence, SyntaxError> {
        if self.is_kw("true") {
            self.pos += 1;
            return Ok(Sentence::top());
        }
        if self.is_kw("false") {
            self.pos += 1;
            return Ok(Sentence::bot());
        }
        let pinned = self.is_punct("(") && matches!(self.peek_at(1), Tok::Ident(s) if s == "at");
        if self.is_punct("(") && !pinned {
            self.pos += 1;
            let s = self.sentence()?;
            self.expect(")")?;
            return Ok(s);
        }
        let sym = self.symbol()?;
        if sym.at.is_none() && self.is_nominal(&sym.name) {
            return Ok(Sentence::Nominal(sym.name));
        }
        if self.sig.body.rels.contains_key(&sym.name) {
            let args = self.args()?;
            return Ok(Sentence::Rel(sym, args));
        }
        if sym.at.is_none() && self.scope.get(&sym.name).is_none() && !self.sig.body.ops.contains_key(&sym.name) {
            return self.err(format!("unknown symbol `{}`", sym.name));
        }
        let lhs = Term { op: sym, args: self.args()? };
        let negate = if self.eat("=") {
            false
        } else if self.eat("!=") {
            true
        } else {
            return self.err(format!("expected `=` after term, found {}", self.describe()));
        };
        let eq = Sentence::Eq(lhs, self.term()?);
        Ok(if negate { Sentence::not(eq) } else { eq })
    }
}

fn or_raw(ms: Vec<Sentence>) -> Sentence {
    Sentence::Or(ms.into_iter().collect())
}

fn and_raw(ms: Vec<Sentence>) -> Sentence {
    Sentence::not(Sentence::Or(ms.into_iter().map(Sentence::not).collect()))
}

/// Parses and checks a closed sentence over `sig`.
pub fn parse_sentence(sig: &HDSignature, src: &str) -> Result<Sentence, SyntaxError> {
    parse_sentence_open(sig, &[], src)
}

/// Parses and checks a sentence open in `vars`.
pub fn parse_sentence_open(sig: &HDSignature, vars: &[Var], src: &str) -> Result<Sentence, SyntaxError> {
    let mut p = Parser::new(sig, src, 1)?.with_vars(vars);
    let s = p.sentence()?;
    p.finish()?;
    check_open(sig, vars, &s)?;
    Ok(s)
}

pub fn parse_term(sig: &HDSignature, src: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(sig, src, 1)?;
    let t = p.term()?;
    p.finish()?;
    super::check::term_sort(sig, &Scope::default(), &t)?;
    Ok(t)
}

pub fn parse_action(sig: &HDSignature, src: &str) -> Result<Action, SyntaxError> {
    let mut p = Parser::new(sig, src, 1)?;
    let a = p.action()?;
    p.finish()?;
    let mut atoms = BTreeSet::new();
    a.atoms(&mut atoms);
    if let Some(l) = atoms.iter().find(|l| !sig.is_modality(l)) {
        return Err(SyntaxError::Unknown(l.clone()));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::print_sentence;

    #[test]
    fn retrieve_of_relation() {
        let s = parse_sentence(&fixtures::hpl_signature(), "@ k rho").unwrap();
        assert_eq!(s, Sentence::at("k", Sentence::prop("rho")));
    }

    #[test]
    fn star_possibility() {
        let s = parse_sentence(&fixtures::chain3_signature(), "<lambda*> k2").unwrap();
        assert_eq!(s, Sentence::dia(Action::star(Action::atom("lambda")), Sentence::nom("k2")));
    }

    #[test]
    fn universal_delete_axiom() {
        let sig = fixtures::list_signature();
        let s = parse_sentence(&sig, "forall N:any . (at N delete)(empty) = empty").unwrap();
        let body = Sentence::eq(Term::at_app("N", "delete", vec![Term::cnst("empty")]), Term::cnst("empty"));
        assert_eq!(s, Sentence::forall([Var::new("N", "any")], body));
    }

    #[test]
    fn rigid_symbols_lose_their_pin() {
        let sig = fixtures::list_signature();
        let s = parse_sentence(&sig, "(at n0 cons)(e, empty) = empty").unwrap();
        assert_eq!(s, Sentence::eq(Term::app("cons", vec![Term::cnst("e"), Term::cnst("empty")]), Term::cnst("empty")));
    }

    #[test]
    fn errors_carry_positions() {
        let sig = fixtures::hpl_signature();
        match parse_sentence(&sig, "@k\n  rho &") {
            Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 8)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_sentence(&sig, "sigma"), Err(SyntaxError::Parse { .. })));
    }

    #[test]
    fn canonical_round_trip() {
        let sig = fixtures::list_signature();
        for src in [
            "@n0 <lambda> n1",
            "(forall L:List . (at n0 delete)(L) = L)",
            "(n0 | ~n1 | <(lambda ; lambda*)> n2)",
            "(n0 & [lambda] n1)",
            "(down z . @z (exists E:Elt, L:List . ~cons(E, L) = empty))",
            "~(~n0 | ~n0)",
            "(n0 | n0)",
            "true",
            "false",
        ] {
            let s = parse_sentence(&sig, src).unwrap();
            assert_eq!(print_sentence(&s), src);
        }
    }
}

use std::collections::BTreeSet;
use std::convert::Infallible;

use crate::signature::HDSignature;
use crate::syntax::{Action, Sentence, Term};

use super::model::{tuples, Kripke};

/// A value bound in an evaluation environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    World(usize),
    Elem(usize),
}

/// Variable bindings, innermost last.
pub type Env = Vec<(String, Val)>;

/// Read access to a possibly partial interpretation. A lookup that hits an
/// undefined entry returns the hole describing it.
pub trait Interp {
    type Hole: Clone;
    fn sig(&self) -> &HDSignature;
    fn n_worlds(&self) -> usize;
    fn nominal(&self, k: &str) -> Result<usize, Self::Hole>;
    fn edge(&self, l: &str, a: usize, b: usize) -> Result<bool, Self::Hole>;
    fn size(&self, w: usize, s: &str) -> usize;
    fn op(&self, w: usize, name: &str, args: &[usize]) -> Result<usize, Self::Hole>;
    fn rel(&self, w: usize, name: &str, args: &[usize]) -> Result<bool, Self::Hole>;
}

/// Kleene truth values; `Unknown` carries the first undefined entry met.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tv<H> {
    True,
    False,
    Unknown(H),
}

impl<H: Clone> Tv<H> {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Tv::True
        } else {
            Tv::False
        }
    }

    fn lift(r: Result<bool, H>) -> Self {
        match r {
            Ok(b) => Tv::from_bool(b),
            Err(h) => Tv::Unknown(h),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Tv::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Tv::False)
    }

    pub fn negate(self) -> Self {
        match self {
            Tv::True => Tv::False,
            Tv::False => Tv::True,
            u => u,
        }
    }

    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (Tv::True, _) | (_, Tv::True) => Tv::True,
            (Tv::Unknown(h), _) | (_, Tv::Unknown(h)) => Tv::Unknown(h),
            _ => Tv::False,
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (Tv::False, _) | (_, Tv::False) => Tv::False,
            (Tv::Unknown(h), _) | (_, Tv::Unknown(h)) => Tv::Unknown(h),
            _ => Tv::True,
        }
    }

    /// Strictly more defined in the order F < U < T used by fixpoints.
    fn rank(&self) -> u8 {
        match self {
            Tv::False => 0,
            Tv::Unknown(_) => 1,
            Tv::True => 2,
        }
    }
}

/// The satisfaction relation over any interpretation.
pub struct Evaluator<'a, I: Interp> {
    m: &'a I,
    env: Env,
}

impl<'a, I: Interp> Evaluator<'a, I> {
    pub fn new(m: &'a I) -> Self {
        Evaluator { m, env: Vec::new() }
    }

    pub fn with_env(m: &'a I, env: Env) -> Self {
        Evaluator { m, env }
    }

    fn lookup(&self, name: &str) -> Option<Val> {
        self.env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn world_of(&self, k: &str) -> Result<usize, I::Hole> {
        match self.lookup(k) {
            Some(Val::World(w)) => Ok(w),
            _ => self.m.nominal(k),
        }
    }

    pub fn term(&self, w: usize, t: &Term) -> Result<usize, I::Hole> {
        if t.op.at.is_none() && t.args.is_empty() {
            if let Some(Val::Elem(e)) = self.lookup(&t.op.name) {
                return Ok(e);
            }
        }
        let mut args = Vec::with_capacity(t.args.len());
        for a in &t.args {
            args.push(self.term(w, a)?);
        }
        let at = match &t.op.at {
            Some(k) => self.world_of(k)?,
            None => w,
        };
        self.m.op(at, &t.op.name, &args)
    }

    /// Successor row of `w` under an action.
    pub fn successors(&self, a: &Action, w: usize) -> Vec<Tv<I::Hole>> {
        let n = self.m.n_worlds();
        match a {
            Action::Atom(l) => (0..n).map(|v| Tv::lift(self.m.edge(l, w, v))).collect(),
            Action::Union(a1, a2) => {
                let r1 = self.successors(a1, w);
                let r2 = self.successors(a2, w);
                r1.into_iter().zip(r2).map(|(x, y)| x.or(y)).collect()
            }
            Action::Seq(a1, a2) => {
                let r1 = self.successors(a1, w);
                let mut out = vec![Tv::False; n];
                for (k, via) in r1.into_iter().enumerate() {
                    if via.is_false() {
                        continue;
                    }
                    for (v, step) in self.successors(a2, k).into_iter().enumerate() {
                        let cur = std::mem::replace(&mut out[v], Tv::False);
                        out[v] = cur.or(via.clone().and(step));
                    }
                }
                out
            }
            Action::Star(b) => {
                let mut reach = vec![Tv::False; n];
                reach[w] = Tv::True;
                let rows: Vec<Vec<Tv<I::Hole>>> = (0..n).map(|k| self.successors(b, k)).collect();
                loop {
                    let mut changed = false;
                    for k in 0..n {
                        if reach[k].is_false() {
                            continue;
                        }
                        for v in 0..n {
                            let cand = reach[k].clone().and(rows[k][v].clone());
                            if cand.rank() > reach[v].rank() {
                                reach[v] = cand;
                                changed = true;
                            }
                        }
                    }
                    if !changed {
                        return reach;
                    }
                }
            }
        }
    }

    pub fn sat(&mut self, w: usize, s: &Sentence) -> Tv<I::Hole> {
        match s {
            Sentence::Nominal(k) => match self.world_of(k) {
                Ok(v) => Tv::from_bool(v == w),
                Err(h) => Tv::Unknown(h),
            },
            Sentence::Eq(a, b) => match (self.term(w, a), self.term(w, b)) {
                (Ok(x), Ok(y)) => Tv::from_bool(x == y),
                (Err(h), _) | (_, Err(h)) => Tv::Unknown(h),
            },
            Sentence::Rel(sym, ts) => {
                let at = match &sym.at {
                    Some(k) => match self.world_of(k) {
                        Ok(v) => v,
                        Err(h) => return Tv::Unknown(h),
                    },
                    None => w,
                };
                let mut args = Vec::with_capacity(ts.len());
                for t in ts {
                    match self.term(w, t) {
                        Ok(e) => args.push(e),
                        Err(h) => return Tv::Unknown(h),
                    }
                }
                Tv::lift(self.m.rel(at, &sym.name, &args))
            }
            Sentence::At(k, g) => match self.world_of(k) {
                Ok(v) => self.sat(v, g),
                Err(h) => Tv::Unknown(h),
            },
            Sentence::Not(g) => self.sat(w, g).negate(),
            Sentence::Or(gs) => {
                let mut acc = Tv::False;
                for g in gs {
                    acc = acc.or(self.sat(w, g));
                    if acc.is_true() {
                        break;
                    }
                }
                acc
            }
            Sentence::Store(z, g) => {
                self.env.push((z.clone(), Val::World(w)));
                let r = self.sat(w, g);
                self.env.pop();
                r
            }
            Sentence::Exists(xs, g) => {
                let nominal = self.m.sig().nominal_sort().to_string();
                let vars: Vec<_> = xs.iter().collect();
                let dims: Vec<usize> = vars
                    .iter()
                    .map(|x| if x.sort == nominal { self.m.n_worlds() } else { self.m.size(0, &x.sort) })
                    .collect();
                let mut acc = Tv::False;
                for tuple in tuples(&dims) {
                    for (x, &e) in vars.iter().zip(&tuple) {
                        let v = if x.sort == nominal { Val::World(e) } else { Val::Elem(e) };
                        self.env.push((x.name.clone(), v));
                    }
                    let r = self.sat(w, g);
                    self.env.truncate(self.env.len() - vars.len());
                    acc = acc.or(r);
                    if acc.is_true() {
                        break;
                    }
                }
                acc
            }
            Sentence::Dia(a, g) => {
                let row = self.successors(a, w);
                let mut acc = Tv::False;
                for (v, edge) in row.into_iter().enumerate() {
                    if edge.is_false() {
                        continue;
                    }
                    acc = acc.or(edge.and(self.sat(v, g)));
                    if acc.is_true() {
                        break;
                    }
                }
                acc
            }
        }
    }
}

impl Interp for Kripke {
    type Hole = Infallible;

    fn sig(&self) -> &HDSignature {
        &self.sig
    }

    fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    fn nominal(&self, k: &str) -> Result<usize, Infallible> {
        match self.nominals.get(k) {
            Some(&w) => Ok(w),
            None => panic!("nominal `{k}` is not interpreted"),
        }
    }

    fn edge(&self, l: &str, a: usize, b: usize) -> Result<bool, Infallible> {
        Ok(Kripke::edge(self, l, a, b))
    }

    fn size(&self, w: usize, s: &str) -> usize {
        Kripke::size(self, w, s)
    }

    fn op(&self, w: usize, name: &str, args: &[usize]) -> Result<usize, Infallible> {
        let decl = &self.sig.body.ops[name];
        let idx = decl.args.iter().zip(args).fold(0, |acc, (s, a)| acc * Kripke::size(self, w, s) + a);
        Ok(self.op_table(w, name)[idx])
    }

    fn rel(&self, w: usize, name: &str, args: &[usize]) -> Result<bool, Infallible> {
        let params = &self.sig.body.rels[name];
        let idx = params.iter().zip(args).fold(0, |acc, (s, a)| acc * Kripke::size(self, w, s) + a);
        Ok(self.rel_table(w, name)[idx])
    }
}

fn definite(t: Tv<Infallible>) -> bool {
    match t {
        Tv::True => true,
        Tv::False => false,
        Tv::Unknown(h) => match h {},
    }
}

pub fn eval_term(m: &Kripke, w: usize, t: &Term) -> usize {
    eval_term_env(m, w, &Vec::new(), t)
}

pub fn eval_term_env(m: &Kripke, w: usize, env: &Env, t: &Term) -> usize {
    match Evaluator::with_env(m, env.clone()).term(w, t) {
        Ok(e) => e,
        Err(h) => match h {},
    }
}

/// The accessibility relation of an action.
pub fn eval_action(m: &Kripke, a: &Action) -> BTreeSet<(usize, usize)> {
    let ev = Evaluator::new(m);
    let mut out = BTreeSet::new();
    for w in 0..m.n_worlds() {
        for (v, t) in ev.successors(a, w).into_iter().enumerate() {
            if definite(t) {
                out.insert((w, v));
            }
        }
    }
    out
}

pub fn sat_local(m: &Kripke, w: usize, s: &Sentence) -> bool {
    definite(Evaluator::new(m).sat(w, s))
}

pub fn sat_local_env(m: &Kripke, w: usize, env: &Env, s: &Sentence) -> bool {
    definite(Evaluator::with_env(m, env.clone()).sat(w, s))
}

pub fn sat_global(m: &Kripke, s: &Sentence) -> bool {
    let mut ev = Evaluator::new(m);
    (0..m.n_worlds()).all(|w| definite(ev.sat(w, s)))
}

pub fn sat_theory(m: &Kripke, t: &[Sentence]) -> bool {
    t.iter().all(|s| sat_global(m, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::parse_sentence;

    #[test]
    fn hpl_k2_world_w() {
        let m = fixtures::hpl_k2();
        let sig = fixtures::hpl_signature();
        let w = m.world_index("w").unwrap();
        for src in ["k", "<lambda> k", "rho"] {
            assert!(!sat_local(&m, w, &parse_sentence(&sig, src).unwrap()), "{src}");
        }
        let rho = Sentence::prop("rho");
        assert!(sat_global(&fixtures::hpl_k1(), &rho));
        assert!(!sat_global(&m, &rho));
    }

    #[test]
    fn bottom_never_holds() {
        let m = fixtures::chain3_model();
        assert!((0..3).all(|w| !sat_local(&m, w, &Sentence::bot())));
        assert!(sat_theory(&m, &[]));
    }

    #[test]
    fn chain3_actions() {
        let m = fixtures::chain3_model();
        let l = Action::atom("lambda");
        let star: BTreeSet<_> = (0..3).flat_map(|i| (i..3).map(move |j| (i, j))).collect();
        assert_eq!(eval_action(&m, &Action::star(l.clone())), star);
        assert_eq!(eval_action(&m, &Action::union(l.clone(), l.clone())), eval_action(&m, &l));
        assert_eq!(eval_action(&m, &Action::seq(l.clone(), l)), BTreeSet::from([(0, 2)]));
        let s = parse_sentence(&fixtures::chain3_signature(), "<lambda*> k2").unwrap();
        assert!(sat_local(&m, 0, &s));
    }

    #[test]
    fn list_delete_terms() {
        let m = fixtures::list_canonical_model();
        let sig = fixtures::list_signature();
        let t = crate::syntax::parse_term(&sig, "(at n1 delete)(cons(e, empty))").unwrap();
        let empty = eval_term(&m, 0, &Term::cnst("empty"));
        assert_eq!(eval_term(&m, 0, &t), empty);
        let t2 = crate::syntax::parse_term(&sig, "(at n2 delete)(cons(e, cons(e, empty)))").unwrap();
        assert_eq!(eval_term(&m, 1, &t2), empty);
        let e = Term::cnst("e");
        assert_eq!(eval_term(&m, 0, &e), eval_term(&m, 2, &e));
    }
}

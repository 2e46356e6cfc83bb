//! Seeded generators for signatures, morphisms, structures and sentences,
//! plus oracles written independently of the library's evaluator.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use hdfol::kripke::{Kripke, Val};
use hdfol::signature::{HDSignature, SignatureMorphism};
use hdfol::syntax::{check, Action, Sentence, SubstTarget, Substitution, Term, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two sorts (rigid `D`, flexible `E`), rigid and flexible symbols of each kind.
pub fn rich_signature() -> HDSignature {
    HDSignature::new()
        .nominal("k0")
        .nominal("k1")
        .nominal("k2")
        .modality("a")
        .modality("b")
        .sort("D", true)
        .sort("E", false)
        .op("c", &[], "D", true)
        .op("g", &["D"], "D", true)
        .op("f", &["D"], "D", false)
        .op("h", &["D"], "E", false)
        .op("u", &["E"], "E", false)
        .rel("P", &["D"], true)
        .rel("Q", &["D", "D"], false)
        .rel("R", &["E"], false)
        .rel("rho", &[], false)
}

/// A structure over `sig` with at most `max_worlds` worlds and carriers of at most `max_carrier` elements.
pub fn random_model(r: &mut ChaCha8Rng, sig: &HDSignature, max_worlds: usize, max_carrier: usize) -> Kripke {
    let n = r.gen_range(1..=max_worlds);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut m = Kripke::new(sig, &names);
    for k in sig.nominals() {
        m.set_nominal(k, r.gen_range(0..n));
    }
    let density: f64 = r.gen_range(0.1..0.7);
    for l in sig.modalities() {
        m.modalities.insert(l.clone(), BTreeSet::new());
        for a in 0..n {
            for b in 0..n {
                if r.gen_bool(density) {
                    m.add_edge(l, a, b);
                }
            }
        }
    }
    let elems = |r: &mut ChaCha8Rng, s: &str| -> Vec<String> {
        (0..r.gen_range(1..=max_carrier)).map(|i| format!("{}{i}", s.to_lowercase())).collect()
    };
    for s in &sig.body.sorts {
        if sig.is_rigid_sort(s) {
            let es = elems(r, s);
            m.set_carrier(s, &es.iter().map(String::as_str).collect::<Vec<_>>());
        } else {
            for w in 0..n {
                let es = elems(r, s);
                m.set_local_carrier(w, s, &es.iter().map(String::as_str).collect::<Vec<_>>());
            }
        }
    }
    for (o, d) in &sig.body.ops {
        let ws = if sig.is_rigid_op(o) { 1 } else { n };
        for w in 0..ws {
            let len = m.table_len(w, &d.args);
            let size = m.size(w, &d.result);
            let table: Vec<usize> = (0..len).map(|_| r.gen_range(0..size)).collect();
            let st = if sig.is_rigid_op(o) { &mut m.rigid } else { &mut m.local[w] };
            st.ops.insert(o.clone(), table);
        }
    }
    for (rel, a) in &sig.body.rels {
        let ws = if sig.is_rigid_rel(rel) { 1 } else { n };
        let p: f64 = r.gen_range(0.2..0.8);
        for w in 0..ws {
            let len = m.table_len(w, a);
            let table: Vec<bool> = (0..len).map(|_| r.gen_bool(p)).collect();
            let st = if sig.is_rigid_rel(rel) { &mut m.rigid } else { &mut m.local[w] };
            st.rels.insert(rel.clone(), table);
        }
    }
    m.validate().expect("generated structures are total");
    m
}

/// Which constructs the generator may use.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub store: bool,
    pub exists: bool,
    /// `⟨a⟩φ` for arbitrary `φ`; otherwise only `⟨λ⟩k`.
    pub general_dia: bool,
    /// Sequences, unions and stars inside modalities.
    pub structured: bool,
    /// World-pinned flexible operations.
    pub pinned: bool,
}

impl Shape {
    pub const FULL: Shape = Shape { store: true, exists: true, general_dia: true, structured: true, pinned: true };
    /// Retrieve, Boolean connectives, quantifiers and `⟨λ⟩k` only.
    pub const RIGIDIFIABLE: Shape = Shape { store: false, exists: true, general_dia: false, structured: false, pinned: true };
    pub const ENCODABLE: Shape = Shape { store: true, exists: true, general_dia: false, structured: false, pinned: true };
}

#[derive(Clone, Default)]
struct Scope {
    noms: Vec<String>,
    terms: Vec<(String, String)>,
}

pub struct SentenceGen<'a> {
    pub sig: &'a HDSignature,
    pub shape: Shape,
    fresh: usize,
    /// Open variables every sentence may use.
    open: Scope,
}

impl<'a> SentenceGen<'a> {
    pub fn new(sig: &'a HDSignature, shape: Shape) -> Self {
        SentenceGen { sig, shape, fresh: 0, open: Scope::default() }
    }

    /// Sentences open in `vars` (nominal or rigid sort).
    pub fn with_open(mut self, vars: &[Var]) -> Self {
        for v in vars {
            if v.sort == self.sig.nominal_sort() {
                self.open.noms.push(v.name.clone());
            } else {
                self.open.terms.push((v.name.clone(), v.sort.clone()));
            }
        }
        self
    }

    fn fresh(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn nominal(&self, r: &mut ChaCha8Rng, sc: &Scope) -> Option<String> {
        let all: Vec<&String> = self.sig.nominals().chain(&sc.noms).collect();
        all.choose(r).map(|s| s.to_string())
    }

    pub fn term(&mut self, r: &mut ChaCha8Rng, sort: &str, depth: usize) -> Option<Term> {
        let sc = self.open.clone();
        self.term_in(r, sort, depth, &sc)
    }

    /// A rigid term: no unpinned flexible operation.
    pub fn rigid_term(&mut self, r: &mut ChaCha8Rng, sort: &str, depth: usize) -> Option<Term> {
        let sc = self.open.clone();
        for _ in 0..20 {
            let t = self.term_in(r, sort, depth, &sc)?;
            if is_rigid(self.sig, &t) {
                return Some(t);
            }
        }
        None
    }

    fn term_in(&mut self, r: &mut ChaCha8Rng, sort: &str, depth: usize, sc: &Scope) -> Option<Term> {
        let sig = self.sig;
        let mut cands: Vec<(Option<String>, String, Vec<String>)> = Vec::new();
        for (x, s) in &sc.terms {
            if s == sort {
                cands.push((None, x.clone(), vec![]));
            }
        }
        for (o, d) in &sig.body.ops {
            if d.result != sort || (depth == 0 && !d.args.is_empty()) {
                continue;
            }
            cands.push((None, o.clone(), d.args.clone()));
            let pinnable = !sig.is_rigid_op(o)
                && sig.is_rigid_sort(&d.result)
                && d.args.iter().all(|a| sig.is_rigid_sort(a));
            if self.shape.pinned && pinnable {
                if let Some(k) = self.nominal(r, sc) {
                    cands.push((Some(k), o.clone(), d.args.clone()));
                }
            }
        }
        cands.shuffle(r);
        'outer: for (k, o, args) in cands {
            let mut ts = Vec::new();
            for a in &args {
                match self.term_in(r, a, depth.saturating_sub(1), sc) {
                    Some(t) => ts.push(t),
                    None => continue 'outer,
                }
            }
            return Some(match k {
                Some(k) => Term::at_app(&k, &o, ts),
                None => Term::app(&o, ts),
            });
        }
        None
    }

    fn atom(&mut self, r: &mut ChaCha8Rng, sc: &Scope) -> Sentence {
        let sig = self.sig;
        for _ in 0..20 {
            match r.gen_range(0..4) {
                0 => {
                    if let Some(k) = self.nominal(r, sc) {
                        return Sentence::nom(&k);
                    }
                }
                1 => {
                    let rels: Vec<(&String, &Vec<String>)> = sig.body.rels.iter().collect();
                    if let Some((name, args)) = rels.choose(r) {
                        let ts: Option<Vec<Term>> = args.iter().map(|a| self.term_in(r, a, 2, sc)).collect();
                        if let Some(ts) = ts {
                            return Sentence::rel(name, ts);
                        }
                    }
                }
                2 => {
                    let sorts: Vec<&String> = sig.body.sorts.iter().collect();
                    if let Some(s) = sorts.choose(r) {
                        if let (Some(a), Some(b)) = (self.term_in(r, s, 2, sc), self.term_in(r, s, 2, sc)) {
                            return Sentence::eq(a, b);
                        }
                    }
                }
                _ => {
                    let ls: Vec<&String> = sig.modalities().collect();
                    if let (Some(l), Some(k)) = (ls.choose(r), self.nominal(r, sc)) {
                        return Sentence::dia(Action::atom(l), Sentence::nom(&k));
                    }
                }
            }
        }
        Sentence::bot()
    }

    pub fn action(&mut self, r: &mut ChaCha8Rng, depth: usize) -> Action {
        let ls: Vec<String> = self.sig.modalities().cloned().collect();
        let atom = Action::atom(ls.choose(r).expect("a modality"));
        if depth == 0 || !self.shape.structured || r.gen_bool(0.4) {
            return atom;
        }
        match r.gen_range(0..3) {
            0 => Action::seq(self.action(r, depth - 1), self.action(r, depth - 1)),
            1 => Action::union(self.action(r, depth - 1), self.action(r, depth - 1)),
            _ => Action::star(self.action(r, depth - 1)),
        }
    }

    /// A sentence of depth drawn from `1..=max`.
    pub fn upto(&mut self, r: &mut ChaCha8Rng, max: usize) -> Sentence {
        let d = r.gen_range(1..=max);
        self.sentence(r, d)
    }

    pub fn sentence(&mut self, r: &mut ChaCha8Rng, depth: usize) -> Sentence {
        let sc = self.open.clone();
        let s = self.sentence_in(r, depth, &sc);
        let vars: Vec<Var> = sc
            .noms
            .iter()
            .map(|k| Var::new(k, self.sig.nominal_sort()))
            .chain(sc.terms.iter().map(|(x, s)| Var::new(x, s)))
            .collect();
        hdfol::syntax::check_open(self.sig, &vars, &s).unwrap_or_else(|e| panic!("generated `{s}`: {e}"));
        s
    }

    fn sentence_in(&mut self, r: &mut ChaCha8Rng, depth: usize, sc: &Scope) -> Sentence {
        if depth == 0 || r.gen_bool(0.2) {
            return self.atom(r, sc);
        }
        let d = depth - 1;
        loop {
            match r.gen_range(0..9) {
                0 => return Sentence::not(self.sentence_in(r, d, sc)),
                1 => {
                    let n = r.gen_range(2..=3);
                    return Sentence::or((0..n).map(|_| self.sentence_in(r, d, sc)).collect::<Vec<_>>());
                }
                2 => return Sentence::and2(self.sentence_in(r, d, sc), self.sentence_in(r, d, sc)),
                3 => {
                    if let Some(k) = self.nominal(r, sc) {
                        return Sentence::at(&k, self.sentence_in(r, d, sc));
                    }
                }
                4 if self.shape.store => {
                    let z = self.fresh();
                    let mut inner = sc.clone();
                    inner.noms.push(z.clone());
                    return Sentence::store(&z, self.sentence_in(r, d, &inner));
                }
                5 | 6 if self.shape.exists => {
                    let x = self.fresh();
                    let mut sorts: Vec<String> = vec![self.sig.nominal_sort().to_string()];
                    sorts.extend(self.sig.body.sorts.iter().filter(|s| self.sig.is_rigid_sort(s)).cloned());
                    let s = sorts.choose(r).unwrap().clone();
                    let mut inner = sc.clone();
                    if s == self.sig.nominal_sort() {
                        inner.noms.push(x.clone());
                    } else {
                        inner.terms.push((x.clone(), s.clone()));
                    }
                    let body = self.sentence_in(r, d, &inner);
                    let v = Var::new(&x, &s);
                    return if r.gen_bool(0.5) { Sentence::exists([v], body) } else { Sentence::forall([v], body) };
                }
                7 | 8 if self.shape.general_dia => {
                    let a = self.action(r, 2);
                    let body = self.sentence_in(r, d, sc);
                    return if r.gen_bool(0.5) { Sentence::dia(a, body) } else { Sentence::boxm(a, body) };
                }
                _ => {
                    if !self.shape.general_dia && !self.shape.store && !self.shape.exists {
                        return self.atom(r, sc);
                    }
                }
            }
        }
    }
}

pub fn is_rigid(sig: &HDSignature, t: &Term) -> bool {
    (t.op.at.is_some() || !sig.body.ops.contains_key(&t.op.name) || sig.is_rigid_op(&t.op.name))
        && t.args.iter().all(|a| is_rigid(sig, a))
}

/// A source signature with its own names and a morphism into `target`.
/// Symbols may be identified, and flexible symbols may land on rigid ones.
pub fn random_morphism(r: &mut ChaCha8Rng, target: &HDSignature) -> SignatureMorphism {
    let mut src = HDSignature::new();
    let mut chi = SignatureMorphism::identity(&src);
    let tn: Vec<String> = target.nominals().cloned().collect();
    for i in 0..r.gen_range(1..=3) {
        let j = format!("j{i}");
        src = src.nominal(&j);
        chi.nominal_map.insert(j, tn.choose(r).unwrap().clone());
    }
    let tm: Vec<String> = target.modalities().cloned().collect();
    for i in 0..r.gen_range(1..=2) {
        let l = format!("l{i}");
        src = src.modality(&l);
        chi.modality_map.insert(l, tm.choose(r).unwrap().clone());
    }
    let mut pre: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, s) in target.body.sorts.iter().enumerate() {
        for c in 0..r.gen_range(1..=2) {
            let name = format!("S{i}{c}");
            src = src.sort(&name, target.is_rigid_sort(s));
            chi.sort_map.insert(name.clone(), s.clone());
            pre.entry(s.clone()).or_default().push(name);
        }
    }
    let mut i = 0;
    for (o, d) in &target.body.ops {
        for _ in 0..r.gen_range(0..=2) {
            let name = format!("o{i}");
            i += 1;
            let args: Vec<String> = d.args.iter().map(|a| pre[a].choose(r).unwrap().clone()).collect();
            let result = pre[&d.result].choose(r).unwrap().clone();
            let rigid = target.is_rigid_op(o) && r.gen_bool(0.7);
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            src = src.op(&name, &args, &result, rigid);
            chi.op_map.insert(name, o.clone());
        }
    }
    for (rel, a) in &target.body.rels {
        for _ in 0..r.gen_range(0..=2) {
            let name = format!("r{i}");
            i += 1;
            let args: Vec<String> = a.iter().map(|s| pre[s].choose(r).unwrap().clone()).collect();
            let rigid = target.is_rigid_rel(rel) && r.gen_bool(0.7);
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            src = src.rel(&name, &args, rigid);
            chi.rel_map.insert(name, rel.clone());
        }
    }
    assert!(src.validate().is_empty(), "{:?}", src.validate());
    chi.source = src;
    chi.target = target.clone();
    chi.check().expect("generated morphisms are well formed");
    chi
}

/// A substitution of the `from` constants by nominals and rigid terms over `sig[to]`.
pub fn random_substitution(r: &mut ChaCha8Rng, base: &HDSignature, from: &[Var], to: &[Var]) -> Substitution {
    let sig_to = base.extend(to).unwrap();
    let mut g = SentenceGen::new(&sig_to, Shape::FULL);
    let mut theta = Substitution::new();
    for x in from {
        if x.sort == base.nominal_sort() {
            let ks: Vec<String> = sig_to.nominals().cloned().collect();
            theta = theta.nominal(&x.name, ks.choose(r).unwrap());
        } else {
            let t = g.rigid_term(r, &x.sort, 2).expect("rigid sorts have rigid terms");
            theta = theta.term(&x.name, t);
        }
    }
    theta
}

/// Environment giving each variable a random value in `m`.
pub fn random_env(r: &mut ChaCha8Rng, m: &Kripke, vars: &[Var]) -> Vec<(String, Val)> {
    vars.iter()
        .map(|x| {
            let v = if x.sort == m.sig.nominal_sort() {
                Val::World(r.gen_range(0..m.n_worlds()))
            } else {
                Val::Elem(r.gen_range(0..m.size(0, &x.sort)))
            };
            (x.name.clone(), v)
        })
        .collect()
}

/// Whether `t` names a substituted target: used to keep generated data honest.
pub fn target_is_rigid(sig: &HDSignature, t: &SubstTarget) -> bool {
    match t {
        SubstTarget::Nominal(k) => sig.is_nominal(k),
        SubstTarget::Term(t) => is_rigid(sig, t),
    }
}

/// Closed-sentence sanity check shared by the suites.
pub fn closed(sig: &HDSignature, s: &Sentence) -> bool {
    check(sig, s).is_ok()
}

// ---------------------------------------------------------------------------
// Oracles on bare relations, independent of the library's evaluator.

/// Adjacency as bitmasks: `adj[u]` has bit `v` set iff `u → v`.
pub type Adj = Vec<u32>;

/// Pairs joined by a path of length ≥ 0, found by extending paths edge by edge from each source.
pub fn reach_by_paths(adj: &Adj) -> Adj {
    let n = adj.len();
    let mut out = vec![0u32; n];
    for (s, row) in out.iter_mut().enumerate() {
        let mut stack = vec![s];
        *row |= 1 << s;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if adj[u] >> v & 1 == 1 && *row >> v & 1 == 0 {
                    *row |= 1 << v;
                    stack.push(v);
                }
            }
        }
    }
    out
}

pub fn compose(a: &Adj, b: &Adj) -> Adj {
    a.iter()
        .map(|&row| (0..b.len()).filter(|&v| row >> v & 1 == 1).fold(0, |acc, v| acc | b[v]))
        .collect()
}

pub fn union(a: &Adj, b: &Adj) -> Adj {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

/// The relation of an action, with `*` read as the union of the first `n` powers.
pub fn action_by_powers(a: &Action, base: &BTreeMap<String, Adj>, n: usize) -> Adj {
    match a {
        Action::Atom(l) => base[l].clone(),
        Action::Seq(x, y) => compose(&action_by_powers(x, base, n), &action_by_powers(y, base, n)),
        Action::Union(x, y) => union(&action_by_powers(x, base, n), &action_by_powers(y, base, n)),
        Action::Star(x) => {
            let r = action_by_powers(x, base, n);
            let mut acc: Adj = (0..n).map(|i| 1u32 << i).collect();
            let mut power = acc.clone();
            for _ in 0..n {
                power = compose(&power, &r);
                acc = union(&acc, &power);
            }
            acc
        }
    }
}

/// `U(φ, ψ)` on the strict order `0 < 1 < … < n-1`, straight from its definition.
pub fn until_direct(phi: &[bool], psi: &[bool], w: usize) -> bool {
    (w + 1..phi.len()).any(|v| phi[v] && (w + 1..v).all(|u| psi[u]))
}

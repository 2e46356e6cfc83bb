use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::kripke::{sat_global, Evaluator, Interp, Kripke, Tv, UNDEF};
use crate::signature::HDSignature;
use crate::syntax::Sentence;

use super::budget::{SatBudget, SatOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Hole {
    Edge(String, usize),
    Op(String, usize, usize),
    Rel(String, usize, usize),
}

const UNSET: u8 = 2;

struct OpTab {
    rigid: bool,
    args: Vec<String>,
    result: String,
    tables: Vec<Vec<usize>>,
}

struct RelTab {
    rigid: bool,
    args: Vec<String>,
    tables: Vec<Vec<u8>>,
}

/// A structure with some edges and table entries left open.
struct Partial<'a> {
    sig: &'a HDSignature,
    n: usize,
    sizes: HashMap<String, usize>,
    noms: HashMap<String, usize>,
    edges: BTreeMap<String, Vec<u8>>,
    ops: BTreeMap<String, OpTab>,
    rels: BTreeMap<String, RelTab>,
}

impl<'a> Partial<'a> {
    fn new(sig: &'a HDSignature, n: usize, sizes: HashMap<String, usize>, noms: HashMap<String, usize>) -> Self {
        let len = |args: &[String]| args.iter().map(|s| sizes[s]).product::<usize>();
        let copies = |rigid: bool| if rigid { 1 } else { n };
        let ops = sig
            .body
            .ops
            .iter()
            .map(|(name, d)| {
                let rigid = sig.is_rigid_op(name);
                let tables = vec![vec![UNDEF; len(&d.args)]; copies(rigid)];
                (name.clone(), OpTab { rigid, args: d.args.clone(), result: d.result.clone(), tables })
            })
            .collect();
        let rels = sig
            .body
            .rels
            .iter()
            .map(|(name, args)| {
                let rigid = sig.is_rigid_rel(name);
                let tables = vec![vec![UNSET; len(args)]; copies(rigid)];
                (name.clone(), RelTab { rigid, args: args.clone(), tables })
            })
            .collect();
        let edges = sig.modalities().map(|l| (l.clone(), vec![UNSET; n * n])).collect();
        Partial { sig, n, sizes, noms, edges, ops, rels }
    }

    fn index(&self, params: &[String], args: &[usize]) -> usize {
        params.iter().zip(args).fold(0, |acc, (s, a)| acc * self.sizes[s] + a)
    }

    fn domain(&self, h: &Hole) -> usize {
        match h {
            Hole::Edge(..) | Hole::Rel(..) => 2,
            Hole::Op(name, ..) => self.sizes[&self.ops[name].result],
        }
    }

    fn set(&mut self, h: &Hole, v: usize) {
        match h {
            Hole::Edge(l, i) => self.edges.get_mut(l).unwrap()[*i] = v as u8,
            Hole::Op(name, t, i) => self.ops.get_mut(name).unwrap().tables[*t][*i] = v,
            Hole::Rel(name, t, i) => self.rels.get_mut(name).unwrap().tables[*t][*i] = v as u8,
        }
    }

    fn unset(&mut self, h: &Hole) {
        match h {
            Hole::Edge(l, i) => self.edges.get_mut(l).unwrap()[*i] = UNSET,
            Hole::Op(name, t, i) => self.ops.get_mut(name).unwrap().tables[*t][*i] = UNDEF,
            Hole::Rel(name, t, i) => self.rels.get_mut(name).unwrap().tables[*t][*i] = UNSET,
        }
    }

    /// Every open entry, in a fixed order.
    fn all_holes(&self) -> Vec<Hole> {
        let mut out = Vec::new();
        for (l, e) in &self.edges {
            out.extend((0..e.len()).filter(|&i| e[i] == UNSET).map(|i| Hole::Edge(l.clone(), i)));
        }
        for (name, t) in &self.ops {
            for (w, tab) in t.tables.iter().enumerate() {
                out.extend((0..tab.len()).filter(|&i| tab[i] == UNDEF).map(|i| Hole::Op(name.clone(), w, i)));
            }
        }
        for (name, t) in &self.rels {
            for (w, tab) in t.tables.iter().enumerate() {
                out.extend((0..tab.len()).filter(|&i| tab[i] == UNSET).map(|i| Hole::Rel(name.clone(), w, i)));
            }
        }
        out
    }

    /// The structure with open entries completed by the first value.
    fn complete(&self) -> Kripke {
        let names: Vec<String> = (0..self.n).map(|i| format!("w{i}")).collect();
        let worlds: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut m = Kripke::new(self.sig, &worlds);
        for (k, &w) in &self.noms {
            m.set_nominal(k, w);
        }
        for (l, e) in &self.edges {
            for a in 0..self.n {
                for b in 0..self.n {
                    if e[a * self.n + b] == 1 {
                        m.add_edge(l, a, b);
                    }
                }
            }
        }
        for s in &self.sig.body.sorts {
            let elems: Vec<String> = (0..self.sizes[s]).map(|i| format!("{}{i}", s.to_lowercase())).collect();
            let refs: Vec<&str> = elems.iter().map(String::as_str).collect();
            m.set_carrier(s, &refs);
        }
        for (name, t) in &self.ops {
            for (w, tab) in t.tables.iter().enumerate() {
                let tab: Vec<usize> = tab.iter().map(|&v| if v == UNDEF { 0 } else { v }).collect();
                if t.rigid {
                    m.rigid.ops.insert(name.clone(), tab);
                } else {
                    m.local[w].ops.insert(name.clone(), tab);
                }
            }
        }
        for (name, t) in &self.rels {
            for (w, tab) in t.tables.iter().enumerate() {
                let tab: Vec<bool> = tab.iter().map(|&v| v == 1).collect();
                if t.rigid {
                    m.rigid.rels.insert(name.clone(), tab);
                } else {
                    m.local[w].rels.insert(name.clone(), tab);
                }
            }
        }
        m
    }
}

impl Interp for Partial<'_> {
    type Hole = Hole;

    fn sig(&self) -> &HDSignature {
        self.sig
    }

    fn n_worlds(&self) -> usize {
        self.n
    }

    fn nominal(&self, k: &str) -> Result<usize, Hole> {
        Ok(*self.noms.get(k).unwrap_or_else(|| panic!("nominal `{k}` is not interpreted")))
    }

    fn edge(&self, l: &str, a: usize, b: usize) -> Result<bool, Hole> {
        let i = a * self.n + b;
        match self.edges[l][i] {
            UNSET => Err(Hole::Edge(l.to_string(), i)),
            v => Ok(v == 1),
        }
    }

    fn size(&self, _w: usize, s: &str) -> usize {
        self.sizes[s]
    }

    fn op(&self, w: usize, name: &str, args: &[usize]) -> Result<usize, Hole> {
        let t = &self.ops[name];
        let copy = if t.rigid { 0 } else { w };
        let i = self.index(&t.args, args);
        match t.tables[copy][i] {
            UNDEF => Err(Hole::Op(name.to_string(), copy, i)),
            v => Ok(v),
        }
    }

    fn rel(&self, w: usize, name: &str, args: &[usize]) -> Result<bool, Hole> {
        let t = &self.rels[name];
        let copy = if t.rigid { 0 } else { w };
        let i = self.index(&t.args, args);
        match t.tables[copy][i] {
            UNSET => Err(Hole::Rel(name.to_string(), copy, i)),
            v => Ok(v == 1),
        }
    }
}

/// Nominal assignments up to renaming of worlds: restricted growth strings.
fn nominal_assignments(noms: &[String], n: usize) -> Vec<HashMap<String, usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(i: usize, k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == k {
            out.push(cur.clone());
            return;
        }
        let bound = cur.iter().copied().max().map_or(0, |m| m + 1).min(n - 1);
        for v in 0..=bound {
            cur.push(v);
            rec(i + 1, k, n, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(0, noms.len(), n, &mut cur, &mut raw);
    for a in raw {
        out.push(noms.iter().cloned().zip(a).collect());
    }
    out
}

/// Carrier size vectors within budget, smallest total first.
fn size_vectors(sig: &HDSignature, budget: &SatBudget) -> Vec<HashMap<String, usize>> {
    let sorts: Vec<&String> = sig.body.sorts.iter().collect();
    let dims: Vec<usize> = sorts.iter().map(|s| budget.carrier_bound(s).max(1)).collect();
    let mut all: Vec<Vec<usize>> = crate::kripke::tuples(&dims).map(|t| t.into_iter().map(|x| x + 1).collect()).collect();
    all.sort_by_key(|t| (t.iter().sum::<usize>(), t.clone()));
    all.into_iter().map(|t| sorts.iter().map(|s| s.to_string()).zip(t).collect()).collect()
}

/// One world count, carrier vector and nominal assignment.
struct Config {
    n: usize,
    sizes: HashMap<String, usize>,
    noms: HashMap<String, usize>,
}

fn configs(sig: &HDSignature, budget: &SatBudget) -> Vec<Config> {
    let noms: Vec<String> = sig.nominals().cloned().collect();
    let mut out = Vec::new();
    for n in 1..=budget.max_worlds.max(1) {
        for sizes in size_vectors(sig, budget) {
            for a in nominal_assignments(&noms, n) {
                out.push(Config { n, sizes: sizes.clone(), noms: a });
            }
        }
    }
    out
}

/// Leaf filter: completions of the listed ops' open entries are tried
/// until one is accepted.
struct Filter<'s> {
    ops: &'s BTreeSet<String>,
    accept: &'s dyn Fn(&Kripke) -> bool,
}

struct Search<'s> {
    theory: &'s [Sentence],
    nodes: u64,
    limit: u64,
    filter: Option<Filter<'s>>,
    found: Option<Kripke>,
}

enum Step {
    Found,
    Dead,
    Exceeded,
}

impl Search<'_> {
    fn status(&self, p: &Partial) -> Result<Option<Hole>, ()> {
        let mut ev = Evaluator::new(p);
        let mut hole = None;
        for s in self.theory {
            for w in 0..p.n {
                match ev.sat(w, s) {
                    Tv::True => {}
                    Tv::False => return Err(()),
                    Tv::Unknown(h) => {
                        if hole.is_none() {
                            hole = Some(h);
                        }
                    }
                }
            }
        }
        Ok(hole)
    }

    fn run(&mut self, p: &mut Partial) -> Step {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Step::Exceeded;
        }
        let hole = match self.status(p) {
            Err(()) => return Step::Dead,
            Ok(None) => return self.leaf(p),
            Ok(Some(h)) => h,
        };
        for v in 0..p.domain(&hole) {
            p.set(&hole, v);
            match self.run(p) {
                Step::Dead => {}
                other => return other,
            }
        }
        p.unset(&hole);
        Step::Dead
    }

    fn leaf(&mut self, p: &mut Partial) -> Step {
        let Some(f) = &self.filter else {
            self.found = Some(p.complete());
            return Step::Found;
        };
        let holes: Vec<Hole> =
            p.all_holes().into_iter().filter(|h| matches!(h, Hole::Op(name, ..) if f.ops.contains(name))).collect();
        let dims: Vec<usize> = holes.iter().map(|h| p.domain(h)).collect();
        let accept = f.accept;
        let mut step = Step::Dead;
        for t in crate::kripke::tuples(&dims) {
            self.nodes += 1;
            if self.nodes > self.limit {
                step = Step::Exceeded;
                break;
            }
            for (h, &v) in holes.iter().zip(&t) {
                p.set(h, v);
            }
            let m = p.complete();
            if accept(&m) {
                self.found = Some(m);
                step = Step::Found;
                break;
            }
        }
        holes.iter().for_each(|h| p.unset(h));
        step
    }
}

/// Searches for a model of `theory` within budget, smallest worlds and
/// carriers first, in a fixed order. Open table entries are branched on
/// only when some sentence depends on them.
pub fn bounded_sat(sig: &HDSignature, theory: &[Sentence], budget: &SatBudget) -> SatOutcome {
    search(sig, theory, budget, None)
}

/// Like [`bounded_sat`], but only returns models passing `accept`. At each
/// candidate, open entries of `ops` are enumerated while all other open
/// entries take their first value, so `accept` must depend only on `ops`,
/// nominals and edges.
pub fn bounded_sat_where(
    sig: &HDSignature,
    theory: &[Sentence],
    budget: &SatBudget,
    ops: &BTreeSet<String>,
    accept: &dyn Fn(&Kripke) -> bool,
) -> SatOutcome {
    search(sig, theory, budget, Some(Filter { ops, accept }))
}

fn search(sig: &HDSignature, theory: &[Sentence], budget: &SatBudget, filter: Option<Filter>) -> SatOutcome {
    if sig.body.sorts.iter().any(|s| budget.carrier_bound(s) == 0) || budget.max_worlds == 0 {
        return SatOutcome::NoModel;
    }
    let mut exceeded = false;
    let mut search = Search { theory, nodes: 0, limit: budget.node_limit, filter, found: None };
    for c in configs(sig, budget) {
        let mut p = Partial::new(sig, c.n, c.sizes, c.noms);
        match search.run(&mut p) {
            Step::Found => {
                let m = search.found.take().unwrap();
                debug_assert!(theory.iter().all(|s| sat_global(&m, s)));
                return SatOutcome::Model(Box::new(m));
            }
            Step::Dead => {}
            Step::Exceeded => {
                exceeded = true;
                break;
            }
        }
    }
    if exceeded {
        SatOutcome::BudgetExceeded
    } else {
        SatOutcome::NoModel
    }
}

/// Every structure within budget, up to renaming of worlds in the nominal
/// assignment. `None` when more than `budget.node_limit` structures exist.
pub fn enumerate_models(sig: &HDSignature, budget: &SatBudget) -> Option<Vec<Kripke>> {
    let mut out = Vec::new();
    for c in configs(sig, budget) {
        let mut p = Partial::new(sig, c.n, c.sizes, c.noms);
        let holes = p.all_holes();
        let dims: Vec<usize> = holes.iter().map(|h| p.domain(h)).collect();
        let count: u128 = dims.iter().map(|&d| d as u128).product();
        if out.len() as u128 + count > budget.node_limit as u128 {
            return None;
        }
        for t in crate::kripke::tuples(&dims) {
            for (h, &v) in holes.iter().zip(&t) {
                p.set(h, v);
            }
            out.push(p.complete());
        }
    }
    Some(out)
}

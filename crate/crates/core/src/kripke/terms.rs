use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::signature::{HDSignature, HSort, Symbol};
use crate::syntax::{print_term, rigidify_term, Action, Sentence, Term};

use super::model::{tuples, Kripke, ModelError};

/// The hybrid sort of `s` seen from world `k`.
pub fn pinned_sort(sig: &HDSignature, k: &str, s: &str) -> HSort {
    if sig.is_rigid_sort(s) {
        HSort::Plain(s.to_string())
    } else {
        HSort::At(k.to_string(), s.to_string())
    }
}

/// A finite set of ground `@Σ`-terms closed under subterms, hash-consed.
#[derive(Debug, Clone, Default)]
pub struct TermUniverse {
    pub terms: Vec<Term>,
    pub sorts: Vec<HSort>,
    pub args: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    index: HashMap<Term, usize>,
}

impl TermUniverse {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    fn sort_of(sig: &HDSignature, sym: &Symbol) -> Option<HSort> {
        let decl = sig.body.ops.get(&sym.name)?;
        Some(match &sym.at {
            Some(k) => pinned_sort(sig, k, &decl.result),
            None => HSort::Plain(decl.result.clone()),
        })
    }

    /// Inserts `t` and its subterms, returning the id of `t`.
    pub fn add(&mut self, sig: &HDSignature, t: &Term) -> Result<usize, ModelError> {
        if let Some(id) = self.get(t) {
            return Ok(id);
        }
        let args = t.args.iter().map(|a| self.add(sig, a)).collect::<Result<Vec<_>, _>>()?;
        let sort = Self::sort_of(sig, &t.op).ok_or_else(|| ModelError::Unknown(t.op.name.clone()))?;
        let id = self.terms.len();
        self.depth.push(args.iter().map(|&a| self.depth[a] + 1).max().unwrap_or(0));
        self.terms.push(t.clone());
        self.sorts.push(sort);
        self.args.push(args);
        self.index.insert(t.clone(), id);
        Ok(id)
    }

    /// All ground `@Σ`-terms up to `depth`, pinning flexible ops to the given nominals.
    pub fn generate(sig: &HDSignature, nominals: &[String], depth: usize) -> Self {
        let mut u = TermUniverse::default();
        let mut symbols: Vec<(Symbol, Vec<HSort>)> = Vec::new();
        for (name, decl) in &sig.body.ops {
            if sig.is_rigid_op(name) {
                symbols.push((Symbol::plain(name), decl.args.iter().map(|a| HSort::Plain(a.clone())).collect()));
            } else {
                for k in nominals {
                    symbols.push((Symbol::at(k, name), decl.args.iter().map(|a| pinned_sort(sig, k, a)).collect()));
                }
            }
        }
        for d in 0..=depth {
            let mut by_sort: HashMap<&HSort, Vec<usize>> = HashMap::new();
            for (id, s) in u.sorts.iter().enumerate() {
                by_sort.entry(s).or_default().push(id);
            }
            let mut fresh = Vec::new();
            for (sym, params) in &symbols {
                if (d == 0) != params.is_empty() {
                    continue;
                }
                let pools: Vec<&[usize]> = params.iter().map(|p| by_sort.get(p).map_or(&[][..], |v| v)).collect();
                let dims: Vec<usize> = pools.iter().map(|p| p.len()).collect();
                for tup in tuples(&dims) {
                    let ids: Vec<usize> = tup.iter().zip(&pools).map(|(&i, p)| p[i]).collect();
                    if d > 0 && !ids.iter().any(|&a| u.depth[a] == d - 1) {
                        continue;
                    }
                    let t = Term { op: sym.clone(), args: ids.iter().map(|&a| u.terms[a].clone()).collect() };
                    fresh.push(t);
                }
            }
            for t in fresh {
                u.add(sig, &t).expect("generated terms are well-formed");
            }
        }
        u
    }
}

/// Least depth at which each sort of the body is inhabited by a ground term.
pub fn inhabitation_depth(sig: &HDSignature) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    loop {
        let mut changed = false;
        for d in sig.body.ops.values() {
            let depth = d.args.iter().map(|a| out.get(a).map(|x| x + 1)).collect::<Option<Vec<_>>>();
            if let Some(ds) = depth {
                let v = ds.into_iter().max().unwrap_or(0);
                if out.get(&d.result).is_none_or(|&old| v < old) {
                    out.insert(d.result.clone(), v);
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn grow(&mut self, n: usize) {
        while self.parent.len() < n {
            self.parent.push(self.parent.len());
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// A term model together with whether the depth bound cut some op closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermModel {
    pub model: Kripke,
    pub truncated: bool,
}

fn canon_term(t: &Term, rep: &dyn Fn(&str) -> String) -> Term {
    Term {
        op: Symbol { at: t.op.at.as_deref().map(rep), name: t.op.name.clone() },
        args: t.args.iter().map(|a| canon_term(a, rep)).collect(),
    }
}

enum Fact {
    Eq(Term, Term),
    Rel(Symbol, Vec<Term>),
    Edge(String, String, String),
}

/// The basic model of a set of basic sentences: nominals modulo asserted
/// identities, carriers as ground terms modulo the congruence generated by
/// asserted equations, and the least relations containing asserted atoms.
pub fn basic_model(b: &[Sentence], sig: &HDSignature, depth: usize) -> Result<TermModel, ModelError> {
    if !sig.is_non_void() {
        return Err(ModelError::Other("signature is void".into()));
    }
    let noms: Vec<String> = sig.nominals().cloned().collect();
    let mut located: Vec<(String, Sentence)> = Vec::new();
    for s in b {
        if !s.is_basic() {
            return Err(ModelError::Other(format!("`{s}` is not a basic sentence")));
        }
        match s {
            Sentence::At(k, g) => located.push((k.clone(), (**g).clone())),
            g => noms.iter().for_each(|k| located.push((k.clone(), g.clone()))),
        }
    }
    let pos = |k: &str| noms.iter().position(|n| n == k).ok_or_else(|| ModelError::Unknown(k.to_string()));
    let mut worlds_uf = UnionFind::new(noms.len());
    for (k, g) in &located {
        if let Sentence::Nominal(k2) = g {
            worlds_uf.union(pos(k)?, pos(k2)?);
        }
    }
    let rep_idx: Vec<usize> = (0..noms.len()).map(|i| worlds_uf.find(i)).collect();
    let rep_name = |k: &str| -> String {
        let i = noms.iter().position(|n| n == k).expect("checked nominal");
        noms[rep_idx[i]].clone()
    };
    let reps: Vec<String> = noms.iter().enumerate().filter(|(i, _)| rep_idx[*i] == *i).map(|(_, n)| n.clone()).collect();

    let mut facts = Vec::new();
    for (k, g) in &located {
        let k = rep_name(k);
        let pin = |t: &Term| canon_term(&rigidify_term(sig, &k, t), &rep_name);
        match g {
            Sentence::Nominal(_) => {}
            Sentence::Dia(Action::Atom(l), tgt) => {
                let Sentence::Nominal(k2) = &**tgt else { unreachable!("basic sentence") };
                pos(k2)?;
                facts.push(Fact::Edge(l.clone(), k.clone(), rep_name(k2)));
            }
            Sentence::Eq(t1, t2) => facts.push(Fact::Eq(pin(t1), pin(t2))),
            Sentence::Rel(sym, ts) => {
                let sym = match &sym.at {
                    Some(k2) => Symbol::at(&rep_name(k2), &sym.name),
                    None if sig.is_rigid_rel(&sym.name) => sym.clone(),
                    None => Symbol::at(&k, &sym.name),
                };
                facts.push(Fact::Rel(sym, ts.iter().map(pin).collect()));
            }
            _ => unreachable!("basic sentence"),
        }
    }

    let min_depth = inhabitation_depth(sig).values().copied().max().unwrap_or(0);
    let mut u = TermUniverse::generate(sig, &reps, depth.max(min_depth));
    for f in &facts {
        match f {
            Fact::Eq(a, b) => {
                u.add(sig, a)?;
                u.add(sig, b)?;
            }
            Fact::Rel(_, ts) => {
                for t in ts {
                    u.add(sig, t)?;
                }
            }
            Fact::Edge(..) => {}
        }
    }

    let mut uf = UnionFind::new(u.len());
    uf.grow(u.len());
    for f in &facts {
        if let Fact::Eq(a, b) = f {
            uf.union(u.get(a).unwrap(), u.get(b).unwrap());
        }
    }
    let mut table: HashMap<(Symbol, Vec<usize>), usize> = HashMap::new();
    loop {
        table.clear();
        let mut changed = false;
        for id in 0..u.len() {
            let key = (u.terms[id].op.clone(), u.args[id].iter().map(|&a| uf.find(a)).collect::<Vec<_>>());
            match table.get(&key) {
                Some(&other) => changed |= uf.union(other, id),
                None => {
                    table.insert(key, id);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let table: HashMap<(Symbol, Vec<usize>), usize> = table.into_iter().map(|(k, v)| (k, uf.find(v))).collect();

    // Carriers: classes per hybrid sort, ordered by their least representative.
    let mut classes: BTreeMap<HSort, BTreeMap<usize, (usize, String)>> = BTreeMap::new();
    for id in 0..u.len() {
        let root = uf.find(id);
        let key = (u.terms[id].size(), print_term(&u.terms[id]));
        let entry = classes.entry(u.sorts[id].clone()).or_default();
        match entry.get(&root) {
            Some(old) if *old <= key => {}
            _ => {
                entry.insert(root, key);
            }
        }
    }
    let mut elem_of: HashMap<usize, usize> = HashMap::new();
    let mut carriers: BTreeMap<HSort, Vec<String>> = BTreeMap::new();
    for (sort, cls) in &classes {
        let mut ordered: Vec<(&(usize, String), usize)> = cls.iter().map(|(r, k)| (k, *r)).collect();
        ordered.sort();
        for (i, (_, root)) in ordered.iter().enumerate() {
            elem_of.insert(*root, i);
        }
        carriers.insert(sort.clone(), ordered.into_iter().map(|(k, _)| k.1.clone()).collect());
    }
    let roots_of = |sort: &HSort| -> Vec<usize> {
        let mut v: Vec<(usize, usize)> =
            classes.get(sort).map_or_else(Vec::new, |c| c.keys().map(|&r| (elem_of[&r], r)).collect());
        v.sort();
        v.into_iter().map(|(_, r)| r).collect()
    };

    let world_names: Vec<&str> = reps.iter().map(String::as_str).collect();
    let mut m = Kripke::new(sig, &world_names);
    for (i, k) in noms.iter().enumerate() {
        let w = reps.iter().position(|r| *r == noms[rep_idx[i]]).unwrap();
        m.set_nominal(k, w);
    }
    for (w, k) in reps.iter().enumerate() {
        for s in &sig.body.sorts {
            let hs = pinned_sort(sig, k, s);
            let elems = carriers.get(&hs).cloned().unwrap_or_default();
            if sig.is_rigid_sort(s) {
                m.rigid.carriers.insert(s.clone(), elems);
            } else {
                m.local[w].carriers.insert(s.clone(), elems);
            }
        }
    }
    let mut truncated = false;
    for (w, k) in reps.iter().enumerate() {
        for (name, decl) in &sig.body.ops {
            let rigid = sig.is_rigid_op(name);
            if rigid && w > 0 {
                continue;
            }
            let sym = if rigid { Symbol::plain(name) } else { Symbol::at(k, name) };
            let arg_roots: Vec<Vec<usize>> = decl.args.iter().map(|a| roots_of(&pinned_sort(sig, k, a))).collect();
            let dims: Vec<usize> = arg_roots.iter().map(Vec::len).collect();
            let mut out = Vec::new();
            for tup in tuples(&dims) {
                let key = (sym.clone(), tup.iter().zip(&arg_roots).map(|(&i, r)| r[i]).collect::<Vec<_>>());
                match table.get(&key) {
                    Some(root) => out.push(elem_of[root]),
                    None => {
                        truncated = true;
                        out.push(0);
                    }
                }
            }
            if rigid {
                m.rigid.ops.insert(name.clone(), out);
            } else {
                m.local[w].ops.insert(name.clone(), out);
            }
        }
    }
    let mut true_rels: BTreeSet<(Symbol, Vec<usize>)> = BTreeSet::new();
    for f in &facts {
        match f {
            Fact::Rel(sym, ts) => {
                let args = ts.iter().map(|t| elem_of[&uf.find(u.get(t).unwrap())]).collect();
                true_rels.insert((sym.clone(), args));
            }
            Fact::Edge(l, a, b) => {
                let wa = reps.iter().position(|r| r == a).unwrap();
                let wb = reps.iter().position(|r| r == b).unwrap();
                m.add_edge(l, wa, wb);
            }
            Fact::Eq(..) => {}
        }
    }
    for (w, k) in reps.iter().enumerate() {
        for (name, params) in &sig.body.rels {
            let rigid = sig.is_rigid_rel(name);
            if rigid && w > 0 {
                continue;
            }
            let sym = if rigid { Symbol::plain(name) } else { Symbol::at(k, name) };
            let dims = m.dims(w, params);
            let table: Vec<bool> = tuples(&dims).map(|t| true_rels.contains(&(sym.clone(), t))).collect();
            if rigid {
                m.rigid.rels.insert(name.clone(), table);
            } else {
                m.local[w].rels.insert(name.clone(), table);
            }
        }
    }
    Ok(TermModel { model: m, truncated })
}

/// The initial model of terms, materialized up to `depth`.
pub fn initial_model(sig: &HDSignature, depth: usize) -> Result<TermModel, ModelError> {
    basic_model(&[], sig, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kripke::{eval_term, sat_global, sat_theory};
    use crate::syntax::parse_sentence;

    #[test]
    fn initial_list_model() {
        let sig = fixtures::list_signature();
        let tm = initial_model(&sig, 2).unwrap();
        let m = &tm.model;
        m.validate().unwrap();
        assert_eq!(m.worlds, vec!["n0", "n1", "n2"]);
        let lists = m.carrier(0, "List");
        assert!(lists.contains(&"empty".to_string()));
        assert!(lists.contains(&"cons(e, empty)".to_string()));
        assert!(tm.truncated);
        assert!(m.modalities.values().all(|r| r.is_empty()));
    }

    #[test]
    fn void_signature_is_rejected() {
        let sig = HDSignature::new().nominal("k").sort("s", true);
        assert!(initial_model(&sig, 2).is_err());
        assert!(initial_model(&HDSignature::new(), 1).is_err());
    }

    #[test]
    fn basic_model_of_a_proposition() {
        let sig = fixtures::hpl_signature();
        let b = vec![parse_sentence(&sig, "@k rho").unwrap()];
        let m = basic_model(&b, &sig, 1).unwrap().model;
        assert_eq!(m.n_worlds(), 1);
        assert!(sat_theory(&m, &b));
    }

    #[test]
    fn congruence_propagates_through_ops() {
        let sig = HDSignature::new()
            .nominal("k")
            .sort("s", true)
            .op("a", &[], "s", true)
            .op("b", &[], "s", true)
            .op("f", &["s"], "s", false);
        let b = vec![parse_sentence(&sig, "@k a = b").unwrap()];
        let tm = basic_model(&b, &sig, 2).unwrap();
        let m = &tm.model;
        let fa = crate::syntax::parse_term(&sig, "(at k f)(a)").unwrap();
        let fb = crate::syntax::parse_term(&sig, "(at k f)(b)").unwrap();
        assert_eq!(eval_term(m, 0, &fa), eval_term(m, 0, &fb));
        assert_eq!(eval_term(m, 0, &Term::cnst("a")), eval_term(m, 0, &Term::cnst("b")));
    }

    #[test]
    fn nominal_identities_merge_worlds() {
        let sig = fixtures::chain3_signature();
        let b = vec![
            parse_sentence(&sig, "@k1 k2").unwrap(),
            parse_sentence(&sig, "@k0 <lambda> k2").unwrap(),
        ];
        let m = basic_model(&b, &sig, 0).unwrap().model;
        assert_eq!(m.worlds, vec!["k0", "k1"]);
        assert!(sat_global(&m, &parse_sentence(&sig, "@k0 <lambda> k1").unwrap()));
    }

    #[test]
    fn list_ground_atoms_resolve_every_delete() {
        let sig = fixtures::list_signature();
        let atoms: Vec<Sentence> = fixtures::list_ground_theory(2).into_iter().filter(Sentence::is_basic).collect();
        let tm = basic_model(&atoms, &sig, 2).unwrap();
        assert_eq!(tm.model.carrier(0, "List").len(), 3);
        assert!(sat_theory(&tm.model, &atoms));
    }
}

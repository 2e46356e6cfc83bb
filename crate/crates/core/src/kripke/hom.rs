use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{tuples, Kripke};

/// A Kripke homomorphism: a world map and per-world element maps, with one
/// shared map for every rigid sort.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hom {
    pub worlds: Vec<usize>,
    pub rigid: BTreeMap<String, Vec<usize>>,
    pub local: Vec<BTreeMap<String, Vec<usize>>>,
}

impl Hom {
    pub fn elem(&self, m: &Kripke, w: usize, s: &str, e: usize) -> usize {
        if m.sig.is_rigid_sort(s) {
            self.rigid[s][e]
        } else {
            self.local[w][s][e]
        }
    }

    /// Surjective on worlds and on every carrier.
    pub fn is_surjective(&self, dst: &Kripke) -> bool {
        let onto = |img: &[usize], n: usize| {
            let mut hit = vec![false; n];
            img.iter().for_each(|&i| hit[i] = true);
            hit.into_iter().all(|b| b)
        };
        if !onto(&self.worlds, dst.n_worlds()) {
            return false;
        }
        if !self.rigid.iter().all(|(s, img)| onto(img, dst.size(0, s))) {
            return false;
        }
        (0..dst.n_worlds()).all(|v| {
            dst.sig.flexible_sorts().all(|s| {
                let mut hit = vec![false; dst.size(v, s)];
                for (w, maps) in self.local.iter().enumerate() {
                    if self.worlds[w] == v {
                        maps[s].iter().for_each(|&i| hit[i] = true);
                    }
                }
                hit.into_iter().all(|b| b)
            })
        })
    }
}

#[derive(Clone)]
struct Slot {
    world: Option<usize>,
    sort: String,
}

enum Check {
    Op { world: usize, name: String, args: Vec<usize>, result: usize },
    Rel { world: usize, name: String, args: Vec<usize> },
}

struct Search<'a> {
    dst: &'a Kripke,
    worlds: Vec<usize>,
    slots: Vec<Slot>,
    domain: Vec<usize>,
    checks: Vec<Vec<Check>>,
    value: Vec<usize>,
}

impl Search<'_> {
    fn ok(&self, c: &Check) -> bool {
        match c {
            Check::Op { world, name, args, result } => {
                let a: Vec<usize> = args.iter().map(|&s| self.value[s]).collect();
                self.dst.apply_op(self.worlds[*world], name, &a) == self.value[*result]
            }
            Check::Rel { world, name, args } => {
                let a: Vec<usize> = args.iter().map(|&s| self.value[s]).collect();
                self.dst.holds_rel(self.worlds[*world], name, &a)
            }
        }
    }

    fn run(&mut self, i: usize) -> bool {
        if i == self.slots.len() {
            return true;
        }
        for v in 0..self.domain[i] {
            self.value[i] = v;
            if self.checks[i].iter().all(|c| self.ok(c)) && self.run(i + 1) {
                return true;
            }
        }
        false
    }
}

fn world_maps(src: &Kripke, dst: &Kripke) -> Vec<Vec<usize>> {
    let dims = vec![dst.n_worlds(); src.n_worlds()];
    tuples(&dims)
        .filter(|h| {
            src.nominals.iter().all(|(k, &w)| dst.nominals.get(k) == Some(&h[w]))
                && src.modalities.iter().all(|(l, r)| r.iter().all(|&(a, b)| dst.edge(l, h[a], h[b])))
        })
        .collect()
}

/// Searches for a homomorphism from `src` to `dst` over the same signature.
pub fn find_hom(src: &Kripke, dst: &Kripke) -> Option<Hom> {
    find_homs(src, dst, true).into_iter().next()
}

/// One homomorphism per admissible world map; stops after the first when `first_only` is set.
pub fn find_homs(src: &Kripke, dst: &Kripke, first_only: bool) -> Vec<Hom> {
    let sig = &src.sig;
    let mut out = Vec::new();
    for worlds in world_maps(src, dst) {
        let mut slots = Vec::new();
        let mut domain = Vec::new();
        let mut slot_of: BTreeMap<(Option<usize>, String), usize> = BTreeMap::new();
        for s in &sig.rigid.sorts {
            slot_of.insert((None, s.clone()), slots.len());
            for _ in 0..src.size(0, s) {
                slots.push(Slot { world: None, sort: s.clone() });
                domain.push(dst.size(0, s));
            }
        }
        for w in 0..src.n_worlds() {
            for s in sig.flexible_sorts() {
                slot_of.insert((Some(w), s.clone()), slots.len());
                for _ in 0..src.size(w, s) {
                    slots.push(Slot { world: Some(w), sort: s.clone() });
                    domain.push(dst.size(worlds[w], s));
                }
            }
        }
        let slot = |w: usize, s: &str, e: usize| -> usize {
            let key = if sig.is_rigid_sort(s) { (None, s.to_string()) } else { (Some(w), s.to_string()) };
            slot_of[&key] + e
        };
        let mut checks: Vec<Vec<Check>> = (0..slots.len()).map(|_| Vec::new()).collect();
        let mut global = Vec::new();
        for w in 0..src.n_worlds() {
            for (name, decl) in &sig.body.ops {
                if sig.is_rigid_op(name) && w > 0 {
                    continue;
                }
                for t in tuples(&src.dims(w, &decl.args)) {
                    let r = src.apply_op(w, name, &t);
                    let args: Vec<usize> = t.iter().zip(&decl.args).map(|(&e, s)| slot(w, s, e)).collect();
                    let result = slot(w, &decl.result, r);
                    let last = args.iter().copied().chain([result]).max().unwrap();
                    checks[last].push(Check::Op { world: w, name: name.clone(), args, result });
                }
            }
            for (name, params) in &sig.body.rels {
                if sig.is_rigid_rel(name) && w > 0 {
                    continue;
                }
                for t in tuples(&src.dims(w, params)) {
                    if !src.holds_rel(w, name, &t) {
                        continue;
                    }
                    let args: Vec<usize> = t.iter().zip(params).map(|(&e, s)| slot(w, s, e)).collect();
                    match args.iter().max() {
                        Some(&last) => checks[last].push(Check::Rel { world: w, name: name.clone(), args }),
                        None => global.push(Check::Rel { world: w, name: name.clone(), args }),
                    }
                }
            }
        }
        let mut search = Search { dst, worlds: worlds.clone(), value: vec![0; slots.len()], slots, domain, checks };
        if !global.iter().all(|c| search.ok(c)) {
            continue;
        }
        if search.run(0) {
            let mut rigid = BTreeMap::new();
            let mut local = vec![BTreeMap::new(); src.n_worlds()];
            for (i, s) in search.slots.iter().enumerate() {
                let map = match s.world {
                    None => rigid.entry(s.sort.clone()).or_insert_with(Vec::new),
                    Some(w) => local[w].entry(s.sort.clone()).or_insert_with(Vec::new),
                };
                map.push(search.value[i]);
            }
            for s in &sig.rigid.sorts {
                rigid.entry(s.clone()).or_default();
            }
            for maps in &mut local {
                for s in sig.flexible_sorts() {
                    maps.entry(s.clone()).or_default();
                }
            }
            out.push(Hom { worlds, rigid, local });
            if first_only {
                return out;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn k1_embeds_into_k2() {
        let h = find_hom(&fixtures::hpl_k1(), &fixtures::hpl_k2()).unwrap();
        assert_eq!(h.worlds, vec![0]);
    }

    #[test]
    fn k2_collapses_onto_k1() {
        // rho fails at w, so nothing blocks sending w to k.
        assert!(find_hom(&fixtures::hpl_k2(), &fixtures::hpl_k1()).is_some());
    }

    #[test]
    fn identity_exists() {
        for m in [fixtures::list_canonical_model(), fixtures::chain3_model(), fixtures::hpl_k2()] {
            assert!(find_homs(&m, &m, false).iter().any(|h| h.is_surjective(&m)));
        }
    }
}

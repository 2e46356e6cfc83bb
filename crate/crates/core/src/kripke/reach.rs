use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::signature::ConstructorPartition;

use super::model::{tuples, Kripke};

/// A verdict that a depth bound may leave open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reach {
    Yes,
    No,
    /// Every element is generated, but some only by terms deeper than the bound.
    BeyondBound,
}

/// Generated elements: one vector per rigid sort, and per world for flexible sorts.
struct Marks {
    rigid: BTreeMap<String, Vec<bool>>,
    local: Vec<BTreeMap<String, Vec<bool>>>,
}

impl Marks {
    fn empty(m: &Kripke) -> Self {
        let sig = &m.sig;
        Marks {
            rigid: sig.rigid.sorts.iter().map(|s| (s.clone(), vec![false; m.size(0, s)])).collect(),
            local: (0..m.n_worlds())
                .map(|w| sig.flexible_sorts().map(|s| (s.clone(), vec![false; m.size(w, s)])).collect())
                .collect(),
        }
    }

    fn get(&self, m: &Kripke, w: usize, s: &str, e: usize) -> bool {
        if m.sig.is_rigid_sort(s) {
            self.rigid[s][e]
        } else {
            self.local[w][s][e]
        }
    }

    fn set(&mut self, m: &Kripke, w: usize, s: &str, e: usize) -> bool {
        let v = if m.sig.is_rigid_sort(s) {
            self.rigid.get_mut(s).unwrap()
        } else {
            self.local[w].get_mut(s).unwrap()
        };
        !std::mem::replace(&mut v[e], true)
    }

    fn all(&self, sorts: &dyn Fn(&str) -> bool) -> bool {
        self.rigid.iter().chain(self.local.iter().flatten()).filter(|(s, _)| sorts(s)).all(|(_, v)| v.iter().all(|&b| b))
    }
}

/// One round of applying `ops` at every world; returns whether anything new was generated.
fn step(m: &Kripke, marks: &mut Marks, ops: &[String]) -> bool {
    let sig = &m.sig;
    let mut fresh = Vec::new();
    for w in 0..m.n_worlds() {
        for name in ops {
            if sig.is_rigid_op(name) && w > 0 {
                continue;
            }
            let decl = &sig.body.ops[name];
            for t in tuples(&m.dims(w, &decl.args)) {
                if t.iter().zip(&decl.args).all(|(&e, s)| marks.get(m, w, s, e)) {
                    fresh.push((w, decl.result.clone(), m.apply_op(w, name, &t)));
                }
            }
        }
    }
    let mut changed = false;
    for (w, s, e) in fresh {
        changed |= marks.set(m, w, &s, e);
    }
    changed
}

fn closure(m: &Kripke, mut marks: Marks, ops: &[String], depth: usize, target: &dyn Fn(&str) -> bool) -> Reach {
    for _ in 0..=depth {
        step(m, &mut marks, ops);
    }
    if marks.all(target) {
        return Reach::Yes;
    }
    while step(m, &mut marks, ops) {}
    if marks.all(target) {
        Reach::BeyondBound
    } else {
        Reach::No
    }
}

fn all_named(m: &Kripke) -> bool {
    m.named_worlds().len() == m.n_worlds()
}

/// Every world named, and every element the value of a ground `@Σ`-term of depth at most `depth`.
pub fn is_reachable(m: &Kripke, depth: usize) -> Reach {
    if !all_named(m) {
        return Reach::No;
    }
    let ops: Vec<String> = m.sig.body.ops.keys().cloned().collect();
    closure(m, Marks::empty(m), &ops, depth, &|_| true)
}

/// Every world named, and every element of a constrained sort the value of a
/// constructor term over loose variables, of depth at most `depth`.
pub fn is_constructor_based(m: &Kripke, partition: &ConstructorPartition, depth: usize) -> Reach {
    if !all_named(m) {
        return Reach::No;
    }
    let mut marks = Marks::empty(m);
    for s in &partition.loose {
        marks.rigid.get_mut(s).unwrap().iter_mut().for_each(|b| *b = true);
    }
    let ops: Vec<String> = partition.constructors.ops.keys().cloned().collect();
    closure(m, marks, &ops, depth, &|s| partition.constrained.contains(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn hpl_reachability() {
        assert_eq!(is_reachable(&fixtures::hpl_k1(), 0), Reach::Yes);
        assert_eq!(is_reachable(&fixtures::hpl_k2(), 0), Reach::No);
    }

    #[test]
    fn canonical_lists_are_constructor_based() {
        let m = fixtures::list_canonical_model();
        let p = m.sig.partition(&fixtures::list_constructors()).unwrap();
        assert_eq!(is_constructor_based(&m, &p, 2), Reach::Yes);
        assert_eq!(is_constructor_based(&m, &p, 1), Reach::BeyondBound);
        assert_eq!(is_reachable(&m, 2), Reach::Yes);
    }

    #[test]
    fn junk_element_is_not_generated() {
        let mut m = fixtures::list_canonical_model();
        m.set_carrier("Elt", &["e", "junk"]);
        m.fill_op(0, "e", |_| 0).fill_op(0, "cons", |a| (a[1] + 1).min(2));
        m.validate().unwrap();
        assert_eq!(is_reachable(&m, 5), Reach::No);
        let p = m.sig.partition(&fixtures::list_constructors()).unwrap();
        assert_eq!(is_constructor_based(&m, &p, 5), Reach::Yes);
    }
}

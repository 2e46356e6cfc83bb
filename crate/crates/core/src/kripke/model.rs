use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signature::HDSignature;

/// Marker for a table entry that has not been defined yet.
pub const UNDEF: usize = usize::MAX;

/// A first-order structure over part of a signature. Op and relation tables
/// are dense, indexed in mixed radix over the argument carriers (first
/// argument most significant).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub carriers: BTreeMap<String, Vec<String>>,
    pub ops: BTreeMap<String, Vec<usize>>,
    pub rels: BTreeMap<String, Vec<bool>>,
}

/// A finite Kripke structure. Rigid sorts, ops and relations live once in
/// `rigid`; `local[w]` holds the flexible part of world `w`, so the sharing
/// condition holds by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kripke {
    pub sig: HDSignature,
    pub worlds: Vec<String>,
    pub nominals: BTreeMap<String, usize>,
    pub modalities: BTreeMap<String, BTreeSet<(usize, usize)>>,
    pub rigid: Structure,
    pub local: Vec<Structure>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("a Kripke structure needs at least one world")]
    NoWorlds,
    #[error("empty carrier for sort `{0}`")]
    EmptyCarrier(String),
    #[error("missing carrier for sort `{0}`")]
    MissingCarrier(String),
    #[error("nominal `{0}` has no denotation")]
    MissingNominal(String),
    #[error("table for `{0}` is partial or has the wrong size")]
    PartialTable(String),
    #[error("value out of range in `{0}`")]
    OutOfRange(String),
    #[error("unknown symbol `{0}`")]
    Unknown(String),
    #[error("sharing condition violated for `{0}`")]
    Sharing(String),
    #[error("{0}")]
    Other(String),
}

impl Structure {
    pub fn size(&self, s: &str) -> usize {
        self.carriers.get(s).map_or(0, Vec::len)
    }
}

impl Kripke {
    /// A structure with the given worlds and no interpretation yet.
    pub fn new(sig: &HDSignature, worlds: &[&str]) -> Self {
        Kripke {
            sig: sig.clone(),
            worlds: worlds.iter().map(|w| w.to_string()).collect(),
            nominals: BTreeMap::new(),
            modalities: sig.modalities().map(|l| (l.clone(), BTreeSet::new())).collect(),
            rigid: Structure::default(),
            local: vec![Structure::default(); worlds.len()],
        }
    }

    pub fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn set_nominal(&mut self, k: &str, w: usize) -> &mut Self {
        self.nominals.insert(k.to_string(), w);
        self
    }

    pub fn add_edge(&mut self, l: &str, a: usize, b: usize) -> &mut Self {
        self.modalities.entry(l.to_string()).or_default().insert((a, b));
        self
    }

    /// Sets the carrier of a rigid sort, or of a flexible sort at every world.
    pub fn set_carrier(&mut self, s: &str, elems: &[&str]) -> &mut Self {
        let v: Vec<String> = elems.iter().map(|e| e.to_string()).collect();
        if self.sig.is_rigid_sort(s) {
            self.rigid.carriers.insert(s.to_string(), v);
        } else {
            for st in &mut self.local {
                st.carriers.insert(s.to_string(), v.clone());
            }
        }
        self
    }

    pub fn set_local_carrier(&mut self, w: usize, s: &str, elems: &[&str]) -> &mut Self {
        self.local[w].carriers.insert(s.to_string(), elems.iter().map(|e| e.to_string()).collect());
        self
    }

    fn structure_for(&self, w: usize, rigid: bool) -> &Structure {
        if rigid {
            &self.rigid
        } else {
            &self.local[w]
        }
    }

    pub fn carrier(&self, w: usize, s: &str) -> &[String] {
        let st = self.structure_for(w, self.sig.is_rigid_sort(s));
        st.carriers.get(s).map_or(&[][..], |v| v.as_slice())
    }

    pub fn size(&self, w: usize, s: &str) -> usize {
        self.carrier(w, s).len()
    }

    /// Sizes of the argument carriers of an op or relation profile at `w`.
    pub fn dims(&self, w: usize, args: &[String]) -> Vec<usize> {
        args.iter().map(|s| self.size(w, s)).collect()
    }

    pub fn table_len(&self, w: usize, args: &[String]) -> usize {
        self.dims(w, args).iter().product()
    }

    /// Defines an op at world `w` (ignored for rigid ops) by a function of argument indices.
    pub fn fill_op(&mut self, w: usize, name: &str, f: impl Fn(&[usize]) -> usize) -> &mut Self {
        let decl = self.sig.body.ops[name].clone();
        let rigid = self.sig.is_rigid_op(name);
        let dims = self.dims(w, &decl.args);
        let table: Vec<usize> = tuples(&dims).map(|t| f(&t)).collect();
        if rigid {
            self.rigid.ops.insert(name.to_string(), table);
        } else {
            self.local[w].ops.insert(name.to_string(), table);
        }
        self
    }

    pub fn fill_rel(&mut self, w: usize, name: &str, f: impl Fn(&[usize]) -> bool) -> &mut Self {
        let args = self.sig.body.rels[name].clone();
        let rigid = self.sig.is_rigid_rel(name);
        let dims = self.dims(w, &args);
        let table: Vec<bool> = tuples(&dims).map(|t| f(&t)).collect();
        if rigid {
            self.rigid.rels.insert(name.to_string(), table);
        } else {
            self.local[w].rels.insert(name.to_string(), table);
        }
        self
    }

    pub fn op_table(&self, w: usize, name: &str) -> &[usize] {
        let st = self.structure_for(w, self.sig.is_rigid_op(name));
        st.ops.get(name).map_or(&[][..], |v| v.as_slice())
    }

    pub fn rel_table(&self, w: usize, name: &str) -> &[bool] {
        let st = self.structure_for(w, self.sig.is_rigid_rel(name));
        st.rels.get(name).map_or(&[][..], |v| v.as_slice())
    }

    /// Position of an argument tuple in a table over carriers of sizes `dims`.
    pub fn index(dims: &[usize], args: &[usize]) -> usize {
        dims.iter().zip(args).fold(0, |acc, (d, a)| acc * d + a)
    }

    pub fn apply_op(&self, w: usize, name: &str, args: &[usize]) -> usize {
        let decl = &self.sig.body.ops[name];
        let dims = self.dims(w, &decl.args);
        self.op_table(w, name)[Self::index(&dims, args)]
    }

    pub fn holds_rel(&self, w: usize, name: &str, args: &[usize]) -> bool {
        let params = &self.sig.body.rels[name];
        let dims = self.dims(w, params);
        self.rel_table(w, name)[Self::index(&dims, args)]
    }

    pub fn edge(&self, l: &str, a: usize, b: usize) -> bool {
        self.modalities.get(l).is_some_and(|r| r.contains(&(a, b)))
    }

    /// Checks totality of nominals and tables and non-emptiness of carriers.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.worlds.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let n = self.worlds.len();
        for k in self.sig.nominals() {
            match self.nominals.get(k) {
                Some(&w) if w < n => {}
                Some(_) => return Err(ModelError::OutOfRange(k.clone())),
                None => return Err(ModelError::MissingNominal(k.clone())),
            }
        }
        if let Some(k) = self.nominals.keys().find(|k| !self.sig.is_nominal(k)) {
            return Err(ModelError::Unknown(k.clone()));
        }
        for (l, r) in &self.modalities {
            if !self.sig.is_modality(l) {
                return Err(ModelError::Unknown(l.clone()));
            }
            if r.iter().any(|&(a, b)| a >= n || b >= n) {
                return Err(ModelError::OutOfRange(l.clone()));
            }
        }
        for w in 0..n {
            for s in &self.sig.body.sorts {
                let st = self.structure_for(w, self.sig.is_rigid_sort(s));
                match st.carriers.get(s) {
                    None => return Err(ModelError::MissingCarrier(s.clone())),
                    Some(c) if c.is_empty() => return Err(ModelError::EmptyCarrier(s.clone())),
                    _ => {}
                }
            }
            for (name, decl) in &self.sig.body.ops {
                let table = self.op_table(w, name);
                if table.len() != self.table_len(w, &decl.args) || table.contains(&UNDEF) {
                    return Err(ModelError::PartialTable(name.clone()));
                }
                let bound = self.size(w, &decl.result);
                if table.iter().any(|&v| v >= bound) {
                    return Err(ModelError::OutOfRange(name.clone()));
                }
            }
            for (name, args) in &self.sig.body.rels {
                if self.rel_table(w, name).len() != self.table_len(w, args) {
                    return Err(ModelError::PartialTable(name.clone()));
                }
            }
        }
        Ok(())
    }

    /// Names of the worlds denoted by some nominal.
    pub fn named_worlds(&self) -> BTreeSet<usize> {
        self.nominals.values().copied().collect()
    }
}

/// All tuples over `0..dims[i]`, in lexicographic order.
pub fn tuples(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> {
    let dims = dims.to_vec();
    let total: usize = dims.iter().product();
    (0..total).map(move |mut i| {
        let mut t = vec![0; dims.len()];
        for j in (0..dims.len()).rev() {
            t[j] = i % dims[j];
            i /= dims[j];
        }
        t
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn tuples_are_lexicographic_and_match_index() {
        let dims = [2, 3];
        let all: Vec<Vec<usize>> = tuples(&dims).collect();
        assert_eq!(all.len(), 6);
        for (i, t) in all.iter().enumerate() {
            assert_eq!(Kripke::index(&dims, t), i);
        }
        assert_eq!(tuples(&[]).count(), 1);
    }

    #[test]
    fn fixtures_validate() {
        fixtures::hpl_k1().validate().unwrap();
        fixtures::hpl_k2().validate().unwrap();
        fixtures::chain3_model().validate().unwrap();
        fixtures::list_canonical_model().validate().unwrap();
    }

    #[test]
    fn empty_carrier_is_rejected() {
        let sig = HDSignature::new().nominal("k").sort("s", true);
        let mut m = Kripke::new(&sig, &["w"]);
        m.set_nominal("k", 0).set_carrier("s", &[]);
        assert_eq!(m.validate(), Err(ModelError::EmptyCarrier("s".into())));
    }
}

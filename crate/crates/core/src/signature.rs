//! Signatures: first-order signatures, hybrid-dynamic signatures with a rigid
//! part, morphisms, extension by variables, rigidification and constructor
//! partitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default name of the nominal sort.
pub const ANY: &str = "any";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OpDecl {
    pub args: Vec<String>,
    pub result: String,
}

impl OpDecl {
    pub fn new(args: &[&str], result: &str) -> Self {
        OpDecl {
            args: args.iter().map(|s| s.to_string()).collect(),
            result: result.to_string(),
        }
    }
}

/// A many-sorted first-order signature. Symbols are not overloaded: every
/// op and relation name carries exactly one profile.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FOSignature {
    pub sorts: BTreeSet<String>,
    pub ops: BTreeMap<String, OpDecl>,
    pub rels: BTreeMap<String, Vec<String>>,
}

impl FOSignature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sort(mut self, s: &str) -> Self {
        self.sorts.insert(s.to_string());
        self
    }

    pub fn op(mut self, name: &str, args: &[&str], result: &str) -> Self {
        self.ops.insert(name.to_string(), OpDecl::new(args, result));
        self
    }

    pub fn rel(mut self, name: &str, args: &[&str]) -> Self {
        self.rels
            .insert(name.to_string(), args.iter().map(|s| s.to_string()).collect());
        self
    }

    /// True when every sort, op and relation of `self` occurs in `other` with the same profile.
    pub fn is_subsignature_of(&self, other: &FOSignature) -> bool {
        self.sorts.is_subset(&other.sorts)
            && self.ops.iter().all(|(n, d)| other.ops.get(n) == Some(d))
            && self.rels.iter().all(|(n, a)| other.rels.get(n) == Some(a))
    }

    /// Sorts inhabited by some ground term (least fixpoint).
    pub fn inhabited_sorts(&self) -> BTreeSet<String> {
        let mut inhabited = BTreeSet::new();
        loop {
            let before = inhabited.len();
            for d in self.ops.values() {
                if d.args.iter().all(|a| inhabited.contains(a)) {
                    inhabited.insert(d.result.clone());
                }
            }
            if inhabited.len() == before {
                return inhabited;
            }
        }
    }

    pub fn is_non_void(&self) -> bool {
        let inh = self.inhabited_sorts();
        self.sorts.iter().all(|s| inh.contains(s))
    }

    fn undeclared_sorts(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (n, d) in &self.ops {
            for s in d.args.iter().chain(std::iter::once(&d.result)) {
                if !self.sorts.contains(s) {
                    out.push((n.clone(), s.clone()));
                }
            }
        }
        for (n, a) in &self.rels {
            for s in a {
                if !self.sorts.contains(s) {
                    out.push((n.clone(), s.clone()));
                }
            }
        }
        out
    }
}

/// A hybrid-dynamic signature: nominals and modalities over a single nominal
/// sort, a body signature and its rigid subsignature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HDSignature {
    pub nominal_sig: FOSignature,
    pub body: FOSignature,
    pub rigid: FOSignature,
}

impl Default for HDSignature {
    fn default() -> Self {
        HDSignature {
            nominal_sig: FOSignature::new().sort(ANY),
            body: FOSignature::new(),
            rigid: FOSignature::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SigError {
    #[error("name clash: `{0}` is already declared")]
    NameClash(String),
    #[error("variable `{0}` has sort `{1}`, which is neither the nominal sort nor rigid")]
    NotExtendedSort(String, String),
    #[error("constructor `{0}` is not a rigid operation")]
    NonRigidConstructor(String),
    #[error("morphism: {0}")]
    Morphism(String),
    #[error("unknown symbol `{0}`")]
    Unknown(String),
}

/// The kind a name denotes inside a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Nominal,
    Modality,
    Sort,
    Op,
    Rel,
    NominalSort,
}

impl HDSignature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nominal(mut self, k: &str) -> Self {
        let s = self.nominal_sort().to_string();
        self.nominal_sig.ops.insert(k.to_string(), OpDecl::new(&[], &s));
        self
    }

    pub fn modality(mut self, l: &str) -> Self {
        let s = self.nominal_sort().to_string();
        self.nominal_sig.rels.insert(l.to_string(), vec![s.clone(), s]);
        self
    }

    pub fn sort(mut self, s: &str, rigid: bool) -> Self {
        self.body.sorts.insert(s.to_string());
        if rigid {
            self.rigid.sorts.insert(s.to_string());
        }
        self
    }

    pub fn op(mut self, name: &str, args: &[&str], result: &str, rigid: bool) -> Self {
        self.body.ops.insert(name.to_string(), OpDecl::new(args, result));
        if rigid {
            self.rigid.ops.insert(name.to_string(), OpDecl::new(args, result));
        }
        self
    }

    pub fn rel(mut self, name: &str, args: &[&str], rigid: bool) -> Self {
        let a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        self.body.rels.insert(name.to_string(), a.clone());
        if rigid {
            self.rigid.rels.insert(name.to_string(), a);
        }
        self
    }

    pub fn nominal_sort(&self) -> &str {
        self.nominal_sig.sorts.iter().next().map(|s| s.as_str()).unwrap_or(ANY)
    }

    pub fn nominals(&self) -> impl Iterator<Item = &String> {
        self.nominal_sig.ops.keys()
    }

    pub fn modalities(&self) -> impl Iterator<Item = &String> {
        self.nominal_sig.rels.keys()
    }

    pub fn is_nominal(&self, k: &str) -> bool {
        self.nominal_sig.ops.contains_key(k)
    }

    pub fn is_modality(&self, l: &str) -> bool {
        self.nominal_sig.rels.contains_key(l)
    }

    pub fn is_rigid_sort(&self, s: &str) -> bool {
        self.rigid.sorts.contains(s)
    }

    pub fn is_rigid_op(&self, o: &str) -> bool {
        self.rigid.ops.contains_key(o)
    }

    pub fn is_rigid_rel(&self, r: &str) -> bool {
        self.rigid.rels.contains_key(r)
    }

    /// Sorts usable for variables: the nominal sort and the rigid sorts.
    pub fn is_extended_sort(&self, s: &str) -> bool {
        s == self.nominal_sort() || self.is_rigid_sort(s)
    }

    pub fn flexible_sorts(&self) -> impl Iterator<Item = &String> {
        self.body.sorts.iter().filter(|s| !self.rigid.sorts.contains(*s))
    }

    pub fn flexible_ops(&self) -> impl Iterator<Item = (&String, &OpDecl)> {
        self.body.ops.iter().filter(|(n, _)| !self.rigid.ops.contains_key(*n))
    }

    pub fn flexible_rels(&self) -> impl Iterator<Item = (&String, &Vec<String>)> {
        self.body.rels.iter().filter(|(n, _)| !self.rigid.rels.contains_key(*n))
    }

    pub fn kind_of(&self, name: &str) -> Option<SymbolKind> {
        if self.is_nominal(name) {
            Some(SymbolKind::Nominal)
        } else if self.is_modality(name) {
            Some(SymbolKind::Modality)
        } else if self.body.ops.contains_key(name) {
            Some(SymbolKind::Op)
        } else if self.body.rels.contains_key(name) {
            Some(SymbolKind::Rel)
        } else if self.body.sorts.contains(name) {
            Some(SymbolKind::Sort)
        } else if name == self.nominal_sort() {
            Some(SymbolKind::NominalSort)
        } else {
            None
        }
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.kind_of(name).is_some()
    }

    /// Lists every violated signature invariant; empty iff the signature is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut v = |kind: &str, detail: String| {
            out.push(Violation { kind: kind.to_string(), detail })
        };
        if self.nominal_sig.sorts.len() != 1 {
            v(
                "nominal sort count",
                format!("expected exactly one nominal sort, found {}", self.nominal_sig.sorts.len()),
            );
        }
        let ns = self.nominal_sort().to_string();
        for (k, d) in &self.nominal_sig.ops {
            if !d.args.is_empty() || d.result != ns {
                v("nominal arity", format!("nominal `{k}` must be a constant of sort `{ns}`"));
            }
        }
        for (l, a) in &self.nominal_sig.rels {
            if a.len() != 2 || a.iter().any(|s| *s != ns) {
                v("modality arity", format!("modality `{l}` must be binary over `{ns}`"));
            }
        }
        for (sym, s) in self.body.undeclared_sorts() {
            v("undeclared sort", format!("`{sym}` mentions undeclared sort `{s}`"));
        }
        if !self.rigid.is_subsignature_of(&self.body) {
            let mut missing: Vec<String> = Vec::new();
            missing.extend(self.rigid.sorts.difference(&self.body.sorts).cloned());
            missing.extend(
                self.rigid
                    .ops
                    .iter()
                    .filter(|(n, d)| self.body.ops.get(*n) != Some(d))
                    .map(|(n, _)| n.clone()),
            );
            missing.extend(
                self.rigid
                    .rels
                    .iter()
                    .filter(|(n, a)| self.body.rels.get(*n) != Some(a))
                    .map(|(n, _)| n.clone()),
            );
            v("not a subsignature", format!("rigid part declares {}", missing.join(", ")));
        }
        for (sym, s) in self.rigid.undeclared_sorts() {
            if self.body.sorts.contains(&s) {
                v("rigid profile", format!("rigid `{sym}` uses flexible sort `{s}`"));
            }
        }
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        let groups: [(&str, Vec<&String>); 5] = [
            ("nominal", self.nominal_sig.ops.keys().collect()),
            ("modality", self.nominal_sig.rels.keys().collect()),
            ("sort", self.body.sorts.iter().chain(self.nominal_sig.sorts.iter()).collect()),
            ("op", self.body.ops.keys().collect()),
            ("relation", self.body.rels.keys().collect()),
        ];
        for (kind, names) in groups.iter() {
            for n in names {
                if let Some(prev) = seen.insert(n.as_str(), kind) {
                    v("name clash", format!("`{n}` is both a {prev} and a {kind}"));
                }
            }
        }
        out
    }

    pub fn is_non_void(&self) -> bool {
        self.nominal_sig.ops.keys().next().is_some() && self.body.is_non_void()
    }

    /// Δ[X]: nominal-sorted variables become nominals, rigid-sorted variables rigid constants.
    pub fn extend(&self, vars: &[crate::syntax::Var]) -> Result<HDSignature, SigError> {
        let mut out = self.clone();
        for x in vars {
            if out.is_declared(&x.name) {
                return Err(SigError::NameClash(x.name.clone()));
            }
            if x.sort == self.nominal_sort() {
                out = out.nominal(&x.name);
            } else if self.is_rigid_sort(&x.sort) {
                out = out.op(&x.name, &[], &x.sort, true);
            } else {
                return Err(SigError::NotExtendedSort(x.name.clone(), x.sort.clone()));
            }
        }
        Ok(out)
    }

    /// The rigidification @Σ and the hybrid signature Σ̄.
    pub fn rigidify_signature(&self) -> RigidifiedSignature {
        let ks: Vec<String> = self.nominals().cloned().collect();
        let hs = |k: &str, s: &str| -> HSort {
            if self.is_rigid_sort(s) {
                HSort::Plain(s.to_string())
            } else {
                HSort::At(k.to_string(), s.to_string())
            }
        };
        let mut at = HybridSignature::default();
        let mut bar = HybridSignature::default();
        for s in &self.body.sorts {
            bar.sorts.insert(HSort::Plain(s.clone()));
        }
        for (n, d) in &self.body.ops {
            bar.ops.insert(
                Symbol::plain(n),
                HOpDecl {
                    args: d.args.iter().map(|a| HSort::Plain(a.clone())).collect(),
                    result: HSort::Plain(d.result.clone()),
                },
            );
        }
        for (n, a) in &self.body.rels {
            bar.rels.insert(Symbol::plain(n), a.iter().map(|s| HSort::Plain(s.clone())).collect());
        }
        for k in &ks {
            for s in &self.body.sorts {
                at.sorts.insert(hs(k, s));
            }
            for (n, d) in &self.body.ops {
                let sym = if self.is_rigid_op(n) { Symbol::plain(n) } else { Symbol::at(k, n) };
                at.ops.insert(
                    sym,
                    HOpDecl { args: d.args.iter().map(|a| hs(k, a)).collect(), result: hs(k, &d.result) },
                );
            }
            for (n, a) in &self.body.rels {
                let sym = if self.is_rigid_rel(n) { Symbol::plain(n) } else { Symbol::at(k, n) };
                at.rels.insert(sym, a.iter().map(|s| hs(k, s)).collect());
            }
        }
        for s in &at.sorts {
            bar.sorts.insert(s.clone());
        }
        for (n, d) in &at.ops {
            bar.ops.insert(n.clone(), d.clone());
        }
        for (n, a) in &at.rels {
            bar.rels.insert(n.clone(), a.clone());
        }
        RigidifiedSignature { at_sig: at, bar_sig: bar }
    }

    /// Splits the rigid sorts into constrained and loose sorts for the given constructors.
    pub fn partition(&self, ctors: &FOSignature) -> Result<ConstructorPartition, SigError> {
        for (n, d) in &ctors.ops {
            if self.rigid.ops.get(n) != Some(d) {
                return Err(SigError::NonRigidConstructor(n.clone()));
            }
        }
        if let Some(r) = ctors.rels.keys().next() {
            return Err(SigError::NonRigidConstructor(r.clone()));
        }
        let constrained: BTreeSet<String> = ctors.ops.values().map(|d| d.result.clone()).collect();
        let loose = self.rigid.sorts.difference(&constrained).cloned().collect();
        Ok(ConstructorPartition { constructors: ctors.clone(), constrained, loose })
    }
}

/// A possibly world-pinned symbol name: `@k σ` is `Symbol { at: Some(k), name: σ }`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub at: Option<String>,
    pub name: String,
}

impl Symbol {
    pub fn plain(name: &str) -> Self {
        Symbol { at: None, name: name.to_string() }
    }

    pub fn at(k: &str, name: &str) -> Self {
        Symbol { at: Some(k.to_string()), name: name.to_string() }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.at {
            None => write!(f, "{}", self.name),
            Some(k) => write!(f, "(at {} {})", k, self.name),
        }
    }
}

/// Hybrid sorts: plain sorts of Σ and world-pinned flexible sorts `@k s`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HSort {
    Plain(String),
    At(String, String),
}

impl fmt::Display for HSort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSort::Plain(s) => write!(f, "{s}"),
            HSort::At(k, s) => write!(f, "(at {k} {s})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HOpDecl {
    pub args: Vec<HSort>,
    pub result: HSort,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridSignature {
    pub sorts: BTreeSet<HSort>,
    pub ops: BTreeMap<Symbol, HOpDecl>,
    pub rels: BTreeMap<Symbol, Vec<HSort>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidifiedSignature {
    /// @Σ: rigid symbols plus `@k x` for every nominal `k` and flexible `x`.
    pub at_sig: HybridSignature,
    /// Σ̄ = Σ ∪ @Σᶠ.
    pub bar_sig: HybridSignature,
}

impl RigidifiedSignature {
    /// Number of world-pinned sorts `@k s` in @Σ.
    pub fn pinned_sort_count(&self) -> usize {
        self.at_sig.sorts.iter().filter(|s| matches!(s, HSort::At(..))).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructorPartition {
    pub constructors: FOSignature,
    pub constrained: BTreeSet<String>,
    pub loose: BTreeSet<String>,
}

impl ConstructorPartition {
    /// The `i`-th loose variable of sort `s`, named so it avoids every symbol of `sig`.
    pub fn loose_var(&self, sig: &HDSignature, s: &str, i: usize) -> crate::syntax::Var {
        let mut name = format!("Y{}_{}", i, s);
        while sig.is_declared(&name) {
            name.push('\'');
        }
        crate::syntax::Var { name, sort: s.to_string() }
    }
}

/// A signature morphism. Maps are total on the source; missing entries are errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureMorphism {
    pub source: HDSignature,
    pub target: HDSignature,
    pub nominal_map: BTreeMap<String, String>,
    pub modality_map: BTreeMap<String, String>,
    pub sort_map: BTreeMap<String, String>,
    pub op_map: BTreeMap<String, String>,
    pub rel_map: BTreeMap<String, String>,
}

impl SignatureMorphism {
    pub fn identity(sig: &HDSignature) -> Self {
        let id = |it: &mut dyn Iterator<Item = &String>| it.map(|x| (x.clone(), x.clone())).collect();
        SignatureMorphism {
            source: sig.clone(),
            target: sig.clone(),
            nominal_map: id(&mut sig.nominal_sig.ops.keys()),
            modality_map: id(&mut sig.nominal_sig.rels.keys()),
            sort_map: id(&mut sig.body.sorts.iter()),
            op_map: id(&mut sig.body.ops.keys()),
            rel_map: id(&mut sig.body.rels.keys()),
        }
    }

    /// The inclusion of `source` into a larger `target`.
    pub fn inclusion(source: &HDSignature, target: &HDSignature) -> Result<Self, SigError> {
        let mut m = Self::identity(source);
        m.target = target.clone();
        m.check()?;
        Ok(m)
    }

    pub fn sort(&self, s: &str) -> String {
        if s == self.source.nominal_sort() {
            return self.target.nominal_sort().to_string();
        }
        self.sort_map.get(s).cloned().unwrap_or_else(|| s.to_string())
    }

    pub fn nominal(&self, k: &str) -> String {
        self.nominal_map.get(k).cloned().unwrap_or_else(|| k.to_string())
    }

    pub fn modality(&self, l: &str) -> String {
        self.modality_map.get(l).cloned().unwrap_or_else(|| l.to_string())
    }

    pub fn op(&self, o: &str) -> String {
        self.op_map.get(o).cloned().unwrap_or_else(|| o.to_string())
    }

    pub fn rel(&self, r: &str) -> String {
        self.rel_map.get(r).cloned().unwrap_or_else(|| r.to_string())
    }

    /// Checks totality, profile preservation and that rigid symbols land in the rigid target part.
    pub fn check(&self) -> Result<(), SigError> {
        let err = |m: String| Err(SigError::Morphism(m));
        let (src, tgt) = (&self.source, &self.target);
        for k in src.nominals() {
            match self.nominal_map.get(k) {
                Some(k2) if tgt.is_nominal(k2) => {}
                _ => return err(format!("nominal `{k}` has no valid image")),
            }
        }
        for l in src.modalities() {
            match self.modality_map.get(l) {
                Some(l2) if tgt.is_modality(l2) => {}
                _ => return err(format!("modality `{l}` has no valid image")),
            }
        }
        for s in &src.body.sorts {
            match self.sort_map.get(s) {
                Some(s2) if tgt.body.sorts.contains(s2) => {
                    if src.is_rigid_sort(s) && !tgt.is_rigid_sort(s2) {
                        return err(format!("rigid sort `{s}` maps to flexible `{s2}`"));
                    }
                }
                _ => return err(format!("sort `{s}` has no valid image")),
            }
        }
        for (o, d) in &src.body.ops {
            let Some(o2) = self.op_map.get(o) else { return err(format!("op `{o}` unmapped")) };
            let Some(d2) = tgt.body.ops.get(o2) else { return err(format!("op `{o2}` not in target")) };
            let want: Vec<String> = d.args.iter().map(|a| self.sort(a)).collect();
            if want != d2.args || self.sort(&d.result) != d2.result {
                return err(format!("op `{o}` profile not preserved"));
            }
            if src.is_rigid_op(o) && !tgt.is_rigid_op(o2) {
                return err(format!("rigid op `{o}` maps to flexible `{o2}`"));
            }
        }
        for (r, a) in &src.body.rels {
            let Some(r2) = self.rel_map.get(r) else { return err(format!("relation `{r}` unmapped")) };
            let Some(a2) = tgt.body.rels.get(r2) else { return err(format!("relation `{r2}` not in target")) };
            let want: Vec<String> = a.iter().map(|s| self.sort(s)).collect();
            if &want != a2 {
                return err(format!("relation `{r}` profile not preserved"));
            }
            if src.is_rigid_rel(r) && !tgt.is_rigid_rel(r2) {
                return err(format!("rigid relation `{r}` maps to flexible `{r2}`"));
            }
        }
        Ok(())
    }

    /// Diagrammatic composition: first `self`, then `next`.
    pub fn compose(&self, next: &SignatureMorphism) -> Result<SignatureMorphism, SigError> {
        if self.target != next.source {
            return Err(SigError::Morphism("composition of non-adjacent morphisms".into()));
        }
        let comp = |a: &BTreeMap<String, String>, f: &dyn Fn(&str) -> String| {
            a.iter().map(|(x, y)| (x.clone(), f(y))).collect()
        };
        Ok(SignatureMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            nominal_map: comp(&self.nominal_map, &|x| next.nominal(x)),
            modality_map: comp(&self.modality_map, &|x| next.modality(x)),
            sort_map: comp(&self.sort_map, &|x| next.sort(x)),
            op_map: comp(&self.op_map, &|x| next.op(x)),
            rel_map: comp(&self.rel_map, &|x| next.rel(x)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::syntax::Var;

    #[test]
    fn hpl_signature_is_valid() {
        assert!(fixtures::hpl_signature().validate().is_empty());
    }

    #[test]
    fn ternary_modality_is_reported() {
        let mut sig = fixtures::hpl_signature();
        sig.nominal_sig.rels.insert("mu".into(), vec![ANY.into(); 3]);
        let r = sig.validate();
        assert!(r.iter().any(|v| v.kind == "modality arity"), "{r:?}");
    }

    #[test]
    fn rigid_op_missing_from_body_is_reported() {
        let mut sig = fixtures::list_signature();
        sig.rigid.ops.insert("ghost".into(), OpDecl::new(&[], "List"));
        let r = sig.validate();
        assert!(r.iter().any(|v| v.kind == "not a subsignature"), "{r:?}");
    }

    #[test]
    fn extend_adds_nominals_and_rigid_constants() {
        let hpl = fixtures::hpl_signature();
        let ext = hpl.extend(&[Var::new("z", ANY)]).unwrap();
        assert_eq!(ext.nominals().cloned().collect::<Vec<_>>(), vec!["k", "z"]);
        let list = fixtures::list_signature();
        let ext = list.extend(&[Var::new("N", ANY), Var::new("L", "List")]).unwrap();
        assert!(ext.is_nominal("N"));
        assert!(ext.is_rigid_op("L"));
        assert_eq!(ext.body.ops["L"], OpDecl::new(&[], "List"));
        assert!(!list.is_declared("L"));
    }

    #[test]
    fn extend_rejects_clash() {
        let e = fixtures::hpl_signature().extend(&[Var::new("k", ANY)]).unwrap_err();
        assert_eq!(e, SigError::NameClash("k".into()));
    }

    #[test]
    fn rigidify_list_adds_pinned_delete_only() {
        let sig = fixtures::list_signature();
        let r = sig.rigidify_signature();
        assert_eq!(r.pinned_sort_count(), 0);
        for k in ["n0", "n1", "n2"] {
            assert!(r.bar_sig.ops.contains_key(&Symbol::at(k, "delete")));
            assert!(!r.bar_sig.ops.contains_key(&Symbol::at(k, "cons")));
        }
        assert!(r.at_sig.ops.contains_key(&Symbol::plain("cons")));
        assert!(!r.at_sig.ops.contains_key(&Symbol::plain("delete")));
    }

    #[test]
    fn rigidify_without_flexible_symbols_is_identity() {
        let sig = HDSignature::new().nominal("k").sort("s", true).op("c", &[], "s", true);
        let r = sig.rigidify_signature();
        assert_eq!(r.at_sig.sorts, [HSort::Plain("s".into())].into());
        assert_eq!(r.bar_sig.ops.len(), sig.body.ops.len());
        assert_eq!(r.at_sig.ops, r.bar_sig.ops);
    }

    #[test]
    fn two_nominals_one_flexible_sort_give_two_pinned_sorts() {
        let sig = HDSignature::new().nominal("k1").nominal("k2").sort("s", false);
        assert_eq!(sig.rigidify_signature().pinned_sort_count(), 2);
    }

    #[test]
    fn non_voidness() {
        let with_e = fixtures::list_signature();
        assert!(with_e.is_non_void());
        let no_const = HDSignature::new().nominal("k").sort("Elt", true);
        assert!(!no_const.is_non_void());
        let only_via_empty = HDSignature::new()
            .nominal("k")
            .sort("Elt", true)
            .sort("List", true)
            .op("sigma", &["Elt"], "List", true);
        assert!(!only_via_empty.is_non_void());
        assert!(!HDSignature::new().is_non_void());
    }

    #[test]
    fn list_partition() {
        let sig = fixtures::list_signature();
        let p = sig.partition(&fixtures::list_constructors()).unwrap();
        assert_eq!(p.constrained, ["List".to_string()].into());
        assert_eq!(p.loose, ["Elt".to_string()].into());
        let empty = sig.partition(&FOSignature::new()).unwrap();
        assert_eq!(empty.loose, sig.rigid.sorts);
        let bad = FOSignature::new().op("delete", &["List"], "List");
        assert_eq!(sig.partition(&bad).unwrap_err(), SigError::NonRigidConstructor("delete".into()));
    }

    #[test]
    fn morphism_identity_and_composition() {
        let sig = fixtures::list_signature();
        let id = SignatureMorphism::identity(&sig);
        id.check().unwrap();
        assert_eq!(id.compose(&id).unwrap(), id);
    }

    #[test]
    fn morphism_rejects_rigid_to_flexible() {
        let src = HDSignature::new().nominal("k").sort("s", true);
        let tgt = HDSignature::new().nominal("k").sort("s", false);
        let mut m = SignatureMorphism::identity(&src);
        m.target = tgt;
        assert!(m.check().is_err());
    }
}

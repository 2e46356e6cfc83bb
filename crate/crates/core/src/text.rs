//! Line-oriented documents holding a signature, axioms, types, a model and
//! morphism entries, with one canonical printer.
//!
//! ```text
//! # comment
//! nominal k
//! modality lambda
//! sort D rigid
//! op f : D -> D flexible
//! rel rho : flexible
//! axiom @k rho
//! type unnamed x:any
//! member ~@k x
//! worlds w0 w1
//! at k w0
//! edge lambda w0 w0
//! carrier D d0 d1
//! val@w0 f d0 = d1
//! holds@w0 rho
//! map nominal k k2
//! ```
//!
//! Rigid carriers, ops and relations are stated without a world, flexible
//! ones with `@w`, so a file cannot describe divergent rigid tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::kripke::{tuples, Kripke, UNDEF};
use crate::omitting::TypeSpec;
use crate::signature::{HDSignature, OpDecl, SignatureMorphism};
use crate::syntax::{check_open, print_sentence, Parser, Sentence, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for TextError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, TextError> {
    Err(TextError { line, msg: msg.into() })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub sig: HDSignature,
    pub axioms: Vec<Sentence>,
    pub types: Vec<TypeSpec>,
    pub model: Option<Kripke>,
    /// `(kind, source, target)` morphism entries.
    pub maps: Vec<(String, String, String)>,
}

const MAP_KINDS: [&str; 5] = ["nominal", "modality", "sort", "op", "rel"];

fn flag(line: usize, s: Option<&str>) -> Result<bool, TextError> {
    match s {
        Some("rigid") => Ok(true),
        Some("flexible") => Ok(false),
        other => err(line, format!("expected `rigid` or `flexible`, found {other:?}")),
    }
}

fn parse_sentence_at(sig: &HDSignature, vars: &[Var], src: &str, line: usize) -> Result<Sentence, TextError> {
    let wrap = |e: crate::syntax::SyntaxError| TextError { line, msg: e.to_string() };
    let mut p = Parser::new(sig, src, line).map_err(wrap)?.with_vars(vars);
    let s = p.sentence().map_err(wrap)?;
    p.finish().map_err(wrap)?;
    check_open(sig, vars, &s).map_err(wrap)?;
    Ok(s)
}

/// Splits `keyword@world` into its parts.
fn split_at(kw: &str) -> (&str, Option<&str>) {
    match kw.split_once('@') {
        Some((k, w)) => (k, Some(w)),
        None => (kw, None),
    }
}

fn declare(sig: HDSignature, line: usize, kw: &str, toks: &[&str]) -> Result<HDSignature, TextError> {
    Ok(match kw {
        "nominal" | "modality" => {
            let [name] = toks else { return err(line, format!("`{kw}` takes one name")) };
            if kw == "nominal" {
                sig.nominal(name)
            } else {
                sig.modality(name)
            }
        }
        "sort" => {
            let [name, r] = toks else { return err(line, "`sort` takes a name and a rigidity flag") };
            sig.sort(name, flag(line, Some(r))?)
        }
        "op" | "rel" => {
            let (name, rest) = toks.split_first().ok_or(TextError { line, msg: format!("`{kw}` needs a name") })?;
            if rest.first() != Some(&":") {
                return err(line, format!("expected `:` after `{name}`"));
            }
            let rest = &rest[1..];
            let (r, profile) = rest.split_last().ok_or(TextError { line, msg: "missing rigidity flag".into() })?;
            let rigid = flag(line, Some(r))?;
            if kw == "op" {
                let arrow = profile.iter().position(|t| *t == "->").ok_or(TextError { line, msg: "missing `->`".into() })?;
                let [result] = &profile[arrow + 1..] else { return err(line, "expected one result sort") };
                sig.op(name, &profile[..arrow], result, rigid)
            } else {
                sig.rel(name, profile, rigid)
            }
        }
        _ => unreachable!(),
    })
}

fn parse_var(line: usize, tok: &str) -> Result<Var, TextError> {
    match tok.split_once(':') {
        Some((x, s)) if !x.is_empty() && !s.is_empty() => Ok(Var::new(x, s)),
        _ => err(line, format!("expected `name:sort`, found `{tok}`")),
    }
}

struct ModelLines<'a> {
    worlds: Option<(usize, Vec<&'a str>)>,
    rest: Vec<(usize, &'a str, Option<&'a str>, Vec<&'a str>)>,
}

/// Parses a document.
pub fn load(src: &str) -> Result<Document, TextError> {
    let lines: Vec<(usize, Vec<&str>)> = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| (i, l.split_whitespace().collect()))
        .collect();
    let mut sig = HDSignature::new();
    for (line, toks) in &lines {
        if matches!(toks[0], "nominal" | "modality" | "sort" | "op" | "rel") {
            sig = declare(sig, *line, toks[0], &toks[1..])?;
        }
    }
    if let Some(v) = sig.validate().first() {
        return err(0, format!("invalid signature: {v}"));
    }
    let mut doc = Document { sig, ..Document::default() };
    let mut ml = ModelLines { worlds: None, rest: Vec::new() };
    let raw: BTreeMap<usize, &str> = src.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    for (line, toks) in &lines {
        let line = *line;
        let after = |n: usize| -> &str {
            let mut s = raw[&line].trim_start();
            for _ in 0..n {
                s = s.trim_start();
                s = &s[s.find(char::is_whitespace).unwrap_or(s.len())..];
            }
            s.trim()
        };
        let (kw, world) = split_at(toks[0]);
        match kw {
            "nominal" | "modality" | "sort" | "op" | "rel" if world.is_none() => {}
            "axiom" => doc.axioms.push(parse_sentence_at(&doc.sig, &[], after(1), line)?),
            "type" => {
                let name = toks.get(1).ok_or(TextError { line, msg: "`type` needs a name".into() })?;
                let vars = toks[2..].iter().map(|t| parse_var(line, t)).collect::<Result<Vec<_>, _>>()?;
                let ts = TypeSpec::new(name, vars, vec![]);
                doc.sig.extend(&ts.vars).map_err(|e| TextError { line, msg: e.to_string() })?;
                doc.types.push(ts);
            }
            "member" => {
                let Some(ts) = doc.types.last_mut() else { return err(line, "`member` before any `type`") };
                let s = parse_sentence_at(&doc.sig, &ts.vars, after(1), line)?;
                ts.sentences.push(s);
            }
            "map" => {
                let [k, a, b] = &toks[1..] else { return err(line, "`map` takes a kind and two names") };
                if !MAP_KINDS.contains(k) {
                    return err(line, format!("unknown map kind `{k}`"));
                }
                doc.maps.push((k.to_string(), a.to_string(), b.to_string()));
            }
            "worlds" if world.is_none() => {
                if ml.worlds.is_some() {
                    return err(line, "second `worlds` line");
                }
                ml.worlds = Some((line, toks[1..].to_vec()));
            }
            "at" | "edge" | "carrier" | "val" | "holds" => ml.rest.push((line, kw, world, toks[1..].to_vec())),
            _ => return err(line, format!("unknown directive `{}`", toks[0])),
        }
    }
    match ml.worlds {
        Some(w) => doc.model = Some(load_model(&doc.sig, w, &ml.rest)?),
        None => {
            if let Some((line, ..)) = ml.rest.first() {
                return err(*line, "model entry without a `worlds` line");
            }
        }
    }
    Ok(doc)
}

fn load_model(
    sig: &HDSignature,
    (wline, worlds): (usize, Vec<&str>),
    rest: &[(usize, &str, Option<&str>, Vec<&str>)],
) -> Result<Kripke, TextError> {
    if worlds.is_empty() || worlds.iter().collect::<BTreeSet<_>>().len() != worlds.len() {
        return err(wline, "worlds must be non-empty and distinct");
    }
    let mut m = Kripke::new(sig, &worlds);
    let n = worlds.len();
    let world = |line: usize, w: &str| m_world(&worlds, line, w);
    let mut seen_carrier = BTreeSet::new();
    for (line, kw, at, args) in rest {
        let line = *line;
        match *kw {
            "at" => {
                let [k, w] = args.as_slice() else { return err(line, "`at` takes a nominal and a world") };
                if !sig.is_nominal(k) {
                    return err(line, format!("unknown nominal `{k}`"));
                }
                if m.nominals.insert(k.to_string(), world(line, w)?).is_some() {
                    return err(line, format!("nominal `{k}` placed twice"));
                }
            }
            "edge" => {
                let [l, a, b] = args.as_slice() else { return err(line, "`edge` takes a modality and two worlds") };
                if !sig.is_modality(l) {
                    return err(line, format!("unknown modality `{l}`"));
                }
                let (a, b) = (world(line, a)?, world(line, b)?);
                m.add_edge(l, a, b);
            }
            "carrier" => {
                let (s, elems) = args.split_first().ok_or(TextError { line, msg: "`carrier` needs a sort".into() })?;
                if !sig.body.sorts.contains(*s) {
                    return err(line, format!("unknown sort `{s}`"));
                }
                if elems.iter().collect::<BTreeSet<_>>().len() != elems.len() {
                    return err(line, format!("repeated element in carrier of `{s}`"));
                }
                let ws = rigidity(sig.is_rigid_sort(s), *at, s, line, &worlds)?;
                for w in ws.clone() {
                    if !seen_carrier.insert((w, s.to_string())) {
                        return err(line, format!("carrier of `{s}` stated twice"));
                    }
                }
                match ws.len() {
                    1 if at.is_some() => {
                        m.set_local_carrier(ws[0], s, elems);
                    }
                    _ => {
                        m.set_carrier(s, elems);
                    }
                }
            }
            _ => {}
        }
    }
    for w in 0..n {
        for (o, d) in &sig.body.ops {
            let len = m.table_len(w, &d.args);
            let st = if sig.is_rigid_op(o) { &mut m.rigid } else { &mut m.local[w] };
            st.ops.entry(o.clone()).or_insert_with(|| vec![UNDEF; len]);
        }
        for (r, a) in &sig.body.rels {
            let len = m.table_len(w, a);
            let st = if sig.is_rigid_rel(r) { &mut m.rigid } else { &mut m.local[w] };
            st.rels.entry(r.clone()).or_insert_with(|| vec![false; len]);
        }
    }
    for (line, kw, at, args) in rest {
        let line = *line;
        match *kw {
            "val" => {
                let eq = args.iter().position(|t| *t == "=").ok_or(TextError { line, msg: "missing `=`".into() })?;
                let [v] = &args[eq + 1..] else { return err(line, "expected one value after `=`") };
                let (o, xs) = args[..eq].split_first().ok_or(TextError { line, msg: "`val` needs an op".into() })?;
                let d: OpDecl = sig.body.ops.get(*o).cloned().ok_or(TextError { line, msg: format!("unknown op `{o}`") })?;
                let rigid = sig.is_rigid_op(o);
                let w = rigidity(rigid, *at, o, line, &worlds)?[0];
                let idx = entry(&m, w, &d.args, xs, line)?;
                let val = elem(&m, w, &d.result, v, line)?;
                let st = if rigid { &mut m.rigid } else { &mut m.local[w] };
                let slot = &mut st.ops.get_mut(*o).unwrap()[idx];
                if *slot != UNDEF && *slot != val {
                    return err(line, format!("divergent entries for `{o}`"));
                }
                *slot = val;
            }
            "holds" => {
                let (r, xs) = args.split_first().ok_or(TextError { line, msg: "`holds` needs a relation".into() })?;
                let a = sig.body.rels.get(*r).cloned().ok_or(TextError { line, msg: format!("unknown relation `{r}`") })?;
                let rigid = sig.is_rigid_rel(r);
                let w = rigidity(rigid, *at, r, line, &worlds)?[0];
                let idx = entry(&m, w, &a, xs, line)?;
                let st = if rigid { &mut m.rigid } else { &mut m.local[w] };
                st.rels.get_mut(*r).unwrap()[idx] = true;
            }
            _ => {}
        }
    }
    m.validate().map_err(|e| TextError { line: wline, msg: e.to_string() })?;
    Ok(m)
}

fn m_world(worlds: &[&str], line: usize, w: &str) -> Result<usize, TextError> {
    worlds.iter().position(|x| *x == w).ok_or(TextError { line, msg: format!("unknown world `{w}`") })
}

/// The worlds a rigid or flexible entry applies to; rigid symbols take no world.
fn rigidity(rigid: bool, at: Option<&str>, name: &str, line: usize, worlds: &[&str]) -> Result<Vec<usize>, TextError> {
    match (rigid, at) {
        (true, Some(_)) => err(line, format!("rigid symbol `{name}` stated per world")),
        (true, None) => Ok(vec![0]),
        (false, Some(w)) => Ok(vec![m_world(worlds, line, w)?]),
        (false, None) => Ok((0..worlds.len()).collect()),
    }
}

fn elem(m: &Kripke, w: usize, s: &str, name: &str, line: usize) -> Result<usize, TextError> {
    m.carrier(w, s)
        .iter()
        .position(|e| e == name)
        .ok_or(TextError { line, msg: format!("`{name}` is not an element of `{s}`") })
}

fn entry(m: &Kripke, w: usize, sorts: &[String], xs: &[&str], line: usize) -> Result<usize, TextError> {
    if xs.len() != sorts.len() {
        return err(line, format!("expected {} arguments, found {}", sorts.len(), xs.len()));
    }
    let idx = sorts.iter().zip(xs).map(|(s, x)| elem(m, w, s, x, line)).collect::<Result<Vec<_>, _>>()?;
    Ok(Kripke::index(&m.dims(w, sorts), &idx))
}

fn rigidity_word(r: bool) -> &'static str {
    if r {
        "rigid"
    } else {
        "flexible"
    }
}

/// Parses lines without declarations of their own against `sig`.
pub fn load_in(sig: &HDSignature, src: &str) -> Result<Document, TextError> {
    let head = save_signature(sig);
    let shift = head.lines().count();
    load(&(head + src)).map_err(|e| TextError { line: e.line.saturating_sub(shift), ..e })
}

/// Canonical text of a signature.
pub fn save_signature(sig: &HDSignature) -> String {
    let mut out = String::new();
    for k in sig.nominals() {
        out += &format!("nominal {k}\n");
    }
    for l in sig.modalities() {
        out += &format!("modality {l}\n");
    }
    for s in &sig.body.sorts {
        out += &format!("sort {s} {}\n", rigidity_word(sig.is_rigid_sort(s)));
    }
    for (o, d) in &sig.body.ops {
        let args: String = d.args.iter().map(|a| format!("{a} ")).collect();
        out += &format!("op {o} : {args}-> {} {}\n", d.result, rigidity_word(sig.is_rigid_op(o)));
    }
    for (r, a) in &sig.body.rels {
        let args: String = a.iter().map(|a| format!("{a} ")).collect();
        out += &format!("rel {r} : {args}{}\n", rigidity_word(sig.is_rigid_rel(r)));
    }
    out
}

/// Canonical text of a model, without its signature. Fails on names the format cannot carry.
pub fn save_model(m: &Kripke) -> Result<String, TextError> {
    let bad = |s: &String| s.is_empty() || s == "=" || s.contains(char::is_whitespace) || s.starts_with('#');
    let names = m.worlds.iter().chain(m.rigid.carriers.values().flatten()).chain(m.local.iter().flat_map(|l| l.carriers.values().flatten()));
    if let Some(n) = names.into_iter().find(|n| bad(n)) {
        return err(0, format!("name `{n}` cannot be written"));
    }
    let sig = &m.sig;
    let mut out = format!("worlds {}\n", m.worlds.join(" "));
    for (k, w) in &m.nominals {
        out += &format!("at {k} {}\n", m.worlds[*w]);
    }
    for (l, r) in &m.modalities {
        for (a, b) in r {
            out += &format!("edge {l} {} {}\n", m.worlds[*a], m.worlds[*b]);
        }
    }
    let per_world = |rigid: bool| -> Vec<(usize, String)> {
        if rigid {
            vec![(0, String::new())]
        } else {
            (0..m.n_worlds()).map(|w| (w, format!("@{}", m.worlds[w]))).collect()
        }
    };
    for s in &sig.body.sorts {
        for (w, suffix) in per_world(sig.is_rigid_sort(s)) {
            out += &format!("carrier{suffix} {s} {}\n", m.carrier(w, s).join(" "));
        }
    }
    for (o, d) in &sig.body.ops {
        for (w, suffix) in per_world(sig.is_rigid_op(o)) {
            let dims = m.dims(w, &d.args);
            for (i, t) in tuples(&dims).enumerate() {
                let args: String = t.iter().zip(&d.args).map(|(&e, s)| format!("{} ", m.carrier(w, s)[e])).collect();
                let v = m.op_table(w, o)[i];
                out += &format!("val{suffix} {o} {args}= {}\n", m.carrier(w, &d.result)[v]);
            }
        }
    }
    for (r, a) in &sig.body.rels {
        for (w, suffix) in per_world(sig.is_rigid_rel(r)) {
            let dims = m.dims(w, a);
            for (i, t) in tuples(&dims).enumerate() {
                if m.rel_table(w, r)[i] {
                    let args: Vec<&str> = t.iter().zip(a).map(|(&e, s)| m.carrier(w, s)[e].as_str()).collect();
                    let args = if args.is_empty() { String::new() } else { format!(" {}", args.join(" ")) };
                    out += &format!("holds{suffix} {r}{args}\n");
                }
            }
        }
    }
    Ok(out)
}

/// Canonical text of a document.
pub fn save(doc: &Document) -> Result<String, TextError> {
    let mut out = save_signature(&doc.sig);
    for a in &doc.axioms {
        out += &format!("axiom {}\n", print_sentence(a));
    }
    for t in &doc.types {
        let vars: String = t.vars.iter().map(|v| format!(" {}:{}", v.name, v.sort)).collect();
        out += &format!("type {}{vars}\n", t.name);
        for s in &t.sentences {
            out += &format!("member {}\n", print_sentence(s));
        }
    }
    if let Some(m) = &doc.model {
        out += &save_model(m)?;
    }
    for (k, a, b) in &doc.maps {
        out += &format!("map {k} {a} {b}\n");
    }
    Ok(out)
}

impl Document {
    pub fn with_sig(sig: &HDSignature) -> Self {
        Document { sig: sig.clone(), ..Document::default() }
    }

    /// The morphism from `source` into this document's signature: identity
    /// on names, overridden by the `map` entries.
    pub fn morphism(&self, source: &HDSignature) -> Result<SignatureMorphism, TextError> {
        let mut chi = SignatureMorphism::identity(source);
        chi.target = self.sig.clone();
        for (k, a, b) in &self.maps {
            let map = match k.as_str() {
                "nominal" => &mut chi.nominal_map,
                "modality" => &mut chi.modality_map,
                "sort" => &mut chi.sort_map,
                "op" => &mut chi.op_map,
                _ => &mut chi.rel_map,
            };
            if map.insert(a.clone(), b.clone()).is_none() {
                return err(0, format!("`{a}` is not a source {k}"));
            }
        }
        chi.check().map_err(|e| TextError { line: 0, msg: e.to_string() })?;
        Ok(chi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn list_theory_round_trips() {
        let doc = Document { axioms: fixtures::list_theory(), ..Document::with_sig(&fixtures::list_signature()) };
        let text = save(&doc).unwrap();
        let back = load(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(save(&back).unwrap(), text);
    }

    #[test]
    fn models_round_trip() {
        for m in [fixtures::hpl_k2(), fixtures::chain3_model(), fixtures::enc_family()[0].clone()] {
            let doc = Document { model: Some(m.clone()), ..Document::with_sig(&m.sig) };
            let back = load(&save(&doc).unwrap()).unwrap();
            assert_eq!(back.model.unwrap(), m);
        }
    }

    #[test]
    fn types_round_trip() {
        let sig = fixtures::hpl_signature();
        let doc = Document { types: vec![crate::omitting::nominal_type(&sig, "x")], ..Document::with_sig(&sig) };
        let text = save(&doc).unwrap();
        assert!(text.contains("type nominal x:any\nmember ~@k x\n"), "{text}");
        assert_eq!(load(&text).unwrap(), doc);
    }

    #[test]
    fn rigid_entries_per_world_are_rejected() {
        let src = "sort D rigid\nop c : -> D rigid\nworlds u v\ncarrier D a b\nval@u c = a\n";
        let e = load(src).unwrap_err();
        assert_eq!(e.line, 5);
        assert!(e.msg.contains("rigid"));
        let src = "sort D rigid\nop c : -> D rigid\nworlds u\ncarrier D a b\nval c = a\nval c = b\n";
        assert!(load(src).unwrap_err().msg.contains("divergent"));
    }

    #[test]
    fn diagnostics_carry_positions() {
        let e = load("nominal k\naxiom @k &\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = load("nominal k\nworlds a\n").unwrap_err();
        assert!(e.msg.contains('k'), "{e}");
        assert_eq!(load("bogus line\n").unwrap_err().line, 1);
    }

    #[test]
    fn fragments_use_the_given_signature() {
        let sig = fixtures::hpl_signature();
        let doc = load_in(&sig, "axiom @k rho\nworlds a\nat k a\n").unwrap();
        assert_eq!(doc.sig, sig);
        assert!(doc.model.is_some());
        assert_eq!(load_in(&sig, "axiom @k sigma\n").unwrap_err().line, 1);
    }

    #[test]
    fn morphism_entries() {
        let src = load("nominal k\nnominal j\nmodality lambda\nrel rho : flexible\nmap nominal k j\n").unwrap();
        let chi = src.morphism(&fixtures::hpl_signature()).unwrap();
        assert_eq!(chi.nominal("k"), "j");
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use hdfol::encoding::build_plus;
use hdfol::forcing::{
    build_generic, check_forcing_axioms_on, forces, generic_model, pool_closure, semantic_forcing, BoundedEntailment,
    LazyOracle, SatBudget, SatOutcome, SemanticForcing, MAX_POOL,
};
use hdfol::kripke::{is_constructor_based, reduct, sat_global, sat_local, Kripke, Reach};
use hdfol::omitting::{
    constructor_countermodel, constructor_entail, constructor_type, nominal_type, omitting_model, Derivation,
    EntailConfig, EntailVerdict, OmitConfig, OmitError, Rule, TypeSpec,
};
use hdfol::signature::{ConstructorPartition, FOSignature, HDSignature};
use hdfol::syntax::{fresh_name, parse_sentence, rigidify, translate, Sentence};
use hdfol::text::{self, Document};

use crate::{BudgetArgs, Command};

pub const SUCCESS: u8 = 0;
pub const REFUTED: u8 = 1;
pub const UNKNOWN: u8 = 2;
pub const INPUT_ERROR: u8 = 3;

pub struct Outcome {
    pub report: Value,
    pub code: u8,
}

fn done(report: Value, code: u8) -> Result<Outcome> {
    Ok(Outcome { report, code })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<Document> {
    text::load(&read(path)?).with_context(|| path.display().to_string())
}

fn load_in(sig: &HDSignature, path: &Path) -> Result<Document> {
    text::load_in(sig, &read(path)?).with_context(|| path.display().to_string())
}

fn write(path: &Option<std::path::PathBuf>, body: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, body).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

fn model_doc(m: &Kripke) -> Result<String> {
    Ok(text::save(&Document { model: Some(m.clone()), ..Document::with_sig(&m.sig) })?)
}

fn need_model(doc: &Document) -> Result<&Kripke> {
    doc.model.as_ref().ok_or_else(|| anyhow!("the document has no model"))
}

fn sentence(sig: &HDSignature, src: &str) -> Result<Sentence> {
    parse_sentence(sig, src).with_context(|| format!("in `{src}`"))
}

fn retrieved(sig: &HDSignature, src: &str) -> Result<(String, Sentence)> {
    match sentence(sig, src)? {
        Sentence::At(k, g) => Ok((k, *g)),
        _ => bail!("`{src}` is not of the form @k γ"),
    }
}

fn strings(ss: &[Sentence]) -> Vec<String> {
    ss.iter().map(Sentence::to_string).collect()
}

fn budget_json(b: &SatBudget) -> Value {
    serde_json::to_value(b).expect("budgets serialize")
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Validate { file } => validate(&load(file)?),
        Command::Check { file, sentences } => check(&load(file)?, sentences),
        Command::Translate { file, target, out } => translate_cmd(&load(file)?, &load(target)?, out),
        Command::Rigidify { file, nominal } => rigidify_cmd(&load(file)?, nominal),
        Command::Encode { file, family, out } => encode(file, family, out),
        Command::Decode { file, source, world, out } => decode(&load(file)?, &load(source)?, world, out),
        Command::Sat { file, budget, out } => sat(&load(file)?, &budget.budget()?, out),
        Command::Force { file, seeds, queries, budget } => force(&load(file)?, seeds, queries, &budget.budget()?),
        Command::Generic { file, seeds, budget, out } => generic(&load(file)?, seeds, &budget.budget()?, out),
        Command::Omit { file, type_files, nominal_type, constructors, type_depth, budget, out, audit } => omit(
            file,
            type_files,
            *nominal_type,
            constructors,
            *type_depth,
            budget,
            out,
            audit,
        ),
        Command::Entail { file, goal, constructors, depth, cross_check, budget } => {
            entail(&load(file)?, goal, constructors, *depth, *cross_check, &budget.budget()?)
        }
    }
}

fn validate(doc: &Document) -> Result<Outcome> {
    let sig = &doc.sig;
    let model = doc.model.as_ref().map(|m| json!({ "worlds": m.worlds, "satisfies_axioms": doc.axioms.iter().all(|a| sat_global(m, a)) }));
    done(
        json!({
            "command": "validate",
            "signature": {
                "nominals": sig.nominals().count(),
                "modalities": sig.modalities().count(),
                "sorts": sig.body.sorts.len(),
                "ops": sig.body.ops.len(),
                "rels": sig.body.rels.len(),
            },
            "axioms": doc.axioms.len(),
            "types": doc.types.iter().map(|t| json!({ "name": t.name, "members": t.sentences.len() })).collect::<Vec<_>>(),
            "model": model,
            "maps": doc.maps.len(),
        }),
        SUCCESS,
    )
}

fn check(doc: &Document, srcs: &[String]) -> Result<Outcome> {
    let m = need_model(doc)?;
    let ss = if srcs.is_empty() {
        doc.axioms.clone()
    } else {
        srcs.iter().map(|s| sentence(&doc.sig, s)).collect::<Result<_>>()?
    };
    let mut all = true;
    let rows: Vec<Value> = ss
        .iter()
        .map(|s| {
            let worlds: BTreeMap<&str, bool> =
                m.worlds.iter().enumerate().map(|(w, n)| (n.as_str(), sat_local(m, w, s))).collect();
            let global = worlds.values().all(|&b| b);
            all &= global;
            json!({ "sentence": s.to_string(), "worlds": worlds, "global": global })
        })
        .collect();
    done(json!({ "command": "check", "results": rows, "all_hold": all }), if all { SUCCESS } else { REFUTED })
}

fn translate_cmd(doc: &Document, target: &Document, out: &Option<std::path::PathBuf>) -> Result<Outcome> {
    let chi = target.morphism(&doc.sig)?;
    let axioms: Vec<Sentence> = doc.axioms.iter().map(|a| translate(&chi, a)).collect();
    let translated = Document { axioms: axioms.clone(), ..Document::with_sig(&target.sig) };
    let body = text::save(&translated)?;
    write(out, &body)?;
    let mut code = SUCCESS;
    let condition = match &target.model {
        Some(m) => {
            let r = reduct(m, &chi)?;
            let rows: Vec<Value> = doc
                .axioms
                .iter()
                .zip(&axioms)
                .map(|(a, t)| {
                    let (up, down) = (sat_global(m, t), sat_global(&r, a));
                    if up != down {
                        code = REFUTED;
                    }
                    json!({ "sentence": a.to_string(), "target_model": up, "reduct": down })
                })
                .collect();
            Some(json!({ "reduct": model_doc(&r)?, "rows": rows }))
        }
        None => None,
    };
    done(
        json!({ "command": "translate", "axioms": strings(&axioms), "document": body, "satisfaction": condition }),
        code,
    )
}

fn rigidify_cmd(doc: &Document, k: &str) -> Result<Outcome> {
    if !doc.sig.is_nominal(k) {
        bail!("unknown nominal `{k}`");
    }
    let mut code = SUCCESS;
    let mut rows = Vec::new();
    for a in &doc.axioms {
        let r = rigidify(&doc.sig, k, a)?;
        let agree = doc.model.as_ref().map(|m| {
            let same = sat_global(m, &Sentence::at(k, a.clone())) == sat_global(m, &r);
            if !same {
                code = REFUTED;
            }
            same
        });
        rows.push(json!({ "sentence": a.to_string(), "rigid": r.to_string(), "agree_on_model": agree }));
    }
    done(json!({ "command": "rigidify", "nominal": k, "results": rows }), code)
}

fn encode(file: &Path, family: &[std::path::PathBuf], out: &Option<std::path::PathBuf>) -> Result<Outcome> {
    let doc = load(file)?;
    let b = build_plus(&doc.sig)?;
    let mut axioms = b.gamma.clone();
    for a in &doc.axioms {
        axioms.push(b.encode(a)?);
    }
    let mut members: Vec<Kripke> = doc.model.iter().cloned().collect();
    for f in family {
        members.push(need_model(&load_in(&doc.sig, f)?)?.clone());
    }
    let model = if members.is_empty() { None } else { Some(b.assemble(&members)?) };
    let satisfied = model.as_ref().map(|m| axioms.iter().all(|a| sat_global(m, a)));
    let plus = Document { axioms, model, ..Document::with_sig(&b.plus) };
    let body = text::save(&plus)?;
    write(out, &body)?;
    done(
        json!({
            "command": "encode",
            "world_sort": b.world_sort,
            "gamma": strings(&b.gamma),
            "document": body,
            "model_satisfies": satisfied,
        }),
        SUCCESS,
    )
}

fn decode(doc: &Document, source: &Document, world: &str, out: &Option<std::path::PathBuf>) -> Result<Outcome> {
    let b = build_plus(&source.sig)?;
    if doc.sig != b.plus {
        bail!("the model's signature is not the flattening of the source signature");
    }
    let m = need_model(doc)?;
    let w = if world.is_empty() {
        0
    } else {
        m.world_index(world).ok_or_else(|| anyhow!("unknown world `{world}`"))?
    };
    let d = b.decode(m, w)?;
    let satisfied = source.axioms.iter().all(|a| sat_global(&d, a));
    let body = model_doc(&d)?;
    write(out, &body)?;
    done(
        json!({ "command": "decode", "world": m.worlds[w], "document": body, "satisfies_source_axioms": satisfied }),
        SUCCESS,
    )
}

fn sat(doc: &Document, budget: &SatBudget, out: &Option<std::path::PathBuf>) -> Result<Outcome> {
    let (verdict, model, code) = match hdfol::forcing::bounded_sat(&doc.sig, &doc.axioms, budget) {
        SatOutcome::Model(m) => {
            let body = model_doc(&m)?;
            write(out, &body)?;
            ("model", Some(body), SUCCESS)
        }
        SatOutcome::NoModel => ("none", None, REFUTED),
        SatOutcome::BudgetExceeded => ("unknown", None, UNKNOWN),
    };
    done(json!({ "command": "sat", "verdict": verdict, "model": model, "budget": budget_json(budget) }), code)
}

fn forcing_property(doc: &Document, seeds: &[String], budget: &SatBudget) -> Result<std::result::Result<SemanticForcing, Value>> {
    let seeds: Vec<Sentence> = seeds.iter().map(|s| sentence(&doc.sig, s)).collect::<Result<_>>()?;
    let pool = pool_closure(&doc.sig, &seeds, budget.star_bound, budget.term_depth)?;
    if pool.len() > MAX_POOL {
        return Ok(Err(json!(format!("witness closure has {} sentences, more than {MAX_POOL}", pool.len()))));
    }
    let mut oracle = LazyOracle::new(&doc.sig, &doc.axioms, budget);
    match semantic_forcing(&doc.sig, &pool, &mut oracle, budget.term_depth) {
        Ok(sf) => Ok(Ok(sf)),
        Err(hdfol::forcing::PoolError::NoModel(e)) => Ok(Err(json!(format!("no model within budget: {e}")))),
        Err(e) => Err(e.into()),
    }
}

fn force(doc: &Document, seeds: &[String], queries: &[String], budget: &SatBudget) -> Result<Outcome> {
    let sf = match forcing_property(doc, seeds, budget)? {
        Ok(sf) => sf,
        Err(why) => {
            return done(json!({ "command": "force", "failure": why, "budget": budget_json(budget) }), UNKNOWN);
        }
    };
    let fp = &sf.property;
    let basic: Vec<Sentence> = sf.pool.sentences.iter().filter(|s| s.is_basic()).cloned().collect();
    let axioms = check_forcing_axioms_on(fp, &mut BoundedEntailment { budget: budget.clone() }, &basic);
    let mut answers = Vec::new();
    for q in queries {
        let (k, g) = retrieved(&doc.sig, q)?;
        answers.push(json!({ "query": q, "verdict": format!("{:?}", forces(fp, 0, &k, &g)) }));
    }
    let code = if !axioms.passes() || !sf.is_witness_closed() {
        REFUTED
    } else if sf.undecided > 0 || axioms.undecided > 0 {
        UNKNOWN
    } else {
        SUCCESS
    };
    done(
        json!({
            "command": "force",
            "pool": strings(&sf.pool.sentences),
            "conditions": sf.masks.len(),
            "undecided_subsets": sf.undecided,
            "witness_failures": sf.invariant_failures.len(),
            "axioms": axioms,
            "queries": answers,
            "budget": budget_json(budget),
        }),
        code,
    )
}

fn generic(doc: &Document, seeds: &[String], budget: &SatBudget, out: &Option<std::path::PathBuf>) -> Result<Outcome> {
    let sf = match forcing_property(doc, seeds, budget)? {
        Ok(sf) => sf,
        Err(why) => {
            return done(json!({ "command": "generic", "failure": why, "budget": budget_json(budget) }), UNKNOWN);
        }
    };
    let pool = sf.pool.split();
    let g = build_generic(&sf.property, 0, &pool);
    let gm = generic_model(&sf.property, &g, &pool, budget.term_depth)?;
    let body = model_doc(&gm.model)?;
    write(out, &body)?;
    let decisions: Vec<Value> = g
        .decisions
        .iter()
        .map(|d| json!({ "sentence": Sentence::at(&d.nominal, d.sentence.clone()).to_string(), "positive": d.positive, "condition": sf.property.names[d.condition] }))
        .collect();
    let code = if !gm.mismatches.is_empty() {
        REFUTED
    } else if !g.undecided.is_empty() || gm.truncated {
        UNKNOWN
    } else {
        SUCCESS
    };
    done(
        json!({
            "command": "generic",
            "chain": g.chain.iter().map(|&p| &sf.property.names[p]).collect::<Vec<_>>(),
            "decisions": decisions,
            "undecided": strings(&g.undecided),
            "mismatches": strings(&gm.mismatches),
            "truncated": gm.truncated,
            "model": body,
            "budget": budget_json(budget),
        }),
        code,
    )
}

fn partition(sig: &HDSignature, names: &[String]) -> Result<ConstructorPartition> {
    let mut fo = FOSignature::new();
    for n in names {
        let d = sig.rigid.ops.get(n).ok_or_else(|| anyhow!("`{n}` is not a rigid operation"))?;
        let args: Vec<&str> = d.args.iter().map(String::as_str).collect();
        for s in args.iter().chain([&d.result.as_str()]) {
            fo = fo.sort(s);
        }
        fo = fo.op(n, &args, &d.result);
    }
    Ok(sig.partition(&fo)?)
}

#[allow(clippy::too_many_arguments)]
fn omit(
    file: &Path,
    type_files: &[std::path::PathBuf],
    with_nominal: bool,
    constructors: &[String],
    type_depth: usize,
    budget: &BudgetArgs,
    out: &Option<std::path::PathBuf>,
    audit: &Option<std::path::PathBuf>,
) -> Result<Outcome> {
    let doc = load(file)?;
    let sig = &doc.sig;
    let mut types: Vec<TypeSpec> = doc.types.clone();
    for f in type_files {
        types.extend(load_in(sig, f)?.types);
    }
    let avoid = sig.nominals().cloned().chain(sig.body.ops.keys().cloned()).collect();
    if with_nominal {
        types.push(nominal_type(sig, &fresh_name("x", &avoid)));
    }
    if !constructors.is_empty() {
        let p = partition(sig, constructors)?;
        for s in &p.constrained {
            types.push(constructor_type(sig, &p, s, &fresh_name("y", &avoid), type_depth));
        }
    }
    let b = budget.budget()?;
    let cfg = OmitConfig { budget: b.clone(), term_depth: b.term_depth, constants: budget.constants, probe_pool: vec![] };
    let run = match omitting_model(sig, &doc.axioms, &types, &cfg) {
        Ok(run) => run,
        Err(e) => {
            let code = match e {
                OmitError::Unsatisfiable(_) => REFUTED,
                _ => UNKNOWN,
            };
            return done(json!({ "command": "omit", "failure": e.to_string(), "config": cfg }), code);
        }
    };
    let body = model_doc(&run.model)?;
    write(out, &body)?;
    let log = serde_json::to_string_pretty(&run.log())? + "\n";
    write(audit, &log)?;
    let reach = if constructors.is_empty() {
        None
    } else {
        Some(is_constructor_based(&run.model, &partition(sig, constructors)?, type_depth))
    };
    let code = match (run.audit.passes(), reach) {
        (false, _) | (true, Some(Reach::No)) => REFUTED,
        (true, Some(Reach::BeyondBound)) => UNKNOWN,
        _ => SUCCESS,
    };
    done(
        json!({
            "command": "omit",
            "types": types.iter().map(|t| &t.name).collect::<Vec<_>>(),
            "steps": run.steps.len(),
            "passes": run.audit.passes(),
            "satisfies_theory": run.audit.satisfies_theory,
            "constructor_based": reach,
            "truncated": run.audit.truncated,
            "model": body,
            "config": cfg,
        }),
        code,
    )
}

fn rule_name(r: &Rule) -> String {
    match r {
        Rule::R0 => "R0".into(),
        Rule::R1 { var } => format!("R1 {var}"),
        Rule::R2 { var } => format!("R2 {var}"),
    }
}

fn derivation_json(d: &Derivation) -> Value {
    json!({
        "sentence": d.sentence.to_string(),
        "rule": rule_name(&d.rule),
        "premises": d.premises.iter().map(derivation_json).collect::<Vec<_>>(),
    })
}

fn entail(
    doc: &Document,
    goal: &str,
    constructors: &[String],
    depth: usize,
    cross_check: bool,
    budget: &SatBudget,
) -> Result<Outcome> {
    let phi = sentence(&doc.sig, goal)?;
    let p = partition(&doc.sig, constructors)?;
    let cfg = EntailConfig { budget: budget.clone(), depth };
    let verdict = constructor_entail(&doc.sig, &doc.axioms, &phi, &p, &cfg);
    let counter = cross_check.then(|| constructor_countermodel(&doc.sig, &doc.axioms, &phi, &p, depth, budget));
    let countermodel = match &counter {
        Some(SatOutcome::Model(m)) => Some(json!(model_doc(m)?)),
        Some(SatOutcome::NoModel) => Some(json!("none")),
        Some(SatOutcome::BudgetExceeded) => Some(json!("unknown")),
        None => None,
    };
    let found_counter = matches!(counter, Some(SatOutcome::Model(_)));
    let code = match (&verdict, found_counter) {
        (EntailVerdict::Derivable(_), true) => REFUTED,
        (EntailVerdict::Derivable(_), false) => SUCCESS,
        (EntailVerdict::NotDerivableAtBudget, true) => REFUTED,
        (EntailVerdict::NotDerivableAtBudget, false) => UNKNOWN,
    };
    let derivation = match &verdict {
        EntailVerdict::Derivable(d) => derivation_json(d),
        EntailVerdict::NotDerivableAtBudget => Value::Null,
    };
    done(
        json!({
            "command": "entail",
            "goal": phi.to_string(),
            "derivable": verdict.is_derivable(),
            "derivation": derivation,
            "countermodel": countermodel,
            "depth": depth,
            "budget": budget_json(budget),
        }),
        code,
    )
}

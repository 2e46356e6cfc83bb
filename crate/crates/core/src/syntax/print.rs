use super::{Action, Sentence, Term};

pub fn print_term(t: &Term) -> String {
    let mut s = t.op.to_string();
    if !t.args.is_empty() {
        s.push('(');
        s.push_str(&t.args.iter().map(print_term).collect::<Vec<_>>().join(", "));
        s.push(')');
    }
    s
}

pub fn print_action(a: &Action) -> String {
    match a {
        Action::Atom(l) => l.clone(),
        Action::Seq(x, y) => format!("({} ; {})", print_action(x), print_action(y)),
        Action::Union(x, y) => format!("({} | {})", print_action(x), print_action(y)),
        Action::Star(x) => format!("{}*", print_action(x)),
    }
}

fn negated(s: &Sentence) -> Option<&Sentence> {
    match s {
        Sentence::Not(g) => Some(g),
        _ => None,
    }
}

/// Canonical concrete syntax; `parse_sentence` inverts it exactly.
pub fn print_sentence(s: &Sentence) -> String {
    match s {
        Sentence::Nominal(k) => k.clone(),
        Sentence::Eq(a, b) => format!("{} = {}", print_term(a), print_term(b)),
        Sentence::Rel(sym, args) => print_term(&Term { op: sym.clone(), args: args.clone() }),
        Sentence::At(k, g) => format!("@{} {}", k, print_sentence(g)),
        Sentence::Not(g) => match &**g {
            Sentence::Or(ms) if ms.is_empty() => "true".to_string(),
            Sentence::Or(ms) if ms.len() >= 2 && ms.iter().all(|m| negated(m).is_some()) => {
                let parts: Vec<String> = ms.iter().map(|m| print_sentence(negated(m).unwrap())).collect();
                format!("({})", parts.join(" & "))
            }
            Sentence::Exists(xs, body) if negated(body).is_some() => {
                format!("(forall {} . {})", print_vars(xs), print_sentence(negated(body).unwrap()))
            }
            Sentence::Dia(a, body) if negated(body).is_some() => {
                format!("[{}] {}", print_action(a), print_sentence(negated(body).unwrap()))
            }
            _ => format!("~{}", print_sentence(g)),
        },
        Sentence::Or(ms) => match ms.len() {
            0 => "false".to_string(),
            1 => {
                let m = print_sentence(ms.iter().next().unwrap());
                format!("({m} | {m})")
            }
            _ => format!("({})", ms.iter().map(print_sentence).collect::<Vec<_>>().join(" | ")),
        },
        Sentence::Store(z, g) => format!("(down {} . {})", z, print_sentence(g)),
        Sentence::Exists(xs, g) => format!("(exists {} . {})", print_vars(xs), print_sentence(g)),
        Sentence::Dia(a, g) => format!("<{}> {}", print_action(a), print_sentence(g)),
    }
}

fn print_vars(xs: &std::collections::BTreeSet<super::Var>) -> String {
    xs.iter().map(|x| format!("{}:{}", x.name, x.sort)).collect::<Vec<_>>().join(", ")
}

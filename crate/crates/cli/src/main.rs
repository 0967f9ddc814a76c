use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use zid_core::dcalc::{rule1_applicable, rule2_applicable, rule3_applicable};
use zid_core::identify::{corollary2_precheck, pearl_criterion, verdict_json};
use zid_core::table::assignments;
use zid_core::{
    extract_hedge, id, idz, parse_graph, random_scm, theorem3_zid, Admg, Assignment, Estimand, Evaluator, Hedge,
    IdResult, Query, RenderFormat, Scm, VarSet, VariableId,
};

/// Oracle disagreement above this fails `--verify-n`.
const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Idz,
    Id,
    Thm3,
    Pearl,
    Cor2,
    CheckRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Latex,
    Json,
}

/// Decide whether a causal effect is identifiable from observations plus
/// experiments on a set of surrogate variables.
#[derive(Debug, Parser)]
#[command(name = "zid", version)]
struct Cli {
    /// Graph file: one `A -> B` or `A <-> B` edge per line, `node A` for isolated vertices.
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "idz")]
    mode: Mode,
    /// Outcome variables as NAME=value (value defaults to 0).
    #[arg(long, short = 'y', value_delimiter = ',')]
    outcome: Vec<String>,
    /// Treatment variables as NAME=value (value defaults to 0).
    #[arg(long, short = 'x', value_delimiter = ',')]
    treatment: Vec<String>,
    /// Variables with available experiments.
    #[arg(long, short = 'z', value_delimiter = ',')]
    surrogate: Vec<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Check an identified estimand against this many random models.
    #[arg(long, default_value_t = 0)]
    verify_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cardinality overrides for verification, as NAME=k (default 2).
    #[arg(long, value_delimiter = ',')]
    card: Vec<String>,
    /// do-calculus rule for check-rule mode.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    rule: Option<u8>,
    /// Intervened set of the rule (check-rule mode).
    #[arg(long, value_delimiter = ',')]
    hat: Vec<String>,
    /// Set inserted, exchanged or deleted by the rule (check-rule mode).
    #[arg(long, value_delimiter = ',')]
    target: Vec<String>,
    /// Observed conditioning set of the rule (check-rule mode).
    #[arg(long, value_delimiter = ',')]
    given: Vec<String>,
}

#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

/// What a run produced: the exit status plus everything destined for stdout.
struct Outcome {
    code: u8,
    stdout: String,
}

fn read_graph(path: &PathBuf) -> Result<Admg, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| {
        let mut msg = format!("{}: {e}", path.display());
        if let Some(line) = e.line().and_then(|n| text.lines().nth(n - 1)) {
            let _ = write!(msg, "\n  | {}", line.trim_end());
        }
        InputError(msg)
    })
}

fn resolve(g: &Admg, name: &str, flag: &str) -> Result<VariableId, InputError> {
    let v = VariableId::new(name.trim()).map_err(|_| InputError(format!("--{flag}: invalid name {name:?}")))?;
    if !g.contains(&v) {
        return Err(InputError(format!("--{flag}: {v} is not a vertex of the graph")));
    }
    Ok(v)
}

fn names(g: &Admg, items: &[String], flag: &str) -> Result<VarSet, InputError> {
    items.iter().map(|s| resolve(g, s, flag)).collect()
}

fn valued(g: &Admg, items: &[String], flag: &str, notices: &mut Vec<String>) -> Result<Assignment, InputError> {
    let mut out = Assignment::new();
    for item in items {
        let (name, value) = match item.split_once('=') {
            Some((n, v)) => {
                let value = v
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| InputError(format!("--{flag}: bad value in {item:?}")))?;
                (n, value)
            }
            None => {
                notices.push(format!("notice: no value given for {}; using 0", item.trim()));
                (item.as_str(), 0)
            }
        };
        let v = resolve(g, name, flag)?;
        if out.get(&v).is_some() {
            return Err(InputError(format!("--{flag}: {v} given twice")));
        }
        out.insert(v, value);
    }
    Ok(out)
}

fn cardinalities(g: &Admg, items: &[String]) -> Result<BTreeMap<VariableId, usize>, InputError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (name, k) = item
            .split_once('=')
            .ok_or_else(|| InputError(format!("--card: expected NAME=k, got {item:?}")))?;
        let k: usize = k.trim().parse().map_err(|_| InputError(format!("--card: bad cardinality in {item:?}")))?;
        if k < 2 {
            return Err(InputError(format!("--card: {name} needs at least 2 values")));
        }
        out.insert(resolve(g, name, "card")?, k);
    }
    Ok(out)
}

fn list(s: &VarSet) -> String {
    let items: Vec<&str> = s.iter().map(|v| v.as_str()).collect();
    format!("{{{}}}", items.join(", "))
}

fn edges<'a>(es: impl IntoIterator<Item = &'a (VariableId, VariableId)>, arrow: &str) -> String {
    let items: Vec<String> = es.into_iter().map(|(a, b)| format!("{a} {arrow} {b}")).collect();
    if items.is_empty() {
        "none".into()
    } else {
        items.join(", ")
    }
}

fn write_hedge(out: &mut String, h: &Hedge) {
    let _ = writeln!(out, "hedge F: vertices {}", list(&h.f_vertices));
    let _ = writeln!(out, "  directed: {}", edges(&h.f_directed, "->"));
    let _ = writeln!(out, "  bidirected: {}", edges(&h.f_bidirected, "<->"));
    let _ = writeln!(out, "hedge F': vertices {}", list(&h.fprime_vertices));
    let _ = writeln!(out, "  directed: {}", edges(&h.fprime_directed, "->"));
    let _ = writeln!(out, "  bidirected: {}", edges(&h.fprime_bidirected, "<->"));
    let _ = writeln!(out, "hedge R: {}", list(&h.r));
}

fn assignment_text(a: &Assignment) -> String {
    a.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

/// Largest |estimand - truth| over `n` seeded models and every value of the query.
fn verify(
    g: &Admg,
    e: &Estimand,
    q: &Query,
    card: &BTreeMap<VariableId, usize>,
    n: usize,
    seed: u64,
) -> Result<f64, InputError> {
    let k = |v: &VariableId| card.get(v).copied().unwrap_or(2);
    let xs: Vec<(VariableId, usize)> = q.x_vars().iter().map(|v| (v.clone(), k(v))).collect();
    let ys: Vec<(VariableId, usize)> = q.y_vars().iter().map(|v| (v.clone(), k(v))).collect();
    let errors: Vec<Result<f64, InputError>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let m: Scm = random_scm(g, card, seed.wrapping_add(i))?;
            let fam = m.family(&q.z)?;
            let ev = Evaluator::new(&fam);
            let mut worst: f64 = 0.0;
            for x in assignments(&xs) {
                for y in assignments(&ys) {
                    let mut free = x.clone();
                    for (v, &val) in y.iter() {
                        free.insert(v.clone(), val);
                    }
                    let got = ev.evaluate(e, &free)?;
                    worst = worst.max((got - m.truth(&x, &y)?).abs());
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for r in errors {
        worst = worst.max(r?);
    }
    Ok(worst)
}

fn run(cli: &Cli) -> Result<Outcome, InputError> {
    let g = read_graph(&cli.graph)?;
    let mut notices = Vec::new();
    let y = valued(&g, &cli.outcome, "outcome", &mut notices)?;
    let x = valued(&g, &cli.treatment, "treatment", &mut notices)?;
    let z = names(&g, &cli.surrogate, "surrogate")?;
    let card = cardinalities(&g, &cli.card)?;
    for (v, &val) in y.iter().chain(x.iter()) {
        let k = card.get(v).copied().unwrap_or(2);
        if val as usize >= k {
            return Err(InputError(format!("{v}={val} is outside 0..{k}")));
        }
    }
    for n in &notices {
        eprintln!("{n}");
    }
    if cli.mode == Mode::CheckRule {
        return check_rule(cli, &g, &y.vars());
    }
    if y.is_empty() {
        return Err(InputError("--outcome is required".into()));
    }
    let q = Query::new(&y.vars(), &x.vars(), &z);
    q.validate(&g)?;
    match cli.mode {
        Mode::Idz | Mode::Id => {
            let r = if cli.mode == Mode::Idz {
                idz(&q, &g)?
            } else {
                if !q.z.is_empty() {
                    eprintln!("notice: surrogates are ignored in id mode");
                }
                id(&q.without_surrogates(), &g)?
            };
            report(cli, &g, &q, &x, &y, &card, &r, None)
        }
        Mode::Thm3 => {
            let v = theorem3_zid(&q, &g)?;
            let r = idz(&q, &g)?;
            let mut out = report(cli, &g, &q, &x, &y, &card, &r, Some(&v.witness))?;
            if !v.zid {
                out.code = out.code.max(1);
            }
            if cli.format == Format::Json {
                let mut json: serde_json::Value = serde_json::from_str(&out.stdout)?;
                json["zid"] = v.zid.into();
                json["subsets_checked"] = v.subsets_checked.into();
                out.stdout = format!("{}\n", serde_json::to_string_pretty(&json)?);
            } else {
                let mut head = String::new();
                match &v.witness {
                    Some(w) => {
                        let _ = writeln!(head, "subset criterion: zID with experiments on {}", list(w));
                    }
                    None => {
                        let _ = writeln!(head, "subset criterion: not zID");
                    }
                }
                let _ = writeln!(head, "subsets checked: {}", v.subsets_checked);
                out.stdout = head + &out.stdout;
            }
            Ok(out)
        }
        Mode::Pearl => {
            let holds = pearl_criterion(&g, &q.x_vars(), &z, &q.y_vars())?;
            let text = if holds { "holds" } else { "does not hold" };
            Ok(boolean(cli, "pearl", holds, &format!("surrogate criterion {text}")))
        }
        Mode::Cor2 => {
            let useless = corollary2_precheck(&g, &q.x_vars(), &q.y_vars(), &z)?;
            let text = if useless {
                "not zID: every surrogate descends from the treatment"
            } else {
                "inconclusive"
            };
            Ok(boolean(cli, "cor2", !useless, text))
        }
        Mode::CheckRule => unreachable!(),
    }
}

fn boolean(cli: &Cli, mode: &str, ok: bool, text: &str) -> Outcome {
    let stdout = if cli.format == Format::Json {
        format!("{}\n", serde_json::json!({ "mode": mode, "result": ok }))
    } else {
        format!("{text}\n")
    };
    Outcome {
        code: if ok { 0 } else { 1 },
        stdout,
    }
}

fn check_rule(cli: &Cli, g: &Admg, y: &VarSet) -> Result<Outcome, InputError> {
    let rule = cli.rule.ok_or_else(|| InputError("check-rule needs --rule".into()))?;
    if y.is_empty() {
        return Err(InputError("check-rule needs --outcome".into()));
    }
    let hat = names(g, &cli.hat, "hat")?;
    let target = names(g, &cli.target, "target")?;
    let given = names(g, &cli.given, "given")?;
    let ok = match rule {
        1 => rule1_applicable(g, y, &hat, &target, &given)?,
        2 => rule2_applicable(g, y, &hat, &target, &given)?,
        _ => rule3_applicable(g, y, &hat, &target, &given)?,
    };
    let text = format!("rule {rule} {}", if ok { "applies" } else { "does not apply" });
    Ok(boolean(cli, "check-rule", ok, &text))
}

#[allow(clippy::too_many_arguments)]
fn report(
    cli: &Cli,
    g: &Admg,
    q: &Query,
    x: &Assignment,
    y: &Assignment,
    card: &BTreeMap<VariableId, usize>,
    r: &IdResult,
    witness: Option<&Option<VarSet>>,
) -> Result<Outcome, InputError> {
    let mut code = if r.is_identified() { 0 } else { 1 };
    let error = match (r.estimand(), cli.verify_n) {
        (Some(e), n) if n > 0 => Some(verify(g, e, q, card, n, cli.seed)?),
        _ => None,
    };
    if error.is_some_and(|err| err > VERIFY_TOLERANCE) {
        code = 3;
    }
    let mut out = String::new();
    if cli.format == Format::Json {
        let mut json = verdict_json(r, witness.and_then(|w| w.as_ref()))?;
        if let Some(err) = error {
            json["oracle_max_error"] = err.into();
            json["oracle_models"] = cli.verify_n.into();
        }
        out = format!("{}\n", serde_json::to_string_pretty(&json)?);
    } else {
        match r {
            IdResult::Identified(e) => {
                let format = if cli.format == Format::Latex { RenderFormat::Latex } else { RenderFormat::Text };
                let e = e.normalize();
                let _ = writeln!(out, "identified");
                let _ = writeln!(out, "estimand: {}", e.render(format));
                let expanded = e.expand_conditionals().normalize();
                if expanded != e {
                    let _ = writeln!(out, "expanded: {}", expanded.render(format));
                }
                let _ = writeln!(out, "at: {}", assignment_text(&merge(y, x)));
            }
            IdResult::Fail(f) => {
                let _ = writeln!(out, "not z-identifiable");
                write_hedge(&mut out, &extract_hedge(f)?);
            }
        }
        if let Some(err) = error {
            let status = if err > VERIFY_TOLERANCE { "FAILED" } else { "ok" };
            let _ = writeln!(out, "oracle: max error {err:.3e} over {} models ({status})", cli.verify_n);
        }
    }
    Ok(Outcome { code, stdout: out })
}

fn merge(a: &Assignment, b: &Assignment) -> Assignment {
    a.iter().chain(b.iter()).map(|(k, &v)| (k.clone(), v)).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use parstoch::error::{Error, Result};
use parstoch::idempotents::split_idempotent;
use parstoch::kernel::{Column, Kernel};
use parstoch::lawsuite::{
    check, check_all, check_substochastic_quasi_totality, GenConfig, LawReport,
};
use parstoch::object::Label;
use parstoch::parmap::Subobject;
use parstoch::products::LaxCone;
use parstoch::representability::{check_partial_algebra, DistObject, PartialAlgebraCandidate};
use parstoch::semiring::{Semiring, SemiringValue};
use parstoch::substochastic::SubKernel;
use parstoch::term::{self, Term};
use parstoch::textform::{parse_env, Env};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Parser)]
#[command(
    name = "parstoch",
    version,
    about = "Exact engine and law checker for partial stochastic maps"
)]
struct Cli {
    /// semiring instance: qnonneg | bool | nat
    #[arg(long, global = true, default_value = "qnonneg")]
    semiring: String,
    /// seed for the deterministic generators
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// samples per law check
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// largest generated carrier
    #[arg(long = "max-size", global = true, default_value_t = 4)]
    max_size: usize,
    /// output style; machine is line-oriented key=value
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a term over the declarations in a file
    Eval { file: PathBuf, term: String },
    /// Run a named law check (or `all`) with the deterministic harness
    Check { law: String },
    /// Evaluate a term under both the span and the sub-stochastic semantics
    CompareSubstochastic { file: PathBuf, term: String },
    /// Split an idempotent declared in a file
    Split { file: PathBuf, name: String },
    /// Check every algebra block declared in a file
    CheckAlgebra { file: PathBuf },
    /// Build the induced map of every cone block declared in a file
    LaxInduce { file: PathBuf },
    /// Materialize the distribution object of a declared object
    DistObject { file: PathBuf, object: String },
}

fn emit(format: Format, pairs: &[(&str, String)]) {
    for (k, v) in pairs {
        match format {
            Format::Text => println!("{k}: {v}"),
            Format::Machine => println!("{k}={v}"),
        }
    }
}

fn load(file: &PathBuf, tag: Semiring) -> Result<Env> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::InvalidValue(format!("cannot read {}: {e}", file.display())))?;
    parse_env(&text, tag)
}

/// The comparator semantics: same term, but sequential composition is plain
/// matrix composition on sub-stochastic embeddings.
fn eval_sub(t: &Term, env: &Env, tag: Semiring) -> Result<SubKernel> {
    match t {
        Term::Seq(a, b) => SubKernel::compose(&eval_sub(b, env, tag)?, &eval_sub(a, env, tag)?),
        Term::Ten(a, b) => SubKernel::tensor(&eval_sub(a, env, tag)?, &eval_sub(b, env, tag)?),
        atom => Ok(SubKernel::embed(&term::eval(atom, env, tag)?)),
    }
}

fn report_line(r: &LawReport, format: Format) {
    let verdict = if r.passed { "pass" } else { "fail" };
    match format {
        Format::Text => {
            println!(
                "{} {} ({}, {} samples)",
                verdict.to_uppercase(),
                r.law,
                r.instance,
                r.samples
            );
            if let Some(w) = &r.counterexample {
                println!("counterexample:\n{w}");
            }
        }
        Format::Machine => {
            println!(
                "law={} instance={} passed={} samples={}",
                r.law, r.instance, r.passed, r.samples
            );
            if let Some(w) = &r.counterexample {
                for line in w.lines() {
                    println!("counterexample={line}");
                }
            }
        }
    }
}

fn algebra_candidate(env: &Env, name: &str, tag: Semiring) -> Result<PartialAlgebraCandidate> {
    let decl = env
        .algebras
        .get(name)
        .ok_or_else(|| Error::UnboundName(name.into()))?;
    let carrier = env.object(&decl.carrier)?;
    let pa = DistObject::new(carrier, tag)?;
    let keys: Vec<Label> = decl.entries.iter().map(|(k, _)| k.clone()).collect();
    for k in &keys {
        if !pa.carrier().contains(k) {
            return Err(Error::ObjectMismatch(format!(
                "`{k}` is not an element of the distribution object of {}",
                decl.carrier
            )));
        }
    }
    let dom = Subobject::new(pa.carrier().clone(), keys)?;
    let one = SemiringValue::one(tag);
    let cols: BTreeMap<Label, Column> = decl
        .entries
        .iter()
        .map(|(k, v)| (k.clone(), [(v.clone(), one.clone())].into_iter().collect()))
        .collect();
    let action = Kernel::new(dom.as_object(), carrier.clone(), tag, cols)?;
    PartialAlgebraCandidate::new(pa, dom, action)
}

fn build_cone(env: &Env, name: &str, tag: Semiring) -> Result<LaxCone> {
    let decl = env
        .cones
        .get(name)
        .ok_or_else(|| Error::UnboundName(name.into()))?;
    let apex = env.object(&decl.apex)?.clone();
    let factors = decl
        .factors
        .iter()
        .map(|f| env.object(f).cloned())
        .collect::<Result<Vec<_>>>()?;
    let legs = decl
        .legs
        .iter()
        .map(|(idx, leg)| Ok((idx.clone(), env.as_parmap(leg)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    LaxCone::new(apex, factors, tag, legs)
}

fn run(cli: &Cli) -> Result<bool> {
    let tag = Semiring::parse(&cli.semiring)?;
    let mut cfg = GenConfig::new(tag);
    cfg.seed = cli.seed;
    cfg.samples = cli.samples;
    cfg.max_object_size = cli.max_size;

    match &cli.cmd {
        Cmd::Eval { file, term } => {
            let env = load(file, tag)?;
            let t = term::parse(term)?;
            let value = term::eval(&t, &env, tag)?;
            emit(
                cli.format,
                &[
                    ("term", term::print(&t)),
                    ("value", value.to_text("result")),
                    ("total", value.is_total().to_string()),
                    ("deterministic", value.is_deterministic().to_string()),
                ],
            );
            Ok(true)
        }
        Cmd::Check { law } => {
            let reports = if law == "all" {
                check_all(&cfg)?
            } else if law == "substochastic_quasi_totality" {
                // the deliberately wrong engine: here the harness succeeds
                // exactly when it finds the failure
                let r = check_substochastic_quasi_totality(&cfg)?;
                report_line(&r, cli.format);
                return Ok(!r.passed);
            } else {
                vec![check(law, &cfg)?]
            };
            let mut ok = true;
            for r in &reports {
                report_line(r, cli.format);
                ok &= r.passed;
            }
            Ok(ok)
        }
        Cmd::CompareSubstochastic { file, term } => {
            let env = load(file, tag)?;
            let t = term::parse(term)?;
            let span = term::eval(&t, &env, tag)?;
            let sub = eval_sub(&t, &env, tag)?;
            let agree = sub == SubKernel::embed(&span);
            emit(
                cli.format,
                &[
                    ("term", term::print(&t)),
                    ("span", span.to_text("result")),
                    ("substochastic", sub.to_string()),
                    ("agree", agree.to_string()),
                ],
            );
            Ok(true)
        }
        Cmd::Split { file, name } => {
            let env = load(file, tag)?;
            let u = env.as_parmap(name)?;
            let s = split_idempotent(&u)?;
            emit(
                cli.format,
                &[
                    ("through", s.through.to_string()),
                    ("section", s.section.to_text("s")),
                    ("retraction", s.retraction.to_text("r")),
                ],
            );
            Ok(true)
        }
        Cmd::CheckAlgebra { file } => {
            let env = load(file, tag)?;
            if env.algebras.is_empty() {
                return Err(Error::InvalidValue("no algebra blocks in the file".into()));
            }
            let mut ok = true;
            for name in env.algebras.keys() {
                let report = check_partial_algebra(&algebra_candidate(&env, name, tag)?)?;
                let cond = |o: &Option<String>| {
                    o.clone()
                        .map_or("pass".to_string(), |w| format!("fail ({w})"))
                };
                emit(
                    cli.format,
                    &[
                        ("algebra", name.clone()),
                        ("unit_section", cond(&report.unit_section)),
                        ("pullback_agreement", cond(&report.pullback_agreement)),
                        ("squares", cond(&report.squares)),
                    ],
                );
                ok &= report.passed();
            }
            Ok(ok)
        }
        Cmd::LaxInduce { file } => {
            let env = load(file, tag)?;
            if env.cones.is_empty() {
                return Err(Error::InvalidValue("no cone blocks in the file".into()));
            }
            for name in env.cones.keys() {
                let cone = build_cone(&env, name, tag)?;
                let induced = cone.lax_induced_map()?;
                emit(
                    cli.format,
                    &[
                        ("cone", name.clone()),
                        ("lax", cone.is_lax_cone()?.to_string()),
                        ("strict", cone.is_strict()?.to_string()),
                        ("induced", induced.to_text("induced")),
                    ],
                );
            }
            Ok(true)
        }
        Cmd::DistObject { file, object } => {
            let env = load(file, tag)?;
            let pa = DistObject::new(env.object(object)?, tag)?;
            let (_, mu) = pa.mu()?;
            emit(
                cli.format,
                &[
                    ("base", pa.base().to_string()),
                    ("carrier", pa.carrier().to_string()),
                    ("delta", pa.delta().to_text("delta")),
                    ("samp", pa.samp().to_text("samp")),
                    ("mu", mu.to_text("mu")),
                ],
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

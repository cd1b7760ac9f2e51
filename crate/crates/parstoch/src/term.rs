//! The term language: a small string-diagram DSL over named kernels and
//! partial maps.  `;` is sequential composition in diagram order (left runs
//! first), `*` is tensor and binds tighter.

use rand::Rng;

use crate::conditionals::par_conditional;
use crate::error::{Error, Result};
use crate::object::{FinObject, Label};
use crate::parmap::ParMap;
use crate::products::infinite_copy;
use crate::representability::{pushforward, sharp, DistObject};
use crate::semiring::Semiring;
use crate::textform::{Cursor, Env, Tok};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Name(String),
    Id(String),
    Copy(String),
    Discard(String),
    Swap(String, String),
    Delta(String),
    Samp(String),
    Dom(Box<Term>),
    Cond(Box<Term>),
    Sharp(Box<Term>),
    Push(Box<Term>),
    ICopy(Box<Term>, usize),
    Seq(Box<Term>, Box<Term>),
    Ten(Box<Term>, Box<Term>),
}

pub fn parse(text: &str) -> Result<Term> {
    let mut cur = Cursor::new(text)?;
    let t = parse_seq(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("trailing input after term"));
    }
    Ok(t)
}

fn parse_seq(cur: &mut Cursor) -> Result<Term> {
    let mut t = parse_ten(cur)?;
    while cur.at_sym(';') {
        cur.next();
        t = Term::Seq(Box::new(t), Box::new(parse_ten(cur)?));
    }
    Ok(t)
}

fn parse_ten(cur: &mut Cursor) -> Result<Term> {
    let mut t = parse_atom(cur)?;
    while cur.at_sym('*') {
        cur.next();
        t = Term::Ten(Box::new(t), Box::new(parse_atom(cur)?));
    }
    Ok(t)
}

fn parse_atom(cur: &mut Cursor) -> Result<Term> {
    if cur.at_sym('(') {
        cur.next();
        let t = parse_seq(cur)?;
        cur.expect_sym(')')?;
        return Ok(t);
    }
    let name = match cur.peek() {
        Some(Tok::Ident(s)) => s.clone(),
        Some(t) => return Err(cur.err(format!("expected a term, found {t}"))),
        None => return Err(cur.err("expected a term, found end of input")),
    };
    cur.next();
    let is_call = cur.at_sym('(');
    if !is_call {
        return Ok(Term::Name(name));
    }
    cur.next();
    let t = match name.as_str() {
        "id" => Term::Id(cur.expect_ident()?),
        "copy" => Term::Copy(cur.expect_ident()?),
        "discard" => Term::Discard(cur.expect_ident()?),
        "delta" => Term::Delta(cur.expect_ident()?),
        "samp" => Term::Samp(cur.expect_ident()?),
        "swap" => {
            let a = cur.expect_ident()?;
            cur.expect_sym(',')?;
            Term::Swap(a, cur.expect_ident()?)
        }
        "dom" => Term::Dom(Box::new(parse_seq(cur)?)),
        "cond" => Term::Cond(Box::new(parse_seq(cur)?)),
        "sharp" => Term::Sharp(Box::new(parse_seq(cur)?)),
        "push" => Term::Push(Box::new(parse_seq(cur)?)),
        "icopy" => {
            let t = parse_seq(cur)?;
            cur.expect_sym(',')?;
            let k = match cur.peek() {
                Some(Tok::Int(s)) => {
                    let k = s
                        .parse()
                        .map_err(|_| cur.err(format!("bad copy count `{s}`")))?;
                    cur.next();
                    k
                }
                _ => return Err(cur.err("expected a copy count")),
            };
            Term::ICopy(Box::new(t), k)
        }
        other => return Err(cur.err(format!("`{other}` is not an operation"))),
    };
    cur.expect_sym(')')?;
    Ok(t)
}

fn level(t: &Term) -> u8 {
    match t {
        Term::Seq(_, _) => 0,
        Term::Ten(_, _) => 1,
        _ => 2,
    }
}

fn print_at(t: &Term, min: u8, out: &mut String) {
    let wrap = level(t) < min;
    if wrap {
        out.push('(');
    }
    match t {
        Term::Name(n) => out.push_str(n),
        Term::Id(o) => push_call(out, "id", &[o]),
        Term::Copy(o) => push_call(out, "copy", &[o]),
        Term::Discard(o) => push_call(out, "discard", &[o]),
        Term::Delta(o) => push_call(out, "delta", &[o]),
        Term::Samp(o) => push_call(out, "samp", &[o]),
        Term::Swap(a, b) => push_call(out, "swap", &[a, b]),
        Term::Dom(s) => push_nested(out, "dom", s),
        Term::Cond(s) => push_nested(out, "cond", s),
        Term::Sharp(s) => push_nested(out, "sharp", s),
        Term::Push(s) => push_nested(out, "push", s),
        Term::ICopy(s, k) => {
            out.push_str("icopy(");
            print_at(s, 0, out);
            out.push_str(&format!(", {k})"));
        }
        Term::Seq(a, b) => {
            print_at(a, 0, out);
            out.push_str(" ; ");
            print_at(b, 1, out);
        }
        Term::Ten(a, b) => {
            print_at(a, 1, out);
            out.push_str(" * ");
            print_at(b, 2, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

fn push_call(out: &mut String, op: &str, args: &[&str]) {
    out.push_str(op);
    out.push('(');
    out.push_str(&args.join(", "));
    out.push(')');
}

fn push_nested(out: &mut String, op: &str, inner: &Term) {
    out.push_str(op);
    out.push('(');
    print_at(inner, 0, out);
    out.push(')');
}

pub fn print(t: &Term) -> String {
    let mut out = String::new();
    print_at(t, 0, &mut out);
    out
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print(self))
    }
}

/// Recover X and Y with target = X ⊗ Y, for conditioning on the first
/// tensor factor.
fn split_target(u: &ParMap) -> Result<(FinObject, FinObject)> {
    let mut xs: Vec<Label> = Vec::new();
    let mut ys: Vec<Label> = Vec::new();
    for l in u.target().labels() {
        match l {
            Label::Tuple(parts) if parts.len() >= 2 => {
                let x = parts[0].clone();
                let y = Label::tuple(parts[1..].to_vec());
                if !xs.contains(&x) {
                    xs.push(x);
                }
                if !ys.contains(&y) {
                    ys.push(y);
                }
            }
            other => {
                return Err(Error::Shape(format!(
                    "cond needs a tensor target, but it contains `{other}`"
                )))
            }
        }
    }
    let x = FinObject::new(xs)?;
    let y = FinObject::new(ys)?;
    if &x.tensor(&y) != u.target() {
        return Err(Error::Shape(
            "cond target is not a full tensor of its factors".into(),
        ));
    }
    Ok((x, y))
}

pub fn eval(t: &Term, env: &Env, tag: Semiring) -> Result<ParMap> {
    match t {
        Term::Name(n) => env.as_parmap(n),
        Term::Id(o) => Ok(ParMap::identity(env.object(o)?, tag)),
        Term::Copy(o) => Ok(ParMap::copy(env.object(o)?, tag)),
        Term::Discard(o) => Ok(ParMap::discard(env.object(o)?, tag)),
        Term::Swap(a, b) => Ok(ParMap::swap(env.object(a)?, env.object(b)?, tag)),
        Term::Delta(o) => Ok(ParMap::lift(&DistObject::new(env.object(o)?, tag)?.delta())),
        Term::Samp(o) => Ok(ParMap::lift(&DistObject::new(env.object(o)?, tag)?.samp())),
        Term::Dom(s) => Ok(ParMap::par_dom(&eval(s, env, tag)?)),
        Term::Cond(s) => {
            let u = eval(s, env, tag)?;
            let (x, y) = split_target(&u)?;
            par_conditional(&u, &x, &y)
        }
        Term::Sharp(s) => sharp(&eval(s, env, tag)?),
        Term::Push(s) => pushforward(&eval(s, env, tag)?),
        Term::ICopy(s, k) => infinite_copy(&eval(s, env, tag)?, *k),
        // diagram order: the left term runs first
        Term::Seq(a, b) => ParMap::par_compose(&eval(b, env, tag)?, &eval(a, env, tag)?),
        Term::Ten(a, b) => ParMap::par_tensor(&eval(a, env, tag)?, &eval(b, env, tag)?),
    }
}

/// A random abstract term for round-trip testing; names and objects come
/// from fixed pools so the same generator drives parser and printer tests.
pub fn arbitrary_term(rng: &mut impl Rng, depth: usize) -> Term {
    let names = ["f", "g", "h", "p"];
    let objs = ["X", "Y", "Z"];
    let pick = |rng: &mut dyn rand::RngCore, pool: &[&str]| -> String {
        pool[rng.gen_range(0..pool.len())].to_string()
    };
    if depth == 0 {
        return match rng.gen_range(0..7) {
            0 => Term::Name(pick(rng, &names)),
            1 => Term::Id(pick(rng, &objs)),
            2 => Term::Copy(pick(rng, &objs)),
            3 => Term::Discard(pick(rng, &objs)),
            4 => Term::Delta(pick(rng, &objs)),
            5 => Term::Samp(pick(rng, &objs)),
            _ => Term::Swap(pick(rng, &objs), pick(rng, &objs)),
        };
    }
    match rng.gen_range(0..8) {
        0 => Term::Seq(
            Box::new(arbitrary_term(rng, depth - 1)),
            Box::new(arbitrary_term(rng, depth - 1)),
        ),
        1 => Term::Ten(
            Box::new(arbitrary_term(rng, depth - 1)),
            Box::new(arbitrary_term(rng, depth - 1)),
        ),
        2 => Term::Dom(Box::new(arbitrary_term(rng, depth - 1))),
        3 => Term::Cond(Box::new(arbitrary_term(rng, depth - 1))),
        4 => Term::Sharp(Box::new(arbitrary_term(rng, depth - 1))),
        5 => Term::Push(Box::new(arbitrary_term(rng, depth - 1))),
        6 => Term::ICopy(
            Box::new(arbitrary_term(rng, depth - 1)),
            rng.gen_range(0..4),
        ),
        _ => arbitrary_term(rng, 0),
    }
}

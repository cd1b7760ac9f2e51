//! Plain-text declaration files: objects, kernels, partial maps, algebras,
//! and cone blocks, all sharing one lexer with the term language.
//!
//! ```text
//! object X = {a, b}
//! kernel f : X -> Y over qnonneg { a -> { u: 1/2, v: 1/2 }  b -> { u: 1 } }
//! partial g : X -> Y on {a} over qnonneg { a -> { u: 1 } }
//! algebra m on A { {0} -> 0  {0,1} -> 1 }
//! cone c : W -> X, Y { {0,1} -> f  {0} -> g }
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::parmap::{ParMap, Subobject};
use crate::semiring::{Semiring, SemiringValue};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Sym(char),
    Arrow,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Arrow => write!(f, "`->`"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars
                .peek()
                .is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
            {
                s.push(bump(&mut chars));
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut chars));
            }
            out.push(Token {
                tok: Tok::Int(s),
                line: tl,
                col: tc,
            });
        } else if c == '-' {
            bump(&mut chars);
            if chars.peek() == Some(&'>') {
                bump(&mut chars);
                out.push(Token {
                    tok: Tok::Arrow,
                    line: tl,
                    col: tc,
                });
            } else {
                return Err(Error::Parse {
                    line: tl,
                    col: tc,
                    msg: "expected `->` after `-`".into(),
                });
            }
        } else if ":={}(),/;*".contains(c) {
            bump(&mut chars);
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
        } else {
            return Err(Error::Parse {
                line: tl,
                col: tc,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

/// Token cursor shared by the declaration and term parsers.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Cursor {
    pub fn new(text: &str) -> Result<Cursor> {
        let toks = lex(text)?;
        let (end_line, end_col) = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
        Ok(Cursor {
            toks,
            pos: 0,
            end_line,
            end_col,
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    #[allow(clippy::should_implement_trait)] // a cursor, not an iterator: peeking drives the grammar
    pub fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    pub fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Sym(got)) if *got == c => {
                self.next();
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{c}`, found {t}"))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    pub fn expect_arrow(&mut self) -> Result<()> {
        match self.peek() {
            Some(Tok::Arrow) => {
                self.next();
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `->`, found {t}"))),
            None => Err(self.err("expected `->`, found end of input")),
        }
    }

    pub fn expect_ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected a name, found {t}"))),
            None => Err(self.err("expected a name, found end of input")),
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.next();
                Ok(())
            }
            Some(t) => Err(self.err(format!("expected `{kw}`, found {t}"))),
            None => Err(self.err(format!("expected `{kw}`, found end of input"))),
        }
    }

    pub fn at_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Tok::Sym(got)) if *got == c)
    }

    fn word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            Some(Tok::Int(s)) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            Some(t) => Err(self.err(format!("expected a label, found {t}"))),
            None => Err(self.err("expected a label, found end of input")),
        }
    }

    /// label := WORD | "(" label ("," label)* ")" | "{" WORD ("," WORD)* "}"
    ///
    /// Brace labels name distribution-object elements and are kept as a
    /// single atom in the engine's canonical `{a,b}` spelling.
    pub fn label(&mut self) -> Result<Label> {
        if self.at_sym('(') {
            self.next();
            let mut parts = vec![self.label()?];
            while self.at_sym(',') {
                self.next();
                parts.push(self.label()?);
            }
            self.expect_sym(')')?;
            Ok(Label::tuple(parts))
        } else if self.at_sym('{') {
            self.next();
            let mut names = vec![self.word()?];
            while self.at_sym(',') {
                self.next();
                names.push(self.word()?);
            }
            self.expect_sym('}')?;
            Ok(Label::atom(format!("{{{}}}", names.join(","))))
        } else {
            Ok(Label::atom(self.word()?))
        }
    }

    /// scalar := INT [ "/" INT ], read through the per-instance parser
    pub fn scalar(&mut self, tag: Semiring) -> Result<SemiringValue> {
        let (line, col) = self.here();
        let mut s = match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.next();
                n
            }
            Some(t) => return Err(self.err(format!("expected a scalar, found {t}"))),
            None => return Err(self.err("expected a scalar, found end of input")),
        };
        if self.at_sym('/') {
            self.next();
            s.push('/');
            s.push_str(&match self.peek() {
                Some(Tok::Int(n)) => {
                    let n = n.clone();
                    self.next();
                    n
                }
                _ => return Err(self.err("expected a denominator")),
            });
        }
        SemiringValue::parse(tag, &s).map_err(|e| Error::Parse {
            line,
            col,
            msg: e.to_string(),
        })
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Text-level algebra declaration: keys into the distribution carrier of
/// the named object, values in the object itself; the listed keys form
/// the algebra's domain.
#[derive(Clone, Debug)]
pub struct AlgebraDecl {
    pub name: String,
    pub carrier: String,
    pub entries: Vec<(Label, Label)>,
}

/// Text-level cone declaration: legs are names of declared kernels or
/// partial maps, keyed by index subsets of the factor list.
#[derive(Clone, Debug)]
pub struct ConeDecl {
    pub name: String,
    pub apex: String,
    pub factors: Vec<String>,
    pub legs: Vec<(Vec<usize>, String)>,
}

/// Everything a declaration file can bind, name-scoped to the file.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub objects: BTreeMap<String, FinObject>,
    pub kernels: BTreeMap<String, Kernel>,
    pub partials: BTreeMap<String, ParMap>,
    pub algebras: BTreeMap<String, AlgebraDecl>,
    pub cones: BTreeMap<String, ConeDecl>,
}

impl Env {
    pub fn object(&self, name: &str) -> Result<&FinObject> {
        self.objects
            .get(name)
            .ok_or_else(|| Error::UnboundName(name.into()))
    }

    /// Look a name up as a partial map, lifting plain kernels.
    pub fn as_parmap(&self, name: &str) -> Result<ParMap> {
        if let Some(p) = self.partials.get(name) {
            Ok(p.clone())
        } else if let Some(k) = self.kernels.get(name) {
            Ok(ParMap::lift(k))
        } else {
            Err(Error::UnboundName(name.into()))
        }
    }
}

pub fn parse_env(text: &str, tag: Semiring) -> Result<Env> {
    let mut cur = Cursor::new(text)?;
    let mut env = Env::default();
    while !cur.at_end() {
        let kw = cur.expect_ident()?;
        match kw.as_str() {
            "object" => {
                let name = cur.expect_ident()?;
                cur.expect_sym('=')?;
                cur.expect_sym('{')?;
                let mut labels = vec![cur.label()?];
                while cur.at_sym(',') {
                    cur.next();
                    labels.push(cur.label()?);
                }
                cur.expect_sym('}')?;
                env.objects.insert(name, FinObject::new(labels)?);
            }
            "kernel" => {
                let name = cur.expect_ident()?;
                cur.expect_sym(':')?;
                let src = env.object(&cur.expect_ident()?)?.clone();
                cur.expect_arrow()?;
                let tgt = env.object(&cur.expect_ident()?)?.clone();
                let decl_tag = parse_over(&mut cur)?;
                check_tag(decl_tag, tag)?;
                let cols = parse_columns(&mut cur, tag)?;
                env.kernels.insert(name, Kernel::new(src, tgt, tag, cols)?);
            }
            "partial" => {
                let name = cur.expect_ident()?;
                cur.expect_sym(':')?;
                let src = env.object(&cur.expect_ident()?)?.clone();
                cur.expect_arrow()?;
                let tgt = env.object(&cur.expect_ident()?)?.clone();
                cur.expect_keyword("on")?;
                cur.expect_sym('{')?;
                let mut elems = Vec::new();
                if !cur.at_sym('}') {
                    elems.push(cur.label()?);
                    while cur.at_sym(',') {
                        cur.next();
                        elems.push(cur.label()?);
                    }
                }
                cur.expect_sym('}')?;
                let decl_tag = parse_over(&mut cur)?;
                check_tag(decl_tag, tag)?;
                let dom = Subobject::new(src.clone(), elems)?;
                let cols = parse_columns(&mut cur, tag)?;
                let ker = Kernel::new(dom.as_object(), tgt.clone(), tag, cols)?;
                env.partials.insert(name, ParMap::new(src, tgt, dom, ker)?);
            }
            "algebra" => {
                let name = cur.expect_ident()?;
                cur.expect_keyword("on")?;
                let carrier = cur.expect_ident()?;
                env.object(&carrier)?;
                cur.expect_sym('{')?;
                let mut entries = Vec::new();
                while !cur.at_sym('}') {
                    let key = cur.label()?;
                    cur.expect_arrow()?;
                    entries.push((key, cur.label()?));
                }
                cur.expect_sym('}')?;
                env.algebras.insert(
                    name.clone(),
                    AlgebraDecl {
                        name,
                        carrier,
                        entries,
                    },
                );
            }
            "cone" => {
                let name = cur.expect_ident()?;
                cur.expect_sym(':')?;
                let apex = cur.expect_ident()?;
                env.object(&apex)?;
                cur.expect_arrow()?;
                let mut factors = vec![cur.expect_ident()?];
                while cur.at_sym(',') {
                    cur.next();
                    factors.push(cur.expect_ident()?);
                }
                for f in &factors {
                    env.object(f)?;
                }
                cur.expect_sym('{')?;
                let mut legs = Vec::new();
                while !cur.at_sym('}') {
                    cur.expect_sym('{')?;
                    let mut idx = Vec::new();
                    if !cur.at_sym('}') {
                        idx.push(parse_index(&mut cur, factors.len())?);
                        while cur.at_sym(',') {
                            cur.next();
                            idx.push(parse_index(&mut cur, factors.len())?);
                        }
                    }
                    cur.expect_sym('}')?;
                    cur.expect_arrow()?;
                    legs.push((idx, cur.expect_ident()?));
                }
                cur.expect_sym('}')?;
                env.cones.insert(
                    name.clone(),
                    ConeDecl {
                        name,
                        apex,
                        factors,
                        legs,
                    },
                );
            }
            other => {
                return Err(Error::Parse {
                    line: cur.here().0,
                    col: cur.here().1,
                    msg: format!("unknown declaration `{other}`"),
                })
            }
        }
    }
    Ok(env)
}

fn parse_over(cur: &mut Cursor) -> Result<Semiring> {
    cur.expect_keyword("over")?;
    let (line, col) = cur.here();
    let name = cur.expect_ident()?;
    Semiring::parse(&name).map_err(|e| Error::Parse {
        line,
        col,
        msg: e.to_string(),
    })
}

fn check_tag(declared: Semiring, requested: Semiring) -> Result<()> {
    if declared != requested {
        return Err(Error::InstanceMismatch(requested, declared));
    }
    Ok(())
}

fn parse_columns(cur: &mut Cursor, tag: Semiring) -> Result<BTreeMap<Label, Column>> {
    cur.expect_sym('{')?;
    let mut cols = BTreeMap::new();
    while !cur.at_sym('}') {
        let x = cur.label()?;
        cur.expect_arrow()?;
        cur.expect_sym('{')?;
        let mut col = Column::new();
        if !cur.at_sym('}') {
            loop {
                let y = cur.label()?;
                cur.expect_sym(':')?;
                let w = cur.scalar(tag)?;
                if !w.is_zero() {
                    col.insert(y, w);
                }
                if cur.at_sym(',') {
                    cur.next();
                } else {
                    break;
                }
            }
        }
        cur.expect_sym('}')?;
        cols.insert(x, col);
    }
    cur.expect_sym('}')?;
    Ok(cols)
}

fn parse_index(cur: &mut Cursor, arity: usize) -> Result<usize> {
    let (line, col) = cur.here();
    match cur.next().map(|t| t.tok) {
        Some(Tok::Int(s)) => {
            let i: usize = s.parse().map_err(|_| Error::Parse {
                line,
                col,
                msg: format!("bad index `{s}`"),
            })?;
            if i >= arity {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("index {i} out of range for {arity} factors"),
                });
            }
            Ok(i)
        }
        Some(t) => Err(Error::Parse {
            line,
            col,
            msg: format!("expected an index, found {t}"),
        }),
        None => Err(Error::Parse {
            line,
            col,
            msg: "expected an index".into(),
        }),
    }
}

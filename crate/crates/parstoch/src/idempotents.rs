//! Idempotent partial endo-maps: detection, on-domain decomposition,
//! splitting, and the static/strong/balanced classification.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::parmap::ParMap;
use crate::semiring::{Semiring, SemiringValue};

/// A verified splitting of an idempotent `u : X → X` through `through`:
/// `retraction ∘ section = id` and `section ∘ retraction = u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    pub through: FinObject,
    /// total map `through → X`
    pub section: ParMap,
    /// partial map `X → through`, defined on `dom(u)`
    pub retraction: ParMap,
}

pub fn is_idempotent(u: &ParMap) -> Result<bool> {
    if u.source() != u.target() {
        return Err(Error::Shape("idempotence needs an endo-map".into()));
    }
    Ok(ParMap::par_compose(u, u)? == *u)
}

/// Extract the base-category idempotent `e : D → D` with `u = (D, i, i∘e)`.
///
/// For a genuine idempotent every column's support stays inside the domain;
/// if it escaped, that would be an internal inconsistency, not a user error.
pub fn on_domain_idempotent(u: &ParMap) -> Result<Kernel> {
    if !is_idempotent(u)? {
        return Err(Error::NotIdempotent(u.to_string()));
    }
    let d = u.dom().as_object();
    let mut cols = BTreeMap::new();
    for x in u.dom().elements() {
        let col = u.ker().col(x);
        for y in col.keys() {
            if !u.dom().contains(y) {
                return Err(Error::Internal(format!(
                    "idempotent support escapes its domain at ({y}|{x})"
                )));
            }
        }
        cols.insert(x.clone(), col.clone());
    }
    let e = Kernel::new(d.clone(), d, u.tag(), cols)?;
    if Kernel::compose(&e, &e)? != e {
        return Err(Error::Internal("extracted kernel is not idempotent".into()));
    }
    // reconstruction: i∘e is the original kernel
    let incl = u.dom().inclusion(u.tag());
    if Kernel::compose(&incl, &e)? != *u.ker() {
        return Err(Error::Internal("reconstruction i∘e failed".into()));
    }
    Ok(e)
}

/// Split an idempotent partial map.
///
/// The base idempotent `e` on the domain `D` is split per instance —
/// a constructive recipe for the rationals, bounded exhaustive search for
/// Booleans and naturals — and the result is verified exactly before being
/// assembled into the span-level section/retraction pair.
pub fn split_idempotent(u: &ParMap) -> Result<Splitting> {
    let e = on_domain_idempotent(u)?;
    let d = e.source().clone();
    let (through, s0, r0) = match u.tag() {
        Semiring::QNonNeg => split_rational(&e)?,
        Semiring::Bool | Semiring::Nat => split_exhaustive(&e, u.tag())?,
        other => {
            return Err(Error::Unsupported {
                instance: other,
                what: "splitting".into(),
            })
        }
    };
    // verify in the base category
    if Kernel::compose(&r0, &s0)? != Kernel::identity(&through, u.tag()) {
        return Err(Error::SplitFailed("r∘s is not the identity".into()));
    }
    if Kernel::compose(&s0, &r0)? != e {
        return Err(Error::SplitFailed("s∘r does not reconstruct e".into()));
    }
    // assemble the span-level pair
    let incl = u.dom().inclusion(u.tag());
    let section = ParMap::lift(&Kernel::compose(&incl, &s0)?);
    let retraction = ParMap::new(
        u.source().clone(),
        through.clone(),
        u.dom().clone(),
        r0.clone(),
    )?;
    // verify in the partialization
    if ParMap::par_compose(&retraction, &section)? != ParMap::identity(&through, u.tag()) {
        return Err(Error::SplitFailed("span-level r∘s failed".into()));
    }
    if ParMap::par_compose(&section, &retraction)? != *u {
        return Err(Error::SplitFailed("span-level s∘r failed".into()));
    }
    debug_assert_eq!(d, u.dom().as_object());
    Ok(Splitting {
        through,
        section,
        retraction,
    })
}

/// Constructive rational splitting: the recurrent states (those with
/// `e(x|x) ≠ 0`) carry the stationary rows; one split element per
/// support-class of rows, with the retraction weighting each class by the
/// mass the row places on that class's support.
fn split_rational(e: &Kernel) -> Result<(FinObject, Kernel, Kernel)> {
    let d = e.source();
    let mut class_reps: Vec<Label> = Vec::new();
    let mut class_rows: Vec<Column> = Vec::new();
    let mut class_supports: Vec<Vec<Label>> = Vec::new();
    for x in d.labels() {
        if e.weight(x, x).is_zero() {
            continue;
        }
        let row = e.col(x).clone();
        let support: Vec<Label> = row.keys().cloned().collect();
        match class_supports.iter().position(|s| *s == support) {
            Some(k) => {
                if class_rows[k] != row {
                    return Err(Error::SplitFailed(format!(
                        "rows at `{}` and `{x}` share a support but differ",
                        class_reps[k]
                    )));
                }
            }
            None => {
                class_reps.push(x.clone());
                class_rows.push(row);
                class_supports.push(support);
            }
        }
    }
    let through = FinObject::new(class_reps.clone())?;
    let s_cols: BTreeMap<Label, Column> = class_reps
        .iter()
        .zip(&class_rows)
        .map(|(rep, row)| (rep.clone(), row.clone()))
        .collect();
    let s0 = Kernel::new(through.clone(), d.clone(), e.tag(), s_cols)?;
    let mut r_cols = BTreeMap::new();
    for x in d.labels() {
        let mut col = Column::new();
        for (k, rep) in class_reps.iter().enumerate() {
            let mut mass = SemiringValue::zero(e.tag());
            for y in &class_supports[k] {
                mass = mass.add(&e.weight(y, x))?;
            }
            if !mass.is_zero() {
                col.insert(rep.clone(), mass);
            }
        }
        r_cols.insert(x.clone(), col);
    }
    let r0 = Kernel::new(d.clone(), through.clone(), e.tag(), r_cols)?;
    Ok((through, s0, r0))
}

/// Bounded exhaustive splitting for the finite instances: try split objects
/// of every size up to `|D|`, enumerating candidate sections and
/// retractions (pre-filtered by `e∘s = s` and `r∘e = r`, which any genuine
/// splitting satisfies).
fn split_exhaustive(e: &Kernel, tag: Semiring) -> Result<(FinObject, Kernel, Kernel)> {
    let d = e.source().clone();
    if d.is_empty() {
        let empty = FinObject::new(Vec::new())?;
        let k = Kernel::new(empty.clone(), empty.clone(), tag, BTreeMap::new())?;
        return Ok((empty, k.clone(), k));
    }
    for m in 1..=d.size() {
        let through = FinObject::new((0..m).map(|i| Label::atom(format!("e{i}"))).collect())?;
        let sections: Vec<Kernel> = all_kernels(&through, &d, tag)
            .into_iter()
            .filter(|s| Kernel::compose(e, s).map(|es| es == *s).unwrap_or(false))
            .collect();
        if sections.is_empty() {
            continue;
        }
        let retractions: Vec<Kernel> = all_kernels(&d, &through, tag)
            .into_iter()
            .filter(|r| Kernel::compose(r, e).map(|re| re == *r).unwrap_or(false))
            .collect();
        let id = Kernel::identity(&through, tag);
        for s in &sections {
            for r in &retractions {
                if Kernel::compose(r, s)? == id && Kernel::compose(s, r)? == *e {
                    return Ok((through, s.clone(), r.clone()));
                }
            }
        }
    }
    Err(Error::SplitFailed(
        "exhaustive search found no splitting".into(),
    ))
}

/// All total kernels `src → tgt` for a finite instance (Boolean: nonempty
/// image sets per column; naturals: point masses per column).
pub fn all_kernels(src: &FinObject, tgt: &FinObject, tag: Semiring) -> Vec<Kernel> {
    let columns: Vec<Column> = all_columns(tgt, tag);
    let mut out = vec![BTreeMap::new()];
    for x in src.labels() {
        let mut next = Vec::with_capacity(out.len() * columns.len());
        for partial in &out {
            for col in &columns {
                let mut p: BTreeMap<Label, Column> = partial.clone();
                p.insert(x.clone(), col.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|cols| Kernel::new(src.clone(), tgt.clone(), tag, cols).expect("enumerated kernel"))
        .collect()
}

/// All normalized columns over a finite-instance target.
pub fn all_columns(tgt: &FinObject, tag: Semiring) -> Vec<Column> {
    let one = SemiringValue::one(tag);
    match tag {
        Semiring::Nat => tgt
            .labels()
            .iter()
            .map(|y| [(y.clone(), one.clone())].into_iter().collect())
            .collect(),
        Semiring::Bool => {
            let n = tgt.size();
            (1u64..(1 << n))
                .map(|mask| {
                    tgt.labels()
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, y)| (y.clone(), one.clone()))
                        .collect()
                })
                .collect()
        }
        _ => panic!("column enumeration only exists for finite instances"),
    }
}

/// The three equational refinements of idempotence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdempotentFlags {
    pub balanced: bool,
    pub static_: bool,
    pub strong: bool,
}

/// Classify an idempotent inside the partialization by evaluating both sides
/// of each defining equation.  All three share the left-hand side
/// `(u⊗id)∘cop∘u`; the right-hand sides are `(id⊗u)∘cop∘u` (balanced),
/// `cop∘u` (static), and `(u⊗u)∘cop∘u` (strong).
pub fn classify_idempotent(u: &ParMap) -> Result<IdempotentFlags> {
    if !is_idempotent(u)? {
        return Err(Error::NotIdempotent(u.to_string()));
    }
    let tag = u.tag();
    let x = u.source();
    let id = ParMap::identity(x, tag);
    let cop_u = ParMap::par_compose(&ParMap::copy(x, tag), u)?;
    let lhs = ParMap::par_compose(&ParMap::par_tensor(u, &id)?, &cop_u)?;
    let balanced_rhs = ParMap::par_compose(&ParMap::par_tensor(&id, u)?, &cop_u)?;
    let strong_rhs = ParMap::par_compose(&ParMap::par_tensor(u, u)?, &cop_u)?;
    Ok(IdempotentFlags {
        balanced: lhs == balanced_rhs,
        static_: lhs == cop_u,
        strong: lhs == strong_rhs,
    })
}

/// The same classification computed on a base-category idempotent kernel.
pub fn classify_base(e: &Kernel) -> Result<IdempotentFlags> {
    if e.source() != e.target() {
        return Err(Error::Shape("classification needs an endo-kernel".into()));
    }
    if Kernel::compose(e, e)? != *e {
        return Err(Error::NotIdempotent(e.to_string()));
    }
    let tag = e.tag();
    let x = e.source();
    let id = Kernel::identity(x, tag);
    let cop_e = Kernel::compose(&Kernel::copy(x, tag), e)?;
    let lhs = Kernel::compose(&Kernel::tensor(e, &id)?, &cop_e)?;
    let balanced_rhs = Kernel::compose(&Kernel::tensor(&id, e)?, &cop_e)?;
    let strong_rhs = Kernel::compose(&Kernel::tensor(e, e)?, &cop_e)?;
    Ok(IdempotentFlags {
        balanced: lhs == balanced_rhs,
        static_: lhs == cop_e,
        strong: lhs == strong_rhs,
    })
}

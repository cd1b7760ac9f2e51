//! Conditionals of joint maps, for the rational and Boolean instances.
//!
//! Given `f : A → X⊗Y`, a conditional is a map `X⊗A → Y` reproducing `f`
//! when recombined with the X-marginal.  Off the marginal's support the
//! conditional is arbitrary; a fixed fallback policy (point mass at the
//! first target element) makes the construction deterministic.  The naturals
//! have no conditionals in general, so that instance reports unsupported
//! instead of guessing.

use crate::error::{Error, Result};
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::parmap::{ParMap, Subobject};
use crate::semiring::{Semiring, SemiringValue};

fn check_instance(tag: Semiring) -> Result<()> {
    match tag {
        Semiring::QNonNeg | Semiring::Bool => Ok(()),
        other => Err(Error::Unsupported {
            instance: other,
            what: "conditionals".into(),
        }),
    }
}

/// Conditional of a total kernel `f : A → X⊗Y`, as a kernel `X⊗A → Y`.
///
/// Rational instance: `f(y | x,a) = f(x,y|a) / Σ_y' f(x,y'|a)` where the
/// denominator is nonzero.  Boolean instance: the fiber `{y : (x,y) ∈ f(a)}`
/// where nonempty.  Fallback elsewhere: point mass at the first `Y` label.
pub fn base_conditional(f: &Kernel, x_obj: &FinObject, y_obj: &FinObject) -> Result<Kernel> {
    check_instance(f.tag())?;
    if &x_obj.tensor(y_obj) != f.target() {
        return Err(Error::Shape(
            "target is not the declared binary tensor".into(),
        ));
    }
    let fallback_y = y_obj
        .labels()
        .first()
        .ok_or_else(|| Error::Shape("empty Y factor has no fallback".into()))?;
    let one = SemiringValue::one(f.tag());
    let source = x_obj.tensor(f.source());
    let mut cols = std::collections::BTreeMap::new();
    for x in x_obj.labels() {
        for a in f.source().labels() {
            let joint = f.col(a);
            // the slice of the joint column over this x
            let slice: Vec<(&Label, &SemiringValue)> = y_obj
                .labels()
                .iter()
                .filter_map(|y| joint.get(&Label::pair(x, y)).map(|w| (y, w)))
                .collect();
            let col: Column = if slice.is_empty() {
                [(fallback_y.clone(), one.clone())].into_iter().collect()
            } else {
                match f.tag() {
                    Semiring::QNonNeg => {
                        let mut denom = SemiringValue::zero(f.tag());
                        for (_, w) in &slice {
                            denom = denom.add(w)?;
                        }
                        slice
                            .iter()
                            .map(|(y, w)| Ok(((*y).clone(), w.div(&denom)?)))
                            .collect::<Result<_>>()?
                    }
                    // Boolean: the fiber set itself
                    _ => slice
                        .iter()
                        .map(|(y, _)| ((*y).clone(), one.clone()))
                        .collect(),
                }
            };
            cols.insert(Label::pair(x, a), col);
        }
    }
    Kernel::new(source, y_obj.clone(), f.tag(), cols)
}

/// Conditional of a partial map `u : A → X⊗Y`: the span with domain
/// `X ⊗ dom(u)` and the base conditional of its kernel.
pub fn par_conditional(u: &ParMap, x_obj: &FinObject, y_obj: &FinObject) -> Result<ParMap> {
    check_instance(u.tag())?;
    let dom = Subobject::full(x_obj).tensor(u.dom());
    let ker = base_conditional(u.ker(), x_obj, y_obj)?;
    ParMap::new(x_obj.tensor(u.source()), y_obj.clone(), dom, ker)
}

/// Check the defining equation of a conditional, inside the partialization:
/// `u = (id_X ⊗ c) ∘ (cop_X ⊗ id_A) ∘ ((marg_X ∘ u) ⊗ id_A) ∘ cop_A`.
pub fn verify_conditional(
    u: &ParMap,
    c: &ParMap,
    x_obj: &FinObject,
    y_obj: &FinObject,
) -> Result<bool> {
    let tag = u.tag();
    if &x_obj.tensor(y_obj) != u.target() {
        return Err(Error::Shape("joint target mismatch".into()));
    }
    if c.source() != &x_obj.tensor(u.source()) || c.target() != y_obj {
        return Err(Error::Shape("conditional shape mismatch".into()));
    }
    let a_obj = u.source();
    let id_a = ParMap::identity(a_obj, tag);
    let id_x = ParMap::identity(x_obj, tag);
    let proj_x = ParMap::lift(&Kernel::projection(&[x_obj, y_obj], &[0], tag)?);
    let marg = ParMap::par_compose(&proj_x, u)?;
    let mut rhs = ParMap::copy(a_obj, tag);
    rhs = ParMap::par_compose(&ParMap::par_tensor(&marg, &id_a)?, &rhs)?;
    rhs = ParMap::par_compose(&ParMap::par_tensor(&ParMap::copy(x_obj, tag), &id_a)?, &rhs)?;
    rhs = ParMap::par_compose(&ParMap::par_tensor(&id_x, c)?, &rhs)?;
    Ok(rhs == *u)
}

//! Partial maps: a domain subobject plus a total kernel out of it.
//!
//! A partial map is stored in canonical form — the domain is a sorted subset
//! of the source carrier — so span equivalence is handled by representation
//! and equality of `ParMap`s is plain structural equality.  Composition uses
//! the discrete pullback formula: the composite is defined exactly at the
//! points whose whole output support lands inside the second map's domain.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::semiring::{Semiring, SemiringValue};

/// A deterministic subobject of a finite carrier: a subset of its elements,
/// kept in ambient order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subobject {
    ambient: FinObject,
    elements: Vec<Label>,
}

impl Subobject {
    pub fn new(ambient: FinObject, elements: Vec<Label>) -> Result<Subobject> {
        for e in &elements {
            if !ambient.contains(e) {
                return Err(Error::ObjectMismatch(format!(
                    "`{e}` is not an ambient element"
                )));
            }
        }
        // canonicalize: ambient order, duplicates collapsed
        let elements = ambient
            .labels()
            .iter()
            .filter(|l| elements.contains(l))
            .cloned()
            .collect();
        Ok(Subobject { ambient, elements })
    }

    pub fn full(ambient: &FinObject) -> Subobject {
        Subobject {
            elements: ambient.labels().to_vec(),
            ambient: ambient.clone(),
        }
    }

    pub fn empty(ambient: &FinObject) -> Subobject {
        Subobject {
            ambient: ambient.clone(),
            elements: Vec::new(),
        }
    }

    pub fn from_pred(ambient: &FinObject, pred: impl Fn(&Label) -> bool) -> Subobject {
        Subobject {
            ambient: ambient.clone(),
            elements: ambient
                .labels()
                .iter()
                .filter(|l| pred(l))
                .cloned()
                .collect(),
        }
    }

    pub fn ambient(&self) -> &FinObject {
        &self.ambient
    }

    pub fn elements(&self) -> &[Label] {
        &self.elements
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.elements.len() == self.ambient.size()
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.elements.contains(l)
    }

    /// The domain viewed as a carrier in its own right.
    pub fn as_object(&self) -> FinObject {
        FinObject::new(self.elements.clone()).expect("subobject elements are distinct")
    }

    /// The inclusion kernel into the ambient carrier (deterministic, monic).
    pub fn inclusion(&self, tag: Semiring) -> Kernel {
        Kernel::deterministic(self.as_object(), self.ambient.clone(), tag, Label::clone)
            .expect("inclusion kernel")
    }

    pub fn is_subset_of(&self, other: &Subobject) -> Result<bool> {
        if self.ambient != other.ambient {
            return Err(Error::ObjectMismatch(
                "subobjects of different carriers".into(),
            ));
        }
        Ok(self.elements.iter().all(|e| other.contains(e)))
    }

    pub fn meet(&self, other: &Subobject) -> Result<Subobject> {
        if self.ambient != other.ambient {
            return Err(Error::ObjectMismatch(
                "subobjects of different carriers".into(),
            ));
        }
        Ok(Subobject::from_pred(&self.ambient, |l| {
            self.contains(l) && other.contains(l)
        }))
    }

    /// Least upper bound (union) with another subobject.
    pub fn join(&self, other: &Subobject) -> Result<Subobject> {
        if self.ambient != other.ambient {
            return Err(Error::ObjectMismatch(
                "subobjects of different carriers".into(),
            ));
        }
        Ok(Subobject::from_pred(&self.ambient, |l| {
            self.contains(l) || other.contains(l)
        }))
    }

    /// Componentwise tensor, as a subobject of the ambient tensor.
    pub fn tensor(&self, other: &Subobject) -> Subobject {
        let ambient = self.ambient.tensor(&other.ambient);
        let mut elements = Vec::with_capacity(self.size() * other.size());
        for a in &self.elements {
            for b in &other.elements {
                elements.push(Label::pair(a, b));
            }
        }
        Subobject::new(ambient, elements).expect("tensor of subobjects")
    }
}

impl fmt::Display for Subobject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Pullback of a deterministic subobject `t` of the target along a total
/// kernel: the set of source points whose output support lies inside `t`.
pub fn pullback_det_mono(f: &Kernel, t: &Subobject) -> Result<Subobject> {
    if t.ambient() != f.target() {
        return Err(Error::ObjectMismatch(
            "subobject ambient differs from the kernel target".into(),
        ));
    }
    Ok(Subobject::from_pred(f.source(), |x| {
        f.col(x).keys().all(|y| t.contains(y))
    }))
}

/// A partial map in canonical span form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParMap {
    source: FinObject,
    target: FinObject,
    tag: Semiring,
    dom: Subobject,
    ker: Kernel,
}

impl ParMap {
    pub fn new(
        source: FinObject,
        target: FinObject,
        dom: Subobject,
        ker: Kernel,
    ) -> Result<ParMap> {
        if dom.ambient() != &source {
            return Err(Error::ObjectMismatch(
                "domain ambient is not the source".into(),
            ));
        }
        if ker.source() != &dom.as_object() {
            return Err(Error::ObjectMismatch(
                "kernel source is not the domain".into(),
            ));
        }
        if ker.target() != &target {
            return Err(Error::ObjectMismatch(
                "kernel target is not the target".into(),
            ));
        }
        Ok(ParMap {
            source,
            target,
            tag: ker.tag(),
            dom,
            ker,
        })
    }

    /// Canonical inclusion of total kernels.
    pub fn lift(f: &Kernel) -> ParMap {
        ParMap {
            source: f.source().clone(),
            target: f.target().clone(),
            tag: f.tag(),
            dom: Subobject::full(f.source()),
            ker: f.clone(),
        }
    }

    /// The nowhere-defined map, bottom of its hom-poset.
    pub fn empty(source: &FinObject, target: &FinObject, tag: Semiring) -> ParMap {
        let dom = Subobject::empty(source);
        let ker = Kernel::new(dom.as_object(), target.clone(), tag, BTreeMap::new())
            .expect("empty kernel");
        ParMap {
            source: source.clone(),
            target: target.clone(),
            tag,
            dom,
            ker,
        }
    }

    pub fn identity(x: &FinObject, tag: Semiring) -> ParMap {
        ParMap::lift(&Kernel::identity(x, tag))
    }

    pub fn copy(x: &FinObject, tag: Semiring) -> ParMap {
        ParMap::lift(&Kernel::copy(x, tag))
    }

    pub fn discard(x: &FinObject, tag: Semiring) -> ParMap {
        ParMap::lift(&Kernel::discard(x, tag))
    }

    pub fn swap(x: &FinObject, y: &FinObject, tag: Semiring) -> ParMap {
        ParMap::lift(&Kernel::swap(x, y, tag))
    }

    pub fn source(&self) -> &FinObject {
        &self.source
    }

    pub fn target(&self) -> &FinObject {
        &self.target
    }

    pub fn tag(&self) -> Semiring {
        self.tag
    }

    pub fn dom(&self) -> &Subobject {
        &self.dom
    }

    pub fn ker(&self) -> &Kernel {
        &self.ker
    }

    pub fn is_parallel_to(&self, other: &ParMap) -> bool {
        self.source == other.source && self.target == other.target && self.tag == other.tag
    }

    /// Span composition by pullback: defined where the first map's support
    /// lands inside the second map's domain, then Chapman–Kolmogorov.
    pub fn par_compose(v: &ParMap, u: &ParMap) -> Result<ParMap> {
        if u.tag != v.tag {
            return Err(Error::InstanceMismatch(u.tag, v.tag));
        }
        if u.target != v.source {
            return Err(Error::ObjectMismatch(
                "middle objects of a composite differ".into(),
            ));
        }
        // pullback of v.dom along u.ker, viewed inside the source
        let e = Subobject::from_pred(&u.source, |x| {
            u.dom.contains(x) && u.ker.col(x).keys().all(|y| v.dom.contains(y))
        });
        let mut cols = BTreeMap::new();
        for x in e.elements() {
            let mut col = Column::new();
            for (y, wu) in u.ker.col(x) {
                for (z, wv) in v.ker.col(y) {
                    let term = wv.mul(wu)?;
                    let entry = col
                        .entry(z.clone())
                        .or_insert_with(|| SemiringValue::zero(u.tag));
                    *entry = entry.add(&term)?;
                }
            }
            col.retain(|_, w| !w.is_zero());
            cols.insert(x.clone(), col);
        }
        let ker = Kernel::new(e.as_object(), v.target.clone(), u.tag, cols)?;
        ParMap::new(u.source.clone(), v.target.clone(), e, ker)
    }

    /// Componentwise tensor of spans.
    pub fn par_tensor(u: &ParMap, v: &ParMap) -> Result<ParMap> {
        if u.tag != v.tag {
            return Err(Error::InstanceMismatch(u.tag, v.tag));
        }
        let dom = u.dom.tensor(&v.dom);
        let ker = Kernel::tensor(&u.ker, &v.ker)?;
        ParMap::new(
            u.source.tensor(&v.source),
            u.target.tensor(&v.target),
            dom,
            ker,
        )
    }

    /// The restriction idempotent `(D, i, i)`: the domain as an endo-map.
    pub fn par_dom(u: &ParMap) -> ParMap {
        let ker = u.dom.inclusion(u.tag);
        ParMap::new(u.source.clone(), u.source.clone(), u.dom.clone(), ker)
            .expect("domain idempotent")
    }

    /// The same domain idempotent computed purely from the copy-discard
    /// structure: `(id ⊗ (discard∘u)) ∘ cop`.
    pub fn cd_dom(u: &ParMap) -> Result<ParMap> {
        let id = ParMap::identity(&u.source, u.tag);
        let del_u = ParMap::par_compose(&ParMap::discard(&u.target, u.tag), u)?;
        ParMap::par_compose(
            &ParMap::par_tensor(&id, &del_u)?,
            &ParMap::copy(&u.source, u.tag),
        )
    }

    pub fn is_total(&self) -> bool {
        self.dom.is_full()
    }

    /// Equational totality: `discard ∘ u` equals the lifted discard.
    pub fn discard_equation_holds(&self) -> Result<bool> {
        let lhs = ParMap::par_compose(&ParMap::discard(&self.target, self.tag), self)?;
        Ok(lhs == ParMap::discard(&self.source, self.tag))
    }

    pub fn is_copyable(&self) -> bool {
        self.ker.is_deterministic()
    }

    /// Equational copyability: `cop ∘ u = (u⊗u) ∘ cop`.
    pub fn copy_equation_holds(&self) -> Result<bool> {
        let lhs = ParMap::par_compose(&ParMap::copy(&self.target, self.tag), self)?;
        let rhs = ParMap::par_compose(
            &ParMap::par_tensor(self, self)?,
            &ParMap::copy(&self.source, self.tag),
        )?;
        Ok(lhs == rhs)
    }

    pub fn is_deterministic(&self) -> bool {
        self.is_total() && self.is_copyable()
    }

    /// Restrict to a subobject of the source (intersecting with the domain).
    pub fn restrict(&self, s: &Subobject) -> Result<ParMap> {
        let dom = self.dom.meet(s)?;
        let cols = dom
            .elements()
            .iter()
            .map(|x| (x.clone(), self.ker.col(x).clone()))
            .collect();
        let ker = Kernel::new(dom.as_object(), self.target.clone(), self.tag, cols)?;
        ParMap::new(self.source.clone(), self.target.clone(), dom, ker)
    }

    /// Extension order by the defining equation: `u ⊒ v` iff `v = u∘dom(v)`.
    pub fn extends(u: &ParMap, v: &ParMap) -> Result<bool> {
        if !u.is_parallel_to(v) {
            return Err(Error::NotParallel("extends".into()));
        }
        Ok(*v == ParMap::par_compose(u, &ParMap::cd_dom(v)?)?)
    }

    /// Extension order read off the spans: `dom(v) ⊆ dom(u)` and `u`
    /// restricted to `dom(v)` equals `v`.
    pub fn span_geq(u: &ParMap, v: &ParMap) -> Result<bool> {
        if !u.is_parallel_to(v) {
            return Err(Error::NotParallel("span_geq".into()));
        }
        Ok(v.dom.is_subset_of(&u.dom)? && u.restrict(&v.dom)? == *v)
    }

    pub fn to_text(&self, name: &str) -> String {
        let mut out = format!(
            "partial {name} : {} -> {} on {} over {} {{",
            self.source, self.target, self.dom, self.tag
        );
        for x in self.dom.elements() {
            let col = self.ker.col(x);
            let entries: Vec<String> = self
                .target
                .labels()
                .iter()
                .filter_map(|y| col.get(y).map(|w| format!("{y}: {w}")))
                .collect();
            out.push_str(&format!(" {x} -> {{ {} }}", entries.join(", ")));
        }
        out.push_str(" }");
        out
    }
}

impl fmt::Display for ParMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text("_"))
    }
}

//! Distribution objects and the induced monad, for the instances where they
//! are finite: Booleans (distributions are nonempty subsets) and naturals
//! (normalized columns are point masses, so `PX ≅ X`).  The rational
//! instance has infinitely many distributions on any nontrivial carrier and
//! reports unsupported.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::parmap::{pullback_det_mono, ParMap, Subobject};
use crate::semiring::{Semiring, SemiringValue};

/// The distribution object `PX` of a finite carrier, with a decode table
/// from carrier labels back to subsets of the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistObject {
    base: FinObject,
    carrier: FinObject,
    tag: Semiring,
    /// carrier index → sorted base indices of the encoded distribution's support
    subsets: Vec<Vec<usize>>,
}

fn check_instance(tag: Semiring) -> Result<()> {
    match tag {
        Semiring::Bool | Semiring::Nat => Ok(()),
        other => Err(Error::Unsupported {
            instance: other,
            what: "distribution objects (infinitely many distributions)".into(),
        }),
    }
}

fn subset_label(base: &FinObject, indices: &[usize]) -> Label {
    let names: Vec<String> = indices
        .iter()
        .map(|&i| base.labels()[i].to_string())
        .collect();
    Label::atom(format!("{{{}}}", names.join(",")))
}

impl DistObject {
    pub fn new(base: &FinObject, tag: Semiring) -> Result<DistObject> {
        check_instance(tag)?;
        match tag {
            Semiring::Nat => Ok(DistObject {
                base: base.clone(),
                carrier: base.clone(),
                tag,
                subsets: (0..base.size()).map(|i| vec![i]).collect(),
            }),
            _ => {
                let n = base.size();
                if n > 20 {
                    return Err(Error::Shape(format!(
                        "carrier of size {n} is too large to materialize"
                    )));
                }
                let mut subsets = Vec::new();
                let mut labels = Vec::new();
                for mask in 1u64..(1 << n) {
                    let indices: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                    labels.push(subset_label(base, &indices));
                    subsets.push(indices);
                }
                Ok(DistObject {
                    base: base.clone(),
                    carrier: FinObject::new(labels)?,
                    tag,
                    subsets,
                })
            }
        }
    }

    pub fn base(&self) -> &FinObject {
        &self.base
    }

    pub fn carrier(&self) -> &FinObject {
        &self.carrier
    }

    pub fn tag(&self) -> Semiring {
        self.tag
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Carrier index encoding a given (sorted, nonempty) support set.
    pub fn index_of_subset(&self, indices: &[usize]) -> Option<usize> {
        self.subsets.iter().position(|s| s == indices)
    }

    /// Carrier label encoding the support of a column over the base.
    pub fn encode_column(&self, col: &Column) -> Result<Label> {
        let mut indices: Vec<usize> = col
            .keys()
            .map(|y| {
                self.base
                    .index_of(y)
                    .ok_or_else(|| Error::ObjectMismatch(format!("`{y}` outside the base")))
            })
            .collect::<Result<_>>()?;
        indices.sort_unstable();
        let i = self
            .index_of_subset(&indices)
            .ok_or_else(|| Error::Internal("support not in the carrier table".into()))?;
        Ok(self.carrier.labels()[i].clone())
    }

    /// Unit `δ : X → PX`, deterministic.
    pub fn delta(&self) -> Kernel {
        let d = self.clone();
        Kernel::deterministic(
            self.base.clone(),
            self.carrier.clone(),
            self.tag,
            move |x| {
                let i = d.base.index_of(x).expect("base label");
                let j = d.index_of_subset(&[i]).expect("singleton in carrier");
                d.carrier.labels()[j].clone()
            },
        )
        .expect("unit kernel")
    }

    /// Sampling `samp : PX → X`, total; for Booleans it relates each encoded
    /// set to each of its elements.
    pub fn samp(&self) -> Kernel {
        let one = SemiringValue::one(self.tag);
        Kernel::from_fn(self.carrier.clone(), self.base.clone(), self.tag, |s| {
            let i = self.carrier.index_of(s).expect("carrier label");
            self.subsets[i]
                .iter()
                .map(|&j| (self.base.labels()[j].clone(), one.clone()))
                .collect()
        })
        .expect("sampling kernel")
    }

    /// Multiplication `μ : PPX → PX` (union of a set of sets), together with
    /// the materialized `PPX`.
    pub fn mu(&self) -> Result<(DistObject, Kernel)> {
        let ppx = DistObject::new(&self.carrier, self.tag)?;
        let mu =
            Kernel::deterministic(ppx.carrier.clone(), self.carrier.clone(), self.tag, |pi| {
                let i = ppx.carrier.index_of(pi).expect("carrier label");
                let mut union: Vec<usize> = Vec::new();
                for &s in &ppx.subsets[i] {
                    for &j in &self.subsets[s] {
                        if !union.contains(&j) {
                            union.push(j);
                        }
                    }
                }
                union.sort_unstable();
                let k = self.index_of_subset(&union).expect("union in carrier");
                self.carrier.labels()[k].clone()
            })?;
        Ok((ppx, mu))
    }
}

/// The copyable counterpart of `u : X → Y`: same domain, with each output
/// column encoded as a single carrier point of `PY`.
pub fn sharp(u: &ParMap) -> Result<ParMap> {
    check_instance(u.tag())?;
    let py = DistObject::new(u.target(), u.tag())?;
    let mut cols = BTreeMap::new();
    let one = SemiringValue::one(u.tag());
    for x in u.dom().elements() {
        let l = py.encode_column(u.ker().col(x))?;
        cols.insert(x.clone(), [(l, one.clone())].into_iter().collect());
    }
    let ker = Kernel::new(u.dom().as_object(), py.carrier().clone(), u.tag(), cols)?;
    ParMap::new(
        u.source().clone(),
        py.carrier().clone(),
        u.dom().clone(),
        ker,
    )
}

/// Pushforward `Pu : PX → PY`: defined on the distributions supported inside
/// `dom(u)`, acting by the Kleisli extension of `u`'s kernel.
pub fn pushforward(u: &ParMap) -> Result<ParMap> {
    check_instance(u.tag())?;
    let px = DistObject::new(u.source(), u.tag())?;
    let py = DistObject::new(u.target(), u.tag())?;
    let dom_indices: Vec<usize> = u
        .dom()
        .elements()
        .iter()
        .map(|x| u.source().index_of(x).expect("domain element"))
        .collect();
    let dom = Subobject::from_pred(px.carrier(), |l| {
        let i = px.carrier().index_of(l).expect("carrier label");
        px.subsets()[i].iter().all(|j| dom_indices.contains(j))
    });
    let one = SemiringValue::one(u.tag());
    let mut cols = BTreeMap::new();
    for s in dom.elements() {
        let i = px.carrier().index_of(s).expect("carrier label");
        let mut union: Vec<usize> = Vec::new();
        for &j in &px.subsets()[i] {
            let x = &u.source().labels()[j];
            for y in u.ker().col(x).keys() {
                let yi = u.target().index_of(y).expect("target label");
                if !union.contains(&yi) {
                    union.push(yi);
                }
            }
        }
        union.sort_unstable();
        let k = py
            .index_of_subset(&union)
            .ok_or_else(|| Error::Internal("image support not in carrier".into()))?;
        cols.insert(
            s.clone(),
            [(py.carrier().labels()[k].clone(), one.clone())]
                .into_iter()
                .collect(),
        );
    }
    let ker = Kernel::new(dom.as_object(), py.carrier().clone(), u.tag(), cols)?;
    ParMap::new(px.carrier().clone(), py.carrier().clone(), dom, ker)
}

/// The carrier-level injection `P i : PD → PX` of a subobject inclusion.
pub fn carrier_injection(sub: &Subobject, tag: Semiring) -> Result<Kernel> {
    let pd = DistObject::new(&sub.as_object(), tag)?;
    let px = DistObject::new(sub.ambient(), tag)?;
    let ambient_index: Vec<usize> = sub
        .elements()
        .iter()
        .map(|e| sub.ambient().index_of(e).expect("subobject element"))
        .collect();
    Kernel::deterministic(pd.carrier().clone(), px.carrier().clone(), tag, move |s| {
        let i = pd.carrier().index_of(s).expect("carrier label");
        let mut indices: Vec<usize> = pd.subsets()[i].iter().map(|&j| ambient_index[j]).collect();
        indices.sort_unstable();
        let k = px
            .index_of_subset(&indices)
            .expect("subset in ambient carrier");
        px.carrier().labels()[k].clone()
    })
}

/// Check that the naturality square of sampling at a subobject inclusion is
/// a pullback, by exhausting test cones from probe objects of size ≤ 2.
///
/// Cones out of a probe restrict to independent cones at each probe element,
/// so exhausting the single-element probes and pairing them covers the
/// two-element probes as well; the loop below walks every single-element
/// cone.  The mediating map is forced because the carrier injection is
/// deterministic and injective, so existence is the only question.
pub fn samp_pullback_check(sub: &Subobject, tag: Semiring) -> Result<bool> {
    check_instance(tag)?;
    let d_obj = sub.as_object();
    let px = DistObject::new(sub.ambient(), tag)?;
    let pd = DistObject::new(&d_obj, tag)?;
    let pi = carrier_injection(sub, tag)?;
    if !pi.is_deterministic() {
        return Ok(false);
    }
    // naturality: samp_X ∘ Pi = i ∘ samp_D
    let lhs = Kernel::compose(&px.samp(), &pi)?;
    let rhs = Kernel::compose(&sub.inclusion(tag), &pd.samp())?;
    if lhs != rhs {
        return Ok(false);
    }
    match tag {
        Semiring::Nat => {
            // PX ≅ X and the square is the inclusion against itself; the
            // pullback of the identity sampling map along the inclusion is
            // the inclusion's own subobject.
            let s = pullback_det_mono(
                &px.samp(),
                &Subobject::new(px.base().clone(), sub.elements().to_vec())?,
            )?;
            Ok(s.elements() == sub.elements())
        }
        _ => {
            let n = px.carrier().size();
            if n > 20 {
                return Err(Error::Shape(format!(
                    "distribution carrier of size {n} is too large to exhaust"
                )));
            }
            let dom_indices: Vec<usize> = sub
                .elements()
                .iter()
                .map(|e| sub.ambient().index_of(e).expect("subobject element"))
                .collect();
            // image of Pi inside PX, as carrier indices
            let image: Vec<bool> = (0..n)
                .map(|i| px.subsets()[i].iter().all(|j| dom_indices.contains(j)))
                .collect();
            for mask in 1u64..(1 << n) {
                let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                // the X-leg of this cone samples to the union of the members
                let union_in_d = members
                    .iter()
                    .all(|&i| px.subsets()[i].iter().all(|j| dom_indices.contains(j)));
                // the cone factors through D exactly when the union stays
                // inside it, and then the mediating column is the member set
                // itself; both existence and uniqueness reduce to membership
                // of every member in the image of Pi.
                let mediated = members.iter().all(|&i| image[i]);
                if union_in_d != mediated {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// A candidate partial algebra `(A, D ⊆ PA, a : D → A)` for the
/// distribution monad.
#[derive(Clone, Debug)]
pub struct PartialAlgebraCandidate {
    pub pa: DistObject,
    pub dom: Subobject,
    pub action: Kernel,
}

impl PartialAlgebraCandidate {
    pub fn new(pa: DistObject, dom: Subobject, action: Kernel) -> Result<Self> {
        if dom.ambient() != pa.carrier() {
            return Err(Error::ObjectMismatch(
                "algebra domain must live inside the distribution carrier".into(),
            ));
        }
        if action.source() != &dom.as_object() || action.target() != pa.base() {
            return Err(Error::Shape("algebra action shape mismatch".into()));
        }
        if !action.is_deterministic() {
            return Err(Error::InvalidValue(
                "algebra action must be deterministic".into(),
            ));
        }
        Ok(PartialAlgebraCandidate { pa, dom, action })
    }

    /// The action as a partial map `PA → A`.
    pub fn as_parmap(&self) -> ParMap {
        ParMap::new(
            self.pa.carrier().clone(),
            self.pa.base().clone(),
            self.dom.clone(),
            self.action.clone(),
        )
        .expect("candidate shapes were validated")
    }
}

/// Per-condition result of the partial-algebra check; `None` means the
/// condition held.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraReport {
    /// (1) the unit factors through the domain into a section of the action
    pub unit_section: Option<String>,
    /// (2) multiplication and pushforward pull the domain back to the same
    /// subobject of `PPA`
    pub pullback_agreement: Option<String>,
    /// (3) the unit triangle and multiplication square commute
    pub squares: Option<String>,
}

impl AlgebraReport {
    pub fn passed(&self) -> bool {
        self.unit_section.is_none() && self.pullback_agreement.is_none() && self.squares.is_none()
    }
}

pub fn check_partial_algebra(c: &PartialAlgebraCandidate) -> Result<AlgebraReport> {
    let a_obj = c.pa.base().clone();
    let delta = c.pa.delta();
    let a_hat = c.as_parmap();

    // (1) every δ(x) lies in the domain and the action sends it back to x
    let mut unit_section = None;
    for x in a_obj.labels() {
        let dx = delta.col(x).keys().next().expect("unit is deterministic");
        if !c.dom.contains(dx) {
            unit_section = Some(format!("δ({x}) = {dx} is outside the domain"));
            break;
        }
        let ax = c
            .action
            .col(dx)
            .keys()
            .next()
            .expect("action is deterministic");
        if ax != x {
            unit_section = Some(format!("a(δ({x})) = {ax} ≠ {x}"));
            break;
        }
    }

    // (2) the pullbacks of the domain along μ and along Pa agree
    let (ppa, mu) = c.pa.mu()?;
    let c1 = pullback_det_mono(&mu, &c.dom)?;
    let pa_hat = pushforward(&a_hat)?;
    let c2_in_dom = pullback_det_mono(pa_hat.ker(), &c.dom)?;
    let c2 = Subobject::new(ppa.carrier().clone(), c2_in_dom.elements().to_vec())?;
    let mut pullback_agreement = None;
    for pi in ppa.carrier().labels() {
        let (in1, in2) = (c1.contains(pi), c2.contains(pi));
        if in1 != in2 {
            pullback_agreement = Some(format!(
                "π = {pi}: μ-side defined = {in1}, pushforward side defined = {in2}"
            ));
            break;
        }
    }

    // (3) a∘μ = a∘Pa as partial maps, and a∘δ = id
    let mut squares = None;
    let left = ParMap::par_compose(&a_hat, &ParMap::lift(&mu))?;
    let right = ParMap::par_compose(&a_hat, &pa_hat)?;
    if left != right {
        let witness = ppa
            .carrier()
            .labels()
            .iter()
            .find(|pi| {
                left.dom().contains(pi) != right.dom().contains(pi)
                    || (left.dom().contains(pi) && left.ker().col(pi) != right.ker().col(pi))
            })
            .map(|pi| {
                let show = |m: &ParMap| {
                    if m.dom().contains(pi) {
                        m.ker().col(pi).keys().next().unwrap().to_string()
                    } else {
                        "undefined".to_string()
                    }
                };
                format!(
                    "multiplication square differs at π = {pi}: a(μ(π)) = {} but a(Pa(π)) = {}",
                    show(&left),
                    show(&right)
                )
            })
            .unwrap_or_else(|| "multiplication square differs".into());
        squares = Some(witness);
    } else {
        let unit_comp = ParMap::par_compose(&a_hat, &ParMap::lift(&delta))?;
        if unit_comp != ParMap::identity(&a_obj, c.pa.tag()) {
            squares = Some("unit triangle a∘δ ≠ id".into());
        }
    }

    Ok(AlgebraReport {
        unit_section,
        pullback_agreement,
        squares,
    })
}

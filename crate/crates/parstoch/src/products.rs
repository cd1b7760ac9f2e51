//! Finite-index tensor families, lax cones, the induced map into the full
//! product, subobject meets, and iterated independent copies.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::parmap::{pullback_det_mono, ParMap, Subobject};
use crate::semiring::{Semiring, SemiringValue};

/// Componentwise tensor of a family of partial maps; the empty family is the
/// identity on the unit.
pub fn tensor_family(maps: &[ParMap], tag: Semiring) -> Result<ParMap> {
    let mut acc = ParMap::identity(&FinObject::unit(), tag);
    for m in maps {
        acc = ParMap::par_tensor(&acc, m)?;
    }
    Ok(acc)
}

/// The projection `X^K → X^F` as a partial (total, deterministic) map.
pub fn projection_par(factors: &[&FinObject], keep: &[usize], tag: Semiring) -> Result<ParMap> {
    Ok(ParMap::lift(&Kernel::projection(factors, keep, tag)?))
}

/// All subsets of `0..k`, ordered by size then lexicographically.
pub fn subsets_of(k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u64..(1 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    out.sort_by_key(|s: &Vec<usize>| (s.len(), s.clone()));
    out
}

/// A cone over the finite-subset diagram of a family of carriers, commuting
/// laxly: each projection of a bigger leg extends into the smaller leg.
///
/// Legs may be supplied sparsely; a missing leg for `F` is synthesized by
/// marginalizing the largest supplied leg containing `F` (and is then
/// subject to the same lax checks as everything else).
#[derive(Clone, Debug)]
pub struct LaxCone {
    apex: FinObject,
    factors: Vec<FinObject>,
    tag: Semiring,
    legs: BTreeMap<Vec<usize>, ParMap>,
}

impl LaxCone {
    pub fn new(
        apex: FinObject,
        factors: Vec<FinObject>,
        tag: Semiring,
        supplied: BTreeMap<Vec<usize>, ParMap>,
    ) -> Result<LaxCone> {
        let k = factors.len();
        let refs: Vec<&FinObject> = factors.iter().collect();
        for (f, leg) in &supplied {
            if f.iter().any(|&i| i >= k) || (1..f.len()).any(|i| f[i] <= f[i - 1]) {
                return Err(Error::InvalidIndices(format!("bad index subset {f:?}")));
            }
            let target = FinObject::tensor_all(&f.iter().map(|&i| refs[i]).collect::<Vec<_>>());
            if leg.source() != &apex || leg.target() != &target || leg.tag() != tag {
                return Err(Error::Shape(format!("leg for {f:?} has the wrong shape")));
            }
        }
        if supplied.is_empty() {
            return Err(Error::Shape("a cone needs at least one leg".into()));
        }
        let mut legs = supplied;
        for f in subsets_of(k) {
            if legs.contains_key(&f) || f.is_empty() {
                continue;
            }
            // marginalize the largest present superset
            let g = legs
                .keys()
                .filter(|g| f.iter().all(|i| g.contains(i)))
                .max_by_key(|g| g.len())
                .cloned()
                .ok_or_else(|| Error::Shape(format!("no supplied leg covers the subset {f:?}")))?;
            let g_factors: Vec<&FinObject> = g.iter().map(|&i| &factors[i]).collect();
            let keep: Vec<usize> = f
                .iter()
                .map(|i| g.iter().position(|j| j == i).unwrap())
                .collect();
            let proj = projection_par(&g_factors, &keep, tag)?;
            let leg = ParMap::par_compose(&proj, &legs[&g])?;
            legs.insert(f, leg);
        }
        if !legs.contains_key(&Vec::new()) {
            // A leg into the empty product is a discard, determined by its
            // domain alone; the only choice compatible with every other leg
            // is the union of their domains.
            let mut union = Subobject::empty(&apex);
            for leg in legs.values() {
                union = union.join(leg.dom())?;
            }
            let ker = Kernel::deterministic(union.as_object(), FinObject::unit(), tag, |_| {
                Label::unit()
            })?;
            let leg = ParMap::new(apex.clone(), FinObject::unit(), union, ker)?;
            legs.insert(Vec::new(), leg);
        }
        Ok(LaxCone {
            apex,
            factors,
            tag,
            legs,
        })
    }

    pub fn apex(&self) -> &FinObject {
        &self.apex
    }

    pub fn factors(&self) -> &[FinObject] {
        &self.factors
    }

    pub fn leg(&self, f: &[usize]) -> &ParMap {
        &self.legs[f]
    }

    /// First pair `(F, G)` with `G ⊆ F` whose marginalization fails to
    /// commute laxly, if any.
    pub fn lax_violation(&self) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        for (f, leg_f) in &self.legs {
            for (g, leg_g) in &self.legs {
                if !g.iter().all(|i| f.contains(i)) {
                    continue;
                }
                let f_factors: Vec<&FinObject> = f.iter().map(|&i| &self.factors[i]).collect();
                let keep: Vec<usize> = g
                    .iter()
                    .map(|i| f.iter().position(|j| j == i).unwrap())
                    .collect();
                let proj = projection_par(&f_factors, &keep, self.tag)?;
                let marg = ParMap::par_compose(&proj, leg_f)?;
                if !ParMap::extends(leg_g, &marg)? {
                    return Ok(Some((f.clone(), g.clone())));
                }
            }
        }
        Ok(None)
    }

    pub fn is_lax_cone(&self) -> Result<bool> {
        Ok(self.lax_violation()?.is_none())
    }

    /// Whether every marginalization triangle commutes on the nose.
    pub fn is_strict(&self) -> Result<bool> {
        for (f, leg_f) in &self.legs {
            for (g, leg_g) in &self.legs {
                if !g.iter().all(|i| f.contains(i)) {
                    continue;
                }
                let f_factors: Vec<&FinObject> = f.iter().map(|&i| &self.factors[i]).collect();
                let keep: Vec<usize> = g
                    .iter()
                    .map(|i| f.iter().position(|j| j == i).unwrap())
                    .collect();
                let proj = projection_par(&f_factors, &keep, self.tag)?;
                if ParMap::par_compose(&proj, leg_f)? != *leg_g {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The greatest map into the full product compatible with the cone:
    /// the `K`-leg restricted to the meet of all leg domains.
    pub fn lax_induced_map(&self) -> Result<ParMap> {
        if let Some((f, g)) = self.lax_violation()? {
            return Err(Error::NotLaxCone { f, g });
        }
        let doms: Vec<Subobject> = self.legs.values().map(|l| l.dom().clone()).collect();
        let meet = subobject_meet(&doms)?;
        let full: Vec<usize> = (0..self.factors.len()).collect();
        self.legs[&full].restrict(&meet)
    }
}

/// Greatest lower bound of subobjects of a common carrier: the intersection.
pub fn subobject_meet(subs: &[Subobject]) -> Result<Subobject> {
    let first = subs
        .first()
        .ok_or_else(|| Error::Shape("meet of an empty family".into()))?;
    let mut acc = Subobject::full(first.ambient());
    for s in subs {
        acc = acc.meet(s)?;
    }
    Ok(acc)
}

/// The same meet computed the categorical way, as the pullback of the tensor
/// of inclusions along the iterated diagonal.
pub fn subobject_meet_via_copy(subs: &[Subobject], tag: Semiring) -> Result<Subobject> {
    let first = subs
        .first()
        .ok_or_else(|| Error::Shape("meet of an empty family".into()))?;
    let b = first.ambient().clone();
    // iterated copy B → B^n
    let mut cop = Kernel::identity(&b, tag);
    let mut box_sub = subs[0].clone();
    for s in &subs[1..] {
        if s.ambient() != &b {
            return Err(Error::ObjectMismatch(
                "meet across different carriers".into(),
            ));
        }
        cop = Kernel::compose(
            &Kernel::tensor(&cop, &Kernel::identity(&b, tag))?,
            &Kernel::copy(&b, tag),
        )?;
        box_sub = box_sub.tensor(s);
    }
    pullback_det_mono(&cop, &box_sub)
}

/// `K`-fold independent copy of a partial map: same domain, each point fans
/// out to the product of `k` independent draws from its column.  `k = 0`
/// degenerates to `discard ∘ u`.
pub fn infinite_copy(u: &ParMap, k: usize) -> Result<ParMap> {
    if k == 0 {
        return ParMap::par_compose(&ParMap::discard(u.target(), u.tag()), u);
    }
    let target = FinObject::tensor_all(&vec![u.target(); k]);
    let mut cols = BTreeMap::new();
    for x in u.dom().elements() {
        let col = u.ker().col(x);
        // k-fold product distribution of this column
        let mut acc: Vec<(Label, SemiringValue)> =
            vec![(Label::unit(), SemiringValue::one(u.tag()))];
        for _ in 0..k {
            let mut next = Vec::with_capacity(acc.len() * col.len());
            for (prefix, w) in &acc {
                for (y, wy) in col {
                    next.push((Label::pair(prefix, y), w.mul(wy)?));
                }
            }
            acc = next;
        }
        let mut column = Column::new();
        for (l, w) in acc {
            let entry = column
                .entry(l)
                .or_insert_with(|| SemiringValue::zero(u.tag()));
            *entry = entry.add(&w)?;
        }
        column.retain(|_, w| !w.is_zero());
        cols.insert(x.clone(), column);
    }
    let ker = Kernel::new(u.dom().as_object(), target.clone(), u.tag(), cols)?;
    ParMap::new(u.source().clone(), target, u.dom().clone(), ker)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, d: u64) -> SemiringValue {
        SemiringValue::rational(n, d).unwrap()
    }

    fn coin() -> ParMap {
        ParMap::lift(
            &Kernel::from_fn(
                FinObject::unit(),
                FinObject::atoms(&["H", "T"]),
                Semiring::QNonNeg,
                |_| {
                    [(Label::atom("H"), q(1, 2)), (Label::atom("T"), q(1, 2))]
                        .into_iter()
                        .collect()
                },
            )
            .unwrap(),
        )
    }

    fn partial_id_on(x: &FinObject, keep: &[&str]) -> ParMap {
        let sub =
            Subobject::new(x.clone(), keep.iter().map(|s| Label::atom(*s)).collect()).unwrap();
        ParMap::identity(x, Semiring::QNonNeg)
            .restrict(&sub)
            .unwrap()
    }

    #[test]
    fn binary_family_is_the_tensor() {
        let u = coin();
        let v = partial_id_on(&FinObject::atoms(&["a", "b"]), &["a"]);
        let fam = tensor_family(&[u.clone(), v.clone()], Semiring::QNonNeg).unwrap();
        assert_eq!(fam, ParMap::par_tensor(&u, &v).unwrap());
        // ternary family of lifts equals the lift of the kernel tensor
        let w = coin();
        let fam3 = tensor_family(&[u.clone(), w.clone(), u.clone()], Semiring::QNonNeg).unwrap();
        let k3 = Kernel::tensor(&Kernel::tensor(u.ker(), w.ker()).unwrap(), u.ker()).unwrap();
        assert_eq!(fam3, ParMap::lift(&k3));
        // empty family
        let none = tensor_family(&[], Semiring::Bool).unwrap();
        assert_eq!(none, ParMap::identity(&FinObject::unit(), Semiring::Bool));
    }

    #[test]
    fn marginalization_family_is_lax_but_not_strict() {
        // legs: the full tensor u⊗v, and the larger-domain path u∘π_1
        let x = FinObject::atoms(&["x0", "x1"]);
        let z = FinObject::atoms(&["z0", "z1"]);
        let u = partial_id_on(&x, &["x0"]);
        let v = partial_id_on(&z, &["z0"]);
        let apex = x.tensor(&z);
        let uv = ParMap::par_tensor(&u, &v).unwrap();
        let pi1 = projection_par(&[&x, &z], &[0], Semiring::QNonNeg).unwrap();
        let leg1 = ParMap::par_compose(&u, &pi1).unwrap();
        let cone = LaxCone::new(
            apex,
            vec![x.clone(), z.clone()],
            Semiring::QNonNeg,
            [(vec![0, 1], uv), (vec![0], leg1)].into_iter().collect(),
        )
        .unwrap();
        assert!(cone.is_lax_cone().unwrap());
        assert!(!cone.is_strict().unwrap());
    }

    #[test]
    fn induced_map_domain_is_the_meet() {
        let x = FinObject::atoms(&["x0", "x1"]);
        let z = FinObject::atoms(&["z0", "z1"]);
        let u = partial_id_on(&x, &["x0"]);
        let v = partial_id_on(&z, &["z0"]);
        let apex = x.tensor(&z);
        let uv = ParMap::par_tensor(&u, &v).unwrap();
        let pi1 = projection_par(&[&x, &z], &[0], Semiring::QNonNeg).unwrap();
        let leg1 = ParMap::par_compose(&u, &pi1).unwrap();
        let cone = LaxCone::new(
            apex,
            vec![x, z],
            Semiring::QNonNeg,
            [(vec![0, 1], uv.clone()), (vec![0], leg1)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let g = cone.lax_induced_map().unwrap();
        // the K-leg already has the smallest domain here, so g = u⊗v
        assert_eq!(g, uv);
    }

    #[test]
    fn meets() {
        let b = FinObject::atoms(&["a", "b", "c"]);
        let s1 = Subobject::new(b.clone(), vec![Label::atom("a"), Label::atom("b")]).unwrap();
        let s2 = Subobject::new(b.clone(), vec![Label::atom("b"), Label::atom("c")]).unwrap();
        let m = subobject_meet(&[s1.clone(), s2.clone()]).unwrap();
        assert_eq!(m.elements(), &[Label::atom("b")]);
        assert_eq!(
            subobject_meet(&[s1.clone(), Subobject::full(&b)]).unwrap(),
            s1
        );
        // exhaustive agreement with the pullback construction
        for tag in [Semiring::QNonNeg, Semiring::Bool, Semiring::Nat] {
            for m1 in 0u8..8 {
                for m2 in 0u8..8 {
                    let mk = |m: u8| {
                        Subobject::from_pred(&b, |l| {
                            let i = b.index_of(l).unwrap();
                            m & (1 << i) != 0
                        })
                    };
                    let (t1, t2) = (mk(m1), mk(m2));
                    assert_eq!(
                        subobject_meet(&[t1.clone(), t2.clone()]).unwrap(),
                        subobject_meet_via_copy(&[t1, t2], tag).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn infinite_copies_marginalize_back() {
        let u = coin();
        assert_eq!(infinite_copy(&u, 1).unwrap(), u);
        // arity 2 agrees with (u⊗u)∘cop
        let two = infinite_copy(&u, 2).unwrap();
        let via_cop = ParMap::par_compose(
            &ParMap::par_tensor(&u, &u).unwrap(),
            &ParMap::copy(u.source(), u.tag()),
        )
        .unwrap();
        assert_eq!(two, via_cop);
        // every marginal of the 3-fold copy is the matching smaller copy
        let three = infinite_copy(&u, 3).unwrap();
        let y = u.target().clone();
        for f in subsets_of(3) {
            let proj = projection_par(&[&y, &y, &y], &f, u.tag()).unwrap();
            let marg = ParMap::par_compose(&proj, &three).unwrap();
            assert_eq!(marg, infinite_copy(&u, f.len()).unwrap());
        }
    }
}

//! Total stochastic maps between finite carriers, over a fixed semiring.
//!
//! A `Kernel` stores one distribution per source element (zero weights
//! omitted) and insists every column sums to one, so normalization is a
//! constructor invariant rather than something callers re-check.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::object::{FinObject, Label};
use crate::semiring::{Semiring, SemiringValue};

pub type Column = BTreeMap<Label, SemiringValue>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    source: FinObject,
    target: FinObject,
    tag: Semiring,
    cols: BTreeMap<Label, Column>,
}

impl Kernel {
    pub fn new(
        source: FinObject,
        target: FinObject,
        tag: Semiring,
        cols: BTreeMap<Label, Column>,
    ) -> Result<Kernel> {
        if tag == Semiring::Int {
            return Err(Error::Unsupported {
                instance: tag,
                what: "kernels (not zerosumfree)".into(),
            });
        }
        for x in cols.keys() {
            if !source.contains(x) {
                return Err(Error::ObjectMismatch(format!(
                    "column key `{x}` is not a source element"
                )));
            }
        }
        let one = SemiringValue::one(tag);
        for x in source.labels() {
            let col = cols
                .get(x)
                .ok_or_else(|| Error::Shape(format!("missing column for `{x}`")))?;
            let mut sum = SemiringValue::zero(tag);
            for (y, w) in col {
                if !target.contains(y) {
                    return Err(Error::ObjectMismatch(format!(
                        "weight on `{y}` outside the target"
                    )));
                }
                if w.tag() != tag {
                    return Err(Error::InstanceMismatch(tag, w.tag()));
                }
                if w.is_zero() {
                    return Err(Error::InvalidValue(format!(
                        "explicit zero weight at ({y}|{x})"
                    )));
                }
                sum = sum.add(w)?;
            }
            if sum != one {
                return Err(Error::InvalidValue(format!(
                    "column at `{x}` sums to {sum}, not 1"
                )));
            }
        }
        Ok(Kernel {
            source,
            target,
            tag,
            cols,
        })
    }

    pub fn from_fn(
        source: FinObject,
        target: FinObject,
        tag: Semiring,
        f: impl Fn(&Label) -> Column,
    ) -> Result<Kernel> {
        let cols = source.labels().iter().map(|x| (x.clone(), f(x))).collect();
        Kernel::new(source, target, tag, cols)
    }

    /// Point-mass kernel from a label function.
    pub fn deterministic(
        source: FinObject,
        target: FinObject,
        tag: Semiring,
        f: impl Fn(&Label) -> Label,
    ) -> Result<Kernel> {
        let one = SemiringValue::one(tag);
        Kernel::from_fn(source, target, tag, |x| {
            let mut col = Column::new();
            col.insert(f(x), one.clone());
            col
        })
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

    pub fn col(&self, x: &Label) -> &Column {
        self.cols.get(x).expect("column for a non-source element")
    }

    pub fn weight(&self, y: &Label, x: &Label) -> SemiringValue {
        self.cols
            .get(x)
            .and_then(|c| c.get(y))
            .cloned()
            .unwrap_or_else(|| SemiringValue::zero(self.tag))
    }

    /// Support of the column at `x`, in target order.
    pub fn support(&self, x: &Label) -> Vec<&Label> {
        let col = self.col(x);
        self.target
            .labels()
            .iter()
            .filter(|y| col.contains_key(*y))
            .collect()
    }

    pub fn identity(x: &FinObject, tag: Semiring) -> Kernel {
        Kernel::deterministic(x.clone(), x.clone(), tag, Label::clone).expect("identity kernel")
    }

    /// Chapman–Kolmogorov composite: `(g∘f)(z|x) = Σ_y g(z|y)·f(y|x)`.
    pub fn compose(g: &Kernel, f: &Kernel) -> Result<Kernel> {
        if f.tag != g.tag {
            return Err(Error::InstanceMismatch(f.tag, g.tag));
        }
        if f.target != g.source {
            return Err(Error::ObjectMismatch(
                "middle objects of a composite differ".into(),
            ));
        }
        let mut cols = BTreeMap::new();
        for (x, fcol) in &f.cols {
            let mut col = Column::new();
            for (y, wf) in fcol {
                for (z, wg) in g.col(y) {
                    let term = wg.mul(wf)?;
                    let entry = col
                        .entry(z.clone())
                        .or_insert_with(|| SemiringValue::zero(f.tag));
                    *entry = entry.add(&term)?;
                }
            }
            col.retain(|_, w| !w.is_zero());
            cols.insert(x.clone(), col);
        }
        Kernel::new(f.source.clone(), g.target.clone(), f.tag, cols)
    }

    /// `(f⊗g)((y1,y2)|(x1,x2)) = f(y1|x1)·g(y2|x2)`.
    pub fn tensor(f: &Kernel, g: &Kernel) -> Result<Kernel> {
        if f.tag != g.tag {
            return Err(Error::InstanceMismatch(f.tag, g.tag));
        }
        let source = f.source.tensor(&g.source);
        let target = f.target.tensor(&g.target);
        let mut cols = BTreeMap::new();
        for (x1, c1) in &f.cols {
            for (x2, c2) in &g.cols {
                let mut col = Column::new();
                for (y1, w1) in c1 {
                    for (y2, w2) in c2 {
                        col.insert(Label::pair(y1, y2), w1.mul(w2)?);
                    }
                }
                cols.insert(Label::pair(x1, x2), col);
            }
        }
        Kernel::new(source, target, f.tag, cols)
    }

    /// Diagonal: `x ↦ δ(x,x)`.
    pub fn copy(x: &FinObject, tag: Semiring) -> Kernel {
        Kernel::deterministic(x.clone(), x.tensor(x), tag, |l| Label::pair(l, l))
            .expect("copy kernel")
    }

    /// Deletion: `x ↦ δ()`.
    pub fn discard(x: &FinObject, tag: Semiring) -> Kernel {
        Kernel::deterministic(x.clone(), FinObject::unit(), tag, |_| Label::unit())
            .expect("discard kernel")
    }

    /// Symmetry: `(x,y) ↦ δ(y,x)`.
    pub fn swap(x: &FinObject, y: &FinObject, tag: Semiring) -> Kernel {
        let one = SemiringValue::one(tag);
        let mut cols = BTreeMap::new();
        for a in x.labels() {
            for b in y.labels() {
                let mut col = Column::new();
                col.insert(Label::pair(b, a), one.clone());
                cols.insert(Label::pair(a, b), col);
            }
        }
        Kernel::new(x.tensor(y), y.tensor(x), tag, cols).expect("swap kernel")
    }

    /// Decided by the defining equation `cop∘f = (f⊗f)∘cop`.
    pub fn is_deterministic(&self) -> bool {
        let lhs = Kernel::compose(&Kernel::copy(&self.target, self.tag), self)
            .expect("copy after kernel");
        let ff = Kernel::tensor(self, self).expect("kernel squared");
        let rhs =
            Kernel::compose(&ff, &Kernel::copy(&self.source, self.tag)).expect("square of copy");
        lhs == rhs
    }

    /// Structural cross-check used in tests: exactly one entry per column and
    /// that entry is 1.
    pub fn is_point_masses(&self) -> bool {
        self.cols
            .values()
            .all(|c| c.len() == 1 && c.values().next().unwrap().is_one())
    }

    /// Deterministic kernel projecting a tensor of `factors` onto the factors
    /// listed in `keep` (in the given order).
    pub fn projection(factors: &[&FinObject], keep: &[usize], tag: Semiring) -> Result<Kernel> {
        for &k in keep {
            if k >= factors.len() {
                return Err(Error::InvalidIndices(format!(
                    "factor {k} of {}",
                    factors.len()
                )));
            }
        }
        for (i, &k) in keep.iter().enumerate() {
            if keep[..i].contains(&k) {
                return Err(Error::InvalidIndices(format!("repeated factor {k}")));
            }
        }
        let source = FinObject::tensor_all(factors);
        let kept: Vec<&FinObject> = keep.iter().map(|&k| factors[k]).collect();
        let target = FinObject::tensor_all(&kept);
        let one = SemiringValue::one(tag);
        let mut cols = BTreeMap::new();
        for idx in multi_indices(factors) {
            let src_label = Label::tuple(
                idx.iter()
                    .zip(factors)
                    .map(|(&i, f)| f.labels()[i].clone())
                    .collect(),
            );
            let tgt_label = Label::tuple(
                keep.iter()
                    .map(|&k| factors[k].labels()[idx[k]].clone())
                    .collect(),
            );
            let mut col = Column::new();
            col.insert(tgt_label, one.clone());
            cols.insert(src_label, col);
        }
        Kernel::new(source, target, tag, cols)
    }

    /// Marginal onto selected tensor factors: post-compose with the
    /// projection that discards the rest.
    pub fn marginal(&self, factors: &[&FinObject], keep: &[usize]) -> Result<Kernel> {
        if FinObject::tensor_all(factors) != self.target {
            return Err(Error::ObjectMismatch(
                "declared factors do not tensor to the kernel's target".into(),
            ));
        }
        Kernel::compose(&Kernel::projection(factors, keep, self.tag)?, self)
    }

    pub fn to_text(&self, name: &str) -> String {
        let mut out = format!(
            "kernel {name} : {} -> {} over {} {{",
            self.source, self.target, self.tag
        );
        for x in self.source.labels() {
            let col = self.col(x);
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

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text("_"))
    }
}

/// All multi-indices of a list of factors, lexicographically.
pub(crate) fn multi_indices(factors: &[&FinObject]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for f in factors {
        let mut next = Vec::with_capacity(out.len() * f.size());
        for prefix in &out {
            for i in 0..f.size() {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

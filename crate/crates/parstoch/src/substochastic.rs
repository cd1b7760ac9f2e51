//! The rival sub-stochastic semantics, kept strictly as a comparator.
//!
//! A partial map can also be read as a matrix whose off-domain columns are
//! zero; composing such matrices silently leaks mass instead of shrinking
//! the domain.  This module implements that reading so the engine can show,
//! on concrete inputs, how the two semantics disagree — its values are never
//! fed back into the span-based engine.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::Column;
use crate::object::{FinObject, Label};
use crate::parmap::ParMap;
use crate::semiring::{Semiring, SemiringValue};

/// A sub-normalized kernel: columns may sum to anything up to one, and
/// off-domain columns are simply empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubKernel {
    source: FinObject,
    target: FinObject,
    tag: Semiring,
    cols: BTreeMap<Label, Column>,
}

impl SubKernel {
    pub fn new(
        source: FinObject,
        target: FinObject,
        tag: Semiring,
        cols: BTreeMap<Label, Column>,
    ) -> Result<SubKernel> {
        for (x, col) in &cols {
            if !source.contains(x) {
                return Err(Error::ObjectMismatch(format!(
                    "column key `{x}` not in source"
                )));
            }
            for (y, w) in col {
                if !target.contains(y) {
                    return Err(Error::ObjectMismatch(format!(
                        "weight on `{y}` not in target"
                    )));
                }
                if w.tag() != tag {
                    return Err(Error::InstanceMismatch(tag, w.tag()));
                }
                if w.is_zero() {
                    return Err(Error::InvalidValue("explicit zero weight".into()));
                }
            }
        }
        Ok(SubKernel {
            source,
            target,
            tag,
            cols,
        })
    }

    /// Read a partial map as a sub-stochastic matrix: zero columns where it
    /// is undefined.
    pub fn embed(u: &ParMap) -> SubKernel {
        let cols = u
            .dom()
            .elements()
            .iter()
            .map(|x| (x.clone(), u.ker().col(x).clone()))
            .collect();
        SubKernel {
            source: u.source().clone(),
            target: u.target().clone(),
            tag: u.tag(),
            cols,
        }
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

    pub fn weight(&self, y: &Label, x: &Label) -> SemiringValue {
        self.cols
            .get(x)
            .and_then(|c| c.get(y))
            .cloned()
            .unwrap_or_else(|| SemiringValue::zero(self.tag))
    }

    /// Total mass of the column at `x`.
    pub fn column_mass(&self, x: &Label) -> Result<SemiringValue> {
        let mut acc = SemiringValue::zero(self.tag);
        if let Some(col) = self.cols.get(x) {
            for w in col.values() {
                acc = acc.add(w)?;
            }
        }
        Ok(acc)
    }

    /// Chapman–Kolmogorov on sub-normalized matrices.
    pub fn compose(g: &SubKernel, f: &SubKernel) -> Result<SubKernel> {
        if f.tag != g.tag {
            return Err(Error::InstanceMismatch(f.tag, g.tag));
        }
        if f.target != g.source {
            return Err(Error::ObjectMismatch("middle objects differ".into()));
        }
        let mut cols = BTreeMap::new();
        for (x, fcol) in &f.cols {
            let mut col = Column::new();
            for (y, wf) in fcol {
                if let Some(gcol) = g.cols.get(y) {
                    for (z, wg) in gcol {
                        let term = wg.mul(wf)?;
                        let entry = col
                            .entry(z.clone())
                            .or_insert_with(|| SemiringValue::zero(f.tag));
                        *entry = entry.add(&term)?;
                    }
                }
            }
            col.retain(|_, w| !w.is_zero());
            if !col.is_empty() {
                cols.insert(x.clone(), col);
            }
        }
        SubKernel::new(f.source.clone(), g.target.clone(), f.tag, cols)
    }

    /// Entrywise tensor; a missing column on either side leaves the paired
    /// column missing.
    pub fn tensor(f: &SubKernel, g: &SubKernel) -> Result<SubKernel> {
        if f.tag != g.tag {
            return Err(Error::InstanceMismatch(f.tag, g.tag));
        }
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
        SubKernel::new(
            f.source.tensor(&g.source),
            f.target.tensor(&g.target),
            f.tag,
            cols,
        )
    }

    /// The sub-stochastic analogue of the domain idempotent: `x ↦ mass(x)·δx`.
    pub fn restriction(&self) -> Result<SubKernel> {
        let mut cols = BTreeMap::new();
        for x in self.source.labels() {
            let mass = self.column_mass(x)?;
            if !mass.is_zero() {
                cols.insert(x.clone(), [(x.clone(), mass)].into_iter().collect());
            }
        }
        SubKernel::new(self.source.clone(), self.source.clone(), self.tag, cols)
    }

    /// Whether the matrix absorbs its own restriction; fails whenever some
    /// column carries mass strictly between zero and one.
    pub fn is_quasi_total(&self) -> Result<bool> {
        Ok(SubKernel::compose(self, &self.restriction()?)? == *self)
    }
}

/// Composite of two partial maps under the sub-stochastic reading.
pub fn compose_substochastic(v: &ParMap, u: &ParMap) -> Result<SubKernel> {
    match u.tag() {
        Semiring::QNonNeg | Semiring::Bool => {}
        other => {
            return Err(Error::Unsupported {
                instance: other,
                what: "the sub-stochastic comparator".into(),
            })
        }
    }
    SubKernel::compose(&SubKernel::embed(v), &SubKernel::embed(u))
}

impl fmt::Display for SubKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "subkernel : {} -> {} over {} {{",
            self.source, self.target, self.tag
        )?;
        for x in self.source.labels() {
            let entries: Vec<String> = self
                .target
                .labels()
                .iter()
                .filter_map(|y| {
                    self.cols
                        .get(x)
                        .and_then(|c| c.get(y))
                        .map(|w| format!("{y}: {w}"))
                })
                .collect();
            write!(f, " {x} -> {{ {} }}", entries.join(", "))?;
        }
        write!(f, " }}")
    }
}

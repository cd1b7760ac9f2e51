//! Finite carriers and their element labels.
//!
//! Tensor objects carry tuple labels.  Tuples are kept flat (a tuple never
//! contains another tuple, and a one-element tuple collapses to its entry),
//! which makes the tensor strictly associative and strictly unital on
//! representations: no associator or unitor bookkeeping anywhere else.

use std::fmt;

use crate::error::{Error, Result};

/// An element label: an atom, or a flat tuple of atoms (`Tuple(vec![])` is
/// the unique label of the monoidal unit).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Atom(String),
    Tuple(Vec<Label>),
}

impl Label {
    pub fn atom(s: impl Into<String>) -> Label {
        Label::Atom(s.into())
    }

    /// The label of the monoidal unit.
    pub fn unit() -> Label {
        Label::Tuple(Vec::new())
    }

    /// Build a tuple label, flattening nested tuples and collapsing
    /// singletons so the representation stays canonical.
    pub fn tuple(parts: Vec<Label>) -> Label {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Label::Tuple(v) => flat.extend(v),
                a => flat.push(a),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Label::Tuple(flat)
        }
    }

    pub fn pair(a: &Label, b: &Label) -> Label {
        Label::tuple(vec![a.clone(), b.clone()])
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Atom(s) => f.write_str(s),
            Label::Tuple(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A finite carrier: an ordered list of pairwise distinct labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinObject {
    labels: Vec<Label>,
}

impl FinObject {
    pub fn new(labels: Vec<Label>) -> Result<FinObject> {
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidValue(format!("duplicate label `{a}`")));
            }
        }
        Ok(FinObject { labels })
    }

    /// Convenience constructor from atom names; panics on duplicates.
    pub fn atoms(names: &[&str]) -> FinObject {
        FinObject::new(names.iter().map(|n| Label::atom(*n)).collect())
            .expect("duplicate atom names")
    }

    /// The monoidal unit: one element, labeled by the empty tuple.
    pub fn unit() -> FinObject {
        FinObject {
            labels: vec![Label::unit()],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.labels == [Label::unit()]
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.labels.contains(l)
    }

    pub fn index_of(&self, l: &Label) -> Option<usize> {
        self.labels.iter().position(|x| x == l)
    }

    /// Tensor object: lexicographic enumeration of label pairs.
    pub fn tensor(&self, other: &FinObject) -> FinObject {
        let mut labels = Vec::with_capacity(self.size() * other.size());
        for a in &self.labels {
            for b in &other.labels {
                labels.push(Label::pair(a, b));
            }
        }
        FinObject::new(labels).expect("tensor produced colliding labels")
    }

    pub fn tensor_all(factors: &[&FinObject]) -> FinObject {
        factors
            .iter()
            .fold(FinObject::unit(), |acc, x| acc.tensor(x))
    }
}

impl fmt::Display for FinObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

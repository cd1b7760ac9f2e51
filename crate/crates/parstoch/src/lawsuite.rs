//! Deterministic random generation of objects, kernels, and partial maps,
//! plus the law-check battery with greedy counterexample shrinking.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::idempotents::all_kernels;
use crate::kernel::{Column, Kernel};
use crate::object::{FinObject, Label};
use crate::parmap::{ParMap, Subobject};
use crate::semiring::{Semiring, SemiringValue};
use crate::substochastic::{compose_substochastic, SubKernel};

/// Configuration of a generation stream; identical configs generate
/// identical streams.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub seed: u64,
    pub samples: usize,
    pub max_object_size: usize,
    /// values used to build random rational columns (renormalized exactly
    /// per column); ignored by the finite instances
    pub value_grid: Vec<SemiringValue>,
    pub tag: Semiring,
}

impl GenConfig {
    pub fn new(tag: Semiring) -> GenConfig {
        let q = |n, d| SemiringValue::rational(n, d).unwrap();
        GenConfig {
            seed: 42,
            samples: 200,
            max_object_size: 4,
            value_grid: vec![
                SemiringValue::zero(Semiring::QNonNeg),
                q(1, 4),
                q(1, 3),
                q(1, 2),
                SemiringValue::one(Semiring::QNonNeg),
            ],
            tag,
        }
    }
}

/// A seeded generator of random engine values.
pub struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
}

impl Gen {
    pub fn new(cfg: &GenConfig) -> Result<Gen> {
        if cfg.tag == Semiring::QNonNeg && !cfg.value_grid.iter().any(|v| !v.is_zero()) {
            return Err(Error::InvalidValue(
                "value grid has no nonzero entries".into(),
            ));
        }
        Ok(Gen {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg: cfg.clone(),
        })
    }

    fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn gen_object(&mut self) -> FinObject {
        let size = 1 + self.below(self.cfg.max_object_size);
        let labels = (0..size)
            .map(|i| Label::atom(((b'a' + (i % 26) as u8) as char).to_string()))
            .collect();
        FinObject::new(labels).expect("generated labels are distinct")
    }

    pub fn gen_subobject(&mut self, x: &FinObject) -> Subobject {
        let mask: Vec<bool> = (0..x.size()).map(|_| self.rng.gen()).collect();
        Subobject::from_pred(x, |l| mask[x.index_of(l).unwrap()])
    }

    pub fn gen_column(&mut self, tgt: &FinObject) -> Column {
        let one = SemiringValue::one(self.cfg.tag);
        match self.cfg.tag {
            Semiring::Nat => {
                let y = tgt.labels()[self.below(tgt.size())].clone();
                [(y, one)].into_iter().collect()
            }
            Semiring::Bool => {
                let mut col = Column::new();
                while col.is_empty() {
                    for y in tgt.labels() {
                        if self.rng.gen() {
                            col.insert(y.clone(), one.clone());
                        }
                    }
                }
                col
            }
            _ => {
                let nonzero: Vec<SemiringValue> = self
                    .cfg
                    .value_grid
                    .iter()
                    .filter(|v| !v.is_zero())
                    .cloned()
                    .collect();
                let mut picks: Vec<(Label, SemiringValue)> = Vec::new();
                while picks.is_empty() {
                    for y in tgt.labels() {
                        if self.rng.gen() {
                            let i = self.rng.gen_range(0..nonzero.len());
                            picks.push((y.clone(), nonzero[i].clone()));
                        }
                    }
                }
                let mut sum = SemiringValue::zero(self.cfg.tag);
                for (_, w) in &picks {
                    sum = sum.add(w).expect("grid values share the instance");
                }
                picks
                    .into_iter()
                    .map(|(y, w)| (y, w.div(&sum).expect("nonzero sum")))
                    .collect()
            }
        }
    }

    pub fn gen_kernel(&mut self, src: &FinObject, tgt: &FinObject) -> Kernel {
        let cols = src
            .labels()
            .iter()
            .map(|x| (x.clone(), self.gen_column(tgt)))
            .collect();
        Kernel::new(src.clone(), tgt.clone(), self.cfg.tag, cols)
            .expect("generated columns are normalized")
    }

    pub fn gen_parmap(&mut self, src: &FinObject, tgt: &FinObject) -> ParMap {
        let dom = self.gen_subobject(src);
        self.gen_parmap_on(&dom, tgt)
    }

    pub fn gen_parmap_on(&mut self, dom: &Subobject, tgt: &FinObject) -> ParMap {
        let ker = self.gen_kernel(&dom.as_object(), tgt);
        ParMap::new(dom.ambient().clone(), tgt.clone(), dom.clone(), ker)
            .expect("generated shapes agree")
    }

    pub fn gen_deterministic_parmap(&mut self, src: &FinObject, tgt: &FinObject) -> ParMap {
        let dom = self.gen_subobject(src);
        let targets: Vec<Label> = dom
            .elements()
            .iter()
            .map(|_| tgt.labels()[self.below(tgt.size())].clone())
            .collect();
        let ker = Kernel::deterministic(dom.as_object(), tgt.clone(), self.cfg.tag, |x| {
            let i = dom.as_object().index_of(x).unwrap();
            targets[i].clone()
        })
        .expect("deterministic kernel");
        ParMap::new(src.clone(), tgt.clone(), dom, ker).expect("generated shapes agree")
    }
}

/// All partial maps between two carriers of a finite instance.
pub fn all_parmaps(src: &FinObject, tgt: &FinObject, tag: Semiring) -> Vec<ParMap> {
    let mut out = Vec::new();
    let n = src.size();
    for mask in 0u64..(1 << n) {
        let dom = Subobject::from_pred(src, |l| {
            let i = src.index_of(l).unwrap();
            mask & (1 << i) != 0
        });
        if dom.is_empty() {
            out.push(ParMap::empty(src, tgt, tag));
            continue;
        }
        for ker in all_kernels(&dom.as_object(), tgt, tag) {
            out.push(
                ParMap::new(src.clone(), tgt.clone(), dom.clone(), ker)
                    .expect("enumerated shapes agree"),
            );
        }
    }
    out
}

/// Result of one law check.
#[derive(Clone, Debug)]
pub struct LawReport {
    pub law: String,
    pub instance: Semiring,
    pub passed: bool,
    pub samples: usize,
    pub counterexample: Option<String>,
}

pub const LAWS: &[&str] = &[
    "restriction_axioms",
    "quasi_totality",
    "domain_agreement",
    "order_agreement",
    "enrichment",
    "positivity",
    "totality",
    "copyability",
    "interchange",
    "tensor_domain",
];

/// Greedy shrinking: repeatedly drop a domain element or collapse a column
/// to a point mass, as long as the failure persists.
pub fn shrink_failure(mut maps: Vec<ParMap>, fails: impl Fn(&[ParMap]) -> bool) -> Vec<ParMap> {
    loop {
        let mut improved = false;
        'outer: for i in 0..maps.len() {
            let m = &maps[i];
            // drop one domain element
            for d in m.dom().elements() {
                let smaller = Subobject::from_pred(m.source(), |l| m.dom().contains(l) && l != d);
                if let Ok(cand) = m.restrict(&smaller) {
                    let mut attempt = maps.clone();
                    attempt[i] = cand;
                    if fails(&attempt) {
                        maps = attempt;
                        improved = true;
                        break 'outer;
                    }
                }
            }
            // collapse one column to a point mass at its first support point
            for d in m.dom().elements() {
                let col = m.ker().col(d);
                if col.len() <= 1 {
                    continue;
                }
                let first: Label = (*m.ker().support(d)[0]).clone();
                let mut cols: BTreeMap<Label, Column> = m
                    .dom()
                    .elements()
                    .iter()
                    .map(|x| (x.clone(), m.ker().col(x).clone()))
                    .collect();
                cols.insert(
                    d.clone(),
                    [(first, SemiringValue::one(m.tag()))].into_iter().collect(),
                );
                let ker = Kernel::new(m.dom().as_object(), m.target().clone(), m.tag(), cols)
                    .expect("point-mass column is normalized");
                let cand =
                    ParMap::new(m.source().clone(), m.target().clone(), m.dom().clone(), ker)
                        .expect("shapes unchanged");
                let mut attempt = maps.clone();
                attempt[i] = cand;
                if fails(&attempt) {
                    maps = attempt;
                    improved = true;
                    break 'outer;
                }
            }
        }
        if !improved {
            return maps;
        }
    }
}

fn witness(maps: &[ParMap]) -> String {
    maps.iter()
        .enumerate()
        .map(|(i, m)| m.to_text(&format!("u{i}")))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_samples(
    law: &str,
    cfg: &GenConfig,
    mut gen_case: impl FnMut(&mut Gen) -> Result<Vec<ParMap>>,
    holds: impl Fn(&[ParMap]) -> Result<bool>,
) -> Result<LawReport> {
    let mut g = Gen::new(cfg)?;
    for _ in 0..cfg.samples {
        let maps = gen_case(&mut g)?;
        if !holds(&maps)? {
            let shrunk = shrink_failure(maps, |ms| !holds(ms).unwrap_or(false));
            return Ok(LawReport {
                law: law.into(),
                instance: cfg.tag,
                passed: false,
                samples: cfg.samples,
                counterexample: Some(witness(&shrunk)),
            });
        }
    }
    Ok(LawReport {
        law: law.into(),
        instance: cfg.tag,
        passed: true,
        samples: cfg.samples,
        counterexample: None,
    })
}

fn restriction_axioms_hold(maps: &[ParMap]) -> Result<bool> {
    // maps = [f: X→Y, g: X→Z, h: Y→Z]
    let (f, g, h) = (&maps[0], &maps[1], &maps[2]);
    let bar = ParMap::par_dom;
    // R.1: f ∘ f̄ = f
    if ParMap::par_compose(f, &bar(f))? != *f {
        return Ok(false);
    }
    // R.2: f̄ ∘ ḡ = ḡ ∘ f̄
    if ParMap::par_compose(&bar(f), &bar(g))? != ParMap::par_compose(&bar(g), &bar(f))? {
        return Ok(false);
    }
    // R.3: bar(g ∘ f̄) = ḡ ∘ f̄
    let gf = ParMap::par_compose(g, &bar(f))?;
    if bar(&gf) != ParMap::par_compose(&bar(g), &bar(f))? {
        return Ok(false);
    }
    // R.4: h̄ ∘ f = f ∘ bar(h ∘ f)
    let hf = ParMap::par_compose(h, f)?;
    if ParMap::par_compose(&bar(h), f)? != ParMap::par_compose(f, &bar(&hf))? {
        return Ok(false);
    }
    Ok(true)
}

pub fn check(law: &str, cfg: &GenConfig) -> Result<LawReport> {
    match law {
        "restriction_axioms" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                let z = g.gen_object();
                Ok(vec![
                    g.gen_parmap(&x, &y),
                    g.gen_parmap(&x, &z),
                    g.gen_parmap(&y, &z),
                ])
            },
            restriction_axioms_hold,
        ),
        "quasi_totality" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                Ok(vec![g.gen_parmap(&x, &y)])
            },
            |ms| Ok(ParMap::par_compose(&ms[0], &ParMap::par_dom(&ms[0]))? == ms[0]),
        ),
        "domain_agreement" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                Ok(vec![g.gen_parmap(&x, &y)])
            },
            |ms| Ok(ParMap::cd_dom(&ms[0])? == ParMap::par_dom(&ms[0])),
        ),
        "order_agreement" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                let u = g.gen_parmap(&x, &y);
                // half restrictions (comparable), half independent maps
                let v = if g.rng.gen() {
                    let sub = g.gen_subobject(&x);
                    u.restrict(&sub).expect("restriction of a generated map")
                } else {
                    g.gen_parmap(&x, &y)
                };
                Ok(vec![u, v])
            },
            |ms| Ok(ParMap::extends(&ms[0], &ms[1])? == ParMap::span_geq(&ms[0], &ms[1])?),
        ),
        "enrichment" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                let z = g.gen_object();
                let u = g.gen_parmap(&x, &y);
                let v = g.gen_parmap(&y, &z);
                let u2 = u.restrict(&g.gen_subobject(&x)).expect("restriction");
                let v2 = v.restrict(&g.gen_subobject(&y)).expect("restriction");
                Ok(vec![u, v, u2, v2])
            },
            |ms| {
                let (u, v, u2, v2) = (&ms[0], &ms[1], &ms[2], &ms[3]);
                let comp_mono =
                    ParMap::extends(&ParMap::par_compose(v, u)?, &ParMap::par_compose(v2, u2)?)?;
                let tens_mono =
                    ParMap::extends(&ParMap::par_tensor(u, v)?, &ParMap::par_tensor(u2, v2)?)?;
                Ok(comp_mono && tens_mono)
            },
        ),
        "positivity" => run_samples(
            law,
            cfg,
            |g| loop {
                let x = g.gen_object();
                let y = g.gen_object();
                let z = g.gen_object();
                // three strategies for producing copyable composites
                let (u, v) = match g.below(3) {
                    0 => (
                        g.gen_deterministic_parmap(&x, &y),
                        g.gen_deterministic_parmap(&y, &z),
                    ),
                    1 => {
                        // constant deterministic second map, arbitrary first
                        let z0 = z.labels()[g.below(z.size())].clone();
                        let v = ParMap::lift(
                            &Kernel::deterministic(y.clone(), z.clone(), g.cfg.tag, |_| z0.clone())
                                .expect("constant kernel"),
                        );
                        (g.gen_parmap(&x, &y), v)
                    }
                    _ => (g.gen_parmap(&x, &y), g.gen_parmap(&y, &z)),
                };
                if ParMap::par_compose(&v, &u)?.is_copyable() {
                    return Ok(vec![u, v]);
                }
            },
            |ms| {
                let (u, v) = (&ms[0], &ms[1]);
                let vu = ParMap::par_compose(v, u)?;
                if !vu.is_copyable() {
                    // shrinking may leave the qualifying set; skip such cases
                    return Ok(true);
                }
                let y = u.target();
                let tag = u.tag();
                let lhs = ParMap::par_compose(
                    &ParMap::par_compose(
                        &ParMap::par_tensor(v, &ParMap::identity(y, tag))?,
                        &ParMap::copy(y, tag),
                    )?,
                    u,
                )?;
                let rhs = ParMap::par_compose(
                    &ParMap::par_tensor(&vu, u)?,
                    &ParMap::copy(u.source(), tag),
                )?;
                Ok(lhs == rhs)
            },
        ),
        "totality" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                Ok(vec![g.gen_parmap(&x, &y)])
            },
            |ms| {
                let u = &ms[0];
                Ok(u.is_total() == u.dom().is_full()
                    && u.is_total() == u.discard_equation_holds()?)
            },
        ),
        "copyability" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                // mix arbitrary and deterministic maps so both answers occur
                let u = if g.rng.gen() {
                    g.gen_parmap(&x, &y)
                } else {
                    g.gen_deterministic_parmap(&x, &y)
                };
                Ok(vec![u])
            },
            |ms| {
                let u = &ms[0];
                Ok(u.is_copyable() == u.ker().is_deterministic()
                    && u.is_copyable() == u.copy_equation_holds()?)
            },
        ),
        "interchange" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                let z = g.gen_object();
                let x2 = g.gen_object();
                let y2 = g.gen_object();
                let z2 = g.gen_object();
                Ok(vec![
                    g.gen_parmap(&x, &y),
                    g.gen_parmap(&y, &z),
                    g.gen_parmap(&x2, &y2),
                    g.gen_parmap(&y2, &z2),
                ])
            },
            |ms| {
                let (u, v, u2, v2) = (&ms[0], &ms[1], &ms[2], &ms[3]);
                let lhs =
                    ParMap::par_compose(&ParMap::par_tensor(v, v2)?, &ParMap::par_tensor(u, u2)?)?;
                let rhs =
                    ParMap::par_tensor(&ParMap::par_compose(v, u)?, &ParMap::par_compose(v2, u2)?)?;
                Ok(lhs == rhs)
            },
        ),
        "tensor_domain" => run_samples(
            law,
            cfg,
            |g| {
                let x = g.gen_object();
                let y = g.gen_object();
                let z = g.gen_object();
                Ok(vec![g.gen_parmap(&x, &y), g.gen_parmap(&y, &z)])
            },
            |ms| {
                let (u, v) = (&ms[0], &ms[1]);
                let tens_ok = *ParMap::par_tensor(u, v)?.dom() == u.dom().tensor(v.dom());
                let comp_dom = ParMap::par_compose(v, u)?;
                let comp_ok = comp_dom.dom().is_subset_of(u.dom())?;
                Ok(tens_ok && comp_ok)
            },
        ),
        other => Err(Error::InvalidValue(format!("unknown law `{other}`"))),
    }
}

pub fn check_all(cfg: &GenConfig) -> Result<Vec<LawReport>> {
    LAWS.iter().map(|law| check(law, cfg)).collect()
}

/// Run the quasi-totality check against the deliberately wrong sub-stochastic
/// composition.  A healthy harness FAILS this law and reports a witness.
pub fn check_substochastic_quasi_totality(cfg: &GenConfig) -> Result<LawReport> {
    let law = "substochastic_quasi_totality";
    let mut g = Gen::new(cfg)?;
    let fails = |ms: &[ParMap]| -> bool {
        compose_substochastic(&ms[1], &ms[0])
            .and_then(|s| s.is_quasi_total())
            .map(|qt| !qt)
            .unwrap_or(false)
    };
    for _ in 0..cfg.samples {
        let w = g.gen_object();
        let x = g.gen_object();
        let y = g.gen_object();
        let maps = vec![g.gen_parmap(&w, &x), g.gen_parmap(&x, &y)];
        if fails(&maps) {
            let shrunk = shrink_failure(maps, fails);
            let sub = compose_substochastic(&shrunk[1], &shrunk[0])?;
            return Ok(LawReport {
                law: law.into(),
                instance: cfg.tag,
                passed: false,
                samples: cfg.samples,
                counterexample: Some(format!(
                    "{}\nsub-stochastic composite: {sub}",
                    witness(&shrunk)
                )),
            });
        }
    }
    Ok(LawReport {
        law: law.into(),
        instance: cfg.tag,
        passed: true,
        samples: cfg.samples,
        counterexample: None,
    })
}

/// Helper for tests: a SubKernel of the composite under the rival semantics.
pub fn substochastic_composite(v: &ParMap, u: &ParMap) -> Result<SubKernel> {
    compose_substochastic(v, u)
}

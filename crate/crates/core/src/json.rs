//! File formats. Every index in these formats is 1-based; rationals are fraction strings.

use serde::{Deserialize, Serialize};

use crate::certify::{Certificate, ConicCombo, Multiplier, Source, Target, Term};
use crate::delta::DeltaStructured;
use crate::error::{Error, Result};
use crate::instances::{
    CoverInstance, Instance, KnapsackInstance, LinearInequality, PackingInstance, PackingRow, Sense,
};
use crate::poly::MultilinearPoly;
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::varset::{VarSet, MAX_VARS};

fn to_one_based(s: VarSet) -> Vec<usize> {
    s.iter().map(|i| i + 1).collect()
}

fn from_one_based(v: &[usize]) -> Result<VarSet> {
    let mut s = VarSet::EMPTY;
    for &i in v {
        if i == 0 || i > MAX_VARS {
            return Err(Error::Parse(format!(
                "variable index {i} outside 1..={MAX_VARS}"
            )));
        }
        s.insert(i - 1);
    }
    Ok(s)
}

fn parse_rats(v: &[String]) -> Result<Vec<Rat>> {
    v.iter().map(|s| parse_rat(s)).collect()
}

fn fmt_rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(fmt_rat).collect()
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub vars: Vec<usize>,
    pub coef: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl From<&MultilinearPoly> for PolyJson {
    fn from(p: &MultilinearPoly) -> Self {
        PolyJson {
            n: p.nvars(),
            terms: p
                .terms()
                .map(|(m, c)| TermJson {
                    vars: to_one_based(*m),
                    coef: fmt_rat(c),
                })
                .collect(),
        }
    }
}

impl TryFrom<&PolyJson> for MultilinearPoly {
    type Error = Error;
    fn try_from(j: &PolyJson) -> Result<Self> {
        if j.n > MAX_VARS {
            return Err(Error::Parse(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            terms.push((from_one_based(&t.vars)?, parse_rat(&t.coef)?));
        }
        MultilinearPoly::from_terms(j.n, terms)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DeltaJson {
    Single {
        ground: Vec<usize>,
        #[serde(rename = "true")]
        trueset: Vec<usize>,
    },
    SymmetricSum {
        ground: Vec<usize>,
        fixed: Vec<usize>,
        prefix: Vec<usize>,
        k: usize,
    },
    Product {
        ground: Vec<usize>,
        #[serde(rename = "true")]
        trueset: Vec<usize>,
        rest: Box<DeltaJson>,
    },
}

impl From<DeltaStructured> for DeltaJson {
    fn from(d: DeltaStructured) -> Self {
        match d {
            DeltaStructured::Single { ground, trueset } => DeltaJson::Single {
                ground: to_one_based(ground),
                trueset: to_one_based(trueset),
            },
            DeltaStructured::SymmetricSum {
                ground,
                fixed,
                prefix,
                k,
            } => DeltaJson::SymmetricSum {
                ground: to_one_based(ground),
                fixed: to_one_based(fixed),
                prefix: to_one_based(prefix),
                k,
            },
            DeltaStructured::Product {
                ground,
                trueset,
                rest,
            } => DeltaJson::Product {
                ground: to_one_based(ground),
                trueset: to_one_based(trueset),
                rest: Box::new((*rest).into()),
            },
        }
    }
}

impl TryFrom<DeltaJson> for DeltaStructured {
    type Error = Error;
    fn try_from(j: DeltaJson) -> Result<Self> {
        match j {
            DeltaJson::Single { ground, trueset } => {
                DeltaStructured::single(from_one_based(&ground)?, from_one_based(&trueset)?)
            }
            DeltaJson::SymmetricSum {
                ground,
                fixed,
                prefix,
                k,
            } => DeltaStructured::symmetric_sum(
                from_one_based(&ground)?,
                from_one_based(&fixed)?,
                from_one_based(&prefix)?,
                k,
            ),
            DeltaJson::Product {
                ground,
                trueset,
                rest,
            } => DeltaStructured::product(
                from_one_based(&ground)?,
                from_one_based(&trueset)?,
                DeltaStructured::try_from(*rest)?,
            ),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct PackingRowJson {
    pub a: Vec<String>,
    pub b: String,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceJson {
    Cover { n: usize, rows: Vec<Vec<usize>> },
    Packing { n: usize, rows: Vec<PackingRowJson> },
    Knapsack { n: usize, b: String },
}

impl From<&Instance> for InstanceJson {
    fn from(inst: &Instance) -> Self {
        match inst {
            Instance::Cover(c) => InstanceJson::Cover {
                n: c.nvars(),
                rows: c.rows().iter().map(|r| to_one_based(*r)).collect(),
            },
            Instance::Packing(p) => InstanceJson::Packing {
                n: p.nvars(),
                rows: p
                    .rows()
                    .iter()
                    .map(|r| PackingRowJson {
                        a: fmt_rats(&r.coeffs),
                        b: fmt_rat(&r.bound),
                    })
                    .collect(),
            },
            Instance::Knapsack(k) => InstanceJson::Knapsack {
                n: k.nvars(),
                b: fmt_rat(k.bound()),
            },
        }
    }
}

impl TryFrom<&InstanceJson> for Instance {
    type Error = Error;
    fn try_from(j: &InstanceJson) -> Result<Self> {
        let check_n = |n: usize| {
            if n > MAX_VARS {
                Err(Error::Parse(format!(
                    "at most {MAX_VARS} variables supported"
                )))
            } else {
                Ok(())
            }
        };
        match j {
            InstanceJson::Cover { n, rows } => {
                check_n(*n)?;
                let rows = rows
                    .iter()
                    .map(|r| from_one_based(r))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Instance::Cover(CoverInstance::new(*n, rows)?))
            }
            InstanceJson::Packing { n, rows } => {
                check_n(*n)?;
                let rows = rows
                    .iter()
                    .map(|r| {
                        Ok(PackingRow {
                            coeffs: parse_rats(&r.a)?,
                            bound: parse_rat(&r.b)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Instance::Packing(PackingInstance::new(*n, rows)?))
            }
            InstanceJson::Knapsack { n, b } => {
                check_n(*n)?;
                Ok(Instance::Knapsack(KnapsackInstance::new(
                    *n,
                    parse_rat(b)?,
                )?))
            }
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct InequalityJson {
    pub a: Vec<String>,
    pub a0: String,
    pub sense: String,
}

impl From<&LinearInequality> for InequalityJson {
    fn from(i: &LinearInequality) -> Self {
        InequalityJson {
            a: fmt_rats(&i.coeffs),
            a0: fmt_rat(&i.rhs),
            sense: match i.sense {
                Sense::Covering => "ge".into(),
                Sense::Packing => "le".into(),
            },
        }
    }
}

impl TryFrom<&InequalityJson> for LinearInequality {
    type Error = Error;
    fn try_from(j: &InequalityJson) -> Result<Self> {
        let sense = match j.sense.as_str() {
            "ge" => Sense::Covering,
            "le" => Sense::Packing,
            other => {
                return Err(Error::Parse(format!(
                    "sense must be \"ge\" or \"le\", got {other:?}"
                )))
            }
        };
        if j.a.len() > MAX_VARS {
            return Err(Error::Parse(format!(
                "at most {MAX_VARS} variables supported"
            )));
        }
        Ok(LinearInequality {
            coeffs: parse_rats(&j.a)?,
            rhs: parse_rat(&j.a0)?,
            sense,
        })
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
pub enum TargetJson {
    Inequality(InequalityJson),
    Poly(PolyJson),
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiplierJson {
    Delta(DeltaJson),
    Square(PolyJson),
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceJson {
    Base,
    First {
        core: Vec<usize>,
    },
    Second {
        core: Vec<usize>,
        #[serde(rename = "true")]
        trueset: Vec<usize>,
        inner: Box<SourceJson>,
    },
    Third {
        core: Vec<usize>,
        fixed: Vec<usize>,
        prefix: Vec<usize>,
        k: usize,
    },
    Cardinality {
        k: usize,
    },
    Interpolation {
        point: Vec<usize>,
    },
    TruncatedDelta {
        set: Vec<usize>,
    },
    Residual {
        monomial: Vec<usize>,
    },
}

fn rows_to_one_based(rows: &[usize]) -> Vec<usize> {
    rows.iter().map(|i| i + 1).collect()
}

fn rows_from_one_based(rows: &[usize]) -> Result<Vec<usize>> {
    rows.iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| Error::Parse("row index 0 in a 1-based list".into()))
        })
        .collect()
}

impl From<&Source> for SourceJson {
    fn from(s: &Source) -> Self {
        match s {
            Source::Base => SourceJson::Base,
            Source::First { core } => SourceJson::First {
                core: rows_to_one_based(core),
            },
            Source::Second {
                core,
                trueset,
                inner,
            } => SourceJson::Second {
                core: rows_to_one_based(core),
                trueset: to_one_based(*trueset),
                inner: Box::new(inner.as_ref().into()),
            },
            Source::Third {
                core,
                fixed,
                prefix,
                k,
            } => SourceJson::Third {
                core: rows_to_one_based(core),
                fixed: to_one_based(*fixed),
                prefix: to_one_based(*prefix),
                k: *k,
            },
            Source::Cardinality { k } => SourceJson::Cardinality { k: *k },
            Source::Interpolation { point } => SourceJson::Interpolation {
                point: to_one_based(VarSet(*point)),
            },
            Source::TruncatedDelta { set } => SourceJson::TruncatedDelta {
                set: to_one_based(*set),
            },
            Source::Residual { monomial } => SourceJson::Residual {
                monomial: to_one_based(*monomial),
            },
        }
    }
}

impl TryFrom<&SourceJson> for Source {
    type Error = Error;
    fn try_from(j: &SourceJson) -> Result<Self> {
        Ok(match j {
            SourceJson::Base => Source::Base,
            SourceJson::First { core } => Source::First {
                core: rows_from_one_based(core)?,
            },
            SourceJson::Second {
                core,
                trueset,
                inner,
            } => Source::Second {
                core: rows_from_one_based(core)?,
                trueset: from_one_based(trueset)?,
                inner: Box::new(Source::try_from(inner.as_ref())?),
            },
            SourceJson::Third {
                core,
                fixed,
                prefix,
                k,
            } => Source::Third {
                core: rows_from_one_based(core)?,
                fixed: from_one_based(fixed)?,
                prefix: from_one_based(prefix)?,
                k: *k,
            },
            SourceJson::Cardinality { k } => Source::Cardinality { k: *k },
            SourceJson::Interpolation { point } => Source::Interpolation {
                point: from_one_based(point)?.0,
            },
            SourceJson::TruncatedDelta { set } => Source::TruncatedDelta {
                set: from_one_based(set)?,
            },
            SourceJson::Residual { monomial } => Source::Residual {
                monomial: from_one_based(monomial)?,
            },
        })
    }
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct CertTermJson {
    pub multiplier: MultiplierJson,
    pub lambda: Vec<String>,
    pub gamma: Vec<String>,
    pub mu: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceJson>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    /// Optional so that certificates can be checked against a separately supplied instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceJson>,
    pub target: TargetJson,
    pub terms: Vec<CertTermJson>,
    pub degree_bound: usize,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            instance: Some((&c.instance).into()),
            target: match &c.target {
                Target::Inequality(i) => TargetJson::Inequality(i.into()),
                Target::Poly(p) => TargetJson::Poly(p.into()),
            },
            terms: c
                .terms
                .iter()
                .map(|t| CertTermJson {
                    multiplier: match &t.multiplier {
                        Multiplier::Delta(d) => MultiplierJson::Delta(d.clone().into()),
                        Multiplier::Square(r) => MultiplierJson::Square(r.into()),
                    },
                    lambda: fmt_rats(&t.combo.lambda),
                    gamma: fmt_rats(&t.combo.gamma),
                    mu: fmt_rat(&t.combo.mu),
                    source: Some((&t.source).into()),
                })
                .collect(),
            degree_bound: c.degree_bound,
        }
    }
}

impl CertificateJson {
    /// Builds the certificate; `instance` is used when the file carries none.
    pub fn into_certificate(self, instance: Option<&Instance>) -> Result<Certificate> {
        let instance = match (&self.instance, instance) {
            (Some(j), _) => Instance::try_from(j)?,
            (None, Some(i)) => i.clone(),
            (None, None) => return Err(Error::Parse("certificate names no instance".into())),
        };
        let target = match &self.target {
            TargetJson::Inequality(i) => Target::Inequality(i.try_into()?),
            TargetJson::Poly(p) => Target::Poly(p.try_into()?),
        };
        let terms = self
            .terms
            .into_iter()
            .map(|t| {
                Ok(Term {
                    multiplier: match t.multiplier {
                        MultiplierJson::Delta(d) => Multiplier::Delta(d.try_into()?),
                        MultiplierJson::Square(p) => Multiplier::Square((&p).try_into()?),
                    },
                    combo: ConicCombo {
                        lambda: parse_rats(&t.lambda)?,
                        gamma: parse_rats(&t.gamma)?,
                        mu: parse_rat(&t.mu)?,
                    },
                    source: match &t.source {
                        Some(s) => s.try_into()?,
                        None => Source::Base,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Certificate {
            instance,
            target,
            terms,
            degree_bound: self.degree_bound,
        })
    }
}

fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json_string<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable value")
}

pub fn parse_poly(s: &str) -> Result<MultilinearPoly> {
    MultilinearPoly::try_from(&from_json_str::<PolyJson>(s)?)
}

pub fn poly_to_json(p: &MultilinearPoly) -> String {
    to_json_string(&PolyJson::from(p))
}

pub fn parse_delta(s: &str) -> Result<DeltaStructured> {
    DeltaStructured::try_from(from_json_str::<DeltaJson>(s)?)
}

pub fn parse_instance(s: &str) -> Result<Instance> {
    Instance::try_from(&from_json_str::<InstanceJson>(s)?)
}

pub fn instance_to_json(inst: &Instance) -> String {
    to_json_string(&InstanceJson::from(inst))
}

pub fn parse_inequality(s: &str) -> Result<LinearInequality> {
    LinearInequality::try_from(&from_json_str::<InequalityJson>(s)?)
}

pub fn inequality_to_json(i: &LinearInequality) -> String {
    to_json_string(&InequalityJson::from(i))
}

/// Parses a certificate file; `instance` is used when the file embeds none.
pub fn parse_certificate(s: &str, instance: Option<&Instance>) -> Result<Certificate> {
    from_json_str::<CertificateJson>(s)?.into_certificate(instance)
}

pub fn certificate_to_json(c: &Certificate) -> String {
    to_json_string(&CertificateJson::from(c))
}

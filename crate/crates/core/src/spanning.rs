//! Delta-structured spanning sets: the recursive cover family, plus the
//! monomial and cardinality families used for comparison relaxations.

use std::collections::{HashMap, HashSet};

use itertools::Itertools;
use serde::Serialize;

use crate::delta::DeltaStructured;
use crate::error::{Error, Result};
use crate::instances::CoverInstance;
use crate::json::DeltaJson;
use crate::limits::Limits;
use crate::poly::PartialAssignment;
use crate::varset::VarSet;

/// Which construction produced a member.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// The constant 1 of a pitch-0/1 set.
    Base,
    /// `delta^{V_C}_∅`.
    First { core: Vec<usize> },
    /// `delta^{V_C}_J` times a member built for the restricted instance;
    /// `inner` refers to that instance's row indices.
    Second {
        core: Vec<usize>,
        trueset: VarSet,
        inner: Box<Provenance>,
    },
    /// A symmetric sum over `V_C` with the given fixed part, prefix and cardinality.
    Third {
        core: Vec<usize>,
        fixed: VarSet,
        prefix: VarSet,
        k: usize,
    },
    /// A monomial of the standard degree-d family.
    Monomial,
    /// The indicator of "exactly k ones".
    Cardinality { k: usize },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Base => "Base",
            Provenance::First { .. } => "First",
            Provenance::Second { .. } => "Second",
            Provenance::Third { .. } => "Third",
            Provenance::Monomial => "Monomial",
            Provenance::Cardinality { .. } => "Cardinality",
        }
    }

    pub fn core(&self) -> &[usize] {
        match self {
            Provenance::First { core }
            | Provenance::Second { core, .. }
            | Provenance::Third { core, .. } => core,
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Member {
    pub poly: DeltaStructured,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningSet {
    pub nvars: usize,
    /// Pitch parameter (or degree for monomial families).
    pub pi: usize,
    /// Canonical description of the instance the set was built for.
    pub fingerprint: String,
    pub members: Vec<Member>,
}

impl SpanningSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The set {1}.
    pub fn unit(nvars: usize) -> Self {
        SpanningSet {
            nvars,
            pi: 0,
            fingerprint: String::new(),
            members: vec![Member {
                poly: DeltaStructured::one(),
                provenance: Provenance::Base,
            }],
        }
    }

    /// All monomials of degree at most `d`.
    pub fn monomials(nvars: usize, d: usize) -> Self {
        let members = (0..=d.min(nvars))
            .flat_map(|k| (0..nvars).combinations(k))
            .map(|vars| Member {
                poly: DeltaStructured::monomial(vars.into_iter().collect()),
                provenance: Provenance::Monomial,
            })
            .collect();
        SpanningSet {
            nvars,
            pi: d,
            fingerprint: format!("monomials(n={nvars},d={d})"),
            members,
        }
    }

    /// The symmetric family {sum_{|I|=k} delta_I : k = 0..n}.
    pub fn cardinality(nvars: usize) -> Self {
        let all = VarSet::full(nvars);
        let members = (0..=nvars)
            .map(|k| Member {
                poly: DeltaStructured::SymmetricSum {
                    ground: all,
                    fixed: VarSet::EMPTY,
                    prefix: VarSet::EMPTY,
                    k,
                },
                provenance: Provenance::Cardinality { k },
            })
            .collect();
        SpanningSet {
            nvars,
            pi: 0,
            fingerprint: format!("cardinality(n={nvars})"),
            members,
        }
    }

    /// Whether some member has the same function table as `d`.
    pub fn contains_function(&self, d: &DeltaStructured) -> bool {
        let bits = d.point_bits(self.nvars);
        self.members
            .iter()
            .any(|m| m.poly.point_bits(self.nvars) == bits)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            tag: &'static str,
            #[serde(rename = "C")]
            core: Vec<usize>,
            params: serde_json::Value,
            poly: DeltaJson,
        }
        let one_based = |s: VarSet| s.iter().map(|i| i + 1).collect::<Vec<_>>();
        let entries: Vec<Entry> = self
            .members
            .iter()
            .map(|m| {
                let params = match &m.provenance {
                    Provenance::Second { trueset, inner, .. } => serde_json::json!({
                        "J": one_based(*trueset),
                        "inner": inner.tag(),
                        "inner_C": inner.core().iter().map(|i| i + 1).collect::<Vec<_>>(),
                    }),
                    Provenance::Third {
                        fixed, prefix, k, ..
                    } => serde_json::json!({
                        "I": one_based(*fixed),
                        "P": one_based(*prefix),
                        "k": k,
                    }),
                    Provenance::Cardinality { k } => serde_json::json!({ "k": k }),
                    _ => serde_json::json!({}),
                };
                Entry {
                    tag: m.provenance.tag(),
                    core: m.provenance.core().iter().map(|i| i + 1).collect(),
                    params,
                    poly: m.poly.clone().into(),
                }
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("serializable spanning set")
    }
}

/// All row subsets of size at most `pi`, smallest first, lexicographic within a size.
pub fn core_family(inst: &CoverInstance, pi: usize) -> Vec<Vec<usize>> {
    (0..=pi.min(inst.num_rows()))
        .flat_map(|k| (0..inst.num_rows()).combinations(k))
        .collect()
}

pub fn overlap_set(inst: &CoverInstance, core: &[usize]) -> Result<VarSet> {
    inst.overlap_set(core)
}

fn fingerprint(inst: &CoverInstance) -> String {
    let rows: Vec<String> = inst.rows().iter().map(|r| r.to_string()).collect();
    format!("cover(n={};{})", inst.nvars(), rows.join(";"))
}

type Cache = HashMap<(CoverInstance, usize), Vec<Member>>;

fn build_members(inst: &CoverInstance, pi: usize, cache: &mut Cache) -> Result<Vec<Member>> {
    if pi <= 1 {
        return Ok(vec![Member {
            poly: DeltaStructured::one(),
            provenance: Provenance::Base,
        }]);
    }
    if let Some(m) = cache.get(&(inst.clone(), pi)) {
        return Ok(m.clone());
    }
    let mut out = Vec::new();
    for core in core_family(inst, pi) {
        let v = inst.overlap_set(&core)?;
        out.push(Member {
            poly: DeltaStructured::single(v, VarSet::EMPTY)?,
            provenance: Provenance::First { core: core.clone() },
        });
        for j in v.subsets() {
            if j.is_empty() || j.len() >= pi {
                continue;
            }
            let sigma = PartialAssignment::new(j, v - j)?;
            let restricted = match inst.restrict(&sigma) {
                Ok(r) => r.instance,
                Err(Error::EmptyRow(_)) => continue,
                Err(e) => return Err(e),
            };
            for q in build_members(&restricted, pi - j.len(), cache)? {
                out.push(Member {
                    poly: times_delta(v, j, q.poly)?,
                    provenance: Provenance::Second {
                        core: core.clone(),
                        trueset: j,
                        inner: Box::new(q.provenance),
                    },
                });
            }
        }
        for prefix in v.subsets().filter(|p| p.len() <= pi) {
            let free = (v - prefix).len();
            for fixed in prefix.subsets() {
                for k in pi.saturating_sub(fixed.len())..=free {
                    out.push(Member {
                        poly: DeltaStructured::symmetric_sum(v, fixed, prefix, k)?,
                        provenance: Provenance::Third {
                            core: core.clone(),
                            fixed,
                            prefix,
                            k,
                        },
                    });
                }
            }
        }
    }
    cache.insert((inst.clone(), pi), out.clone());
    Ok(out)
}

/// `delta^ground_trueset * rest`, collapsing a constant `rest` to a single delta.
pub fn times_delta(
    ground: VarSet,
    trueset: VarSet,
    rest: DeltaStructured,
) -> Result<DeltaStructured> {
    match rest {
        DeltaStructured::Single {
            ground: g,
            trueset: t,
        } if g.is_empty() => {
            debug_assert!(t.is_empty());
            DeltaStructured::single(ground, trueset)
        }
        rest => DeltaStructured::product(ground, trueset, rest),
    }
}

/// Removes members whose function table repeats an earlier one (or, above
/// the hypercube limit, whose structure repeats).
pub fn dedup_members(nvars: usize, members: Vec<Member>, limits: &Limits) -> Vec<Member> {
    let by_table = nvars <= limits.hypercube;
    let mut seen_tables: HashSet<Vec<u64>> = HashSet::new();
    let mut seen_structs: HashSet<DeltaStructured> = HashSet::new();
    members
        .into_iter()
        .filter(|m| {
            if by_table {
                seen_tables.insert(m.poly.point_bits(nvars))
            } else {
                seen_structs.insert(m.poly.clone())
            }
        })
        .collect()
}

/// The spanning set for pitch parameter `pi`.
pub fn build_spanning_set(inst: &CoverInstance, pi: usize, limits: &Limits) -> Result<SpanningSet> {
    limits.check_pitch(pi)?;
    limits.check_rows(inst.num_rows())?;
    let mut cache = Cache::new();
    let members = build_members(inst, pi, &mut cache)?;
    Ok(SpanningSet {
        nvars: inst.nvars(),
        pi,
        fingerprint: fingerprint(inst),
        members: dedup_members(inst.nvars(), members, limits),
    })
}

pub fn spanning_size(inst: &CoverInstance, pi: usize, limits: &Limits) -> Result<usize> {
    Ok(build_spanning_set(inst, pi, limits)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_full_circulant;

    fn vs(ix: &[usize]) -> VarSet {
        VarSet::from_indices(ix.iter().copied())
    }

    #[test]
    fn core_family_counts() {
        let fc4 = gen_full_circulant(4).unwrap();
        assert_eq!(core_family(&fc4, 2).len(), 11);
        assert_eq!(core_family(&fc4, 0), vec![Vec::<usize>::new()]);
        let fc3 = gen_full_circulant(3).unwrap();
        assert_eq!(core_family(&fc3, 3).len(), 8);
        assert_eq!(core_family(&fc3, 5).len(), 8);
    }

    #[test]
    fn small_pitch_gives_unit_set() {
        let l = Limits::default();
        let fc = gen_full_circulant(5).unwrap();
        for pi in [0, 1] {
            let s = build_spanning_set(&fc, pi, &l).unwrap();
            assert_eq!(s.members.len(), 1);
            assert_eq!(s.members[0].poly, DeltaStructured::one());
        }
    }

    #[test]
    fn disjoint_rows_collapse_to_one() {
        let l = Limits::default();
        let inst = CoverInstance::new(6, vec![vs(&[0, 1]), vs(&[2, 3]), vs(&[4, 5])]).unwrap();
        for pi in 0..=3 {
            assert_eq!(spanning_size(&inst, pi, &l).unwrap(), 1);
        }
    }

    #[test]
    fn full_circulant_contains_the_example_family() {
        let l = Limits::default();
        for n in 4..=7 {
            let fc = gen_full_circulant(n).unwrap();
            let s = build_spanning_set(&fc, 2, &l).unwrap();
            let v = VarSet::full(n) - vs(&[0, 1]);
            let polys: Vec<&DeltaStructured> = s.members.iter().map(|m| &m.poly).collect();
            let has = |d: &DeltaStructured| s.contains_function(d);
            assert!(has(&DeltaStructured::single(v, VarSet::EMPTY).unwrap()));
            for i in v.iter() {
                assert!(has(
                    &DeltaStructured::single(v, VarSet::singleton(i)).unwrap()
                ));
            }
            for k in 2..=v.len() {
                let d = DeltaStructured::symmetric_sum(v, VarSet::EMPTY, VarSet::EMPTY, k).unwrap();
                assert!(polys.contains(&&d), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn members_are_idempotent_indicators() {
        let l = Limits::default();
        let fc = gen_full_circulant(5).unwrap();
        let s = build_spanning_set(&fc, 3, &l).unwrap();
        for m in &s.members {
            let p = m.poly.expand(5).unwrap();
            assert_eq!(&p * &p, p);
        }
    }

    #[test]
    fn third_family_members_with_distinct_k_are_disjoint() {
        let l = Limits::default();
        let fc = gen_full_circulant(6).unwrap();
        let s = build_spanning_set(&fc, 2, &l).unwrap();
        let thirds: Vec<_> = s
            .members
            .iter()
            .filter_map(|m| match &m.provenance {
                Provenance::Third {
                    core,
                    fixed,
                    prefix,
                    k,
                } => Some((core.clone(), *fixed, *prefix, *k, &m.poly)),
                _ => None,
            })
            .collect();
        for a in &thirds {
            for b in &thirds {
                if a.0 == b.0 && a.1 == b.1 && a.2 == b.2 && a.3 != b.3 {
                    let pa = a.4.expand(6).unwrap();
                    let pb = b.4.expand(6).unwrap();
                    assert!((&pa * &pb).is_zero());
                }
            }
        }
    }

    #[test]
    fn json_dump_is_tagged() {
        let l = Limits::default();
        let fc = gen_full_circulant(4).unwrap();
        let s = build_spanning_set(&fc, 2, &l).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), s.len());
        assert_eq!(arr[0]["tag"], "First");
    }
}

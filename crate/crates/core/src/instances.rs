//! Instance construction: the two adversarial builtin instances, SWM
//! instances and their reduction to partition-matroid form, the dummy and
//! copy transformations, seeded random generators, and file serialization.
//!
//! # File formats
//!
//! Instances travel as UTF-8 JSON documents. A weighted-coverage instance:
//!
//! ```json
//! {
//!   "kind": "weighted-coverage",
//!   "name": "example",
//!   "universe": {"p": 2.0, "q": 1.0},
//!   "parts": [
//!     {"name": "P1", "elements": {"a": ["p"], "b": ["p", "q"]}}
//!   ]
//! }
//! ```
//!
//! The universe may instead be a plain list of point names, meaning every
//! weight is 1. An SWM instance:
//!
//! ```json
//! {
//!   "kind": "swm-coverage",
//!   "items": ["i1", "i2"],
//!   "bidders": [
//!     {"name": "b1", "universe": {"p": 3.0}, "covers": {"i1": ["p"]}}
//!   ]
//! }
//! ```
//!
//! Unknown keys are rejected at every level. Element lists inside a part are
//! object keys, so loading orders them by name; every constructor in this
//! module already emits members in sorted name order, making write-then-read
//! an exact identity for crate-produced instances. SWM documents are reduced
//! to partition-matroid form on load; writing an instance whose oracle is an
//! SWM composite emits the SWM document back.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SglError};
use crate::greedy::TieBreakPolicy;
use crate::ground::{make_partition, PartitionMatroid};
use crate::oracle::{OracleKind, ValueOracle};
use crate::rng::{rng_from_seed, sample_distinct, uniform_below};

/// A partition matroid coupled with a value oracle over the same ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    matroid: PartitionMatroid,
    oracle: ValueOracle,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        matroid: PartitionMatroid,
        oracle: ValueOracle,
    ) -> Result<Instance> {
        if matroid.ground() != oracle.ground() {
            return Err(SglError::InvariantViolation(
                "oracle and matroid are defined over different ground sets".into(),
            ));
        }
        Ok(Instance {
            name: name.into(),
            matroid,
            oracle,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matroid(&self) -> &PartitionMatroid {
        &self.matroid
    }

    pub fn oracle(&self) -> &ValueOracle {
        &self.oracle
    }

    /// Same instance with the oracle wrapped in an evaluation counter.
    pub fn counting(self) -> Instance {
        Instance {
            name: self.name,
            matroid: self.matroid,
            oracle: self.oracle.wrap_counting(),
        }
    }
}

/// `(element, covered points)` pairs, the cover side of a part or bidder.
pub type CoverList = Vec<(String, Vec<String>)>;

/// Builds a weighted-coverage instance from named parts. `universe` is
/// canonicalized to sorted point-name order; each part's `(element, covered
/// points)` pairs keep their given order, which every caller passes sorted.
pub fn build_coverage(
    name: &str,
    universe: Vec<(String, f64)>,
    parts: Vec<(String, CoverList)>,
) -> Result<Instance> {
    let mut universe = universe;
    universe.sort_by(|a, b| a.0.cmp(&b.0));
    let mut point_ix: HashMap<&str, u32> = HashMap::new();
    for (ix, (p, _)) in universe.iter().enumerate() {
        if point_ix.insert(p.as_str(), ix as u32).is_some() {
            return Err(SglError::DuplicateName(p.clone()));
        }
    }

    let part_spec: Vec<(String, Vec<String>)> = parts
        .iter()
        .map(|(pname, members)| {
            (
                pname.clone(),
                members.iter().map(|(e, _)| e.clone()).collect(),
            )
        })
        .collect();
    let matroid = make_partition(&part_spec)?;

    let mut covers: Vec<Vec<u32>> = vec![Vec::new(); matroid.ground().len()];
    for (_, members) in &parts {
        for (element, points) in members {
            let id = matroid.ground().id(element)?;
            let ids: Result<Vec<u32>> = points
                .iter()
                .map(|p| {
                    point_ix.get(p.as_str()).copied().ok_or_else(|| {
                        SglError::InvariantViolation(format!(
                            "element `{element}` covers undeclared universe point `{p}`"
                        ))
                    })
                })
                .collect();
            covers[id as usize] = ids?;
        }
    }

    let oracle = ValueOracle::weighted_coverage(matroid.ground().clone(), universe, covers)?;
    Instance::new(name, matroid, oracle)
}

/// The 12-element unit-weight coverage instance on which every arrival order
/// greedily collects value 7 against an optimum of 12.
pub fn build_instance_7_12() -> Instance {
    let pts = |names: &[&str]| names.iter().map(|p| p.to_string()).collect::<Vec<_>>();
    let universe: Vec<(String, f64)> = ["alpha", "beta", "gamma"]
        .iter()
        .flat_map(|fam| (1..=4).map(move |i| (format!("{fam}{i}"), 1.0)))
        .collect();
    let parts = vec![
        (
            "P_x".to_string(),
            vec![
                (
                    "x1".to_string(),
                    pts(&["alpha1", "alpha2", "alpha3", "alpha4"]),
                ),
                (
                    "x2".to_string(),
                    pts(&["beta1", "beta2", "gamma1", "gamma2"]),
                ),
                ("x3".to_string(), pts(&["beta1", "gamma3"])),
                ("x4".to_string(), pts(&["beta3", "gamma1"])),
            ],
        ),
        (
            "P_y".to_string(),
            vec![
                ("y1".to_string(), pts(&["beta1", "beta2", "beta3", "beta4"])),
                (
                    "y2".to_string(),
                    pts(&["alpha1", "alpha2", "gamma1", "gamma2"]),
                ),
                ("y3".to_string(), pts(&["alpha1", "gamma3"])),
                ("y4".to_string(), pts(&["alpha3", "gamma1"])),
            ],
        ),
        (
            "P_z".to_string(),
            vec![
                (
                    "z1".to_string(),
                    pts(&["gamma1", "gamma2", "gamma3", "gamma4"]),
                ),
                (
                    "z2".to_string(),
                    pts(&["alpha1", "alpha2", "beta1", "beta2"]),
                ),
                ("z3".to_string(), pts(&["alpha1", "beta3"])),
                ("z4".to_string(), pts(&["alpha3", "beta1"])),
            ],
        ),
    ];
    build_coverage("7-12", universe, parts).expect("static instance")
}

/// Canonical name of the z element with unordered first index pair {i, j}
/// and third index k.
fn z_name(i: usize, j: usize, k: usize) -> String {
    format!("z{}{}{}", i.min(j), i.max(j), k)
}

/// The 32-element weighted coverage instance witnessing the 19/33 upper
/// bound: an appropriate tie policy holds every arrival order to value 152
/// against an optimum of 264.
pub fn build_instance_19_33() -> Instance {
    let fams = ["a", "b", "c", "d", "e", "f", "g"];
    let weights = [14.0, 14.0, 8.0, 5.0, 4.0, 7.0, 14.0];
    let universe: Vec<(String, f64)> = fams
        .iter()
        .zip(weights)
        .flat_map(|(fam, w)| (1..=4).map(move |i| (format!("{fam}{i}"), w)))
        .collect();

    let others = |i: usize| (1..=4).filter(move |&j| j != i);
    let mut parts = Vec::with_capacity(4);
    for i in 1..=4 {
        let mut members: Vec<(String, Vec<String>)> = Vec::with_capacity(8);
        members.push((
            format!("o{i}"),
            fams.iter().map(|fam| format!("{fam}{i}")).collect(),
        ));
        members.push((
            format!("x{i}"),
            others(i)
                .flat_map(|j| [format!("b{j}"), format!("c{j}")])
                .collect(),
        ));
        // y_{ji} for j ≠ i covers {c_j, e_i} ∪ {d_k, e_k, f_k : k ∉ {j, i}}.
        for j in others(i) {
            let mut cover = vec![format!("c{j}"), format!("e{i}")];
            for k in (1..=4).filter(|&k| k != i && k != j) {
                cover.extend([format!("d{k}"), format!("e{k}"), format!("f{k}")]);
            }
            members.push((format!("y{j}{i}"), cover));
        }
        // z_{jki} for {j, k} ⊆ [4] ∖ {i}, j < k, covers {f_j, f_k, g_l}.
        for j in others(i) {
            for k in others(i).filter(|&k| k > j) {
                let l = (1..=4).find(|&l| l != i && l != j && l != k).unwrap();
                members.push((
                    z_name(j, k, i),
                    vec![format!("f{j}"), format!("f{k}"), format!("g{l}")],
                ));
            }
        }
        parts.push((format!("P{i}"), members));
    }

    build_coverage("19-33", universe, parts).expect("static instance")
}

/// Builtin instances addressable by name from the CLI.
pub fn builtin_instance(name: &str) -> Option<Instance> {
    match name {
        "7-12" => Some(build_instance_7_12()),
        "19-33" => Some(build_instance_19_33()),
        _ => None,
    }
}

/// One bidder of an SWM instance: a weighted-coverage utility over a private
/// point universe, with one cover list per item.
#[derive(Debug, Clone, PartialEq)]
pub struct SwmBidder {
    name: String,
    /// Point names in sorted order; ids are positions here.
    points: Vec<String>,
    weights: Vec<f64>,
    /// Covered point ids per item index, sorted ascending.
    covers: Vec<Vec<u32>>,
}

impl SwmBidder {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Utility of an item bundle: total weight of the covered point union.
    /// Summation runs in ascending point order, matching the coverage
    /// oracle's arithmetic exactly.
    pub fn utility_of_ids(&self, items: &[u32]) -> f64 {
        let mut hit = vec![false; self.points.len()];
        for &item in items {
            for &p in &self.covers[item as usize] {
                hit[p as usize] = true;
            }
        }
        self.weights
            .iter()
            .zip(&hit)
            .filter(|(_, &h)| h)
            .map(|(w, _)| w)
            .sum()
    }
}

/// Items plus bidders with submodular (coverage) utilities; welfare of an
/// allocation is the sum of per-bidder utilities of the bundles.
#[derive(Debug, Clone, PartialEq)]
pub struct SwmInstance {
    name: String,
    items: Vec<String>,
    bidders: Vec<SwmBidder>,
}

impl SwmInstance {
    pub fn builder(name: impl Into<String>) -> SwmInstanceBuilder {
        SwmInstanceBuilder {
            name: name.into(),
            items: Vec::new(),
            bidders: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn bidders(&self) -> &[SwmBidder] {
        &self.bidders
    }
}

type BidderSpec = (String, Vec<(String, f64)>, CoverList);

pub struct SwmInstanceBuilder {
    name: String,
    items: Vec<String>,
    bidders: Vec<BidderSpec>,
}

impl SwmInstanceBuilder {
    pub fn items<I, S>(mut self, items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.items.extend(items.into_iter().map(Into::into));
        self
    }

    /// Adds a bidder with the given private universe and per-item covers;
    /// items without an entry cover nothing for this bidder.
    pub fn bidder<U, C, S>(mut self, name: impl Into<String>, universe: U, covers: C) -> Self
    where
        U: IntoIterator<Item = (String, f64)>,
        C: IntoIterator<Item = (S, Vec<S>)>,
        S: Into<String>,
    {
        self.bidders.push((
            name.into(),
            universe.into_iter().collect(),
            covers
                .into_iter()
                .map(|(item, pts)| (item.into(), pts.into_iter().map(Into::into).collect()))
                .collect(),
        ));
        self
    }

    pub fn build(self) -> Result<SwmInstance> {
        if self.items.is_empty() {
            return Err(SglError::InvariantViolation(
                "an SWM instance needs at least one item".into(),
            ));
        }
        if self.bidders.is_empty() {
            return Err(SglError::InvariantViolation(
                "an SWM instance needs at least one bidder".into(),
            ));
        }
        let mut item_ix: HashMap<&str, u32> = HashMap::new();
        for (ix, item) in self.items.iter().enumerate() {
            crate::ground::validate_name(item)?;
            if item_ix.insert(item.as_str(), ix as u32).is_some() {
                return Err(SglError::DuplicateName(item.clone()));
            }
        }

        let mut bidders = Vec::with_capacity(self.bidders.len());
        let mut bidder_names: HashMap<String, ()> = HashMap::new();
        for (name, universe, cover_spec) in &self.bidders {
            crate::ground::validate_name(name)?;
            if bidder_names.insert(name.clone(), ()).is_some() {
                return Err(SglError::DuplicateName(name.clone()));
            }
            let mut universe = universe.clone();
            universe.sort_by(|a, b| a.0.cmp(&b.0));
            let mut point_ix: HashMap<&str, u32> = HashMap::new();
            let mut points = Vec::with_capacity(universe.len());
            let mut weights = Vec::with_capacity(universe.len());
            for (p, w) in &universe {
                crate::ground::validate_name(p)?;
                if !w.is_finite() || *w < 0.0 {
                    return Err(SglError::InvariantViolation(format!(
                        "bidder `{name}`: point `{p}` has weight {w}"
                    )));
                }
                if point_ix.insert(p.as_str(), points.len() as u32).is_some() {
                    return Err(SglError::DuplicateName(p.clone()));
                }
                points.push(p.clone());
                weights.push(*w);
            }
            let mut covers: Vec<Vec<u32>> = vec![Vec::new(); self.items.len()];
            let mut seen_items: HashMap<&str, ()> = HashMap::new();
            for (item, pts) in cover_spec {
                if seen_items.insert(item.as_str(), ()).is_some() {
                    return Err(SglError::DuplicateName(item.clone()));
                }
                let ix = *item_ix
                    .get(item.as_str())
                    .ok_or_else(|| SglError::UnknownElement(item.clone()))?;
                let mut ids: Vec<u32> = pts
                    .iter()
                    .map(|p| {
                        point_ix.get(p.as_str()).copied().ok_or_else(|| {
                            SglError::InvariantViolation(format!(
                                "bidder `{name}`: item `{item}` covers undeclared point `{p}`"
                            ))
                        })
                    })
                    .collect::<Result<_>>()?;
                ids.sort_unstable();
                ids.dedup();
                covers[ix as usize] = ids;
            }
            bidders.push(SwmBidder {
                name: name.clone(),
                points,
                weights,
                covers,
            });
        }

        Ok(SwmInstance {
            name: self.name,
            items: self.items,
            bidders,
        })
    }
}

/// Element name of the assignment "item u goes to bidder i".
fn assignment_name(item: &str, bidder: &str) -> String {
    format!("{item}@{bidder}")
}

/// The welfare-preserving reduction: one ground element per (item, bidder)
/// assignment, one part per item, and the composite objective
/// f(S) = Σ_i f_i({u | (u,i) ∈ S}). A base is exactly an allocation of every
/// item, and its value is the allocation's welfare.
pub fn reduce_swm(swm: &SwmInstance) -> Result<Instance> {
    let parts: Vec<(String, Vec<String>)> = swm
        .items
        .iter()
        .map(|item| {
            (
                item.clone(),
                swm.bidders
                    .iter()
                    .map(|b| assignment_name(item, b.name()))
                    .collect(),
            )
        })
        .collect();
    let matroid = make_partition(&parts)?;
    let mut elem_map = Vec::with_capacity(matroid.ground().len());
    for item_ix in 0..swm.items.len() as u32 {
        for bidder_ix in 0..swm.bidders.len() as u32 {
            elem_map.push(Some((item_ix, bidder_ix)));
        }
    }
    let oracle = ValueOracle::swm_composite(matroid.ground().clone(), swm.clone(), elem_map)?;
    Instance::new(format!("{}-reduced", swm.name), matroid, oracle)
}

/// The tie policy under which the reduced greedy mirrors [`crate::greedy::swm_greedy`]
/// exactly: every assignment name listed explicitly, items major, bidders in
/// bidder order within each item, so tied assignments resolve to the
/// earliest bidder.
pub fn swm_matching_tie_policy(swm: &SwmInstance) -> TieBreakPolicy {
    let tokens = swm
        .items
        .iter()
        .flat_map(|item| {
            swm.bidders
                .iter()
                .map(move |b| assignment_name(item, b.name()))
        })
        .collect();
    TieBreakPolicy::PriorityList(tokens)
}

/// The reduced instance rebuilt as a plain weighted-coverage instance over
/// the disjoint union of the bidders' universes (points tagged
/// "point@bidder"). Value-identical to [`reduce_swm`]'s composite oracle and
/// self-contained on disk.
pub fn swm_to_coverage_instance(swm: &SwmInstance) -> Result<Instance> {
    let universe: Vec<(String, f64)> = swm
        .bidders
        .iter()
        .flat_map(|b| {
            b.points
                .iter()
                .zip(&b.weights)
                .map(|(p, &w)| (assignment_name(p, b.name()), w))
        })
        .collect();
    let parts: Vec<(String, CoverList)> = swm
        .items
        .iter()
        .enumerate()
        .map(|(item_ix, item)| {
            (
                item.clone(),
                swm.bidders
                    .iter()
                    .map(|b| {
                        (
                            assignment_name(item, b.name()),
                            b.covers[item_ix]
                                .iter()
                                .map(|&p| assignment_name(&b.points[p as usize], b.name()))
                                .collect(),
                        )
                    })
                    .collect(),
            )
        })
        .collect();
    build_coverage(&format!("{}-reduced", swm.name), universe, parts)
}

/// Adds `extra` dummy elements, each alone in a new singleton part, without
/// touching the objective: f(S) = f(S ∖ dummies). Grows m while preserving
/// every greedy outcome on the real parts.
pub fn extend_with_dummies(instance: &Instance, extra: usize) -> Result<Instance> {
    if extra == 0 {
        return Ok(instance.clone());
    }
    if matches!(instance.oracle.kind, OracleKind::Counting { .. }) {
        return Err(SglError::Unsupported(
            "extending a counting-wrapped instance".into(),
        ));
    }
    let ground = instance.matroid.ground();
    let taken: std::collections::HashSet<&str> =
        instance.matroid.parts().iter().map(|p| p.name()).collect();
    let mut dummies = Vec::with_capacity(extra);
    let mut k = 1usize;
    while dummies.len() < extra {
        let name = format!("dummy#{k}");
        k += 1;
        if !ground.contains(&name) && !taken.contains(name.as_str()) {
            dummies.push(name);
        }
    }

    let mut parts: Vec<(String, Vec<String>)> = instance
        .matroid
        .parts()
        .iter()
        .map(|p| {
            (
                p.name().to_string(),
                p.members()
                    .iter()
                    .map(|&id| ground.name(id).to_string())
                    .collect(),
            )
        })
        .collect();
    for d in &dummies {
        parts.push((d.clone(), vec![d.clone()]));
    }
    let matroid = make_partition(&parts)?;
    let g2 = matroid.ground().clone();

    let oracle = match &instance.oracle.kind {
        OracleKind::WeightedCoverage(c) => {
            let mut covers = c.covers.clone();
            covers.extend(std::iter::repeat_with(Vec::new).take(extra));
            ValueOracle::weighted_coverage(
                g2,
                c.points
                    .iter()
                    .cloned()
                    .zip(c.weights.iter().copied())
                    .collect(),
                covers,
            )?
        }
        OracleKind::Modular { weights } => {
            let mut weights = weights.clone();
            weights.extend(std::iter::repeat_n(0.0, extra));
            ValueOracle::modular(g2, weights)?
        }
        OracleKind::SwmComposite { swm, elem_map } => {
            let mut elem_map = elem_map.clone();
            elem_map.extend(std::iter::repeat_n(None, extra));
            ValueOracle::swm_composite(g2, swm.clone(), elem_map)?
        }
        OracleKind::Counting { .. } => unreachable!("rejected above"),
    };
    Instance::new(format!("{}+{}d", instance.name, extra), matroid, oracle)
}

/// k disjoint renamed copies of a coverage or modular instance; the oracle
/// of the composition is the sum of the per-copy oracles, so the optimum and
/// every greedy value scale by exactly k while the ratio stays fixed.
pub fn compose_copies(instance: &Instance, k: usize) -> Result<Instance> {
    if k == 0 {
        return Err(SglError::OutOfRange {
            name: "copies",
            value: 0.0,
            range: "k >= 1",
        });
    }
    if k == 1 {
        return Ok(instance.clone());
    }
    let ground = instance.matroid.ground();
    let rename = |name: &str, copy: usize| format!("{name}#{copy}");

    match &instance.oracle.kind {
        OracleKind::WeightedCoverage(c) => {
            let mut universe = Vec::with_capacity(k * c.points.len());
            let mut parts = Vec::with_capacity(k * instance.matroid.m());
            for copy in 1..=k {
                universe.extend(
                    c.points
                        .iter()
                        .zip(&c.weights)
                        .map(|(p, &w)| (rename(p, copy), w)),
                );
                for part in instance.matroid.parts() {
                    let members = part
                        .members()
                        .iter()
                        .map(|&id| {
                            (
                                rename(ground.name(id), copy),
                                c.covers[id as usize]
                                    .iter()
                                    .map(|&p| rename(&c.points[p as usize], copy))
                                    .collect(),
                            )
                        })
                        .collect();
                    parts.push((rename(part.name(), copy), members));
                }
            }
            build_coverage(&format!("{}x{k}", instance.name), universe, parts)
        }
        OracleKind::Modular { weights } => {
            let mut parts = Vec::with_capacity(k * instance.matroid.m());
            let mut new_weights = Vec::with_capacity(k * weights.len());
            for copy in 1..=k {
                for part in instance.matroid.parts() {
                    let members: Vec<String> = part
                        .members()
                        .iter()
                        .map(|&id| rename(ground.name(id), copy))
                        .collect();
                    new_weights.extend(part.members().iter().map(|&id| weights[id as usize]));
                    parts.push((rename(part.name(), copy), members));
                }
            }
            let matroid = make_partition(&parts)?;
            let oracle = ValueOracle::modular(matroid.ground().clone(), new_weights)?;
            Instance::new(format!("{}x{k}", instance.name), matroid, oracle)
        }
        _ => Err(SglError::Unsupported(format!(
            "composing copies of a {} instance",
            instance.oracle.kind_name()
        ))),
    }
}

fn check_positive(name: &'static str, value: usize) -> Result<()> {
    if value == 0 {
        Err(SglError::OutOfRange {
            name,
            value: 0.0,
            range: ">= 1",
        })
    } else {
        Ok(())
    }
}

fn padded(prefix: &str, ix: usize, total: usize) -> String {
    let width = total.to_string().len();
    format!("{prefix}{ix:0width$}")
}

/// Seeded random weighted-coverage instance: `m` parts of `part_size`
/// elements, integer point weights in 1..=max_weight, every element covering
/// a non-empty random point subset. Identical seeds give identical
/// instances.
pub fn random_coverage_instance(
    m: usize,
    part_size: usize,
    universe_size: usize,
    max_weight: u64,
    seed: u64,
) -> Result<Instance> {
    check_positive("parts", m)?;
    check_positive("part_size", part_size)?;
    check_positive("universe_size", universe_size)?;
    check_positive("max_weight", max_weight as usize)?;
    let mut rng = rng_from_seed(seed);

    let universe: Vec<(String, f64)> = (1..=universe_size)
        .map(|i| {
            (
                padded("u", i, universe_size),
                (uniform_below(&mut rng, max_weight) + 1) as f64,
            )
        })
        .collect();
    let parts: Vec<(String, CoverList)> = (1..=m)
        .map(|p| {
            let members = (1..=part_size)
                .map(|e| {
                    let size = 1 + uniform_below(&mut rng, universe_size as u64) as usize;
                    let cover = sample_distinct(&mut rng, size, universe_size)
                        .into_iter()
                        .map(|ix| padded("u", ix + 1, universe_size))
                        .collect();
                    (
                        format!("{}_{}", padded("e", p, m), padded("", e, part_size)),
                        cover,
                    )
                })
                .collect();
            (padded("P", p, m), members)
        })
        .collect();

    build_coverage(&format!("rnd{seed}"), universe, parts)
}

/// Seeded random SWM instance with integer point weights; item covers may be
/// empty (a bidder can value an item at zero).
pub fn random_swm_instance(
    items: usize,
    bidders: usize,
    universe_size: usize,
    max_weight: u64,
    seed: u64,
) -> Result<SwmInstance> {
    check_positive("items", items)?;
    check_positive("bidders", bidders)?;
    check_positive("universe_size", universe_size)?;
    check_positive("max_weight", max_weight as usize)?;
    let mut rng = rng_from_seed(seed);

    let item_names: Vec<String> = (1..=items).map(|i| padded("i", i, items)).collect();
    let mut builder = SwmInstance::builder(format!("swm{seed}")).items(item_names.clone());
    for b in 1..=bidders {
        let universe: Vec<(String, f64)> = (1..=universe_size)
            .map(|j| {
                (
                    padded("q", j, universe_size),
                    (uniform_below(&mut rng, max_weight) + 1) as f64,
                )
            })
            .collect();
        let covers: Vec<(String, Vec<String>)> = item_names
            .iter()
            .map(|item| {
                let size = uniform_below(&mut rng, universe_size as u64 + 1) as usize;
                let cover = sample_distinct(&mut rng, size, universe_size)
                    .into_iter()
                    .map(|ix| padded("q", ix + 1, universe_size))
                    .collect();
                (item.clone(), cover)
            })
            .collect();
        builder = builder.bidder(padded("b", b, bidders), universe, covers);
    }
    builder.build()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum UniverseDoc {
    Weighted(BTreeMap<String, serde_json::Number>),
    Unweighted(Vec<String>),
}

impl UniverseDoc {
    fn from_points(points: &[String], weights: &[f64]) -> UniverseDoc {
        if weights.iter().all(|&w| w == 1.0) {
            let mut names: Vec<String> = points.to_vec();
            names.sort_unstable();
            UniverseDoc::Unweighted(names)
        } else {
            UniverseDoc::Weighted(
                points
                    .iter()
                    .zip(weights)
                    .map(|(p, &w)| {
                        (
                            p.clone(),
                            serde_json::Number::from_f64(w).expect("finite weight"),
                        )
                    })
                    .collect(),
            )
        }
    }

    fn into_points(self) -> Result<Vec<(String, f64)>> {
        match self {
            UniverseDoc::Weighted(map) => Ok(map
                .into_iter()
                .map(|(p, w)| (p, w.as_f64().unwrap_or(f64::NAN)))
                .collect()),
            UniverseDoc::Unweighted(names) => Ok(names.into_iter().map(|p| (p, 1.0)).collect()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartDoc {
    name: String,
    elements: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverageDoc {
    kind: String,
    name: String,
    universe: UniverseDoc,
    parts: Vec<PartDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BidderDoc {
    name: String,
    universe: UniverseDoc,
    covers: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwmDoc {
    kind: String,
    items: Vec<String>,
    bidders: Vec<BidderDoc>,
}

const COVERAGE_KIND: &str = "weighted-coverage";
const SWM_KIND: &str = "swm-coverage";

fn parse_err(context: &str, message: impl std::fmt::Display) -> SglError {
    SglError::Parse {
        context: context.to_string(),
        message: message.to_string(),
    }
}

fn coverage_from_doc(doc: CoverageDoc) -> Result<Instance> {
    let universe = doc.universe.into_points()?;
    let parts: Vec<(String, CoverList)> = doc
        .parts
        .into_iter()
        .map(|p| (p.name, p.elements.into_iter().collect()))
        .collect();
    build_coverage(&doc.name, universe, parts)
}

fn swm_from_doc(doc: SwmDoc, name: &str) -> Result<SwmInstance> {
    let mut builder = SwmInstance::builder(name).items(doc.items);
    for bidder in doc.bidders {
        let universe = bidder.universe.into_points()?;
        let covers: Vec<(String, Vec<String>)> = bidder.covers.into_iter().collect();
        builder = builder.bidder(bidder.name, universe, covers);
    }
    builder.build()
}

fn instance_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "swm".to_string())
}

fn peek_kind(text: &str, context: &str) -> Result<String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_err(context, e))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| parse_err(context, "missing string field `kind`"))?;
    Ok(kind.to_string())
}

fn instance_from_text(text: &str, context: &str, swm_name: &str) -> Result<Instance> {
    match peek_kind(text, context)?.as_str() {
        COVERAGE_KIND => {
            let doc: CoverageDoc = serde_json::from_str(text).map_err(|e| parse_err(context, e))?;
            coverage_from_doc(doc)
        }
        SWM_KIND => {
            let doc: SwmDoc = serde_json::from_str(text).map_err(|e| parse_err(context, e))?;
            reduce_swm(&swm_from_doc(doc, swm_name)?)
        }
        other => Err(parse_err(
            context,
            format!("unknown kind `{other}` (expected {COVERAGE_KIND} or {SWM_KIND})"),
        )),
    }
}

/// Parses an instance document from text; `name` labels parse errors and
/// names the reduction of an SWM document.
pub fn instance_from_json(text: &str, name: &str) -> Result<Instance> {
    instance_from_text(text, name, name)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

/// Loads an instance document. SWM documents are reduced to the
/// partition-matroid form on load (named after the file stem).
pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = read_text(path)?;
    instance_from_text(&text, &path.display().to_string(), &instance_stem(path))
}

/// Loads an SWM document without reducing it.
pub fn read_swm_instance(path: impl AsRef<Path>) -> Result<SwmInstance> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let context = path.display().to_string();
    let kind = peek_kind(&text, &context)?;
    if kind != SWM_KIND {
        return Err(parse_err(
            &context,
            format!("kind `{kind}` is not an SWM instance"),
        ));
    }
    let doc: SwmDoc = serde_json::from_str(&text).map_err(|e| parse_err(&context, e))?;
    swm_from_doc(doc, &instance_stem(path))
}

fn semantic_kind(kind: &OracleKind) -> &OracleKind {
    match kind {
        OracleKind::Counting { inner, .. } => semantic_kind(&inner.kind),
        other => other,
    }
}

pub fn swm_instance_to_json(swm: &SwmInstance) -> String {
    let doc = SwmDoc {
        kind: SWM_KIND.to_string(),
        items: swm.items.clone(),
        bidders: swm
            .bidders
            .iter()
            .map(|b| BidderDoc {
                name: b.name.clone(),
                universe: UniverseDoc::from_points(&b.points, &b.weights),
                covers: b
                    .covers
                    .iter()
                    .enumerate()
                    .filter(|(_, cover)| !cover.is_empty())
                    .map(|(item_ix, cover)| {
                        let mut pts: Vec<String> = cover
                            .iter()
                            .map(|&p| b.points[p as usize].clone())
                            .collect();
                        pts.sort_unstable();
                        (swm.items[item_ix].clone(), pts)
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("serializable document");
    json.push('\n');
    json
}

/// Serializes an instance to its document form. Coverage oracles write the
/// weighted-coverage document; modular oracles write the equivalent coverage
/// document with one private point per element; SWM composites write the SWM
/// document (rejected if dummies were added, since those are not
/// assignments).
pub fn instance_to_json(instance: &Instance) -> Result<String> {
    let ground = instance.matroid.ground();
    let doc = match semantic_kind(&instance.oracle.kind) {
        OracleKind::WeightedCoverage(c) => CoverageDoc {
            kind: COVERAGE_KIND.to_string(),
            name: instance.name.clone(),
            universe: UniverseDoc::from_points(&c.points, &c.weights),
            parts: instance
                .matroid
                .parts()
                .iter()
                .map(|part| PartDoc {
                    name: part.name().to_string(),
                    elements: part
                        .members()
                        .iter()
                        .map(|&id| {
                            let mut pts: Vec<String> = c.covers[id as usize]
                                .iter()
                                .map(|&p| c.points[p as usize].clone())
                                .collect();
                            pts.sort_unstable();
                            (ground.name(id).to_string(), pts)
                        })
                        .collect(),
                })
                .collect(),
        },
        OracleKind::Modular { weights } => CoverageDoc {
            kind: COVERAGE_KIND.to_string(),
            name: instance.name.clone(),
            universe: UniverseDoc::from_points(
                &ground.names().map(str::to_string).collect::<Vec<_>>(),
                weights,
            ),
            parts: instance
                .matroid
                .parts()
                .iter()
                .map(|part| PartDoc {
                    name: part.name().to_string(),
                    elements: part
                        .members()
                        .iter()
                        .map(|&id| {
                            (
                                ground.name(id).to_string(),
                                vec![ground.name(id).to_string()],
                            )
                        })
                        .collect(),
                })
                .collect(),
        },
        OracleKind::SwmComposite { swm, elem_map } => {
            if elem_map.iter().any(Option::is_none)
                || ground.len() != swm.items.len() * swm.bidders.len()
            {
                return Err(SglError::Unsupported(
                    "writing a dummy-extended SWM instance to the SWM document form".into(),
                ));
            }
            return Ok(swm_instance_to_json(swm));
        }
        OracleKind::Counting { .. } => unreachable!("semantic_kind unwraps counting"),
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("serializable document");
    json.push('\n');
    Ok(json)
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = instance_to_json(instance)?;
    std::fs::write(path, json)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value_of(instance: &Instance, names: &[&str]) -> f64 {
        let s = instance
            .matroid()
            .ground()
            .set_from_names(names.iter().copied())
            .unwrap();
        instance.oracle().evaluate(&s).unwrap()
    }

    #[test]
    fn the_7_12_instance_matches_its_table() {
        let inst = build_instance_7_12();
        assert_eq!(inst.name(), "7-12");
        assert_eq!(inst.matroid().m(), 3);
        assert_eq!(inst.matroid().ground().len(), 12);
        assert_eq!(inst.matroid().base_count(), 64);
        for part in inst.matroid().parts() {
            assert_eq!(part.members().len(), 4);
        }
        assert_eq!(value_of(&inst, &["x1", "y1", "z1"]), 12.0);
        assert_eq!(value_of(&inst, &["x2"]), 4.0);
        assert_eq!(value_of(&inst, &["x2", "y3", "z4"]), 7.0);
        assert_eq!(inst.oracle().universe_weight(), Some(12.0));
    }

    #[test]
    fn the_19_33_instance_matches_its_tables() {
        let inst = build_instance_19_33();
        let ground = inst.matroid().ground();
        assert_eq!(ground.len(), 32);
        assert_eq!(inst.matroid().m(), 4);
        assert_eq!(inst.matroid().base_count(), 4096);
        // Unordered first index pair: z213 is spelled z123.
        assert!(ground.contains("z123"));
        assert!(!ground.contains("z213"));
        let p1: Vec<&str> = inst.matroid().part(0).members_names(ground);
        assert_eq!(
            p1,
            ["o1", "x1", "y21", "y31", "y41", "z231", "z241", "z341"]
        );
        assert_eq!(value_of(&inst, &["o1", "o2", "o3", "o4"]), 264.0);
        assert_eq!(value_of(&inst, &["x1", "y12", "z123", "o4"]), 152.0);
        assert_eq!(value_of(&inst, &["o1"]), 66.0);
        assert_eq!(value_of(&inst, &["x1"]), 66.0);
        assert_eq!(value_of(&inst, &["y21"]), 44.0);
        assert_eq!(value_of(&inst, &["z231"]), 28.0);
    }

    #[test]
    fn builtin_lookup() {
        assert_eq!(builtin_instance("7-12").unwrap().name(), "7-12");
        assert_eq!(builtin_instance("19-33").unwrap().name(), "19-33");
        assert!(builtin_instance("42").is_none());
    }

    fn small_swm() -> SwmInstance {
        SwmInstance::builder("auction")
            .items(["i1", "i2", "i3"])
            .bidder(
                "b1",
                [("p".to_string(), 2.0), ("q".to_string(), 3.0)],
                [("i1", vec!["p", "q"]), ("i2", vec!["q"])],
            )
            .bidder(
                "b2",
                [("r".to_string(), 4.0)],
                [("i2", vec!["r"]), ("i3", vec!["r"])],
            )
            .build()
            .unwrap()
    }

    #[test]
    fn reduction_shape_and_values() {
        let swm = small_swm();
        let reduced = reduce_swm(&swm).unwrap();
        assert_eq!(reduced.matroid().ground().len(), 6);
        assert_eq!(reduced.matroid().m(), 3);
        for part in reduced.matroid().parts() {
            assert_eq!(part.members().len(), 2);
        }
        assert_eq!(reduced.matroid().part(0).name(), "i1");
        assert_eq!(value_of(&reduced, &["i1@b1"]), 5.0);
        assert_eq!(value_of(&reduced, &["i1@b1", "i2@b1"]), 5.0);
        assert_eq!(value_of(&reduced, &["i1@b1", "i2@b2"]), 9.0);
        // Welfare of an allocation = value of the corresponding base.
        let b1_bundle = swm.bidders()[0].utility_of_ids(&[0]);
        let b2_bundle = swm.bidders()[1].utility_of_ids(&[1, 2]);
        assert_eq!(
            value_of(&reduced, &["i1@b1", "i2@b2", "i3@b2"]),
            b1_bundle + b2_bundle
        );

        let flat = swm_to_coverage_instance(&swm).unwrap();
        assert_eq!(flat.matroid().ground().len(), 6);
        for names in [
            vec!["i1@b1"],
            vec!["i1@b1", "i2@b1"],
            vec!["i1@b2", "i2@b1", "i3@b2"],
        ] {
            assert_eq!(value_of(&flat, &names), value_of(&reduced, &names));
        }
    }

    #[test]
    fn singleton_swm_reduction() {
        let swm = SwmInstance::builder("tiny")
            .items(["u"])
            .bidder("b", [("p".to_string(), 7.0)], [("u", vec!["p"])])
            .build()
            .unwrap();
        let reduced = reduce_swm(&swm).unwrap();
        assert_eq!(reduced.matroid().ground().len(), 1);
        assert_eq!(value_of(&reduced, &["u@b"]), 7.0);
    }

    #[test]
    fn swm_builder_validations() {
        assert!(SwmInstance::builder("x").items(["i"]).build().is_err());
        assert!(SwmInstance::builder("x")
            .bidder("b", [("p".to_string(), 1.0)], [("i", vec!["p"])])
            .build()
            .is_err());
        let unknown_item = SwmInstance::builder("x")
            .items(["i"])
            .bidder("b", [("p".to_string(), 1.0)], [("j", vec!["p"])])
            .build();
        assert!(matches!(unknown_item, Err(SglError::UnknownElement(_))));
        let unknown_point = SwmInstance::builder("x")
            .items(["i"])
            .bidder("b", [("p".to_string(), 1.0)], [("i", vec!["zz"])])
            .build();
        assert!(matches!(
            unknown_point,
            Err(SglError::InvariantViolation(_))
        ));
    }

    #[test]
    fn dummy_extension_ignores_dummies() {
        let base = build_instance_7_12();
        assert_eq!(extend_with_dummies(&base, 0).unwrap(), base);
        let ext = extend_with_dummies(&base, 2).unwrap();
        assert_eq!(ext.name(), "7-12+2d");
        assert_eq!(ext.matroid().m(), 5);
        assert_eq!(ext.matroid().ground().len(), 14);
        assert_eq!(value_of(&ext, &["x2", "dummy#1"]), value_of(&ext, &["x2"]));
        assert_eq!(value_of(&ext, &["dummy#1", "dummy#2"]), 0.0);
        assert_eq!(
            value_of(&ext, &["x1", "y1", "z1", "dummy#1", "dummy#2"]),
            12.0
        );
        // Extending again continues the numbering.
        let ext2 = extend_with_dummies(&ext, 1).unwrap();
        assert!(ext2.matroid().ground().contains("dummy#3"));
        // Counting wrappers are instrumentation, not instances to transform.
        assert!(matches!(
            extend_with_dummies(&build_instance_7_12().counting(), 1),
            Err(SglError::Unsupported(_))
        ));
    }

    #[test]
    fn composition_is_value_additive() {
        let base = build_instance_7_12();
        assert_eq!(compose_copies(&base, 1).unwrap(), base);
        let two = compose_copies(&base, 2).unwrap();
        assert_eq!(two.name(), "7-12x2");
        assert_eq!(two.matroid().m(), 6);
        assert_eq!(two.matroid().ground().len(), 24);
        assert_eq!(
            value_of(&two, &["x1#1", "y1#1", "z1#1", "x1#2", "y1#2", "z1#2"]),
            24.0
        );
        assert_eq!(
            value_of(&two, &["x2#1", "x2#2"]),
            value_of(&base, &["x2"]) * 2.0
        );
        assert!(compose_copies(&base, 0).is_err());
        assert!(matches!(
            compose_copies(&reduce_swm(&small_swm()).unwrap(), 2),
            Err(SglError::Unsupported(_))
        ));
    }

    #[test]
    fn random_instances_are_reproducible() {
        let a = random_coverage_instance(4, 3, 10, 5, 11).unwrap();
        let b = random_coverage_instance(4, 3, 10, 5, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_coverage_instance(4, 3, 10, 5, 12).unwrap());
        assert_eq!(a.matroid().m(), 4);
        assert_eq!(a.matroid().ground().len(), 12);

        let s = random_swm_instance(3, 2, 4, 6, 7).unwrap();
        let t = random_swm_instance(3, 2, 4, 6, 7).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn round_trips_are_identities() {
        let dir = tempfile::tempdir().unwrap();
        for inst in [
            build_instance_7_12(),
            build_instance_19_33(),
            random_coverage_instance(3, 2, 5, 4, 3).unwrap(),
        ] {
            let path = dir.path().join(format!("{}.instance", inst.name()));
            write_instance(&inst, &path).unwrap();
            let back = read_instance(&path).unwrap();
            assert_eq!(back, inst, "round trip of {}", inst.name());
        }

        // SWM composites round-trip through the SWM document form.
        let swm = small_swm();
        let reduced = reduce_swm(&swm).unwrap();
        let path = dir.path().join("auction.swm");
        std::fs::write(&path, instance_to_json(&reduced).unwrap()).unwrap();
        assert_eq!(read_swm_instance(&path).unwrap(), swm);
        let loaded = read_instance(&path).unwrap();
        assert_eq!(loaded.matroid(), reduced.matroid());
        assert_eq!(loaded.oracle(), reduced.oracle());

        // Modular instances write as the equivalent coverage document.
        let matroid = make_partition(&[("P".into(), vec!["a".into(), "b".into()])]).unwrap();
        let modular = Instance::new(
            "mod",
            matroid.clone(),
            ValueOracle::modular(matroid.ground().clone(), vec![2.0, 5.0]).unwrap(),
        )
        .unwrap();
        let path = dir.path().join("mod.instance");
        write_instance(&modular, &path).unwrap();
        let back = read_instance(&path).unwrap();
        assert_eq!(back.oracle().kind_name(), "weighted-coverage");
        assert_eq!(
            back.oracle()
                .evaluate(&back.matroid().ground().set_from_names(["a", "b"]).unwrap())
                .unwrap(),
            7.0
        );
    }

    #[test]
    fn unweighted_universe_reads_and_writes_as_a_list() {
        let json = instance_to_json(&build_instance_7_12()).unwrap();
        assert!(json.contains("\"universe\": ["));
        let weighted = instance_to_json(&build_instance_19_33()).unwrap();
        assert!(weighted.contains("\"a1\": 14"));
    }

    #[test]
    fn malformed_documents_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let path = dir.path().join(name);
            std::fs::write(&path, text).unwrap();
            path
        };

        let missing = dir.path().join("nope.instance");
        assert!(matches!(read_instance(&missing), Err(SglError::Io(_))));

        type Check = fn(&SglError) -> bool;
        let cases: Vec<(&str, &str, Check)> = vec![
            ("syntax.instance", "{", |e| {
                matches!(e, SglError::Parse { .. })
            }),
            (
                "kind.instance",
                r#"{"kind": "mystery", "name": "x", "universe": [], "parts": []}"#,
                |e| matches!(e, SglError::Parse { .. }),
            ),
            (
                "unknown-key.instance",
                r#"{"kind": "weighted-coverage", "name": "x", "universe": ["p"],
                    "parts": [{"name": "P", "elements": {"a": ["p"]}}], "extra": 1}"#,
                |e| matches!(e, SglError::Parse { .. }),
            ),
            (
                "bad-point.instance",
                r#"{"kind": "weighted-coverage", "name": "x", "universe": ["p"],
                    "parts": [{"name": "P", "elements": {"a": ["zz"]}}]}"#,
                |e| matches!(e, SglError::InvariantViolation(_)),
            ),
            (
                "overlap.instance",
                r#"{"kind": "weighted-coverage", "name": "x", "universe": ["p"],
                    "parts": [{"name": "P1", "elements": {"a": ["p"]}},
                              {"name": "P2", "elements": {"a": ["p"]}}]}"#,
                |e| matches!(e, SglError::OverlappingParts { .. }),
            ),
            (
                "neg-weight.instance",
                r#"{"kind": "weighted-coverage", "name": "x", "universe": {"p": -2.0},
                    "parts": [{"name": "P", "elements": {"a": ["p"]}}]}"#,
                |e| matches!(e, SglError::InvariantViolation(_)),
            ),
        ];
        for (name, text, check) in cases {
            let err = read_instance(write(name, text)).unwrap_err();
            assert!(check(&err), "{name}: unexpected error {err:?}");
        }
    }
}

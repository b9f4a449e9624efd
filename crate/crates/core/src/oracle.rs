//! Value oracles for non-negative monotone submodular functions, plus an
//! executable verifier for the structural properties every oracle here is
//! supposed to satisfy:
//!
//! - non-negativity: f(S) ≥ 0 for every S;
//! - monotonicity: f(S) ≤ f(S ∪ {u});
//! - submodularity: f(u | S) ≥ f(u | S ∪ {v}) for u, v ∉ S, u ≠ v;
//! - for nested S ⊆ T and u ∉ T, the two derived marginal inequalities
//!   f(S ∪ {u}) ≤ f(T ∪ {u}) and f(u | S) ≥ f(u | T);
//! - the sampling lower bound E[f(T_p)] ≥ (1 − p)·f(∅) + p·f(T) when T_p
//!   keeps every element of T independently with probability p.
//!
//! Values are f64 in the public contract. The shipped instances use integer
//! weights, so their values are exact; general comparisons use the absolute
//! tolerance [`crate::EPS`].

use std::cell::Cell;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, SglError};
use crate::ground::{ElementSet, Ground};
use crate::instances::SwmInstance;
use crate::rng::{rng_from_seed, uniform_below, unit_f64};
use crate::EPS;

/// Anything that maps element sets to values. Implemented by [`ValueOracle`]
/// and by [`TableOracle`], so the verifier can run against deliberately
/// broken functions as well as shipped ones.
pub trait SetFunction {
    fn ground(&self) -> &Arc<Ground>;
    fn value(&self, s: &ElementSet) -> Result<f64>;
}

#[derive(Debug, Clone)]
pub struct CoverageOracle {
    pub(crate) points: Vec<String>,
    pub(crate) weights: Vec<f64>,
    /// Covered point ids per element, sorted ascending.
    pub(crate) covers: Vec<Vec<u32>>,
}

impl CoverageOracle {
    fn value_of(&self, s: &ElementSet) -> f64 {
        let blocks = self.points.len().div_ceil(64);
        let mut mask = vec![0u64; blocks];
        for id in s.iter() {
            for &p in &self.covers[id as usize] {
                mask[p as usize / 64] |= 1u64 << (p % 64);
            }
        }
        let mut total = 0.0;
        for (p, w) in self.weights.iter().enumerate() {
            if mask[p / 64] >> (p % 64) & 1 == 1 {
                total += w;
            }
        }
        total
    }

    pub fn universe_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl PartialEq for CoverageOracle {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.weights == other.weights && self.covers == other.covers
    }
}

#[derive(Debug, Clone)]
pub(crate) enum OracleKind {
    WeightedCoverage(CoverageOracle),
    Modular {
        weights: Vec<f64>,
    },
    SwmComposite {
        swm: SwmInstance,
        /// Per element: `(item, bidder)` indices, or `None` for elements the
        /// objective ignores (dummies).
        elem_map: Vec<Option<(u32, u32)>>,
    },
    Counting {
        inner: Box<ValueOracle>,
        calls: Arc<AtomicU64>,
    },
}

/// Counting wrappers compare by the function they wrap, not the call tally.
impl PartialEq for OracleKind {
    fn eq(&self, other: &Self) -> bool {
        use OracleKind::*;
        match (self, other) {
            (WeightedCoverage(a), WeightedCoverage(b)) => a == b,
            (Modular { weights: a }, Modular { weights: b }) => a == b,
            (
                SwmComposite {
                    swm: a,
                    elem_map: ma,
                },
                SwmComposite {
                    swm: b,
                    elem_map: mb,
                },
            ) => a == b && ma == mb,
            (Counting { inner: a, .. }, Counting { inner: b, .. }) => a == b,
            _ => false,
        }
    }
}

/// A set function over one ground set, accessed only through evaluation.
#[derive(Debug, Clone)]
pub struct ValueOracle {
    ground: Arc<Ground>,
    pub(crate) kind: OracleKind,
}

impl PartialEq for ValueOracle {
    fn eq(&self, other: &Self) -> bool {
        *self.ground == *other.ground && self.kind == other.kind
    }
}

impl ValueOracle {
    /// Weighted coverage over a point universe. `covers[e]` lists the point
    /// ids covered by element `e`; lists are canonicalized to sorted order.
    pub fn weighted_coverage(
        ground: Arc<Ground>,
        points: Vec<(String, f64)>,
        mut covers: Vec<Vec<u32>>,
    ) -> Result<ValueOracle> {
        if covers.len() != ground.len() {
            return Err(SglError::InvariantViolation(format!(
                "{} cover lists for {} elements",
                covers.len(),
                ground.len()
            )));
        }
        let mut names = Vec::with_capacity(points.len());
        let mut weights = Vec::with_capacity(points.len());
        for (name, w) in points {
            crate::ground::validate_name(&name)?;
            if !w.is_finite() || w < 0.0 {
                return Err(SglError::InvariantViolation(format!(
                    "universe point `{name}` has weight {w}"
                )));
            }
            names.push(name);
            weights.push(w);
        }
        for (e, cover) in covers.iter_mut().enumerate() {
            cover.sort_unstable();
            cover.dedup();
            if let Some(&p) = cover.iter().find(|&&p| p as usize >= names.len()) {
                return Err(SglError::InvariantViolation(format!(
                    "element `{}` covers unknown point #{p}",
                    ground.name(e as u32)
                )));
            }
        }
        Ok(ValueOracle {
            ground,
            kind: OracleKind::WeightedCoverage(CoverageOracle {
                points: names,
                weights,
                covers,
            }),
        })
    }

    /// Modular (additive) function with one non-negative weight per element.
    pub fn modular(ground: Arc<Ground>, weights: Vec<f64>) -> Result<ValueOracle> {
        if weights.len() != ground.len() {
            return Err(SglError::InvariantViolation(format!(
                "{} weights for {} elements",
                weights.len(),
                ground.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(SglError::InvariantViolation(format!(
                "modular weight {w} is not a finite non-negative number"
            )));
        }
        Ok(ValueOracle {
            ground,
            kind: OracleKind::Modular { weights },
        })
    }

    /// Sum of per-bidder utilities: f(S) = Σ_i f_i({u | (u,i) ∈ S}).
    pub(crate) fn swm_composite(
        ground: Arc<Ground>,
        swm: SwmInstance,
        elem_map: Vec<Option<(u32, u32)>>,
    ) -> Result<ValueOracle> {
        if elem_map.len() != ground.len() {
            return Err(SglError::InvariantViolation(format!(
                "{} element mappings for {} elements",
                elem_map.len(),
                ground.len()
            )));
        }
        for entry in elem_map.iter().flatten() {
            let (item, bidder) = *entry;
            if item as usize >= swm.items().len() || bidder as usize >= swm.bidders().len() {
                return Err(SglError::InvariantViolation(format!(
                    "element mapped to item #{item}, bidder #{bidder} outside the instance"
                )));
            }
        }
        Ok(ValueOracle {
            ground,
            kind: OracleKind::SwmComposite { swm, elem_map },
        })
    }

    /// Forwarding wrapper that counts evaluations; the counter is atomic, so
    /// counts are exact under single-threaded use and safe (merely ordered
    /// arbitrarily) under concurrent use.
    pub fn wrap_counting(self) -> ValueOracle {
        ValueOracle {
            ground: self.ground.clone(),
            kind: OracleKind::Counting {
                inner: Box::new(self),
                calls: Arc::new(AtomicU64::new(0)),
            },
        }
    }

    /// Evaluation count of a counting wrapper; `None` for other kinds.
    pub fn query_count(&self) -> Option<u64> {
        match &self.kind {
            OracleKind::Counting { calls, .. } => Some(calls.load(Ordering::Relaxed)),
            _ => None,
        }
    }

    pub fn reset_count(&self) {
        if let OracleKind::Counting { calls, .. } = &self.kind {
            calls.store(0, Ordering::Relaxed);
        }
    }

    pub fn ground(&self) -> &Arc<Ground> {
        &self.ground
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            OracleKind::WeightedCoverage(_) => "weighted-coverage",
            OracleKind::Modular { .. } => "modular",
            OracleKind::SwmComposite { .. } => "swm-composite",
            OracleKind::Counting { .. } => "counting",
        }
    }

    /// Total universe weight of a coverage oracle; `None` for other kinds.
    pub fn universe_weight(&self) -> Option<f64> {
        match &self.kind {
            OracleKind::WeightedCoverage(c) => Some(c.universe_weight()),
            OracleKind::Counting { inner, .. } => inner.universe_weight(),
            _ => None,
        }
    }

    /// f(S).
    pub fn evaluate(&self, s: &ElementSet) -> Result<f64> {
        for id in s.iter() {
            self.ground.check_id(id)?;
        }
        Ok(self.eval_unchecked(s))
    }

    fn eval_unchecked(&self, s: &ElementSet) -> f64 {
        match &self.kind {
            OracleKind::WeightedCoverage(c) => c.value_of(s),
            OracleKind::Modular { weights } => s.iter().map(|id| weights[id as usize]).sum(),
            OracleKind::SwmComposite { swm, elem_map } => {
                let mut per_bidder: Vec<Vec<u32>> = vec![Vec::new(); swm.bidders().len()];
                for id in s.iter() {
                    if let Some((item, bidder)) = elem_map[id as usize] {
                        per_bidder[bidder as usize].push(item);
                    }
                }
                swm.bidders()
                    .iter()
                    .zip(&per_bidder)
                    .map(|(b, items)| b.utility_of_ids(items))
                    .sum()
            }
            OracleKind::Counting { inner, calls } => {
                calls.fetch_add(1, Ordering::Relaxed);
                inner.eval_unchecked(s)
            }
        }
    }

    /// f(u | S) = f(S ∪ {u}) − f(S), computed on exactly that arithmetic
    /// path so the identity holds bit for bit.
    pub fn marginal(&self, u: u32, s: &ElementSet) -> Result<f64> {
        self.ground.check_id(u)?;
        Ok(self.evaluate(&s.with_element(u))? - self.evaluate(s)?)
    }
}

impl SetFunction for ValueOracle {
    fn ground(&self) -> &Arc<Ground> {
        &self.ground
    }

    fn value(&self, s: &ElementSet) -> Result<f64> {
        self.evaluate(s)
    }
}

/// Explicit value table over all 2^n subsets; the vehicle for feeding the
/// verifier functions that are *not* submodular or monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOracle {
    ground: Arc<Ground>,
    values: Vec<f64>,
}

impl TableOracle {
    /// `values[mask]` is the value of the subset whose element ids are the
    /// set bits of `mask`.
    pub fn new(ground: Arc<Ground>, values: Vec<f64>) -> Result<TableOracle> {
        let n = ground.len();
        if n > 24 {
            return Err(SglError::TooLarge {
                what: "value table",
                unit: "elements",
                size: n as u128,
                cap: 24,
            });
        }
        if values.len() != 1usize << n {
            return Err(SglError::InvariantViolation(format!(
                "table has {} entries for {} elements",
                values.len(),
                n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SglError::InvariantViolation(
                "table contains a non-finite value".into(),
            ));
        }
        Ok(TableOracle { ground, values })
    }
}

impl SetFunction for TableOracle {
    fn ground(&self) -> &Arc<Ground> {
        &self.ground
    }

    fn value(&self, s: &ElementSet) -> Result<f64> {
        let mut mask = 0usize;
        for id in s.iter() {
            self.ground.check_id(id)?;
            mask |= 1 << id;
        }
        Ok(self.values[mask])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Check every subset, pair and nested triple; requires at most
    /// `max_elements` ground elements.
    Exhaustive { max_elements: usize },
    /// Check `trials` sampled configurations, plus the sampling lower bound
    /// at p ∈ {0.25, 0.5, 0.75} with a three-standard-error slack.
    Sampled { trials: u64, seed: u64 },
}

impl VerifyMode {
    pub fn exhaustive() -> Self {
        VerifyMode::Exhaustive { max_elements: 16 }
    }

    pub fn sampled(trials: u64, seed: u64) -> Self {
        VerifyMode::Sampled { trials, seed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyViolation {
    pub property: String,
    /// Role (`S`, `T`, `u`, ...) to space-joined element names.
    pub witness: BTreeMap<String, String>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub checked: Vec<String>,
    pub violations: Vec<PropertyViolation>,
    /// Total violation count; `violations` keeps at most a few witnesses per
    /// property.
    pub violations_total: u64,
    pub queries: u64,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations_total == 0
    }
}

const WITNESSES_PER_PROPERTY: usize = 8;

struct CountedFn<'a> {
    f: &'a dyn SetFunction,
    calls: Cell<u64>,
}

impl<'a> CountedFn<'a> {
    fn value(&self, s: &ElementSet) -> Result<f64> {
        self.calls.set(self.calls.get() + 1);
        self.f.value(s)
    }
}

struct ReportBuilder<'g> {
    ground: &'g Ground,
    per_property: BTreeMap<String, usize>,
    violations: Vec<PropertyViolation>,
    total: u64,
}

impl<'g> ReportBuilder<'g> {
    fn violate(
        &mut self,
        property: &str,
        witness: &[(&str, &ElementSet)],
        singles: &[(&str, u32)],
        values: &[(&str, f64)],
    ) {
        self.total += 1;
        let seen = self.per_property.entry(property.to_string()).or_insert(0);
        if *seen >= WITNESSES_PER_PROPERTY {
            return;
        }
        *seen += 1;
        let mut w = BTreeMap::new();
        for (role, set) in witness {
            w.insert(role.to_string(), set.render(self.ground));
        }
        for (role, id) in singles {
            w.insert(role.to_string(), self.ground.name(*id).to_string());
        }
        self.violations.push(PropertyViolation {
            property: property.to_string(),
            witness: w,
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
    }
}

fn set_of_mask(mask: usize) -> ElementSet {
    (0..usize::BITS).filter(|&b| mask >> b & 1 == 1).collect()
}

/// Checks the structural properties listed in the module docs and reports
/// every violation found (witness lists are capped per property; the total
/// count is exact).
pub fn verify_properties(f: &dyn SetFunction, mode: VerifyMode) -> Result<PropertyReport> {
    let counted = CountedFn {
        f,
        calls: Cell::new(0),
    };
    let ground = f.ground().clone();
    let mut rb = ReportBuilder {
        ground: &ground,
        per_property: BTreeMap::new(),
        violations: Vec::new(),
        total: 0,
    };
    let mut checked: Vec<String> = [
        "non-negativity",
        "monotonicity",
        "submodularity",
        "union-monotonicity",
        "marginal-antitonicity",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    match mode {
        VerifyMode::Exhaustive { max_elements } => {
            let n = ground.len();
            if n > max_elements {
                return Err(SglError::TooLarge {
                    what: "exhaustive property verification",
                    unit: "elements",
                    size: n as u128,
                    cap: max_elements as u128,
                });
            }
            let size = 1usize << n;
            let mut table = Vec::with_capacity(size);
            for mask in 0..size {
                table.push(counted.value(&set_of_mask(mask))?);
            }
            exhaustive_checks(n, &table, &mut rb);
        }
        VerifyMode::Sampled { trials, seed } => {
            sampled_checks(&counted, &ground, trials, seed, &mut rb)?;
            for p in [0.25, 0.5, 0.75] {
                checked.push(format!("sampling-lower-bound(p={p})"));
            }
        }
    }

    Ok(PropertyReport {
        checked,
        violations: rb.violations,
        violations_total: rb.total,
        queries: counted.calls.get(),
    })
}

fn exhaustive_checks(n: usize, table: &[f64], rb: &mut ReportBuilder) {
    let size = 1usize << n;

    for (mask, &v) in table.iter().enumerate() {
        if !v.is_finite() || v < -EPS {
            rb.violate(
                "non-negativity",
                &[("S", &set_of_mask(mask))],
                &[],
                &[("f(S)", v)],
            );
        }
    }

    for mask in 0..size {
        for u in 0..n {
            if mask >> u & 1 == 1 {
                continue;
            }
            let with = table[mask | 1 << u];
            if with < table[mask] - EPS {
                rb.violate(
                    "monotonicity",
                    &[("S", &set_of_mask(mask))],
                    &[("u", u as u32)],
                    &[("f(S)", table[mask]), ("f(S+u)", with)],
                );
            }
        }
    }

    for mask in 0..size {
        for u in 0..n {
            if mask >> u & 1 == 1 {
                continue;
            }
            let gain_alone = table[mask | 1 << u] - table[mask];
            for v in 0..n {
                if v == u || mask >> v & 1 == 1 {
                    continue;
                }
                let ctx = mask | 1 << v;
                let gain_ctx = table[ctx | 1 << u] - table[ctx];
                if gain_alone < gain_ctx - EPS {
                    rb.violate(
                        "submodularity",
                        &[("S", &set_of_mask(mask)), ("T", &set_of_mask(ctx))],
                        &[("u", u as u32)],
                        &[("f(u|S)", gain_alone), ("f(u|T)", gain_ctx)],
                    );
                }
            }
        }
    }

    // Nested triples (S ⊆ T, u ∉ T), via the subset-of-t walk.
    for t in 0..size {
        for u in 0..n {
            if t >> u & 1 == 1 {
                continue;
            }
            let t_with = table[t | 1 << u];
            let t_gain = t_with - table[t];
            let mut s = t;
            loop {
                let s_with = table[s | 1 << u];
                if s_with > t_with + EPS {
                    rb.violate(
                        "union-monotonicity",
                        &[("S", &set_of_mask(s)), ("T", &set_of_mask(t))],
                        &[("u", u as u32)],
                        &[("f(S+u)", s_with), ("f(T+u)", t_with)],
                    );
                }
                if s_with - table[s] < t_gain - EPS {
                    rb.violate(
                        "marginal-antitonicity",
                        &[("S", &set_of_mask(s)), ("T", &set_of_mask(t))],
                        &[("u", u as u32)],
                        &[("f(u|S)", s_with - table[s]), ("f(u|T)", t_gain)],
                    );
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & t;
            }
        }
    }
}

fn sampled_checks(
    counted: &CountedFn,
    ground: &Arc<Ground>,
    trials: u64,
    seed: u64,
    rb: &mut ReportBuilder,
) -> Result<()> {
    let n = ground.len();
    let mut rng = rng_from_seed(seed);

    for _ in 0..trials {
        let mut t = ElementSet::empty();
        for id in 0..n as u32 {
            if unit_f64(&mut rng) < 0.5 {
                t.insert(id);
            }
        }
        let mut s = ElementSet::empty();
        for id in t.iter() {
            if unit_f64(&mut rng) < 0.5 {
                s.insert(id);
            }
        }
        let ft = counted.value(&t)?;
        if !ft.is_finite() || ft < -EPS {
            rb.violate("non-negativity", &[("S", &t)], &[], &[("f(S)", ft)]);
        }
        let outside: Vec<u32> = (0..n as u32).filter(|&id| !t.contains(id)).collect();
        if outside.is_empty() {
            continue;
        }
        let u = outside[uniform_below(&mut rng, outside.len() as u64) as usize];
        let ft_u = counted.value(&t.with_element(u))?;
        let fs = counted.value(&s)?;
        let fs_u = counted.value(&s.with_element(u))?;
        if ft_u < ft - EPS {
            rb.violate(
                "monotonicity",
                &[("S", &t)],
                &[("u", u)],
                &[("f(S)", ft), ("f(S+u)", ft_u)],
            );
        }
        if fs_u > ft_u + EPS {
            rb.violate(
                "union-monotonicity",
                &[("S", &s), ("T", &t)],
                &[("u", u)],
                &[("f(S+u)", fs_u), ("f(T+u)", ft_u)],
            );
        }
        if fs_u - fs < ft_u - ft - EPS {
            rb.violate(
                "marginal-antitonicity",
                &[("S", &s), ("T", &t)],
                &[("u", u)],
                &[("f(u|S)", fs_u - fs), ("f(u|T)", ft_u - ft)],
            );
        }
        let extra: Vec<u32> = t.iter().filter(|id| !s.contains(*id)).collect();
        if !extra.is_empty() {
            let v = extra[uniform_below(&mut rng, extra.len() as u64) as usize];
            let ctx = s.with_element(v);
            let f_ctx = counted.value(&ctx)?;
            let f_ctx_u = counted.value(&ctx.with_element(u))?;
            if fs_u - fs < f_ctx_u - f_ctx - EPS {
                rb.violate(
                    "submodularity",
                    &[("S", &s), ("T", &ctx)],
                    &[("u", u)],
                    &[("f(u|S)", fs_u - fs), ("f(u|T)", f_ctx_u - f_ctx)],
                );
            }
        }
    }

    // Sampling lower bound on the full ground set: include every element
    // independently with probability p, compare the sample mean against
    // (1 − p)·f(∅) + p·f(N) with a 3-standard-error slack.
    let full: ElementSet = (0..n as u32).collect();
    let f_empty = counted.value(&ElementSet::empty())?;
    let f_full = counted.value(&full)?;
    for p in [0.25, 0.5, 0.75] {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..trials.max(1) {
            let mut tp = ElementSet::empty();
            for id in 0..n as u32 {
                if unit_f64(&mut rng) < p {
                    tp.insert(id);
                }
            }
            let v = counted.value(&tp)?;
            sum += v;
            sumsq += v * v;
        }
        let nt = trials.max(1) as f64;
        let mean = sum / nt;
        let var = ((sumsq - sum * sum / nt) / (nt - 1.0).max(1.0)).max(0.0);
        let stderr = (var / nt).sqrt();
        let bound = (1.0 - p) * f_empty + p * f_full;
        if mean < bound - 3.0 * stderr {
            rb.violate(
                &format!("sampling-lower-bound(p={p})"),
                &[("T", &full)],
                &[],
                &[
                    ("mean", mean),
                    ("bound", bound),
                    ("stderr", stderr),
                    ("trials", nt),
                ],
            );
        }
    }
    Ok(())
}

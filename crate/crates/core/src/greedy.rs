//! The random-order greedy: parts arrive one by one under a permutation π,
//! and from each arriving part the algorithm irrevocably takes an element of
//! maximal marginal gain. Ties are resolved by an explicit policy, because
//! the hard instances this crate reproduces are tie-sensitive.
//!
//! Also here: the per-run potential check (the quantity
//! Φ_i = f(A_i) + f(S ∪ A_i ∪ T↓i) must never decrease along a run, and the
//! run must end with f(A_m) + f(S ∪ A_m) ≥ f(S ∪ T)), and the direct welfare
//! greedy over SWM instances used by the reduction-equivalence tests.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, SglError};
use crate::ground::{ElementSet, Ground, Part};
use crate::instances::{Instance, SwmInstance};
use crate::rng::{random_permutation, rng_for_trial, rng_from_seed, uniform_below};
use crate::EPS;

/// Stream tag separating tie-break randomness from permutation randomness
/// when the same numeric seed is used for both.
const TIE_STREAM: u64 = 0x6269_6574;

/// Rule for choosing among candidates whose gains are within [`EPS`] of the
/// step maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TieBreakPolicy {
    /// Lexicographically smallest element name.
    FirstName,
    /// Latest position in the part's member list.
    LastIndex,
    /// Explicit ranking by name tokens: an exact token match outranks a
    /// prefix match, a longer prefix outranks a shorter one, earlier tokens
    /// outrank later ones, and unmatched names come last alphabetically.
    PriorityList(Vec<String>),
    /// Uniform choice among the tied candidates, reproducible from the seed.
    SeededRandom(u64),
}

impl TieBreakPolicy {
    /// Parses the CLI spelling: `first-name`, `last-index`,
    /// `priority:tok1,tok2,...`, or `seeded-random:SEED`.
    pub fn parse_spec(spec: &str) -> Result<TieBreakPolicy> {
        let parse_err = |message: String| SglError::Parse {
            context: "tie policy".into(),
            message,
        };
        match spec {
            "first-name" => return Ok(TieBreakPolicy::FirstName),
            "last-index" => return Ok(TieBreakPolicy::LastIndex),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("priority:") {
            let tokens: Vec<String> = rest.split(',').map(str::to_string).collect();
            if tokens.iter().any(|t| t.is_empty()) {
                return Err(parse_err(format!("empty token in `{spec}`")));
            }
            for t in &tokens {
                crate::ground::validate_name(t)?;
            }
            return Ok(TieBreakPolicy::PriorityList(tokens));
        }
        if let Some(rest) = spec.strip_prefix("seeded-random:") {
            let seed: u64 = rest
                .parse()
                .map_err(|_| parse_err(format!("`{rest}` is not a seed")))?;
            return Ok(TieBreakPolicy::SeededRandom(seed));
        }
        Err(parse_err(format!(
            "unknown tie policy `{spec}` (expected first-name, last-index, \
             priority:tok1,tok2,... or seeded-random:SEED)"
        )))
    }
}

impl std::fmt::Display for TieBreakPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TieBreakPolicy::FirstName => write!(f, "first-name"),
            TieBreakPolicy::LastIndex => write!(f, "last-index"),
            TieBreakPolicy::PriorityList(tokens) => write!(f, "priority:{}", tokens.join(",")),
            TieBreakPolicy::SeededRandom(seed) => write!(f, "seeded-random:{seed}"),
        }
    }
}

/// (class, token index) rank of a name under a priority list; smaller wins.
fn priority_rank(tokens: &[String], name: &str) -> (u8, usize) {
    if let Some(ix) = tokens.iter().position(|t| t == name) {
        return (0, ix);
    }
    let mut best: Option<(usize, usize)> = None; // (token length, index)
    for (ix, t) in tokens.iter().enumerate() {
        if name.starts_with(t.as_str()) {
            let cand = (t.len(), ix);
            best = match best {
                Some((len, old)) if len >= cand.0 => Some((len, old)),
                _ => Some(cand),
            };
        }
    }
    match best {
        Some((_, ix)) => (1, ix),
        None => (2, usize::MAX),
    }
}

struct TieBreaker<'p> {
    policy: &'p TieBreakPolicy,
    rng: Option<ChaCha8Rng>,
}

impl<'p> TieBreaker<'p> {
    fn new(policy: &'p TieBreakPolicy) -> Self {
        let rng = match policy {
            TieBreakPolicy::SeededRandom(seed) => Some(rng_for_trial(*seed, TIE_STREAM)),
            _ => None,
        };
        TieBreaker { policy, rng }
    }

    /// `tied` holds candidate ids in part-member order and is non-empty.
    fn choose(&mut self, ground: &Ground, tied: &[u32]) -> u32 {
        match self.policy {
            TieBreakPolicy::FirstName => *tied
                .iter()
                .min_by_key(|&&id| ground.name(id))
                .expect("non-empty tie set"),
            TieBreakPolicy::LastIndex => *tied.last().expect("non-empty tie set"),
            TieBreakPolicy::PriorityList(tokens) => *tied
                .iter()
                .min_by_key(|&&id| {
                    let name = ground.name(id);
                    (priority_rank(tokens, name), name)
                })
                .expect("non-empty tie set"),
            TieBreakPolicy::SeededRandom(_) => {
                let rng = self.rng.as_mut().expect("seeded policy has an rng");
                tied[uniform_below(rng, tied.len() as u64) as usize]
            }
        }
    }
}

/// How the arrival order is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermutationSource {
    /// A fixed order of part indices; must be a permutation of 0..m.
    Explicit(Vec<usize>),
    /// Uniformly random order, reproducible from the seed.
    Uniform { seed: u64 },
}

pub(crate) fn resolve_permutation(source: &PermutationSource, m: usize) -> Result<Vec<usize>> {
    match source {
        PermutationSource::Explicit(order) => {
            if order.len() != m {
                return Err(SglError::InvalidOrder(format!(
                    "order lists {} parts, instance has {m}",
                    order.len()
                )));
            }
            let mut seen = vec![false; m];
            for &ix in order {
                if ix >= m {
                    return Err(SglError::InvalidOrder(format!(
                        "part index {ix} out of range 0..{m}"
                    )));
                }
                if seen[ix] {
                    return Err(SglError::InvalidOrder(format!(
                        "part index {ix} appears twice"
                    )));
                }
                seen[ix] = true;
            }
            Ok(order.clone())
        }
        PermutationSource::Uniform { seed } => Ok(random_permutation(&mut rng_from_seed(*seed), m)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyStep {
    pub part: String,
    pub element: String,
    pub gain: f64,
    /// Prefix value f(A_i) after this step.
    pub value: f64,
    /// Marginal gain of every candidate in the arriving part, in the part's
    /// member order.
    pub options: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyTrace {
    /// Arrival order as part indices.
    pub permutation: Vec<usize>,
    pub steps: Vec<GreedyStep>,
    pub final_set: Vec<String>,
    pub final_value: f64,
}

impl GreedyTrace {
    pub fn final_elements(&self, ground: &Ground) -> Result<ElementSet> {
        ground.set_from_names(self.final_set.iter().map(String::as_str))
    }

    /// Tab-separated rendering: step index, part, chosen element, gain,
    /// prefix value. One line per step.
    pub fn render_tsv(&self) -> String {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                format!(
                    "{}\t{}\t{}\t{}\t{}",
                    i + 1,
                    s.part,
                    s.element,
                    s.gain,
                    s.value
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Runs the greedy on `instance` under the given arrival order. Each step
/// evaluates the oracle once per candidate against the memoized prefix value,
/// collects everything within [`EPS`] of the best gain, and lets the tie
/// policy pick.
pub fn random_order_greedy(
    instance: &Instance,
    order: &PermutationSource,
    tie: &TieBreakPolicy,
) -> Result<GreedyTrace> {
    let matroid = instance.matroid();
    let oracle = instance.oracle();
    let ground = matroid.ground();
    let permutation = resolve_permutation(order, matroid.m())?;
    let mut breaker = TieBreaker::new(tie);

    let mut current = ElementSet::empty();
    let mut current_value = oracle.evaluate(&current)?;
    let mut steps = Vec::with_capacity(permutation.len());

    for &pix in &permutation {
        let part: &Part = matroid.part(pix);
        let mut options = Vec::with_capacity(part.members().len());
        let mut values = Vec::with_capacity(part.members().len());
        let mut best = f64::NEG_INFINITY;
        for &id in part.members() {
            let value = oracle.evaluate(&current.with_element(id))?;
            let gain = value - current_value;
            options.push((ground.name(id).to_string(), gain));
            values.push(value);
            if gain > best {
                best = gain;
            }
        }
        let tied: Vec<u32> = part
            .members()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(k, _)| options[k].1 >= best - EPS)
            .map(|(_, id)| id)
            .collect();
        let chosen = breaker.choose(ground, &tied);
        let k = part
            .members()
            .iter()
            .position(|&id| id == chosen)
            .expect("chosen among members");
        let gain = options[k].1;
        current.insert(chosen);
        current_value = values[k];
        steps.push(GreedyStep {
            part: part.name().to_string(),
            element: ground.name(chosen).to_string(),
            gain,
            value: current_value,
            options,
        });
    }

    let mut final_set: Vec<String> = current
        .names(ground)
        .iter()
        .map(|s| s.to_string())
        .collect();
    final_set.sort_unstable();
    Ok(GreedyTrace {
        permutation,
        steps,
        final_set,
        final_value: current_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialCheck {
    /// Φ_0 ..= Φ_m along the trace.
    pub phis: Vec<f64>,
    /// First i with Φ_i < Φ_{i−1} − EPS, as (i, Φ_{i−1}, Φ_i).
    pub first_violation: Option<(usize, f64, f64)>,
    /// f(A_m) + f(S ∪ A_m).
    pub closing_lhs: f64,
    /// f(S ∪ T).
    pub closing_rhs: f64,
}

impl PotentialCheck {
    pub fn monotone(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn closing_ok(&self) -> bool {
        self.closing_lhs >= self.closing_rhs - EPS
    }

    pub fn passed(&self) -> bool {
        self.monotone() && self.closing_ok()
    }
}

/// Recomputes the potential Φ_i = f(A_i) + f(S ∪ A_i ∪ T↓i) along `trace`,
/// where T↓i is `t` with the elements of the first i arrived parts removed.
/// `t` must be a base; `s` is arbitrary.
pub fn check_potential_monotone(
    instance: &Instance,
    trace: &GreedyTrace,
    s: &ElementSet,
    t: &ElementSet,
) -> Result<PotentialCheck> {
    let matroid = instance.matroid();
    let oracle = instance.oracle();
    let ground = matroid.ground();
    if !matroid.is_base(t)? {
        return Err(SglError::NotABase(t.render(ground)));
    }
    for id in s.iter() {
        ground.check_id(id)?;
    }
    if trace.permutation.len() != matroid.m() || trace.steps.len() != matroid.m() {
        return Err(SglError::InvariantViolation(format!(
            "trace has {} steps for an instance with {} parts",
            trace.steps.len(),
            matroid.m()
        )));
    }

    let mut prefix = ElementSet::empty();
    let mut t_rest = t.clone();
    let mut phis = Vec::with_capacity(matroid.m() + 1);
    phis.push(oracle.evaluate(&prefix)? + oracle.evaluate(&s.union(&prefix).union(&t_rest))?);
    for (step, &pix) in trace.steps.iter().zip(&trace.permutation) {
        prefix.insert(ground.id(&step.element)?);
        for &id in matroid.part(pix).members() {
            t_rest.remove(id);
        }
        phis.push(oracle.evaluate(&prefix)? + oracle.evaluate(&s.union(&prefix).union(&t_rest))?);
    }

    let first_violation = phis
        .windows(2)
        .enumerate()
        .find(|(_, w)| w[1] < w[0] - EPS)
        .map(|(i, w)| (i + 1, w[0], w[1]));
    let closing_lhs = oracle.evaluate(&prefix)? + oracle.evaluate(&s.union(&prefix))?;
    let closing_rhs = oracle.evaluate(&s.union(t))?;
    Ok(PotentialCheck {
        phis,
        first_violation,
        closing_lhs,
        closing_rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwmStep {
    pub item: String,
    pub bidder: String,
    pub gain: f64,
    /// Total welfare after this assignment.
    pub welfare: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwmTrace {
    /// Arrival order as item indices.
    pub order: Vec<usize>,
    pub steps: Vec<SwmStep>,
    /// Item names assigned to each bidder, in bidder order.
    pub allocation: Vec<Vec<String>>,
    pub welfare: f64,
}

/// Direct greedy on an SWM instance: each arriving item goes to a bidder of
/// maximal marginal utility, ties broken by bidder list order. Welfare is
/// accumulated as the bidder-order sum of utilities, the same arithmetic the
/// reduced instance's oracle uses, so the reduction equivalence is exact.
pub fn swm_greedy(swm: &SwmInstance, order: &PermutationSource) -> Result<SwmTrace> {
    let items = swm.items();
    let bidders = swm.bidders();
    let order = resolve_permutation(order, items.len())?;

    let mut assigned: Vec<Vec<u32>> = vec![Vec::new(); bidders.len()];
    let mut utilities: Vec<f64> = bidders
        .iter()
        .zip(&assigned)
        .map(|(b, a)| b.utility_of_ids(a))
        .collect();
    let mut steps = Vec::with_capacity(order.len());

    for &item_ix in &order {
        let mut best = f64::NEG_INFINITY;
        let mut gains = Vec::with_capacity(bidders.len());
        let mut values = Vec::with_capacity(bidders.len());
        for (b, bidder) in bidders.iter().enumerate() {
            let mut with = assigned[b].clone();
            with.push(item_ix as u32);
            let value = bidder.utility_of_ids(&with);
            let gain = value - utilities[b];
            gains.push(gain);
            values.push(value);
            if gain > best {
                best = gain;
            }
        }
        let chosen = gains
            .iter()
            .position(|&g| g >= best - EPS)
            .expect("at least one bidder");
        assigned[chosen].push(item_ix as u32);
        utilities[chosen] = values[chosen];
        let welfare = utilities.iter().sum();
        steps.push(SwmStep {
            item: items[item_ix].clone(),
            bidder: bidders[chosen].name().to_string(),
            gain: gains[chosen],
            welfare,
        });
    }

    let welfare = utilities.iter().sum();
    let allocation = assigned
        .iter()
        .map(|a| a.iter().map(|&ix| items[ix as usize].clone()).collect())
        .collect();
    Ok(SwmTrace {
        order,
        steps,
        allocation,
        welfare,
    })
}

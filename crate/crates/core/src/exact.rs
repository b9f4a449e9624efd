//! Ground truth at small scale: brute-force optimum over all bases, the
//! exact expectation of the greedy over all m! arrival orders, a
//! deterministic Monte-Carlo estimator for larger m, the lower-bound curve
//! g(x) = x − x²/2, and the quadratic solver behind the 0.5096 ratio bound.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SglError};
use crate::greedy::{random_order_greedy, PermutationSource, TieBreakPolicy};
use crate::ground::ElementSet;
use crate::instances::Instance;
use crate::rng::{random_permutation, rng_for_trial};
use crate::EPS;

/// Enumeration limits for the exact paths. The CLI maps `SGL_ENUM_CAP` onto
/// both fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumCaps {
    /// Largest m! accepted by [`exact_expected_values`] (default 8! = 40320).
    pub max_orders: u128,
    /// Largest Π|P_i| accepted by [`brute_force_opt`] (default 10^7).
    pub max_bases: u128,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_orders: 40_320,
            max_bases: 10_000_000,
        }
    }
}

fn factorial_saturating(m: usize) -> u128 {
    (1..=m as u128).fold(1u128, |acc, i| acc.saturating_mul(i))
}

/// Enumerates every base (one element per part) and returns a maximizer;
/// among equal-valued maximizers, the one whose sorted name list is
/// lexicographically first.
pub fn brute_force_opt(instance: &Instance, caps: &EnumCaps) -> Result<(ElementSet, f64)> {
    let matroid = instance.matroid();
    let count = matroid.base_count();
    if count > caps.max_bases {
        return Err(SglError::TooLarge {
            what: "base enumeration",
            unit: "bases",
            size: count,
            cap: caps.max_bases,
        });
    }
    let ground = matroid.ground();
    let mut best: Option<(ElementSet, Vec<&str>, f64)> = None;
    for ids in matroid
        .parts()
        .iter()
        .map(|p| p.members().iter().copied())
        .multi_cartesian_product()
    {
        let base = ElementSet::from_ids(ids);
        let value = instance.oracle().evaluate(&base)?;
        let replace = match &best {
            None => true,
            Some((_, best_names, best_value)) => {
                value > *best_value
                    || (value == *best_value && {
                        let mut names = base.names(ground);
                        names.sort_unstable();
                        names < *best_names
                    })
            }
        };
        if replace {
            let mut names = base.names(ground);
            names.sort_unstable();
            best = Some((base, names, value));
        }
    }
    let (base, _, value) = best.expect("at least one base");
    Ok((base, value))
}

/// How an [`ExpectationReport`] was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    Exact {
        orders: u64,
    },
    MonteCarlo {
        trials: u64,
        seed: u64,
        /// Standard error of each per-step mean.
        stderr: Vec<f64>,
    },
}

/// Expected greedy performance on one instance under one tie policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationReport {
    /// E[f(A_i)] for i = 0..=m.
    pub per_step: Vec<f64>,
    pub expected_final: f64,
    pub opt_value: f64,
    /// expected_final / opt_value.
    pub ratio: f64,
    /// Reduced fraction of the ratio, present when every sampled final value
    /// and the optimum are integers.
    pub ratio_fraction: Option<(u64, u64)>,
    pub mode: Mode,
}

fn as_integer(v: f64) -> Option<u128> {
    let r = v.round();
    if (v - r).abs() <= EPS && (0.0..=u64::MAX as f64).contains(&r) {
        Some(r as u128)
    } else {
        None
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn reduce_fraction(num: u128, den: u128) -> Option<(u64, u64)> {
    if den == 0 {
        return None;
    }
    let d = gcd(num, den).max(1);
    let (num, den) = (num / d, den / d);
    Some((u64::try_from(num).ok()?, u64::try_from(den).ok()?))
}

fn build_report(
    per_step_sums: Vec<f64>,
    samples: u64,
    opt_value: f64,
    int_final_sum: Option<u128>,
    mode: Mode,
) -> ExpectationReport {
    let per_step: Vec<f64> = per_step_sums.iter().map(|s| s / samples as f64).collect();
    let expected_final = *per_step.last().expect("at least f(A_0)");
    let ratio_fraction = match (int_final_sum, as_integer(opt_value)) {
        (Some(num), Some(opt)) => reduce_fraction(num, opt * samples as u128),
        _ => None,
    };
    ExpectationReport {
        per_step,
        expected_final,
        opt_value,
        ratio: expected_final / opt_value,
        ratio_fraction,
        mode,
    }
}

/// Runs the greedy on all m! arrival orders and averages the per-step prefix
/// values. Requires m! within `caps.max_orders` and base enumeration within
/// `caps.max_bases` (for the optimum).
pub fn exact_expected_values(
    instance: &Instance,
    tie: &TieBreakPolicy,
    caps: &EnumCaps,
) -> Result<ExpectationReport> {
    let m = instance.matroid().m();
    let orders = factorial_saturating(m);
    if orders > caps.max_orders {
        return Err(SglError::TooLarge {
            what: "order enumeration",
            unit: "orders",
            size: orders,
            cap: caps.max_orders,
        });
    }
    let (_, opt_value) = brute_force_opt(instance, caps)?;
    let empty_value = instance.oracle().evaluate(&ElementSet::empty())?;

    let mut sums = vec![0.0f64; m + 1];
    let mut int_final_sum: Option<u128> = Some(0);
    for perm in (0..m).permutations(m) {
        let trace = random_order_greedy(instance, &PermutationSource::Explicit(perm), tie)?;
        sums[0] += empty_value;
        for (i, step) in trace.steps.iter().enumerate() {
            sums[i + 1] += step.value;
        }
        int_final_sum = match (int_final_sum, as_integer(trace.final_value)) {
            (Some(acc), Some(v)) => Some(acc + v),
            _ => None,
        };
    }

    Ok(build_report(
        sums,
        orders as u64,
        opt_value,
        int_final_sum,
        Mode::Exact {
            orders: orders as u64,
        },
    ))
}

const MC_CHUNK: u64 = 4096;

struct ChunkStats {
    sums: Vec<f64>,
    sumsqs: Vec<f64>,
    int_final_sum: Option<u128>,
}

/// Estimates the same expectation from `trials` seeded permutations. Trial t
/// draws its permutation from a generator keyed by (seed, t), and trials are
/// aggregated in fixed chunks in trial order, so the result is bit-identical
/// no matter how many worker threads carry the chunks.
///
/// Computing the ratio requires the brute-force optimum, so this can fail
/// with TooLarge on instances whose base count exceeds `caps.max_bases` even
/// though the estimation itself would scale.
pub fn monte_carlo_expected_values(
    instance: &Instance,
    trials: u64,
    seed: u64,
    tie: &TieBreakPolicy,
    caps: &EnumCaps,
) -> Result<ExpectationReport> {
    if trials == 0 {
        return Err(SglError::OutOfRange {
            name: "trials",
            value: 0.0,
            range: ">= 1",
        });
    }
    let m = instance.matroid().m();
    let (_, opt_value) = brute_force_opt(instance, caps)?;
    let empty_value = instance.oracle().evaluate(&ElementSet::empty())?;

    let n_chunks = trials.div_ceil(MC_CHUNK);
    let chunks: Result<Vec<ChunkStats>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * MC_CHUNK;
            let hi = (lo + MC_CHUNK).min(trials);
            let mut stats = ChunkStats {
                sums: vec![0.0; m + 1],
                sumsqs: vec![0.0; m + 1],
                int_final_sum: Some(0),
            };
            for t in lo..hi {
                let perm = random_permutation(&mut rng_for_trial(seed, t), m);
                let trace = random_order_greedy(instance, &PermutationSource::Explicit(perm), tie)?;
                stats.sums[0] += empty_value;
                stats.sumsqs[0] += empty_value * empty_value;
                for (i, step) in trace.steps.iter().enumerate() {
                    stats.sums[i + 1] += step.value;
                    stats.sumsqs[i + 1] += step.value * step.value;
                }
                stats.int_final_sum = match (stats.int_final_sum, as_integer(trace.final_value)) {
                    (Some(acc), Some(v)) => Some(acc + v),
                    _ => None,
                };
            }
            Ok(stats)
        })
        .collect();
    let chunks = chunks?;

    let mut sums = vec![0.0f64; m + 1];
    let mut sumsqs = vec![0.0f64; m + 1];
    let mut int_final_sum: Option<u128> = Some(0);
    for chunk in chunks {
        for i in 0..=m {
            sums[i] += chunk.sums[i];
            sumsqs[i] += chunk.sumsqs[i];
        }
        int_final_sum = match (int_final_sum, chunk.int_final_sum) {
            (Some(acc), Some(v)) => Some(acc + v),
            _ => None,
        };
    }

    let n = trials as f64;
    let stderr: Vec<f64> = sums
        .iter()
        .zip(&sumsqs)
        .map(|(&s, &sq)| {
            let var = ((sq - s * s / n) / (n - 1.0).max(1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();

    Ok(build_report(
        sums,
        trials,
        opt_value,
        int_final_sum,
        Mode::MonteCarlo {
            trials,
            seed,
            stderr,
        },
    ))
}

/// The per-step lower-bound curve: after a fraction x of the parts, the
/// greedy holds at least g(x) = x − x²/2 of the optimum in expectation.
pub fn g(x: f64) -> f64 {
    x - x * x / 2.0
}

/// g(i/m) for i = 0..=m.
pub fn g_curve(m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(SglError::OutOfRange {
            name: "m",
            value: 0.0,
            range: ">= 1",
        });
    }
    Ok((0..=m).map(|i| g(i as f64 / m as f64)).collect())
}

/// The quadratic behind the ratio bound at parameters (p, q), with its
/// positive root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSolution {
    pub p: f64,
    pub q: f64,
    /// (a, b, c0) of a·c² + b·c + c0 = 0.
    pub quadratic: [f64; 3],
    /// The unique positive root.
    pub c: f64,
}

/// Solves 6c² + (2p − 3 − pq(2−q) + p²(1−q)²)·c − p(1−q²) = 0 for its
/// positive root. p = 0 is accepted as the degenerate limit, where the
/// equation collapses to 6c² − 3c = 0 and the root is exactly 1/2. The
/// coefficient groupings below are fixed: they reproduce the reference
/// values −2.3984 and −0.336 at (p, q) = (0.4, 0.4) bit for bit.
pub fn bound_fixed_point(p: f64, q: f64) -> Result<BoundSolution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SglError::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(SglError::OutOfRange {
            name: "q",
            value: q,
            range: "(0, 1)",
        });
    }
    let a = 6.0;
    let b = 2.0 * p - 3.0 - p * (q * (2.0 - q) - p * (1.0 - q) * (1.0 - q));
    let c0 = 0.0 - p * (1.0 - q * q);

    // c0 ≤ 0, so the discriminant is at least b² and the positive root is
    // well defined; the branch avoids cancellation between -b and the root
    // of the discriminant.
    let disc = b * b - 4.0 * a * c0;
    let sq = disc.sqrt();
    let c = if b <= 0.0 {
        (-b + sq) / (2.0 * a)
    } else {
        (2.0 * c0) / (-b - sq)
    };
    Ok(BoundSolution {
        p,
        q,
        quadratic: [a, b, c0],
        c,
    })
}

/// Signed gap between the root and the fixed-point form it solves:
/// c − (3 + pq(2−q) + pc⁻¹(1−q²) − p²(1−q)²) / (6 + 2pc⁻¹). Zero to within
/// about 1e-15 for every accepted (p, q).
pub fn bound_residual(sol: &BoundSolution) -> f64 {
    let BoundSolution { p, q, c, .. } = *sol;
    let rhs = (3.0 + p * q * (2.0 - q) + p / c * (1.0 - q * q) - p * p * (1.0 - q) * (1.0 - q))
        / (6.0 + 2.0 * p / c);
    c - rhs
}

/// Evaluates [`bound_fixed_point`] on the grid
/// {1/resolution, ..., (resolution−1)/resolution}² and returns the solution
/// with the largest root (row-major first maximizer on exact ties).
pub fn bound_grid_search(resolution: usize) -> Result<BoundSolution> {
    if resolution < 2 {
        return Err(SglError::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: ">= 2",
        });
    }
    let mut best: Option<BoundSolution> = None;
    for i in 1..resolution {
        let p = i as f64 / resolution as f64;
        for j in 1..resolution {
            let q = j as f64 / resolution as f64;
            let sol = bound_fixed_point(p, q)?;
            if best.as_ref().is_none_or(|b| sol.c > b.c) {
                best = Some(sol);
            }
        }
    }
    Ok(best.expect("resolution >= 2 yields at least one grid point"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::make_partition;
    use crate::instances::{build_instance_7_12, random_coverage_instance, Instance};
    use crate::oracle::ValueOracle;

    fn caps() -> EnumCaps {
        EnumCaps::default()
    }

    #[test]
    fn brute_force_finds_the_7_12_optimum() {
        let inst = build_instance_7_12();
        let (base, value) = brute_force_opt(&inst, &caps()).unwrap();
        assert_eq!(value, 12.0);
        assert_eq!(base.render(inst.matroid().ground()), "x1 y1 z1");
    }

    #[test]
    fn brute_force_breaks_value_ties_by_name() {
        let matroid = make_partition(&[("P".into(), vec!["b".into(), "a".into()])]).unwrap();
        let oracle = ValueOracle::modular(matroid.ground().clone(), vec![1.0, 1.0]).unwrap();
        let inst = Instance::new("tie", matroid, oracle).unwrap();
        let (base, value) = brute_force_opt(&inst, &caps()).unwrap();
        assert_eq!(value, 1.0);
        assert_eq!(base.render(inst.matroid().ground()), "a");
    }

    #[test]
    fn brute_force_respects_the_cap() {
        let inst = build_instance_7_12();
        let tight = EnumCaps {
            max_bases: 63,
            ..caps()
        };
        assert!(matches!(
            brute_force_opt(&inst, &tight),
            Err(SglError::TooLarge { .. })
        ));
    }

    #[test]
    fn exact_expectation_on_7_12() {
        let inst = build_instance_7_12();
        let report = exact_expected_values(&inst, &TieBreakPolicy::LastIndex, &caps()).unwrap();
        assert_eq!(report.per_step, [0.0, 4.0, 6.0, 7.0]);
        assert_eq!(report.expected_final, 7.0);
        assert_eq!(report.opt_value, 12.0);
        assert_eq!(report.ratio_fraction, Some((7, 12)));
        assert_eq!(report.mode, Mode::Exact { orders: 6 });
    }

    #[test]
    fn modular_instances_have_ratio_one() {
        let matroid = make_partition(&[
            ("P1".into(), vec!["a".into(), "b".into()]),
            ("P2".into(), vec!["c".into(), "d".into()]),
        ])
        .unwrap();
        let oracle =
            ValueOracle::modular(matroid.ground().clone(), vec![3.0, 1.0, 2.0, 5.0]).unwrap();
        let inst = Instance::new("mod", matroid, oracle).unwrap();
        let report = exact_expected_values(&inst, &TieBreakPolicy::FirstName, &caps()).unwrap();
        assert_eq!(report.expected_final, report.opt_value);
        assert_eq!(report.ratio_fraction, Some((1, 1)));
    }

    #[test]
    fn exact_expectation_respects_the_order_cap() {
        let inst = random_coverage_instance(9, 1, 4, 3, 0).unwrap();
        assert!(matches!(
            exact_expected_values(&inst, &TieBreakPolicy::FirstName, &caps()),
            Err(SglError::TooLarge { .. })
        ));
    }

    #[test]
    fn monte_carlo_is_exact_on_an_order_invariant_instance() {
        let inst = build_instance_7_12();
        let tie = TieBreakPolicy::LastIndex;
        let report = monte_carlo_expected_values(&inst, 200, 1, &tie, &caps()).unwrap();
        assert_eq!(report.expected_final, 7.0);
        assert_eq!(report.ratio_fraction, Some((7, 12)));
        match &report.mode {
            Mode::MonteCarlo { stderr, .. } => {
                assert_eq!(stderr.len(), 4);
                assert_eq!(stderr[3], 0.0);
            }
            other => panic!("unexpected mode {other:?}"),
        }
        let again = monte_carlo_expected_values(&inst, 200, 1, &tie, &caps()).unwrap();
        assert_eq!(report, again);
        assert!(matches!(
            monte_carlo_expected_values(&inst, 0, 1, &tie, &caps()),
            Err(SglError::OutOfRange { .. })
        ));
    }

    #[test]
    fn one_trial_equals_one_run() {
        let inst = random_coverage_instance(4, 2, 6, 3, 9).unwrap();
        let tie = TieBreakPolicy::FirstName;
        let seed = 5;
        let report = monte_carlo_expected_values(&inst, 1, seed, &tie, &caps()).unwrap();
        let perm = random_permutation(&mut rng_for_trial(seed, 0), 4);
        let trace = random_order_greedy(&inst, &PermutationSource::Explicit(perm), &tie).unwrap();
        assert_eq!(report.expected_final, trace.final_value);
        assert_eq!(
            report.per_step[1..],
            *trace.steps.iter().map(|s| s.value).collect::<Vec<_>>()
        );
    }

    #[test]
    fn curve_values() {
        assert_eq!(g(0.0), 0.0);
        assert_eq!(g(1.0), 0.5);
        assert_eq!(g(0.9), 0.495);
        let curve = g_curve(10).unwrap();
        assert_eq!(curve.len(), 11);
        assert_eq!(curve[9], 0.495);
        assert!(g_curve(0).is_err());
    }

    #[test]
    fn bound_at_the_reference_point() {
        let sol = bound_fixed_point(0.4, 0.4).unwrap();
        assert_eq!(sol.quadratic, [6.0, -2.3984, -0.336]);
        assert!(sol.c >= 0.5096 && sol.c <= 0.5097, "c = {}", sol.c);
        assert_eq!(sol.c, 0.5096192848064404);
        assert!(bound_residual(&sol).abs() <= 1e-12);
    }

    #[test]
    fn bound_degenerates_to_one_half_at_p_zero() {
        for q in [0.1, 0.4, 0.9] {
            let sol = bound_fixed_point(0.0, q).unwrap();
            assert_eq!(sol.quadratic, [6.0, -3.0, 0.0]);
            assert!((sol.c - 0.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn bound_rejects_out_of_range_parameters() {
        assert!(matches!(
            bound_fixed_point(1.5, 0.4),
            Err(SglError::OutOfRange { name: "p", .. })
        ));
        assert!(matches!(
            bound_fixed_point(0.4, 0.0),
            Err(SglError::OutOfRange { name: "q", .. })
        ));
        assert!(matches!(
            bound_fixed_point(0.4, 1.0),
            Err(SglError::OutOfRange { name: "q", .. })
        ));
        assert!(bound_fixed_point(f64::NAN, 0.4).is_err());
    }

    #[test]
    fn residual_vanishes_across_the_domain() {
        for i in 1..10 {
            for j in 1..10 {
                let sol = bound_fixed_point(i as f64 / 10.0, j as f64 / 10.0).unwrap();
                assert!(
                    bound_residual(&sol).abs() <= 1e-12,
                    "(p,q)=({},{}) residual {}",
                    sol.p,
                    sol.q,
                    bound_residual(&sol)
                );
            }
        }
    }

    #[test]
    fn grid_search_small_and_nested() {
        let single = bound_grid_search(2).unwrap();
        assert_eq!((single.p, single.q), (0.5, 0.5));
        assert_eq!(single.c, bound_fixed_point(0.5, 0.5).unwrap().c);
        assert!(bound_grid_search(1).is_err());

        let coarse = bound_grid_search(4).unwrap();
        let fine = bound_grid_search(8).unwrap();
        assert!(fine.c >= coarse.c);
    }
}

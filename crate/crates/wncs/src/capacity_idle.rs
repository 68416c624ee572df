//! Idle-time characterization of the timely-throughput capacity region and
//! the stabilizability tests built on it.
//!
//! For a sub-system set `S` served work-conservingly within a frame of `h`
//! slots, the number of busy slots is `X_S = min(sum of Theta_i, h)` where
//! `Theta_i` is the geometric number of transmissions until sub-system `i`'s
//! packet gets through. The whole system is stabilizable exactly when, for
//! every nonempty subset `S`,
//!
//! ```text
//! sum_{i in S} (1 - q_max_i) / p_i + E[h - X_S] < h
//! ```
//!
//! i.e. the required delivery rates fit strictly inside the region. The empty
//! subset's inequality has identically zero slack and carries no information,
//! so enumeration covers the `2^N - 1` nonempty subsets.
//!
//! `X_S` distributions are computed by exact dynamic programming (one
//! truncated geometric convolution per added flow), so all slacks are
//! deterministic to floating precision.

use crate::control::max_dropout_rate;
use crate::error::Error;
use crate::model::{StabilityVerdict, SystemConfig};
use crate::Result;
use std::io::Write;

/// Subsets are enumerated up to this many sub-systems.
pub const SUBSET_ENUMERATION_CAP: usize = 20;

/// Exact distribution of the busy-slot count `X_S = min(sum Theta_i, h)` for
/// the sub-systems in `subset`.
#[derive(Clone, Debug)]
pub struct BusySlotPmf {
    /// 0-based sub-system indices.
    pub subset: Vec<usize>,
    /// `probs[t] = P(X_S = t)` for `t = 0..=h`.
    pub probs: Vec<f64>,
}

impl BusySlotPmf {
    /// Point mass at zero busy slots (empty subset).
    fn empty(h: u32) -> Self {
        let mut probs = vec![0.0; h as usize + 1];
        probs[0] = 1.0;
        BusySlotPmf { subset: Vec::new(), probs }
    }

    /// Extends the pmf by one more flow with success probability `p`.
    /// Mass that would exceed `h` accumulates in the truncation bucket.
    fn extend(&self, index: usize, p: f64) -> Self {
        let h = self.probs.len() - 1;
        let mut next = vec![0.0; h + 1];
        for (t, &w) in self.probs.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            if t == h {
                next[h] += w;
                continue;
            }
            // exact transmissions m = 1 .. h-1-t, then the tail P(Theta >= h-t)
            let mut geom = p; // P(Theta = m) = (1-p)^(m-1) p
            for m in 1..(h - t) {
                next[t + m] += w * geom;
                geom *= 1.0 - p;
            }
            next[h] += w * (1.0 - p).powi((h - t) as i32 - 1);
        }
        let mut subset = self.subset.clone();
        subset.push(index);
        BusySlotPmf { subset, probs: next }
    }

    /// Expected number of busy slots.
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(t, &p)| t as f64 * p).sum()
    }
}

/// Exact pmf of the busy-slot count for `subset` within a frame of `h` slots.
pub fn busy_pmf(subset: &[usize], channel: &[f64], h: u32) -> BusySlotPmf {
    let mut pmf = BusySlotPmf::empty(h);
    for &i in subset {
        pmf = pmf.extend(i, channel[i]);
    }
    pmf
}

/// Expected number of idle slots `E[max(h - sum Theta_i, 0)]`, in `[0, h]`.
pub fn expected_idle(subset: &[usize], channel: &[f64], h: u32) -> f64 {
    h as f64 - busy_pmf(subset, channel, h).mean()
}

/// 1-based concatenated index string for a sorted subset, e.g. `{0, 2}`
/// renders as `"13"`.
pub fn subset_string(subset: &[usize]) -> String {
    subset.iter().map(|i| (i + 1).to_string()).collect()
}

fn homogeneous_period(config: &SystemConfig) -> Result<u32> {
    config.common_period().ok_or_else(|| {
        Error::WrongSpecialization(
            "subset stability test requires a common sampling period; use the \
             big-frame sufficiency test for heterogeneous periods"
            .to_string(),
        )
    })
}

/// Required per-frame delivery rates `1 - q_max_i`, each at the plant's own
/// sampling period.
pub fn required_rates(config: &SystemConfig) -> Vec<f64> {
    config
        .plants
        .iter()
        .zip(&config.sampling_periods)
        .map(|(plant, &h)| 1.0 - max_dropout_rate(plant.a, h, config.slot_length))
        .collect()
}

/// Runs the subset test over all nonempty sub-system sets. The verdict
/// reports the tightest subset (as a concatenated index string) and its
/// slack; `stabilizable` holds when the minimum slack clears the config's
/// feasibility margin.
pub fn check_stability_general(config: &SystemConfig) -> Result<StabilityVerdict> {
    let h = homogeneous_period(config)?;
    let n = config.n();
    if n > SUBSET_ENUMERATION_CAP {
        return Err(Error::TooLarge(format!(
            "{n} sub-systems exceed the subset enumeration cap {SUBSET_ENUMERATION_CAP}"
        )));
    }
    let rates = required_rates(config);
    let demand: Vec<f64> = rates.iter().zip(&config.channel).map(|(r, p)| r / p).collect();

    // Depth-first enumeration: each subset's pmf extends its parent's by one
    // convolution, so every nonempty subset costs O(h^2).
    struct Walk<'c> {
        channel: &'c [f64],
        demand: &'c [f64],
        h: f64,
        best_slack: f64,
        best_subset: Vec<usize>,
    }
    impl Walk<'_> {
        fn visit(&mut self, from: usize, pmf: &BusySlotPmf, demand_sum: f64) {
            for i in from..self.channel.len() {
                let extended = pmf.extend(i, self.channel[i]);
                let sum = demand_sum + self.demand[i];
                let idle = self.h - extended.mean();
                let slack = self.h - sum - idle;
                if slack < self.best_slack {
                    self.best_slack = slack;
                    self.best_subset = extended.subset.clone();
                }
                self.visit(i + 1, &extended, sum);
            }
        }
    }
    let mut walk = Walk {
        channel: &config.channel,
        demand: &demand,
        h: h as f64,
        best_slack: f64::INFINITY,
        best_subset: Vec::new(),
    };
    walk.visit(0, &BusySlotPmf::empty(h), 0.0);

    Ok(StabilityVerdict::new(
        walk.best_slack,
        Some(subset_string(&walk.best_subset)),
        config.feasibility_margin,
    ))
}

/// Perfect-channel specialization: one inequality,
/// `sum_i (1 - q_max_i) < h`. Requires every `p_i = 1`.
pub fn check_stability_perfect(config: &SystemConfig) -> Result<StabilityVerdict> {
    let h = homogeneous_period(config)?;
    if !config.is_perfect_channel() {
        return Err(Error::WrongSpecialization(
            "perfect-channel test requires every channel probability to be 1".to_string(),
        ));
    }
    let total: f64 = required_rates(config).iter().sum();
    let slack = h as f64 - total;
    let full: Vec<usize> = (0..config.n()).collect();
    Ok(StabilityVerdict::new(slack, Some(subset_string(&full)), config.feasibility_margin))
}

/// Smallest period `m` such that the perfect-channel condition holds for
/// every integer `h >= m`. The condition holds automatically for `h > N`
/// (the slack is at least `h - N`), so only `h` in `[1, N]` need checking;
/// the result normally lies in `[1, N]`. In the degenerate case where the
/// slack at `h = N` does not clear the margin the scan returns `N + 1`,
/// which always does.
pub fn min_sampling_period_perfect(config: &SystemConfig) -> Result<u32> {
    homogeneous_period(config)?;
    if !config.is_perfect_channel() {
        return Err(Error::WrongSpecialization(
            "minimum sampling period search requires a perfect channel".to_string(),
        ));
    }
    let n = config.n() as u32;
    let ok = |h: u32| -> Result<bool> {
        let mut probe = config.clone();
        probe.sampling_periods = vec![h; config.n()];
        Ok(check_stability_perfect(&probe)?.stabilizable)
    };
    if !ok(n)? {
        return Ok(n + 1);
    }
    let mut h_min = n;
    while h_min > 1 && ok(h_min - 1)? {
        h_min -= 1;
    }
    Ok(h_min)
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// Expected busy slots for `n` identical flows with success probability `p`
/// in a frame of `h` slots, by the explicit truncated negative-binomial pmf.
fn symmetric_busy_mean(n: usize, p: f64, h: u32) -> f64 {
    let nn = n as u32;
    if h <= nn {
        return h as f64;
    }
    let q = 1.0 - p;
    let pn = p.powi(n as i32);
    let mut mean = nn as f64 * pn;
    let mut tail_inner = pn; // P(X = n + k) without the (n+k) factor
    for k in 1..(h - nn) {
        tail_inner = binomial(nn + k - 1, k) * q.powi(k as i32) * pn;
        mean += (nn + k) as f64 * tail_inner;
    }
    let _ = tail_inner;
    let mut at_h = binomial(h - 1, h - nn) * q.powi((h - nn) as i32) * pn;
    for i in 0..nn {
        at_h += binomial(h, i) * q.powi((h - i) as i32) * p.powi(i as i32);
    }
    mean + h as f64 * at_h
}

/// Symmetric-structure specialization: `n` identical plants with growth `a`
/// and common channel quality `p`. One inequality decides the verdict; the
/// slack is reported on the same scale as the full-set row of the general
/// test, `E[X_[N]] - n (1 - q_max) / p`.
pub fn check_stability_symmetric(
    n: usize,
    a: f64,
    p: f64,
    h: u32,
    delta: f64,
    margin: f64,
) -> StabilityVerdict {
    let rate = 1.0 - max_dropout_rate(a, h, delta);
    let slack = symmetric_busy_mean(n, p, h) - n as f64 * rate / p;
    let full: Vec<usize> = (0..n).collect();
    StabilityVerdict::new(slack, Some(subset_string(&full)), margin)
}

/// Binary search for the minimum symmetric channel quality that stabilizes
/// the instance; `None` when even a perfect channel does not. The returned
/// value `p_min` brackets the boundary: the verdict is unstable at
/// `p_min - tol` and stable at `p_min + tol`.
pub fn min_channel_quality_symmetric(
    n: usize,
    a: f64,
    h: u32,
    delta: f64,
    tol: f64,
    margin: f64,
) -> Option<f64> {
    let stable = |p: f64| check_stability_symmetric(n, a, p, h, delta, margin).stabilizable;
    if !stable(1.0) {
        return None;
    }
    let mut lo = 0.0f64; // p = 0 is out of the domain and counted unstable
    let mut hi = 1.0f64;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// One sweep grid point for CSV emission.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub h: u32,
    /// Common channel probability of the grid point, when one exists.
    pub p: Option<f64>,
    pub verdict: StabilityVerdict,
}

/// Writes sweep rows as `h,p,stabilizable,slack,binding_subset`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "h,p,stabilizable,slack,binding_subset")?;
    for row in rows {
        let p = row.p.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            row.h,
            p,
            row.verdict.stabilizable,
            row.verdict.slack,
            row.verdict.binding_constraint.as_deref().unwrap_or(""),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContinuousPlant, SystemConfig};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn fig3_config() -> SystemConfig {
        SystemConfig {
            plants: vec![
                ContinuousPlant { a: 6.5137, b: 1.0 },
                ContinuousPlant { a: 5.8265, b: 1.0 },
                ContinuousPlant { a: 8.8964, b: 1.0 },
            ],
            channel: vec![0.7690, 0.7277, 0.2846],
            sampling_periods: vec![5, 5, 5],
            slot_length: 0.01,
            feasibility_margin: 1e-6,
        }
        .validate()
        .unwrap()
    }

    fn perfect_six(h: u32) -> SystemConfig {
        let growth = [3.7482, 8.7512, 7.7711, 8.5482, 6.8823, 5.6830];
        SystemConfig {
            plants: growth.iter().map(|&a| ContinuousPlant { a, b: 1.0 }).collect(),
            channel: vec![1.0; 6],
            sampling_periods: vec![h; 6],
            slot_length: 0.0114,
            feasibility_margin: 1e-6,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn empty_subset_is_point_mass_at_zero() {
        let pmf = busy_pmf(&[], &[0.5, 0.5], 4);
        assert_eq!(pmf.probs[0], 1.0);
        assert!(pmf.probs[1..].iter().all(|&p| p == 0.0));
        assert_eq!(expected_idle(&[], &[0.5, 0.5], 4), 4.0);
    }

    #[test]
    fn full_symmetric_subset_saturates_short_frames() {
        // |S| = N >= h: every slot is busy with probability one.
        let channel = vec![0.3; 4];
        let subset = [0, 1, 2, 3];
        for h in 1..=4u32 {
            let pmf = busy_pmf(&subset, &channel, h);
            assert!((pmf.probs[h as usize] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_flow_two_slots() {
        let pmf = busy_pmf(&[0], &[0.5], 2);
        assert!((pmf.probs[1] - 0.5).abs() < 1e-15);
        assert!((pmf.probs[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_perfect_flow_leaves_h_minus_one_idle() {
        assert!((expected_idle(&[0], &[1.0], 5) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn expected_idle_matches_monte_carlo() {
        // N=2, p=(0.7,0.3), h=3 against a sampled estimate of the same
        // quantity, within 3 standard errors.
        let channel = [0.7, 0.3];
        let exact = expected_idle(&[0, 1], &channel, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(2024);
        let samples = 1_000_000usize;
        let mut sum = 0.0f64;
        let mut sq = 0.0f64;
        for _ in 0..samples {
            let mut slots = 0u32;
            for &p in &channel {
                let mut theta = 1u32;
                while rng.gen::<f64>() >= p {
                    theta += 1;
                    if slots + theta >= 64 {
                        break;
                    }
                }
                slots += theta;
            }
            let idle = 3f64 - (slots.min(3)) as f64;
            sum += idle;
            sq += idle * idle;
        }
        let mean = sum / samples as f64;
        let var = (sq / samples as f64 - mean * mean).max(0.0);
        let se = (var / samples as f64).sqrt();
        assert!(
            (exact - mean).abs() <= 3.0 * se,
            "exact {exact} vs MC {mean} (se {se})"
        );
    }

    #[test]
    fn appendix_identity_for_singletons() {
        // p * E[min(Theta, m)] == 1 - (1-p)^m to near machine precision.
        for pi in 1..=10 {
            let p = pi as f64 / 10.0;
            for m in 1..=12u32 {
                let mean = busy_pmf(&[0], &[p], m).mean();
                let expect = 1.0 - (1.0 - p).powi(m as i32);
                assert!(
                    (p * mean - expect).abs() < 1e-12,
                    "p={p} m={m}: {} vs {expect}",
                    p * mean
                );
            }
        }
    }

    #[test]
    fn general_system_is_stabilizable() {
        let verdict = check_stability_general(&fig3_config()).unwrap();
        assert!(verdict.stabilizable);
        assert_eq!(verdict.binding_constraint.as_deref(), Some("123"));
        assert!((verdict.slack - 0.1211394888314512).abs() < 1e-9);
    }

    #[test]
    fn single_plant_perfect_channel_always_stabilizable() {
        // The singleton inequality reduces to q_max > 0, so any growth rate
        // passes as long as q_max clears the strictness margin (a plant stiff
        // enough that q_max < margin is reported as a boundary case instead).
        for a in [0.0, 1.0, 8.0] {
            for h in [1u32, 3, 9] {
                let cfg = SystemConfig {
                    plants: vec![ContinuousPlant { a, b: 1.0 }],
                    channel: vec![1.0],
                    sampling_periods: vec![h],
                    slot_length: 0.02,
                    feasibility_margin: 1e-6,
                }
                .validate()
                .unwrap();
                assert!(check_stability_general(&cfg).unwrap().stabilizable);
            }
        }
    }

    #[test]
    fn perfect_channel_six_plant_period_table() {
        // stable at h=1, unstable at h=2, stable for all h >= 3
        let expected = [true, false, true, true, true, true, true, true, true, true];
        for (idx, &want) in expected.iter().enumerate() {
            let h = idx as u32 + 1;
            let verdict = check_stability_perfect(&perfect_six(h)).unwrap();
            assert_eq!(verdict.stabilizable, want, "h={h}");
        }
        assert_eq!(min_sampling_period_perfect(&perfect_six(1)).unwrap(), 3);
    }

    #[test]
    fn subset_test_rejects_oversized_instances() {
        let cfg = SystemConfig::symmetric(21, 0.1, 0.9, 2, 0.1).validate().unwrap();
        assert!(matches!(check_stability_general(&cfg), Err(Error::TooLarge(_))));
    }

    #[test]
    fn perfect_test_rejects_lossy_channels() {
        let mut cfg = perfect_six(3);
        cfg.channel[2] = 0.9;
        assert!(matches!(
            check_stability_perfect(&cfg),
            Err(Error::WrongSpecialization(_))
        ));
    }

    #[test]
    fn min_period_is_one_for_single_slow_plant() {
        let cfg = SystemConfig {
            plants: vec![ContinuousPlant { a: 1e-4, b: 1.0 }],
            channel: vec![1.0],
            sampling_periods: vec![1],
            slot_length: 0.01,
            feasibility_margin: 1e-6,
        }
        .validate()
        .unwrap();
        assert_eq!(min_sampling_period_perfect(&cfg).unwrap(), 1);
    }

    #[test]
    fn symmetric_two_plant_stability_table() {
        // N=2, A=1, delta=0.1: p=0.300 unstable everywhere, p=0.500 stable
        // everywhere, p=0.425 stable exactly on {2,7,8,9,10}.
        let stable_at = |p: f64, h: u32| check_stability_symmetric(2, 1.0, p, h, 0.1, 1e-6).stabilizable;
        for h in 1..=10 {
            assert!(!stable_at(0.300, h), "p=0.300 h={h}");
            assert!(stable_at(0.500, h), "p=0.500 h={h}");
            let want = matches!(h, 2 | 7 | 8 | 9 | 10);
            assert_eq!(stable_at(0.425, h), want, "p=0.425 h={h}");
        }
    }

    #[test]
    fn symmetric_perfect_channel_long_frames_always_stable() {
        for n in 1..=5usize {
            for h in (n as u32 + 1)..=(n as u32 + 5) {
                assert!(check_stability_symmetric(n, 2.0, 1.0, h, 0.05, 1e-6).stabilizable);
            }
        }
    }

    #[test]
    fn symmetric_bad_channel_is_unstable() {
        let verdict = check_stability_symmetric(3, 1.0, 0.05, 5, 0.1, 1e-6);
        assert!(!verdict.stabilizable);
        assert!(verdict.slack < 0.0);
    }

    #[test]
    fn symmetric_agrees_with_general() {
        for n in 1..=4usize {
            for h in 1..=8u32 {
                for pi in 1..=10 {
                    let p = pi as f64 / 10.0;
                    let sym = check_stability_symmetric(n, 1.2, p, h, 0.05, 1e-6);
                    let cfg = SystemConfig::symmetric(n, 1.2, p, h, 0.05).validate().unwrap();
                    let gen = check_stability_general(&cfg).unwrap();
                    if gen.slack.abs() <= 1e-6 || sym.slack.abs() <= 1e-6 {
                        continue; // boundary band excluded
                    }
                    assert_eq!(sym.stabilizable, gen.stabilizable, "n={n} h={h} p={p}");
                }
            }
        }
    }

    #[test]
    fn submodular_chain_is_nonincreasing() {
        for n in 1..=6usize {
            for h in 1..=10u32 {
                for pi in 1..=10 {
                    let p = pi as f64 / 10.0;
                    let channel = vec![p; n];
                    let mut prev = f64::INFINITY;
                    for k in 1..=n {
                        let subset: Vec<usize> = (0..k).collect();
                        let share = (h as f64 - expected_idle(&subset, &channel, h)) / k as f64;
                        assert!(share <= prev + 1e-12, "n={n} h={h} p={p} k={k}");
                        prev = share;
                    }
                }
            }
        }
    }

    #[test]
    fn min_channel_quality_brackets_the_boundary() {
        let tol = 1e-4;
        let p_min = min_channel_quality_symmetric(3, 1.0, 5, 0.01, tol, 1e-6).unwrap();
        assert!(!check_stability_symmetric(3, 1.0, p_min - tol, 5, 0.01, 1e-6).stabilizable);
        assert!(check_stability_symmetric(3, 1.0, p_min + tol, 5, 0.01, 1e-6).stabilizable);
    }

    #[test]
    fn min_channel_quality_none_when_even_perfect_fails() {
        // Huge growth at h=1 with many plants: even p=1 cannot stabilize.
        assert_eq!(min_channel_quality_symmetric(6, 50.0, 1, 0.1, 1e-4, 1e-6), None);
    }

    #[test]
    fn sweep_csv_format() {
        let rows = vec![SweepRow {
            h: 2,
            p: Some(0.425),
            verdict: StabilityVerdict::new(0.5, Some("12".to_string()), 1e-6),
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "h,p,stabilizable,slack,binding_subset\n2,0.425,true,0.5,12\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        /// Mass conservation of the busy-slot pmf.
        #[test]
        fn pmf_sums_to_one(
            probs in proptest::collection::vec(0.05f64..1.0, 1..5),
            h in 1u32..12,
        ) {
            let subset: Vec<usize> = (0..probs.len()).collect();
            let pmf = busy_pmf(&subset, &probs, h);
            let total: f64 = pmf.probs.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(pmf.probs.iter().all(|&p| p >= 0.0));
        }

        /// Componentwise channel improvements never lose stabilizability
        /// (tested away from the decision boundary).
        #[test]
        fn better_channels_preserve_stabilizability(
            seed in 0u64..5000,
        ) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..=4usize);
            let h = rng.gen_range(1..=6u32);
            let plants: Vec<ContinuousPlant> = (0..n)
                .map(|_| ContinuousPlant { a: rng.gen_range(0.0..4.0), b: 1.0 })
                .collect();
            let channel: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let improved: Vec<f64> = channel
                .iter()
                .map(|&p| (p + rng.gen_range(0.0..0.5)).min(1.0))
                .collect();
            let cfg = SystemConfig {
                plants,
                channel,
                sampling_periods: vec![h; n],
                slot_length: 0.05,
                feasibility_margin: 1e-6,
            }
            .validate()
            .unwrap();
            let base = check_stability_general(&cfg).unwrap();
            prop_assume!(base.stabilizable && base.slack > 1e-3);
            let mut better = cfg.clone();
            better.channel = improved;
            let improved_verdict = check_stability_general(&better).unwrap();
            prop_assert!(improved_verdict.stabilizable,
                "slack went from {} to {}", base.slack, improved_verdict.slack);
        }
    }
}

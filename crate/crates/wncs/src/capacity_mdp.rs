//! Occupancy-measure characterization of the capacity region, randomized
//! scheduling-policy extraction, the heterogeneous-period big-frame variant,
//! and end-to-end co-design synthesis.
//!
//! The per-slot system state is the set of sub-systems that still hold an
//! undelivered control packet, one bit per sub-system. Transmitting to a
//! pending sub-system clears its bit with the channel's success probability;
//! entering a slot that starts one of its sampling periods re-arms the bit.
//! Over one (big) frame the slot-indexed state-action occupancies
//! `x_t(s, a)` satisfy flow balance with a wrap-around row, per-slot
//! normalization, and per-flow throughput rows; any feasible occupancy yields
//! a cyclic randomized policy by per-(slot, state) normalization.

use crate::capacity_idle;
use crate::control::{max_dropout_rate, solve_dare, DareSolution, DEFAULT_DARE_TOL};
use crate::error::Error;
use crate::lp::{self, LpProblem, LpStatus, Sense};
use crate::model::{StabilityVerdict, SystemConfig};
use crate::Result;
use std::collections::BTreeMap;

/// State-space cap: `2^N` states must stay enumerable.
pub const MAX_SUBSYSTEMS: usize = 12;
/// Cap on the slots per (big) frame.
pub const MAX_BIG_FRAME: u32 = 64;
/// Margin variable cap handed to the LP (delivery probabilities never exceed 1).
const MARGIN_CAP: f64 = 1.0;

/// Slot-indexed finite MDP over pending-packet states.
#[derive(Clone, Debug)]
pub struct MdpModel {
    n: usize,
    horizon: usize,
    channel: Vec<f64>,
    periods: Vec<u32>,
    /// `reset_masks[t-1]`: sub-systems whose sampling period starts at slot `t`.
    reset_masks: Vec<u32>,
}

impl MdpModel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Slots per (big) frame.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn periods(&self) -> &[u32] {
        &self.periods
    }

    pub fn channel(&self) -> &[f64] {
        &self.channel
    }

    /// Number of pending-set states.
    pub fn state_count(&self) -> usize {
        1 << self.n
    }

    /// Sub-systems whose period starts at `slot` (1-based, `1..=horizon`).
    pub fn reset_mask(&self, slot: usize) -> u32 {
        self.reset_masks[slot - 1]
    }

    /// Per-slot reward of sub-system `flow`: the probability its packet gets
    /// through when action `a` is taken in state `s`.
    pub fn reward(&self, flow: usize, s: usize, a: usize) -> f64 {
        if a == flow && s & (1 << flow) != 0 {
            self.channel[flow]
        } else {
            0.0
        }
    }

    /// Successor distribution for taking action `a` in state `s` at slot `t`.
    /// Delivery resolves first, then the next slot's period starts re-arm
    /// their bits (the wrap from the last slot re-arms everyone).
    pub fn successors(&self, t: usize, s: usize, a: usize) -> Vec<(usize, f64)> {
        let next_slot = if t < self.horizon { t + 1 } else { 1 };
        let rearm = self.reset_mask(next_slot) as usize;
        let bit = 1usize << a;
        if s & bit != 0 && self.channel[a] > 0.0 {
            let delivered = (s & !bit) | rearm;
            let kept = s | rearm;
            let p = self.channel[a];
            if delivered == kept {
                vec![(kept, 1.0)]
            } else if p == 1.0 {
                vec![(delivered, 1.0)]
            } else {
                vec![(delivered, p), (kept, 1.0 - p)]
            }
        } else {
            vec![(s | rearm, 1.0)]
        }
    }

    /// Column index of `x_t(s, a)` in the occupancy LP.
    pub fn var_index(&self, t: usize, s: usize, a: usize) -> usize {
        ((t - 1) * self.state_count() + s) * self.n + a
    }

    pub fn num_vars(&self) -> usize {
        self.horizon * self.state_count() * self.n
    }
}

fn lcm_u32(a: u64, b: u64) -> u64 {
    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    a / gcd(a, b) * b
}

/// Builds the slot-indexed MDP for a validated config. The horizon is the
/// least common multiple of the sampling periods (the sampling period itself
/// when they are all equal).
pub fn build_mdp(config: &SystemConfig) -> Result<MdpModel> {
    let n = config.n();
    if n > MAX_SUBSYSTEMS {
        return Err(Error::TooLarge(format!(
            "{n} sub-systems exceed the state-space cap of {MAX_SUBSYSTEMS} (2^N states)"
        )));
    }
    let mut big = 1u64;
    for &h in &config.sampling_periods {
        big = lcm_u32(big, h as u64);
        if big > MAX_BIG_FRAME as u64 {
            return Err(Error::TooLarge(format!(
                "common frame of {big} slots exceeds the horizon cap {MAX_BIG_FRAME}"
            )));
        }
    }
    let horizon = big as usize;
    let reset_masks = (1..=horizon)
        .map(|t| {
            let mut mask = 0u32;
            for (i, &h) in config.sampling_periods.iter().enumerate() {
                if (t as u32 - 1).is_multiple_of(h) {
                    mask |= 1 << i;
                }
            }
            mask
        })
        .collect();
    Ok(MdpModel {
        n,
        horizon,
        channel: config.channel.clone(),
        periods: config.sampling_periods.clone(),
        reset_masks,
    })
}

/// An occupancy assignment `x_t(s, a)`.
#[derive(Clone, Debug)]
pub struct OccupancyMeasure {
    pub horizon: usize,
    pub n: usize,
    x: Vec<f64>,
}

impl OccupancyMeasure {
    pub fn from_values(mdp: &MdpModel, values: &[f64]) -> Self {
        assert_eq!(values.len(), mdp.num_vars());
        OccupancyMeasure { horizon: mdp.horizon, n: mdp.n, x: values.to_vec() }
    }

    pub fn get(&self, mdp: &MdpModel, t: usize, s: usize, a: usize) -> f64 {
        self.x[mdp.var_index(t, s, a)]
    }

    /// `sum_a x_t(s, a)`.
    pub fn state_marginal(&self, mdp: &MdpModel, t: usize, s: usize) -> f64 {
        (0..self.n).map(|a| self.get(mdp, t, s, a)).sum()
    }
}

/// One throughput constraint: sub-system `flow` must collect expected reward
/// at least `target` over slots `first..=last`.
#[derive(Clone, Debug)]
pub struct ThroughputWindow {
    pub flow: usize,
    /// Window ordinal within the big frame (0-based).
    pub window: usize,
    pub first_slot: usize,
    pub last_slot: usize,
    pub target: f64,
}

/// Occupancy LP over the model with one `>=` throughput row per window, in
/// window order. Equalities are per-slot flow balance (with wrap-around) plus
/// per-slot normalization; all variables are non-negative.
fn occupancy_lp(mdp: &MdpModel, windows: &[ThroughputWindow]) -> LpProblem {
    let nv = mdp.num_vars();
    let states = mdp.state_count();
    let mut lp = LpProblem::new(nv);

    for t in 1..=mdp.horizon {
        let next_t = if t < mdp.horizon { t + 1 } else { 1 };
        let mut rows = vec![vec![0.0; nv]; states];
        for (s2, row) in rows.iter_mut().enumerate() {
            for a in 0..mdp.n {
                row[mdp.var_index(next_t, s2, a)] += 1.0;
            }
        }
        for s in 0..states {
            for a in 0..mdp.n {
                let col = mdp.var_index(t, s, a);
                for (s2, pr) in mdp.successors(t, s, a) {
                    rows[s2][col] -= pr;
                }
            }
        }
        for row in rows {
            lp.equalities.push((row, 0.0));
        }
    }
    for t in 1..=mdp.horizon {
        let mut row = vec![0.0; nv];
        for s in 0..states {
            for a in 0..mdp.n {
                row[mdp.var_index(t, s, a)] = 1.0;
            }
        }
        lp.equalities.push((row, 1.0));
    }
    for w in windows {
        let mut row = vec![0.0; nv];
        for t in w.first_slot..=w.last_slot {
            for s in 0..states {
                let r = mdp.reward(w.flow, s, w.flow);
                if r != 0.0 {
                    row[mdp.var_index(t, s, w.flow)] = r;
                }
            }
        }
        lp.inequalities.push((row, w.target, Sense::Ge));
    }
    lp
}

/// Whole-frame throughput windows, one per sub-system.
fn frame_windows(mdp: &MdpModel, targets: &[f64]) -> Vec<ThroughputWindow> {
    targets
        .iter()
        .enumerate()
        .map(|(i, &target)| ThroughputWindow {
            flow: i,
            window: 0,
            first_slot: 1,
            last_slot: mdp.horizon,
            target,
        })
        .collect()
}

/// Capacity-region LP for a homogeneous frame at the given per-flow targets.
/// The throughput rows appear as `>=` inequalities indexed `0..n` for margin
/// designation.
pub fn build_capacity_lp(mdp: &MdpModel, targets: &[f64]) -> LpProblem {
    occupancy_lp(mdp, &frame_windows(mdp, targets))
}

/// Membership verdict for a throughput vector.
#[derive(Clone, Debug)]
pub struct RegionMembership {
    pub feasible: bool,
    /// Maximized common slack of the throughput rows (negative outside the
    /// region).
    pub margin: f64,
}

/// Decides whether the throughput vector lies (strictly, by the config's
/// margin) inside the capacity region of the common frame.
pub fn region_membership(config: &SystemConfig, targets: &[f64]) -> Result<RegionMembership> {
    if !config.is_homogeneous() {
        return Err(Error::WrongSpecialization(
            "region membership is defined over a common sampling period".to_string(),
        ));
    }
    let mdp = build_mdp(config)?;
    let lp = build_capacity_lp(&mdp, targets);
    let strict: Vec<usize> = (0..targets.len()).collect();
    let sol = lp::solve_with_margin(&lp, &strict, MARGIN_CAP)?;
    if sol.status != LpStatus::Feasible {
        return Err(Error::SolverFailure(
            "occupancy polytope unexpectedly empty".to_string(),
        ));
    }
    Ok(RegionMembership {
        feasible: sol.margin > config.feasibility_margin,
        margin: sol.margin,
    })
}

/// Cyclic randomized scheduling policy: per slot and pending-set state, a
/// distribution over which sub-system to serve; repeats every frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SchedulingPolicy {
    pub horizon: usize,
    pub n: usize,
    table: Vec<f64>,
}

impl SchedulingPolicy {
    /// Builds a policy from a dense `[slot][state][action]` table (slot-major,
    /// then state, then action). Every per-(slot, state) conditional must sum
    /// to one.
    pub fn from_table(horizon: usize, n: usize, table: Vec<f64>) -> Result<SchedulingPolicy> {
        let expected = horizon * (1usize << n) * n;
        let mut violations = Vec::new();
        if table.len() != expected {
            violations.push(format!(
                "policy table: expected {expected} entries, got {}",
                table.len()
            ));
        } else {
            for (row_idx, row) in table.chunks(n).enumerate() {
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-9 || row.iter().any(|&p| p < 0.0) {
                    violations.push(format!(
                        "policy table: conditional {row_idx} is not a distribution (sum {total})"
                    ));
                    break;
                }
            }
        }
        if violations.is_empty() {
            Ok(SchedulingPolicy { horizon, n, table })
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }

    fn idx(&self, t: usize, s: usize, a: usize) -> usize {
        ((t - 1) * (1 << self.n) + s) * self.n + a
    }

    /// `P(serve a | state s at cycle slot t)`, `t` in `1..=horizon`.
    pub fn prob(&self, t: usize, s: usize, a: usize) -> f64 {
        self.table[self.idx(t, s, a)]
    }

    pub fn conditional(&self, t: usize, s: usize) -> &[f64] {
        let base = self.idx(t, s, 0);
        &self.table[base..base + self.n]
    }

    /// Maps a uniform draw to an action by cumulative scan; the last action
    /// absorbs any floating remainder.
    pub fn sample_action(&self, t: usize, s: usize, u: f64) -> usize {
        let row = self.conditional(t, s);
        let mut acc = 0.0;
        for (a, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        self.n - 1
    }

    /// Serializes as `{slot: {state_bits: {action: probability}}}` with
    /// 1-based slot and action keys, states as fixed-width bit strings
    /// (leftmost character is sub-system 1), and probabilities as decimal
    /// text with 12 significant digits. Zero-probability actions are omitted.
    pub fn to_json_string(&self) -> String {
        let mut slots = BTreeMap::new();
        for t in 1..=self.horizon {
            let mut states = BTreeMap::new();
            for s in 0..(1usize << self.n) {
                let mut actions = BTreeMap::new();
                for a in 0..self.n {
                    let p = self.prob(t, s, a);
                    if p > 0.0 {
                        actions.insert((a + 1).to_string(), format!("{:.11e}", p));
                    }
                }
                states.insert(state_bits(s, self.n), actions);
            }
            slots.insert(t.to_string(), states);
        }
        serde_json::to_string_pretty(&slots).expect("policy serialization cannot fail")
    }

    /// Parses the format produced by [`Self::to_json_string`].
    pub fn from_json_str(text: &str) -> Result<SchedulingPolicy> {
        let slots: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>> =
            serde_json::from_str(text)?;
        let horizon = slots.len();
        let n = slots
            .values()
            .flat_map(|states| states.keys())
            .map(|bits| bits.len())
            .max()
            .ok_or_else(|| Error::InvalidConfig {
                violations: vec!["policy: empty table".to_string()],
            })?;
        let mut policy = SchedulingPolicy {
            horizon,
            n,
            table: vec![0.0; horizon * (1 << n) * n],
        };
        for (t_key, states) in &slots {
            let t: usize = t_key.parse().map_err(|_| Error::InvalidConfig {
                violations: vec![format!("policy: bad slot key {t_key}")],
            })?;
            for (bits, actions) in states {
                let s = parse_state_bits(bits)?;
                for (a_key, p_text) in actions {
                    let a: usize = a_key.parse().map_err(|_| Error::InvalidConfig {
                        violations: vec![format!("policy: bad action key {a_key}")],
                    })?;
                    let p: f64 = p_text.parse().map_err(|_| Error::InvalidConfig {
                        violations: vec![format!("policy: bad probability {p_text}")],
                    })?;
                    let idx = policy.idx(t, s, a - 1);
                    policy.table[idx] = p;
                }
            }
        }
        Ok(policy)
    }
}

/// Fixed-width bit string of a pending-set state; leftmost character is
/// sub-system 1.
pub fn state_bits(s: usize, n: usize) -> String {
    (0..n).map(|i| if s & (1 << i) != 0 { '1' } else { '0' }).collect()
}

fn parse_state_bits(bits: &str) -> Result<usize> {
    let mut s = 0usize;
    for (i, c) in bits.chars().enumerate() {
        match c {
            '1' => s |= 1 << i,
            '0' => {}
            _ => {
                return Err(Error::InvalidConfig {
                    violations: vec![format!("policy: bad state bits {bits}")],
                })
            }
        }
    }
    Ok(s)
}

/// Normalizes an occupancy into the cyclic policy. States that carry no
/// occupancy mass fall back to a uniform choice among pending sub-systems
/// (sub-system 1 when none are pending); unreachable states cannot affect the
/// achieved throughputs.
pub fn extract_policy(mdp: &MdpModel, occupancy: &OccupancyMeasure) -> SchedulingPolicy {
    let states = mdp.state_count();
    let mut table = vec![0.0; mdp.horizon * states * mdp.n];
    for t in 1..=mdp.horizon {
        for s in 0..states {
            let total = occupancy.state_marginal(mdp, t, s);
            let base = ((t - 1) * states + s) * mdp.n;
            if total > 0.0 {
                for a in 0..mdp.n {
                    table[base + a] = occupancy.get(mdp, t, s, a) / total;
                }
            } else {
                let pending: Vec<usize> = (0..mdp.n).filter(|a| s & (1 << a) != 0).collect();
                if pending.is_empty() {
                    table[base] = 1.0;
                } else {
                    let share = 1.0 / pending.len() as f64;
                    for a in pending {
                        table[base + a] = share;
                    }
                }
            }
        }
    }
    SchedulingPolicy { horizon: mdp.horizon, n: mdp.n, table }
}

/// Exact law of the closed policy/channel chain over one frame.
#[derive(Clone, Debug)]
pub struct PolicyFlow {
    /// `state_dist[t-1][s]`: state distribution entering slot `t`.
    pub state_dist: Vec<Vec<f64>>,
    /// `delivery[t-1][i]`: probability sub-system `i`'s packet is delivered
    /// during slot `t`.
    pub delivery: Vec<Vec<f64>>,
}

/// Propagates the policy through the transition kernels, starting from the
/// all-pending state that every frame opens with.
pub fn propagate(mdp: &MdpModel, policy: &SchedulingPolicy) -> PolicyFlow {
    let states = mdp.state_count();
    let mut dist = vec![0.0; states];
    dist[states - 1] = 1.0;
    let mut state_dist = Vec::with_capacity(mdp.horizon);
    let mut delivery = Vec::with_capacity(mdp.horizon);
    for t in 1..=mdp.horizon {
        state_dist.push(dist.clone());
        let mut delivered = vec![0.0; mdp.n];
        let mut next = vec![0.0; states];
        for (s, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (a, d) in delivered.iter_mut().enumerate() {
                let pa = policy.prob(t, s, a);
                if pa == 0.0 {
                    continue;
                }
                *d += w * pa * mdp.reward(a, s, a);
                for (s2, pr) in mdp.successors(t, s, a) {
                    next[s2] += w * pa * pr;
                }
            }
        }
        delivery.push(delivered);
        dist = next;
    }
    PolicyFlow { state_dist, delivery }
}

impl PolicyFlow {
    /// Sums delivery probabilities over a slot window (1-based, inclusive).
    pub fn window_delivery(&self, flow: usize, first_slot: usize, last_slot: usize) -> f64 {
        (first_slot..=last_slot).map(|t| self.delivery[t - 1][flow]).sum()
    }
}

/// Big-frame layout for heterogeneous sampling periods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeterogeneousPlan {
    pub periods: Vec<u32>,
    /// Least common multiple of the periods.
    pub big_frame: u32,
    /// `repetitions[i] = big_frame / periods[i]`.
    pub repetitions: Vec<u32>,
}

impl HeterogeneousPlan {
    pub fn new(periods: &[u32]) -> Result<Self> {
        let mut big = 1u64;
        for &h in periods {
            big = lcm_u32(big, h as u64);
            if big > MAX_BIG_FRAME as u64 {
                return Err(Error::TooLarge(format!(
                    "big frame of {big} slots exceeds the horizon cap {MAX_BIG_FRAME}"
                )));
            }
        }
        let big_frame = big as u32;
        let repetitions = periods.iter().map(|&h| big_frame / h).collect();
        Ok(HeterogeneousPlan { periods: periods.to_vec(), big_frame, repetitions })
    }
}

/// Per-period throughput windows over the big frame: sub-system `i` gets one
/// window per repetition, each demanding its own maximum-dropout target.
pub fn heterogeneous_windows(config: &SystemConfig, plan: &HeterogeneousPlan) -> Vec<ThroughputWindow> {
    let mut windows = Vec::new();
    for (i, plant) in config.plants.iter().enumerate() {
        let h = plan.periods[i] as usize;
        let target = 1.0 - max_dropout_rate(plant.a, plan.periods[i], config.slot_length);
        for j in 0..plan.repetitions[i] as usize {
            windows.push(ThroughputWindow {
                flow: i,
                window: j,
                first_slot: j * h + 1,
                last_slot: (j + 1) * h,
                target,
            });
        }
    }
    windows
}

/// Big-frame occupancy LP with one strict (margin-designated) throughput row
/// per period window.
pub fn build_heterogeneous_lp(config: &SystemConfig, plan: &HeterogeneousPlan) -> Result<(LpProblem, Vec<ThroughputWindow>)> {
    let mdp = build_mdp(config)?;
    debug_assert_eq!(mdp.horizon, plan.big_frame as usize);
    let windows = heterogeneous_windows(config, plan);
    Ok((occupancy_lp(&mdp, &windows), windows))
}

/// A per-sub-system controller design.
#[derive(Clone, Debug)]
pub struct ControllerDesign {
    pub dare: DareSolution,
    pub gain: f64,
    /// Dropout rate the predictor was designed for.
    pub design_q: f64,
}

/// Achieved versus required delivery probability for one throughput window.
#[derive(Clone, Debug)]
pub struct WindowRate {
    pub subsystem: usize,
    pub window: usize,
    pub target: f64,
    /// Exact forward-propagated delivery probability under the extracted
    /// policy.
    pub achieved: f64,
}

/// Synthesized scheduler and controllers for one instance.
#[derive(Clone, Debug)]
pub struct CoDesign {
    pub policy: SchedulingPolicy,
    pub controllers: Vec<ControllerDesign>,
    pub windows: Vec<WindowRate>,
    pub plan: HeterogeneousPlan,
    /// Maximized common throughput slack of the scheduling program.
    pub margin: f64,
}

impl CoDesign {
    /// Worst achieved-over-target margin across windows.
    pub fn min_window_slack(&self) -> f64 {
        self.windows
            .iter()
            .map(|w| w.achieved - w.target)
            .fold(f64::INFINITY, f64::min)
    }
}

/// End-to-end synthesis.
///
/// Common sampling period: the subset test decides stabilizability; the
/// occupancy program then targets each sub-system's required rate plus the
/// feasibility margin and the controllers are designed at dropout
/// `q_max - margin`.
///
/// Heterogeneous periods: the big-frame program with per-window strict
/// targets is sufficient only; infeasibility is reported as
/// [`Error::SufficientConditionNotMet`], never as an instability verdict.
/// Controllers are designed at each sub-system's worst exact per-window
/// dropout under the extracted policy.
pub fn synthesize(config: &SystemConfig) -> Result<CoDesign> {
    let config = config.clone().validate()?;
    let eps = config.feasibility_margin;
    let plan = HeterogeneousPlan::new(&config.sampling_periods)?;
    let mdp = build_mdp(&config)?;
    let homogeneous = config.is_homogeneous();

    let windows_spec: Vec<ThroughputWindow> = if homogeneous {
        let targets: Vec<f64> = capacity_idle::required_rates(&config)
            .iter()
            .map(|r| r + eps)
            .collect();
        frame_windows(&mdp, &targets)
    } else {
        heterogeneous_windows(&config, &plan)
    };

    if homogeneous {
        let verdict = capacity_idle::check_stability_general(&config)?;
        if !verdict.stabilizable {
            return Err(Error::NotStabilizable { verdict });
        }
    }

    let lp = occupancy_lp(&mdp, &windows_spec);
    let strict: Vec<usize> = (0..windows_spec.len()).collect();
    let sol = lp::solve_with_margin(&lp, &strict, MARGIN_CAP)?;
    if sol.status != LpStatus::Feasible {
        return Err(Error::SolverFailure(
            "occupancy polytope unexpectedly empty".to_string(),
        ));
    }
    if homogeneous {
        if sol.margin < 0.0 {
            // The idle-time test passed but the margin-bumped targets do not
            // fit; the feasibility margin is too coarse for this instance.
            return Err(Error::NotStabilizable {
                verdict: StabilityVerdict::new(
                    sol.margin,
                    Some("throughput program".to_string()),
                    eps,
                ),
            });
        }
    } else if sol.margin <= eps {
        return Err(Error::SufficientConditionNotMet(format!(
            "big-frame throughput program margin {:.6e} does not clear the feasibility margin {eps:.1e}",
            sol.margin
        )));
    }

    let occupancy = OccupancyMeasure::from_values(&mdp, &sol.values);
    let policy = extract_policy(&mdp, &occupancy);
    let flow = propagate(&mdp, &policy);

    let windows: Vec<WindowRate> = windows_spec
        .iter()
        .map(|w| WindowRate {
            subsystem: w.flow,
            window: w.window,
            target: w.target,
            achieved: flow.window_delivery(w.flow, w.first_slot, w.last_slot),
        })
        .collect();
    for w in &windows {
        if w.achieved < w.target - 1e-8 {
            return Err(Error::NumericFailure(format!(
                "extracted policy delivers {:.12} < target {:.12} for sub-system {} window {}",
                w.achieved,
                w.target,
                w.subsystem + 1,
                w.window + 1
            )));
        }
    }

    let mut controllers = Vec::with_capacity(config.n());
    for (i, plant) in config.plants.iter().enumerate() {
        let lifted = crate::model::discretize(plant, config.sampling_periods[i], config.slot_length)?;
        let q_max = lifted.max_dropout_rate();
        let design_q = if homogeneous {
            (q_max - eps).max(0.0)
        } else {
            windows
                .iter()
                .filter(|w| w.subsystem == i)
                .map(|w| 1.0 - w.achieved)
                .fold(0.0f64, f64::max)
                .max(0.0)
        };
        let dare = solve_dare(&lifted, design_q, DEFAULT_DARE_TOL)?;
        controllers.push(ControllerDesign { gain: dare.gain(), design_q, dare });
    }

    Ok(CoDesign { policy, controllers, windows, plan, margin: sol.margin })
}

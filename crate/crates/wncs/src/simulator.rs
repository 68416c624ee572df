//! Slot-level seeded co-simulation of scheduler, lossy channel, and plants,
//! with empirical dropout and mean-square decay diagnostics.
//!
//! Randomness is counter-based: a ChaCha generator keyed by the master seed
//! runs one independent stream per run, and within a run the word position is
//! set from the absolute slot index (two draws per slot: action sampling and
//! channel outcome). Runs are therefore independent, reproducible, and
//! insensitive to execution order, so they can be simulated concurrently.

use crate::capacity_mdp::CoDesign;
use crate::error::Error;
use crate::model::{discretize, DiscretePlant, SystemConfig};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::Write;

/// Words drawn from the per-run stream for each slot (two `f64` draws).
const WORDS_PER_SLOT: u128 = 4;
/// Additive floor preventing `log(0)` in the decay regression.
const LOG_FLOOR: f64 = 1e-300;

/// Simulation options; initial plant states default to 1.
#[derive(Clone, Debug)]
pub struct SimOptions {
    /// Number of (big) frames to simulate.
    pub frames: u32,
    /// Independent Monte-Carlo runs.
    pub runs: u32,
    /// Master seed.
    pub seed: u64,
    /// Initial state per sub-system; all ones when absent.
    pub initial_state: Option<Vec<f64>>,
}

impl SimOptions {
    pub fn new(frames: u32, runs: u32, seed: u64) -> Self {
        SimOptions { frames, runs, seed, initial_state: None }
    }
}

/// Per-run, per-sub-system trajectory. `states` holds one more entry than
/// `controls`/`deliveries`: the state after the final period.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsystemTrace {
    pub states: Vec<f64>,
    pub controls: Vec<f64>,
    pub deliveries: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub subsystems: Vec<SubsystemTrace>,
}

/// A seeded Monte-Carlo ensemble.
#[derive(Clone, Debug)]
pub struct TraceEnsemble {
    pub runs: Vec<RunTrace>,
    pub seed: u64,
    pub periods: Vec<u32>,
    /// Periods of each sub-system per big frame.
    pub repetitions: Vec<u32>,
    pub big_frames: u32,
}

struct FlowState {
    plant: DiscretePlant,
    gain: f64,
    design_q: f64,
    x: f64,
    u_last: f64,
    u_prev: f64,
    g_prev: f64,
    delivered: bool,
    trace: SubsystemTrace,
}

impl FlowState {
    fn finalize_period(&mut self) {
        let gamma = if self.delivered { 1.0 } else { 0.0 };
        self.trace.deliveries.push(self.delivered as u8);
        let x_next = self.plant.a_bar * self.x + self.g_prev * self.plant.b_bar * self.u_prev;
        self.trace.states.push(x_next);
        self.u_prev = self.u_last;
        self.g_prev = gamma;
        self.x = x_next;
        self.delivered = false;
    }

    fn start_period(&mut self) {
        let u = -self.gain
            * (self.plant.a_bar * self.x + (1.0 - self.design_q) * self.plant.b_bar * self.u_prev);
        self.u_last = u;
        self.trace.controls.push(u);
    }
}

/// Simulates the closed loop: per slot the policy picks a pending packet to
/// transmit and the channel resolves it; per sampling period each plant
/// applies the delayed control and the controller issues the next input.
/// Fully reproducible from `(opts.seed, config, codesign)`.
pub fn simulate(config: &SystemConfig, codesign: &CoDesign, opts: &SimOptions) -> Result<TraceEnsemble> {
    let n = config.n();
    let mut violations = Vec::new();
    if codesign.plan.periods != config.sampling_periods {
        violations.push("codesign.plan.periods: does not match config.sampling_periods".to_string());
    }
    if codesign.policy.n != n {
        violations.push("codesign.policy: sub-system count mismatch".to_string());
    }
    if codesign.policy.horizon != codesign.plan.big_frame as usize {
        violations.push("codesign.policy: horizon does not match the big frame".to_string());
    }
    if codesign.controllers.len() != n {
        violations.push("codesign.controllers: length mismatch".to_string());
    }
    if let Some(init) = &opts.initial_state {
        if init.len() != n {
            violations.push("options.initial_state: length mismatch".to_string());
        }
    }
    if !violations.is_empty() {
        return Err(Error::InvalidConfig { violations });
    }

    let plants: Vec<DiscretePlant> = config
        .plants
        .iter()
        .zip(&config.sampling_periods)
        .map(|(p, &h)| discretize(p, h, config.slot_length))
        .collect::<Result<_>>()?;
    let initial = opts.initial_state.clone().unwrap_or_else(|| vec![1.0; n]);
    let big_frame = codesign.plan.big_frame as usize;
    let total_slots = opts.frames as u64 * big_frame as u64;

    let run_once = |run: u32| -> RunTrace {
        let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
        rng.set_stream(run as u64);
        let mut flows: Vec<FlowState> = (0..n)
            .map(|i| FlowState {
                plant: plants[i],
                gain: codesign.controllers[i].gain,
                design_q: codesign.controllers[i].design_q,
                x: initial[i],
                u_last: 0.0,
                u_prev: 0.0,
                g_prev: 0.0,
                delivered: false,
                trace: SubsystemTrace {
                    states: vec![initial[i]],
                    controls: Vec::new(),
                    deliveries: Vec::new(),
                },
            })
            .collect();
        let mut pending = 0usize;
        for abs_slot in 1..=total_slots {
            for (i, flow) in flows.iter_mut().enumerate() {
                if (abs_slot - 1) % config.sampling_periods[i] as u64 == 0 {
                    if abs_slot > 1 {
                        flow.finalize_period();
                    }
                    flow.start_period();
                    pending |= 1 << i;
                }
            }
            rng.set_word_pos((abs_slot as u128 - 1) * WORDS_PER_SLOT);
            let u_action: f64 = rng.gen();
            let u_channel: f64 = rng.gen();
            let cycle_slot = ((abs_slot - 1) % big_frame as u64) as usize + 1;
            let action = codesign.policy.sample_action(cycle_slot, pending, u_action);
            if pending & (1 << action) != 0 && u_channel < config.channel[action] {
                pending &= !(1 << action);
                flows[action].delivered = true;
            }
        }
        if total_slots > 0 {
            for flow in flows.iter_mut() {
                flow.finalize_period();
            }
        }
        RunTrace { subsystems: flows.into_iter().map(|f| f.trace).collect() }
    };

    let runs: Vec<RunTrace> = (0..opts.runs).into_par_iter().map(run_once).collect();
    Ok(TraceEnsemble {
        runs,
        seed: opts.seed,
        periods: config.sampling_periods.clone(),
        repetitions: codesign.plan.repetitions.clone(),
        big_frames: opts.frames,
    })
}

/// Pairwise (cascade) summation; order-independent aggregation for the
/// cross-run means.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Per-period dropout estimate for one sub-system (one estimate per period
/// position within the big frame when periods are heterogeneous).
#[derive(Clone, Debug)]
pub struct DropoutEstimate {
    pub subsystem: usize,
    /// Period position within the big frame (0-based, always 0 when
    /// homogeneous).
    pub window: usize,
    pub dropout: f64,
    pub std_error: f64,
    pub samples: usize,
    /// False when fewer than 100 samples back the estimate.
    pub conclusive: bool,
}

/// Estimates `1 - mean(delivery indicator)` per sub-system and per period
/// position, with binomial standard errors.
pub fn empirical_dropout(traces: &TraceEnsemble) -> Vec<DropoutEstimate> {
    let mut out = Vec::new();
    for (i, &reps) in traces.repetitions.iter().enumerate() {
        let reps = reps as usize;
        for window in 0..reps {
            let mut delivered = 0usize;
            let mut samples = 0usize;
            for run in &traces.runs {
                let gammas = &run.subsystems[i].deliveries;
                let mut k = window;
                while k < gammas.len() {
                    delivered += gammas[k] as usize;
                    samples += 1;
                    k += reps;
                }
            }
            let mean = if samples > 0 { delivered as f64 / samples as f64 } else { 0.0 };
            let std_error = if samples > 0 {
                (mean * (1.0 - mean) / samples as f64).sqrt()
            } else {
                f64::NAN
            };
            out.push(DropoutEstimate {
                subsystem: i,
                window,
                dropout: 1.0 - mean,
                std_error,
                samples,
                conclusive: samples >= 100,
            });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayVerdict {
    Decaying,
    NotDecaying,
    Inconclusive,
}

/// Empirical mean-square decay summary for one sub-system.
#[derive(Clone, Debug)]
pub struct StabilityDiagnostic {
    pub subsystem: usize,
    /// Cross-run average of `x_k^2`, indexed by period `k` (starting at 1).
    pub mean_square: Vec<f64>,
    /// Fitted slope of `log(mean_square + floor)` over the last half of the
    /// horizon.
    pub slope: f64,
    pub t_statistic: f64,
    pub verdict: DecayVerdict,
    pub confidence: f64,
    pub note: Option<String>,
}

/// OLS slope and its t-statistic.
pub(crate) fn slope_t_statistic(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let df = n - 2.0;
    let se = (sse / df / sxx).sqrt();
    let t = if se > 0.0 {
        slope / se
    } else if slope < 0.0 {
        f64::NEG_INFINITY
    } else if slope > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    (slope, t)
}

/// Tests the empirical mean square of each sub-system for log-linear decay
/// over the last half of the horizon. The verdict is a one-sided slope test
/// at the given confidence (e.g. `0.99`).
pub fn stability_diagnostic(traces: &TraceEnsemble, confidence: f64) -> Result<Vec<StabilityDiagnostic>> {
    let n = traces.periods.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let len = traces
            .runs
            .first()
            .map(|r| r.subsystems[i].states.len())
            .unwrap_or(0);
        let periods = len.saturating_sub(1);
        if periods < 50 {
            return Err(Error::InsufficientData(format!(
                "sub-system {} has {periods} periods; the decay regression needs at least 50",
                i + 1
            )));
        }
        let mut mean_square = Vec::with_capacity(len);
        let mut squares = vec![0.0f64; traces.runs.len()];
        for k in 0..len {
            for (r, run) in traces.runs.iter().enumerate() {
                let x = run.subsystems[i].states[k];
                squares[r] = x * x;
            }
            mean_square.push(pairwise_sum(&squares) / squares.len() as f64);
        }
        let start = len / 2;
        let window = &mean_square[start..];
        if window.iter().all(|&v| v < 1e-290) {
            out.push(StabilityDiagnostic {
                subsystem: i,
                mean_square,
                slope: 0.0,
                t_statistic: f64::NEG_INFINITY,
                verdict: DecayVerdict::Decaying,
                confidence,
                note: Some("mean square vanishes over the regression window".to_string()),
            });
            continue;
        }
        let points: Vec<(f64, f64)> = window
            .iter()
            .enumerate()
            .map(|(j, &v)| ((start + j + 1) as f64, (v + LOG_FLOOR).ln()))
            .collect();
        let (slope, t) = slope_t_statistic(&points);
        let df = points.len() as f64 - 2.0;
        let dist = StudentsT::new(0.0, 1.0, df)
            .map_err(|e| Error::NumericFailure(format!("t distribution: {e}")))?;
        let crit = dist.inverse_cdf(confidence);
        let verdict = if t < -crit {
            DecayVerdict::Decaying
        } else if t > crit {
            DecayVerdict::NotDecaying
        } else {
            DecayVerdict::Inconclusive
        };
        out.push(StabilityDiagnostic {
            subsystem: i,
            mean_square,
            slope,
            t_statistic: t,
            verdict,
            confidence,
            note: None,
        });
    }
    Ok(out)
}

/// Writes `run,frame,subsystem,x,u,gamma`. The state after the final period
/// appears as a trailing row with empty control and delivery fields.
pub fn write_trace_csv<W: Write>(traces: &TraceEnsemble, mut out: W) -> std::io::Result<()> {
    writeln!(out, "run,frame,subsystem,x,u,gamma")?;
    for (r, run) in traces.runs.iter().enumerate() {
        for (i, sub) in run.subsystems.iter().enumerate() {
            for k in 0..sub.controls.len() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r,
                    k + 1,
                    i + 1,
                    sub.states[k],
                    sub.controls[k],
                    sub.deliveries[k]
                )?;
            }
            if let Some(last) = sub.states.last() {
                if sub.states.len() > sub.controls.len() {
                    writeln!(out, "{},{},{},{},,", r, sub.states.len(), i + 1, last)?;
                }
            }
        }
    }
    Ok(())
}

/// Writes `frame,subsystem,mean_square`.
pub fn write_diagnostic_csv<W: Write>(diags: &[StabilityDiagnostic], mut out: W) -> std::io::Result<()> {
    writeln!(out, "frame,subsystem,mean_square")?;
    for diag in diags {
        for (k, ms) in diag.mean_square.iter().enumerate() {
            writeln!(out, "{},{},{}", k + 1, diag.subsystem + 1, ms)?;
        }
    }
    Ok(())
}

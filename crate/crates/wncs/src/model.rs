//! Problem-instance types, configuration validation, and the lifting of
//! continuous-time plant dynamics to the sampling grid.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Default strictness margin: boundary decisions are reported relative to
/// this knob and throughput targets are bumped by it during synthesis.
pub const DEFAULT_FEASIBILITY_MARGIN: f64 = 1e-6;

fn default_margin() -> f64 {
    DEFAULT_FEASIBILITY_MARGIN
}

/// A scalar continuous-time plant `dx/dt = a*x + b*u`.
///
/// `a >= 0` (non-negative growth) and `b != 0` (actuation present) are the
/// standing assumptions; both are enforced by [`SystemConfig::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousPlant {
    /// Growth rate, 1/seconds.
    pub a: f64,
    /// Input gain.
    pub b: f64,
}

/// A full problem instance: plants, per-plant channel success probabilities,
/// per-plant sampling periods (in slots), and the slot length in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub plants: Vec<ContinuousPlant>,
    /// Per-slot delivery success probability for each sub-system, in (0, 1].
    pub channel: Vec<f64>,
    /// Sampling period of each sub-system, in slots (>= 1).
    pub sampling_periods: Vec<u32>,
    /// Slot length in seconds (> 0).
    pub slot_length: f64,
    /// Strictness margin for boundary decisions and synthesis targets.
    #[serde(default = "default_margin")]
    pub feasibility_margin: f64,
}

impl SystemConfig {
    /// Number of sub-systems.
    pub fn n(&self) -> usize {
        self.plants.len()
    }

    /// A symmetric instance: `n` identical plants with growth `a`, unit input
    /// gain, common channel quality `p` and common period `h`.
    pub fn symmetric(n: usize, a: f64, p: f64, h: u32, delta: f64) -> Self {
        SystemConfig {
            plants: vec![ContinuousPlant { a, b: 1.0 }; n],
            channel: vec![p; n],
            sampling_periods: vec![h; n],
            slot_length: delta,
            feasibility_margin: DEFAULT_FEASIBILITY_MARGIN,
        }
    }

    /// All sampling periods equal?
    pub fn is_homogeneous(&self) -> bool {
        self.sampling_periods.windows(2).all(|w| w[0] == w[1])
    }

    /// The common sampling period, if homogeneous.
    pub fn common_period(&self) -> Option<u32> {
        if self.is_homogeneous() {
            self.sampling_periods.first().copied()
        } else {
            None
        }
    }

    /// All channel probabilities equal to one?
    pub fn is_perfect_channel(&self) -> bool {
        self.channel.iter().all(|&p| p == 1.0)
    }

    /// Checks every type invariant and returns the config unchanged on
    /// success. Violations are reported together, each with its field path.
    pub fn validate(self) -> Result<SystemConfig> {
        let mut violations = Vec::new();
        let n = self.plants.len();
        if n == 0 {
            violations.push("plants: must contain at least one plant".to_string());
        }
        if self.channel.len() != n {
            violations.push(format!(
                "channel: length {} does not match plants length {n}",
                self.channel.len()
            ));
        }
        if self.sampling_periods.len() != n {
            violations.push(format!(
                "sampling_periods: length {} does not match plants length {n}",
                self.sampling_periods.len()
            ));
        }
        for (i, plant) in self.plants.iter().enumerate() {
            if !plant.a.is_finite() || plant.a < 0.0 {
                violations.push(format!("plants[{i}].a: must be finite and >= 0 (got {})", plant.a));
            }
            if !plant.b.is_finite() || plant.b == 0.0 {
                violations.push(format!("plants[{i}].b: must be finite and != 0 (got {})", plant.b));
            }
        }
        for (i, &p) in self.channel.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 || p > 1.0 {
                violations.push(format!("channel[{i}]: must lie in (0, 1] (got {p})"));
            }
        }
        for (i, &h) in self.sampling_periods.iter().enumerate() {
            if h < 1 {
                violations.push(format!("sampling_periods[{i}]: must be >= 1 (got {h})"));
            }
        }
        if !self.slot_length.is_finite() || self.slot_length <= 0.0 {
            violations.push(format!(
                "slot_length: must be finite and > 0 (got {})",
                self.slot_length
            ));
        }
        if !self.feasibility_margin.is_finite() || self.feasibility_margin <= 0.0 {
            violations.push(format!(
                "feasibility_margin: must be finite and > 0 (got {})",
                self.feasibility_margin
            ));
        }
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig { violations })
        }
    }

    /// Parses a JSON config document. Unknown fields are rejected; the result
    /// is validated.
    pub fn from_json_str(s: &str) -> Result<SystemConfig> {
        let cfg: SystemConfig = serde_json::from_str(s)?;
        cfg.validate()
    }

    /// Reads and parses a JSON config file.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<SystemConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// The lifted pair of a plant sampled every `h` slots of length `delta`:
/// `a_bar = exp(a*h*delta)` and `b_bar = integral of exp(a*tau)*b` over one
/// sampling interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscretePlant {
    /// Per-frame state multiplier, >= 1.
    pub a_bar: f64,
    /// Per-frame input gain, != 0.
    pub b_bar: f64,
}

impl DiscretePlant {
    /// Maximum tolerable i.i.d. dropout rate for this lifted plant:
    /// `1 / (a_bar^4 - a_bar^2 + 1)`, in (0, 1].
    pub fn max_dropout_rate(&self) -> f64 {
        let a2 = self.a_bar * self.a_bar;
        1.0 / (a2 * a2 - a2 + 1.0)
    }
}

/// Lifts a continuous plant to the sampling grid. The input-gain integral is
/// evaluated in closed form, `(exp(a*h*delta) - 1) * b / a`, with the exact
/// limit `h*delta*b` at `a = 0`.
pub fn discretize(plant: &ContinuousPlant, h: u32, delta: f64) -> Result<DiscretePlant> {
    assert!(h >= 1, "sampling period must be >= 1 slot");
    assert!(delta > 0.0, "slot length must be positive");
    let horizon = plant.a * h as f64 * delta;
    let a_bar = horizon.exp();
    let b_bar = if plant.a > 0.0 {
        (a_bar - 1.0) * plant.b / plant.a
    } else {
        h as f64 * delta * plant.b
    };
    if !a_bar.is_finite() || !b_bar.is_finite() {
        return Err(Error::UnrepresentablePlant(format!(
            "exp({horizon}) is not representable for plant a={}, b={}, h={h}, delta={delta}",
            plant.a, plant.b
        )));
    }
    Ok(DiscretePlant { a_bar, b_bar })
}

/// Outcome of a stabilizability test.
///
/// `slack` is the signed distance to the boundary of the tightest inequality
/// of the test that produced the verdict; `stabilizable` holds exactly when
/// `slack > margin`, where `margin` is the strictness knob the test ran with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub stabilizable: bool,
    /// Tightest constraint: for subset tests, the binding sub-system set as a
    /// concatenated 1-based index string (e.g. "13" for {1, 3}).
    pub binding_constraint: Option<String>,
    /// Signed distance to the tightest boundary (positive inside).
    pub slack: f64,
    /// Strictness margin used for the decision.
    pub margin: f64,
}

impl StabilityVerdict {
    pub fn new(slack: f64, binding: Option<String>, margin: f64) -> Self {
        StabilityVerdict {
            stabilizable: slack > margin,
            binding_constraint: binding,
            slack,
            margin,
        }
    }
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (slack {:.6e}, margin {:.1e}, binding {})",
            if self.stabilizable { "stabilizable" } else { "not stabilizable" },
            self.slack,
            self.margin,
            self.binding_constraint.as_deref().unwrap_or("-"),
        )
    }
}

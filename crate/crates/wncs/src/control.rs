//! Control-side machinery: maximum tolerable dropout rate, the delay-aware
//! scalar Riccati fixed point, and the stabilizing control law.
//!
//! A plant sampled every `h` slots tolerates an i.i.d. packet-dropout rate up
//! to [`max_dropout_rate`]. Below that rate the Riccati equation
//!
//! ```text
//! P = a_bar^2 P + 1 - M(P)^2 / Y(P)
//! Y(P) = (1-q)^2 b_bar^2 P + q(1-q) b_bar^2 a_bar^2 P + q(1-q) b_bar^2 + 1
//! M(P) = (1-q) b_bar P a_bar
//! ```
//!
//! has a unique positive solution `P`, and the gain `K = M/Y` applied to the
//! one-frame-ahead predicted state stabilizes the loop in mean square.

use crate::error::Error;
use crate::model::DiscretePlant;
use crate::Result;

/// Default convergence tolerance for [`solve_dare`]. The residual is driven
/// below `tol * max(1, P)`, i.e. the tolerance is relative for large `P`.
pub const DEFAULT_DARE_TOL: f64 = 1e-12;

const DARE_MAX_ITERS: usize = 100_000;
const BISECT_MAX_ITERS: usize = 300;

/// Maximum i.i.d. dropout rate under which a plant with growth `a`, period
/// `h` slots and slot length `delta` remains mean-square stabilizable:
/// `1 / (e^{4ah*delta} - e^{2ah*delta} + 1)`. Always in (0, 1]; equals 1 iff
/// `a = 0`.
pub fn max_dropout_rate(a: f64, h: u32, delta: f64) -> f64 {
    let x = (2.0 * a * h as f64 * delta).exp();
    1.0 / (x * x - x + 1.0)
}

/// Positive solution of the delay-aware Riccati equation together with the
/// quantities needed to form the control gain.
#[derive(Clone, Copy, Debug)]
pub struct DareSolution {
    /// The positive fixed point, > 1.
    pub p_val: f64,
    /// Normalizer `Y(P)`, >= 1.
    pub upsilon: f64,
    /// Cross term `M(P)`.
    pub m_val: f64,
    /// Dropout rate the solution was computed for.
    pub q: f64,
    /// Absolute fixed-point residual of the returned `p_val`.
    pub residual: f64,
}

impl DareSolution {
    /// Control gain `K = Y^{-1} M`.
    pub fn gain(&self) -> f64 {
        self.m_val / self.upsilon
    }
}

fn upsilon(plant: &DiscretePlant, q: f64, p: f64) -> f64 {
    let b2 = plant.b_bar * plant.b_bar;
    let a2 = plant.a_bar * plant.a_bar;
    (1.0 - q) * (1.0 - q) * b2 * p + q * (1.0 - q) * b2 * a2 * p + q * (1.0 - q) * b2 + 1.0
}

fn cross_term(plant: &DiscretePlant, q: f64, p: f64) -> f64 {
    (1.0 - q) * plant.b_bar * p * plant.a_bar
}

/// Right-hand side of the fixed-point form of the Riccati equation.
fn riccati_rhs(plant: &DiscretePlant, q: f64, p: f64) -> f64 {
    let m = cross_term(plant, q, p);
    plant.a_bar * plant.a_bar * p + 1.0 - m * m / upsilon(plant, q, p)
}

/// Derivative of the right-hand side in `P`. With `M^2/Y = c^2 P^2/(aP + b)`
/// the quotient differentiates to `c^2 P (aP + 2b) / (aP + b)^2`.
fn riccati_rhs_derivative(plant: &DiscretePlant, q: f64, p: f64) -> f64 {
    let b2 = plant.b_bar * plant.b_bar;
    let a2 = plant.a_bar * plant.a_bar;
    let c2 = (1.0 - q) * (1.0 - q) * b2 * a2;
    let alpha = (1.0 - q) * (1.0 - q) * b2 + q * (1.0 - q) * b2 * a2;
    let beta = q * (1.0 - q) * b2 + 1.0;
    let denom = alpha * p + beta;
    a2 - c2 * p * (alpha * p + 2.0 * beta) / (denom * denom)
}

/// Solves the scalar Riccati fixed point for dropout rate `q`.
///
/// Fixed-point iteration from `P = 1`; if the contraction is too slow (the
/// rate degrades as `q` approaches the maximum dropout rate) it falls back to
/// bisection on the residual, which is guaranteed to bracket: the right-hand
/// side exceeds 1 everywhere and grows sublinearly for `q` below the maximum
/// rate.
pub fn solve_dare(plant: &DiscretePlant, q: f64, tol: f64) -> Result<DareSolution> {
    let q_max = plant.max_dropout_rate();
    if !(0.0..1.0).contains(&q) || q >= q_max {
        return Err(Error::NoStabilizingSolution { q, q_max });
    }

    let scale = |p: f64| tol * p.max(1.0);
    let mut p = 1.0f64;
    let mut converged = false;
    for _ in 0..DARE_MAX_ITERS {
        let next = riccati_rhs(plant, q, p);
        if !next.is_finite() {
            return Err(Error::NumericFailure(format!(
                "Riccati iteration produced a non-finite value at P={p}"
            )));
        }
        if (next - p).abs() <= scale(next) {
            p = next;
            converged = true;
            break;
        }
        p = next;
    }

    if !converged {
        // Bisection on g(P) = rhs(P) - P over [1, hi]; g(1) > 0 always.
        let mut lo = 1.0f64;
        let mut hi = 2.0f64;
        let mut doublings = 0;
        while riccati_rhs(plant, q, hi) - hi > 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1000 || !hi.is_finite() {
                return Err(Error::NumericFailure(
                    "Riccati bisection found no bracket".to_string(),
                ));
            }
        }
        for _ in 0..BISECT_MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if riccati_rhs(plant, q, mid) - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        p = 0.5 * (lo + hi);
    }

    // Newton polish drives the residual to rounding level.
    let mut best = p;
    let mut best_res = (riccati_rhs(plant, q, p) - p).abs();
    for _ in 0..8 {
        let g = riccati_rhs(plant, q, p) - p;
        let d = riccati_rhs_derivative(plant, q, p) - 1.0;
        if g == 0.0 || d.abs() < 1e-300 {
            break;
        }
        let next = p - g / d;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        p = next;
        let res = (riccati_rhs(plant, q, p) - p).abs();
        if res < best_res {
            best = p;
            best_res = res;
        } else {
            break;
        }
    }
    let p = best;

    let residual = (riccati_rhs(plant, q, p) - p).abs();
    if residual > scale(p).max(1e-9 * p.max(1.0)) {
        return Err(Error::NumericFailure(format!(
            "Riccati residual {residual:.3e} above tolerance at P={p:.6e}, q={q}"
        )));
    }
    Ok(DareSolution {
        p_val: p,
        upsilon: upsilon(plant, q, p),
        m_val: cross_term(plant, q, p),
        q,
        residual,
    })
}

/// Per-plant controller state: the gain, the design dropout rate entering the
/// predictor, and the previous control input.
///
/// The control law is `u_k = -K * (a_bar x_k + (1-q) b_bar u_{k-1})`, i.e. the
/// gain acts on the predicted state one frame ahead given that the previous
/// input lands with probability `1-q`.
#[derive(Clone, Copy, Debug)]
pub struct ControllerState {
    pub gain: f64,
    pub q: f64,
    pub u_prev: f64,
}

impl ControllerState {
    /// Fresh controller; the first frame acts from `u_0 = 0`.
    pub fn new(dare: &DareSolution) -> Self {
        ControllerState { gain: dare.gain(), q: dare.q, u_prev: 0.0 }
    }

    /// Predicted next-frame state given the current observation.
    pub fn predicted_state(&self, plant: &DiscretePlant, x: f64) -> f64 {
        plant.a_bar * x + (1.0 - self.q) * plant.b_bar * self.u_prev
    }

    /// Computes the control input for the current frame and shifts it into
    /// `u_prev` for the next one.
    pub fn control_input(&mut self, plant: &DiscretePlant, x: f64) -> f64 {
        let u = -self.gain * self.predicted_state(plant, x);
        self.u_prev = u;
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{discretize, ContinuousPlant};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const GOLDEN: f64 = 1.618033988749895; // (1 + sqrt 5) / 2

    #[test]
    fn max_dropout_rate_of_integrator_is_one() {
        assert_eq!(max_dropout_rate(0.0, 1, 0.5), 1.0);
        assert_eq!(max_dropout_rate(0.0, 7, 2.0), 1.0);
    }

    #[test]
    fn max_dropout_rate_closed_form_value() {
        // a=1, h=5, delta=0.1 -> 1/(e^2 - e + 1)
        let expected = 1.0 / (2f64.exp() - 1f64.exp() + 1.0);
        assert!((max_dropout_rate(1.0, 5, 0.1) - expected).abs() < 1e-15);
        assert!((expected - 0.17634276243494978).abs() < 1e-15);
    }

    #[test]
    fn max_dropout_rate_decreases_in_h() {
        for h in 1..10u32 {
            assert!(max_dropout_rate(1.0, h + 1, 0.1) < max_dropout_rate(1.0, h, 0.1));
        }
    }

    #[test]
    fn dare_unit_plant_no_dropout_is_golden_ratio() {
        let plant = DiscretePlant { a_bar: 1.0, b_bar: 1.0 };
        let sol = solve_dare(&plant, 0.0, DEFAULT_DARE_TOL).unwrap();
        assert!((sol.p_val - GOLDEN).abs() < 1e-10);
        assert!(sol.residual < 1e-10);
        // K = P/(P+1) = 1/P for the golden ratio
        assert!((sol.gain() - 1.0 / GOLDEN).abs() < 1e-10);
    }

    #[test]
    fn dare_rejects_dropout_at_or_above_max() {
        let plant = discretize(&ContinuousPlant { a: 1.0, b: 1.0 }, 5, 0.1).unwrap();
        // q_max ~ 0.17634 for this plant
        let err = solve_dare(&plant, 0.20, DEFAULT_DARE_TOL).unwrap_err();
        assert!(matches!(err, Error::NoStabilizingSolution { .. }));
    }

    #[test]
    fn control_law_is_linear_and_zero_at_rest() {
        let plant = DiscretePlant { a_bar: 1.0, b_bar: 1.0 };
        let sol = solve_dare(&plant, 0.0, DEFAULT_DARE_TOL).unwrap();
        let mut ctrl = ControllerState::new(&sol);
        assert_eq!(ctrl.control_input(&plant, 0.0), 0.0);

        let mut c1 = ControllerState::new(&sol);
        let mut c2 = ControllerState::new(&sol);
        let mut c3 = ControllerState::new(&sol);
        let u1 = c1.control_input(&plant, 0.7);
        let u2 = c2.control_input(&plant, -0.2);
        let u3 = c3.control_input(&plant, 0.5);
        assert!((u1 + u2 - u3).abs() < 1e-15);
    }

    #[test]
    fn golden_fixture_first_input() {
        let plant = DiscretePlant { a_bar: 1.0, b_bar: 1.0 };
        let sol = solve_dare(&plant, 0.0, DEFAULT_DARE_TOL).unwrap();
        let mut ctrl = ControllerState::new(&sol);
        let u1 = ctrl.control_input(&plant, 1.0);
        assert!((u1 + 0.6180339887).abs() < 1e-9);
        assert_eq!(ctrl.u_prev, u1);
    }

    /// Desk-scale closed-loop check: a single plant under i.i.d. deliveries at
    /// the design rate decays in mean square (slope of log E[x^2] < 0 at 99%).
    #[test]
    fn closed_loop_contracts_under_design_dropout() {
        let plant = discretize(&ContinuousPlant { a: 2.0, b: 1.0 }, 3, 0.05).unwrap();
        let q = 0.5 * plant.max_dropout_rate();
        let sol = solve_dare(&plant, q, DEFAULT_DARE_TOL).unwrap();
        let frames = 80usize;
        let runs = 20_000usize;
        let mut ms = vec![0.0f64; frames + 1];
        let mut rng = ChaCha12Rng::seed_from_u64(123);
        for _ in 0..runs {
            let mut x = 1.0f64;
            let mut ctrl = ControllerState::new(&sol);
            let mut u_km1 = 0.0f64;
            let mut g_km1 = 0.0f64;
            ms[1] += x * x;
            for k in 1..frames {
                let u_k = ctrl.control_input(&plant, x);
                let g_k = if rng.gen::<f64>() < 1.0 - q { 1.0 } else { 0.0 };
                x = plant.a_bar * x + g_km1 * plant.b_bar * u_km1;
                ms[k + 1] += x * x;
                u_km1 = u_k;
                g_km1 = g_k;
            }
        }
        for v in ms.iter_mut() {
            *v /= runs as f64;
        }
        let pts: Vec<(f64, f64)> = (frames / 2..=frames)
            .map(|k| (k as f64, (ms[k] + 1e-300).ln()))
            .collect();
        let (slope, t_stat) = crate::simulator::slope_t_statistic(&pts);
        assert!(slope < 0.0, "slope {slope} should be negative");
        assert!(t_stat < -2.5, "t statistic {t_stat} too weak");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        /// Substituting the solution back reproduces it, and P > 1.
        #[test]
        fn dare_fixed_point_property(
            growth in 0.0f64..1.2,
            gain in prop_oneof![(-2.0f64..-0.05), (0.05f64..2.0)],
            qfrac in 0.0f64..0.9,
        ) {
            let plant = discretize(&ContinuousPlant { a: growth, b: gain }, 2, 0.25).unwrap();
            let q = qfrac * plant.max_dropout_rate();
            let sol = solve_dare(&plant, q, DEFAULT_DARE_TOL).unwrap();
            prop_assert!(sol.p_val > 1.0);
            prop_assert!(sol.upsilon >= 1.0);
            let back = riccati_rhs(&plant, q, sol.p_val);
            prop_assert!((back - sol.p_val).abs() <= 1e-9 * sol.p_val.max(1.0));
        }
    }
}

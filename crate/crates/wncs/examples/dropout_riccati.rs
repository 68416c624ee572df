//! The control side in isolation: how much packet loss one plant tolerates,
//! what the Riccati fixed point looks like as the design rate approaches that
//! limit, and what the resulting control law does to a single loop.
//!
//! ```bash
//! cargo run --example dropout_riccati
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use wncs::control::{max_dropout_rate, solve_dare, ControllerState, DEFAULT_DARE_TOL};
use wncs::model::{discretize, ContinuousPlant};

fn main() -> Result<(), wncs::Error> {
    let plant = ContinuousPlant { a: 2.0, b: 1.0 };
    let delta = 0.05;

    println!("tolerable dropout shrinks as sampling slows (growth {}):", plant.a);
    for h in 1..=6 {
        println!("  h = {h}: q_max = {:.5}", max_dropout_rate(plant.a, h, delta));
    }

    let h = 3;
    let lifted = discretize(&plant, h, delta)?;
    let q_max = lifted.max_dropout_rate();
    println!("\nriccati solution at h = {h} (q_max = {q_max:.5}):");
    println!("{:>12} {:>14} {:>10} {:>12}", "q/q_max", "P", "gain", "residual");
    for frac in [0.0, 0.5, 0.9, 0.99, 0.999] {
        let q = frac * q_max;
        let sol = solve_dare(&lifted, q, DEFAULT_DARE_TOL)?;
        println!(
            "{:>12.3} {:>14.5e} {:>10.5} {:>12.2e}",
            frac,
            sol.p_val,
            sol.gain(),
            sol.residual
        );
    }
    println!("(the fixed point blows up at the tolerance boundary; the gain stays finite)");

    // Close the loop at half the tolerable dropout and watch E[x^2].
    let q = 0.5 * q_max;
    let sol = solve_dare(&lifted, q, DEFAULT_DARE_TOL)?;
    let runs = 20_000;
    let frames = 40;
    let mut ms = vec![0.0f64; frames];
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    for _ in 0..runs {
        let mut ctrl = ControllerState::new(&sol);
        let mut x = 1.0f64;
        let (mut u_prev, mut g_prev) = (0.0f64, 0.0f64);
        for (k, slot) in ms.iter_mut().enumerate().take(frames) {
            *slot += x * x;
            let u = ctrl.control_input(&lifted, x);
            let g = if rng.gen::<f64>() < 1.0 - q { 1.0 } else { 0.0 };
            x = lifted.a_bar * x + g_prev * lifted.b_bar * u_prev;
            u_prev = u;
            g_prev = g;
            let _ = k;
        }
    }
    println!("\nclosed loop at q = q_max/2, {runs} runs:");
    for k in [1usize, 5, 10, 20, 39] {
        println!("  E[x_{:>2}^2] ~ {:.4e}", k + 1, ms[k] / runs as f64);
    }
    Ok(())
}

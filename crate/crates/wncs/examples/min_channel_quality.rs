//! Minimum channel quality that keeps a symmetric system stabilizable, found
//! by bisection (licensed by the monotonicity of the verdict in the quality).
//!
//! ```bash
//! cargo run --example min_channel_quality
//! ```

use wncs::capacity_idle::min_channel_quality_symmetric;

fn main() {
    let tol = 1e-4;
    let margin = 1e-6;

    println!("three plants, period 5 slots, slot 0.01s — stiffer plants need better channels:");
    for a in 1..=5 {
        match min_channel_quality_symmetric(3, a as f64, 5, 0.01, tol, margin) {
            Some(p) => println!("  growth {a}: p_min = {p:.4}"),
            None => println!("  growth {a}: not achievable even with a perfect channel"),
        }
    }

    println!("\ngrowth 1, period 5 slots, slot 0.01s — more plants need better channels:");
    for n in 1..=5 {
        match min_channel_quality_symmetric(n, 1.0, 5, 0.01, tol, margin) {
            Some(p) => println!("  {n} plants: p_min = {p:.4}"),
            None => println!("  {n} plants: not achievable even with a perfect channel"),
        }
    }
}

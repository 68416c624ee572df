//! Monotonicity in the channel quality: once a system is stabilizable at some
//! quality it stays stabilizable at every better quality, so the verdict over
//! a quality sweep is a single threshold.
//!
//! ```bash
//! cargo run --example channel_quality_threshold
//! ```

use wncs::capacity_idle::check_stability_general;
use wncs::model::{ContinuousPlant, SystemConfig};

fn main() -> Result<(), wncs::Error> {
    let systems: [&[f64]; 3] = [
        &[1.9047, 6.1553],
        &[1.9047, 6.1553, 7.9464],
        &[1.9047, 6.1553, 7.9464, 9.3456],
    ];
    for growth in systems {
        let n = growth.len();
        let mut threshold = None;
        for k in 1..=1000 {
            let p = k as f64 / 1000.0;
            let config = SystemConfig {
                plants: growth.iter().map(|&a| ContinuousPlant { a, b: 1.0 }).collect(),
                channel: vec![p; n],
                sampling_periods: vec![3; n],
                slot_length: 0.01,
                feasibility_margin: 1e-6,
            }
            .validate()?;
            let stable = check_stability_general(&config)?.stabilizable;
            match (threshold, stable) {
                (None, true) => threshold = Some(p),
                (Some(t), false) => panic!("verdict flipped back at p={p} after threshold {t}"),
                _ => {}
            }
        }
        match threshold {
            Some(t) => println!("{n} plants: stabilizable exactly for common quality p >= {t:.3}"),
            None => println!("{n} plants: not stabilizable even at p = 1"),
        }
    }
    println!("\neach added (stiffer) plant pushes the threshold up; no verdict ever");
    println!("flips back to unstable as the channel improves.");
    Ok(())
}

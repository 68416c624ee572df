//! Decide whether three unstable plants sharing one lossy channel can all be
//! kept mean-square stable, using the exact subset test.
//!
//! ```bash
//! cargo run --example check_stability
//! ```

use wncs::capacity_idle::{busy_pmf, check_stability_general, expected_idle};
use wncs::control::max_dropout_rate;
use wncs::model::{ContinuousPlant, SystemConfig};

fn main() -> Result<(), wncs::Error> {
    // Three scalar plants with different growth rates; the third one sits on
    // a much worse channel.
    let config = SystemConfig {
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
    .validate()?;

    let h = config.common_period().unwrap();
    println!("per-plant requirements over a frame of {h} slots:");
    for (i, plant) in config.plants.iter().enumerate() {
        let q_max = max_dropout_rate(plant.a, h, config.slot_length);
        println!(
            "  plant {}: growth {:.4}, channel {:.4} -> tolerates dropout {:.4}, needs delivery {:.4}",
            i + 1,
            plant.a,
            config.channel[i],
            q_max,
            1.0 - q_max
        );
    }

    // The busiest subset is usually the whole set: show its slot usage.
    let all: Vec<usize> = (0..config.n()).collect();
    let pmf = busy_pmf(&all, &config.channel, h);
    println!("\nbusy-slot distribution when serving everyone:");
    for (t, p) in pmf.probs.iter().enumerate() {
        if *p > 1e-12 {
            println!("  P(X = {t}) = {p:.6}");
        }
    }
    println!(
        "  expected idle slots: {:.6}",
        expected_idle(&all, &config.channel, h)
    );

    let verdict = check_stability_general(&config)?;
    println!("\nverdict: {verdict}");
    Ok(())
}

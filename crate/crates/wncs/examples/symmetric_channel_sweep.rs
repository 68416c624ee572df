//! Identical plants on an imperfect shared channel: the closed-form verdict
//! over a (period, quality) grid. Unlike the perfect-channel case there is no
//! period threshold — the stable set can be a non-contiguous set of periods.
//!
//! ```bash
//! cargo run --example symmetric_channel_sweep
//! ```

use wncs::capacity_idle::check_stability_symmetric;

fn main() {
    let n = 2;
    let a = 1.0;
    let delta = 0.1;
    println!("two identical plants (growth {a}), slot {delta}s; S = stable, . = unstable\n");
    print!("{:>7} |", "p \\ h");
    for h in 1..=10 {
        print!("{h:>3}");
    }
    println!();
    println!("--------+{}", "-".repeat(30));
    for p in [0.300, 0.425, 0.500] {
        print!("{p:>7.3} |");
        for h in 1..=10 {
            let verdict = check_stability_symmetric(n, a, p, h, delta, 1e-6);
            print!("{:>3}", if verdict.stabilizable { "S" } else { "." });
        }
        println!();
    }
    println!("\nat p = 0.425 only periods {{2, 7, 8, 9, 10}} work: period 2 wins on");
    println!("control tolerance, long periods win on scheduling room, and the");
    println!("middle loses on both.");
}

//! Prints the joint-distribution check for both trajectory updates.
//!
//! cargo run --release --example geweke -- [n_successive] [seed]

use stickydp::emissions::ChannelKind;
use stickydp::geweke::{run_geweke, GewekeSetup};
use stickydp::sampler::{SamplerConfig, TrajectoryUpdate};
use stickydp::simulation::ChannelLayout;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    for update in [TrajectoryUpdate::Coupled, TrajectoryUpdate::Independent] {
        let setup = GewekeSetup {
            n_units: 4,
            n_periods: 3,
            layout: vec![ChannelLayout::new("v", ChannelKind::Bernoulli, 2)],
            config: SamplerConfig {
                truncation: 3,
                trajectory_update: update,
                ..Default::default()
            },
            n_marginal: n,
            n_successive: n,
            seed,
        };
        let start = std::time::Instant::now();
        let report = run_geweke(&setup).expect("geweke run");
        println!("{update:?} ({:.1?})", start.elapsed());
        for r in &report.rows {
            println!(
                "  {:<11} marginal {:>9.5} successive {:>9.5}  ess {:>8.0}/{:>8.0}  z {:>7.2}",
                r.statistic, r.marginal_mean, r.successive_mean, r.marginal_ess, r.successive_ess, r.z
            );
        }
    }
}

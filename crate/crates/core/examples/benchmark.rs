//! Repeated generate-and-fit runs on a named scenario.
//!
//! cargo run --release --example benchmark -- five-lines 20 1000

use misre::bench::{format_report, run_bench, BenchConfig};
use misre::data::Preset;
use misre::mode::InlierRule;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset: Preset = args.first().map(String::as_str).unwrap_or("five-lines").parse()?;
    let repeats = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(10);
    let trials = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(preset.default_trials());

    let mut config = BenchConfig::new(preset.spec(0), repeats, trials).seed(1);
    if args.get(3).map(String::as_str) == Some("threshold") {
        config = config.inlier_rule(InlierRule::Threshold);
    }
    let report = run_bench(&config)?;
    print!("{}", format_report(&report));
    let violations = report.ordering_violations();
    println!("strength ordering violations: {}", violations.len());
    Ok(())
}

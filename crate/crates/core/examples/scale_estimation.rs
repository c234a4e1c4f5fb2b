//! The scale estimator on its own: the best hypothesis for a single noisy
//! line, its sorted distances, and the expansions that give `σ̂`.
//!
//! cargo run --release --example scale_estimation -- [sigma] [seed]

use misre::data::{generate, scenario::single_line};
use misre::hypothesis::{initial_set_size, search, sorted_sequence};
use misre::model::{normalize_points, LiftedPoints};
use misre::scale::estimate_scale;
use misre::ModelKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let sigma: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6.0);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let data = generate(&single_line(sigma, seed))?;
    let (normalized, transform) = normalize_points(&ModelKind::Line2d.spec(), &data.points)?;
    let lifted = LiftedPoints::new(ModelKind::Line2d, &normalized)?;
    let n_eps = initial_set_size(lifted.len(), 5.0, 2);
    let (best, _) = search(&lifted, 1000, seed, n_eps)?;

    let h = &best.hypothesis;
    let sorted: Vec<f64> = sorted_sequence(&lifted, &h.theta, h.alpha).iter().map(|r| r.distance).collect();
    let estimate = estimate_scale(&sorted, 5.0, n_eps)?;
    let unit = transform.scale_factor();

    println!("{} points, initial set {n_eps}, σ_g = {sigma}", lifted.len());
    println!("{:>5}  {:>10}  {:>4}  {:>10}", "η", "Δd", "k_t", "extent");
    for r in &estimate.records {
        println!("{:>5}  {:>10.3}  {:>4}  {:>10.3}", r.eta, r.width / unit, r.k_t, r.extent / unit);
    }
    match estimate.region {
        Some((lo, hi)) => println!("region of interest: {lo}% .. {hi}%"),
        None => println!("no expansion, σ̂ is the initial set radius"),
    }
    println!("σ̂ = {:.3} ({:.2} σ_g)", estimate.sigma / unit, estimate.sigma / unit / sigma);
    Ok(())
}

//! Monte Carlo estimates of the exit probability and of the start-averaged
//! value, checked against closed forms.
//!
//! Every path draws from its own counter-indexed stream, so results do not
//! depend on the number of worker threads (set `FPP_THREADS` to check).
//!
//! ```text
//! cargo run --release --example monte_carlo
//! ```

use fpp::closed_forms::{pia_closed, q_closed};
use fpp::mc::{estimate_pia, simulate_samples, write_samples_csv, SimConfig, Start};
use fpp::model::{build_example, DensitySpec, ExampleParams, Interval, ProcessSpec};

fn main() -> fpp::Result<()> {
    let cfg = SimConfig::new(1e-4, 40_000, 11)?;

    // Brownian motion from a fixed start: pi_a(x) = 1 - x.
    // Crossings between time steps go unseen, which pushes both barriers out
    // by about 0.58 sqrt(dt) and biases the estimate towards 1/2.
    let bm = ProcessSpec::brownian(Interval::unit());
    for x in [0.2, 0.5, 0.8] {
        let est = estimate_pia(&bm, &Start::Fixed(x), &cfg)?.checked()?;
        println!(
            "brownian  x = {x:.1}  p_hat {:.4} +- {:.4}  exact {:.4}  z {:+.2}",
            est.p_hat,
            est.std_error,
            1.0 - x,
            (est.p_hat - (1.0 - x)) / est.std_error
        );
    }

    // Example 7 with jumps, from a fixed start and from a random start
    let p = ExampleParams::default();
    let spec = build_example(7, &p)?;
    let x0 = 0.3;
    let est = estimate_pia(&spec, &Start::Fixed(x0), &cfg)?.checked()?;
    let exact = pia_closed(7, &p, x0)?;
    println!(
        "example 7 x = {x0:.1}  p_hat {:.4} +- {:.4}  exact {:.4}  z {:+.2}",
        est.p_hat,
        est.std_error,
        exact,
        (est.p_hat - exact) / est.std_error
    );

    let g = DensitySpec::uniform(0.0, 2.0 * p.epsilon);
    let est = estimate_pia(&spec, &Start::Density(g.clone()), &cfg)?.checked()?;
    let q = q_closed(7, &p, &g)?;
    println!(
        "example 7 random start  q_hat {:.4} +- {:.4}  quadrature {:.4}",
        est.p_hat, est.std_error, q
    );

    // raw exit records for a handful of paths
    let few = SimConfig::new(1e-3, 20, 11)?;
    let samples = simulate_samples(&spec, &Start::Density(g), &few)?;
    let path = std::env::temp_dir().join("example7_exits.csv");
    write_samples_csv(&samples, std::fs::File::create(&path)?)?;
    println!("{} exit records written to {}", samples.len(), path.display());
    Ok(())
}

//! Reproduce one simulation cell end to end: draw biased samples from the
//! bivariate-normal design, fit the rank estimator and the IPW baseline,
//! and print the aggregate metrics.
//!
//! Run with: `cargo run --release --example table1_cell`

use mrc_core::harness::{run_scenario, Estimator, ScenarioSpec};
use mrc_core::sampling::{ErrorDist, PopulationModel, SamplingScheme};

fn main() {
    let model = PopulationModel::table1(ErrorDist::StdNormal);
    let mut spec = ScenarioSpec::new(model, SamplingScheme::Scheme2, 0x5C3);
    spec.replications = 100;
    spec.resamples = 300;
    spec.estimators = vec![Estimator::Mrc, Estimator::Ipw];

    let report = run_scenario(&spec).expect("scenario runs");
    println!("scheme 2, normal error, n = {}, {} replications", spec.n, spec.replications);
    for row in &report.rows {
        print!(
            "  {:>3} beta{}: bias {:+.4}  se {:.4}",
            row.estimator,
            row.coefficient + 1,
            row.bias,
            row.se
        );
        if let (Some(see), Some(cp)) = (row.see, row.cp) {
            print!("  see {see:.4}  cp {cp:.2}");
        }
        println!();
    }
    eprintln!("runtime: {:?}", report.runtime);
}

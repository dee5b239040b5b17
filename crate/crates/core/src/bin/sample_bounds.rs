//! Regenerates `data/bounds.csv`: ideal/nadir points for the problems whose
//! nadir has no closed form, computed from dense Pareto-front samples.
//!
//! Usage: `sample-bounds [--samples N]` (default 200000). Output goes to
//! stdout; redirect it over `crates/core/data/bounds.csv` to refresh the
//! checked-in data.

use std::process::ExitCode;

use posebench::problems::{sampling::sampled_front_bounds, ProblemId, ProblemSpec};

const TARGETS: [ProblemId; 4] = [
    ProblemId::Dtlz5,
    ProblemId::Dtlz6,
    ProblemId::Dtlz7,
    ProblemId::CDtlz2,
];
const OBJECTIVE_COUNTS: [usize; 4] = [2, 3, 4, 6];

fn main() -> ExitCode {
    let mut samples: usize = 200_000;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--samples" => match args.next().and_then(|v| v.parse().ok()) {
                Some(n) => samples = n,
                None => {
                    eprintln!("--samples expects a positive integer");
                    return ExitCode::FAILURE;
                }
            },
            other => {
                eprintln!("unknown argument {other:?}");
                return ExitCode::FAILURE;
            }
        }
    }

    println!("# ideal/nadir per problem and objective count; one line per instance:");
    println!("# problem_id,m,ideal_1,...,ideal_m,nadir_1,...,nadir_m");
    println!("# generated by sample-bounds --samples {samples}");
    for id in TARGETS {
        for m in OBJECTIVE_COUNTS {
            let spec = ProblemSpec::with_default_n(id, m).expect("valid spec");
            let bounds = match sampled_front_bounds(&spec, samples) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("sampling {id} m={m} failed: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let fields: Vec<String> = bounds
                .ideal()
                .values()
                .iter()
                .chain(bounds.nadir().values())
                .map(|v| format!("{v}"))
                .collect();
            println!("{id},{m},{}", fields.join(","));
        }
    }
    ExitCode::SUCCESS
}

//! Fixture SUT executable: runs a built-in model (or a model file) over
//! the line protocol, optionally with a seeded fault.

use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use tiomut::fixtures::{car_alarm, car_alarm_variants, pacer, retailer, OutputPolicy, SutMode};
use tiomut::tioa::parse_model;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Eager,
    Lazy,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Time {
    Simulated,
    Real,
}

#[derive(Parser)]
#[command(name = "tiomut-sut", about = "Model-driven SUT fixture")]
struct Args {
    /// Built-in model: retailer, car-alarm, or pacer.
    #[arg(long, conflicts_with = "model")]
    builtin: Option<String>,
    /// Path to a model file to drive instead of a built-in.
    #[arg(long)]
    model: Option<std::path::PathBuf>,
    /// Fault-seeded car-alarm variant id (see `car_alarm_variants`).
    #[arg(long)]
    variant: Option<String>,
    /// Output timing policy; defaults to eager, or to the policy a
    /// fault variant recommends.
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Seed for the random policy.
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, value_enum, default_value = "simulated")]
    time: Time,
    /// Wall milliseconds per model time unit in real mode.
    #[arg(long, default_value = "100")]
    unit_ms: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut policy = match args.policy {
        None | Some(Policy::Eager) => OutputPolicy::Eager,
        Some(Policy::Lazy) => OutputPolicy::Lazy,
        Some(Policy::Random) => OutputPolicy::SeededRandom(args.seed),
    };
    let model = if let Some(id) = &args.variant {
        match car_alarm_variants().into_iter().find(|v| &v.id == id) {
            Some(v) => {
                // A variant carries the policy under which its fault
                // manifests; an explicit flag wins.
                if args.policy.is_none() {
                    policy = v.policy;
                }
                v.model
            }
            None => {
                eprintln!("unknown variant {id:?}");
                return ExitCode::from(2);
            }
        }
    } else if let Some(path) = &args.model {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
        match parse_model(text.as_bytes()) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("cannot parse {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    } else {
        match args.builtin.as_deref() {
            Some("retailer") | None => retailer(),
            Some("car-alarm") => car_alarm(),
            Some("pacer") => pacer(),
            Some(other) => {
                eprintln!("unknown builtin {other:?}");
                return ExitCode::from(2);
            }
        }
    };
    let mode = match args.time {
        Time::Simulated => SutMode::Simulated,
        Time::Real => SutMode::Real { unit_ms: args.unit_ms },
    };
    match tiomut::fixtures::run_sut(model, policy, mode) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sut i/o error: {e}");
            ExitCode::from(1)
        }
    }
}

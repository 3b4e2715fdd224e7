// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! `dyndl`: optimize, analyze and simulate multi-mode DVFS configurations.
//!
//! Exit status is 0 when the run finished with no deadline misses or
//! reaction-time violations, 1 when it finished but found some, and 2 on
//! errors.

mod commands;
mod context;
mod simulation;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dyndl_core::optimizer::Method;

#[derive(Parser, Debug)]
#[command(name = "dyndl", version, about = "Energy-optimal multi-mode period/speed configuration under velocity-dependent deadlines")]
struct Cli {
    /// Run configuration JSON; the bundled WATERS setup is used if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: the config's output_dir, else ./dyndl-out]
    #[arg(long, global = true, env = "DYNDL_OUT")]
    out: Option<PathBuf>,
    /// Dump the transformed convex problem and solver iteration log.
    #[arg(long, global = true)]
    gp_debug: bool,
    #[command(subcommand)]
    command: Command,
}

/// Which speed tables to use; both when neither flag is given.
#[derive(Args, Debug, Clone, Copy, Default)]
pub struct Precision {
    /// Speeds rounded up to the frequency ladder.
    #[arg(long, conflicts_with = "continuous")]
    pub discrete: bool,
    /// Continuous speeds.
    #[arg(long)]
    pub continuous: bool,
}

impl Precision {
    /// `quantized` flags selected, defaulting to `default` when unset.
    pub fn selected(self, default: &[bool]) -> Vec<bool> {
        match (self.continuous, self.discrete) {
            (true, false) => vec![false],
            (false, true) => vec![true],
            _ => default.to_vec(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the mode tables and report per-mode dynamic power.
    Optimize {
        #[command(flatten)]
        precision: Precision,
    },
    /// Worst-case delays of every mode transition.
    Analyze {
        /// Mode table JSON to analyze instead of optimizing one.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value = "multimode")]
        method: Method,
        #[command(flatten)]
        precision: Precision,
    },
    /// Simulate one method on each scenario.
    Simulate {
        /// Scenario CSV; repeatable. Defaults to the config's scenarios.
        #[arg(long)]
        scenario: Vec<PathBuf>,
        #[arg(long, default_value = "multimode")]
        method: Method,
        #[command(flatten)]
        precision: Precision,
    },
    /// Simulate every configured method on every scenario.
    Compare {
        /// Scenario CSV; repeatable. Defaults to the config's scenarios.
        #[arg(long)]
        scenario: Vec<PathBuf>,
        /// Restrict to one method besides the baseline reference.
        #[arg(long)]
        method: Option<Method>,
        #[command(flatten)]
        precision: Precision,
    },
    /// Write a synthetic velocity scenario as CSV (m/s).
    SynthScenario(commands::SynthArgs),
    /// Check the configuration, task graph and scenarios.
    Validate {
        /// Task graph JSON to check instead of the configured one.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ctx = context::Context::new(cli.config.as_deref(), cli.out, cli.gp_debug, args)?;
    match cli.command {
        Command::Optimize { precision } => commands::optimize(&ctx, precision),
        Command::Analyze { table, method, precision } => commands::analyze(&ctx, table.as_deref(), method, precision),
        Command::Simulate { scenario, method, precision } => simulation::simulate_cmd(&ctx, &scenario, method, precision),
        Command::Compare { scenario, method, precision } => simulation::compare(&ctx, &scenario, method, precision),
        Command::SynthScenario(args) => commands::synth_scenario(&ctx, &args),
        Command::Validate { graph } => commands::validate(&ctx, graph.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use dyndl_core::gp::SolverOptions;
use dyndl_core::optimizer::{quantize_speeds, Method, MethodTables, ModeTable};
use dyndl_core::{DeadlineMap, RunConfig, TaskGraph};
use serde::Serialize;

/// Everything a subcommand needs: the loaded configuration and where to
/// write.
pub struct Context {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
    pub gp_debug: bool,
    pub solver: SolverOptions,
    args: Vec<String>,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    cli_version: &'static str,
    core_version: &'static str,
    arguments: &'a [String],
    config_path: Option<String>,
    config: &'a RunConfig,
}

impl Context {
    pub fn new(config: Option<&Path>, out: Option<PathBuf>, gp_debug: bool, args: Vec<String>) -> Result<Self> {
        let (config, config_path) = match config {
            Some(path) => (
                RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
                Some(path.to_path_buf()),
            ),
            None => (RunConfig::default(), None),
        };
        let out = out.or_else(|| config.output_dir()).unwrap_or_else(|| PathBuf::from("dyndl-out"));
        Ok(Context { config, config_path, out, gp_debug, solver: SolverOptions::default(), args })
    }

    pub fn graph(&self) -> Result<TaskGraph> {
        self.config.graph().context("loading task graph")
    }

    pub fn deadline_map(&self, graph: &TaskGraph) -> Result<DeadlineMap> {
        self.config.deadline_map(graph, &self.solver).context("building deadline map")
    }

    pub fn tables(&self, graph: &TaskGraph, map: &DeadlineMap) -> Result<MethodTables> {
        MethodTables::build(graph, &self.config.power, &map.mode_deadlines, &self.solver).context("optimizing mode tables")
    }

    pub fn table(&self, tables: &MethodTables, method: Method, quantized: bool) -> Result<ModeTable> {
        let table = tables.get(method).clone();
        if quantized {
            Ok(quantize_speeds(&table, &self.config.ladder()?)?)
        } else {
            Ok(table)
        }
    }

    /// Writes `contents` to `rel` under the output directory.
    pub fn write(&self, rel: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json(&self, rel: impl AsRef<Path>, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text)
    }

    /// Versions and arguments of this run, kept apart from the data files.
    pub fn write_metadata(&self) -> Result<()> {
        let meta = Metadata {
            tool: "dyndl",
            cli_version: env!("CARGO_PKG_VERSION"),
            core_version: dyndl_core::VERSION,
            arguments: &self.args,
            config_path: self.config_path.as_ref().map(|p| p.display().to_string()),
            config: &self.config,
        };
        self.write_json("metadata.json", &meta)?;
        Ok(())
    }
}

pub fn table_name(method: Method, quantized: bool) -> String {
    if quantized {
        format!("{method}_quantized")
    } else {
        method.to_string()
    }
}

// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON renderings of a trace.
//!
//! | file            | columns |
//! |-----------------|---------|
//! | `segments.csv`  | `task,start_ns,end_ns,speed` (task is 1-based) |
//! | `events.csv`    | `trigger_ns,from_mode,to_mode,protocol,epoch,completion_ns,superseded` (modes 1-based, empty completion if never completed) |
//! | `reactions.csv` | `source,sink,t1_ns,read_ns,t2_ns,delay_ns,mode,guaranteed_ns,allowed_ns,required_ns,status` |
//! | `summary.json`  | the [`Report`](super::Report) |
//!
//! `status` is `ok`, `transient` (above the mode deadline but within the
//! transition bound) or `violation`.

use std::io;
use std::path::Path;

use super::{Report, SimTrace};

pub fn segments_csv(trace: &SimTrace) -> String {
    let mut out = String::from("task,start_ns,end_ns,speed\n");
    for s in &trace.segments {
        out.push_str(&format!("{},{},{},{}\n", s.task + 1, s.start_ns, s.end_ns, s.speed));
    }
    out
}

pub fn events_csv(trace: &SimTrace) -> String {
    let mut out = String::from("trigger_ns,from_mode,to_mode,protocol,epoch,completion_ns,superseded\n");
    for e in &trace.events {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.trigger_ns,
            e.from_mode + 1,
            e.to_mode + 1,
            e.protocol,
            e.epoch,
            e.completion_ns.map(|c| c.to_string()).unwrap_or_default(),
            e.superseded
        ));
    }
    out
}

pub fn reactions_csv(trace: &SimTrace) -> String {
    let mut out =
        String::from("source,sink,t1_ns,read_ns,t2_ns,delay_ns,mode,guaranteed_ns,allowed_ns,required_ns,status\n");
    for r in &trace.reactions {
        let status = if r.is_violation() {
            "violation"
        } else if r.is_transient() {
            "transient"
        } else {
            "ok"
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.source + 1,
            r.sink + 1,
            r.t1_ns,
            r.read_ns,
            r.t2_ns,
            r.delay_ns(),
            r.mode + 1,
            r.guaranteed_ns,
            r.allowed_ns,
            r.required_ns,
            status
        ));
    }
    out
}

pub fn summary_json(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Writes all four files into `dir`, creating it if needed.
pub fn write_all(dir: &Path, trace: &SimTrace, report: &Report) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("segments.csv"), segments_csv(trace))?;
    std::fs::write(dir.join("events.csv"), events_csv(trace))?;
    std::fs::write(dir.join("reactions.csv"), reactions_csv(trace))?;
    std::fs::write(dir.join("summary.json"), summary_json(report))?;
    Ok(())
}

// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Integer nanosecond time base and the float conversions at its edges.

pub type Nanos = u64;

pub const NS_PER_US: Nanos = 1_000;
pub const NS_PER_MS: Nanos = 1_000_000;
pub const NS_PER_S: Nanos = 1_000_000_000;

pub fn ns_to_ms(ns: Nanos) -> f64 {
    ns as f64 / NS_PER_MS as f64
}

pub fn ns_to_s(ns: Nanos) -> f64 {
    ns as f64 / NS_PER_S as f64
}

/// Rounds to the nearest nanosecond; negative input saturates at zero.
pub fn s_to_ns(s: f64) -> Nanos {
    (s * NS_PER_S as f64).round().max(0.0) as Nanos
}

pub fn ms_to_ns(ms: f64) -> Nanos {
    (ms * NS_PER_MS as f64).round().max(0.0) as Nanos
}

/// Largest whole-microsecond duration not exceeding `ms`.
pub fn floor_to_us(ms: f64) -> Nanos {
    (ms * 1_000.0).floor().max(0.0) as Nanos * NS_PER_US
}

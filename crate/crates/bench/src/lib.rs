// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

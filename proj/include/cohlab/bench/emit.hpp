// SPDX-License-Identifier: Apache-2.0
//
// Result artifacts: the sweep CSV (fixed schema), constellation dumps and a
// self-contained SVG plot. All output is byte-deterministic for a given
// input; runtimes print as 0.000 unless timing was requested upstream.

#pragma once

#include <string>

#include "cohlab/bench/pipeline.hpp"

namespace cohlab::bench {

// Header `sweep_var,method,ber,ser,q_db,evm_pct,ber_is_floor,runtime_s,seed`
// then one row per SweepRow in order. Failed points carry nan metrics.
void emit_csv(const SweepResult& result, const std::string& path);

// Inverse of emit_csv, used by the plot subcommand so a sweep does not have
// to be recomputed to re-render. Validates the header.
SweepResult parse_sweep_csv(const std::string& path);

// One `i,q` row per symbol.
void emit_constellation(const SymbolFrame& frame, const std::string& path);

// Q factor versus the sweep variable, one polyline per method plus an
// optional FEC threshold line (drawn when fec_threshold_db > 0). Points
// without a finite Q break the line.
void emit_plot(const SweepResult& result, const std::string& path,
               const std::string& x_label = "sweep variable",
               double fec_threshold_db = 0.0);

}  // namespace cohlab::bench

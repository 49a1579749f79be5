// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the cohlab core. Configurations cross the boundary as
// JSON strings (same schema as the CLI files); frames as lists of complex
// numbers. The heavy lifting stays in C++ and everything here is a thin,
// deterministic wrapper.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "cohlab/bench/config.hpp"
#include "cohlab/bench/emit.hpp"
#include "cohlab/bench/pipeline.hpp"
#include "cohlab/dataset.hpp"
#include "cohlab/metrics.hpp"
#include "cohlab/rng.hpp"
#include "cohlab/txrx.hpp"

namespace py = pybind11;
using namespace cohlab;

namespace {

SymbolFrame frame_from(const std::vector<cdouble>& symbols) {
    SymbolFrame f;
    f.symbols = symbols;
    return f;
}

py::dict report_to_dict(const MetricsReport& r) {
    py::dict d;
    d["n_symbols"] = r.n_symbols;
    d["n_bits"] = r.n_bits;
    d["ser"] = r.ser;
    d["ber"] = r.ber;
    d["q_db"] = r.q_db;
    d["evm_pct"] = r.evm_pct;
    d["ber_is_floor"] = r.ber_is_floor;
    return d;
}

py::dict method_to_dict(const bench::MethodResult& m) {
    py::dict d;
    d["method"] = m.method;
    d["metrics"] = report_to_dict(m.metrics);
    d["runtime_s"] = m.runtime_s;
    d["failed"] = m.failed;
    if (m.failed) d["error"] = m.error;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Coherent optical link laboratory: split-step fiber simulation, "
        "receiver DSP and learned equalizers (C++ core).";

    // --- configuration ----------------------------------------------------
    m.def(
        "default_config",
        [] { return bench::config_to_json(bench::default_config()); },
        "Canonical JSON for the default desk-scale experiment.");
    m.def(
        "canonical_config",
        [](const std::string& text) { return bench::config_to_json(bench::config_from_json(text)); },
        py::arg("json"),
        "Parse, validate and re-serialize a configuration document. Raises "
        "ValueError-style errors on unknown keys or invalid values.");
    m.def(
        "apply_overrides",
        [](const std::string& text, const std::vector<std::string>& overrides) {
            return bench::apply_overrides_to_json(text, overrides);
        },
        py::arg("json"), py::arg("overrides"),
        "Apply dotted key=value overrides to a JSON document (values parsed "
        "as JSON, bare words fall back to strings).");
    m.def(
        "config_hash",
        [](const std::string& text) { return bench::config_hash(bench::config_from_json(text)); },
        py::arg("json"), "FNV-1a hash of the canonical form; stamps logs and errors.");

    // --- end-to-end experiments -------------------------------------------
    m.def(
        "run",
        [](const std::string& text, bool timing, bool with_constellations) {
            const bench::ExperimentConfig cfg = bench::config_from_json(text);
            bench::PipelineArtifacts art;
            const auto results =
                bench::run_pipeline(cfg, timing, with_constellations ? &art : nullptr);
            py::dict out;
            py::list methods;
            for (const auto& r : results) methods.append(method_to_dict(r));
            out["methods"] = methods;
            if (with_constellations) {
                out["tx_reference"] = art.tx_reference.symbols;
                out["rx_unequalized"] = art.rx_unequalized.symbols;
                py::dict eq;
                for (const auto& [name, frame] : art.rx_equalized)
                    eq[py::str(name)] = frame.symbols;
                out["rx_equalized"] = eq;
            }
            return out;
        },
        py::arg("json"), py::arg("timing") = false, py::arg("constellations") = false,
        "Simulate the test frame and score every configured method. Returns "
        "{'methods': [...]} plus constellation lists when requested.");
    m.def(
        "sweep",
        [](const std::string& text, bool timing) {
            const bench::ExperimentConfig cfg = bench::config_from_json(text);
            const bench::SweepResult res = bench::sweep(cfg, timing);
            py::list rows;
            for (const auto& row : res.rows) {
                py::dict d = method_to_dict(
                    bench::MethodResult{row.method, row.metrics, row.runtime_s, row.failed, row.error});
                d["sweep_var"] = row.sweep_var;
                d["seed"] = row.seed;
                rows.append(d);
            }
            return rows;
        },
        py::arg("json"), py::arg("timing") = false,
        "Run the configured sweep; one row dict per (point, method).");
    m.def(
        "sweep_to_files",
        [](const std::string& text, const std::string& csv_path, const std::string& svg_path) {
            const bench::ExperimentConfig cfg = bench::config_from_json(text);
            const bench::SweepResult res = bench::sweep(cfg, false);
            bench::emit_csv(res, csv_path);
            if (!svg_path.empty()) {
                const std::string label = cfg.sweep_variable == "n_spans"
                                              ? "number of spans"
                                              : "launch power (dBm)";
                bench::emit_plot(res, svg_path, label, cfg.fec_threshold_db);
            }
            return static_cast<int>(res.rows.size());
        },
        py::arg("json"), py::arg("csv_path"), py::arg("svg_path") = std::string(),
        "Run the sweep and write the CSV (and optionally the SVG plot); "
        "returns the number of rows.");

    // --- transmitter / constellation primitives ---------------------------
    m.def(
        "prbs",
        [](uint64_t seed, size_t n_bits) { return prbs_generate(seed, n_bits).bits; },
        py::arg("seed"), py::arg("n_bits"),
        "Deterministic bit source; one list entry (0/1) per bit.");
    m.def(
        "qam16_map",
        [](const std::vector<uint8_t>& bits) {
            BitStream bs;
            bs.bits = bits;
            return qam16_map(bs).symbols;
        },
        py::arg("bits"), "Gray-coded 16QAM mapping at unit average power.");
    m.def(
        "qam16_demap",
        [](const std::vector<cdouble>& symbols) { return qam16_demap(frame_from(symbols)).bits; },
        py::arg("symbols"), "Hard decision to the nearest point, then inverse Gray.");
    m.def(
        "qam16_constellation",
        [] {
            const auto& pts = qam16_constellation();
            return std::vector<cdouble>(pts.begin(), pts.end());
        },
        "The 16 ideal points indexed by their 4-bit Gray label.");
    m.def("qam16_nearest", &qam16_nearest, py::arg("value"),
          "Nearest ideal constellation point under the documented tie rule.");

    // --- metrics ----------------------------------------------------------
    m.def("q_factor_db", &q_factor_db, py::arg("ber"),
          "Q = 20 log10(sqrt(2) erfc^-1(2 ber)), ber in (0, 0.5).");
    m.def("erfc_inv", &erfc_inv, py::arg("y"), "Inverse complementary error function on (0, 2).");
    m.def(
        "evm_percent",
        [](const std::vector<cdouble>& rx, const std::vector<cdouble>& ref) {
            return evm_percent(frame_from(rx), frame_from(ref));
        },
        py::arg("rx"), py::arg("reference"), "Root-mean-square error vector magnitude in percent.");
    m.def(
        "count_errors",
        [](const std::vector<uint8_t>& tx_bits, const std::vector<cdouble>& rx_symbols) {
            BitStream tx;
            tx.bits = tx_bits;
            const SymbolFrame tx_f = qam16_map(tx);
            const SymbolFrame rx_f = frame_from(rx_symbols);
            return report_to_dict(count_errors(tx, qam16_demap(rx_f), tx_f, rx_f));
        },
        py::arg("tx_bits"), py::arg("rx_symbols"),
        "Score soft received symbols against the transmitted bits.");

    // --- token encoding ---------------------------------------------------
    m.def("float_bits", &float_bits, py::arg("x"),
          "Packed binary32 pattern of the single-precision rounding of x.");
    m.def(
        "float_to_bits",
        [](double x) {
            const auto f = float_to_bits(x);
            return std::vector<double>(f.begin(), f.end());
        },
        py::arg("x"), "The 32 bit features of float_bits(x), MSB first, each 0.0 or 1.0.");
    m.def(
        "bits_to_float",
        [](const std::vector<double>& features) {
            if (features.size() != 32)
                throw std::invalid_argument("bits_to_float expects exactly 32 features");
            std::array<double, 32> a{};
            std::copy(features.begin(), features.end(), a.begin());
            return bits_to_float(a);
        },
        py::arg("features"), "Exact inverse of float_to_bits (threshold 0.5, widen to double).");

    // --- seeding ----------------------------------------------------------
    m.def(
        "derive_seed",
        [](uint64_t seed, const std::string& label) { return derive_seed(seed, label); },
        py::arg("seed"), py::arg("label"), "Stable labelled sub-seed.");
    m.def(
        "derive_seed_indexed",
        [](uint64_t seed, const std::string& label, uint64_t index) {
            return derive_seed(seed, label, index);
        },
        py::arg("seed"), py::arg("label"), py::arg("index"), "Stable labelled, indexed sub-seed.");
}

// SPDX-License-Identifier: Apache-2.0

#include "cohlab/bench/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "cohlab/dataset.hpp"
#include "cohlab/dsp.hpp"
#include "cohlab/rng.hpp"

namespace cohlab::bench {

ComplexWaveform add_loading_noise(const ComplexWaveform& w, double snr_db, int sps,
                                  uint64_t rng_seed) {
    if (sps < 1) throw std::invalid_argument("add_loading_noise: sps must be >= 1");
    ComplexWaveform out = w;
    const double snr = std::pow(10.0, snr_db / 10.0);
    const char* labels[2] = {"loading.x", "loading.y"};
    for (int p = 0; p < 2; ++p) {
        double power = 0.0;
        for (const auto& v : w.pol[p]) power += std::norm(v);
        if (w.size() == 0) continue;
        power /= static_cast<double>(w.size());
        if (power <= 0.0) continue;
        const double sigma_q = std::sqrt(power * sps / snr / 2.0);  // per quadrature
        GaussianSampler rng(derive_seed(rng_seed, labels[p]));
        for (auto& v : out.pol[p]) v += cdouble(sigma_q * rng.normal(), sigma_q * rng.normal());
    }
    return out;
}

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string hash_hex(uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct FrameSim {
    BitStream bits[2];
    SymbolFrame tx[2];
    ComplexWaveform rx;
};

FrameSim simulate_frame(const ExperimentConfig& cfg, uint64_t frame_seed, size_t n_symbols) {
    FrameSim f;
    f.bits[0] = prbs_generate(derive_seed(frame_seed, "bits.x"), 4 * n_symbols);
    f.bits[1] = prbs_generate(derive_seed(frame_seed, "bits.y"), 4 * n_symbols);
    f.tx[0] = qam16_map(f.bits[0]);
    f.tx[1] = qam16_map(f.bits[1]);
    ComplexWaveform w = shape_pulse(f.tx[0], f.tx[1], cfg.pulse_shape(), cfg.symbol_rate_hz(),
                                    cfg.launch_power_w(), cfg.fiber.wavelength_nm * 1e-9);
    if (cfg.linewidth_hz > 0)
        w = apply_laser_phase_noise(w, cfg.linewidth_hz, derive_seed(frame_seed, "laser"));
    if (cfg.frequency_offset_hz != 0.0) w = apply_frequency_offset(w, cfg.frequency_offset_hz);
    w = link_propagate(w, cfg.link_config(), derive_seed(frame_seed, "link"));
    // the offset is simulation-provided, so the receiver removes it exactly
    if (cfg.frequency_offset_hz != 0.0) w = apply_frequency_offset(w, -cfg.frequency_offset_hz);
    if (cfg.loading_noise) w = add_loading_noise(w, cfg.loading_snr_db, cfg.sps, frame_seed);
    f.rx = std::move(w);
    return f;
}

struct ChainOut {
    SymbolFrame aligned;  // receiver symbols after cpr + alignment
    SymbolFrame tx_sym;   // transmitted symbols over the same range
    BitStream tx_bits;    // 4 bits per symbol, same range
    AlignResult info;
};

ChainOut classical_chain(const ExperimentConfig& cfg, const FrameSim& f, bool use_dbp, int pol) {
    ComplexWaveform lin;
    if (use_dbp) {
        lin = dbp(f.rx, cfg.link_config(), cfg.dbp_steps_per_span, cfg.dbp_nl_scaling);
    } else {
        const FiberParams span = cfg.fiber_params();
        lin = cdc(f.rx, span, span.length * cfg.n_spans);
    }
    ReceivedSymbols rs = matched_filter_downsample(lin, cfg.pulse_shape());
    const SymbolFrame& pol_frame = pol == 0 ? rs.x : rs.y;
    CprResult cpr = cpr_bps(pol_frame, cfg.cpr_test_phases, cfg.cpr_window);

    const size_t lo = static_cast<size_t>(rs.guard);
    const size_t hi = f.tx[pol].size() - lo;
    ChainOut out;
    out.tx_sym.symbols.assign(f.tx[pol].symbols.begin() + lo, f.tx[pol].symbols.begin() + hi);
    out.tx_bits.bits.assign(f.bits[pol].bits.begin() + 4 * lo, f.bits[pol].bits.begin() + 4 * hi);
    out.tx_bits.seed = f.bits[pol].seed;
    AlignResult ar = align_constellation(cpr.frame, out.tx_sym);
    out.aligned = std::move(ar.frame);
    out.info = std::move(ar);
    return out;
}

SymbolFrame slice_frame(const SymbolFrame& f, size_t lo, size_t hi) {
    SymbolFrame s;
    s.modulation = f.modulation;
    s.symbols.assign(f.symbols.begin() + lo, f.symbols.begin() + hi);
    return s;
}

// score a method over the common range [extra, L - extra)
MethodResult score_method(const std::string& method, const ChainOut& chain,
                          const SymbolFrame& final_syms, size_t extra) {
    const size_t len = final_syms.size();
    if (chain.tx_sym.size() != len || len <= 2 * extra)
        throw std::runtime_error("score: frame too short or mismatched");
    SymbolFrame rx_s = slice_frame(final_syms, extra, len - extra);
    SymbolFrame tx_s = slice_frame(chain.tx_sym, extra, len - extra);
    BitStream tx_b;
    tx_b.bits.assign(chain.tx_bits.bits.begin() + 4 * extra,
                     chain.tx_bits.bits.begin() + 4 * (len - extra));
    BitStream rx_b = qam16_demap(rx_s);
    MethodResult r;
    r.method = method;
    r.metrics = count_errors(tx_b, rx_b, tx_s, rx_s);
    return r;
}

template <typename Fn>
void stage(const std::string& name, uint64_t cfg_hash, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("pipeline stage '" + name + "' failed (config " +
                                 hash_hex(cfg_hash) + "): " + e.what());
    }
}

bool wants(const ExperimentConfig& cfg, const std::string& m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

struct TrainedModel {
    std::unique_ptr<nn::Model> model;
    nn::TrainResult result;
    double normalization = 1.0;
    uint64_t dataset_hash_v = 0;
};

TrainedModel build_and_train(const ExperimentConfig& cfg, const std::string& architecture,
                             const TokenDataset& ds) {
    TrainedModel tm;
    if (architecture == "transformer") {
        tm.model = std::make_unique<nn::TransformerModel>(cfg.transformer_config());
    } else {
        tm.model = std::make_unique<nn::FcnnModel>(cfg.fcnn_config());
    }
    tm.model->init_weights(derive_seed(cfg.seed, "init." + architecture));
    nn::TrainConfig tc = cfg.train_config();
    tc.seed = derive_seed(cfg.seed, "train." + architecture);
    tm.result = nn::train(*tm.model, ds, tc);
    tm.normalization = ds.normalization;
    tm.dataset_hash_v = dataset_hash(ds);
    return tm;
}

}  // namespace

std::vector<MethodResult> run_pipeline(const ExperimentConfig& cfg, bool timing,
                                       PipelineArtifacts* artifacts) {
    validate(cfg);
    const uint64_t h = config_hash(cfg);
    const int pol = cfg.evaluate_polarization == "y" ? 1 : 0;
    const bool want_fcnn = wants(cfg, "fcnn");
    const bool want_tr = wants(cfg, "transformer");
    const bool need_cdc = wants(cfg, "linear-eq") || want_fcnn || want_tr;
    const size_t extra = static_cast<size_t>(cfg.window_n);

    FrameSim test;
    stage("simulate", h, [&] {
        test = simulate_frame(cfg, derive_seed(cfg.seed, "test-frame"), cfg.n_symbols);
    });
    ChainOut lin_test, dbp_test;
    if (need_cdc)
        stage("linear-dsp", h, [&] { lin_test = classical_chain(cfg, test, false, pol); });
    if (wants(cfg, "dbp"))
        stage("dbp-dsp", h, [&] { dbp_test = classical_chain(cfg, test, true, pol); });

    TokenDataset ds;
    if (want_fcnn || want_tr) {
        stage("train-data", h, [&] {
            FrameSim train_sim =
                simulate_frame(cfg, derive_seed(cfg.seed, "train-frame"), cfg.train_symbols);
            ChainOut lin_train = classical_chain(cfg, train_sim, false, pol);
            ds = build_windows(lin_train.aligned, lin_train.tx_sym, cfg.window_n);
            ds.source_seed = cfg.seed;
            ds.polarization = pol;
        });
    }

    if (artifacts && need_cdc) {
        const size_t len = lin_test.aligned.size();
        artifacts->tx_reference = slice_frame(lin_test.tx_sym, extra, len - extra);
        artifacts->rx_unequalized = slice_frame(lin_test.aligned, extra, len - extra);
    }

    std::vector<MethodResult> results;
    for (const std::string& method : cfg.methods) {
        const auto t0 = clock_type::now();
        MethodResult r;
        if (method == "linear-eq") {
            stage("score-linear-eq", h,
                  [&] { r = score_method(method, lin_test, lin_test.aligned, extra); });
            if (artifacts) {
                const size_t len = lin_test.aligned.size();
                artifacts->rx_equalized[method] =
                    slice_frame(lin_test.aligned, extra, len - extra);
            }
        } else if (method == "dbp") {
            stage("score-dbp", h,
                  [&] { r = score_method(method, dbp_test, dbp_test.aligned, extra); });
            if (artifacts) {
                const size_t len = dbp_test.aligned.size();
                artifacts->rx_equalized[method] =
                    slice_frame(dbp_test.aligned, extra, len - extra);
            }
        } else {
            stage(method + "-train-eval", h, [&] {
                TrainedModel tm = build_and_train(cfg, method, ds);
                SymbolFrame eq =
                    nn::equalize(*tm.model, lin_test.aligned, cfg.window_n, tm.normalization);
                r = score_method(method, lin_test, eq, extra);
                if (artifacts) {
                    artifacts->train_loss[method] = tm.result.loss_history;
                    artifacts->rx_equalized[method] =
                        slice_frame(eq, extra, eq.size() - extra);
                }
            });
        }
        r.runtime_s = timing ? seconds_since(t0) : 0.0;
        results.push_back(std::move(r));
    }
    return results;
}

SweepResult sweep(const ExperimentConfig& cfg, bool timing) {
    validate(cfg);
    SweepResult out;
    for (size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        const double value = cfg.sweep_values[i];
        ExperimentConfig point = cfg;
        point.seed = derive_seed(cfg.seed, "sweep", i);
        if (cfg.sweep_variable == "launch_power_dbm") {
            point.launch_power_dbm = value;
        } else {
            point.n_spans = static_cast<int>(value);
        }
        std::vector<MethodResult> rows;
        std::string error;
        try {
            rows = run_pipeline(point, timing);
        } catch (const std::exception& e) {
            error = e.what();
        }
        for (const std::string& method : cfg.methods) {
            SweepRow row;
            row.sweep_var = value;
            row.method = method;
            row.seed = point.seed;
            if (error.empty()) {
                for (const auto& r : rows)
                    if (r.method == method) {
                        row.metrics = r.metrics;
                        row.runtime_s = r.runtime_s;
                    }
            } else {
                row.failed = true;
                row.error = error;
                row.metrics.ber = row.metrics.ser = row.metrics.q_db = row.metrics.evm_pct =
                    std::numeric_limits<double>::quiet_NaN();
            }
            out.rows.push_back(std::move(row));
        }
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const SweepRow& a, const SweepRow& b) { return a.sweep_var < b.sweep_var; });
    return out;
}

TrainOutput train_model(const ExperimentConfig& cfg, const std::string& architecture) {
    validate(cfg);
    if (architecture != "transformer" && architecture != "fcnn")
        throw std::invalid_argument("train_model: unknown architecture " + architecture);
    const uint64_t h = config_hash(cfg);
    const int pol = cfg.evaluate_polarization == "y" ? 1 : 0;

    TokenDataset ds;
    stage("train-data", h, [&] {
        FrameSim train_sim =
            simulate_frame(cfg, derive_seed(cfg.seed, "train-frame"), cfg.train_symbols);
        ChainOut lin_train = classical_chain(cfg, train_sim, false, pol);
        ds = build_windows(lin_train.aligned, lin_train.tx_sym, cfg.window_n);
        ds.source_seed = cfg.seed;
        ds.polarization = pol;
    });

    TrainOutput out;
    stage(architecture + "-train", h, [&] {
        TrainedModel tm = build_and_train(cfg, architecture, ds);
        out.model = std::move(tm.model);
        out.result = std::move(tm.result);
        out.meta.epochs = cfg.epochs;
        out.meta.best_epoch = out.result.best_epoch;
        out.meta.final_loss = out.result.best_loss;
        out.meta.seed = cfg.seed;
        out.meta.dataset_hash = tm.dataset_hash_v;
        out.meta.window_n = cfg.window_n;
        out.meta.normalization = tm.normalization;
    });
    return out;
}

MethodResult evaluate_model(const ExperimentConfig& cfg, nn::Model& model,
                            const nn::CheckpointMeta& meta, PipelineArtifacts* artifacts) {
    validate(cfg);
    const uint64_t h = config_hash(cfg);
    const int pol = cfg.evaluate_polarization == "y" ? 1 : 0;
    if (2 * (2 * meta.window_n + 1) != model.seq_len())
        throw std::invalid_argument("evaluate_model: checkpoint window does not match model");
    const size_t extra = static_cast<size_t>(meta.window_n);

    FrameSim test;
    stage("simulate", h, [&] {
        test = simulate_frame(cfg, derive_seed(cfg.seed, "test-frame"), cfg.n_symbols);
    });
    ChainOut lin_test;
    stage("linear-dsp", h, [&] { lin_test = classical_chain(cfg, test, false, pol); });

    MethodResult r;
    stage(model.architecture() + "-equalize", h, [&] {
        SymbolFrame eq = nn::equalize(model, lin_test.aligned, meta.window_n, meta.normalization);
        r = score_method(model.architecture(), lin_test, eq, extra);
        if (artifacts) {
            const size_t len = lin_test.aligned.size();
            artifacts->tx_reference = slice_frame(lin_test.tx_sym, extra, len - extra);
            artifacts->rx_unequalized = slice_frame(lin_test.aligned, extra, len - extra);
            artifacts->rx_equalized[model.architecture()] =
                slice_frame(eq, extra, eq.size() - extra);
        }
    });
    return r;
}

}  // namespace cohlab::bench

// SPDX-License-Identifier: Apache-2.0
//
// cohlab bench CLI. Subcommands: simulate, train, evaluate, sweep, plot,
// selftest. Configuration comes from --config JSON plus repeatable
// --override key=value dotted paths; --seed replaces the master seed.
// Exit codes: 0 success, 1 runtime error (message on stderr), 2 usage.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cohlab/bench/config.hpp"
#include "cohlab/bench/emit.hpp"
#include "cohlab/bench/pipeline.hpp"
#include "cohlab/channel.hpp"
#include "cohlab/dataset.hpp"
#include "cohlab/dsp.hpp"
#include "cohlab/fft.hpp"
#include "cohlab/metrics.hpp"
#include "cohlab/nn/model.hpp"
#include "cohlab/nn/tensor.hpp"
#include "cohlab/rng.hpp"
#include "cohlab/txrx.hpp"

namespace {

using namespace cohlab;

int run_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok, const std::string& detail = "") {
        if (ok) {
            std::printf("ok - %s\n", name);
        } else {
            std::printf("FAIL - %s%s%s\n", name, detail.empty() ? "" : ": ", detail.c_str());
            ++failures;
        }
    };
    auto rand_waveform = [](uint64_t seed, size_t n) {
        GaussianSampler g(seed);
        ComplexWaveform w;
        w.sample_rate = 80e9;
        for (int p = 0; p < 2; ++p) {
            w.pol[p].resize(n);
            for (auto& v : w.pol[p]) v = cdouble(g.normal(), g.normal());
        }
        return w;
    };

    {
        GaussianSampler g(7);
        std::vector<cdouble> x(1024);
        for (auto& v : x) v = cdouble(g.normal(), g.normal());
        auto y = x;
        fft_forward(y);
        fft_inverse(y);
        double err = 0.0;
        for (size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(y[i] - x[i]));
        check("fft round trip", err < 1e-12, "max error " + std::to_string(err));
    }
    {
        double e = 0.0;
        for (double t : rrc_taps(PulseShape{})) e += t * t;
        check("rrc unit energy", std::fabs(e - 1.0) < 1e-12, "energy " + std::to_string(e));
    }
    {
        BitStream b = prbs_generate(3, 4096);
        check("qam16 map/demap round trip", qam16_demap(qam16_map(b)).bits == b.bits);
    }
    {
        ComplexWaveform w = rand_waveform(11, 2048);
        FiberParams f = fiber_from_engineering(FiberEngineering{});
        ComplexWaveform back = cdc(cdc(w, f, f.length), f, -f.length);
        double err = 0.0;
        for (int p = 0; p < 2; ++p)
            for (size_t i = 0; i < w.size(); ++i)
                err = std::max(err, std::abs(back.pol[p][i] - w.pol[p][i]));
        check("cdc self-inverse", err < 1e-9, "max error " + std::to_string(err));
    }
    {
        ComplexWaveform w = rand_waveform(13, 1024);
        FiberParams f;
        f.alpha = attenuation_to_alpha(0.2);
        f.length = 10e3;
        ComplexWaveform out =
            ssfm_propagate(w, f, 500.0, PolarizationModel::IndependentScalar);
        const double ratio = out.mean_power() / w.mean_power();
        const double expect = std::exp(-f.alpha * f.length);
        check("ssfm pure attenuation", std::fabs(ratio / expect - 1.0) < 1e-12,
              "ratio " + std::to_string(ratio));
    }
    {
        double worst = 0.0;
        for (double y : {1e-6, 1e-3, 0.1, 0.5, 1.0, 1.5, 1.9})
            worst = std::max(worst, std::fabs(std::erfc(erfc_inv(y)) - y) / y);
        check("erfc_inv forward consistency", worst < 1e-10, "rel error " + std::to_string(worst));
    }
    {
        const double q = q_factor_db(1e-3);
        check("q factor at ber 1e-3", std::fabs(q - 9.80) < 0.01, "q " + std::to_string(q));
    }
    {
        bool ok = float_bits(0.0) == 0u && float_bits(1.0) == 0x3F800000u;
        GaussianSampler g(17);
        for (int i = 0; ok && i < 1000; ++i) {
            const double x = g.normal();
            ok = bits_to_float(float_to_bits(x)) == static_cast<double>(static_cast<float>(x));
        }
        check("float bit encoding round trip", ok);
    }
    {
        GaussianSampler g(19);
        auto fill = [&](const nn::Tensor& t) {
            for (auto& v : t->value) v = 0.3 * g.normal();
        };
        nn::Tensor a = nn::make_tensor({3, 4});
        nn::Tensor b = nn::make_tensor({4, 2});
        nn::Tensor t = nn::make_tensor({3, 2});
        fill(a);
        fill(b);
        fill(t);
        nn::backward(nn::mse_loss(nn::relu(nn::matmul(a, b)), t));
        const double analytic = b->grad[0];
        const double eps = 1e-6;
        auto loss_at = [&](double v) {
            nn::Tensor b2 = nn::make_tensor(b->shape, b->value);
            b2->value[0] = v;
            return nn::mse_loss(nn::relu(nn::matmul(a, b2)), t)->value[0];
        };
        const double fd = (loss_at(b->value[0] + eps) - loss_at(b->value[0] - eps)) / (2 * eps);
        check("autodiff matches finite differences", std::fabs(fd - analytic) < 1e-6,
              "diff " + std::to_string(std::fabs(fd - analytic)));
    }
    {
        nn::FcnnConfig fc;
        fc.d_hidden = 8;
        nn::FcnnModel m(fc);
        m.init_weights(5);
        nn::CheckpointMeta meta;
        meta.seed = 5;
        const std::string path =
            (std::filesystem::temp_directory_path() / "cohlab_selftest.ckpt").string();
        nn::save_checkpoint(m, meta, path);
        nn::LoadedCheckpoint lc = nn::load_checkpoint(path);
        bool ok = lc.model->architecture() == "fcnn";
        const auto& pa = m.parameters();
        const auto& pb = lc.model->parameters();
        ok = ok && pa.size() == pb.size();
        for (size_t i = 0; ok && i < pa.size(); ++i)
            ok = pa[i].first == pb[i].first && pa[i].second->value == pb[i].second->value;
        std::filesystem::remove(path);
        check("checkpoint round trip", ok);
    }

    if (failures == 0) {
        std::printf("selftest: all checks passed\n");
        return 0;
    }
    std::printf("selftest: %d check(s) failed\n", failures);
    return 1;
}

void print_metrics_header() {
    std::printf("%-12s %14s %14s %9s %9s %6s\n", "method", "ber", "ser", "q_db", "evm_pct",
                "floor");
}

void print_metrics_row(const std::string& method, const MetricsReport& m, double runtime_s,
                       bool timing) {
    std::printf("%-12s %14.6g %14.6g %9.3f %9.3f %6d", method.c_str(), m.ber, m.ser, m.q_db,
                m.evm_pct, m.ber_is_floor ? 1 : 0);
    if (timing) std::printf("  (%.3f s)", runtime_s);
    std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cohlab: coherent optical link laboratory bench"};
    app.fallthrough();
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    uint64_t seed = 0;
    bool timing = false;

    app.add_option("--config", config_path, "JSON experiment configuration file");
    app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--out-dir", out_dir, "output directory, created if missing");
    app.add_option("--override", overrides,
                   "config override as dotted key=value, e.g. run.n_symbols=4096 (repeatable)");
    app.add_flag("--timing", timing, "record wall-clock runtimes (breaks byte reproducibility)");

    auto* cmd_sim =
        app.add_subcommand("simulate", "run every configured method once and report metrics");
    auto* cmd_train = app.add_subcommand("train", "train one equalizer and write a checkpoint");
    std::string arch = "transformer";
    cmd_train->add_option("--arch", arch, "equalizer architecture")
        ->check(CLI::IsMember({"transformer", "fcnn"}));
    auto* cmd_eval =
        app.add_subcommand("evaluate", "evaluate a saved checkpoint on a fresh test frame");
    std::string ckpt_path;
    cmd_eval->add_option("--checkpoint", ckpt_path, "checkpoint file written by train")
        ->required();
    auto* cmd_sweep =
        app.add_subcommand("sweep", "sweep the configured variable, emit CSV and SVG");
    auto* cmd_plot = app.add_subcommand("plot", "re-render the SVG plot from a sweep CSV");
    std::string plot_input;
    std::string x_label = "sweep variable";
    double fec_threshold = 0.0;
    cmd_plot->add_option("--input", plot_input, "CSV file produced by sweep")->required();
    cmd_plot->add_option("--x-label", x_label, "x axis label");
    cmd_plot->add_option("--fec-threshold", fec_threshold,
                         "draw the FEC threshold line at this Q (dB); 0 hides it");
    auto* cmd_self = app.add_subcommand("selftest", "run the built-in numeric checks");

    for (auto* s : {cmd_sim, cmd_train, cmd_eval, cmd_sweep, cmd_plot, cmd_self})
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto make_config = [&]() {
        cohlab::bench::ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = cohlab::bench::load_config(config_path, overrides);
        } else {
            cfg = cohlab::bench::config_from_json(
                cohlab::bench::apply_overrides_to_json("{}", overrides));
        }
        if (app.count("--seed") > 0) cfg.seed = seed;
        return cfg;
    };

    try {
        namespace bench = cohlab::bench;
        std::filesystem::create_directories(out_dir);

        if (cmd_self->parsed()) return run_selftest();

        if (cmd_sim->parsed()) {
            bench::ExperimentConfig cfg = make_config();
            std::printf("link: %d x %.6g km, launch %.6g dBm, %zu symbols, seed %llu\n",
                        cfg.n_spans, cfg.fiber.span_km, cfg.launch_power_dbm, cfg.n_symbols,
                        static_cast<unsigned long long>(cfg.seed));
            bench::PipelineArtifacts art;
            std::vector<bench::MethodResult> results = bench::run_pipeline(cfg, timing, &art);
            print_metrics_header();
            bench::SweepResult one;
            for (const auto& r : results) {
                print_metrics_row(r.method, r.metrics, r.runtime_s, timing);
                bench::SweepRow row;
                row.sweep_var = cfg.sweep_variable == "n_spans"
                                    ? static_cast<double>(cfg.n_spans)
                                    : cfg.launch_power_dbm;
                row.method = r.method;
                row.metrics = r.metrics;
                row.runtime_s = r.runtime_s;
                row.seed = cfg.seed;
                one.rows.push_back(std::move(row));
            }
            bench::emit_csv(one, out_dir + "/simulate.csv");
            bench::emit_constellation(art.tx_reference, out_dir + "/constellation_tx.csv");
            bench::emit_constellation(art.rx_unequalized, out_dir + "/constellation_rx.csv");
            for (const auto& [m, f] : art.rx_equalized)
                bench::emit_constellation(f, out_dir + "/constellation_" + m + ".csv");
            std::printf("wrote %s/simulate.csv and constellation CSVs\n", out_dir.c_str());
            return 0;
        }

        if (cmd_train->parsed()) {
            bench::ExperimentConfig cfg = make_config();
            bench::TrainOutput out = bench::train_model(cfg, arch);
            for (size_t i = 0; i < out.result.loss_history.size(); ++i)
                std::printf("epoch %3zu  loss %.8g\n", i + 1, out.result.loss_history[i]);
            std::printf("best epoch %d  loss %.8g\n", out.meta.best_epoch + 1,
                        out.meta.final_loss);
            const std::string path = out_dir + "/" + arch + ".ckpt";
            cohlab::nn::save_checkpoint(*out.model, out.meta, path);
            std::printf("wrote %s\n", path.c_str());
            return 0;
        }

        if (cmd_eval->parsed()) {
            bench::ExperimentConfig cfg = make_config();
            cohlab::nn::LoadedCheckpoint lc = cohlab::nn::load_checkpoint(ckpt_path);
            bench::PipelineArtifacts art;
            bench::MethodResult r = bench::evaluate_model(cfg, *lc.model, lc.meta, &art);
            print_metrics_header();
            print_metrics_row(r.method, r.metrics, r.runtime_s, timing);
            const std::string name = lc.model->architecture();
            bench::emit_constellation(art.rx_unequalized, out_dir + "/constellation_rx.csv");
            bench::emit_constellation(art.rx_equalized[name],
                                      out_dir + "/constellation_" + name + ".csv");
            return 0;
        }

        if (cmd_sweep->parsed()) {
            bench::ExperimentConfig cfg = make_config();
            bench::SweepResult s = bench::sweep(cfg, timing);
            const std::string csv = out_dir + "/sweep.csv";
            const std::string svg = out_dir + "/sweep.svg";
            bench::emit_csv(s, csv);
            const std::string label = cfg.sweep_variable == "launch_power_dbm"
                                          ? "launch power (dBm)"
                                          : "number of spans";
            bench::emit_plot(s, svg, label, cfg.fec_threshold_db);
            std::printf("%zu rows (%zu points x %zu methods)\nwrote %s\nwrote %s\n",
                        s.rows.size(), cfg.sweep_values.size(), cfg.methods.size(), csv.c_str(),
                        svg.c_str());
            return 0;
        }

        if (cmd_plot->parsed()) {
            bench::SweepResult s = bench::parse_sweep_csv(plot_input);
            const std::string svg = out_dir + "/plot.svg";
            bench::emit_plot(s, svg, x_label, fec_threshold);
            std::printf("wrote %s\n", svg.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

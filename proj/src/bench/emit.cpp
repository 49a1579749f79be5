// SPDX-License-Identifier: Apache-2.0

#include "cohlab/bench/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cohlab::bench {

namespace {

constexpr const char* kCsvHeader =
    "sweep_var,method,ber,ser,q_db,evm_pct,ber_is_floor,runtime_s,seed";

std::string fmt_g(double v) {
    if (std::isnan(v)) return "nan";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    std::string s = buf;
    if (s == "-0") s = "0";
    return s;
}

std::string fmt_f(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    std::string s = buf;
    if (s == "-0.00" || s == "-0.0" || s == "-0.000") s.erase(0, 1);
    return s;
}

std::ofstream open_out(const std::string& path, const char* who) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(std::string(who) + ": cannot write " + path);
    return f;
}

void close_out(std::ofstream& f, const std::string& path, const char* who) {
    f.flush();
    if (!f) throw std::runtime_error(std::string(who) + ": write failed for " + path);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream f = open_out(path, "emit_csv");
    f << kCsvHeader << "\n";
    for (const auto& r : result.rows) {
        f << fmt_g(r.sweep_var) << ',' << r.method << ',' << fmt_g(r.metrics.ber) << ','
          << fmt_g(r.metrics.ser) << ',' << fmt_g(r.metrics.q_db) << ','
          << fmt_g(r.metrics.evm_pct) << ',' << (r.metrics.ber_is_floor ? 1 : 0) << ','
          << fmt_f(r.runtime_s, 3) << ',' << r.seed << "\n";
    }
    close_out(f, path, "emit_csv");
}

SweepResult parse_sweep_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("parse_sweep_csv: cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("parse_sweep_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw std::runtime_error("parse_sweep_csv: unexpected header in " + path);

    SweepResult out;
    size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cols = split_csv_line(line);
        if (cols.size() != 9)
            throw std::runtime_error("parse_sweep_csv: " + path + ":" + std::to_string(lineno) +
                                     ": expected 9 columns, got " + std::to_string(cols.size()));
        try {
            SweepRow r;
            r.sweep_var = std::stod(cols[0]);
            r.method = cols[1];
            r.metrics.ber = std::stod(cols[2]);
            r.metrics.ser = std::stod(cols[3]);
            r.metrics.q_db = std::stod(cols[4]);
            r.metrics.evm_pct = std::stod(cols[5]);
            r.metrics.ber_is_floor = cols[6] == "1";
            r.runtime_s = std::stod(cols[7]);
            r.seed = std::stoull(cols[8]);
            r.failed = std::isnan(r.metrics.ber);
            out.rows.push_back(std::move(r));
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("parse_sweep_csv: " + path + ":" + std::to_string(lineno) +
                                     ": malformed number");
        }
    }
    return out;
}

void emit_constellation(const SymbolFrame& frame, const std::string& path) {
    std::ofstream f = open_out(path, "emit_constellation");
    f << "i,q\n";
    for (const auto& s : frame.symbols)
        f << fmt_g(s.real()) << ',' << fmt_g(s.imag()) << "\n";
    close_out(f, path, "emit_constellation");
}

namespace {

// Tick positions at a "nice" step (1/2/5 x 10^k) covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target) {
    std::vector<double> ticks;
    const double span = hi - lo;
    if (!(span > 0) || target < 2) return ticks;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    const double frac = span / target / step;
    if (frac >= 7.5)
        step *= 10.0;
    else if (frac >= 3.5)
        step *= 5.0;
    else if (frac >= 1.5)
        step *= 2.0;
    const long k0 = static_cast<long>(std::ceil(lo / step - 1e-9));
    const long k1 = static_cast<long>(std::floor(hi / step + 1e-9));
    for (long k = k0; k <= k1; ++k) {
        double v = k * step;
        if (std::fabs(v) < step * 1e-9) v = 0.0;
        ticks.push_back(v);
    }
    return ticks;
}

const char* method_color(const std::string& method, size_t fallback_index) {
    if (method == "linear-eq") return "#1f77b4";
    if (method == "dbp") return "#d62728";
    if (method == "fcnn") return "#2ca02c";
    if (method == "transformer") return "#9467bd";
    static const char* palette[] = {"#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    return palette[fallback_index % 4];
}

}  // namespace

void emit_plot(const SweepResult& result, const std::string& path, const std::string& x_label,
               double fec_threshold_db) {
    std::vector<std::string> methods;
    for (const auto& r : result.rows)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
            methods.push_back(r.method);

    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    bool any = false;
    for (const auto& r : result.rows) {
        if (!std::isfinite(r.metrics.q_db)) continue;
        if (!any) {
            xmin = xmax = r.sweep_var;
            ymin = ymax = r.metrics.q_db;
            any = true;
        } else {
            xmin = std::min(xmin, r.sweep_var);
            xmax = std::max(xmax, r.sweep_var);
            ymin = std::min(ymin, r.metrics.q_db);
            ymax = std::max(ymax, r.metrics.q_db);
        }
    }
    if (!any) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 10.0;
    }
    if (fec_threshold_db > 0.0) {
        ymin = std::min(ymin, fec_threshold_db);
        ymax = std::max(ymax, fec_threshold_db);
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    double ypad = std::max(0.5, 0.06 * (ymax - ymin));
    ymin -= ypad;
    ymax += ypad;

    const double width = 720.0, height = 480.0;
    const double ml = 70.0, mr = 170.0, mt = 42.0, mb = 58.0;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double v) { return height - mb - (v - ymin) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "<text x=\"" << fmt_f(ml + pw / 2, 1)
        << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
        << "Q factor vs " << x_label << "</text>\n";

    // frame
    svg << "<rect x=\"" << fmt_f(ml, 1) << "\" y=\"" << fmt_f(mt, 1) << "\" width=\""
        << fmt_f(pw, 1) << "\" height=\"" << fmt_f(ph, 1)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (double t : nice_ticks(xmin, xmax, 7)) {
        const double x = sx(t);
        svg << "<line x1=\"" << fmt_f(x, 2) << "\" y1=\"" << fmt_f(height - mb, 2) << "\" x2=\""
            << fmt_f(x, 2) << "\" y2=\"" << fmt_f(height - mb + 5, 2)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
            << "<line x1=\"" << fmt_f(x, 2) << "\" y1=\"" << fmt_f(mt, 2) << "\" x2=\""
            << fmt_f(x, 2) << "\" y2=\"" << fmt_f(height - mb, 2)
            << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n"
            << "<text x=\"" << fmt_f(x, 2) << "\" y=\"" << fmt_f(height - mb + 20, 2)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << fmt_g(t)
            << "</text>\n";
    }
    for (double t : nice_ticks(ymin, ymax, 6)) {
        const double y = sy(t);
        svg << "<line x1=\"" << fmt_f(ml - 5, 2) << "\" y1=\"" << fmt_f(y, 2) << "\" x2=\""
            << fmt_f(ml, 2) << "\" y2=\"" << fmt_f(y, 2)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
            << "<line x1=\"" << fmt_f(ml, 2) << "\" y1=\"" << fmt_f(y, 2) << "\" x2=\""
            << fmt_f(ml + pw, 2) << "\" y2=\"" << fmt_f(y, 2)
            << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n"
            << "<text x=\"" << fmt_f(ml - 9, 2) << "\" y=\"" << fmt_f(y + 4, 2)
            << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << fmt_g(t)
            << "</text>\n";
    }
    svg << "<text x=\"" << fmt_f(ml + pw / 2, 1) << "\" y=\"" << fmt_f(height - 16, 1)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << x_label
        << "</text>\n"
        << "<text x=\"20\" y=\"" << fmt_f(mt + ph / 2, 1)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
        << "transform=\"rotate(-90 20 " << fmt_f(mt + ph / 2, 1) << ")\">Q factor (dB)</text>\n";

    if (fec_threshold_db > 0.0) {
        const double y = sy(fec_threshold_db);
        svg << "<line x1=\"" << fmt_f(ml, 2) << "\" y1=\"" << fmt_f(y, 2) << "\" x2=\""
            << fmt_f(ml + pw, 2) << "\" y2=\"" << fmt_f(y, 2)
            << "\" stroke=\"#555555\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n"
            << "<text x=\"" << fmt_f(ml + 6, 2) << "\" y=\"" << fmt_f(y - 5, 2)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">FEC threshold "
            << fmt_g(fec_threshold_db) << " dB</text>\n";
    }

    for (size_t mi = 0; mi < methods.size(); ++mi) {
        const std::string& method = methods[mi];
        const char* color = method_color(method, mi);
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : result.rows)
            if (r.method == method && std::isfinite(r.metrics.q_db))
                pts.emplace_back(r.sweep_var, r.metrics.q_db);
        if (pts.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" "
                << "points=\"";
            for (size_t i = 0; i < pts.size(); ++i) {
                if (i) svg << ' ';
                svg << fmt_f(sx(pts[i].first), 2) << ',' << fmt_f(sy(pts[i].second), 2);
            }
            svg << "\"/>\n";
        }
        for (const auto& [px, py] : pts)
            svg << "<circle cx=\"" << fmt_f(sx(px), 2) << "\" cy=\"" << fmt_f(sy(py), 2)
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        // legend entry
        const double ly = mt + 14 + 20.0 * static_cast<double>(mi);
        svg << "<line x1=\"" << fmt_f(width - mr + 14, 1) << "\" y1=\"" << fmt_f(ly, 1)
            << "\" x2=\"" << fmt_f(width - mr + 40, 1) << "\" y2=\"" << fmt_f(ly, 1)
            << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n"
            << "<circle cx=\"" << fmt_f(width - mr + 27, 1) << "\" cy=\"" << fmt_f(ly, 1)
            << "\" r=\"3\" fill=\"" << color << "\"/>\n"
            << "<text x=\"" << fmt_f(width - mr + 46, 1) << "\" y=\"" << fmt_f(ly + 4, 1)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << method << "</text>\n";
    }

    svg << "</svg>\n";

    std::ofstream f = open_out(path, "emit_plot");
    f << svg.str();
    close_out(f, path, "emit_plot");
}

}  // namespace cohlab::bench

// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "tailfit/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tailfit {

namespace {

using nlohmann::json;

constexpr int kFitSchemaVersion = 1;

std::string_view trimmed(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

void append_row(std::string& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out += ',';
        out += format_double(v);
        first = false;
    }
    out += '\n';
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::vector<double> read_values_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view body = trimmed(line);
        if (body.empty() || body.front() == '#') continue;
        double v = 0.0;
        const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
        if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed value '" +
                                     std::string(body) + "'");
        }
        values.push_back(v);
    }
    return values;
}

void write_values_csv(const std::string& path, const std::vector<double>& values,
                      const std::vector<std::string>& comments) {
    std::string out;
    for (const std::string& c : comments) out += "# " + c + "\n";
    for (double v : values) {
        out += format_double(v);
        out += '\n';
    }
    write_text_file(path, out);
}

std::string fit_to_json(const FitResult& fit, std::optional<std::uint64_t> seed) {
    json j;
    j["schema_version"] = kFitSchemaVersion;
    j["method"] = to_string(fit.method);
    j["shape"] = fit.params.shape;
    j["scale"] = fit.params.scale;
    j["n"] = fit.n;
    if (seed) j["seed"] = *seed;
    json diag = json::object();
    for (const auto& [key, value] : fit.diagnostics) diag[key] = value;
    j["diagnostics"] = diag;
    return j.dump(2) + "\n";
}

void write_fit_json(const std::string& path, const FitResult& fit,
                    std::optional<std::uint64_t> seed) {
    write_text_file(path, fit_to_json(fit, seed));
}

FitResult read_fit_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    try {
        if (!j.is_object() || j.at("schema_version").get<int>() != kFitSchemaVersion) {
            throw std::runtime_error("unsupported schema_version");
        }
        FitResult fit{GpdParams(j.at("shape").get<double>(), j.at("scale").get<double>()),
                      method_from_string(j.at("method").get<std::string>()),
                      j.at("n").get<std::size_t>(),
                      {}};
        if (j.contains("diagnostics")) {
            for (const auto& [key, value] : j.at("diagnostics").items()) {
                fit.diagnostics[key] = value.get<double>();
            }
        }
        return fit;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": invalid fit file: " + e.what());
    }
}

std::string qq_to_csv(const QqReport& report) {
    std::string out = "# q-q quantile pairs\n";
    out += "# slope=" + format_double(report.slope) +
           " intercept=" + format_double(report.intercept) +
           " slope_error=" + format_double(report.slope_error) + "\n";
    out += "# columns: prob,true_q,fitted_q\n";
    for (std::size_t i = 0; i < report.points.probs.size(); ++i) {
        append_row(out, {report.points.probs[i], report.points.true_q[i], report.points.fitted_q[i]});
    }
    return out;
}

std::string pdf_to_csv(const std::vector<std::pair<double, double>>& curve) {
    std::string out = "# columns: y,pdf\n";
    for (const auto& [y, f] : curve) append_row(out, {y, f});
    return out;
}

std::string losses_to_csv(const std::vector<StepLosses>& losses) {
    std::string out = "# columns: step,generator,discriminator_fake,discriminator_real\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out += std::to_string(i);
        out += ',';
        out += format_double(losses[i].generator);
        out += ',';
        out += format_double(losses[i].discriminator_fake);
        out += ',';
        out += format_double(losses[i].discriminator_real);
        out += '\n';
    }
    return out;
}

std::string sweep_cells_to_csv(const std::vector<SweepCell>& cells) {
    const double nan = std::nan("");
    std::string out = "# columns: size,method,trial,shape,scale,slope_error,failed\n";
    for (const SweepCell& cell : cells) {
        out += std::to_string(cell.size);
        out += ',';
        out += to_string(cell.method);
        out += ',';
        out += std::to_string(cell.trial);
        out += ',';
        out += format_double(cell.fit ? cell.fit->params.shape : nan);
        out += ',';
        out += format_double(cell.fit ? cell.fit->params.scale : nan);
        out += ',';
        out += format_double(cell.slope_error ? *cell.slope_error : nan);
        out += ',';
        out += cell.failed() ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string sweep_summary_to_csv(const std::vector<SweepAggregate>& aggregates) {
    std::string out =
        "# columns: size,method,mean_abs_slope_error,stddev_abs_slope_error,failures,trials\n";
    for (const SweepAggregate& agg : aggregates) {
        out += std::to_string(agg.size);
        out += ',';
        out += to_string(agg.method);
        out += ',';
        out += format_double(agg.mean_abs_slope_error);
        out += ',';
        out += format_double(agg.stddev_abs_slope_error);
        out += ',';
        out += std::to_string(agg.failures);
        out += ',';
        out += std::to_string(agg.trials);
        out += '\n';
    }
    return out;
}

std::string qq_to_svg(const QqReport& report) {
    constexpr double kSize = 480.0;
    constexpr double kMargin = 50.0;
    const std::vector<double>& xs = report.points.true_q;
    const std::vector<double>& ys = report.points.fitted_q;
    double lo = 0.0;
    double hi = 1.0;
    if (!xs.empty()) {
        lo = std::min(*std::min_element(xs.begin(), xs.end()),
                      *std::min_element(ys.begin(), ys.end()));
        hi = std::max(*std::max_element(xs.begin(), xs.end()),
                      *std::max_element(ys.begin(), ys.end()));
        if (hi <= lo) hi = lo + 1.0;
    }
    const double span = hi - lo;
    const auto sx = [&](double v) { return kMargin + (v - lo) / span * (kSize - 2.0 * kMargin); };
    const auto sy = [&](double v) {
        return kSize - kMargin - (v - lo) / span * (kSize - 2.0 * kMargin);
    };

    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='480' height='480' "
                      "viewBox='0 0 480 480'>\n";
    svg += "<rect width='480' height='480' fill='white'/>\n";
    svg += "<rect x='50' y='50' width='380' height='380' fill='none' stroke='black'/>\n";
    // identity reference
    svg += "<line x1='" + format_double(sx(lo)) + "' y1='" + format_double(sy(lo)) + "' x2='" +
           format_double(sx(hi)) + "' y2='" + format_double(sy(hi)) +
           "' stroke='gray' stroke-dasharray='4 3'/>\n";
    // fitted regression line, clipped to the frame vertically
    const auto line_y = [&](double x) { return report.intercept + report.slope * x; };
    svg += "<line x1='" + format_double(sx(lo)) + "' y1='" +
           format_double(std::clamp(sy(line_y(lo)), kMargin, kSize - kMargin)) + "' x2='" +
           format_double(sx(hi)) + "' y2='" +
           format_double(std::clamp(sy(line_y(hi)), kMargin, kSize - kMargin)) +
           "' stroke='steelblue'/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        svg += "<circle cx='" + format_double(sx(xs[i])) + "' cy='" + format_double(sy(ys[i])) +
               "' r='2' fill='crimson'/>\n";
    }
    svg += "<text x='240' y='472' text-anchor='middle' font-size='12'>true quantile</text>\n";
    svg += "<text x='14' y='240' text-anchor='middle' font-size='12' "
           "transform='rotate(-90 14 240)'>fitted quantile</text>\n";
    svg += "<text x='240' y='30' text-anchor='middle' font-size='12'>slope " +
           format_double(report.slope) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace tailfit

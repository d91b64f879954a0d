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

// tailfit: GPD tail modeling for received-power exceedances.
//
// Subcommands: gen-data (synthetic exceedances), fit (mom/mle/gan),
// evaluate (q-q slope error against known truth), sweep (Monte Carlo
// comparison across sample sizes). Exit codes: 0 success, 1 runtime
// failure, 2 usage or validation error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailfit/evaluation.hpp"
#include "tailfit/gan.hpp"
#include "tailfit/gpd.hpp"
#include "tailfit/io.hpp"
#include "tailfit/rng.hpp"

namespace {

using namespace tailfit;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Everything configurable from a JSON file; command-line flags override
// file values, which override these defaults.
struct CliConfig {
    GanConfig gan;
    std::size_t qq_grid = 100;
    std::vector<std::size_t> sizes = {2000, 50, 20, 10};
    std::size_t trials = 20;
    std::size_t threads = 1;
};

void report_error(const std::string& message) {
    nlohmann::json j;
    j["error"] = message;
    std::cerr << j.dump() << "\n";
}

CliConfig load_config(const std::string& path) {
    CliConfig cfg;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument(path + ": config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "epochs") cfg.gan.epochs = value.get<std::size_t>();
            else if (key == "steps_per_epoch") cfg.gan.steps_per_epoch = value.get<std::size_t>();
            else if (key == "noise_batch") cfg.gan.noise_batch = value.get<std::size_t>();
            else if (key == "lr_generator") cfg.gan.lr_generator = value.get<double>();
            else if (key == "lr_discriminator") cfg.gan.lr_discriminator = value.get<double>();
            else if (key == "hidden_width") cfg.gan.hidden_width = value.get<std::size_t>();
            else if (key == "hidden_layers") cfg.gan.hidden_layers = value.get<std::size_t>();
            else if (key == "feature_dim") cfg.gan.feature_dim = value.get<std::size_t>();
            else if (key == "seed") cfg.gan.seed = value.get<std::uint64_t>();
            else if (key == "estimate_batches") cfg.gan.estimate_batches = value.get<std::size_t>();
            else if (key == "qq_grid") cfg.qq_grid = value.get<std::size_t>();
            else if (key == "sizes") cfg.sizes = value.get<std::vector<std::size_t>>();
            else if (key == "trials") cfg.trials = value.get<std::size_t>();
            else if (key == "threads") cfg.threads = value.get<std::size_t>();
            else throw std::invalid_argument(path + ": unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(path + ": bad value for '" + key + "': " + e.what());
        }
    }
    cfg.gan.validate();
    if (cfg.qq_grid < 2) throw std::invalid_argument(path + ": qq_grid must be at least 2");
    return cfg;
}

struct GenDataArgs {
    double shape = 0.0;
    double scale = 1.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen_data(const GenDataArgs& a) {
    std::string content;
    try {
        const GpdParams params(a.shape, a.scale);
        if (a.n == 0) throw std::invalid_argument("gen-data: --n must be positive");
        RngStream rng(a.seed);
        const ExceedanceSet data = sample(params, a.n, rng);
        content = "# gpd exceedances shape=" + format_double(a.shape) +
                  " scale=" + format_double(a.scale) + " n=" + std::to_string(a.n) +
                  " seed=" + std::to_string(a.seed) + "\n";
        for (double v : data.values) content += format_double(v) + "\n";
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitUsage;
    }
    try {
        write_text_file(a.out, content);
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitRuntime;
    }
    return kExitOk;
}

struct FitArgs {
    std::string method = "mom";
    std::string input;
    std::optional<double> threshold;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int run_fit(const FitArgs& a) {
    FitResult fit{GpdParams(0.0, 1.0), Method::mom, 0, {}};
    std::optional<std::uint64_t> used_seed;
    try {
        const Method method = method_from_string(a.method);
        CliConfig cfg = a.config_path.empty() ? CliConfig{} : load_config(a.config_path);
        if (a.seed) cfg.gan.seed = *a.seed;

        const std::vector<double> values = read_values_csv(a.input);
        const ExceedanceSet data = a.threshold ? extract_exceedances(values, *a.threshold)
                                               : ExceedanceSet{values, std::nullopt};
        switch (method) {
            case Method::mom:
                fit = mom_fit(data);
                break;
            case Method::mle:
                fit = mle_fit(data);
                break;
            case Method::gan:
                fit = train_gan(data, cfg.gan).fit;
                used_seed = cfg.gan.seed;
                break;
        }
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitUsage;
    }
    try {
        write_fit_json(a.out, fit, used_seed);
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitRuntime;
    }
    return kExitOk;
}

struct EvaluateArgs {
    std::string fit_path;
    double true_shape = 0.0;
    double true_scale = 1.0;
    std::size_t k = 100;
    std::string out;
    std::string svg_out;
    std::string pdf_out;
    double pdf_max = 0.0;  // 0 picks the larger 0.995 quantile
    std::size_t pdf_points = 200;
};

int run_evaluate(const EvaluateArgs& a) {
    QqReport report{{}, 0.0, 0.0, 0.0};
    std::vector<std::pair<double, double>> curve;
    try {
        const GpdParams truth(a.true_shape, a.true_scale);
        const FitResult fit = read_fit_json(a.fit_path);
        report = slope_error(qq_points(fit.params, truth, a.k));
        if (!a.pdf_out.empty()) {
            double y_max = a.pdf_max;
            if (y_max <= 0.0) {
                y_max = std::max(quantile(truth, 0.995), quantile(fit.params, 0.995));
            }
            curve = pdf_curve(fit.params, y_max, a.pdf_points);
        }
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitUsage;
    }
    try {
        write_text_file(a.out, qq_to_csv(report));
        if (!a.svg_out.empty()) write_text_file(a.svg_out, qq_to_svg(report));
        if (!a.pdf_out.empty()) write_text_file(a.pdf_out, pdf_to_csv(curve));
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitRuntime;
    }
    std::cout << format_double(report.slope_error) << "\n";
    return kExitOk;
}

struct SweepArgs {
    std::vector<std::size_t> sizes;
    std::optional<std::size_t> trials;
    double shape = 0.3;
    double scale = 1.0;
    std::vector<std::string> methods;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string config_path;
    std::optional<std::size_t> threads;
};

int run_sweep(const SweepArgs& a) {
    GpdParams truth(0.0, 1.0);
    CliConfig cfg;
    std::vector<Method> methods;
    std::uint64_t master_seed = 42;
    try {
        truth = GpdParams(a.shape, a.scale);
        if (!a.config_path.empty()) cfg = load_config(a.config_path);
        if (!a.sizes.empty()) cfg.sizes = a.sizes;
        if (a.trials) cfg.trials = *a.trials;
        if (a.threads) cfg.threads = *a.threads;
        if (a.seed) master_seed = *a.seed;

        std::vector<std::string> method_names = a.methods;
        if (method_names.empty()) method_names = {"mom", "mle", "gan"};
        for (const std::string& name : method_names) methods.push_back(method_from_string(name));
        if (cfg.sizes.empty()) throw std::invalid_argument("sweep: --sizes must be nonempty");
        if (cfg.trials == 0) throw std::invalid_argument("sweep: --trials must be positive");
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitUsage;
    }

    try {
        std::filesystem::create_directories(a.out_dir);
        SweepOptions opt;
        opt.trial.qq_grid = cfg.qq_grid;
        opt.trial.gan = cfg.gan;
        opt.trial.capture_loss = true;
        opt.threads = cfg.threads;
        const SweepResult result =
            tailfit::run_sweep(truth, cfg.sizes, cfg.trials, methods, master_seed, opt);

        const std::filesystem::path dir(a.out_dir);
        write_text_file((dir / "sweep.csv").string(), sweep_cells_to_csv(result.cells));
        write_text_file((dir / "summary.csv").string(),
                        sweep_summary_to_csv(result.aggregates));
        for (const SweepCell& cell : result.cells) {
            if (cell.failed() || !cell.fit) continue;
            const QqReport report =
                slope_error(qq_points(cell.fit->params, truth, cfg.qq_grid));
            const std::string name = "qq_size" + std::to_string(cell.size) + "_trial" +
                                     std::to_string(cell.trial) + "_" + to_string(cell.method) +
                                     ".csv";
            write_text_file((dir / name).string(), qq_to_csv(report));
        }
        for (const LossHistory& history : result.losses) {
            const std::string name = "loss_size" + std::to_string(history.size) + "_trial" +
                                     std::to_string(history.trial) + ".csv";
            write_text_file((dir / name).string(), losses_to_csv(history.losses));
        }

        std::cout << std::left << std::setw(8) << "size" << std::setw(8) << "method"
                  << std::setw(24) << "mean|slope_error|" << std::setw(24) << "stddev"
                  << "failures\n";
        for (const SweepAggregate& agg : result.aggregates) {
            std::cout << std::left << std::setw(8) << agg.size << std::setw(8)
                      << to_string(agg.method) << std::setw(24)
                      << format_double(agg.mean_abs_slope_error) << std::setw(24)
                      << format_double(agg.stddev_abs_slope_error)
                      << (std::to_string(agg.failures) + "/" + std::to_string(agg.trials))
                      << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        report_error(e.what());
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GPD tail fitting: moment, likelihood and adversarial estimators"};
    app.require_subcommand(1);

    GenDataArgs gen;
    CLI::App* cmd_gen = app.add_subcommand("gen-data", "Generate synthetic GPD exceedances");
    cmd_gen->add_option("--shape", gen.shape, "True shape parameter")->required();
    cmd_gen->add_option("--scale", gen.scale, "True scale parameter")->required();
    cmd_gen->add_option("--n", gen.n, "Number of samples")->required();
    cmd_gen->add_option("--seed", gen.seed, "RNG seed")->default_val(0);
    cmd_gen->add_option("--out", gen.out, "Output CSV path")->required();

    FitArgs fit;
    double fit_threshold = 0.0;
    std::uint64_t fit_seed = 0;
    CLI::App* cmd_fit = app.add_subcommand("fit", "Fit GPD parameters to exceedances");
    cmd_fit->add_option("--method", fit.method, "Estimator: mom, mle or gan")->required();
    cmd_fit->add_option("--input", fit.input, "Input CSV (exceedances, or raw powers with --threshold)")
        ->required();
    CLI::Option* opt_threshold =
        cmd_fit->add_option("--threshold", fit_threshold, "Extract exceedances below this power");
    cmd_fit->add_option("--config", fit.config_path, "JSON config file");
    CLI::Option* opt_fit_seed = cmd_fit->add_option("--seed", fit_seed, "Seed override (gan)");
    cmd_fit->add_option("--out", fit.out, "Output fit JSON path")->required();

    EvaluateArgs eval;
    CLI::App* cmd_eval = app.add_subcommand("evaluate", "Score a fit against known truth");
    cmd_eval->add_option("--fit", eval.fit_path, "Fit JSON from the fit command")->required();
    cmd_eval->add_option("--true-shape", eval.true_shape, "True shape")->required();
    cmd_eval->add_option("--true-scale", eval.true_scale, "True scale")->required();
    cmd_eval->add_option("--k", eval.k, "Number of q-q grid points")->default_val(100);
    cmd_eval->add_option("--out", eval.out, "Output q-q CSV path")->required();
    cmd_eval->add_option("--svg", eval.svg_out, "Optional q-q scatter SVG path");
    cmd_eval->add_option("--pdf-out", eval.pdf_out, "Optional fitted-density CSV path");
    cmd_eval->add_option("--pdf-max", eval.pdf_max, "Density grid upper end (default: 0.995 quantile)");
    cmd_eval->add_option("--pdf-points", eval.pdf_points, "Density grid size")->default_val(200);

    SweepArgs sweep;
    std::size_t sweep_trials = 0;
    std::uint64_t sweep_seed = 0;
    std::size_t sweep_threads = 0;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "Monte Carlo comparison across sample sizes");
    cmd_sweep->add_option("--sizes", sweep.sizes, "Sample sizes (default 2000,50,20,10)")
        ->delimiter(',');
    CLI::Option* opt_trials = cmd_sweep->add_option("--trials", sweep_trials, "Trials per size");
    cmd_sweep->add_option("--shape", sweep.shape, "True shape parameter")->required();
    cmd_sweep->add_option("--scale", sweep.scale, "True scale parameter")->required();
    cmd_sweep->add_option("--methods", sweep.methods, "Estimators (default mom,mle,gan)")
        ->delimiter(',');
    CLI::Option* opt_sweep_seed = cmd_sweep->add_option("--seed", sweep_seed, "Master seed");
    cmd_sweep->add_option("--out-dir", sweep.out_dir, "Output directory")->required();
    cmd_sweep->add_option("--config", sweep.config_path, "JSON config file");
    CLI::Option* opt_threads = cmd_sweep->add_option("--threads", sweep_threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (cmd_gen->parsed()) return run_gen_data(gen);
    if (cmd_fit->parsed()) {
        if (opt_threshold->count() > 0) fit.threshold = fit_threshold;
        if (opt_fit_seed->count() > 0) fit.seed = fit_seed;
        return run_fit(fit);
    }
    if (cmd_eval->parsed()) return run_evaluate(eval);
    if (cmd_sweep->parsed()) {
        if (opt_trials->count() > 0) sweep.trials = sweep_trials;
        if (opt_sweep_seed->count() > 0) sweep.seed = sweep_seed;
        if (opt_threads->count() > 0) sweep.threads = sweep_threads;
        return run_sweep(sweep);
    }
    return kExitUsage;
}

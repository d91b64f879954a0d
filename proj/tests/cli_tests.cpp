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

// End-to-end tests of the tailfit binary. Each case drives the real
// executable through a shell and inspects exit codes and output files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "tailfit/io.hpp"

using namespace tailfit;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

struct TestDir {
    fs::path root;
    TestDir() : root(fs::temp_directory_path() / "tailfit_cli_tests") {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~TestDir() { fs::remove_all(root); }
    std::string path(const std::string& name) const { return (root / name).string(); }
};

CmdResult run_cli(const TestDir& dir, const std::string& args) {
    const std::string out_path = dir.path("_stdout.txt");
    const std::string err_path = dir.path("_stderr.txt");
    const std::string cmd = std::string("'") + TAILFIT_CLI_PATH + "' " + args + " > '" + out_path +
                            "' 2> '" + err_path + "'";
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text_file(out_path);
    r.err = read_text_file(err_path);
    return r;
}

// counts non-comment, non-blank lines of a csv already in memory
std::size_t csv_rows(const std::string& text) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        if (end > pos && text[pos] != '#') ++n;
        pos = end + 1;
    }
    return n;
}

bool stderr_is_error_json(const std::string& err) {
    return err.find("{\"error\":") == 0;
}

}  // namespace

TEST_CASE("gen-data writes deterministic samples with a header") {
    TestDir dir;
    const std::string a = dir.path("a.csv");
    const std::string b = dir.path("b.csv");
    const CmdResult r = run_cli(dir, "gen-data --shape 0.2 --scale 1.0 --n 2000 --seed 9 --out '" + a + "'");
    CHECK_EQ(r.code, 0);
    CHECK(r.err.empty());

    const std::string raw = read_text_file(a);
    CHECK_EQ(raw.rfind("# gpd exceedances shape=0.2 scale=1 n=2000 seed=9\n", 0), 0);

    const std::vector<double> values = read_values_csv(a);
    REQUIRE_EQ(values.size(), 2000);
    double mean = 0.0;
    for (double v : values) {
        CHECK_GE(v, 0.0);
        mean += v;
    }
    mean /= 2000.0;
    // mean sigma/(1-shape) = 1.25, sd of the mean = sqrt(2.604/2000)
    CHECK_LT(std::fabs(mean - 1.25), 4.0 * std::sqrt(2.6041666666666665 / 2000.0));

    const CmdResult r2 = run_cli(dir, "gen-data --shape 0.2 --scale 1.0 --n 2000 --seed 9 --out '" + b + "'");
    CHECK_EQ(r2.code, 0);
    CHECK_EQ(read_text_file(a), read_text_file(b));
}

TEST_CASE("gen-data validates its parameters") {
    TestDir dir;
    const CmdResult r = run_cli(dir, "gen-data --shape 2.0 --scale 1.0 --n 10 --out '" + dir.path("x.csv") + "'");
    CHECK_EQ(r.code, 2);
    CHECK(stderr_is_error_json(r.err));
    CHECK_FALSE(fs::exists(dir.path("x.csv")));
}

TEST_CASE("fit mom reproduces the closed-form two-point fit") {
    TestDir dir;
    const std::string input = dir.path("two.csv");
    write_text_file(input, "1.0\n3.0\n");
    const std::string out = dir.path("fit.json");
    const CmdResult r = run_cli(dir, "fit --method mom --input '" + input + "' --out '" + out + "'");
    CHECK_EQ(r.code, 0);

    const FitResult fit = read_fit_json(out);
    CHECK_EQ(fit.params.shape, -0.5);
    CHECK_EQ(fit.params.scale, 3.0);
    CHECK_EQ(fit.n, 2);
    CHECK_EQ(fit.method, Method::mom);
    CHECK_EQ(read_text_file(out).find("\"seed\""), std::string::npos);
}

TEST_CASE("fit converts raw powers through a threshold") {
    TestDir dir;
    const std::string input = dir.path("raw.csv");
    write_text_file(input, "9\n7\n12\n");
    const std::string out = dir.path("fit.json");
    const CmdResult r = run_cli(dir, "fit --method mom --threshold 10 --input '" + input +
                                         "' --out '" + out + "'");
    CHECK_EQ(r.code, 0);
    const FitResult fit = read_fit_json(out);
    // exceedances below 10 are {1, 3}, the same two-point example
    CHECK_EQ(fit.params.shape, -0.5);
    CHECK_EQ(fit.params.scale, 3.0);
    CHECK_EQ(fit.n, 2);
}

TEST_CASE("fit gan with a frozen schedule equals fit mom") {
    TestDir dir;
    const std::string data = dir.path("data.csv");
    REQUIRE_EQ(run_cli(dir, "gen-data --shape 0.3 --scale 1.0 --n 200 --seed 4 --out '" + data + "'").code, 0);

    const std::string cfg = dir.path("frozen.json");
    write_text_file(cfg, "{\"epochs\": 0}\n");

    const std::string mom_out = dir.path("mom.json");
    const std::string gan_out = dir.path("gan.json");
    REQUIRE_EQ(run_cli(dir, "fit --method mom --input '" + data + "' --out '" + mom_out + "'").code, 0);
    REQUIRE_EQ(run_cli(dir, "fit --method gan --config '" + cfg + "' --input '" + data +
                                "' --out '" + gan_out + "'").code, 0);

    const FitResult mom = read_fit_json(mom_out);
    const FitResult gan = read_fit_json(gan_out);
    CHECK_EQ(gan.method, Method::gan);
    CHECK_EQ(gan.params.shape, mom.params.shape);
    CHECK_EQ(gan.params.scale, mom.params.scale);
    CHECK_NE(read_text_file(gan_out).find("\"seed\": 42"), std::string::npos);

    // --seed overrides the config seed in the output
    REQUIRE_EQ(run_cli(dir, "fit --method gan --config '" + cfg + "' --seed 7 --input '" + data +
                                "' --out '" + gan_out + "'").code, 0);
    CHECK_NE(read_text_file(gan_out).find("\"seed\": 7"), std::string::npos);
}

TEST_CASE("fit mle recovers the truth on a large sample") {
    TestDir dir;
    const std::string data = dir.path("data.csv");
    REQUIRE_EQ(run_cli(dir, "gen-data --shape 0.2 --scale 1.0 --n 10000 --seed 11 --out '" + data + "'").code, 0);
    const std::string out = dir.path("fit.json");
    REQUIRE_EQ(run_cli(dir, "fit --method mle --input '" + data + "' --out '" + out + "'").code, 0);
    const FitResult fit = read_fit_json(out);
    CHECK_LT(std::fabs(fit.params.shape - 0.2), 0.05);
    CHECK_LT(std::fabs(fit.params.scale - 1.0), 0.05);
}

TEST_CASE("fit failures exit with code 2 and a json error") {
    TestDir dir;
    const std::string out = dir.path("fit.json");

    CmdResult r = run_cli(dir, "fit --method mom --input '" + dir.path("missing.csv") +
                                   "' --out '" + out + "'");
    CHECK_EQ(r.code, 2);
    CHECK(stderr_is_error_json(r.err));
    CHECK_FALSE(fs::exists(out));

    const std::string flat = dir.path("flat.csv");
    write_text_file(flat, "2\n2\n");
    r = run_cli(dir, "fit --method mom --input '" + flat + "' --out '" + out + "'");
    CHECK_EQ(r.code, 2);
    CHECK(stderr_is_error_json(r.err));

    r = run_cli(dir, "fit --method guess --input '" + flat + "' --out '" + out + "'");
    CHECK_EQ(r.code, 2);
}

TEST_CASE("evaluate prints zero for a perfect fit") {
    TestDir dir;
    const std::string fit_path = dir.path("fit.json");
    write_fit_json(fit_path, FitResult{GpdParams(0.3, 2.0), Method::mle, 500, {}});

    const std::string qq = dir.path("qq.csv");
    CmdResult r = run_cli(dir, "evaluate --fit '" + fit_path +
                                   "' --true-shape 0.3 --true-scale 2.0 --out '" + qq + "'");
    CHECK_EQ(r.code, 0);
    CHECK_EQ(r.out, "0\n");
    CHECK_EQ(csv_rows(read_text_file(qq)), 100);

    r = run_cli(dir, "evaluate --fit '" + fit_path +
                         "' --true-shape 0.3 --true-scale 2.0 --k 37 --out '" + qq + "'");
    CHECK_EQ(r.code, 0);
    CHECK_EQ(csv_rows(read_text_file(qq)), 37);
}

TEST_CASE("evaluate reports the doubled-scale slope with artifacts") {
    TestDir dir;
    const std::string fit_path = dir.path("fit.json");
    write_fit_json(fit_path, FitResult{GpdParams(0.0, 2.0), Method::mom, 100, {}});

    const std::string qq = dir.path("qq.csv");
    const std::string svg = dir.path("qq.svg");
    const std::string pdf = dir.path("pdf.csv");
    const CmdResult r = run_cli(dir, "evaluate --fit '" + fit_path +
                                         "' --true-shape 0.0 --true-scale 1.0 --out '" + qq +
                                         "' --svg '" + svg + "' --pdf-out '" + pdf +
                                         "' --pdf-max 1.0 --pdf-points 50");
    CHECK_EQ(r.code, 0);
    CHECK_EQ(r.out, "-1\n");
    CHECK_EQ(read_text_file(svg).rfind("<svg", 0), 0);
    CHECK_EQ(csv_rows(read_text_file(pdf)), 50);
}

TEST_CASE("evaluate rejects malformed fit files") {
    TestDir dir;
    const std::string fit_path = dir.path("fit.json");
    write_text_file(fit_path, "{oops");
    const CmdResult r = run_cli(dir, "evaluate --fit '" + fit_path +
                                         "' --true-shape 0.3 --true-scale 1.0 --out '" +
                                         dir.path("qq.csv") + "'");
    CHECK_EQ(r.code, 2);
    CHECK(stderr_is_error_json(r.err));
}

TEST_CASE("sweep writes cells, summary and per-cell qq files") {
    TestDir dir;
    const std::string out_dir = dir.path("sweep_out");
    const std::string args = "sweep --sizes 50,20 --trials 2 --shape 0.3 --scale 1.0 "
                             "--methods mom,mle --seed 5 --out-dir '";
    const CmdResult r = run_cli(dir, args + out_dir + "'");
    CHECK_EQ(r.code, 0);
    CHECK_EQ(r.out.rfind("size", 0), 0);
    CHECK_NE(r.out.find("mom"), std::string::npos);
    CHECK_NE(r.out.find("mle"), std::string::npos);

    const fs::path d(out_dir);
    CHECK_EQ(csv_rows(read_text_file((d / "sweep.csv").string())), 8);
    CHECK_EQ(csv_rows(read_text_file((d / "summary.csv").string())), 4);
    for (const std::string size : {"50", "20"}) {
        for (const std::string trial : {"0", "1"}) {
            for (const std::string method : {"mom", "mle"}) {
                const fs::path qq = d / ("qq_size" + size + "_trial" + trial + "_" + method + ".csv");
                CHECK(fs::exists(qq));
            }
        }
    }
    std::size_t loss_files = 0;
    for (const auto& entry : fs::directory_iterator(d)) {
        if (entry.path().filename().string().rfind("loss_", 0) == 0) ++loss_files;
    }
    CHECK_EQ(loss_files, 0);  // no gan in the method list

    // identical invocations produce identical outputs
    const std::string out_dir2 = dir.path("sweep_out2");
    REQUIRE_EQ(run_cli(dir, args + out_dir2 + "'").code, 0);
    const fs::path d2(out_dir2);
    CHECK_EQ(read_text_file((d / "sweep.csv").string()), read_text_file((d2 / "sweep.csv").string()));
    CHECK_EQ(read_text_file((d / "summary.csv").string()),
             read_text_file((d2 / "summary.csv").string()));
}

TEST_CASE("sweep records gan losses when requested") {
    TestDir dir;
    const std::string cfg = dir.path("tiny.json");
    write_text_file(cfg, "{\"epochs\": 2, \"steps_per_epoch\": 5, \"noise_batch\": 50, "
                         "\"estimate_batches\": 3}\n");
    const std::string out_dir = dir.path("gan_sweep");
    const CmdResult r = run_cli(dir, "sweep --sizes 40 --trials 2 --shape 0.3 --scale 1.0 "
                                     "--methods gan --seed 6 --config '" + cfg + "' --out-dir '" +
                                         out_dir + "'");
    CHECK_EQ(r.code, 0);
    const fs::path d(out_dir);
    CHECK_EQ(csv_rows(read_text_file((d / "sweep.csv").string())), 2);
    for (const std::string trial : {"0", "1"}) {
        const std::string loss = (d / ("loss_size40_trial" + trial + ".csv")).string();
        REQUIRE(fs::exists(loss));
        CHECK_EQ(csv_rows(read_text_file(loss)), 10);
    }
}

TEST_CASE("sweep rejects a bad config before writing anything") {
    TestDir dir;
    const std::string cfg = dir.path("bad.json");
    write_text_file(cfg, "{\"epochs\": 2, \"bogus\": 1}\n");
    const std::string out_dir = dir.path("never");
    CmdResult r = run_cli(dir, "sweep --sizes 20 --trials 1 --shape 0.3 --scale 1.0 "
                               "--methods mom --config '" + cfg + "' --out-dir '" + out_dir + "'");
    CHECK_EQ(r.code, 2);
    CHECK(stderr_is_error_json(r.err));
    CHECK_NE(r.err.find("bogus"), std::string::npos);
    CHECK_FALSE(fs::exists(out_dir));

    r = run_cli(dir, "sweep --sizes 20 --trials 0 --shape 0.3 --scale 1.0 --methods mom "
                     "--out-dir '" + out_dir + "'");
    CHECK_EQ(r.code, 2);
    CHECK_FALSE(fs::exists(out_dir));
}

TEST_CASE("usage errors exit with code 2") {
    TestDir dir;
    CHECK_EQ(run_cli(dir, "").code, 2);
    CHECK_EQ(run_cli(dir, "frobnicate").code, 2);
    CHECK_EQ(run_cli(dir, "fit --input x.csv --out y.json").code, 2);  // missing --method
    CHECK_EQ(run_cli(dir, "gen-data --shape 0.1 --scale 1 --n 5").code, 2);  // missing --out
}

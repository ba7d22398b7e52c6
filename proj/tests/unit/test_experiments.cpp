// SPDX-License-Identifier: Apache-2.0
//
// xlelm: extreme learning machines realized through XL-MIMO fading channels
// Copyright (C) 2026 The xlelm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "xlelm/experiments/config.hpp"
#include "xlelm/experiments/report.hpp"
#include "xlelm/experiments/runner.hpp"

using namespace xlelm;
using namespace xlelm::experiments;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace
{

class TempDir
{
  public:
    TempDir()
    {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("xlelm_exp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path_ / name, std::ios::binary) << text;
        return path_ / name;
    }

  private:
    fs::path path_;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig synthetic_config(ExperimentKind kind)
{
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.seeds = 2;
    cfg.dataset.source = "synthetic";
    cfg.dataset.synth_rows = 120;
    return cfg;
}

ExperimentConfig wbcd_config(ExperimentKind kind)
{
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.dataset.source = "csv";
    cfg.dataset.path = fs::path(XLELM_SOURCE_DIR) / "data" / "wbcd.csv";
    cfg.dataset.csv.label_column = "diagnosis";
    return cfg;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + XLELM_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing")
{
    TempDir dir;
    dir.write("table.csv", "a,y\n1,0\n2,1\n");
    const auto cfg = parse_config(R"(
# WBCD style run
[experiment]
kind = sweep-kappa
master_seed = 7
seeds = 3
baseline = yes
out = out/res.csv

[dataset]
source = csv
path = table.csv
label_column = y
label_map = M:0, B:1
delimiter = tab
positive_label = 1
drop_columns = id, note

[channel]
n_r = 64
snr_db = inf

[activation]
y_sat = 2.0
alpha = 4

[sweep]
values = 0, 1, 10, 100

[online]
eta = 0.5, 0.99
early_stop = 1e-4
)",
                                  dir.path());
    CHECK(cfg.kind == ExperimentKind::sweep_kappa);
    CHECK(cfg.kind_declared);
    CHECK(cfg.master_seed == 7);
    CHECK(cfg.seeds == 3);
    CHECK(cfg.baseline);
    CHECK(cfg.out == dir.path() / "out/res.csv");
    CHECK(cfg.dataset.path == dir.path() / "table.csv");
    CHECK(cfg.dataset.csv.delimiter == '\t');
    CHECK(cfg.dataset.csv.label_map == std::map<std::string, int>{{"M", 0}, {"B", 1}});
    CHECK(cfg.dataset.positive_label == 1);
    CHECK(cfg.dataset.csv.drop_columns == std::vector<std::string>{"id", "note"});
    CHECK(cfg.resolved_n_r() == 64);
    CHECK(std::isinf(cfg.snr_db));
    CHECK(cfg.rapp.y_sat == 2.0);
    CHECK(cfg.rapp.alpha == 4);
    CHECK(cfg.grid == std::vector<double>{0, 1, 10, 100});
    CHECK(cfg.etas == std::vector<double>{0.5, 0.99});
    CHECK(cfg.early_stop_tol == 1e-4);
    CHECK(cfg.inputs == std::vector<fs::path>{dir.path() / "table.csv"});
    CHECK_NOTHROW(cfg.validate());

    const auto defaults = parse_config("");
    CHECK(defaults.seeds == 300);
    CHECK(defaults.gamma == 0.5);
    CHECK(defaults.batch_size == 32);
    CHECK_FALSE(defaults.kind_declared);
    ExperimentConfig online = defaults;
    online.kind = ExperimentKind::online;
    CHECK(online.resolved_n_r() == 1024);
    CHECK(defaults.resolved_n_r() == 256);
}

TEST_CASE("shipped configs parse")
{
    int parsed = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(XLELM_SOURCE_DIR) / "configs"))
    {
        if (entry.path().extension() != ".ini")
            continue;
        INFO(entry.path().string());
        const auto cfg = load_config(entry.path());
        CHECK(cfg.kind_declared);
        CHECK(cfg.out.parent_path().filename() == "results");
        // configs whose data ship with the repository validate as well
        bool available = true;
        for (const auto& f : cfg.dataset_files())
            available = available && fs::exists(f);
        if (available)
            CHECK_NOTHROW(cfg.validate());
        ++parsed;
    }
    CHECK(parsed >= 5);
}

TEST_CASE("config errors name the offending line")
{
    CHECK_THROWS_WITH(parse_config("[experiment]\nseeds = 3\nsede = 4\n"),
                      ContainsSubstring("line 3") && ContainsSubstring("sede"));
    CHECK_THROWS_WITH(parse_config("[experimnt]\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("[experiment]\nseeds = 3\nseeds = 4\n"),
                      ContainsSubstring("line 3") && ContainsSubstring("duplicate"));
    CHECK_THROWS_WITH(parse_config("seeds = 3\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("[experiment]\nseeds\n"), ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_config("[experiment\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("[channel]\n\nkappa = lots\n"), ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(parse_config("[experiment]\nseeds = -1\n"), ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_config("[experiment]\nbaseline = maybe\n"), ContainsSubstring("line 2"));
    CHECK_THROWS_AS(parse_config("[experiment]\nkind = sweep-everything\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[dataset]\nlabel_map = M=0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[dataset]\ndelimiter = ;;\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/xlelm.ini"), ConfigError);
}

TEST_CASE("config validation")
{
    auto cfg = synthetic_config(ExperimentKind::sweep_nr);
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("sweep.values"));
    cfg.grid = {64, 12.5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.grid = {64};
    CHECK_NOTHROW(cfg.validate());
    cfg.seeds = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.seeds = 1;
    cfg.rapp.alpha = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.rapp.alpha = 2;
    cfg.dataset.source = "csv";
    cfg.dataset.path = "/nonexistent/data.csv";
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("does not exist"));
    cfg.dataset.source = "idx";
    CHECK_THROWS_WITH(cfg.validate(), ContainsSubstring("labels_path"));

    auto online = synthetic_config(ExperimentKind::online);
    CHECK_NOTHROW(online.validate());
    online.etas = {0.0};
    CHECK_THROWS_AS(online.validate(), ConfigError);
    online.etas = {1.0};
    online.gamma = 1.0;
    CHECK_THROWS_AS(online.validate(), ConfigError);

    auto snr = synthetic_config(ExperimentKind::sweep_snr);
    snr.grid = {0, 10};
    const auto g = snr.effective_grid();
    CHECK(g.size() == 3);
    CHECK(std::isinf(g.back()));
}

TEST_CASE("sweep over N_r produces one row per trial and method")
{
    auto cfg = synthetic_config(ExperimentKind::sweep_nr);
    cfg.grid = {64};
    const RawTable source = load_source(cfg.dataset, cfg.master_seed);
    const auto rows = run_sweep_nr(cfg, source);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows)
    {
        CHECK(r.method == kXlMimoElm);
        CHECK(r.n_r == 64);
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
        CHECK(r.receive_power == Approx(r.receive_power));
    }
    CHECK(rows[0].seed == 0);
    CHECK(rows[1].seed == 1);

    cfg.baseline = true;
    const auto with_baseline = run_sweep_nr(cfg, source);
    REQUIRE(with_baseline.size() == 4);
    CHECK(with_baseline[1].method == kDigitalElm);
    auto xl_row = with_baseline[0];
    xl_row.wall_ms = rows[0].wall_ms;
    CHECK(xl_row == rows[0]);
}

TEST_CASE("grid points share the per-seed randomness")
{
    auto nr = wbcd_config(ExperimentKind::sweep_nr);
    nr.seeds = 3;
    nr.grid = {128};
    auto kappa = wbcd_config(ExperimentKind::sweep_kappa);
    kappa.seeds = 3;
    kappa.n_r = 128;
    kappa.grid = {0, 100};
    const RawTable source = load_source(nr.dataset, nr.master_seed);
    const auto a = run_sweep_nr(nr, source);
    const auto b = run_sweep_kappa(kappa, source);
    REQUIRE(b.size() == 6);
    for (std::size_t s = 0; s < 3; ++s)
    {
        CHECK(a[s].accuracy == b[s].accuracy);
        CHECK(a[s].train_residual == b[s].train_residual);
        CHECK(a[s].receive_power == b[s].receive_power);
        CHECK(b[3 + s].kappa == 100.0);
        CHECK(b[3 + s].accuracy >= 0.0);
        CHECK(b[3 + s].accuracy <= 1.0);
    }

    // +inf SNR is the noiseless run
    auto snr = wbcd_config(ExperimentKind::sweep_snr);
    snr.seeds = 3;
    snr.n_r = 128;
    snr.grid = {0};
    const auto c = run_sweep_snr(snr, source);
    REQUIRE(c.size() == 6);
    for (std::size_t s = 0; s < 3; ++s)
    {
        CHECK(std::isinf(c[3 + s].snr_db));
        CHECK(c[3 + s].accuracy == a[s].accuracy);
        CHECK(c[3 + s].receive_power == a[s].receive_power);
        CHECK(c[s].snr_db == 0.0);
    }
}

TEST_CASE("worker count does not change the results")
{
    auto cfg = synthetic_config(ExperimentKind::sweep_snr);
    cfg.seeds = 4;
    cfg.n_r = 32;
    cfg.grid = {0, 20};
    cfg.baseline = true;
    const RawTable source = load_source(cfg.dataset, cfg.master_seed);
    auto serial = run_sweep_snr(cfg, source);
    cfg.threads = 3;
    auto parallel = run_sweep_snr(cfg, source);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
    {
        serial[i].wall_ms = parallel[i].wall_ms = 0.0;
        CHECK(serial[i] == parallel[i]);
    }

    // a single seed re-run in isolation matches its slot in the sweep
    const auto isolated = experiments::detail::static_trial(cfg, source, 20.0, 2);
    CHECK(isolated[0].accuracy == serial[2 * (4 + 2)].accuracy);
}

TEST_CASE("online runs record a trace per step")
{
    auto cfg = wbcd_config(ExperimentKind::online);
    cfg.seeds = 4;
    cfg.etas = {1.0};
    cfg.steps = 2;
    cfg.iterations = 20;
    const RawTable source = load_source(cfg.dataset, cfg.master_seed);
    const auto rows = run_online(cfg, source);
    REQUIRE(rows.size() == 4 * (1 + 2 * 21));
    CHECK(rows[0].step == 0u);
    CHECK(rows[0].iteration == 0u);
    CHECK(rows[0].normalized_accuracy == 1.0);
    CHECK(rows[1].step == 1u);
    CHECK(rows[1].iteration == 0u);
    CHECK(rows[2].iteration == 1u);
    CHECK(rows[0].n_r == 1024);

    // a static channel keeps the normalized accuracy at one
    for (const auto& s : summarize(rows))
    {
        REQUIRE(s.mean_normalized_accuracy);
        INFO("step " << *s.step << " iteration " << *s.iteration);
        CHECK(*s.mean_normalized_accuracy == Approx(1.0).margin(0.02));
    }
}

TEST_CASE("summaries")
{
    TrialResult a;
    a.experiment = "sweep-nr";
    a.method = kXlMimoElm;
    a.grid_value = 64;
    a.accuracy = 0.8;
    a.receive_power = 2.0;
    const auto one = summarize({a});
    REQUIRE(one.size() == 1);
    CHECK(one[0].mean_accuracy == 0.8);
    CHECK(one[0].std_accuracy == 0.0);
    CHECK(one[0].trials == 1);

    TrialResult b = a;
    b.seed = 1;
    b.accuracy = 0.9;
    b.receive_power = 4.0;
    const auto two = summarize({a, b});
    REQUIRE(two.size() == 1);
    CHECK(two[0].mean_accuracy == Approx(0.85).epsilon(1e-15));
    CHECK(two[0].std_accuracy == Approx(0.05).epsilon(1e-12));
    CHECK(two[0].min_accuracy == 0.8);
    CHECK(two[0].max_accuracy == 0.9);
    CHECK(two[0].mean_receive_power == 3.0);
    CHECK_FALSE(two[0].mean_normalized_accuracy);

    ResultTable many;
    for (double g : {16.0, 32.0, 64.0})
        for (std::uint64_t s = 0; s < 300; ++s)
        {
            TrialResult r = a;
            r.grid_value = g;
            r.seed = s;
            many.push_back(r);
        }
    const auto grouped = summarize(many);
    REQUIRE(grouped.size() == 3);
    CHECK(grouped[0].grid_value == 16.0);
    CHECK(grouped[2].trials == 300);

    CHECK_THROWS_AS(summarize({}), InputError);
}

TEST_CASE("results CSV")
{
    TempDir dir;
    const auto empty = dir.path() / "empty.csv";
    emit_csv({}, empty);
    CHECK(slurp(empty) ==
          "experiment,method,seed,grid_value,n_r,kappa,snr_db,eta,step,iteration,accuracy,normalized_accuracy,"
          "train_residual,receive_power,wall_ms\n");
    CHECK(read_results_csv(empty).empty());

    TrialResult r;
    r.experiment = "online";
    r.method = kXlMimoElm;
    r.seed = 3;
    r.grid_value = 0.9;
    r.n_r = 1024;
    r.kappa = 0.1;
    r.eta = 0.9;
    r.step = 2;
    r.iteration = 7;
    r.accuracy = 0.9473684210526315;
    r.normalized_accuracy = 1.0 / 3.0;
    r.train_residual = 1.2345678901234567e-9;
    r.receive_power = 123.456;
    r.wall_ms = 0.125;
    TrialResult s;
    s.experiment = "sweep-snr";
    s.method = "name, \"quoted\"";
    s.snr_db = -3.5;
    s.accuracy = 0.5;
    const ResultTable table = {r, s};
    const auto path = dir.path() / "sub" / "res.csv";
    emit_csv(table, path, true);
    CHECK(read_results_csv(path) == table);

    emit_csv(table, path);
    const auto without_timing = read_results_csv(path);
    CHECK(without_timing[0].wall_ms == 0.0);
    CHECK(without_timing[0].accuracy == r.accuracy);

    CHECK(summary_path_for(path) == dir.path() / "sub" / "res.summary.csv");
    CHECK(manifest_path_for(path) == dir.path() / "sub" / "res.csv.manifest.json");
    CHECK_THROWS_AS(emit_csv(table, "/proc/xlelm/res.csv"), IoError);
    CHECK_THROWS_AS(read_results_csv(dir.write("bad.csv", "a,b\n")), DataError);
}

TEST_CASE("manifest records dataset checksums")
{
    TempDir dir;
    const auto data = dir.write("d.csv", "a,y\n1,0\n2,1\n");
    auto cfg = synthetic_config(ExperimentKind::single);
    cfg.dataset.source = "csv";
    cfg.dataset.path = data;
    cfg.dataset.csv.label_column = "y";
    const auto before = make_manifest(cfg, "r.csv", "r.summary.csv");
    CHECK(before["master_seed"] == 1);
    CHECK(before["config"]["channel"]["n_r"] == 256);
    CHECK(before["datasets"][0]["bytes"] == 12);
    // reference digest from coreutils sha256sum
    CHECK(before["datasets"][0]["sha256"] == "2e3781e3c32f67fc45f7b528a7c0d9a995a0f1956970d89c473fd199e7ce85f1");

    dir.write("d.csv", "a,y\n1,0\n3,1\n");
    const auto after = make_manifest(cfg, "r.csv", "r.summary.csv");
    CHECK(after["datasets"][0]["sha256"] != before["datasets"][0]["sha256"]);
    CHECK(after["datasets"][0]["bytes"] == 12);

    CHECK(file_sha256(dir.write("abc", "abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(file_sha256(dir.write("nothing", "")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("command line")
{
    TempDir dir;
    const auto cfg = dir.write("run.ini", "[experiment]\nseeds = 2\n[dataset]\nsource = synthetic\nsynth_rows = 60\n"
                                          "[sweep]\nvalues = 16, 32\n");
    const auto out = dir.path() / "res.csv";
    const std::string common = " --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"";
    REQUIRE(run_cli("sweep-nr" + common + " --baseline") == 0);
    const auto first = slurp(out);
    CHECK(read_results_csv(out).size() == 8);
    CHECK(fs::exists(summary_path_for(out)));
    CHECK(fs::exists(manifest_path_for(out)));
    REQUIRE(run_cli("sweep-nr" + common + " --baseline --threads 2") == 0);
    CHECK(slurp(out) == first);
    REQUIRE(run_cli("sweep-nr" + common + " --baseline --seed 9") == 0);
    CHECK(slurp(out) != first);

    CHECK(run_cli("sweep-nr --config \"" + (dir.path() / "missing.ini").string() + "\"") == 1);
    CHECK(run_cli("sweep-nr") == 1);
    CHECK(run_cli("frobnicate --config x") == 1);
    CHECK(run_cli("sweep-kappa" + common + " --seeds 0") == 1);
    CHECK(run_cli("sweep-snr" + common + " --threads x") == 1);
    const auto typo = dir.write("typo.ini", "[experiment]\nsedes = 2\n");
    CHECK(run_cli("single --config \"" + typo.string() + "\"") == 1);
    const auto declared = dir.write("declared.ini", "[experiment]\nkind = online\n");
    CHECK(run_cli("single --config \"" + declared.string() + "\"") == 1);

    dir.write("bad.csv", "a,y\n1,0\nfoo,1\n");
    const auto bad = dir.write("bad.ini", "[experiment]\nseeds = 1\n[dataset]\nsource = csv\npath = bad.csv\n"
                                          "label_column = y\n");
    CHECK(run_cli("single --config \"" + bad.string() + "\"") == 2);
}

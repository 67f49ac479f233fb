#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unistd.h>

#include "rtme/error.hpp"
#include "rtme/harness.hpp"
#include "rtme/io.hpp"
#include "rtme/matfun.hpp"

using namespace rtme;
namespace fs = std::filesystem;

namespace {

ExperimentSpec small_spec(bool covariates) {
    ExperimentSpec spec;
    spec.sim.states = 3;
    spec.sim.with_covariates = covariates;
    spec.sim.window = 20;
    spec.sim.gap_means = default_gap_means(3);
    spec.sim.base = default_transition_matrix(3);
    spec.sim.psi = PsiSpec{0.0, {3.0}, {{0.8, 1.2}}};

    spec.estimator.states = 3;
    spec.estimator.kernel = KernelSpec{KernelKind::gaussian};
    spec.estimator.schedule = BandwidthSchedule{1.0, 0.2, 0.0, 0.2236};
    spec.estimator.lag_lo = 6;
    spec.estimator.lag_hi = 20;
    spec.estimator.max_gap = 40;
    spec.estimator.reg = RegMode::weighted;
    if (covariates) {
        spec.estimator.grid = {{{1.5}, {1}}, {{1.5}, {0}}};
    } else {
        spec.estimator.grid = {CovariatePoint{}};
        spec.estimator.schedule = BandwidthSchedule{};
    }
    spec.n_values = {200, 400};
    spec.replications = 3;
    spec.seed = 2026;
    spec.threads = 2;
    return spec;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rtme_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

}  // namespace

TEST_CASE("run_experiment is deterministic and ordered") {
    ExperimentSpec spec = small_spec(false);
    std::vector<ErrorRecord> a = run_experiment(spec);
    std::vector<ErrorRecord> b = run_experiment(spec);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == static_cast<std::size_t>(spec.replications) * spec.n_values.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].replication == b[i].replication);
        CHECK(a[i].n == b[i].n);
        CHECK(a[i].failed == b[i].failed);
        if (!a[i].failed) CHECK(a[i].spectral_error == b[i].spectral_error);
    }
    // Ordered by (replication, n index, grid index).
    for (std::size_t i = 1; i < a.size(); ++i) {
        const bool ordered = a[i - 1].replication < a[i].replication ||
                             (a[i - 1].replication == a[i].replication && a[i - 1].n <= a[i].n);
        CHECK(ordered);
    }
}

TEST_CASE("thread count does not change the records") {
    ExperimentSpec spec = small_spec(true);
    spec.replications = 2;
    spec.threads = 1;
    std::vector<ErrorRecord> serial = run_experiment(spec);
    spec.threads = 4;
    std::vector<ErrorRecord> parallel = run_experiment(spec);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].grid_index == parallel[i].grid_index);
        if (!serial[i].failed)
            CHECK(serial[i].spectral_error == parallel[i].spectral_error);
    }
}

TEST_CASE("failure accounting: successes plus failures equals replications") {
    ExperimentSpec spec = small_spec(true);
    spec.replications = 4;
    std::vector<ErrorRecord> records = run_experiment(spec);
    std::vector<SummaryCell> cells = summarize(records);
    for (const SummaryCell& cell : cells)
        CHECK(cell.successes + cell.failures == static_cast<std::size_t>(spec.replications));
}

TEST_CASE("injected truth gives zero spectral error") {
    ExperimentSpec spec = small_spec(true);
    spec.replications = 1;
    spec.n_values = {100};
    auto inject = [](const ExperimentSpec& s, int, std::int64_t,
                     std::size_t g) -> std::optional<StochasticMatrix> {
        return experiment_truth(s, s.estimator.grid[g]);
    };
    for (const ErrorRecord& rec : run_experiment(spec, inject)) {
        CHECK_FALSE(rec.failed);
        CHECK(rec.spectral_error < 1e-12);
    }
}

TEST_CASE("summarize: single record and the {1,2,3} quartile convention") {
    ErrorRecord r;
    r.replication = 0;
    r.n = 10;
    r.grid_index = 0;
    r.spectral_error = 0.25;
    std::vector<SummaryCell> single = summarize({r});
    CHECK(single.size() == 1);
    CHECK(single[0].median == 0.25);

    std::vector<ErrorRecord> three;
    for (int i = 1; i <= 3; ++i) {
        ErrorRecord rec;
        rec.replication = i;
        rec.n = 10;
        rec.grid_index = 0;
        rec.spectral_error = static_cast<double>(i);
        three.push_back(rec);
    }
    std::vector<SummaryCell> cells = summarize(three);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].median == 2.0);
    CHECK(cells[0].q1 == 1.5);
    CHECK(cells[0].q3 == 2.5);
    CHECK(cells[0].log10_median == doctest::Approx(std::log10(2.0)));
}

TEST_CASE("summary row count is |n_values| x |grid|") {
    ExperimentSpec spec = small_spec(true);
    std::vector<SummaryCell> cells = summarize(run_experiment(spec));
    CHECK(cells.size() == spec.n_values.size() * spec.estimator.grid.size());
}

TEST_CASE("matrix JSON round trip") {
    SquareMatrix m = default_transition_matrix(5).matrix();
    SquareMatrix back = io::matrix_from_json(io::matrix_to_json(m));
    CHECK(back == m);  // exact double round trip
}

TEST_CASE("dataset JSONL round trip and line diagnostics") {
    TempDir tmp;
    SimConfig cfg;
    cfg.states = 3;
    cfg.with_covariates = true;
    cfg.paths = 25;
    cfg.window = 20;
    cfg.gap_means = default_gap_means(3);
    cfg.base = default_transition_matrix(3);
    cfg.psi = PsiSpec{0.0, {3.0}, {{0.8, 1.2}}};
    cfg.seed = 4;
    std::vector<SamplePath> paths = simulate_paths(cfg);

    const fs::path file = tmp.path / "data.jsonl";
    io::write_dataset(file, paths);
    std::vector<SamplePath> back = io::read_dataset(file);
    REQUIRE(back.size() == paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        CHECK(back[i].path_id == paths[i].path_id);
        CHECK(back[i].covariates == paths[i].covariates);
        CHECK(back[i].initial_state == paths[i].initial_state);
        REQUIRE(back[i].events.size() == paths[i].events.size());
    }

    io::write_text_file(file, "{\"path_id\":1,\"y0\":1,\"events\":[[3,2]]}\nnot json\n");
    try {
        io::read_dataset(file);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);  // line number
    }
}

TEST_CASE("checkpoint save/load restores the bank exactly") {
    TempDir tmp;
    EstimatorConfig cfg;
    cfg.states = 3;
    cfg.kernel = KernelSpec{KernelKind::gaussian};
    cfg.schedule = BandwidthSchedule{1.0, 0.2, 0.0, 0.2236};
    cfg.grid = {{{1.5}, {1}}, {{1.7}, {0}}};

    AccumulatorBank bank = make_bank(cfg);
    SimConfig sim;
    sim.states = 3;
    sim.with_covariates = true;
    sim.paths = 40;
    sim.window = 20;
    sim.gap_means = default_gap_means(3);
    sim.base = default_transition_matrix(3);
    sim.psi = PsiSpec{0.0, {3.0}, {{0.8, 1.2}}};
    sim.seed = 10;
    for (const SamplePath& p : simulate_paths(sim)) bank.absorb(p);

    const fs::path file = tmp.path / "bank.json";
    io::save_checkpoint(file, cfg, bank);
    auto [cfg2, bank2] = io::load_checkpoint(file);
    CHECK(bank2.u_t == bank.u_t);
    CHECK(bank2.u_b == bank.u_b);
    CHECK(bank2.n_paths == bank.n_paths);
    CHECK(bank2.omega_sum == bank.omega_sum);
    CHECK(cfg2.lag_lo == cfg.lag_lo);
    CHECK(bank2.schedule == bank.schedule);
}

TEST_CASE("checkpoint version gate") {
    TempDir tmp;
    const fs::path file = tmp.path / "bad.json";
    io::write_text_file(file, "{\"format\":\"rtme-bank\",\"format_version\":99}\n");
    try {
        io::load_checkpoint(file);
        FAIL("expected VersionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == "VersionMismatch");
    }
}

TEST_CASE("grid string parsing") {
    std::vector<CovariatePoint> grid = io::grid_from_string("1.5@1;1.7@0");
    REQUIRE(grid.size() == 2);
    CHECK(grid[0] == CovariatePoint{{1.5}, {1}});
    CHECK(grid[1] == CovariatePoint{{1.7}, {0}});
    CHECK(io::grid_from_string("unconditional").front().unconditional());
    std::vector<CovariatePoint> multi = io::grid_from_string("1.5,2.5@1,0");
    CHECK(multi.front().continuous == std::vector<double>{1.5, 2.5});
    CHECK(multi.front().discrete == std::vector<int>{1, 0});
}

TEST_CASE("estimator config defaults mirror the reference design") {
    io::json j = io::parse_config_text(R"({
        "states": 3,
        "grid": [{"z_c": [1.5], "z_d": [1]}]  // one conditional point
    })");
    EstimatorConfig cfg = io::estimator_config_from_json(j);
    CHECK(cfg.kernel.kind == KernelKind::gaussian);
    CHECK(cfg.schedule.alpha == doctest::Approx(0.2));  // 1/(p+4), p = 1
    CHECK(cfg.schedule.beta == 0.0);
    CHECK(cfg.lag_lo == 6);
    CHECK(cfg.lag_hi == 20);
    CHECK(cfg.reg == RegMode::weighted);
    CHECK(cfg.sigma_from_data);
}

TEST_CASE("config errors name the field") {
    try {
        io::estimator_config_from_json(io::parse_config_text("{\"grid\": \"unconditional\"}"));
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("states") != std::string::npos);
    }
    try {
        io::sim_config_from_json(io::parse_config_text("{\"states\": 3}"));
        FAIL("expected InvalidConfig");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("base_matrix") != std::string::npos);
    }
}

TEST_CASE("digest is stable and content-sensitive") {
    const std::string text = "{\"states\": 3}";
    CHECK(io::fnv1a64_hex(text) == io::fnv1a64_hex(text));
    CHECK(io::fnv1a64_hex(text) != io::fnv1a64_hex(text + " "));
}

TEST_CASE("manifest lines append deterministically") {
    TempDir tmp;
    const fs::path file = tmp.path / "m.jsonl";
    io::append_manifest(file, "simulate", "fnv1a64:00", 7, {"a"}, {"b"});
    io::append_manifest(file, "simulate", "fnv1a64:00", 7, {"a"}, {"b"});
    const std::string text = io::read_text_file(file);
    const auto first_newline = text.find('\n');
    const std::string line1 = text.substr(0, first_newline);
    const std::string line2 = text.substr(first_newline + 1, text.size() - first_newline - 2);
    CHECK(line1 == line2);
    CHECK(line1.find("\"command\":\"simulate\"") != std::string::npos);
}

TEST_CASE("experiment csv has the documented columns") {
    ExperimentSpec spec = small_spec(false);
    spec.replications = 1;
    spec.n_values = {100};
    std::vector<ErrorRecord> records = run_experiment(spec);
    const std::string csv = io::experiment_csv(records);
    CHECK(csv.rfind("replication,N,z_c,z_d,error_spec,failed,regularized_lags,wall_ms\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one record
}

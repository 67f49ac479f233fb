#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rtme.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rtme_capi_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string file(const char* name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

const char* kSimConfig = R"({
    "states": 3,
    "with_covariates": true,
    "paths": 120,
    "window": 20,
    "base_matrix": "default",
    "seed": 91
})";

const char* kEstConfig = R"({
    "states": 3,
    "kernel": "gaussian",
    "bandwidth": {"c": 1.0, "alpha": 0.2, "beta": 0.0, "sigma_scale": 0.2236},
    "lags": [6, 20],
    "max_gap": 40,
    "regularization": "weighted",
    "grid": [{"z_c": [1.5], "z_d": [1]}]
})";

}  // namespace

TEST_CASE("version string is exposed") {
    CHECK(std::strcmp(rtme_version(), "0.1.0") == 0);
}

TEST_CASE("matrix functions round trip through the C surface") {
    // 2x2 generator; exp then log must return it.
    const double g[4] = {-0.3, 0.3, 0.6, -0.6};
    double e[4], back[4];
    REQUIRE(rtme_mat_exp(g, 2, e) == RTME_OK);
    REQUIRE(rtme_mat_log_principal(e, 2, back) == RTME_OK);
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(back[i] - g[i]) < 1e-10);

    double merc[4];
    REQUIRE(rtme_mercator_log(e, 2, 80, merc) == RTME_OK);
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(merc[i] - g[i]) < 1e-8);

    double norm = 0.0;
    REQUIRE(rtme_spectral_norm(e, 2, &norm) == RTME_OK);
    CHECK(norm > 0.9);
}

TEST_CASE("spectrum and diagnostics through the C surface") {
    const double a[4] = {0.9, 0.1, 0.2, 0.8};
    double re[2], im[2], min_mod = 0.0, dist = 0.0;
    REQUIRE(rtme_spectrum(a, 2, re, im, &min_mod, &dist) == RTME_OK);
    CHECK(std::fabs(re[0] - 0.7) < 1e-12);
    CHECK(std::fabs(re[1] - 1.0) < 1e-12);
    CHECK(std::fabs(dist - 0.7) < 1e-10);

    int32_t flag = -1;
    REQUIRE(rtme_is_m_matrix_inverse(a, 2, &flag) == RTME_OK);
    CHECK(flag == 1);
    REQUIRE(rtme_generator_uniqueness(a, 2, &flag) == RTME_OK);
    CHECK(flag == 1);
}

TEST_CASE("error codes map the error classes") {
    const double perm[4] = {0.0, 1.0, 1.0, 0.0};
    double out[4];
    CHECK(rtme_mat_log_principal(perm, 2, out) == RTME_ERR_NUMERIC);
    CHECK(std::string(rtme_last_error()).find("NegativeEigenvalue") != std::string::npos);

    CHECK(rtme_mat_exp(nullptr, 2, out) == RTME_ERR_ARG);

    rtme_bank* bank = nullptr;
    CHECK(rtme_bank_create("{\"states\": 3}", &bank) == RTME_ERR_CONFIG);  // missing grid
    CHECK(std::string(rtme_last_error()).find("grid") != std::string::npos);

    CHECK(rtme_bank_load("/nonexistent/bank.json", &bank) == RTME_ERR_DATA);
}

TEST_CASE("regularize and transition_from_power through the C surface") {
    const double b[9] = {-0.5, 0.6, -0.1, 0.2, -0.3, 0.1, 0.0, 0.4, -0.4};
    double out[9];
    REQUIRE(rtme_regularize_generator(b, 3, "diagonal", out) == RTME_OK);
    CHECK(out[0] == doctest::Approx(-0.6));
    CHECK(out[2] == 0.0);

    // exact power of the 2x2 chain: recover it with no regularization flag
    const double p2[4] = {0.83, 0.17, 0.34, 0.66};  // [[0.9,0.1],[0.2,0.8]]^2
    double one_step[4], gen[4];
    int32_t regularized = -1;
    REQUIRE(rtme_transition_from_power(p2, 2, 2, "weighted", one_step, gen, &regularized) ==
            RTME_OK);
    CHECK(regularized == 0);
    CHECK(std::fabs(one_step[0] - 0.9) < 1e-10);
    CHECK(std::fabs(one_step[3] - 0.8) < 1e-10);
}

TEST_CASE("bank lifecycle: create, absorb, merge, save, load, estimate") {
    TempDir tmp;
    const std::string sim_cfg = tmp.file("sim.json");
    const std::string data = tmp.file("data.jsonl");
    write_file(sim_cfg, kSimConfig);
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), data.c_str(), nullptr) == RTME_OK);

    rtme_bank* whole = nullptr;
    REQUIRE(rtme_bank_create(kEstConfig, &whole) == RTME_OK);
    REQUIRE(rtme_bank_absorb_file(whole, data.c_str()) == RTME_OK);
    int64_t n = 0;
    REQUIRE(rtme_bank_n_paths(whole, &n) == RTME_OK);
    CHECK(n == 120);

    // one path at a time via JSON lines
    rtme_bank* lines = nullptr;
    REQUIRE(rtme_bank_create(kEstConfig, &lines) == RTME_OK);
    {
        std::ifstream in(data);
        std::string line;
        while (std::getline(in, line))
            REQUIRE(rtme_bank_absorb_path_json(lines, line.c_str()) == RTME_OK);
    }

    const std::string ckpt = tmp.file("bank.json");
    REQUIRE(rtme_bank_save(whole, ckpt.c_str()) == RTME_OK);
    rtme_bank* loaded = nullptr;
    REQUIRE(rtme_bank_load(ckpt.c_str(), &loaded) == RTME_OK);

    char* a = nullptr;
    char* b = nullptr;
    char* c = nullptr;
    REQUIRE(rtme_bank_estimate_json(whole, 0, 0, &a) == RTME_OK);
    REQUIRE(rtme_bank_estimate_json(lines, 0, 0, &b) == RTME_OK);
    REQUIRE(rtme_bank_estimate_json(loaded, 0, 0, &c) == RTME_OK);
    CHECK(std::string(a) == std::string(b));
    CHECK(std::string(a) == std::string(c));
    rtme_string_free(a);
    rtme_string_free(b);
    rtme_string_free(c);
    rtme_bank_free(whole);
    rtme_bank_free(lines);
    rtme_bank_free(loaded);
}

TEST_CASE("simulate twice is byte-identical; estimate and update commands work") {
    TempDir tmp;
    const std::string sim_cfg = tmp.file("sim.json");
    const std::string est_cfg = tmp.file("est.json");
    write_file(sim_cfg, kSimConfig);
    write_file(est_cfg, kEstConfig);

    const std::string d1 = tmp.file("d1.jsonl");
    const std::string d2 = tmp.file("d2.jsonl");
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), d1.c_str(), nullptr) == RTME_OK);
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), d2.c_str(), nullptr) == RTME_OK);
    CHECK(slurp(d1) == slurp(d2));

    // seed override changes the bytes
    const std::string d3 = tmp.file("d3.jsonl");
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), d3.c_str(), "{\"seed\": 17}") == RTME_OK);
    CHECK(slurp(d1) != slurp(d3));

    const std::string est_out = tmp.file("est.json.out");
    REQUIRE(rtme_estimate_run(d1.c_str(), est_cfg.c_str(), nullptr, est_out.c_str(), nullptr,
                              nullptr) == RTME_OK);
    CHECK(slurp(est_out).find("aggregated") != std::string::npos);

    // update from scratch, then continue: equals one-shot ingestion
    const std::string ck1 = tmp.file("ck1.json");
    const std::string ck2 = tmp.file("ck2.json");
    REQUIRE(rtme_update_run(nullptr, est_cfg.c_str(), d1.c_str(), ck1.c_str(), nullptr) == RTME_OK);
    REQUIRE(rtme_update_run(ck1.c_str(), nullptr, d3.c_str(), ck2.c_str(), nullptr) == RTME_OK);

    rtme_bank* merged = nullptr;
    REQUIRE(rtme_bank_load(ck2.c_str(), &merged) == RTME_OK);
    int64_t n = 0;
    rtme_bank_n_paths(merged, &n);
    CHECK(n == 240);
    rtme_bank_free(merged);
}

TEST_CASE("strict mode turns warnings into a data error") {
    TempDir tmp;
    const std::string est_cfg = tmp.file("est.json");
    write_file(est_cfg, kEstConfig);
    const std::string empty = tmp.file("empty.jsonl");
    write_file(empty, "");

    const std::string out = tmp.file("out.json");
    CHECK(rtme_estimate_run(empty.c_str(), est_cfg.c_str(), nullptr, out.c_str(), nullptr,
                            nullptr) == RTME_OK);
    CHECK(std::string(rtme_last_warnings()).find("empty") != std::string::npos);

    CHECK(rtme_estimate_run(empty.c_str(), est_cfg.c_str(), nullptr, out.c_str(), nullptr,
                            "{\"strict\": true}") == RTME_ERR_DATA);
}

TEST_CASE("lag override restricts the aggregation range") {
    TempDir tmp;
    const std::string sim_cfg = tmp.file("sim.json");
    const std::string est_cfg = tmp.file("est.json");
    write_file(sim_cfg, kSimConfig);
    write_file(est_cfg, kEstConfig);
    const std::string data = tmp.file("d.jsonl");
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), data.c_str(), nullptr) == RTME_OK);

    const std::string out = tmp.file("out.json");
    REQUIRE(rtme_estimate_run(data.c_str(), est_cfg.c_str(), nullptr, out.c_str(), nullptr,
                              "{\"lags\": [8, 12]}") == RTME_OK);
    const std::string text = slurp(out);
    CHECK(text.find("\"lags\": [\n    8,\n    12\n  ]") != std::string::npos);
    CHECK(text.find("\"lag_lo\": 8") != std::string::npos);
}

TEST_CASE("update with an empty dataset leaves the bank unchanged") {
    TempDir tmp;
    const std::string sim_cfg = tmp.file("sim.json");
    const std::string est_cfg = tmp.file("est.json");
    write_file(sim_cfg, kSimConfig);
    write_file(est_cfg, kEstConfig);
    const std::string data = tmp.file("d.jsonl");
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), data.c_str(), nullptr) == RTME_OK);
    const std::string ck1 = tmp.file("ck1.json");
    REQUIRE(rtme_update_run(nullptr, est_cfg.c_str(), data.c_str(), ck1.c_str(), nullptr) ==
            RTME_OK);

    const std::string empty = tmp.file("empty.jsonl");
    write_file(empty, "");
    const std::string ck2 = tmp.file("ck2.json");
    REQUIRE(rtme_update_run(ck1.c_str(), nullptr, empty.c_str(), ck2.c_str(), nullptr) == RTME_OK);
    CHECK(slurp(ck1) == slurp(ck2));
}

TEST_CASE("malformed simulation config is a config error naming the field") {
    TempDir tmp;
    const std::string bad = tmp.file("bad.json");
    write_file(bad, R"({"states": 3, "base_matrix": "default", "paths": 5,
                        "gap_means": [10, -1, 15]})");
    CHECK(rtme_simulate_run(bad.c_str(), tmp.file("x.jsonl").c_str(), nullptr) ==
          RTME_ERR_CONFIG);
    CHECK(std::string(rtme_last_error()).find("gap_means") != std::string::npos);
}

TEST_CASE("update with a mismatched schedule is rejected") {
    TempDir tmp;
    const std::string sim_cfg = tmp.file("sim.json");
    const std::string est_cfg = tmp.file("est.json");
    write_file(sim_cfg, kSimConfig);
    write_file(est_cfg, kEstConfig);
    const std::string data = tmp.file("d.jsonl");
    REQUIRE(rtme_simulate_run(sim_cfg.c_str(), data.c_str(), nullptr) == RTME_OK);
    const std::string ckpt = tmp.file("ck.json");
    REQUIRE(rtme_update_run(nullptr, est_cfg.c_str(), data.c_str(), ckpt.c_str(), nullptr) ==
            RTME_OK);

    const std::string other_cfg = tmp.file("other.json");
    write_file(other_cfg, R"({
        "states": 3,
        "bandwidth": {"c": 1.0, "alpha": 0.25, "beta": 0.0, "sigma_scale": 0.2236},
        "grid": [{"z_c": [1.5], "z_d": [1]}]
    })");
    const std::string ck2 = tmp.file("ck2.json");
    CHECK(rtme_update_run(ckpt.c_str(), other_cfg.c_str(), data.c_str(), ck2.c_str(), nullptr) ==
          RTME_ERR_DATA);
    CHECK(std::string(rtme_last_error()).find("ScheduleMismatch") != std::string::npos);
}

TEST_CASE("experiment command writes results, summary and manifest") {
    TempDir tmp;
    const std::string spec = tmp.file("exp.json");
    write_file(spec, R"({
        "sim": {"states": 3, "with_covariates": false, "window": 20, "base_matrix": "default"},
        "estimator": {"states": 3, "grid": "unconditional", "lags": [6, 20]},
        "n_values": [150],
        "replications": 2,
        "seed": 5,
        "threads": 2
    })");
    const std::string out_dir = tmp.file("results");
    char* table = nullptr;
    REQUIRE(rtme_experiment_run(spec.c_str(), out_dir.c_str(), nullptr, &table) == RTME_OK);
    REQUIRE(table != nullptr);
    CHECK(std::string(table).find("150") != std::string::npos);
    rtme_string_free(table);
    CHECK(fs::exists(fs::path(out_dir) / "results.csv"));
    CHECK(fs::exists(fs::path(out_dir) / "summary.json"));
    CHECK(fs::exists(fs::path(out_dir) / "manifest.jsonl"));
}

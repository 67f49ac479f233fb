// Command-line front end for the rtme shared library. Parsing happens here;
// all work goes through the C API in rtme.h.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "rtme.h"

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::int64_t seed = -1;
    std::string lags;
    std::string grid;
    bool strict = false;
    int threads = 0;
};

std::string overrides_json(const CommonFlags& f) {
    std::string j = "{";
    bool first = true;
    auto add = [&](const std::string& piece) {
        if (!first) j += ',';
        j += piece;
        first = false;
    };
    if (f.seed >= 0) add("\"seed\":" + std::to_string(f.seed));
    if (!f.lags.empty()) {
        const auto colon = f.lags.find(':');
        if (colon == std::string::npos) {
            std::fprintf(stderr, "error: --lags expects LO:HI\n");
            std::exit(1);
        }
        add("\"lags\":[" + f.lags.substr(0, colon) + "," + f.lags.substr(colon + 1) + "]");
    }
    if (!f.grid.empty()) {
        std::string escaped;
        for (char c : f.grid) {
            if (c == '"' || c == '\\') escaped += '\\';
            escaped += c;
        }
        add("\"grid\":\"" + escaped + "\"");
    }
    if (f.strict) add("\"strict\":true");
    if (f.threads > 0) add("\"threads\":" + std::to_string(f.threads));
    j += "}";
    return j;
}

int finish(rtme_status status) {
    const char* warnings = rtme_last_warnings();
    if (warnings && *warnings) std::fprintf(stderr, "warning:\n%s", warnings);
    if (status != RTME_OK) {
        std::fprintf(stderr, "error: %s\n", rtme_last_error());
        // Exit-code policy: 1 usage/config, 2 data, 3 numeric.
        if (status == RTME_ERR_ARG) return 1;
        return static_cast<int>(status);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("rtme ") + rtme_version() +
                 " — transition-matrix estimation from randomly observed Markov chain paths"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string data, checkpoint, checkpoint_out;

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic JSONL dataset");
    sim->add_option("--config", flags.config, "Simulation config (JSON)")->required();
    sim->add_option("--out", flags.out, "Output dataset path (JSONL)")->required();
    sim->add_option("--seed", flags.seed, "Override the config seed");

    auto* est = app.add_subcommand("estimate", "Estimate transition matrices at grid points");
    est->add_option("--config", flags.config, "Estimator config (JSON)");
    est->add_option("--data", data, "Input dataset (JSONL)");
    est->add_option("--checkpoint", checkpoint, "Estimate from a saved checkpoint instead");
    est->add_option("--out", flags.out, "Output estimates path (JSON)")->required();
    est->add_option("--checkpoint-out", checkpoint_out, "Also save the accumulator state");
    est->add_option("--lags", flags.lags, "Aggregation gap range LO:HI");
    est->add_option("--grid", flags.grid,
                    "Evaluation grid: 'unconditional' or 'zc@zd;zc@zd' points");
    est->add_flag("--strict", flags.strict, "Treat warnings (e.g. no usable gap) as errors");

    auto* upd = app.add_subcommand("update", "Absorb a dataset into a checkpoint");
    upd->add_option("--checkpoint", checkpoint, "Existing checkpoint to continue");
    upd->add_option("--config", flags.config, "Estimator config (fresh start, or consistency check)");
    upd->add_option("--data", data, "Dataset to absorb (JSONL)")->required();
    upd->add_option("--out", flags.out, "Updated checkpoint path")->required();
    upd->add_option("--grid", flags.grid, "Evaluation grid for a fresh start");

    auto* exp = app.add_subcommand("experiment", "Run a replicated simulation experiment");
    exp->add_option("--config", flags.config, "Experiment spec (JSON)")->required();
    exp->add_option("--out", flags.out, "Output directory")->required();
    exp->add_option("--seed", flags.seed, "Override the spec seed");
    exp->add_option("--threads", flags.threads, "Worker threads for replications");
    exp->add_option("--lags", flags.lags, "Aggregation gap range LO:HI");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1, help exits 0
    }
    const std::string overrides = overrides_json(flags);

    if (sim->parsed())
        return finish(rtme_simulate_run(flags.config.c_str(), flags.out.c_str(), overrides.c_str()));

    if (est->parsed()) {
        return finish(rtme_estimate_run(data.empty() ? nullptr : data.c_str(),
                                        flags.config.empty() ? nullptr : flags.config.c_str(),
                                        checkpoint.empty() ? nullptr : checkpoint.c_str(),
                                        flags.out.c_str(),
                                        checkpoint_out.empty() ? nullptr : checkpoint_out.c_str(),
                                        overrides.c_str()));
    }

    if (upd->parsed()) {
        return finish(rtme_update_run(checkpoint.empty() ? nullptr : checkpoint.c_str(),
                                      flags.config.empty() ? nullptr : flags.config.c_str(),
                                      data.c_str(), flags.out.c_str(), overrides.c_str()));
    }

    if (exp->parsed()) {
        char* table = nullptr;
        const rtme_status status =
            rtme_experiment_run(flags.config.c_str(), flags.out.c_str(), overrides.c_str(), &table);
        if (status == RTME_OK && table) std::fputs(table, stdout);
        rtme_string_free(table);
        return finish(status);
    }
    return 1;
}

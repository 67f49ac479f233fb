#include "rtme/commands.hpp"

#include "rtme/error.hpp"
#include "rtme/harness.hpp"
#include "rtme/io.hpp"

namespace rtme {

namespace {

namespace fs = std::filesystem;
using io::json;

json section(const json& j, const char* key) {
    return j.contains(key) ? j.at(key) : j;
}

fs::path manifest_path(const fs::path& out) { return out.string() + ".manifest.jsonl"; }

void check_schedule_match(const EstimatorConfig& ckpt, const EstimatorConfig& cfg) {
    const bool schedule_ok = ckpt.schedule.c == cfg.schedule.c &&
                             ckpt.schedule.alpha == cfg.schedule.alpha &&
                             ckpt.schedule.beta == cfg.schedule.beta &&
                             (cfg.sigma_from_data ||
                              ckpt.schedule.sigma_scale == cfg.schedule.sigma_scale);
    if (!schedule_ok || !(ckpt.kernel == cfg.kernel) || ckpt.states != cfg.states ||
        ckpt.max_gap != cfg.max_gap || !(ckpt.grid == cfg.grid))
        throw data_error("ScheduleMismatch",
                         "checkpoint and config disagree on schedule, kernel, grid or dimensions");
}

void apply_lag_override(EstimatorConfig& cfg, const CommandOverrides& overrides) {
    if (!overrides.lags) return;
    cfg.lag_lo = overrides.lags->first;
    cfg.lag_hi = overrides.lags->second;
    if (cfg.max_gap < cfg.lag_hi) cfg.max_gap = cfg.lag_hi;
    if (cfg.lag_lo < 1 || cfg.lag_hi < cfg.lag_lo)
        throw config_error("InvalidConfig", "lags must satisfy 1 <= lo <= hi");
}

}  // namespace

CommandOverrides overrides_from_json_text(const std::string& text) {
    CommandOverrides o;
    if (text.empty()) return o;
    const json j = io::parse_config_text(text);
    if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("lags")) {
        const json& lags = j.at("lags");
        if (!lags.is_array() || lags.size() != 2)
            throw config_error("InvalidConfig", "overrides.lags must be [lo, hi]");
        o.lags = std::make_pair(lags.at(0).get<int>(), lags.at(1).get<int>());
    }
    if (j.contains("grid")) o.grid = j.at("grid").get<std::string>();
    o.strict = j.value("strict", false);
    if (j.contains("threads")) o.threads = j.at("threads").get<int>();
    return o;
}

void cmd_simulate(const fs::path& config_file, const fs::path& out_file,
                  const CommandOverrides& overrides) {
    const json cfg_json = io::load_config_file(config_file);
    SimConfig cfg = io::sim_config_from_json(section(cfg_json, "sim"));
    if (overrides.seed) cfg.seed = *overrides.seed;
    cfg.validate();

    std::vector<SamplePath> paths = simulate_paths(cfg);
    io::write_dataset(out_file, paths);
    io::append_manifest(manifest_path(out_file), "simulate", io::file_digest(config_file), cfg.seed,
                        {config_file.string()}, {out_file.string()});
}

std::vector<std::string> cmd_estimate(const std::optional<fs::path>& dataset_file,
                                      const std::optional<fs::path>& config_file,
                                      const std::optional<fs::path>& checkpoint_in,
                                      const fs::path& out_file,
                                      const std::optional<fs::path>& checkpoint_out,
                                      const CommandOverrides& overrides) {
    EstimatorConfig cfg;
    std::optional<AccumulatorBank> bank;
    std::vector<std::string> warnings;
    std::vector<std::string> inputs;

    if (checkpoint_in) {
        auto [ckpt_cfg, ckpt_bank] = io::load_checkpoint(*checkpoint_in);
        if (overrides.grid)
            throw config_error("InvalidConfig",
                               "the grid is fixed by the checkpoint and cannot be overridden");
        if (dataset_file)
            throw config_error("InvalidConfig",
                               "estimate reads either a dataset or a checkpoint; use update to absorb data");
        cfg = ckpt_cfg;
        bank = std::move(ckpt_bank);
        inputs.push_back(checkpoint_in->string());
    } else {
        if (!config_file || !dataset_file)
            throw config_error("InvalidConfig", "estimate needs --config and --data (or --checkpoint)");
        cfg = io::estimator_config_from_json(section(io::load_config_file(*config_file), "estimator"));
        if (overrides.grid) cfg.grid = io::grid_from_string(*overrides.grid);
        std::vector<SamplePath> paths = io::read_dataset(*dataset_file);
        if (paths.empty()) {
            warnings.push_back("dataset is empty; every grid point is flagged");
            cfg.sigma_from_data = false;
        } else {
            cfg = resolve_sigma(cfg, paths);
        }
        bank.emplace(make_bank(cfg));
        for (const SamplePath& p : paths) bank->absorb(p);
        inputs.push_back(dataset_file->string());
        inputs.push_back(config_file->string());
    }
    apply_lag_override(cfg, overrides);
    if (cfg.lag_hi > bank->max_gap)
        throw config_error("InvalidConfig",
                           "lag window exceeds the gap range tracked by the accumulator");

    json grid_out = json::array();
    for (std::size_t g = 0; g < bank->grid.size(); ++g) {
        EstimateResult res = estimate_point(*bank, g, cfg.lag_lo, cfg.lag_hi, cfg.reg);
        for (const std::string& w : res.warnings)
            warnings.push_back("grid point " + std::to_string(g) + ": " + w);
        grid_out.push_back(io::estimate_result_to_json(res));
    }

    json out{{"tool_version", io::kToolVersion},
             {"lags", json::array({cfg.lag_lo, cfg.lag_hi})},
             {"n_paths", bank->n_paths},
             {"skipped_transitions", bank->skipped_transitions},
             {"grid", std::move(grid_out)},
             {"warnings", warnings}};
    io::write_text_file(out_file, out.dump(2) + "\n");

    std::vector<std::string> outputs{out_file.string()};
    if (checkpoint_out) {
        io::save_checkpoint(*checkpoint_out, cfg, *bank);
        outputs.push_back(checkpoint_out->string());
    }
    const std::string digest =
        config_file ? io::file_digest(*config_file) : io::file_digest(*checkpoint_in);
    io::append_manifest(manifest_path(out_file), "estimate", digest, 0, inputs, outputs);
    return warnings;
}

void cmd_update(const std::optional<fs::path>& checkpoint_in,
                const std::optional<fs::path>& config_file, const fs::path& dataset_file,
                const fs::path& checkpoint_out, const CommandOverrides& overrides) {
    std::vector<SamplePath> paths = io::read_dataset(dataset_file);

    EstimatorConfig cfg;
    std::optional<AccumulatorBank> bank;
    std::vector<std::string> inputs{dataset_file.string()};

    if (checkpoint_in) {
        auto [ckpt_cfg, ckpt_bank] = io::load_checkpoint(*checkpoint_in);
        if (config_file) {
            EstimatorConfig session =
                io::estimator_config_from_json(section(io::load_config_file(*config_file), "estimator"));
            check_schedule_match(ckpt_cfg, session);
        }
        cfg = ckpt_cfg;
        bank = std::move(ckpt_bank);
        inputs.push_back(checkpoint_in->string());
    } else {
        if (!config_file)
            throw config_error("InvalidConfig", "update needs --checkpoint or --config to start from");
        cfg = io::estimator_config_from_json(section(io::load_config_file(*config_file), "estimator"));
        if (overrides.grid) cfg.grid = io::grid_from_string(*overrides.grid);
        if (cfg.sigma_from_data) {
            if (paths.empty())
                throw data_error("EmptyRange",
                                 "cannot resolve the bandwidth scale from an empty initial dataset");
            cfg = resolve_sigma(cfg, paths);
        }
        bank.emplace(make_bank(cfg));
        inputs.push_back(config_file->string());
    }

    for (const SamplePath& p : paths) bank->absorb(p);
    io::save_checkpoint(checkpoint_out, cfg, *bank);

    const std::string digest = checkpoint_in ? io::file_digest(*checkpoint_in)
                                             : io::file_digest(*config_file);
    io::append_manifest(manifest_path(checkpoint_out), "update", digest, 0, inputs,
                        {checkpoint_out.string()});
}

std::string cmd_experiment(const fs::path& spec_file, const fs::path& out_dir,
                           const CommandOverrides& overrides) {
    ExperimentSpec spec = io::experiment_spec_from_json(io::load_config_file(spec_file));
    if (overrides.seed) spec.seed = *overrides.seed;
    if (overrides.threads) spec.threads = *overrides.threads;
    if (overrides.lags) {
        spec.estimator.lag_lo = overrides.lags->first;
        spec.estimator.lag_hi = overrides.lags->second;
        if (spec.estimator.max_gap < spec.estimator.lag_hi)
            spec.estimator.max_gap = spec.estimator.lag_hi;
    }
    if (overrides.grid) spec.estimator.grid = io::grid_from_string(*overrides.grid);

    std::vector<ErrorRecord> records = run_experiment(spec);
    std::vector<SummaryCell> cells = summarize(records);

    std::filesystem::create_directories(out_dir);
    io::write_text_file(out_dir / "results.csv", io::experiment_csv(records));
    io::write_text_file(out_dir / "summary.json", io::summary_to_json(cells).dump(2) + "\n");
    io::append_manifest(out_dir / "manifest.jsonl", "experiment", io::file_digest(spec_file),
                        spec.seed, {spec_file.string()},
                        {(out_dir / "results.csv").string(), (out_dir / "summary.json").string()});
    return io::summary_table(cells);
}

}  // namespace rtme

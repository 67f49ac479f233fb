#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rtme {

/// Flag-level overrides shared by all commands; every field is optional and
/// falls back to the config file.
struct CommandOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::pair<int, int>> lags;
    std::optional<std::string> grid;  // CLI grid syntax
    bool strict = false;
    std::optional<int> threads;
};

CommandOverrides overrides_from_json_text(const std::string& text);

/// Writes a JSONL dataset and appends a manifest line. Byte-identical for
/// identical config + seed.
void cmd_simulate(const std::filesystem::path& config_file, const std::filesystem::path& out_file,
                  const CommandOverrides& overrides);

/// Estimates at every grid point from a dataset (config mode) or from a
/// saved checkpoint. Returns the per-grid-point warnings; with strict set,
/// callers should treat nonempty warnings as a data failure.
std::vector<std::string> cmd_estimate(const std::optional<std::filesystem::path>& dataset_file,
                                      const std::optional<std::filesystem::path>& config_file,
                                      const std::optional<std::filesystem::path>& checkpoint_in,
                                      const std::filesystem::path& out_file,
                                      const std::optional<std::filesystem::path>& checkpoint_out,
                                      const CommandOverrides& overrides);

/// Absorbs a dataset into a checkpoint (continuing its path-index sequence)
/// or into a fresh bank built from a config. When both a checkpoint and a
/// config are given, their schedules must agree.
void cmd_update(const std::optional<std::filesystem::path>& checkpoint_in,
                const std::optional<std::filesystem::path>& config_file,
                const std::filesystem::path& dataset_file,
                const std::filesystem::path& checkpoint_out, const CommandOverrides& overrides);

/// Runs a replicated experiment; writes results.csv and summary.json under
/// out_dir (created if missing) and returns the printable summary table.
std::string cmd_experiment(const std::filesystem::path& spec_file,
                           const std::filesystem::path& out_dir,
                           const CommandOverrides& overrides);

}  // namespace rtme

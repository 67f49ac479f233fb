#include "rtme/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rtme/error.hpp"

namespace rtme::io {

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string join_semicolon(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ';';
        out += fmt_double(xs[i]);
    }
    return out;
}

std::string join_semicolon(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(xs[i]);
    }
    return out;
}

const json& require_field(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw config_error("InvalidConfig",
                           std::string(where) + ": missing required field '" + key + "'");
    return *it;
}

double require_number(const json& j, const char* key, const char* where) {
    const json& v = require_field(j, key, where);
    if (!v.is_number())
        throw config_error("InvalidConfig", std::string(where) + ": field '" + key +
                                                "' must be a number");
    return v.get<double>();
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

json matrix_to_json(const SquareMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return json{{"dim", m.dim()}, {"rows", std::move(rows)}};
}

SquareMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("rows"))
        throw config_error("InvalidConfig", "matrix: expected {\"dim\": S, \"rows\": [[...]]}");
    const int dim = j.at("dim").get<int>();
    const json& rows = j.at("rows");
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
        throw config_error("InvalidConfig", "matrix: row count does not match dim");
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(dim) * dim);
    for (const json& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw config_error("InvalidConfig", "matrix: each row must have dim entries");
        for (const json& v : row) entries.push_back(v.get<double>());
    }
    return SquareMatrix(dim, std::move(entries));
}

json point_to_json(const CovariatePoint& z) {
    return json{{"z_c", z.continuous}, {"z_d", z.discrete}};
}

CovariatePoint point_from_json(const json& j) {
    CovariatePoint z;
    if (j.contains("z_c")) z.continuous = j.at("z_c").get<std::vector<double>>();
    if (j.contains("z_d")) z.discrete = j.at("z_d").get<std::vector<int>>();
    return z;
}

json path_to_json(const SamplePath& p) {
    json events = json::array();
    for (const Transition& t : p.events) events.push_back(json::array({t.gap, t.state}));
    return json{{"path_id", p.path_id},
                {"z_c", p.covariates.continuous},
                {"z_d", p.covariates.discrete},
                {"y0", p.initial_state},
                {"events", std::move(events)}};
}

SamplePath path_from_json(const json& j) {
    SamplePath p;
    p.path_id = require_field(j, "path_id", "path").get<std::int64_t>();
    p.covariates = point_from_json(j);
    p.initial_state = require_field(j, "y0", "path").get<int>();
    const json& events = require_field(j, "events", "path");
    if (!events.is_array())
        throw data_error("ParseError", "path: 'events' must be an array of [gap, state] pairs");
    for (const json& e : events) {
        if (!e.is_array() || e.size() != 2)
            throw data_error("ParseError", "path: each event must be a [gap, state] pair");
        p.events.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    }
    return p;
}

void write_dataset(const std::filesystem::path& file, const std::vector<SamplePath>& paths) {
    std::ofstream out(file);
    if (!out) throw data_error("FileError", "cannot open '" + file.string() + "' for writing");
    for (const SamplePath& p : paths) out << path_to_json(p).dump() << '\n';
    if (!out) throw data_error("FileError", "failed writing '" + file.string() + "'");
}

std::vector<SamplePath> read_dataset(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw data_error("FileError", "cannot open dataset '" + file.string() + "'");
    std::vector<SamplePath> paths;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            paths.push_back(path_from_json(json::parse(line)));
        } catch (const Error& e) {
            throw data_error("ParseError",
                             file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
            throw data_error("ParseError",
                             file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return paths;
}

json parse_config_text(const std::string& text) {
    try {
        return json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw config_error("ParseError", e.what());
    }
}

json load_config_file(const std::filesystem::path& file) {
    return parse_config_text(read_text_file(file));
}

std::vector<CovariatePoint> grid_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "unconditional") return {CovariatePoint{}};
        throw config_error("InvalidConfig", "grid: unknown marker '" + j.get<std::string>() + "'");
    }
    if (!j.is_array() || j.empty())
        throw config_error("InvalidConfig", "grid: expected \"unconditional\" or a nonempty list");
    std::vector<CovariatePoint> grid;
    for (const json& p : j) grid.push_back(point_from_json(p));
    return grid;
}

std::vector<CovariatePoint> grid_from_string(const std::string& text) {
    if (text == "unconditional") return {CovariatePoint{}};
    std::vector<CovariatePoint> grid;
    for (const std::string& part : split(text, ';')) {
        if (part.empty()) continue;
        CovariatePoint z;
        const auto at = part.find('@');
        const std::string zc = part.substr(0, at);
        const std::string zd = at == std::string::npos ? "" : part.substr(at + 1);
        if (!zc.empty())
            for (const std::string& v : split(zc, ',')) z.continuous.push_back(std::stod(v));
        if (!zd.empty())
            for (const std::string& v : split(zd, ',')) z.discrete.push_back(std::stoi(v));
        grid.push_back(std::move(z));
    }
    if (grid.empty()) throw config_error("InvalidConfig", "grid: no points parsed from '" + text + "'");
    return grid;
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig cfg;
    cfg.states = static_cast<int>(require_number(j, "states", "sim"));
    cfg.with_covariates = j.value("with_covariates", false);
    cfg.paths = j.contains("paths") ? j.at("paths").get<std::int64_t>() : 0;
    cfg.window = static_cast<int>(j.value("window", 20.0));
    cfg.seed = j.value("seed", std::uint64_t{0});

    if (j.contains("gap_means")) {
        cfg.gap_means = j.at("gap_means").get<std::vector<double>>();
    } else {
        cfg.gap_means = default_gap_means(cfg.states);
    }

    if (j.contains("covariates")) {
        const json& c = j.at("covariates");
        cfg.covariate_law.shift = c.value("shift", 1.0);
        cfg.covariate_law.beta_a = c.value("beta_a", 2);
        cfg.covariate_law.beta_b = c.value("beta_b", 2);
        cfg.covariate_law.bernoulli_q = c.value("bernoulli_q", 0.7);
    }

    const json& base = require_field(j, "base_matrix", "sim");
    if (base.is_string()) {
        const std::string name = base.get<std::string>();
        if (name == "default")
            cfg.base = default_transition_matrix(cfg.states);
        else
            throw config_error("InvalidConfig", "sim.base_matrix: unknown name '" + name + "'");
    } else {
        cfg.base = validate_stochastic(matrix_from_json(base), 1e-6);
    }

    if (j.contains("psi")) {
        const json& p = j.at("psi");
        cfg.psi.intercept = p.value("intercept", 0.0);
        if (p.contains("zc_coeffs"))
            cfg.psi.continuous_coeffs = p.at("zc_coeffs").get<std::vector<double>>();
        if (p.contains("zd_factors"))
            cfg.psi.discrete_factors = p.at("zd_factors").get<std::vector<std::vector<double>>>();
    } else if (cfg.with_covariates) {
        // The built-in design: psi(z) = 3 z_c (1.2 z_d + 0.8 (1 - z_d)).
        cfg.psi.intercept = 0.0;
        cfg.psi.continuous_coeffs = {3.0};
        cfg.psi.discrete_factors = {{0.8, 1.2}};
    }
    return cfg;
}

EstimatorConfig estimator_config_from_json(const json& j) {
    EstimatorConfig cfg;
    cfg.states = static_cast<int>(require_number(j, "states", "estimator"));
    cfg.kernel = KernelSpec::parse(j.value("kernel", std::string("gaussian")));
    cfg.grid = grid_from_json(require_field(j, "grid", "estimator"));
    const std::size_t p = cfg.grid.front().continuous.size();

    if (j.contains("lags")) {
        const json& lags = j.at("lags");
        if (!lags.is_array() || lags.size() != 2)
            throw config_error("InvalidConfig", "estimator.lags must be [lo, hi]");
        cfg.lag_lo = lags.at(0).get<int>();
        cfg.lag_hi = lags.at(1).get<int>();
    }
    cfg.max_gap = static_cast<int>(j.value("max_gap", 0.0));
    if (cfg.max_gap == 0) cfg.max_gap = std::max(40, cfg.lag_hi);
    cfg.reg = reg_mode_parse(j.value("regularization", std::string("weighted")));

    if (j.contains("bandwidth")) {
        const json& b = j.at("bandwidth");
        cfg.schedule.c = b.value("c", 1.0);
        cfg.schedule.alpha =
            b.value("alpha", p >= 1 ? 1.0 / (static_cast<double>(p) + 4.0) : 0.2);
        cfg.schedule.beta = b.value("beta", 0.0);
        if (b.contains("sigma_scale") && !b.at("sigma_scale").is_null()) {
            cfg.schedule.sigma_scale = b.at("sigma_scale").get<double>();
        } else {
            cfg.sigma_from_data = p >= 1;
        }
    } else {
        cfg.schedule.alpha = p >= 1 ? 1.0 / (static_cast<double>(p) + 4.0) : 0.2;
        cfg.sigma_from_data = p >= 1;
    }
    cfg.schedule.validate(p);
    return cfg;
}

ExperimentSpec experiment_spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.sim = sim_config_from_json(require_field(j, "sim", "experiment"));
    spec.estimator = estimator_config_from_json(require_field(j, "estimator", "experiment"));
    spec.n_values = require_field(j, "n_values", "experiment").get<std::vector<std::int64_t>>();
    spec.replications = static_cast<int>(require_number(j, "replications", "experiment"));
    spec.seed = j.value("seed", spec.sim.seed);
    spec.threads = static_cast<int>(j.value("threads", 1.0));
    return spec;
}

json checkpoint_to_json(const EstimatorConfig& cfg, const AccumulatorBank& bank) {
    if (cfg.sigma_from_data)
        throw config_error("InvalidConfig", "cannot checkpoint an unresolved bandwidth scale");
    json grid = json::array();
    for (const CovariatePoint& z : bank.grid) grid.push_back(point_to_json(z));
    return json{{"format", "rtme-bank"},
                {"format_version", kCheckpointVersion},
                {"tool_version", kToolVersion},
                {"states", bank.states},
                {"max_gap", bank.max_gap},
                {"kernel", bank.kernel.name()},
                {"bandwidth",
                 {{"c", bank.schedule.c},
                  {"alpha", bank.schedule.alpha},
                  {"beta", bank.schedule.beta},
                  {"sigma_scale", bank.schedule.sigma_scale}}},
                {"lags", json::array({cfg.lag_lo, cfg.lag_hi})},
                {"regularization", reg_mode_name(cfg.reg)},
                {"grid", std::move(grid)},
                {"first_path_index", bank.first_path_index},
                {"n_paths", bank.n_paths},
                {"omega_sum", bank.omega_sum},
                {"skipped_transitions", bank.skipped_transitions},
                {"u_t", bank.u_t},
                {"u_b", bank.u_b}};
}

std::pair<EstimatorConfig, AccumulatorBank> checkpoint_from_json(const json& j) {
    if (j.value("format", std::string()) != "rtme-bank")
        throw data_error("VersionMismatch", "not a bank checkpoint file");
    if (j.value("format_version", -1) != kCheckpointVersion)
        throw data_error("VersionMismatch",
                         "unsupported checkpoint version " + std::to_string(j.value("format_version", -1)));

    EstimatorConfig cfg;
    cfg.states = j.at("states").get<int>();
    cfg.max_gap = j.at("max_gap").get<int>();
    cfg.kernel = KernelSpec::parse(j.at("kernel").get<std::string>());
    const json& b = j.at("bandwidth");
    cfg.schedule.c = b.at("c").get<double>();
    cfg.schedule.alpha = b.at("alpha").get<double>();
    cfg.schedule.beta = b.at("beta").get<double>();
    cfg.schedule.sigma_scale = b.at("sigma_scale").get<double>();
    cfg.lag_lo = j.at("lags").at(0).get<int>();
    cfg.lag_hi = j.at("lags").at(1).get<int>();
    cfg.reg = reg_mode_parse(j.at("regularization").get<std::string>());
    cfg.grid = grid_from_json(j.at("grid"));

    AccumulatorBank bank = make_bank(cfg);
    bank.first_path_index = j.value("first_path_index", std::uint64_t{1});
    bank.n_paths = j.at("n_paths").get<std::uint64_t>();
    bank.omega_sum = j.at("omega_sum").get<double>();
    bank.skipped_transitions = j.at("skipped_transitions").get<std::uint64_t>();
    const auto u_t = j.at("u_t").get<std::vector<double>>();
    const auto u_b = j.at("u_b").get<std::vector<double>>();
    if (u_t.size() != bank.u_t.size() || u_b.size() != bank.u_b.size())
        throw data_error("VersionMismatch", "checkpoint accumulator sizes are inconsistent");
    bank.u_t = u_t;
    bank.u_b = u_b;
    return {cfg, std::move(bank)};
}

void save_checkpoint(const std::filesystem::path& file, const EstimatorConfig& cfg,
                     const AccumulatorBank& bank) {
    write_text_file(file, checkpoint_to_json(cfg, bank).dump() + "\n");
}

std::pair<EstimatorConfig, AccumulatorBank> load_checkpoint(const std::filesystem::path& file) {
    try {
        return checkpoint_from_json(parse_config_text(read_text_file(file)));
    } catch (const json::exception& e) {
        throw data_error("ParseError", file.string() + ": " + e.what());
    }
}

json estimate_result_to_json(const EstimateResult& result) {
    json lags = json::array();
    for (const LagReport& lag : result.lags) {
        json jl{{"gap", lag.gap},
                {"weight", lag.weight},
                {"weight_raw", lag.weight_raw},
                {"no_data", lag.no_data},
                {"log_failed", lag.log_failed},
                {"regularized", lag.regularized}};
        if (!lag.rows_missing.empty()) {
            json rm = json::array();
            for (auto f : lag.rows_missing) rm.push_back(static_cast<bool>(f));
            jl["rows_missing"] = std::move(rm);
        }
        if (lag.power) jl["a_hat"] = matrix_to_json(lag.power->matrix());
        if (lag.generator) jl["generator"] = matrix_to_json(lag.generator->matrix());
        if (lag.one_step) jl["p_hat"] = matrix_to_json(lag.one_step->matrix());
        lags.push_back(std::move(jl));
    }
    json out{{"point", point_to_json(result.point)},
             {"lags", std::move(lags)},
             {"lag_lo", result.lag_lo},
             {"lag_hi", result.lag_hi},
             {"warnings", result.warnings}};
    out["aggregated"] =
        result.aggregated ? matrix_to_json(result.aggregated->matrix()) : json(nullptr);
    return out;
}

std::string experiment_csv(const std::vector<ErrorRecord>& records) {
    std::string out = "replication,N,z_c,z_d,error_spec,failed,regularized_lags,wall_ms\n";
    for (const ErrorRecord& rec : records) {
        out += std::to_string(rec.replication) + ',' + std::to_string(rec.n) + ',' +
               join_semicolon(rec.point.continuous) + ',' + join_semicolon(rec.point.discrete) +
               ',' + fmt_double(rec.spectral_error) + ',' + (rec.failed ? "1" : "0") + ',' +
               std::to_string(rec.regularized_lags) + ',' + fmt_double(rec.wall_ms) + '\n';
    }
    return out;
}

json summary_to_json(const std::vector<SummaryCell>& cells) {
    json rows = json::array();
    for (const SummaryCell& cell : cells) {
        rows.push_back(json{{"n", cell.n},
                            {"grid_index", cell.grid_index},
                            {"point", point_to_json(cell.point)},
                            {"successes", cell.successes},
                            {"failures", cell.failures},
                            {"failure_rate", cell.failure_rate},
                            {"median", cell.median},
                            {"q1", cell.q1},
                            {"q3", cell.q3},
                            {"log10_median", cell.log10_median}});
    }
    return json{{"tool_version", kToolVersion}, {"cells", std::move(rows)}};
}

std::string summary_table(const std::vector<SummaryCell>& cells) {
    std::ostringstream os;
    os << "        N  point                 median        q1        q3   fail\n";
    for (const SummaryCell& cell : cells) {
        std::string point = join_semicolon(cell.point.continuous);
        if (!cell.point.discrete.empty()) point += "@" + join_semicolon(cell.point.discrete);
        if (point.empty()) point = "(unconditional)";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%9lld  %-18s %9.5f %9.5f %9.5f  %5.2f\n",
                      static_cast<long long>(cell.n), point.c_str(), cell.median, cell.q1, cell.q3,
                      cell.failure_rate);
        os << buf;
    }
    return os.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string file_digest(const std::filesystem::path& file) {
    return "fnv1a64:" + fnv1a64_hex(read_text_file(file));
}

void append_manifest(const std::filesystem::path& manifest_file, const std::string& command,
                     const std::string& config_digest, std::uint64_t seed,
                     const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs) {
    json line{{"command", command}, {"config_digest", config_digest}, {"seed", seed},
              {"inputs", inputs},  {"outputs", outputs},              {"tool_version", kToolVersion}};
    std::ofstream out(manifest_file, std::ios::app);
    if (!out)
        throw data_error("FileError", "cannot open manifest '" + manifest_file.string() + "'");
    out << line.dump() << '\n';
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw data_error("FileError", "cannot open '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw data_error("FileError", "cannot open '" + file.string() + "' for writing");
    out << text;
    if (!out) throw data_error("FileError", "failed writing '" + file.string() + "'");
}

}  // namespace rtme::io

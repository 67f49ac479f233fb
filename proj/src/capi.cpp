#include "rtme.h"

#include <cstring>
#include <new>
#include <string>

#include "rtme/commands.hpp"
#include "rtme/config.hpp"
#include "rtme/error.hpp"
#include "rtme/io.hpp"
#include "rtme/matfun.hpp"

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_warnings;

rtme_status status_of(const rtme::Error& e) {
    switch (e.error_class()) {
        case rtme::ErrClass::config:
            return RTME_ERR_CONFIG;
        case rtme::ErrClass::data:
            return RTME_ERR_DATA;
        case rtme::ErrClass::numeric:
            return RTME_ERR_NUMERIC;
        case rtme::ErrClass::argument:
            return RTME_ERR_ARG;
    }
    return RTME_ERR_NUMERIC;
}

template <typename Fn>
rtme_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const rtme::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return RTME_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RTME_ERR_NUMERIC;
    }
}

rtme_status fail_arg(const char* msg) {
    g_last_error = msg;
    return RTME_ERR_ARG;
}

rtme::SquareMatrix matrix_from_flat(const double* a, int32_t dim) {
    return rtme::SquareMatrix(dim, std::vector<double>(a, a + static_cast<std::size_t>(dim) * dim));
}

void matrix_to_flat(const rtme::SquareMatrix& m, double* out) {
    std::memcpy(out, m.data().data(), m.data().size() * sizeof(double));
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::optional<std::filesystem::path> opt_path(const char* p) {
    if (p == nullptr || *p == '\0') return std::nullopt;
    return std::filesystem::path(p);
}

}  // namespace

struct rtme_bank {
    rtme::EstimatorConfig cfg;
    rtme::AccumulatorBank bank;
};

extern "C" {

const char* rtme_version(void) { return rtme::io::kToolVersion; }
const char* rtme_last_error(void) { return g_last_error.c_str(); }
const char* rtme_last_warnings(void) { return g_last_warnings.c_str(); }
void rtme_string_free(char* s) { delete[] s; }

rtme_status rtme_mat_exp(const double* a, int32_t dim, double* out) {
    if (!a || !out || dim < 2) return fail_arg("mat_exp: null array or dim < 2");
    return guarded([&] {
        matrix_to_flat(rtme::mat_exp(matrix_from_flat(a, dim)), out);
        return RTME_OK;
    });
}

rtme_status rtme_mat_log_principal(const double* a, int32_t dim, double* out) {
    if (!a || !out || dim < 2) return fail_arg("mat_log_principal: null array or dim < 2");
    return guarded([&] {
        matrix_to_flat(rtme::mat_log_principal(matrix_from_flat(a, dim)), out);
        return RTME_OK;
    });
}

rtme_status rtme_mercator_log(const double* a, int32_t dim, int32_t terms, double* out) {
    if (!a || !out || dim < 2) return fail_arg("mercator_log: null array or dim < 2");
    return guarded([&] {
        matrix_to_flat(rtme::mercator_log(matrix_from_flat(a, dim), terms), out);
        return RTME_OK;
    });
}

rtme_status rtme_spectrum(const double* a, int32_t dim, double* eig_re, double* eig_im,
                          double* min_modulus, double* dist_to_neg_axis) {
    if (!a || dim < 2) return fail_arg("spectrum: null array or dim < 2");
    return guarded([&] {
        const rtme::Spectrum s = rtme::spectrum(matrix_from_flat(a, dim));
        for (int32_t i = 0; i < dim; ++i) {
            if (eig_re) eig_re[i] = s.eigenvalues[static_cast<std::size_t>(i)].real();
            if (eig_im) eig_im[i] = s.eigenvalues[static_cast<std::size_t>(i)].imag();
        }
        if (min_modulus) *min_modulus = s.min_modulus;
        if (dist_to_neg_axis) *dist_to_neg_axis = s.dist_to_neg_axis;
        return RTME_OK;
    });
}

rtme_status rtme_is_m_matrix_inverse(const double* p, int32_t dim, int32_t* result) {
    if (!p || !result || dim < 2) return fail_arg("is_m_matrix_inverse: null array or dim < 2");
    return guarded([&] {
        *result = rtme::is_m_matrix_inverse(matrix_from_flat(p, dim)) ? 1 : 0;
        return RTME_OK;
    });
}

rtme_status rtme_generator_uniqueness(const double* p, int32_t dim, int32_t* unique_flag) {
    if (!p || !unique_flag || dim < 2)
        return fail_arg("generator_uniqueness: null array or dim < 2");
    return guarded([&] {
        *unique_flag = rtme::generator_uniqueness_check(matrix_from_flat(p, dim)) ==
                               rtme::GeneratorUniqueness::unique
                           ? 1
                           : 0;
        return RTME_OK;
    });
}

rtme_status rtme_regularize_generator(const double* b, int32_t dim, const char* mode, double* out) {
    if (!b || !out || !mode || dim < 2)
        return fail_arg("regularize_generator: null argument or dim < 2");
    return guarded([&] {
        const rtme::RegMode m = rtme::reg_mode_parse(mode);
        matrix_to_flat(rtme::regularize_generator(matrix_from_flat(b, dim), m).matrix(), out);
        return RTME_OK;
    });
}

rtme_status rtme_transition_from_power(const double* a, int32_t dim, int32_t ell, const char* mode,
                                       double* p_out, double* gen_out, int32_t* regularized) {
    if (!a || !p_out || !mode || dim < 2)
        return fail_arg("transition_from_power: null argument or dim < 2");
    return guarded([&] {
        const rtme::RegMode m = rtme::reg_mode_parse(mode);
        const rtme::StochasticMatrix sm =
            rtme::validate_stochastic(matrix_from_flat(a, dim), 1e-9);
        const rtme::LagEstimate est = rtme::transition_from_power(sm, ell, m);
        matrix_to_flat(est.one_step.matrix(), p_out);
        if (gen_out) matrix_to_flat(est.generator.matrix(), gen_out);
        if (regularized) *regularized = est.regularized ? 1 : 0;
        return RTME_OK;
    });
}

rtme_status rtme_spectral_norm(const double* a, int32_t dim, double* out) {
    if (!a || !out || dim < 2) return fail_arg("spectral_norm: null array or dim < 2");
    return guarded([&] {
        *out = rtme::spectral_norm(matrix_from_flat(a, dim));
        return RTME_OK;
    });
}

rtme_status rtme_bank_create(const char* estimator_config_json, rtme_bank** out) {
    if (!estimator_config_json || !out) return fail_arg("bank_create: null argument");
    return guarded([&] {
        const auto j = rtme::io::parse_config_text(estimator_config_json);
        rtme::EstimatorConfig cfg = rtme::io::estimator_config_from_json(
            j.contains("estimator") ? j.at("estimator") : j);
        if (cfg.sigma_from_data)
            throw rtme::config_error("InvalidConfig",
                                     "bank_create needs an explicit bandwidth.sigma_scale");
        *out = new rtme_bank{cfg, rtme::make_bank(cfg)};
        return RTME_OK;
    });
}

void rtme_bank_free(rtme_bank* bank) { delete bank; }

rtme_status rtme_bank_absorb_file(rtme_bank* bank, const char* dataset_path) {
    if (!bank || !dataset_path) return fail_arg("bank_absorb_file: null argument");
    return guarded([&] {
        for (const rtme::SamplePath& p : rtme::io::read_dataset(dataset_path)) bank->bank.absorb(p);
        return RTME_OK;
    });
}

rtme_status rtme_bank_absorb_path_json(rtme_bank* bank, const char* path_json) {
    if (!bank || !path_json) return fail_arg("bank_absorb_path_json: null argument");
    return guarded([&] {
        bank->bank.absorb(rtme::io::path_from_json(rtme::io::parse_config_text(path_json)));
        return RTME_OK;
    });
}

rtme_status rtme_bank_merge(rtme_bank* dst, const rtme_bank* src) {
    if (!dst || !src) return fail_arg("bank_merge: null argument");
    return guarded([&] {
        dst->bank.merge(src->bank);
        return RTME_OK;
    });
}

rtme_status rtme_bank_save(const rtme_bank* bank, const char* checkpoint_path) {
    if (!bank || !checkpoint_path) return fail_arg("bank_save: null argument");
    return guarded([&] {
        rtme::io::save_checkpoint(checkpoint_path, bank->cfg, bank->bank);
        return RTME_OK;
    });
}

rtme_status rtme_bank_load(const char* checkpoint_path, rtme_bank** out) {
    if (!checkpoint_path || !out) return fail_arg("bank_load: null argument");
    return guarded([&] {
        auto [cfg, loaded] = rtme::io::load_checkpoint(checkpoint_path);
        *out = new rtme_bank{cfg, std::move(loaded)};
        return RTME_OK;
    });
}

rtme_status rtme_bank_n_paths(const rtme_bank* bank, int64_t* out) {
    if (!bank || !out) return fail_arg("bank_n_paths: null argument");
    *out = static_cast<int64_t>(bank->bank.n_paths);
    return RTME_OK;
}

rtme_status rtme_bank_estimate_json(const rtme_bank* bank, int32_t lag_lo, int32_t lag_hi,
                                    char** json_out) {
    if (!bank || !json_out) return fail_arg("bank_estimate_json: null argument");
    return guarded([&] {
        const int lo = lag_lo > 0 ? lag_lo : bank->cfg.lag_lo;
        const int hi = lag_hi > 0 ? lag_hi : bank->cfg.lag_hi;
        rtme::io::json grid = rtme::io::json::array();
        for (std::size_t g = 0; g < bank->bank.grid.size(); ++g) {
            grid.push_back(rtme::io::estimate_result_to_json(
                rtme::estimate_point(bank->bank, g, lo, hi, bank->cfg.reg)));
        }
        rtme::io::json out{{"tool_version", rtme::io::kToolVersion},
                           {"lags", rtme::io::json::array({lo, hi})},
                           {"n_paths", bank->bank.n_paths},
                           {"grid", std::move(grid)}};
        *json_out = dup_string(out.dump());
        return RTME_OK;
    });
}

rtme_status rtme_simulate_run(const char* config_path, const char* out_path,
                              const char* overrides_json) {
    if (!config_path || !out_path) return fail_arg("simulate_run: null path");
    return guarded([&] {
        rtme::cmd_simulate(config_path, out_path,
                           rtme::overrides_from_json_text(overrides_json ? overrides_json : ""));
        return RTME_OK;
    });
}

rtme_status rtme_estimate_run(const char* dataset_path, const char* config_path,
                              const char* checkpoint_in, const char* out_path,
                              const char* checkpoint_out, const char* overrides_json) {
    if (!out_path) return fail_arg("estimate_run: null output path");
    return guarded([&] {
        const rtme::CommandOverrides overrides =
            rtme::overrides_from_json_text(overrides_json ? overrides_json : "");
        const std::vector<std::string> warnings =
            rtme::cmd_estimate(opt_path(dataset_path), opt_path(config_path),
                               opt_path(checkpoint_in), out_path, opt_path(checkpoint_out),
                               overrides);
        g_last_warnings.clear();
        for (const std::string& w : warnings) {
            g_last_warnings += w;
            g_last_warnings += '\n';
        }
        if (overrides.strict && !warnings.empty()) {
            g_last_error = "strict mode: estimation produced warnings";
            return RTME_ERR_DATA;
        }
        return RTME_OK;
    });
}

rtme_status rtme_update_run(const char* checkpoint_in, const char* config_path,
                            const char* dataset_path, const char* checkpoint_out,
                            const char* overrides_json) {
    if (!dataset_path || !checkpoint_out) return fail_arg("update_run: null path");
    return guarded([&] {
        rtme::cmd_update(opt_path(checkpoint_in), opt_path(config_path), dataset_path,
                         checkpoint_out,
                         rtme::overrides_from_json_text(overrides_json ? overrides_json : ""));
        return RTME_OK;
    });
}

rtme_status rtme_experiment_run(const char* spec_path, const char* out_dir,
                                const char* overrides_json, char** summary_table_out) {
    if (!spec_path || !out_dir) return fail_arg("experiment_run: null path");
    return guarded([&] {
        const std::string table = rtme::cmd_experiment(
            spec_path, out_dir, rtme::overrides_from_json_text(overrides_json ? overrides_json : ""));
        if (summary_table_out) *summary_table_out = dup_string(table);
        return RTME_OK;
    });
}

}  // extern "C"

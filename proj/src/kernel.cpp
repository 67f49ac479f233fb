#include "rtme/kernel.hpp"

#include <cmath>

#include "rtme/error.hpp"

namespace rtme {

namespace {
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::acos(-1.0));
const double kInvTwoSqrtPi = 1.0 / (2.0 * std::sqrt(std::acos(-1.0)));
}  // namespace

double KernelSpec::operator()(double u) const {
    switch (kind) {
        case KernelKind::gaussian:
            return kInvSqrt2Pi * std::exp(-0.5 * u * u);
        case KernelKind::epanechnikov:
            return std::fabs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
        case KernelKind::triangular:
            return std::fabs(u) <= 1.0 ? 1.0 - std::fabs(u) : 0.0;
    }
    return 0.0;
}

double KernelSpec::l2_norm() const {
    switch (kind) {
        case KernelKind::gaussian:
            return kInvTwoSqrtPi;
        case KernelKind::epanechnikov:
            return 0.6;
        case KernelKind::triangular:
            return 2.0 / 3.0;
    }
    return 0.0;
}

double KernelSpec::second_moment() const {
    switch (kind) {
        case KernelKind::gaussian:
            return 1.0;
        case KernelKind::epanechnikov:
            return 0.2;
        case KernelKind::triangular:
            return 1.0 / 6.0;
    }
    return 0.0;
}

KernelSpec KernelSpec::parse(const std::string& name) {
    if (name == "gaussian") return {KernelKind::gaussian};
    if (name == "epanechnikov") return {KernelKind::epanechnikov};
    if (name == "triangular") return {KernelKind::triangular};
    throw config_error("InvalidConfig", "unknown kernel '" + name + "'");
}

std::string KernelSpec::name() const {
    switch (kind) {
        case KernelKind::gaussian:
            return "gaussian";
        case KernelKind::epanechnikov:
            return "epanechnikov";
        case KernelKind::triangular:
            return "triangular";
    }
    return "?";
}

double BandwidthSchedule::bandwidth(std::uint64_t m) const {
    return c * sigma_scale * std::pow(static_cast<double>(m), -alpha);
}

double BandwidthSchedule::weight(std::uint64_t m) const {
    if (beta == 0.0) return 1.0;
    return std::pow(static_cast<double>(m), beta);
}

void BandwidthSchedule::validate(std::size_t p) const {
    if (!(c > 0.0)) throw config_error("InvalidConfig", "bandwidth.c must be positive");
    if (!(sigma_scale > 0.0))
        throw config_error("InvalidConfig", "bandwidth.sigma_scale must be positive");
    if (p == 0) {
        if (beta != 0.0)
            throw config_error("InvalidConfig",
                               "bandwidth.beta must be 0 when there are no continuous covariates");
        return;
    }
    const double pd = static_cast<double>(p);
    if (!(alpha > 0.0 && alpha < 1.0 / pd))
        throw config_error("InvalidConfig", "bandwidth.alpha must lie in (0, 1/p)");
    if (beta < 0.0 || beta > alpha * pd)
        throw config_error("InvalidConfig", "bandwidth.beta must lie in [0, alpha*p]");
}

}  // namespace rtme

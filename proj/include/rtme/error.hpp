#pragma once

#include <stdexcept>
#include <string>

namespace rtme {

// Coarse error classes; they map 1:1 onto the C API status codes and the
// CLI exit-code policy (config=1, data=2, numeric=3).
enum class ErrClass {
    config,
    data,
    numeric,
    argument,
};

class Error : public std::runtime_error {
public:
    Error(ErrClass cls, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), cls_(cls), code_(std::move(code)) {}

    ErrClass error_class() const { return cls_; }

    // Stable condition name, e.g. "NegativeEigenvalue", "ScheduleMismatch".
    const std::string& code() const { return code_; }

private:
    ErrClass cls_;
    std::string code_;
};

inline Error config_error(std::string code, const std::string& msg) {
    return Error(ErrClass::config, std::move(code), msg);
}
inline Error data_error(std::string code, const std::string& msg) {
    return Error(ErrClass::data, std::move(code), msg);
}
inline Error numeric_error(std::string code, const std::string& msg) {
    return Error(ErrClass::numeric, std::move(code), msg);
}
inline Error argument_error(std::string code, const std::string& msg) {
    return Error(ErrClass::argument, std::move(code), msg);
}

}  // namespace rtme

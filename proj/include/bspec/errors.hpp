#pragma once

#include <stdexcept>
#include <string>

namespace bspec {

// Error taxonomy shared by the library and the CLI.  The driver maps each
// class to a distinct process exit code (see tools/).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CacheError : std::runtime_error {
    explicit CacheError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace bspec

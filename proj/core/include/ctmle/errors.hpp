#ifndef CTMLE_ERRORS_HPP
#define CTMLE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctmle {

// Bad user input: unknown model name, malformed options, inconsistent spec.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad data: unreadable CSV, missing column, degenerate sample.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: simulation blow-up, ill-conditioned decomposition,
// special-function evaluation outside its safe range.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ctmle

#endif

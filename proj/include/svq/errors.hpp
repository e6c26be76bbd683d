#ifndef SVQ_ERRORS_HPP
#define SVQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace svq {

// Bad sizes, bad parameters, bad spec files.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every response in some normalization context underflowed to zero.
struct DegenerateResponseError : std::runtime_error {
    explicit DegenerateResponseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training objective blew past the divergence guard.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace svq

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace kpzi {

// Errors split by how the CLI reports them: domain problems are the
// caller's fault (exit 2), numerical ones are ours (exit 3).
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct pole_error : domain_error {
    using domain_error::domain_error;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct convergence_error : numerical_error {
    using numerical_error::numerical_error;
};

struct grid_mismatch_error : numerical_error {
    using numerical_error::numerical_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw domain_error(what);
}

}  // namespace kpzi

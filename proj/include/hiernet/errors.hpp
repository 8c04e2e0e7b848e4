#pragma once

#include <stdexcept>
#include <string>

namespace hiernet {

// Malformed or inconsistent inputs: bad files, dimension mismatches,
// dependency graphs that fail validation.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed inputs the tool cannot compute: core cap exceeded,
// nonexistent MLE, non-convergence, failed factorizations.
struct ComputeError : std::runtime_error {
  explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hiernet

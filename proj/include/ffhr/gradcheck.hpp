#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ffhr/data.hpp"
#include "ffhr/model.hpp"

namespace ffhr {

struct GradCheckOptions {
    double step = 1e-5;       // central finite-difference half-step
    double threshold = 1e-4;  // pass bound on the max relative error
    std::size_t stride = 1;   // check every stride-th element of each array
    /// Minimum floor on the relative-error denominator. Central differences
    /// carry ~|loss|*eps/step of roundoff, so gradients near that noise level
    /// cannot be resolved numerically; the checker raises this floor to
    /// (noise / threshold) for the measured loss so noise-level disagreement
    /// on tiny gradients stays under the threshold.
    double denominator_floor = 1e-6;
    /// Self-test hook: added to the first checked analytic gradient entry so
    /// callers can verify the checker detects wrong gradients.
    double corruption = 0.0;
};

struct GradArrayReport {
    std::string name;
    std::size_t checked = 0;
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

struct GradReport {
    std::vector<GradArrayReport> arrays;
    double max_rel_err = 0.0;
    std::string worst_array;
    double threshold = 1e-4;
    std::size_t checked = 0;

    bool pass() const { return max_rel_err <= threshold; }
};

/// Compares reverse-mode gradients of the batch objective against central
/// finite differences of the forward-only loss, element by element over every
/// parameter array. Relative error per element:
///   |g_tape - g_fd| / max(denominator_floor, |g_tape| + |g_fd|).
/// Intended for small models; cost is two forward passes per checked element.
GradReport gradcheck(const ModelParams& params, const Adjacency& adj,
                     std::span<const Triple> batch, double reg_coeff,
                     const GradCheckOptions& opts = {});

/// One line per array plus a final verdict.
void print_gradcheck(std::ostream& os, const GradReport& report);

}  // namespace ffhr

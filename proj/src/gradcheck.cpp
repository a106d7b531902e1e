#include "ffhr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ffhr/loss_graph.hpp"
#include "ffhr/tape.hpp"

namespace ffhr {

GradReport gradcheck(const ModelParams& params, const Adjacency& adj,
                     std::span<const Triple> batch, double reg_coeff,
                     const GradCheckOptions& opts) {
    if (batch.empty()) throw std::invalid_argument("gradcheck: empty batch");
    if (!(opts.step > 0.0)) throw std::invalid_argument("gradcheck: step must be positive");
    if (opts.stride == 0) throw std::invalid_argument("gradcheck: stride must be positive");
    if (!(opts.denominator_floor > 0.0))
        throw std::invalid_argument("gradcheck: denominator floor must be positive");

    GradMap grads;
    {
        Tape tape;
        BatchGraphBuilder builder(tape, params, adj);
        const Tape::Id loss = builder.build_loss(batch, reg_coeff);
        tape.backward(loss);
        builder.accumulate_gradients(grads);
    }

    GradReport report;
    report.threshold = opts.threshold;
    bool corrupted = opts.corruption == 0.0;  // nothing to inject when zero

    ModelParams work = params;
    // Central differences of a loss of magnitude L carry ~L*eps/step of
    // roundoff per evaluation, so gradients whose magnitude is within a few
    // decades of that noise cannot be resolved by finite differences at all.
    // The denominator floor is sized so that noise-level disagreement on such
    // elements stays below the pass threshold (with an 8x summation-error
    // allowance), while a genuinely wrong small gradient still trips it.
    const double base_loss = batch_loss_value(work, batch, adj, reg_coeff);
    const double fd_noise =
        8.0 * std::abs(base_loss) * std::numeric_limits<double>::epsilon() / opts.step;
    const double denom_floor = std::max(opts.denominator_floor, fd_noise / opts.threshold);
    work.for_each_array([&](const std::string& name, std::vector<double>& arr) {
        GradArrayReport ar;
        ar.name = name;
        const auto it = grads.find(name);
        for (std::size_t i = 0; i < arr.size(); i += opts.stride) {
            const double saved = arr[i];
            arr[i] = saved + opts.step;
            const double up = batch_loss_value(work, batch, adj, reg_coeff);
            arr[i] = saved - opts.step;
            const double down = batch_loss_value(work, batch, adj, reg_coeff);
            arr[i] = saved;
            const double numeric = (up - down) / (2.0 * opts.step);
            double analytic = it != grads.end() ? it->second[i] : 0.0;
            if (!corrupted) {
                analytic += opts.corruption;
                corrupted = true;
            }
            const double err = std::abs(analytic - numeric) /
                               std::max(denom_floor, std::abs(analytic) + std::abs(numeric));
            ++ar.checked;
            if (err > ar.max_rel_err) {
                ar.max_rel_err = err;
                ar.worst_index = i;
                ar.worst_analytic = analytic;
                ar.worst_numeric = numeric;
            }
        }
        report.checked += ar.checked;
        if (ar.max_rel_err > report.max_rel_err) {
            report.max_rel_err = ar.max_rel_err;
            report.worst_array = ar.name;
        }
        report.arrays.push_back(std::move(ar));
    });
    return report;
}

void print_gradcheck(std::ostream& os, const GradReport& report) {
    for (const GradArrayReport& ar : report.arrays) {
        os << "  " << ar.name << ": checked " << ar.checked << ", max rel err " << ar.max_rel_err;
        if (ar.checked > 0)
            os << " (index " << ar.worst_index << ": tape " << ar.worst_analytic << " vs fd "
               << ar.worst_numeric << ")";
        os << '\n';
    }
    os << (report.pass() ? "PASS" : "FAIL") << ": max relative error " << report.max_rel_err
       << " over " << report.checked << " elements (threshold " << report.threshold << ", worst "
       << report.worst_array << ")\n";
}

}  // namespace ffhr

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ffhr/data.hpp"
#include "ffhr/model.hpp"
#include "ffhr/tape_ops.hpp"

namespace ffhr {

/// Gradients keyed by the canonical array names of ModelParams::for_each_array.
using GradMap = std::map<std::string, std::vector<double>>;

/// Records one training batch on a tape: optional message-passing encoder,
/// relation transform, scores against the full entity table, multiclass
/// log-loss, and the tangent-norm regularizer. One builder per recording.
class BatchGraphBuilder {
public:
    BatchGraphBuilder(Tape& tape, const ModelParams& params, const Adjacency& adj);

    /// Returns the scalar loss node:
    ///   mean_batch[-s(h,r,t) + logsumexp_t' s(h,r,t')] + reg * mean_batch[penalty].
    Tape::Id build_loss(std::span<const Triple> batch, double reg_coeff);

    /// Adds each leaf's gradient into `out` (arrays allocated/zeroed on first
    /// touch per name). Call after Tape::backward.
    void accumulate_gradients(GradMap& out) const;

private:
    struct LeafRec {
        std::string array;
        std::size_t offset;
        std::size_t array_len;  // full canonical array length
        Tape::Id node;
    };

    Tape::Id leaf_for(const std::string& array, std::size_t offset, std::size_t array_len,
                      std::span<const double> data);
    void build_entity_views();
    void encode_all();
    Tape::Id relation_leaf(std::size_t r);
    Tape::Id candidate_factor(std::size_t e);   // 1 + c^2 ||y||^2, cached
    Tape::Id candidate_tangent(std::size_t e);  // log0 of encoded point, cached

    Tape* tape_;
    const ModelParams* params_;
    const Adjacency* adj_;
    tape_ops::CurvNodes cn_;
    bool hyperbolic_;

    std::vector<LeafRec> leaves_;
    std::vector<Tape::Id> raw_;      // per-entity tangent leaf
    std::vector<Tape::Id> point_;    // encoded model-space coordinates
    std::vector<Tape::Id> factor_;   // lazily built, 0 = unset
    std::vector<Tape::Id> tangent_;  // lazily built, 0 = unset
    std::vector<bool> factor_set_;
    std::vector<bool> tangent_set_;
    std::map<std::size_t, Tape::Id> rel_leaf_;
    bool built_ = false;
};

/// Forward-only batch loss through the non-differentiable kernels; the
/// independent reference for gradient checking and loss reporting.
double batch_loss_value(const ModelParams& params, std::span<const Triple> batch,
                        const Adjacency& adj, double reg_coeff);

/// Per-triple tangent-norm penalty ||log0(transformed)||^2 + ||log0(e_t)||^2.
double dura_penalty(const BallPoint& transformed, const BallPoint& e_t);

}  // namespace ffhr

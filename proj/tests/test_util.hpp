#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "ffhr/ball.hpp"
#include "ffhr/data.hpp"
#include "ffhr/encoder.hpp"
#include "ffhr/linalg.hpp"
#include "ffhr/model.hpp"

namespace ffhr::testutil {

/// Adds uniform noise in [-scale, scale] to every parameter array so that
/// zero-initialized angles/biases also exercise their gradient paths.
inline void perturb_params(ModelParams& params, double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-scale, scale);
    params.for_each_array([&](const std::string&, std::vector<double>& arr) {
        for (double& v : arr) v += noise(rng);
    });
}

/// Random point with Euclidean norm uniform in [0, max_norm_frac/sqrt(c)],
/// direction uniform on the sphere.
inline std::vector<double> random_in_ball(std::mt19937_64& rng, std::size_t dim, double c,
                                          double max_norm_frac = 0.9) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
        n2 = 0.0;
        for (auto& x : v) {
            x = gauss(rng);
            n2 += x * x;
        }
    } while (n2 < 1e-12);
    std::uniform_real_distribution<double> unif(0.0, max_norm_frac / std::sqrt(c));
    const double target = unif(rng);
    const double f = target / std::sqrt(n2);
    for (auto& x : v) x *= f;
    return v;
}

inline BallPoint random_point(std::mt19937_64& rng, std::size_t dim, Curvature curv,
                              double max_norm_frac = 0.9) {
    return BallPoint(random_in_ball(rng, dim, curv.c(), max_norm_frac), curv);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Fresh empty directory under the system temp root; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("ffhr_test_" + tag + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path;
}

/// Random directed multigraph: every entity gets `out_degree` edges with
/// uniform relations and neighbors.
inline Adjacency random_graph(std::mt19937_64& rng, std::size_t entities, std::size_t relations,
                              std::size_t out_degree) {
    std::uniform_int_distribution<std::uint32_t> pick_e(0, static_cast<std::uint32_t>(entities - 1));
    std::uniform_int_distribution<std::uint32_t> pick_r(0, static_cast<std::uint32_t>(relations - 1));
    Adjacency adj;
    adj.out.resize(entities);
    for (auto& edges : adj.out) {
        for (std::size_t k = 0; k < out_degree; ++k) edges.push_back({pick_r(rng), pick_e(rng)});
    }
    return adj;
}

/// Entity table of random in-ball rows.
inline Matrix random_table(std::mt19937_64& rng, std::size_t entities, std::size_t dim, double c,
                           double max_norm_frac = 0.9) {
    Matrix m(entities, dim);
    for (std::size_t i = 0; i < entities; ++i) {
        auto v = random_in_ball(rng, dim, c, max_norm_frac);
        std::copy(v.begin(), v.end(), m.row(i).begin());
    }
    return m;
}

/// Layer parameters for `rel_slots` relation slots (edges + self). Pass a
/// null rng for identity parameters (zero angles/bias/attention, identity W).
inline GcnLayerParams make_layer_params(std::size_t rel_slots, std::size_t dim, int heads,
                                        EncoderImpl impl, std::mt19937_64* rng) {
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    std::uniform_real_distribution<double> small(-0.3, 0.3);
    GcnLayerParams lp;
    if (impl == EncoderImpl::fpm) {
        lp.rotation_angles.assign(rel_slots, std::vector<double>(dim / 2, 0.0));
        lp.bias_raw.assign(rel_slots, std::vector<double>(dim, 0.0));
        if (rng) {
            for (auto& a : lp.rotation_angles)
                for (auto& v : a) v = angle(*rng);
            for (auto& b : lp.bias_raw)
                for (auto& v : b) v = small(*rng);
        }
    } else {
        lp.general_w.assign(rel_slots, Matrix::identity(dim));
        if (rng) {
            for (auto& w : lp.general_w)
                for (auto& v : w.data) v = small(*rng);
        }
    }
    lp.attn_head.assign(heads, std::vector<double>(dim, 0.0));
    lp.attn_tail.assign(heads, std::vector<double>(dim, 0.0));
    if (rng) {
        for (auto& a : lp.attn_head)
            for (auto& v : a) v = small(*rng);
        for (auto& a : lp.attn_tail)
            for (auto& v : a) v = small(*rng);
    }
    return lp;
}

}  // namespace ffhr::testutil

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lmd/rng.hpp"

namespace lmd {

/// Simple random walk Y_0 = 0, Y_k = Y_{k-1} + U_k with U_k in {-1, +1}.
struct WalkPath {
    std::vector<int> increments;
    std::vector<std::int64_t> positions;  // size n_steps() + 1, positions[0] == 0

    std::size_t n_steps() const { return increments.size(); }
};

/// Lambda_k = #{1 <= i <= k : Y_i = 0}; lambda[0] == 0.
struct DiscreteLocalTime {
    std::vector<std::int64_t> lambda;
};

/// One exact draw of (W_t, L_t) for a Brownian motion started at 0.
struct JointSample {
    double w = 0.0;
    double l = 0.0;
    double t = 0.0;
};

/// Endpoint statistics of a walk run for n steps from `start`.
struct WalkEndpoint {
    std::int64_t position = 0;
    std::int64_t local_time = 0;  // visits to 0 at steps 1..n
};

/// Throws std::invalid_argument on any entry outside {-1, +1}.
WalkPath walk_from_increments(std::span<const int> increments);

/// Increment k uses bit (k mod 64) of the (k / 64)-th engine word; a set bit is +1.
WalkPath sample_walk(std::size_t n_steps, RngStream& rng);

DiscreteLocalTime discrete_local_time(const WalkPath& path);

/// Same draws as sample_walk (bit-for-bit for start == 0), but skips whole
/// 64-step words while the walk is too far from 0 to reach it.
WalkEndpoint walk_endpoint(std::int64_t start, std::size_t n_steps, RngStream& rng);

/// Exact draw from the joint law of (W_t, L_t), W_0 = 0. Throws for t <= 0.
JointSample sample_joint_wl(double t, RngStream& rng);

/// Exact draw of (W_t, L_t) for a Brownian motion started at w0 with zero
/// initial local time: first passage to 0 at w0^2 / N^2, then a joint draw
/// over the remaining time; paths that do not reach 0 are drawn from the
/// killed (meander) law by rejection.
JointSample sample_joint_wl_from(double w0, double t, RngStream& rng);

/// Endpoint of a Brownian motion from b != 0 over time t, conditioned on not
/// hitting 0. `attempts` (optional) receives the number of proposals used.
double sample_killed_endpoint(double b, double t, RngStream& rng, std::size_t* attempts = nullptr);

/// Quadrature nodes and weights on the starting point w.
struct QuadratureRule {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;
};

/// Composite midpoint-free trapezoid rule on [-half_width, half_width].
QuadratureRule trapezoid_rule(double half_width, std::size_t n_nodes);

struct OccupationEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Quadrature over w of E[L_t | W_0 = w], each expectation estimated by a
/// random walk of `walk_steps` steps started at round(w * sqrt(walk_steps / t)).
/// The full-line integral equals t.
OccupationEstimate occupation_identity_check(std::size_t n_samples, const QuadratureRule& w_grid,
                                             const RngStream& rng, std::size_t walk_steps = 10000,
                                             double t = 1.0, unsigned threads = 1);

}  // namespace lmd

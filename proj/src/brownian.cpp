#include "lmd/brownian.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lmd/ensemble.hpp"

namespace lmd {

WalkPath walk_from_increments(std::span<const int> increments) {
    WalkPath path;
    path.increments.assign(increments.begin(), increments.end());
    path.positions.resize(increments.size() + 1);
    path.positions[0] = 0;
    for (std::size_t k = 0; k < increments.size(); ++k) {
        const int u = increments[k];
        if (u != 1 && u != -1) {
            throw std::invalid_argument("walk_from_increments: entry " + std::to_string(k) +
                                        " is " + std::to_string(u) + ", expected +1 or -1");
        }
        path.positions[k + 1] = path.positions[k] + u;
    }
    return path;
}

WalkPath sample_walk(std::size_t n_steps, RngStream& rng) {
    std::vector<int> increments(n_steps);
    std::uint64_t word = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (k % 64 == 0) word = rng.bits();
        increments[k] = ((word >> (k % 64)) & 1ULL) ? 1 : -1;
    }
    return walk_from_increments(increments);
}

DiscreteLocalTime discrete_local_time(const WalkPath& path) {
    DiscreteLocalTime lt;
    lt.lambda.resize(path.positions.size());
    lt.lambda[0] = 0;
    for (std::size_t k = 1; k < path.positions.size(); ++k) {
        lt.lambda[k] = lt.lambda[k - 1] + (path.positions[k] == 0 ? 1 : 0);
    }
    return lt;
}

WalkEndpoint walk_endpoint(std::int64_t start, std::size_t n_steps, RngStream& rng) {
    WalkEndpoint out{start, 0};
    std::size_t done = 0;
    while (done < n_steps) {
        const std::uint64_t word = rng.bits();
        const std::size_t len = std::min<std::size_t>(64, n_steps - done);
        const std::uint64_t mask = len == 64 ? ~0ULL : ((1ULL << len) - 1ULL);
        const auto reach = static_cast<std::int64_t>(len);
        if (out.position > reach || out.position < -reach) {
            const auto ups = static_cast<std::int64_t>(std::popcount(word & mask));
            out.position += 2 * ups - reach;
        } else {
            for (std::size_t i = 0; i < len; ++i) {
                out.position += ((word >> i) & 1ULL) ? 1 : -1;
                if (out.position == 0) ++out.local_time;
            }
        }
        done += len;
    }
    return out;
}

JointSample sample_joint_wl(double t, RngStream& rng) {
    if (!(t > 0.0)) throw std::invalid_argument("sample_joint_wl: horizon t must be > 0");
    // S = |W| + L has the Maxwell law of sqrt(t) * |N_3|; given S, W is uniform on [-S, S].
    const double n1 = rng.normal();
    const double n2 = rng.normal();
    const double n3 = rng.normal();
    const double s = std::sqrt(t) * std::sqrt(n1 * n1 + n2 * n2 + n3 * n3);
    const double w = s * (2.0 * rng.uniform() - 1.0);
    return JointSample{w, s - std::abs(w), t};
}

double sample_killed_endpoint(double b, double t, RngStream& rng, std::size_t* attempts) {
    if (b == 0.0) throw std::invalid_argument("sample_killed_endpoint: start must be nonzero");
    if (!(t > 0.0)) throw std::invalid_argument("sample_killed_endpoint: t must be > 0");
    const double sign = b > 0.0 ? 1.0 : -1.0;
    const double start = std::abs(b);
    const double sd = std::sqrt(t);
    std::size_t tries = 0;
    for (;;) {
        ++tries;
        const double y = start + sd * rng.normal();
        if (y <= 0.0) continue;
        // Bridge from start to y avoids 0 with probability 1 - exp(-2 start y / t).
        const double survive = -std::expm1(-2.0 * start * y / t);
        if (rng.uniform() < survive) {
            if (attempts) *attempts = tries;
            return sign * y;
        }
    }
}

JointSample sample_joint_wl_from(double w0, double t, RngStream& rng) {
    if (!(t > 0.0)) throw std::invalid_argument("sample_joint_wl_from: horizon t must be > 0");
    if (w0 == 0.0) return sample_joint_wl(t, rng);
    const double g = rng.normal();
    const double hit = (w0 * w0) / (g * g);
    if (hit >= t) return JointSample{sample_killed_endpoint(w0, t, rng), 0.0, t};
    JointSample rest = sample_joint_wl(t - hit, rng);
    rest.t = t;
    return rest;
}

QuadratureRule trapezoid_rule(double half_width, std::size_t n_nodes) {
    if (n_nodes < 2) throw std::invalid_argument("trapezoid_rule: need at least two nodes");
    if (!(half_width > 0.0)) throw std::invalid_argument("trapezoid_rule: half_width must be > 0");
    QuadratureRule rule;
    rule.nodes = Eigen::ArrayXd::LinSpaced(static_cast<Eigen::Index>(n_nodes), -half_width, half_width);
    const double h = 2.0 * half_width / static_cast<double>(n_nodes - 1);
    rule.weights = Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(n_nodes), h);
    rule.weights(0) *= 0.5;
    rule.weights(rule.weights.size() - 1) *= 0.5;
    return rule;
}

OccupationEstimate occupation_identity_check(std::size_t n_samples, const QuadratureRule& w_grid,
                                             const RngStream& rng, std::size_t walk_steps, double t,
                                             unsigned threads) {
    if (w_grid.nodes.size() != w_grid.weights.size()) {
        throw std::invalid_argument("occupation_identity_check: nodes/weights size mismatch");
    }
    if (walk_steps == 0 || !(t > 0.0)) {
        throw std::invalid_argument("occupation_identity_check: need walk_steps >= 1 and t > 0");
    }
    OccupationEstimate est;
    if (n_samples == 0) return est;
    const double scale = std::sqrt(t / static_cast<double>(walk_steps));
    double variance = 0.0;
    for (Eigen::Index j = 0; j < w_grid.nodes.size(); ++j) {
        const double weight = w_grid.weights(j);
        if (weight == 0.0) continue;
        const auto start = static_cast<std::int64_t>(std::llround(w_grid.nodes(j) / scale));
        std::vector<double> sums((n_samples + kEnsembleBlock - 1) / kEnsembleBlock, 0.0);
        std::vector<double> squares(sums.size(), 0.0);
        for_each_block(n_samples, rng.substream(static_cast<std::uint64_t>(j)), threads,
                       [&](std::size_t b, std::size_t begin, std::size_t end, RngStream& r) {
                           double s = 0.0;
                           double s2 = 0.0;
                           for (std::size_t i = begin; i < end; ++i) {
                               const double l =
                                   scale * static_cast<double>(walk_endpoint(start, walk_steps, r).local_time);
                               s += l;
                               s2 += l * l;
                           }
                           sums[b] = s;
                           squares[b] = s2;
                       });
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t b = 0; b < sums.size(); ++b) {
            s += sums[b];
            s2 += squares[b];
        }
        const auto m = static_cast<double>(n_samples);
        const double mean = s / m;
        const double var = m > 1.0 ? std::max(0.0, (s2 - m * mean * mean) / (m - 1.0)) : 0.0;
        est.value += weight * mean;
        variance += weight * weight * var / m;
    }
    est.std_error = std::sqrt(variance);
    return est;
}

}  // namespace lmd

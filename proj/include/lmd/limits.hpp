#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include <Eigen/Core>

#include "lmd/flow.hpp"
#include "lmd/rng.hpp"

namespace lmd {

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic critical value.
struct KsReport {
    double d_statistic = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double critical_5pct = 0.0;  // 1.36 sqrt((n_a + n_b) / (n_a n_b))

    /// c(alpha) sqrt((n_a + n_b) / (n_a n_b)) with c(alpha) = sqrt(-ln(alpha / 2) / 2).
    double critical(double alpha) const;
    bool rejects(double alpha) const { return d_statistic > critical(alpha); }
};

/// Exact sup-distance of the empirical CDFs (ties handled). Throws on empty input.
KsReport ks_two_sample(std::span<const double> a, std::span<const double> b);

inline KsReport ks_two_sample(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
    return ks_two_sample(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                         std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

/// Law of constant * L_1^l_exponent * W_1, (W_1, L_1) an exact joint draw.
struct LimitLaw {
    double constant = 1.0;
    double l_exponent = 1.0;
    double time_exponent = 0.0;  // (gamma - 2) / (3 - 2 gamma)
    PowerLawDrive drive;

    /// Large-time law of t^{(gamma-2)/(3-2gamma)} X_t: constant
    /// 2^{(1-gamma)/(3-2gamma)} |gamma - 3/2|^{1/(3-2gamma)}, exponent 1/(3-2gamma).
    /// Requires sigma = -1, gamma > 3/2 or sigma = +1, gamma < 1.
    static LimitLaw forward(const PowerLawDrive& drive);

    /// Small-t law of t^{(gamma-2)/(3-2gamma)} X_{tau - t}; same constant and
    /// exponent. Requires a finite exit, sigma (3/2 - gamma) < 0.
    static LimitLaw reversed(const PowerLawDrive& drive);

    /// The alternative with exponent 1/(2(3-2gamma)) on both L_1 and
    /// |gamma - 3/2|; kept as a rejected alternative.
    static LimitLaw half_exponent_variant(const PowerLawDrive& drive);
};

Eigen::ArrayXd limit_law_sample(const LimitLaw& law, std::size_t m, const RngStream& rng, unsigned threads = 1);

/// m draws of t^{(gamma-2)/(3-2gamma)} X_t from sample_exact with (x0, a0) = (0, 1).
Eigen::ArrayXd rescaled_empirical(const PowerLawDrive& drive, double t, std::size_t m, const RngStream& rng,
                                  unsigned threads = 1);

struct ReversedOptions {
    std::size_t n_steps = 100000;  // reversed walk steps covering t_back
    double a0 = 1.0;
};

/// m draws of 1{t < tau} t^{(gamma-2)/(3-2gamma)} X_{tau - t} at t = t_back.
///
/// Pathwise on the discrete scheme (sde-consistent mode) with step
/// delta = t_back / n_steps: a walk stopped at the k*-th visit of 0 (the
/// first Euler iterate of the flow that exits) reversed in time is again a
/// walk from 0 run until its k*-th zero, so the state n_steps before the
/// exit is read off a fresh walk of n_steps steps. Every draw is therefore
/// conditioned on absorption; draws with tau < t_back return 0.
Eigen::ArrayXd reversed_blowup_empirical(const PowerLawDrive& drive, double t_back, std::size_t m,
                                         const RngStream& rng, const ReversedOptions& options = {},
                                         unsigned threads = 1);

using Field2 = std::function<double(double, double)>;
using Field1 = std::function<double(double)>;

/// Test function h on (x, a) and compactly supported weight phi on x.
struct GeneratorProbe {
    Field2 h;
    Field1 phi;
    double phi_half_width = 1.0;  // supp phi within [-phi_half_width, phi_half_width]
    double t_small = 1e-3;
    std::size_t n_samples = 1000000;
};

struct GeneratorCheck {
    double lhs = 0.0;
    double lhs_std_error = 0.0;
    double rhs = 0.0;
};

/// Monte Carlo estimate of int phi(x) E^{x,a}[(h(X_t, A_t) - h(x, a)) / t] dx
/// against int phi a h_xx dx + phi(0) f(a) h_a(0, a). Starting points are
/// uniform on supp phi; derivatives of h use central differences.
GeneratorCheck generator_check(const GeneratorProbe& probe, const PowerLawDrive& drive, double a,
                               const RngStream& rng, unsigned threads = 1);

/// Same check for the pair (W, L): int phi(w) E^{w,0}[(h(W_t, L_t) - h(w, 0)) / t] dw
/// against int phi h_ww / 2 dw + phi(0) h_l(0, 0). Here h is a function of (w, l).
GeneratorCheck local_time_generator_check(const GeneratorProbe& probe, const RngStream& rng,
                                          unsigned threads = 1);

}  // namespace lmd

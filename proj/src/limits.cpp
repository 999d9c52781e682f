#include "lmd/limits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lmd/brownian.hpp"
#include "lmd/ensemble.hpp"
#include "lmd/errors.hpp"
#include "lmd/process.hpp"

namespace lmd {

double KsReport::critical(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("KsReport::critical: alpha in (0, 1)");
    const double na = static_cast<double>(n_a);
    const double nb = static_cast<double>(n_b);
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) * std::sqrt((na + nb) / (na * nb));
}

KsReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: both samples must be nonempty");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsReport r;
    r.d_statistic = d;
    r.n_a = sa.size();
    r.n_b = sb.size();
    r.critical_5pct = 1.36 * std::sqrt((na + nb) / (na * nb));
    return r;
}

namespace {

double rescale_exponent(double gamma) { return (gamma - 2.0) / (3.0 - 2.0 * gamma); }

LimitLaw make_law(const PowerLawDrive& drive, double magnitude_exponent, double l_exponent) {
    const double g = drive.gamma;
    LimitLaw law;
    law.drive = drive;
    law.constant = std::pow(2.0, (1.0 - g) / (3.0 - 2.0 * g)) * std::pow(std::abs(g - 1.5), magnitude_exponent);
    law.l_exponent = l_exponent;
    law.time_exponent = rescale_exponent(g);
    return law;
}

void require_forward_regime(const PowerLawDrive& drive, const char* who) {
    const bool ok = !drive.inert && ((drive.sigma < 0 && drive.gamma > 1.5) || (drive.sigma > 0 && drive.gamma < 1.0));
    if (!ok) {
        throw std::invalid_argument(std::string(who) +
                                    ": rescaled limit law applies only for sigma = -1, gamma > 3/2 "
                                    "or sigma = +1, gamma < 1");
    }
}

}  // namespace

LimitLaw LimitLaw::forward(const PowerLawDrive& drive) {
    require_forward_regime(drive, "LimitLaw::forward");
    const double e = 1.0 / (3.0 - 2.0 * drive.gamma);
    return make_law(drive, e, e);
}

LimitLaw LimitLaw::reversed(const PowerLawDrive& drive) {
    if (!drive.finite_exit()) {
        throw std::invalid_argument("LimitLaw::reversed: requires sigma (3/2 - gamma) < 0 (finite tau)");
    }
    const double e = 1.0 / (3.0 - 2.0 * drive.gamma);
    return make_law(drive, e, e);
}

LimitLaw LimitLaw::half_exponent_variant(const PowerLawDrive& drive) {
    if (drive.inert || drive.gamma == 1.5) {
        throw std::invalid_argument("LimitLaw::half_exponent_variant: needs gamma != 3/2");
    }
    const double e = 1.0 / (2.0 * (3.0 - 2.0 * drive.gamma));
    return make_law(drive, e, e);
}

Eigen::ArrayXd limit_law_sample(const LimitLaw& law, std::size_t m, const RngStream& rng, unsigned threads) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(m));
    for_each_block(m, rng, threads, [&](std::size_t, std::size_t begin, std::size_t end, RngStream& r) {
        for (std::size_t i = begin; i < end; ++i) {
            const JointSample s = sample_joint_wl(1.0, r);
            out(static_cast<Eigen::Index>(i)) = law.constant * std::pow(s.l, law.l_exponent) * s.w;
        }
    });
    return out;
}

Eigen::ArrayXd rescaled_empirical(const PowerLawDrive& drive, double t, std::size_t m, const RngStream& rng,
                                  unsigned threads) {
    require_forward_regime(drive, "rescaled_empirical");
    if (!(t > 0.0)) throw std::invalid_argument("rescaled_empirical: t must be > 0");
    const double factor = std::pow(t, rescale_exponent(drive.gamma));
    const ProcessEnsemble e = sample_exact_ensemble(drive, 1.0, t, m, rng, threads);
    return factor * e.x;
}

Eigen::ArrayXd reversed_blowup_empirical(const PowerLawDrive& drive, double t_back, std::size_t m,
                                         const RngStream& rng, const ReversedOptions& options,
                                         unsigned threads) {
    if (!drive.finite_exit()) {
        throw std::invalid_argument("reversed_blowup_empirical: requires sigma (3/2 - gamma) < 0 (finite tau)");
    }
    if (!(t_back > 0.0)) throw std::invalid_argument("reversed_blowup_empirical: t_back must be > 0");
    if (options.n_steps == 0) throw std::invalid_argument("reversed_blowup_empirical: n_steps must be >= 1");
    if (!(options.a0 > 0.0)) throw std::invalid_argument("reversed_blowup_empirical: a0 must be > 0");

    const double delta = t_back / static_cast<double>(options.n_steps);
    const double step = std::sqrt(delta);
    // Euler iterates of the flow in local-time step sqrt(delta), up to the first exit.
    const ScalarFunction g = flow_rhs(ScalarFunction(drive), FlowLaw::sde_consistent);
    std::vector<double> iterates{options.a0};
    const double low = kLowGuard * options.a0;
    const double high = kHighGuard * options.a0;
    for (;;) {
        const double y = iterates.back();
        const double next = y + step * g(y);
        if (!(next > low) || next >= high) break;
        iterates.push_back(next);
        if (iterates.size() > 100'000'000) {
            throw NumericalGuardError("reversed_blowup_empirical: flow did not exit within 1e8 Euler steps");
        }
    }
    // Zero visits up to and including the absorbing one.
    const auto exit_visits = static_cast<std::int64_t>(iterates.size());
    const double factor = std::pow(t_back, rescale_exponent(drive.gamma));

    Eigen::ArrayXd out(static_cast<Eigen::Index>(m));
    for_each_block(m, rng, threads, [&](std::size_t, std::size_t begin, std::size_t end, RngStream& r) {
        for (std::size_t i = begin; i < end; ++i) {
            const WalkEndpoint rev = walk_endpoint(0, options.n_steps, r);
            double value = 0.0;
            if (rev.local_time < exit_visits) {
                const std::int64_t before = rev.local_time - (rev.position == 0 ? 1 : 0);
                const std::int64_t level = exit_visits - 1 - before;
                const double a = iterates[static_cast<std::size_t>(level)];
                value = factor * std::sqrt(2.0 * a) * step * static_cast<double>(rev.position);
            }
            out(static_cast<Eigen::Index>(i)) = value;
        }
    });
    return out;
}

namespace {

constexpr double kFdStep = 1e-4;

double d2_first(const Field2& h, double x, double a) {
    return (h(x + kFdStep, a) - 2.0 * h(x, a) + h(x - kFdStep, a)) / (kFdStep * kFdStep);
}

double d1_second(const Field2& h, double x, double a) {
    return (h(x, a + kFdStep) - h(x, a - kFdStep)) / (2.0 * kFdStep);
}

// Composite Simpson on [-r, r].
template <class Fn>
double simpson(Fn&& fn, double r, int intervals = 4000) {
    const double h = 2.0 * r / intervals;
    double s = fn(-r) + fn(r);
    for (int i = 1; i < intervals; ++i) s += fn(-r + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

void validate_probe(const GeneratorProbe& probe, const char* who) {
    if (!probe.h || !probe.phi) throw std::invalid_argument(std::string(who) + ": h and phi are required");
    if (!(probe.phi_half_width > 0.0)) throw std::invalid_argument(std::string(who) + ": phi_half_width must be > 0");
    if (!(probe.t_small > 0.0)) throw std::invalid_argument(std::string(who) + ": t_small must be > 0");
    if (probe.n_samples < 2) throw std::invalid_argument(std::string(who) + ": need at least 2 samples");
}

template <class Draw>
GeneratorCheck monte_carlo_lhs(const GeneratorProbe& probe, const RngStream& rng, unsigned threads, Draw&& draw) {
    const std::size_t m = probe.n_samples;
    const std::size_t n_blocks = (m + kEnsembleBlock - 1) / kEnsembleBlock;
    std::vector<double> sums(n_blocks, 0.0);
    std::vector<double> squares(n_blocks, 0.0);
    const double r = probe.phi_half_width;
    for_each_block(m, rng, threads, [&](std::size_t b, std::size_t begin, std::size_t end, RngStream& s) {
        double acc = 0.0;
        double acc2 = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double x = r * (2.0 * s.uniform() - 1.0);
            const double v = 2.0 * r * probe.phi(x) * draw(x, s) / probe.t_small;
            if (!std::isfinite(v)) throw NumericalGuardError("generator_check: non-finite increment of h");
            acc += v;
            acc2 += v * v;
        }
        sums[b] = acc;
        squares[b] = acc2;
    });
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        s += sums[b];
        s2 += squares[b];
    }
    const double n = static_cast<double>(m);
    GeneratorCheck out;
    out.lhs = s / n;
    out.lhs_std_error = std::sqrt(std::max(0.0, (s2 / n - out.lhs * out.lhs) / (n - 1.0)));
    return out;
}

}  // namespace

GeneratorCheck generator_check(const GeneratorProbe& probe, const PowerLawDrive& drive, double a,
                               const RngStream& rng, unsigned threads) {
    validate_probe(probe, "generator_check");
    if (!(a > 0.0)) throw std::invalid_argument("generator_check: a must be > 0");
    const double t = probe.t_small;
    GeneratorCheck out = monte_carlo_lhs(probe, rng, threads, [&](double x, RngStream& s) {
        const ProcessPoint p = x == 0.0 ? sample_exact(drive, a, t, s) : sample_from_general_start(drive, x, a, t, s);
        return probe.h(p.x, p.a) - probe.h(x, a);
    });
    const double diffusion =
        simpson([&](double x) { return probe.phi(x) * a * d2_first(probe.h, x, a); }, probe.phi_half_width);
    out.rhs = diffusion + probe.phi(0.0) * drive(a) * d1_second(probe.h, 0.0, a);
    return out;
}

GeneratorCheck local_time_generator_check(const GeneratorProbe& probe, const RngStream& rng, unsigned threads) {
    validate_probe(probe, "local_time_generator_check");
    const double t = probe.t_small;
    GeneratorCheck out = monte_carlo_lhs(probe, rng, threads, [&](double w, RngStream& s) {
        const JointSample j = sample_joint_wl_from(w, t, s);
        return probe.h(j.w, j.l) - probe.h(w, 0.0);
    });
    const double diffusion =
        simpson([&](double w) { return 0.5 * probe.phi(w) * d2_first(probe.h, w, 0.0); }, probe.phi_half_width);
    // One-sided difference in l: h is only defined for l >= 0.
    const double dl = (probe.h(0.0, kFdStep) - probe.h(0.0, 0.0)) / kFdStep;
    out.rhs = diffusion + probe.phi(0.0) * dl;
    return out;
}

}  // namespace lmd

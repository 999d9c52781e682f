#include "lmd/process.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lmd/brownian.hpp"
#include "lmd/ensemble.hpp"

namespace lmd {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::alive: return "alive";
        case Status::trapped: return "trapped";
        case Status::exploded: return "exploded";
    }
    return "unknown";
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::trapped_finite_time: return "trapped-finite-time";
        case Regime::decays_never_trapped: return "decays-never-trapped";
        case Regime::recurrent: return "recurrent";
        case Regime::explodes_x_to_0: return "explodes-x-to-0";
        case Regime::explodes_oscillating: return "explodes-oscillating";
        case Regime::grows_forever: return "grows-forever";
    }
    return "unknown";
}

ProcessPoint trapped_point(double t) { return ProcessPoint{0.0, 0.0, Status::trapped, t}; }

ProcessPoint exploded_point(double t) {
    return ProcessPoint{0.0, std::numeric_limits<double>::infinity(), Status::exploded, t};
}

ProcessPoint point_from_local_time(const PowerLawDrive& drive, double a0, double w, double l, double t) {
    const FlowResult a = phi_power(drive, a0, l);
    switch (a.status) {
        case FlowStatus::exhausted_low: return trapped_point(t);
        case FlowStatus::exhausted_high: return exploded_point(t);
        case FlowStatus::alive: break;
    }
    return ProcessPoint{std::sqrt(2.0 * a.value) * w, a.value, Status::alive, t};
}

ProcessPoint sample_exact(const PowerLawDrive& drive, double a0, double t, RngStream& rng) {
    if (!(a0 > 0.0)) throw std::invalid_argument("sample_exact: a0 must be > 0");
    if (!(t > 0.0)) throw std::invalid_argument("sample_exact: t must be > 0");
    const JointSample s = sample_joint_wl(t, rng);
    return point_from_local_time(drive, a0, s.w, s.l, t);
}

ProcessPoint sample_from_general_start(const PowerLawDrive& drive, double x0, double a0, double t,
                                       RngStream& rng, MeanderStats* stats) {
    if (x0 == 0.0) throw std::invalid_argument("sample_from_general_start: x0 = 0, use sample_exact");
    if (!(a0 > 0.0)) throw std::invalid_argument("sample_from_general_start: a0 must be > 0");
    if (!(t > 0.0)) throw std::invalid_argument("sample_from_general_start: t must be > 0");
    // X = sqrt(2 A) W with W started at x0 / sqrt(2 a0).
    const double b = x0 / std::sqrt(2.0 * a0);
    const double g = rng.normal();
    const double hit = (b * b) / (g * g);
    if (hit >= t) {
        std::size_t tries = 0;
        const double w = sample_killed_endpoint(b, t, rng, &tries);
        if (stats) {
            ++stats->killed_branch;
            stats->proposals += tries;
        }
        return ProcessPoint{std::sqrt(2.0 * a0) * w, a0, Status::alive, t};
    }
    const JointSample s = sample_joint_wl(t - hit, rng);
    return point_from_local_time(drive, a0, s.w, s.l, t);
}

std::size_t ProcessEnsemble::count(Status s) const {
    std::size_t c = 0;
    for (Status v : status) c += (v == s) ? 1 : 0;
    return c;
}

double ProcessEnsemble::fraction(Status s) const {
    return status.empty() ? 0.0 : static_cast<double>(count(s)) / static_cast<double>(status.size());
}

namespace {

ProcessEnsemble make_ensemble(std::size_t m) {
    ProcessEnsemble e;
    e.x.resize(static_cast<Eigen::Index>(m));
    e.a.resize(static_cast<Eigen::Index>(m));
    e.status.resize(m);
    return e;
}

void store(ProcessEnsemble& e, std::size_t i, const ProcessPoint& p) {
    e.x(static_cast<Eigen::Index>(i)) = p.x;
    e.a(static_cast<Eigen::Index>(i)) = p.a;
    e.status[i] = p.status;
}

}  // namespace

ProcessEnsemble sample_exact_ensemble(const PowerLawDrive& drive, double a0, double t, std::size_t m,
                                      const RngStream& rng, unsigned threads) {
    ProcessEnsemble e = make_ensemble(m);
    for_each_block(m, rng, threads, [&](std::size_t, std::size_t begin, std::size_t end, RngStream& r) {
        for (std::size_t i = begin; i < end; ++i) store(e, i, sample_exact(drive, a0, t, r));
    });
    return e;
}

namespace {

struct DiscreteParams {
    ScalarFunction g;
    double step = 0.0;  // sqrt(t / n)
    double low = 0.0;
    double high = 0.0;
};

DiscreteParams discrete_params(const ScalarFunction& f, double a0, double t, std::size_t n, FlowLaw mode) {
    if (n == 0) throw std::invalid_argument("simulate_discrete: n must be >= 1");
    if (!(a0 > 0.0)) throw std::invalid_argument("simulate_discrete: a0 must be > 0");
    if (!(t > 0.0)) throw std::invalid_argument("simulate_discrete: t must be > 0");
    return DiscreteParams{flow_rhs(f, mode), std::sqrt(t / static_cast<double>(n)), kLowGuard * a0,
                          kHighGuard * a0};
}

// Applies the update at a visit to 0; returns the new status.
Status visit_zero(const DiscreteParams& p, double& a) {
    a += p.g(a) * p.step;
    if (!(a > p.low)) return Status::trapped;
    if (a >= p.high) return Status::exploded;
    return Status::alive;
}

}  // namespace

DiscreteTrajectory simulate_discrete(const ScalarFunction& f, double a0, double t, std::size_t n,
                                     FlowLaw mode, RngStream& rng) {
    const DiscreteParams p = discrete_params(f, a0, t, n, mode);
    const WalkPath walk = sample_walk(n, rng);
    DiscreteTrajectory traj;
    traj.t = t;
    traj.n = n;
    traj.mode = mode;
    traj.walk = walk.positions;
    traj.xs.assign(n + 1, 0.0);
    traj.as.assign(n + 1, a0);
    double a = a0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (traj.status == Status::alive && walk.positions[k] == 0) {
            traj.status = visit_zero(p, a);
            if (traj.status != Status::alive) traj.exit_index = k;
        }
        switch (traj.status) {
            case Status::alive:
                traj.as[k] = a;
                traj.xs[k] = std::sqrt(2.0 * a) * p.step * static_cast<double>(walk.positions[k]);
                break;
            case Status::trapped:
                traj.as[k] = 0.0;
                traj.xs[k] = 0.0;
                break;
            case Status::exploded:
                traj.as[k] = std::numeric_limits<double>::infinity();
                traj.xs[k] = 0.0;
                break;
        }
    }
    return traj;
}

DiscreteTrajectory simulate_discrete(const PowerLawDrive& drive, double a0, double t, std::size_t n,
                                     FlowLaw mode, RngStream& rng) {
    return simulate_discrete(ScalarFunction(drive), a0, t, n, mode, rng);
}

ProcessPoint simulate_discrete_endpoint(const ScalarFunction& f, double a0, double t, std::size_t n,
                                        FlowLaw mode, RngStream& rng) {
    const DiscreteParams p = discrete_params(f, a0, t, n, mode);
    std::int64_t y = 0;
    double a = a0;
    std::size_t done = 0;
    while (done < n) {
        const std::uint64_t word = rng.bits();
        const std::size_t len = std::min<std::size_t>(64, n - done);
        const std::uint64_t mask = len == 64 ? ~0ULL : ((1ULL << len) - 1ULL);
        const auto reach = static_cast<std::int64_t>(len);
        if (y > reach || y < -reach) {
            y += 2 * static_cast<std::int64_t>(std::popcount(word & mask)) - reach;
        } else {
            for (std::size_t i = 0; i < len; ++i) {
                y += ((word >> i) & 1ULL) ? 1 : -1;
                if (y == 0) {
                    const Status s = visit_zero(p, a);
                    if (s == Status::trapped) return trapped_point(t);
                    if (s == Status::exploded) return exploded_point(t);
                }
            }
        }
        done += len;
    }
    return ProcessPoint{std::sqrt(2.0 * a) * p.step * static_cast<double>(y), a, Status::alive, t};
}

ProcessEnsemble simulate_discrete_ensemble(const PowerLawDrive& drive, double a0, double t, std::size_t n,
                                           FlowLaw mode, std::size_t m, const RngStream& rng,
                                           unsigned threads) {
    ProcessEnsemble e = make_ensemble(m);
    const ScalarFunction f(drive);
    for_each_block(m, rng, threads, [&](std::size_t, std::size_t begin, std::size_t end, RngStream& r) {
        for (std::size_t i = begin; i < end; ++i) store(e, i, simulate_discrete_endpoint(f, a0, t, n, mode, r));
    });
    return e;
}

double survival_probability(const PowerLawDrive& drive, double t, double a0) {
    if (drive.inert || drive.sigma != -1) {
        throw std::invalid_argument("survival_probability: requires sigma = -1");
    }
    if (!(drive.gamma >= 0.0 && drive.gamma < 1.5)) {
        throw std::invalid_argument(
            "survival_probability: requires 0 <= gamma < 3/2 (survival is identically 1 for gamma >= 3/2)");
    }
    if (!(t > 0.0)) throw std::invalid_argument("survival_probability: t must be > 0");
    if (!(a0 > 0.0)) throw std::invalid_argument("survival_probability: a0 must be > 0");
    const double k = drive.flow_exponent();
    return std::erf(std::pow(a0, k) / (k * std::sqrt(t)));
}

RegimeReport classify_regime(const PowerLawDrive& drive) {
    if (drive.inert) throw std::invalid_argument("classify_regime: inert drive has no regime");
    if (!(drive.gamma >= 0.0)) throw std::invalid_argument("classify_regime: gamma must be >= 0");
    const double g = drive.gamma;
    RegimeReport r;
    r.drive = drive;
    if (drive.sigma < 0) {
        if (g < 1.5) {
            r.regime = Regime::trapped_finite_time;
        } else if (g < 2.0) {
            r.regime = Regime::decays_never_trapped;
        } else {
            r.regime = Regime::recurrent;
        }
    } else {
        if (g >= 2.0) {
            r.regime = Regime::explodes_x_to_0;
        } else if (g > 1.5) {
            r.regime = Regime::explodes_oscillating;
        } else {
            r.regime = Regime::grows_forever;
        }
    }
    r.tau_finite = drive.finite_exit();
    const bool deceleration_law = drive.sigma < 0 && g > 1.5;
    const bool acceleration_law = drive.sigma > 0 && g < 1.0;
    if (deceleration_law || acceleration_law) r.rate_exponent = (2.0 - g) / (3.0 - 2.0 * g);
    return r;
}

}  // namespace lmd

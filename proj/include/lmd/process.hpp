#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "lmd/flow.hpp"
#include "lmd/rng.hpp"

namespace lmd {

enum class Status { alive, trapped, exploded };

std::string_view to_string(Status s);

/// State of the coupled process at time t. Trapped is (0, 0), exploded is
/// (0, inf); both are absorbing.
struct ProcessPoint {
    double x = 0.0;
    double a = 1.0;
    Status status = Status::alive;
    double t = 0.0;
};

ProcessPoint trapped_point(double t);
ProcessPoint exploded_point(double t);

/// Maps a local-time level through the power-law flow, returning the
/// absorbing point when the flow has exited.
ProcessPoint point_from_local_time(const PowerLawDrive& drive, double a0, double w, double l, double t);

/// Exact draw of (X_t, A_t) from (0, a0) through X = sqrt(2 A) W, A = Phi_a0(L).
ProcessPoint sample_exact(const PowerLawDrive& drive, double a0, double t, RngStream& rng);

struct MeanderStats {
    std::size_t killed_branch = 0;  // draws that never reached 0 before t
    std::size_t proposals = 0;      // rejection proposals spent on those draws

    double acceptance_rate() const {
        return proposals == 0 ? 1.0 : static_cast<double>(killed_branch) / static_cast<double>(proposals);
    }
};

/// Exact draw from (x0, a0), x0 != 0: free motion x0 + sqrt(2 a0) W until the
/// first visit to 0, then the x0 = 0 law over the remaining time.
ProcessPoint sample_from_general_start(const PowerLawDrive& drive, double x0, double a0, double t,
                                       RngStream& rng, MeanderStats* stats = nullptr);

/// Vectorised ensemble helpers; block b uses rng.substream(b).
struct ProcessEnsemble {
    Eigen::ArrayXd x;
    Eigen::ArrayXd a;
    std::vector<Status> status;

    std::size_t count(Status s) const;
    double fraction(Status s) const;
};

ProcessEnsemble sample_exact_ensemble(const PowerLawDrive& drive, double a0, double t, std::size_t m,
                                      const RngStream& rng, unsigned threads = 1);

/// Realisation of the discretised scheme on [0, t] with n walk steps.
struct DiscreteTrajectory {
    std::vector<double> xs;                // X^_k, k = 0..n
    std::vector<double> as;                // A^_k
    std::vector<std::int64_t> walk;        // underlying Y_k
    double t = 0.0;
    std::size_t n = 0;
    FlowLaw mode = FlowLaw::sde_consistent;
    Status status = Status::alive;         // status at k = n
    std::optional<std::size_t> exit_index; // first k with A^ outside the guards
};

/// A^_k = A^_{k-1} + g(A^_{k-1}) sqrt(t/n) 1{Y_k = 0}, X^_k = sqrt(2 A^_k t / n) Y_k,
/// with g = f (unscaled) or g = f / sqrt(2 a) (sde_consistent). Once A^
/// leaves (kLowGuard a0, kHighGuard a0) the trajectory stays at the absorbing
/// point. The walk bits follow sample_walk.
DiscreteTrajectory simulate_discrete(const ScalarFunction& f, double a0, double t, std::size_t n,
                                     FlowLaw mode, RngStream& rng);
DiscreteTrajectory simulate_discrete(const PowerLawDrive& drive, double a0, double t, std::size_t n,
                                     FlowLaw mode, RngStream& rng);

/// Final state only; same draws as simulate_discrete, skipping walk blocks
/// that cannot touch 0.
ProcessPoint simulate_discrete_endpoint(const ScalarFunction& f, double a0, double t, std::size_t n,
                                        FlowLaw mode, RngStream& rng);

ProcessEnsemble simulate_discrete_ensemble(const PowerLawDrive& drive, double a0, double t, std::size_t n,
                                           FlowLaw mode, std::size_t m, const RngStream& rng,
                                           unsigned threads = 1);

/// S(t) = P(L_t < l*) = erf(a0^{3/2-gamma} / ((3/2 - gamma) sqrt t)) for
/// sigma = -1, 0 <= gamma < 3/2. Throws for other drives.
double survival_probability(const PowerLawDrive& drive, double t, double a0 = 1.0);

enum class Regime {
    trapped_finite_time,
    decays_never_trapped,
    recurrent,
    explodes_x_to_0,
    explodes_oscillating,
    grows_forever,
};

std::string_view to_string(Regime r);

struct RegimeReport {
    PowerLawDrive drive;
    Regime regime = Regime::grows_forever;
    bool tau_finite = false;
    std::optional<double> rate_exponent;  // (2 - gamma) / (3 - 2 gamma) where a rescaled limit law applies
};

RegimeReport classify_regime(const PowerLawDrive& drive);

}  // namespace lmd

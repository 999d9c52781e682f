#include "lmd/flow.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "lmd/errors.hpp"

namespace lmd {

PowerLawDrive PowerLawDrive::make(int sigma, double gamma) {
    if (sigma != 1 && sigma != -1) throw std::invalid_argument("PowerLawDrive: sigma must be +1 or -1");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("PowerLawDrive: gamma must be finite and >= 0");
    }
    return PowerLawDrive{sigma, gamma, false};
}

ScalarFunction flow_rhs(ScalarFunction f, FlowLaw law) {
    if (law == FlowLaw::unscaled) return f;
    return [f = std::move(f)](double y) { return f(y) / std::sqrt(2.0 * y); };
}

namespace {

double checked_eval(const ScalarFunction& g, double y) {
    const double v = g(y);
    if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "flow: right-hand side is not finite at y = " << y << " (value " << v << ")";
        throw NumericalGuardError(msg.str());
    }
    return v;
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920, kE5 = -17253.0 / 339200,
                 kE6 = 22.0 / 525, kE7 = -1.0 / 40;

struct TrialStep {
    bool valid = false;  // every stage stayed inside (0, inf)
    double y_new = 0.0;
    double error = 0.0;
    double k7 = 0.0;
};

TrialStep dopri_step(const ScalarFunction& g, double y, double k1, double h) {
    TrialStep out;
    auto stage = [&](double v, double& k) {
        if (!(v > 0.0)) return false;
        k = checked_eval(g, v);
        return true;
    };
    double k2 = 0, k3 = 0, k4 = 0, k5 = 0, k6 = 0, k7 = 0;
    if (!stage(y + h * kA21 * k1, k2)) return out;
    if (!stage(y + h * (kA31 * k1 + kA32 * k2), k3)) return out;
    if (!stage(y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3), k4)) return out;
    if (!stage(y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4), k5)) return out;
    if (!stage(y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5), k6)) return out;
    const double y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    if (!stage(y_new, k7)) return out;
    out.valid = true;
    out.y_new = y_new;
    out.k7 = k7;
    out.error = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
    return out;
}

}  // namespace

FlowResult flow_general(const ScalarFunction& f, double a0, double l, double tol, FlowLaw law) {
    if (!(a0 > 0.0)) throw std::invalid_argument("flow_general: a0 must be > 0");
    if (!(l >= 0.0)) throw std::invalid_argument("flow_general: l must be >= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("flow_general: tol must be > 0");
    const ScalarFunction g = flow_rhs(f, law);
    const double low = kLowGuard * a0;
    const double high = kHighGuard * a0;

    double s = 0.0;
    double y = a0;
    double k1 = checked_eval(g, y);
    if (k1 == 0.0 || l == 0.0) return {FlowStatus::alive, a0};
    // Atol tied to the guard so the controller can follow y towards 0.
    const double atol = tol * low;
    double h = std::min(l, 0.01 * y / std::abs(k1));
    const double h_min = 1e-15 * std::max(1.0, l);

    while (s < l) {
        h = std::min(h, l - s);
        const TrialStep step = dopri_step(g, y, k1, h);
        if (!step.valid) {
            // A stage left (0, inf): shrink until the step stays inside or the
            // step size collapses at the exit point.
            if (h <= h_min) return {k1 < 0.0 ? FlowStatus::exhausted_low : FlowStatus::exhausted_high, 0.0};
            h *= 0.25;
            continue;
        }
        const double scale = atol + tol * std::max(std::abs(y), std::abs(step.y_new));
        const double ratio = std::abs(step.error) / scale;
        if (ratio <= 1.0) {
            s += h;
            y = step.y_new;
            k1 = step.k7;
            if (y < low) return {FlowStatus::exhausted_low, 0.0};
            if (y > high) return {FlowStatus::exhausted_high, 0.0};
            if (s >= l) break;
        } else if (h <= h_min) {
            return {k1 < 0.0 ? FlowStatus::exhausted_low : FlowStatus::exhausted_high, 0.0};
        }
        const double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
        h *= factor;
        h = std::max(h, h_min);
    }
    return {FlowStatus::alive, y};
}

EulerFlowResult euler_flow(const ScalarFunction& f, double delta, std::size_t n_steps, double y0) {
    if (!(delta > 0.0)) throw std::invalid_argument("euler_flow: delta must be > 0");
    if (!(y0 > 0.0)) throw std::invalid_argument("euler_flow: y0 must be > 0");
    EulerFlowResult out{FlowStatus::alive, y0, 0};
    const double low = kLowGuard * y0;
    const double high = kHighGuard * y0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        out.value += delta * checked_eval(f, out.value);
        out.steps = k + 1;
        if (out.value <= low) {
            out.status = FlowStatus::exhausted_low;
            return out;
        }
        if (out.value >= high) {
            out.status = FlowStatus::exhausted_high;
            return out;
        }
    }
    return out;
}

}  // namespace lmd

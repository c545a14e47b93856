#pragma once

// Explicit Runge-Kutta integration of forced ODE systems over whole forcing
// periods. Systems with a piecewise right-hand side expose a switching
// function; the integrator never lets a step straddle the switching surface.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace basinstab {

enum class IntegrationMethod { FixedRk4, AdaptiveRk45 };

std::string to_string(IntegrationMethod m);
IntegrationMethod integration_method_from_string(const std::string& s);

// Step sizes `fixed_step` and `max_step` are fractions of the forcing period;
// `min_step` is absolute.
struct IntegratorSettings {
    IntegrationMethod method = IntegrationMethod::AdaptiveRk45;
    double fixed_step = 1.0 / 200.0;
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double max_step = 1.0 / 20.0;
    double min_step = 1e-12;
    double event_refinement_tol = 1e-10;
    double bailout = 1e3;
    bool record_events = false;

    // Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

enum class IntegrationStatus { Ok, Diverged, StepUnderflow };

// Side of a switching surface. Smooth systems always report Positive.
enum class Region : std::uint8_t { Positive, Negative };

struct TrajectorySummary {
    std::size_t dimension = 0;
    std::vector<double> strobe;  // one row of `dimension` values per completed period
    std::vector<double> period_min;
    std::vector<double> period_max;
    std::vector<double> event_times;  // filled only when settings.record_events
    IntegrationStatus status = IntegrationStatus::Ok;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t events = 0;

    std::size_t periods() const { return period_min.size(); }
    std::span<const double> state(std::size_t period) const {
        return {strobe.data() + period * dimension, dimension};
    }
};

template <class S>
concept OdeSystem = requires(const S& s, double t, const typename S::State& y) {
    { S::kDimension } -> std::convertible_to<std::size_t>;
    { S::kWellIndex } -> std::convertible_to<std::size_t>;
    { S::kPiecewise } -> std::convertible_to<bool>;
    { s.derivative(t, y, Region::Positive) } -> std::same_as<typename S::State>;
};

// Piecewise systems also provide switching(y) (surface at zero, Negative side
// below) and switching_rate(y), the time derivative of switching(y).
template <class S>
concept PiecewiseSystem = OdeSystem<S> && S::kPiecewise && requires(const S& s, const typename S::State& y) {
    { s.switching(y) } -> std::convertible_to<double>;
    { s.switching_rate(y) } -> std::convertible_to<double>;
};

template <std::size_t N>
using StateArray = std::array<double, N>;

namespace detail {

// y + h * sum_j c[j] * k_j
template <std::size_t N, class... K>
inline StateArray<N> advance(const StateArray<N>& y, double h, const std::array<double, sizeof...(K)>& c,
                             const K&... k) {
    StateArray<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        double acc = 0.0;
        std::size_t j = 0;
        ((acc += c[j++] * k[i]), ...);
        out[i] = y[i] + h * acc;
    }
    return out;
}

}  // namespace detail

template <std::size_t N>
struct Rk45Result {
    StateArray<N> state;
    StateArray<N> last_stage;  // f(t + h, state), reusable as next first stage
    double error_norm = 0.0;   // <= 1 means within tolerance
};

// One Dormand-Prince 5(4) step with a fixed region for the whole step.
template <OdeSystem S>
Rk45Result<S::kDimension> dopri_step(const S& sys, double t, const typename S::State& y, double h,
                                     const typename S::State& k1, Region region, double abs_tol,
                                     double rel_tol) {
    using State = typename S::State;
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                     a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                     a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                     b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                     e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    const State k2 = sys.derivative(t + h / 5.0, detail::advance(y, h, {a21}, k1), region);
    const State k3 = sys.derivative(t + 3.0 * h / 10.0, detail::advance(y, h, {a31, a32}, k1, k2), region);
    const State k4 =
        sys.derivative(t + 4.0 * h / 5.0, detail::advance(y, h, {a41, a42, a43}, k1, k2, k3), region);
    const State k5 = sys.derivative(t + 8.0 * h / 9.0,
                                    detail::advance(y, h, {a51, a52, a53, a54}, k1, k2, k3, k4), region);
    const State k6 = sys.derivative(
        t + h, detail::advance(y, h, {a61, a62, a63, a64, a65}, k1, k2, k3, k4, k5), region);
    Rk45Result<S::kDimension> r;
    r.state = detail::advance(y, h, {b1, b3, b4, b5, b6}, k1, k3, k4, k5, k6);
    r.last_stage = sys.derivative(t + h, r.state, region);
    double norm = 0.0;
    for (std::size_t i = 0; i < S::kDimension; ++i) {
        const double err =
            h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * r.last_stage[i]);
        const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(r.state[i]));
        norm = std::max(norm, std::abs(err) / scale);
    }
    r.error_norm = norm;
    return r;
}

// Classic fourth-order Runge-Kutta step with a fixed region.
template <OdeSystem S>
typename S::State rk4_step(const S& sys, double t, const typename S::State& y, double h,
                           const typename S::State& k1, Region region) {
    const auto k2 = sys.derivative(t + h / 2.0, detail::advance(y, h, {0.5}, k1), region);
    const auto k3 = sys.derivative(t + h / 2.0, detail::advance(y, h, {0.5}, k2), region);
    const auto k4 = sys.derivative(t + h, detail::advance(y, h, {1.0}, k3), region);
    return detail::advance(y, h, {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0}, k1, k2, k3, k4);
}

// Safety-factor step-size update, factor clamped to [0.2, 5].
inline double next_step_size(double h, double error_norm, bool accepted) {
    double factor = error_norm > 0.0 ? 0.9 * std::pow(error_norm, -0.2) : 5.0;
    factor = std::clamp(factor, 0.2, accepted ? 5.0 : 1.0);
    return h * factor;
}

struct Rk45StepOutcome {
    bool accepted = false;
    double error_norm = 0.0;
    double next_step = 0.0;
};

// Single adaptive step attempt on a smooth region. On acceptance `y` is
// advanced; `next_step` is always the proposed size for the following try.
template <OdeSystem S>
Rk45StepOutcome rk45_step(const S& sys, double t, typename S::State& y, double h, const IntegratorSettings& s,
                          Region region = Region::Positive) {
    const auto k1 = sys.derivative(t, y, region);
    const auto r = dopri_step(sys, t, y, h, k1, region, s.abs_tol, s.rel_tol);
    Rk45StepOutcome out;
    out.error_norm = r.error_norm;
    out.accepted = r.error_norm <= 1.0;
    out.next_step = next_step_size(h, r.error_norm, out.accepted);
    if (out.accepted) y = r.state;
    return out;
}

namespace detail {

template <OdeSystem S>
Region select_region(const S& sys, const typename S::State& y, double tol) {
    if constexpr (S::kPiecewise) {
        const double g = sys.switching(y);
        if (g > tol) return Region::Positive;
        if (g < -tol) return Region::Negative;
        const double rate = sys.switching_rate(y);
        if (rate > 0.0) return Region::Positive;
        if (rate < 0.0) return Region::Negative;
        return g > 0.0 ? Region::Positive : Region::Negative;
    } else {
        (void)sys;
        (void)y;
        (void)tol;
        return Region::Positive;
    }
}

template <OdeSystem S>
bool crossed(const S& sys, const typename S::State& y, Region region, double tol) {
    if constexpr (S::kPiecewise) {
        const double g = sys.switching(y);
        return region == Region::Positive ? g < -tol : g > tol;
    } else {
        (void)sys;
        (void)y;
        (void)region;
        (void)tol;
        return false;
    }
}

template <std::size_t N>
bool all_finite(const StateArray<N>& y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace detail

// Integrates `n_periods` forcing periods of length 2*pi/omega starting at
// time `t_start`. Records the state at every period boundary and the range of
// the well coordinate over all accepted steps inside each period.
template <OdeSystem S>
TrajectorySummary integrate_periods(const S& sys, const typename S::State& y0, double omega, int n_periods,
                                    const IntegratorSettings& settings, double t_start = 0.0) {
    using State = typename S::State;
    constexpr std::size_t N = S::kDimension;
    constexpr std::size_t W = S::kWellIndex;
    if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
    if (n_periods < 1) throw std::invalid_argument("n_periods must be >= 1");

    const double period = 2.0 * std::numbers::pi / omega;
    const bool adaptive = settings.method == IntegrationMethod::AdaptiveRk45;
    const double h_max = adaptive ? settings.max_step * period : settings.fixed_step * period;
    const double tol = settings.event_refinement_tol;

    TrajectorySummary out;
    out.dimension = N;
    out.strobe.reserve(static_cast<std::size_t>(n_periods) * N);
    out.period_min.reserve(n_periods);
    out.period_max.reserve(n_periods);

    State y = y0;
    double t = t_start;
    double h = adaptive ? std::min(h_max, 1e-2 * period) : h_max;
    Region region = detail::select_region(sys, y, tol);
    State k1 = sys.derivative(t, y, region);

    for (int p = 0; p < n_periods; ++p) {
        const double t_end = t_start + static_cast<double>(p + 1) * period;
        double lo = y[W];
        double hi = y[W];
        int stalled = 0;
        while (t < t_end) {
            const double remaining = t_end - t;
            const bool to_boundary = h * (1.0 + 1e-9) >= remaining;
            double h_try = to_boundary ? remaining : h;

            State y_new;
            State k_new;
            if (adaptive) {
                auto r = dopri_step(sys, t, y, h_try, k1, region, settings.abs_tol, settings.rel_tol);
                if (!(r.error_norm <= 1.0)) {
                    ++out.rejected_steps;
                    h = next_step_size(h_try, std::isfinite(r.error_norm) ? r.error_norm : 1e10, false);
                    if (h < settings.min_step) {
                        out.status = IntegrationStatus::StepUnderflow;
                        return out;
                    }
                    continue;
                }
                const double proposal = next_step_size(h_try, r.error_norm, true);
                h = to_boundary ? std::max(h, proposal) : proposal;
                h = std::min(h, h_max);
                y_new = r.state;
                k_new = r.last_stage;
            } else {
                y_new = rk4_step(sys, t, y, h_try, k1, region);
            }

            bool hit_surface = false;
            if constexpr (S::kPiecewise) {
                if (detail::crossed(sys, y_new, region, tol)) {
                    // Bisect on the step length until the end point lies on the surface.
                    double a = 0.0;
                    double b = h_try;
                    for (int it = 0; it < 200; ++it) {
                        const double mid = 0.5 * (a + b);
                        State trial = adaptive ? dopri_step(sys, t, y, mid, k1, region, settings.abs_tol,
                                                            settings.rel_tol)
                                                     .state
                                               : rk4_step(sys, t, y, mid, k1, region);
                        const double g = sys.switching(trial);
                        if (std::abs(g) <= tol || it == 199) {
                            h_try = mid;
                            y_new = trial;
                            break;
                        }
                        if (detail::crossed(sys, trial, region, tol))
                            b = mid;
                        else
                            a = mid;
                    }
                    hit_surface = true;
                    ++out.events;
                    if (settings.record_events) out.event_times.push_back(t + h_try);
                }
            }

            const bool lands_on_boundary = !hit_surface && to_boundary;
            t = lands_on_boundary ? t_end : t + h_try;
            y = y_new;
            ++out.accepted_steps;

            if (!detail::all_finite(y) || std::abs(y[W]) > settings.bailout) {
                out.status = IntegrationStatus::Diverged;
                return out;
            }
            lo = std::min(lo, y[W]);
            hi = std::max(hi, y[W]);

            if (hit_surface) {
                region = detail::select_region(sys, y, tol);
                k1 = sys.derivative(t, y, region);
                if (h_try < settings.min_step) {
                    if (++stalled > 1000) {
                        out.status = IntegrationStatus::StepUnderflow;
                        return out;
                    }
                } else {
                    stalled = 0;
                }
            } else {
                k1 = adaptive ? k_new : sys.derivative(t, y, region);
                stalled = 0;
            }
        }
        out.strobe.insert(out.strobe.end(), y.begin(), y.end());
        out.period_min.push_back(lo);
        out.period_max.push_back(hi);
    }
    return out;
}

}  // namespace basinstab

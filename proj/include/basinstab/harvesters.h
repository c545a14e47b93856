#pragma once

// Dimensionless models of four bistable energy harvesters.
//
// State ordering (second-order equations reduced by appending velocities):
//   s1: (x, dx, dq)                 x mechanical displacement, dq coil current
//   s2: (X, dX, Y, dY, I)           X magnet, Y elastic boundary, I current
//   s3: (y, dy, V)                  y beam tip, V piezo voltage
//   s4: (z1, dz1, z2, dz2, v1, v2)  two coupled beams and their voltages
// The well coordinate is component 0 for every model.

#include "basinstab/ode.h"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace basinstab {

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnknownParameter : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class MonostableParameters : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class P>
struct ParamField {
    std::string_view name;
    double P::*member;
};

struct S1Params {
    double gamma1 = 0.95;
    double gamma2 = 0.95;
    double theta = 0.0;
    double phi = 0.0;
    double epsilon = 0.0;
    double lambda = 0.0;
    double P = 0.0;
    double Omega = 1.0;

    static constexpr std::string_view kSystemId = "s1";
    static constexpr std::string_view kFrequencyName = "Omega";
    static constexpr std::string_view kAmplitudeName = "P";
    static constexpr std::array<ParamField<S1Params>, 8> kFields{{
        {"gamma1", &S1Params::gamma1},
        {"gamma2", &S1Params::gamma2},
        {"theta", &S1Params::theta},
        {"phi", &S1Params::phi},
        {"epsilon", &S1Params::epsilon},
        {"lambda", &S1Params::lambda},
        {"P", &S1Params::P},
        {"Omega", &S1Params::Omega},
    }};

    void validate() const;
};

// Measured component values of the classical electromagnetic harvester.
struct S1PhysicalParams {
    double m = 0.2;       // kg
    double l0 = 0.114;    // m
    double h1 = 0.95 * 0.114;
    double h2 = 0.95 * 0.114;
    double Lc = 1.463;    // H
    double alpha = 30.0;  // N/A
    double c = 0.35;      // N s/m
    double k = 1500.0;    // N/m
    double R = 2200.0;    // Ohm
    double i0 = 30.0 * 0.114 / 1.463;  // A, chosen so that epsilon = 1
    double A = 0.0;       // N, excitation force amplitude
    double omega = 0.0;   // rad/s, excitation frequency

    double natural_frequency() const { return std::sqrt(k / m); }
};

S1Params s1_from_physical(const S1PhysicalParams& pp);

struct S2Params {
    double lambda = 4.0;
    double eta1 = 0.92;
    double eta2 = 1.75;
    double phi1 = 0.005;
    double phi2 = 0.02;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double theta = 20.0;
    double epsilon = 13.13;
    double rho = 0.005;
    double P = 0.0;
    double omega = 1.0;

    static constexpr std::string_view kSystemId = "s2";
    static constexpr std::string_view kFrequencyName = "omega";
    static constexpr std::string_view kAmplitudeName = "P";
    static constexpr std::array<ParamField<S2Params>, 12> kFields{{
        {"lambda", &S2Params::lambda},
        {"eta1", &S2Params::eta1},
        {"eta2", &S2Params::eta2},
        {"phi1", &S2Params::phi1},
        {"phi2", &S2Params::phi2},
        {"mu1", &S2Params::mu1},
        {"mu2", &S2Params::mu2},
        {"theta", &S2Params::theta},
        {"epsilon", &S2Params::epsilon},
        {"rho", &S2Params::rho},
        {"P", &S2Params::P},
        {"omega", &S2Params::omega},
    }};

    void validate() const;
};

struct S3Params {
    double xi1 = 0.08;
    double xi2 = 0.05;
    double beta = 0.25;
    double delta = 0.5;
    double kappa = 0.044721359549995794;  // sqrt(0.002)
    double alpha = 0.4;
    double K = 100.0;
    double d = 0.6;
    double f = 0.0;
    double omega = 1.0;

    static constexpr std::string_view kSystemId = "s3";
    static constexpr std::string_view kFrequencyName = "omega";
    static constexpr std::string_view kAmplitudeName = "f";
    static constexpr std::array<ParamField<S3Params>, 10> kFields{{
        {"xi1", &S3Params::xi1},
        {"xi2", &S3Params::xi2},
        {"beta", &S3Params::beta},
        {"delta", &S3Params::delta},
        {"kappa", &S3Params::kappa},
        {"alpha", &S3Params::alpha},
        {"K", &S3Params::K},
        {"d", &S3Params::d},
        {"f", &S3Params::f},
        {"omega", &S3Params::omega},
    }};

    void validate() const;
};

struct S4Params {
    double zeta1 = 0.025;
    double zeta2 = 0.025;
    double alpha1 = -2.0;
    double alpha2 = -1.0;
    double beta1 = 1.0;
    double beta2 = 1.0;
    double chi1 = 0.05;
    double chi2 = 0.05;
    double kappa1 = 0.5;
    double kappa2 = 0.5;
    double rho = 1.0;
    double Omega_s = 0.25;
    double phi1 = 0.05;
    double phi2 = 0.05;
    double gamma = 0.0;
    double Omega = 1.0;
    // Power of the nonlinear restitution terms beta_i * z_i^n.
    int beta_exponent = 3;

    static constexpr std::string_view kSystemId = "s4";
    static constexpr std::string_view kFrequencyName = "Omega";
    static constexpr std::string_view kAmplitudeName = "gamma";
    static constexpr std::array<ParamField<S4Params>, 16> kFields{{
        {"zeta1", &S4Params::zeta1},
        {"zeta2", &S4Params::zeta2},
        {"alpha1", &S4Params::alpha1},
        {"alpha2", &S4Params::alpha2},
        {"beta1", &S4Params::beta1},
        {"beta2", &S4Params::beta2},
        {"chi1", &S4Params::chi1},
        {"chi2", &S4Params::chi2},
        {"kappa1", &S4Params::kappa1},
        {"kappa2", &S4Params::kappa2},
        {"rho", &S4Params::rho},
        {"Omega_s", &S4Params::Omega_s},
        {"phi1", &S4Params::phi1},
        {"phi2", &S4Params::phi2},
        {"gamma", &S4Params::gamma},
        {"Omega", &S4Params::Omega},
    }};

    void validate() const;
};

using S1State = StateArray<3>;
using S2State = StateArray<5>;
using S3State = StateArray<3>;
using S4State = StateArray<6>;

inline S1State s1_rhs(double t, const S1State& y, const S1Params& p) {
    const double x = y[0];
    const double v = y[1];
    const double current = y[2];
    const double restoring = x * (1.0 - 1.0 / std::sqrt(x * x + p.gamma1 * p.gamma1)) +
                             x * (1.0 - 1.0 / std::sqrt(x * x + p.gamma2 * p.gamma2));
    return {v, -restoring + p.theta * current + p.P * std::cos(p.Omega * t) - p.phi * v,
            -p.epsilon * v - p.lambda * current};
}

inline S2State s2_rhs(double t, const S2State& y, const S2Params& p) {
    const double X = y[0];
    const double dX = y[1];
    const double Y = y[2];
    const double dY = y[3];
    const double I = y[4];
    const double gap = 1.0 - Y;
    const double stretch = 1.0 - 1.0 / std::sqrt(X * X + p.eta1 * p.eta1 * gap * gap);
    const double boundary = 1.0 - 1.0 / std::sqrt(1.0 + p.eta2 * p.eta2 * Y * Y);
    const double ddX = p.P * std::cos(p.omega * t) - p.rho * I - X * stretch - p.phi1 * dX;
    const double ddY = -(p.lambda / p.mu1) * Y - 2.0 * (p.lambda / p.mu2) * Y * boundary +
                       p.lambda * gap * stretch - p.phi2 * dY;
    return {dX, ddX, dY, ddY, p.epsilon * dX - p.theta * I};
}

// Unilateral stop force; `contact` selects the y <= -d branch.
inline double s3_stop_force(double y, double dy, const S3Params& p, bool contact) {
    return contact ? 2.0 * p.xi2 * dy + p.K * (y + p.d) : 0.0;
}

inline S3State s3_rhs(double t, const S3State& y, const S3Params& p, Region region) {
    const double pos = y[0];
    const double vel = y[1];
    const double V = y[2];
    const double g = s3_stop_force(pos, vel, p, region == Region::Negative);
    const double acc = -2.0 * p.xi1 * vel + pos - p.beta * pos - p.delta * pos * pos * pos - g +
                       p.kappa * p.kappa * V + p.f * std::cos(p.omega * t);
    return {vel, acc, -p.alpha * V - vel};
}

// Branch chosen from the position alone; returns the region used.
inline std::pair<S3State, Region> s3_rhs(double t, const S3State& y, const S3Params& p) {
    const Region r = y[0] > -p.d ? Region::Positive : Region::Negative;
    return {s3_rhs(t, y, p, r), r};
}

inline double int_pow(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

inline S4State s4_rhs(double t, const S4State& y, const S4Params& p) {
    const double z1 = y[0];
    const double dz1 = y[1];
    const double z2 = y[2];
    const double dz2 = y[3];
    const double v1 = y[4];
    const double v2 = y[5];
    const double base = p.gamma * p.Omega * p.Omega * std::sin(p.Omega * t);  // -z_b''
    const double rel = z2 - z1;
    const double drel = dz2 - dz1;
    const double ddz1 = base - 2.0 * p.zeta1 * dz1 + 2.0 * p.zeta2 * drel - (1.0 + p.alpha1) * z1 -
                        p.beta1 * int_pow(z1, p.beta_exponent) + p.rho * p.Omega_s * p.Omega_s * rel +
                        p.chi1 * v1 - p.chi2 * v2;
    const double ddz2 = (base - 2.0 * p.zeta2 * drel - p.alpha2 * z2 - p.beta2 * int_pow(z2, p.beta_exponent) -
                         p.rho * p.Omega_s * rel + p.chi2 * v2) /
                        p.rho;
    return {dz1, ddz1, dz2, ddz2, -p.phi1 * v1 - p.kappa1 * dz1, -p.phi2 * v2 - p.kappa2 * drel};
}

// OdeSystem adaptors used by the integrator.
struct S1System {
    static constexpr std::size_t kDimension = 3;
    static constexpr std::size_t kWellIndex = 0;
    static constexpr bool kPiecewise = false;
    using State = S1State;
    S1Params p;
    State derivative(double t, const State& y, Region) const { return s1_rhs(t, y, p); }
};

struct S2System {
    static constexpr std::size_t kDimension = 5;
    static constexpr std::size_t kWellIndex = 0;
    static constexpr bool kPiecewise = false;
    using State = S2State;
    S2Params p;
    State derivative(double t, const State& y, Region) const { return s2_rhs(t, y, p); }
};

struct S3System {
    static constexpr std::size_t kDimension = 3;
    static constexpr std::size_t kWellIndex = 0;
    static constexpr bool kPiecewise = true;
    using State = S3State;
    S3Params p;
    State derivative(double t, const State& y, Region r) const { return s3_rhs(t, y, p, r); }
    double switching(const State& y) const { return y[0] + p.d; }
    double switching_rate(const State& y) const { return y[1]; }
};

struct S4System {
    static constexpr std::size_t kDimension = 6;
    static constexpr std::size_t kWellIndex = 0;
    static constexpr bool kPiecewise = false;
    using State = S4State;
    S4Params p;
    State derivative(double t, const State& y, Region) const { return s4_rhs(t, y, p); }
};

template <class P>
struct SystemFor;
template <>
struct SystemFor<S1Params> {
    using type = S1System;
};
template <>
struct SystemFor<S2Params> {
    using type = S2System;
};
template <>
struct SystemFor<S3Params> {
    using type = S3System;
};
template <>
struct SystemFor<S4Params> {
    using type = S4System;
};

struct WellGeometry {
    std::size_t well_coordinate_index = 0;
    double unstable_point = 0.0;
    double left_bound = 0.0;
    double right_bound = 0.0;
};

WellGeometry well_geometry(const S1Params& p);
WellGeometry well_geometry(const S2Params& p);
WellGeometry well_geometry(const S3Params& p);
WellGeometry well_geometry(const S4Params& p);

// Static restoring force along the well coordinate with every other
// coordinate at rest (S2: Y frozen at 0; S4: z2 = z1).
double s1_static_force(double x, const S1Params& p);
double s2_static_force(double X, const S2Params& p);
double s3_static_force(double y, const S3Params& p);
double s4_static_force(double z, const S4Params& p);

// A parameter vector for any of the four models, addressable by name.
class HarvesterModel {
public:
    using Variant = std::variant<S1Params, S2Params, S3Params, S4Params>;

    HarvesterModel() = default;
    HarvesterModel(Variant v) : params_(std::move(v)) {}

    static HarvesterModel reference(std::string_view system_id);
    static std::vector<std::string> system_ids() { return {"s1", "s2", "s3", "s4"}; }

    std::string system_id() const;
    std::size_t dimension() const;
    std::vector<std::string> parameter_names() const;
    bool has(std::string_view name) const;
    double get(std::string_view name) const;
    void set(std::string_view name, double value);

    double frequency() const;
    double amplitude() const;
    void set_excitation(double frequency, double amplitude);
    std::string frequency_name() const;
    std::string amplitude_name() const;

    WellGeometry wells() const;
    void validate() const;

    const Variant& params() const { return params_; }
    Variant& params() { return params_; }

    template <class F>
    decltype(auto) visit(F&& f) const {
        return std::visit(std::forward<F>(f), params_);
    }

private:
    Variant params_{S1Params{}};
};

// Reference presets: "s1-ref" .. "s4-ref" or the bare system id.
HarvesterModel preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace basinstab

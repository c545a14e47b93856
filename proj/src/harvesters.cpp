#include "basinstab/harvesters.h"

#include <cmath>
#include <functional>
#include <sstream>

namespace basinstab {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

template <class P>
void require_finite(const P& p) {
    for (const auto& f : P::kFields)
        require(std::isfinite(p.*(f.member)), std::string(P::kSystemId) + "." + std::string(f.name) + " must be finite");
}

template <class P>
double* find_field(P& p, std::string_view name) {
    for (const auto& f : P::kFields)
        if (f.name == name) return &(p.*(f.member));
    return nullptr;
}

template <class P>
const double* find_field(const P& p, std::string_view name) {
    for (const auto& f : P::kFields)
        if (f.name == name) return &(p.*(f.member));
    return nullptr;
}

// Root of f in [a, b] assuming a sign change.
double bisect(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a);
    for (int i = 0; i < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

void S1Params::validate() const {
    require_finite(*this);
    require(gamma1 > 0.0 && gamma1 < 1.0, "s1.gamma1 must lie in (0, 1) for bistability");
    require(gamma2 > 0.0 && gamma2 < 1.0, "s1.gamma2 must lie in (0, 1) for bistability");
    require(phi >= 0.0, "s1.phi (damping) must be >= 0");
    require(lambda >= 0.0, "s1.lambda (electrical dissipation) must be >= 0");
    require(Omega >= 0.0, "s1.Omega must be >= 0");
}

void S2Params::validate() const {
    require_finite(*this);
    for (const auto& f : kFields)
        require(this->*(f.member) >= 0.0, "s2." + std::string(f.name) + " must be >= 0");
    require(mu1 > 0.0 && mu2 > 0.0, "s2.mu1 and s2.mu2 must be > 0");
    require(eta1 > 0.0 && eta1 < 1.0, "s2.eta1 must lie in (0, 1) for bistability");
}

void S3Params::validate() const {
    require_finite(*this);
    require(delta > 0.0, "s3.delta must be > 0");
    require(beta < 1.0, "s3.beta must be < 1 so the origin is unstable");
    require(K > 0.0, "s3.K (stop stiffness) must be > 0");
    require(d > 0.0, "s3.d (stop clearance) must be > 0");
    require(xi1 >= 0.0 && xi2 >= 0.0, "s3.xi1 and s3.xi2 (damping) must be >= 0");
    require(alpha >= 0.0, "s3.alpha must be >= 0");
    require(omega >= 0.0, "s3.omega must be >= 0");
}

void S4Params::validate() const {
    require_finite(*this);
    require(rho > 0.0, "s4.rho (mass ratio) must be > 0");
    require(zeta1 >= 0.0 && zeta2 >= 0.0, "s4.zeta1 and s4.zeta2 (damping) must be >= 0");
    require(phi1 >= 0.0 && phi2 >= 0.0, "s4.phi1 and s4.phi2 must be >= 0");
    require(1.0 + alpha1 < 0.0, "s4 requires 1 + alpha1 < 0 (double-well linear part)");
    require(alpha2 < 0.0, "s4.alpha2 must be < 0 (double-well linear part)");
    require(beta_exponent >= 1, "s4.beta_exponent must be >= 1");
    require(Omega >= 0.0, "s4.Omega must be >= 0");
}

S1Params s1_from_physical(const S1PhysicalParams& pp) {
    const std::pair<const char*, double> positive[] = {{"m", pp.m},   {"l0", pp.l0}, {"h1", pp.h1},
                                                       {"h2", pp.h2}, {"Lc", pp.Lc}, {"alpha", pp.alpha},
                                                       {"c", pp.c},   {"k", pp.k},   {"R", pp.R},
                                                       {"i0", pp.i0}};
    for (const auto& [name, v] : positive)
        if (!(v > 0.0)) throw ParameterError(std::string("NonPositiveParameter: ") + name + " must be > 0");
    if (pp.A < 0.0 || pp.omega < 0.0) throw ParameterError("NonPositiveParameter: A and omega must be >= 0");

    const double wn = pp.natural_frequency();
    S1Params p;
    p.gamma1 = pp.h1 / pp.l0;
    p.gamma2 = pp.h2 / pp.l0;
    p.theta = pp.alpha * pp.i0 / (pp.l0 * pp.k);
    p.phi = pp.c / std::sqrt(pp.k * pp.m);
    p.epsilon = pp.alpha * pp.l0 / (pp.Lc * pp.i0);
    p.lambda = pp.R / (pp.Lc * wn);
    p.P = pp.A / (pp.l0 * pp.k);
    p.Omega = pp.omega / wn;
    return p;
}

double s1_static_force(double x, const S1Params& p) {
    return -(x * (1.0 - 1.0 / std::sqrt(x * x + p.gamma1 * p.gamma1)) +
             x * (1.0 - 1.0 / std::sqrt(x * x + p.gamma2 * p.gamma2)));
}

double s2_static_force(double X, const S2Params& p) {
    return -X * (1.0 - 1.0 / std::sqrt(X * X + p.eta1 * p.eta1));
}

double s3_static_force(double y, const S3Params& p) {
    return (1.0 - p.beta) * y - p.delta * y * y * y - s3_stop_force(y, 0.0, p, y <= -p.d);
}

double s4_static_force(double z, const S4Params& p) {
    return -(1.0 + p.alpha1) * z - p.beta1 * int_pow(z, p.beta_exponent);
}

WellGeometry well_geometry(const S1Params& p) {
    if (p.gamma1 == p.gamma2) {
        if (!(p.gamma1 > 0.0 && p.gamma1 < 1.0)) throw MonostableParameters("s1: gamma must lie in (0, 1)");
        const double x = std::sqrt(1.0 - p.gamma1 * p.gamma1);
        return {0, 0.0, -x, x};
    }
    auto f = [&](double x) { return s1_static_force(x, p); };
    const double eps = 1e-9;
    if (!(f(eps) > 0.0)) throw MonostableParameters("s1: origin is not unstable for these gammas");
    double hi = 1.0;
    while (f(hi) >= 0.0 && hi < 1e6) hi *= 2.0;
    const double x = bisect(f, eps, hi);
    return {0, 0.0, -x, x};
}

WellGeometry well_geometry(const S2Params& p) {
    if (!(p.eta1 > 0.0 && p.eta1 < 1.0)) throw MonostableParameters("s2: eta1 must lie in (0, 1)");
    const double x = std::sqrt(1.0 - p.eta1 * p.eta1);
    return {0, 0.0, -x, x};
}

WellGeometry well_geometry(const S3Params& p) {
    if (!(p.beta < 1.0 && p.delta > 0.0)) throw MonostableParameters("s3: requires beta < 1 and delta > 0");
    const double right = std::sqrt((1.0 - p.beta) / p.delta);
    if (!(p.d > 0.0)) throw MonostableParameters("s3: stop clearance must be positive");
    return {0, 0.0, -p.d, right};
}

WellGeometry well_geometry(const S4Params& p) {
    const int n = p.beta_exponent;
    if (n < 2 || n % 2 == 0 || !(1.0 + p.alpha1 < 0.0) || !(p.beta1 > 0.0))
        throw MonostableParameters("s4: no symmetric pair of stable equilibria for z1");
    const double z = std::pow(-(1.0 + p.alpha1) / p.beta1, 1.0 / (n - 1));
    return {0, 0.0, -z, z};
}

HarvesterModel HarvesterModel::reference(std::string_view system_id) {
    if (system_id == "s1") {
        S1Params p = s1_from_physical(S1PhysicalParams{});
        p.P = 1.25;
        p.Omega = 0.3;
        return HarvesterModel(p);
    }
    if (system_id == "s2") {
        S2Params p;
        p.P = 0.3;
        p.omega = 0.5;
        return HarvesterModel(p);
    }
    if (system_id == "s3") {
        S3Params p;
        p.f = 0.3;
        p.omega = 0.8;
        return HarvesterModel(p);
    }
    if (system_id == "s4") {
        S4Params p;
        p.gamma = 0.5;
        p.Omega = 0.8;
        return HarvesterModel(p);
    }
    throw UnknownParameter("unknown system id '" + std::string(system_id) + "' (expected s1|s2|s3|s4)");
}

std::string HarvesterModel::system_id() const {
    return visit([](const auto& p) { return std::string(std::decay_t<decltype(p)>::kSystemId); });
}

std::size_t HarvesterModel::dimension() const {
    return visit([](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        return SystemFor<P>::type::kDimension;
    });
}

std::vector<std::string> HarvesterModel::parameter_names() const {
    return visit([](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        std::vector<std::string> names;
        for (const auto& f : P::kFields) names.emplace_back(f.name);
        return names;
    });
}

bool HarvesterModel::has(std::string_view name) const {
    return visit([&](const auto& p) { return find_field(p, name) != nullptr; });
}

double HarvesterModel::get(std::string_view name) const {
    return visit([&](const auto& p) {
        const double* v = find_field(p, name);
        if (!v) throw UnknownParameter("parameter '" + std::string(name) + "' does not exist in " + system_id());
        return *v;
    });
}

void HarvesterModel::set(std::string_view name, double value) {
    std::visit(
        [&](auto& p) {
            double* v = find_field(p, name);
            if (!v) throw UnknownParameter("parameter '" + std::string(name) + "' does not exist in " + system_id());
            *v = value;
        },
        params_);
}

double HarvesterModel::frequency() const {
    return get(frequency_name());
}

double HarvesterModel::amplitude() const {
    return get(amplitude_name());
}

void HarvesterModel::set_excitation(double frequency, double amplitude) {
    std::visit(
        [&](auto& p) {
            using P = std::decay_t<decltype(p)>;
            *find_field(p, P::kFrequencyName) = frequency;
            *find_field(p, P::kAmplitudeName) = amplitude;
        },
        params_);
}

std::string HarvesterModel::frequency_name() const {
    return visit([](const auto& p) { return std::string(std::decay_t<decltype(p)>::kFrequencyName); });
}

std::string HarvesterModel::amplitude_name() const {
    return visit([](const auto& p) { return std::string(std::decay_t<decltype(p)>::kAmplitudeName); });
}

WellGeometry HarvesterModel::wells() const {
    return visit([](const auto& p) { return well_geometry(p); });
}

void HarvesterModel::validate() const {
    visit([](const auto& p) { p.validate(); });
}

HarvesterModel preset(std::string_view name) {
    std::string_view id = name;
    if (id.size() > 4 && id.substr(id.size() - 4) == "-ref") id = id.substr(0, id.size() - 4);
    return HarvesterModel::reference(id);
}

std::vector<std::string> preset_names() {
    return {"s1-ref", "s2-ref", "s3-ref", "s4-ref"};
}

}  // namespace basinstab

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "slowfast/errors.hpp"
#include "slowfast/ode.hpp"

namespace slowfast {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PitchforkParams {
    double a = 3.0;
    double b = 2.0;
    double eps = 0.1;
    bool bistable() const { return a > 2.0 * std::sqrt(b); }
    void validate() const {
        if (!(a > 0)) throw UsageError("a must be > 0");
        if (!(b > 0)) throw UsageError("b must be > 0");
        if (!(eps > 0)) throw UsageError("eps must be > 0");
    }
};

struct TanhParams {
    double a = 5.0;
    double b = 10.0;
    double eps = 0.1;
    void validate() const {
        if (!(a > 0)) throw UsageError("a must be > 0");
        if (!(b > 0)) throw UsageError("b must be > 0");
        if (!(eps > 0)) throw UsageError("eps must be > 0");
    }
};

struct RotatorParams {
    double omega = -4.0;
    double eta = 10.0;
    double alpha = kPi / 2;
    double eps = 0.1;
    void validate() const {
        if (!(eta >= 0)) throw UsageError("eta must be >= 0");
        if (!(eps > 0)) throw UsageError("eps must be > 0");
        if (!(alpha > -kPi) || !(alpha <= kPi))
            throw UsageError("alpha must lie in (-pi, pi]");
    }
};

struct NetworkParams {
    std::vector<double> omegas;
    double kappa = 1.0;
    double eta = 10.0;
    double alpha = kPi / 2;
    double eps = 0.1;
    int n() const { return static_cast<int>(omegas.size()); }
    void validate() const {
        if (omegas.empty()) throw UsageError("network needs N >= 1 frequencies");
        for (double w : omegas)
            if (!std::isfinite(w)) throw UsageError("omega_i must be finite");
        if (!(eps > 0)) throw UsageError("eps must be > 0");
    }
};

// --- right-hand sides -------------------------------------------------------

inline void pitchfork_rhs(const PitchforkParams& p, const double* s, double* d) {
    const double x = s[0], mu = s[1];
    d[0] = x * (mu - x * x);
    d[1] = p.eps * (-mu + p.a * x - p.b);
}

inline void tanh_rhs(const TanhParams& p, const double* s, double* d) {
    const double x = s[0], mu = s[1];
    d[0] = x * (std::tanh(mu) + 2.0 - x);
    d[1] = p.eps * (-mu + p.a * x - p.b);
}

inline void rotator_rhs(const RotatorParams& p, const double* s, double* d) {
    const double phi = s[0], mu = s[1];
    d[0] = p.omega + mu - std::sin(phi);
    d[1] = p.eps * (-mu + p.eta * (1.0 - std::sin(phi + p.alpha)));
}

inline void network_rhs(const NetworkParams& p, const double* s, double* d,
                        int state_len) {
    const int N = p.n();
    if (state_len != N + 1)
        throw DimensionMismatch("network state must have length N+1");
    const double mu = s[N];
    // kappa/N sum_j sin(phi_j - phi_i) = kappa/N (S cos phi_i - C sin phi_i)
    double S = 0, C = 0, X = 0;
    for (int j = 0; j < N; ++j) {
        S += std::sin(s[j]);
        C += std::cos(s[j]);
        X += std::sin(s[j] + p.alpha);
    }
    X /= N;
    const double kn = p.kappa / N;
    for (int i = 0; i < N; ++i) {
        const double si = std::sin(s[i]), ci = std::cos(s[i]);
        d[i] = p.omegas[i] + mu - si + kn * (S * ci - C * si);
    }
    d[N] = p.eps * (-mu + p.eta * (1.0 - X));
}

// --- unified system wrapper -------------------------------------------------

enum class ModelTag { Pitchfork, Tanh, Rotator, Network };

inline std::string to_string(ModelTag t) {
    switch (t) {
        case ModelTag::Pitchfork: return "pitchfork";
        case ModelTag::Tanh: return "tanh";
        case ModelTag::Rotator: return "rotator";
        case ModelTag::Network: return "network";
    }
    return "?";
}

// LayerRhs evaluates the fast subsystem with the slow variable frozen.
using LayerRhs = std::function<void(double mu, const double* yf, double* dyf)>;

struct SlowFastSystem {
    ModelTag tag;
    int fast_dim = 1;  // slow_dim is always 1, stored last
    double eps = 0.1;
    Rhs rhs;            // full system, dimension fast_dim + 1
    LayerRhs layer_rhs;
    std::vector<bool> angular;  // per fast coordinate; integrated unwrapped
    std::map<std::string, double> param_record;

    int dim() const { return fast_dim + 1; }
};

inline SlowFastSystem make_pitchfork(const PitchforkParams& p) {
    p.validate();
    SlowFastSystem s;
    s.tag = ModelTag::Pitchfork;
    s.fast_dim = 1;
    s.eps = p.eps;
    s.rhs = [p](double, const double* y, double* d) { pitchfork_rhs(p, y, d); };
    s.layer_rhs = [](double mu, const double* yf, double* dyf) {
        dyf[0] = yf[0] * (mu - yf[0] * yf[0]);
    };
    s.angular = {false};
    s.param_record = {{"a", p.a}, {"b", p.b}, {"eps", p.eps}};
    return s;
}

inline SlowFastSystem make_tanh(const TanhParams& p) {
    p.validate();
    SlowFastSystem s;
    s.tag = ModelTag::Tanh;
    s.fast_dim = 1;
    s.eps = p.eps;
    s.rhs = [p](double, const double* y, double* d) { tanh_rhs(p, y, d); };
    s.layer_rhs = [](double mu, const double* yf, double* dyf) {
        dyf[0] = yf[0] * (std::tanh(mu) + 2.0 - yf[0]);
    };
    s.angular = {false};
    s.param_record = {{"a", p.a}, {"b", p.b}, {"eps", p.eps}};
    return s;
}

inline SlowFastSystem make_rotator(const RotatorParams& p) {
    p.validate();
    SlowFastSystem s;
    s.tag = ModelTag::Rotator;
    s.fast_dim = 1;
    s.eps = p.eps;
    s.rhs = [p](double, const double* y, double* d) { rotator_rhs(p, y, d); };
    s.layer_rhs = [p](double mu, const double* yf, double* dyf) {
        dyf[0] = p.omega + mu - std::sin(yf[0]);
    };
    s.angular = {true};
    s.param_record = {
        {"omega", p.omega}, {"eta", p.eta}, {"alpha", p.alpha}, {"eps", p.eps}};
    return s;
}

inline SlowFastSystem make_network(const NetworkParams& p) {
    p.validate();
    const int N = p.n();
    SlowFastSystem s;
    s.tag = ModelTag::Network;
    s.fast_dim = N;
    s.eps = p.eps;
    s.rhs = [p, N](double, const double* y, double* d) {
        network_rhs(p, y, d, N + 1);
    };
    s.layer_rhs = [p, N](double mu, const double* yf, double* dyf) {
        double S = 0, C = 0;
        for (int j = 0; j < N; ++j) {
            S += std::sin(yf[j]);
            C += std::cos(yf[j]);
        }
        const double kn = p.kappa / N;
        for (int i = 0; i < N; ++i) {
            const double si = std::sin(yf[i]), ci = std::cos(yf[i]);
            dyf[i] = p.omegas[i] + mu - si + kn * (S * ci - C * si);
        }
    };
    s.angular.assign(N, true);
    s.param_record = {{"kappa", p.kappa},
                      {"eta", p.eta},
                      {"alpha", p.alpha},
                      {"eps", p.eps},
                      {"N", static_cast<double>(N)}};
    for (int i = 0; i < N; ++i)
        s.param_record["omega" + std::to_string(i + 1)] = p.omegas[i];
    return s;
}

// --- critical manifolds -----------------------------------------------------

enum class BranchStability { Attracting, Repelling };

struct CriticalManifoldBranch {
    std::string name;
    std::function<double(double mu)> fast_value;  // fast coordinate on the branch
    double mu_min;
    double mu_max;
    BranchStability stability;
};

inline std::vector<CriticalManifoldBranch> critical_manifold(
    ModelTag tag, const std::map<std::string, double>& params) {
    const double inf = std::numeric_limits<double>::infinity();
    auto get = [&](const std::string& key) {
        auto it = params.find(key);
        if (it == params.end())
            throw UsageError("critical_manifold: missing parameter " + key);
        return it->second;
    };
    std::vector<CriticalManifoldBranch> out;
    switch (tag) {
        case ModelTag::Pitchfork:
            out.push_back({"S0a", [](double) { return 0.0; }, -inf, 0.0,
                           BranchStability::Attracting});
            out.push_back({"S0r", [](double) { return 0.0; }, 0.0, inf,
                           BranchStability::Repelling});
            out.push_back({"S1", [](double mu) { return std::sqrt(mu); }, 0.0,
                           inf, BranchStability::Attracting});
            break;
        case ModelTag::Tanh:
            out.push_back({"x0", [](double) { return 0.0; }, -inf, inf,
                           BranchStability::Repelling});
            out.push_back({"x*",
                           [](double mu) { return std::tanh(mu) + 2.0; }, -inf,
                           inf, BranchStability::Attracting});
            break;
        case ModelTag::Rotator: {
            const double w = get("omega");
            out.push_back({"phi_a",
                           [w](double mu) { return std::asin(mu + w); }, -w - 1,
                           -w + 1, BranchStability::Attracting});
            out.push_back({"phi_r",
                           [w](double mu) { return kPi - std::asin(mu + w); },
                           -w - 1, -w + 1, BranchStability::Repelling});
            break;
        }
        case ModelTag::Network:
            throw UnsupportedModel(
                "critical_manifold: network manifold is not available "
                "analytically");
    }
    return out;
}

// Wrap angular coordinates to [0, 2pi); presentation only.
inline std::vector<double> wrap_phase(const SlowFastSystem& sys,
                                      const std::vector<double>& state) {
    std::vector<double> out = state;
    for (int i = 0; i < sys.fast_dim; ++i) {
        if (!sys.angular[i]) continue;
        double v = std::fmod(out[i], kTwoPi);
        if (v < 0) v += kTwoPi;
        out[i] = v;
    }
    return out;
}

}  // namespace slowfast

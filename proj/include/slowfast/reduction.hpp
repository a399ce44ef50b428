#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "slowfast/errors.hpp"
#include "slowfast/models.hpp"
#include "slowfast/ode.hpp"
#include "slowfast/quadrature.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

// Slow subsystem dmu/dtau = f(mu) on the slow time tau = eps*t, with its
// potential U, U' = -f.
struct ReducedSystem {
    std::function<double(double)> f;
    std::function<double(double)> potential;
    double mu_min;
    double mu_max;
    std::string provenance;  // "analytic" or "numeric-averaged"
};

inline double heaviside(double mu) { return mu >= 0.0 ? 1.0 : 0.0; }

inline ReducedSystem reduced_pitchfork(const PitchforkParams& p) {
    p.validate();
    const double a = p.a, b = p.b;
    const double inf = std::numeric_limits<double>::infinity();
    ReducedSystem r;
    r.f = [a, b](double mu) {
        return -mu + a * std::sqrt(mu * heaviside(mu)) - b;
    };
    r.potential = [a, b](double mu) {
        const double mh = mu * heaviside(mu);
        return 0.5 * mu * mu + b * mu - (2.0 / 3.0) * a * mh * std::sqrt(mh);
    };
    r.mu_min = -inf;
    r.mu_max = inf;
    r.provenance = "analytic";
    return r;
}

inline ReducedSystem reduced_tanh(const TanhParams& p) {
    p.validate();
    const double a = p.a, b = p.b;
    const double inf = std::numeric_limits<double>::infinity();
    ReducedSystem r;
    r.f = [a, b](double mu) { return -mu - b + a * (std::tanh(mu) + 2.0); };
    // -int f = mu^2/2 - (2a - b) mu - a ln cosh mu
    r.potential = [a, b](double mu) {
        // log(cosh) without overflow for large |mu|
        const double lc = std::abs(mu) + std::log1p(std::exp(-2.0 * std::abs(mu))) -
                          std::log(2.0);
        return 0.5 * mu * mu - (2.0 * a - b) * mu - a * lc;
    };
    r.mu_min = -inf;
    r.mu_max = inf;
    r.provenance = "analytic";
    return r;
}

// Time average of sin(phi(t)+alpha) along the free rotation of the fast
// subsystem, valid outside the locking stripe |mu+omega| > 1. The square-root
// branch is chosen so the average stays bounded for both rotation directions.
inline double analytic_rotation_average(const RotatorParams& p, double mu) {
    const double u = p.omega + mu;
    if (std::abs(u) <= 1.0)
        throw DomainError(
            "analytic_rotation_average: |mu+omega| <= 1 (inside stripe)");
    const double root = std::sqrt(u * u - 1.0);
    const double s = (u > 0) ? 1.0 : -1.0;
    return (u - s * root) * std::cos(p.alpha);
}

// Averaged sin(phi+alpha) seen by the slow equation: adiabatic elimination on
// the attracting branch inside the stripe, rotation average outside.
inline double rotator_effective_sin(const RotatorParams& p, double mu) {
    const double u = p.omega + mu;
    if (std::abs(u) <= 1.0)
        return u * std::cos(p.alpha) +
               std::sqrt(1.0 - u * u) * std::sin(p.alpha);
    return analytic_rotation_average(p, mu);
}

inline ReducedSystem reduced_rotator(const RotatorParams& p) {
    p.validate();
    const double inf = std::numeric_limits<double>::infinity();
    ReducedSystem r;
    r.f = [p](double mu) {
        return -mu + p.eta * (1.0 - rotator_effective_sin(p, mu));
    };
    auto f = r.f;
    r.potential = [f](double mu) {
        return -adaptive_simpson(f, 0.0, mu, 1e-12);  // U(0) = 0
    };
    r.mu_min = -inf;
    r.mu_max = inf;
    r.provenance = "analytic";
    return r;
}

// --- numeric averaging for networks ----------------------------------------

struct AveragedSample {
    double mu;
    double g_bar;   // averaged slow drift
    double x_bar;   // time average of the mean field X
    double transient_cut;
    double window;
};

// Layer problem integrated over [0, 600]; [0, 100] discarded as transient;
// Hann-weighted mean on a 0.01 dense-output grid. The window taper kills the
// O(period / window) bias a plain trapezoid picks up from the partial period
// at the window edges.
inline AveragedSample numeric_average_network(const NetworkParams& p, double mu,
                                              std::uint64_t seed,
                                              double t_end = 600.0,
                                              double transient = 100.0,
                                              double sample_dt = 0.01) {
    p.validate();
    if (!std::isfinite(mu)) throw UsageError("mu must be finite");
    const int N = p.n();

    Philox rng(seed, 0x6176670000000000ull ^ static_cast<std::uint64_t>(N));
    std::vector<double> phi0(N);
    for (int i = 0; i < N; ++i) phi0[i] = rng.uniform(0.0, kTwoPi);

    const SlowFastSystem sys = make_network(p);
    OdeSpec spec;
    spec.dimension = N;
    spec.rhs = [&sys, mu](double, const double* y, double* d) {
        sys.layer_rhs(mu, y, d);
    };
    const Trajectory traj = integrate(spec, phi0, 0.0, t_end);

    const double window = t_end - transient;
    const std::size_t m =
        static_cast<std::size_t>(std::llround(window / sample_dt));
    double acc = 0.0;
    double wsum = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
        const double t = transient + sample_dt * static_cast<double>(k);
        const std::vector<double> y = dense_eval(traj, std::min(t, t_end));
        double X = 0.0;
        for (int i = 0; i < N; ++i) X += std::sin(y[i] + p.alpha);
        X /= N;
        const double s = std::sin(kPi * static_cast<double>(k) /
                                  static_cast<double>(m));
        const double w = s * s;
        acc += w * X;
        wsum += w;
    }
    const double x_bar = acc / wsum;
    return {mu, -mu + p.eta * (1.0 - x_bar), x_bar, transient, window};
}

enum class PotentialSign {
    MinusIntF,  // U = -int g  (double well, minima at stable equilibria)
    PlusIntG    // U = +int g
};

// Cumulative trapezoid of the averaged drift. Anchored so U(0) = 0 when 0 is
// inside the sampled range, else U at the smallest mu is 0.
inline std::vector<std::pair<double, double>> numeric_potential(
    const std::vector<AveragedSample>& samples,
    PotentialSign sign = PotentialSign::MinusIntF) {
    if (samples.size() < 2)
        throw UsageError("numeric_potential: need at least 2 samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].mu > samples[i - 1].mu))
            throw UnsortedInput("numeric_potential: samples must be sorted by mu");

    const double sgn = (sign == PotentialSign::MinusIntF) ? -1.0 : 1.0;
    std::vector<std::pair<double, double>> out;
    out.reserve(samples.size());
    double u = 0.0;
    out.emplace_back(samples[0].mu, 0.0);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double dmu = samples[i].mu - samples[i - 1].mu;
        u += sgn * 0.5 * (samples[i].g_bar + samples[i - 1].g_bar) * dmu;
        out.emplace_back(samples[i].mu, u);
    }
    // re-anchor at mu = 0 when covered
    if (out.front().first <= 0.0 && out.back().first >= 0.0) {
        double u0 = 0.0;
        for (std::size_t i = 1; i < out.size(); ++i) {
            if (out[i - 1].first <= 0.0 && out[i].first >= 0.0) {
                const double w = (out[i].first == out[i - 1].first)
                                     ? 0.0
                                     : (0.0 - out[i - 1].first) /
                                           (out[i].first - out[i - 1].first);
                u0 = out[i - 1].second + w * (out[i].second - out[i - 1].second);
                break;
            }
        }
        for (auto& [mu, uu] : out) uu -= u0;
    }
    return out;
}

}  // namespace slowfast

#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "slowfast/basins.hpp"
#include "slowfast/equilibria.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/models.hpp"
#include "slowfast/quadrature.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

struct SweepPoint {
    double eps;
    McEstimate estimate;
};

// One mc_volume per epsilon over the same region and trial count; per-epsilon
// seeds are derived from the master seed by index so the sweep order is
// immaterial.
inline std::vector<SweepPoint> volume_sweep(
    const std::function<BasinClassifier(double eps)>& make_classifier,
    const Box& region, const std::vector<double>& eps_list, long long trials,
    std::uint64_t master_seed, LabelKind target = LabelKind::RotatingOrbit,
    int threads = 1) {
    for (double e : eps_list)
        if (!(e > 0)) throw UsageError("volume_sweep: eps must be > 0");
    std::vector<SweepPoint> out;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const BasinClassifier cl = make_classifier(eps_list[i]);
        out.push_back({eps_list[i],
                       mc_volume(cl, region, trials, mix_seed(master_seed, i),
                                 target, threads)});
    }
    return out;
}

struct AffineFit {
    double intercept = 0;
    double slope = 0;
    double r2 = 0;
};

inline AffineFit fit_affine(const std::vector<double>& x,
                            const std::vector<double>& y,
                            const std::vector<double>* w = nullptr) {
    const std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
        sxx += wi * x[i] * x[i];
        sxy += wi * x[i] * y[i];
    }
    AffineFit f;
    const double det = sw * sxx - sx * sx;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / sw;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / sw;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w ? (*w)[i] : 1.0;
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += wi * r * r;
        ss_tot += wi * (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

struct ScalingPoint {
    double eps;
    double volume;
    double std_error;
};

struct ScalingFit {
    std::vector<ScalingPoint> points;    // included in the fit
    std::vector<ScalingPoint> excluded;  // V = 0, no log-scale information
    double log_A = 0;
    double C = 0;  // log V = log_A - C / eps
    double r2 = 0;
    std::vector<double> residuals;  // per included point
};

// Ordinary least squares of log V against 1/eps (unweighted by default;
// weights 1/stderr_logV^2 behind the flag).
inline ScalingFit fit_scaling(const std::vector<ScalingPoint>& pts,
                              bool weighted = false) {
    ScalingFit fit;
    std::vector<double> x, y, w;
    for (const auto& p : pts) {
        if (p.volume <= 0) {
            fit.excluded.push_back(p);
            continue;
        }
        fit.points.push_back(p);
        x.push_back(1.0 / p.eps);
        y.push_back(std::log(p.volume));
        const double se_log = p.std_error > 0 ? p.std_error / p.volume : 1.0;
        w.push_back(1.0 / (se_log * se_log));
    }
    if (fit.points.size() < 4)
        throw TooFewPoints("fit_scaling: need >= 4 points with V > 0");
    const AffineFit af = fit_affine(x, y, weighted ? &w : nullptr);
    fit.log_A = af.intercept;
    fit.C = -af.slope;
    fit.r2 = af.r2;
    for (std::size_t i = 0; i < x.size(); ++i)
        fit.residuals.push_back(y[i] - (af.intercept + af.slope * x[i]));
    return fit;
}

// --- predicted funnel exponent ---------------------------------------------

struct FunnelConstant {
    double c_pred = 0;     // normalized nonnegative exponent constant
    double raw = 0;        // signed integral as derived, for audit
    double mu_lo = 0, mu_hi = 0;
};

// Contraction exponent accumulated along the repelling critical branch
// phi*(mu) = pi - asin(mu + omega): quadrature of cos(phi*) over the slow
// drift between mu_lo and mu_hi (both inside the stripe).
inline FunnelConstant predicted_funnel_constant(const RotatorParams& p,
                                                double mu_lo, double mu_hi,
                                                double tol = 1e-12) {
    p.validate();
    if (mu_lo > mu_hi) std::swap(mu_lo, mu_hi);
    const double s_lo = -p.omega - 1.0, s_hi = -p.omega + 1.0;
    if (mu_lo < s_lo - 1e-12 || mu_hi > s_hi + 1e-12)
        throw UsageError(
            "predicted_funnel_constant: span must lie inside the stripe "
            "|mu+omega| <= 1");
    auto phi_star = [&](double mu) { return kPi - std::asin(mu + p.omega); };
    auto drift = [&](double mu) {
        return -mu + p.eta * (1.0 - std::sin(phi_star(mu) + p.alpha));
    };
    // the derivation divides by the slow drift; an averaged equilibrium on
    // the span makes the integral improper
    const int probes = 400;
    double prev = drift(mu_lo);
    for (int i = 1; i <= probes; ++i) {
        const double mu = mu_lo + (mu_hi - mu_lo) * i / probes;
        const double d = drift(mu);
        if (std::abs(d) < 1e-9 || prev * d < 0)
            throw SingularIntegrand(
                "predicted_funnel_constant: slow drift vanishes on the span");
        prev = d;
    }
    auto integrand = [&](double mu) {
        return std::cos(phi_star(mu)) / (mu - p.eta * (1.0 - std::sin(phi_star(mu) + p.alpha)));
    };
    FunnelConstant out;
    out.raw = adaptive_simpson(integrand, mu_lo, mu_hi, tol);
    out.c_pred = std::abs(out.raw);
    out.mu_lo = mu_lo;
    out.mu_hi = mu_hi;
    return out;
}

// --- funnel width vs epsilon ------------------------------------------------

struct WidthScalingResult {
    std::vector<std::pair<double, double>> widths;  // (eps, delta(mu_probe))
    AffineFit log_fit;                              // log delta vs 1/eps
};

// Funnel width at a fixed mu probe for one system instance. For the
// pitchfork the funnel is bounded by the invariant line x = 0, so the width
// is the manifold's x at the probe; for the rotator it is the gap between
// the two traced branches.
inline double funnel_width_at(const SlowFastSystem& sys,
                              const Equilibrium& saddle, const Box& trace_box,
                              double mu_probe, const ManifoldTraceOptions& opt) {
    auto [plus, minus] = trace_stable_manifold(sys, saddle, trace_box, opt);
    if (sys.tag == ModelTag::Pitchfork || sys.tag == ModelTag::Tanh) {
        for (const ManifoldCurve* c : {&plus, &minus}) {
            const auto fx = detail::first_crossing_fast(*c, mu_probe);
            if (fx && saddle.mu() < mu_probe) {
                // funnel branch: hugs the repelling line x = 0 past the saddle
                if (*fx < saddle.state[0]) return std::abs(*fx);
            }
        }
        throw RangeNotCovered("funnel_width_at: probe not covered by trace");
    }
    const auto prof = funnel_width_profile(plus, minus, {mu_probe});
    return prof.front().second;
}

inline WidthScalingResult width_scaling_check(
    const std::function<SlowFastSystem(double eps)>& make_system,
    const std::vector<double>& eps_list, double mu_probe, const Box& search_box,
    const Box& trace_box, ManifoldTraceOptions opt = {}) {
    WidthScalingResult out;
    std::vector<double> x, y;
    for (double eps : eps_list) {
        const SlowFastSystem sys = make_system(eps);
        const auto eqs = find_equilibria(sys, search_box, 12);
        const Equilibrium* saddle = nullptr;
        for (const auto& e : eqs)
            if (e.cls == EqClass::Saddle) saddle = &e;
        if (!saddle) throw NotASaddle("width_scaling_check: no saddle found");
        const double w = funnel_width_at(sys, *saddle, trace_box, mu_probe, opt);
        out.widths.emplace_back(eps, w);
        x.push_back(1.0 / eps);
        y.push_back(std::log(w));
    }
    out.log_fit = fit_affine(x, y);
    return out;
}

// Closed-form exponent of the pitchfork funnel gap along the repelling line
// x = 0: d(log delta)/dmu = mu / (eps * (-mu - b)), integrated from the
// saddle's mu to the probe. Expected slope of log delta vs 1/eps.
inline double pitchfork_gap_exponent(const PitchforkParams& p, double mu_from,
                                     double mu_to) {
    auto antider = [&](double mu) { return mu - p.b * std::log(mu + p.b); };
    return -(antider(mu_to) - antider(mu_from));
}

}  // namespace slowfast

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slowfast/errors.hpp"
#include "slowfast/models.hpp"
#include "slowfast/ode.hpp"

namespace slowfast {

enum class EqClass {
    StableNode,
    StableFocus,
    Saddle,
    UnstableNode,
    UnstableFocus,
    Nonhyperbolic
};

inline std::string to_string(EqClass c) {
    switch (c) {
        case EqClass::StableNode: return "stable-node";
        case EqClass::StableFocus: return "stable-focus";
        case EqClass::Saddle: return "saddle";
        case EqClass::UnstableNode: return "unstable-node";
        case EqClass::UnstableFocus: return "unstable-focus";
        case EqClass::Nonhyperbolic: return "nonhyperbolic";
    }
    return "?";
}

struct Equilibrium {
    std::vector<double> state;
    std::vector<std::complex<double>> eigenvalues;
    EqClass cls = EqClass::Nonhyperbolic;
    double residual = 0.0;

    double mu() const { return state.back(); }
    bool is_stable() const {
        return cls == EqClass::StableNode || cls == EqClass::StableFocus;
    }
};

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(const double* y) const {
        for (int i = 0; i < dim(); ++i)
            if (y[i] < lo[i] || y[i] > hi[i]) return false;
        return true;
    }
    // positive inside, zero on the boundary
    double inner_distance(const double* y) const {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i)
            d = std::min({d, y[i] - lo[i], hi[i] - y[i]});
        return d;
    }
};

inline std::vector<double> eval_rhs(const SlowFastSystem& sys,
                                    const std::vector<double>& state) {
    std::vector<double> d(sys.dim());
    sys.rhs(0.0, state.data(), d.data());
    return d;
}

inline double rhs_norm(const SlowFastSystem& sys,
                       const std::vector<double>& state) {
    double acc = 0;
    for (double v : eval_rhs(sys, state)) acc += v * v;
    return std::sqrt(acc);
}

// Central-difference Jacobian, step 1e-6*(1+|state_j|). Columns whose minus
// sample leaves the model domain (e.g. x < 0 on the pitchfork's invariant
// boundary) fall back to a one-sided difference.
inline Eigen::MatrixXd fd_jacobian(const SlowFastSystem& sys,
                                   const std::vector<double>& state) {
    const int n = sys.dim();
    Eigen::MatrixXd J(n, n);
    std::vector<double> yp = state, ym = state, fp(n), fm(n);
    for (int j = 0; j < n; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(state[j]));
        yp[j] = state[j] + h;
        ym[j] = state[j] - h;
        sys.rhs(0.0, yp.data(), fp.data());
        double denom = 2.0 * h;
        try {
            sys.rhs(0.0, ym.data(), fm.data());
        } catch (const DomainError&) {
            ym[j] = state[j];
            sys.rhs(0.0, ym.data(), fm.data());
            denom = h;
        }
        for (int i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / denom;
        yp[j] = state[j];
        ym[j] = state[j];
    }
    return J;
}

inline EqClass classify_eigenvalues(
    const std::vector<std::complex<double>>& lam, double hyp_tol = 1e-9) {
    bool any_center = false, any_pos = false, any_neg = false, complex_pair = false;
    for (const auto& l : lam) {
        if (std::abs(l.real()) <= hyp_tol) any_center = true;
        else if (l.real() > 0) any_pos = true;
        else any_neg = true;
        if (std::abs(l.imag()) > hyp_tol) complex_pair = true;
    }
    if (any_center) return EqClass::Nonhyperbolic;
    if (any_pos && any_neg) return EqClass::Saddle;
    if (any_pos) return complex_pair ? EqClass::UnstableFocus : EqClass::UnstableNode;
    return complex_pair ? EqClass::StableFocus : EqClass::StableNode;
}

inline Equilibrium classify(const SlowFastSystem& sys,
                            const std::vector<double>& state) {
    const double res = rhs_norm(sys, state);
    if (res > 1e-8)
        throw NotAnEquilibrium("classify: |rhs| = " + std::to_string(res));
    Eigen::EigenSolver<Eigen::MatrixXd> es(fd_jacobian(sys, state));
    Equilibrium eq;
    eq.state = state;
    eq.residual = res;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        eq.eigenvalues.push_back(es.eigenvalues()[i]);
    std::sort(eq.eigenvalues.begin(), eq.eigenvalues.end(),
              [](const auto& a, const auto& b) {
                  return a.real() != b.real() ? a.real() < b.real()
                                              : a.imag() < b.imag();
              });
    eq.cls = classify_eigenvalues(eq.eigenvalues);
    return eq;
}

// Newton iteration; returns the converged state or nothing.
inline std::optional<std::vector<double>> newton_polish(
    const SlowFastSystem& sys, std::vector<double> state, int max_iter = 60,
    double tol = 1e-12) {
    const int n = sys.dim();
    std::vector<double> f(n);
    for (int it = 0; it < max_iter; ++it) {
        try {
            sys.rhs(0.0, state.data(), f.data());
        } catch (const DomainError&) {
            return std::nullopt;
        }
        double nrm = 0;
        for (double v : f) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (!std::isfinite(nrm)) return std::nullopt;
        if (nrm <= tol) return state;
        Eigen::MatrixXd J;
        try {
            J = fd_jacobian(sys, state);
        } catch (const DomainError&) {
            return std::nullopt;
        }
        Eigen::VectorXd F(n);
        for (int i = 0; i < n; ++i) F(i) = f[i];
        Eigen::VectorXd dx = J.fullPivLu().solve(-F);
        if (!dx.allFinite()) return std::nullopt;
        double step = dx.norm();
        if (step > 10.0) dx *= 10.0 / step;  // crude trust region
        // halve the step while it leaves the model domain
        std::vector<double> cand(n);
        bool placed = false;
        for (int half = 0; half < 40 && !placed; ++half) {
            for (int i = 0; i < n; ++i) cand[i] = state[i] + dx(i);
            try {
                sys.rhs(0.0, cand.data(), f.data());
                placed = true;
            } catch (const DomainError&) {
                dx *= 0.5;
            }
        }
        if (!placed) return std::nullopt;
        state = cand;
    }
    return std::nullopt;
}

namespace detail {

inline std::vector<double> canonical_state(const SlowFastSystem& sys,
                                           const std::vector<double>& s) {
    return wrap_phase(sys, s);
}

inline bool states_close(const std::vector<double>& a,
                         const std::vector<double>& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

}  // namespace detail

// Multi-start Newton from a uniform grid of seeds over the box; duplicates
// (including 2pi copies of angular coordinates) removed at 1e-6 separation.
inline std::vector<Equilibrium> find_equilibria(const SlowFastSystem& sys,
                                                const Box& box,
                                                int density = 12) {
    const int n = sys.dim();
    if (box.dim() != n) throw DimensionMismatch("find_equilibria: box dim");
    if (density < 8) throw UsageError("find_equilibria: density must be >= 8");
    if (n > 4)
        throw UsageError(
            "find_equilibria: grid seeding is impractical above 4 dimensions; "
            "use find_attractors_by_relaxation");

    std::vector<std::vector<double>> found;
    std::vector<double> seed(n);
    std::vector<int> idx(n, 0);
    const long total = static_cast<long>(std::pow(density, n));
    for (long q = 0; q < total; ++q) {
        long r = q;
        for (int i = 0; i < n; ++i) {
            idx[i] = static_cast<int>(r % density);
            r /= density;
            seed[i] = box.lo[i] + (box.hi[i] - box.lo[i]) *
                                      (idx[i] + 0.5) / density;
        }
        auto sol = newton_polish(sys, seed);
        if (!sol) continue;
        auto cs = detail::canonical_state(sys, *sol);
        // roots that sit on a box face can converge a rounding error outside;
        // snap them back before the containment test
        for (int i = 0; i < n; ++i) {
            const double snap = 1e-8 * (1.0 + std::abs(cs[i]));
            if (cs[i] < box.lo[i] && cs[i] > box.lo[i] - snap) cs[i] = box.lo[i];
            if (cs[i] > box.hi[i] && cs[i] < box.hi[i] + snap) cs[i] = box.hi[i];
        }
        if (!box.contains(cs.data())) {
            // angular copies may wrap back inside; otherwise drop
            if (!box.contains(sol->data())) continue;
            cs = *sol;
        }
        bool dup = false;
        for (const auto& g : found)
            if (detail::states_close(g, cs, 1e-6)) { dup = true; break; }
        if (!dup) found.push_back(cs);
    }
    std::sort(found.begin(), found.end());
    std::vector<Equilibrium> out;
    for (const auto& s : found) {
        try {
            out.push_back(classify(sys, s));
        } catch (const NotAnEquilibrium&) {
        }
    }
    return out;
}

// Attractor seeding for high-dimensional systems: relax each initial
// condition under the full flow, then Newton-polish the endpoint.
inline std::vector<Equilibrium> find_attractors_by_relaxation(
    const SlowFastSystem& sys, const std::vector<std::vector<double>>& ics,
    double t_relax) {
    std::vector<Equilibrium> out;
    OdeSpec spec;
    spec.dimension = sys.dim();
    spec.rhs = sys.rhs;
    spec.store = false;
    for (const auto& ic : ics) {
        std::vector<double> endpoint;
        try {
            endpoint = integrate(spec, ic, 0.0, t_relax).final_state();
        } catch (const NumericError&) {
            continue;
        }
        auto sol = newton_polish(sys, endpoint);
        if (!sol) continue;
        const auto cs = detail::canonical_state(sys, *sol);
        bool dup = false;
        for (const auto& e : out)
            if (detail::states_close(e.state, cs, 1e-6)) { dup = true; break; }
        if (dup) continue;
        try {
            out.push_back(classify(sys, cs));
        } catch (const NotAnEquilibrium&) {
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.state < b.state;
    });
    return out;
}

// --- stable manifold tracing ------------------------------------------------

struct ManifoldCurve {
    std::vector<std::vector<double>> points;  // traversal order from the saddle
    int side = +1;                            // sign of the eigenvector offset
    double arc_length = 0.0;
    bool escaped = false;  // left the domain box (vs arc/time cap: EscapeFailure)
};

struct ManifoldTraceOptions {
    double delta = 1e-6;
    double arc_cap = 1e4;
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::vector<double> abs_tol_vec;  // per-component override
    double time_cap_factor = 2e4;     // backward time span = factor / eps
};

namespace detail {

inline ManifoldCurve trace_branch(const SlowFastSystem& sys,
                                  const std::vector<double>& saddle,
                                  const Eigen::VectorXd& v, int side,
                                  const Box& box,
                                  const ManifoldTraceOptions& opt) {
    const int n = sys.dim();
    std::vector<double> y0(n);
    for (int i = 0; i < n; ++i)
        y0[i] = saddle[i] + side * opt.delta * v(i);

    ManifoldCurve curve;
    curve.side = side;

    auto arc = std::make_shared<double>(0.0);
    auto prev = std::make_shared<std::vector<double>>(y0);

    OdeSpec spec;
    spec.dimension = n;
    spec.rhs = sys.rhs;
    spec.rel_tol = opt.rel_tol;
    spec.abs_tol = opt.abs_tol;
    spec.abs_tol_vec = opt.abs_tol_vec;
    spec.store = true;
    spec.observer = [arc, prev](double, const double* y) {
        double d = 0;
        for (std::size_t i = 0; i < prev->size(); ++i) {
            const double q = y[i] - (*prev)[i];
            d += q * q;
        }
        *arc += std::sqrt(d);
        std::copy(y, y + prev->size(), prev->begin());
    };

    std::vector<EventSpec> events;
    events.push_back({[&box](double, const double* y) {
                          return box.inner_distance(y);
                      },
                      EventDirection::Falling, true, 1e-10});
    events.push_back({[arc, cap = opt.arc_cap](double, const double*) {
                          return cap - *arc;
                      },
                      EventDirection::Falling, true, 1e-6});

    const double t_back = -opt.time_cap_factor / sys.eps;
    Trajectory traj;
    try {
        traj = integrate_with_events(spec, y0, 0.0, t_back, events);
    } catch (const NumericError&) {
        // keep whatever was traced before the failure
    }
    curve.points = std::move(traj.states);
    double len = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        double d = 0;
        for (int j = 0; j < n; ++j) {
            const double q = curve.points[i][j] - curve.points[i - 1][j];
            d += q * q;
        }
        len += std::sqrt(d);
    }
    curve.arc_length = len;
    curve.escaped = traj.terminated_by_event && !traj.events.empty() &&
                    traj.events.back().event_id == 0;
    return curve;
}

}  // namespace detail

// Both branches of W^s(saddle), grown backward in time from saddle +- delta*v
// until leaving the domain box. A branch that hits the arc/time cap inside the
// box is returned partial with escaped=false.
inline std::pair<ManifoldCurve, ManifoldCurve> trace_stable_manifold(
    const SlowFastSystem& sys, const Equilibrium& saddle, const Box& box,
    const ManifoldTraceOptions& opt = {}) {
    if (saddle.cls != EqClass::Saddle)
        throw NotASaddle("trace_stable_manifold: not classified as a saddle");
    int stable_count = 0;
    for (const auto& l : saddle.eigenvalues)
        if (l.real() < -1e-9) ++stable_count;
    if (stable_count != 1)
        throw NotASaddle(
            "trace_stable_manifold: saddle must have exactly one stable "
            "eigenvalue");

    Eigen::EigenSolver<Eigen::MatrixXd> es(fd_jacobian(sys, saddle.state));
    int k = -1;
    double best = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double re = es.eigenvalues()[i].real();
        if (re < -1e-9 && (k < 0 || re < best)) {
            k = i;
            best = re;
        }
    }
    Eigen::VectorXd v = es.eigenvectors().col(k).real();
    v.normalize();

    return {detail::trace_branch(sys, saddle.state, v, +1, box, opt),
            detail::trace_branch(sys, saddle.state, v, -1, box, opt)};
}

// Synthetic polyline along a constant fast coordinate (e.g. the invariant
// line x = 0 of the pitchfork), usable as one side of a width profile.
inline ManifoldCurve constant_fast_curve(double fast_value, double mu_from,
                                         double mu_to, int samples = 2) {
    ManifoldCurve c;
    for (int i = 0; i < samples; ++i) {
        const double mu =
            mu_from + (mu_to - mu_from) * i / std::max(1, samples - 1);
        c.points.push_back({fast_value, mu});
    }
    c.arc_length = std::abs(mu_to - mu_from);
    return c;
}

namespace detail {

// First crossing of the polyline with the plane mu = const, walking from the
// saddle end; returns the interpolated fast coordinate (coordinate 0).
inline std::optional<double> first_crossing_fast(const ManifoldCurve& c,
                                                 double mu) {
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        const double m0 = c.points[i - 1].back(), m1 = c.points[i].back();
        if ((m0 - mu) * (m1 - mu) <= 0.0 && m0 != m1) {
            const double w = (mu - m0) / (m1 - m0);
            return c.points[i - 1][0] +
                   w * (c.points[i][0] - c.points[i - 1][0]);
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Fast-coordinate gap between two traced curves at fixed values of mu.
inline std::vector<std::pair<double, double>> funnel_width_profile(
    const ManifoldCurve& a, const ManifoldCurve& b,
    const std::vector<double>& mu_grid) {
    std::vector<std::pair<double, double>> out;
    for (double mu : mu_grid) {
        const auto fa = detail::first_crossing_fast(a, mu);
        const auto fb = detail::first_crossing_fast(b, mu);
        if (!fa || !fb)
            throw RangeNotCovered("funnel_width_profile: mu = " +
                                  std::to_string(mu) + " not covered");
        out.emplace_back(mu, std::abs(*fa - *fb));
    }
    return out;
}

}  // namespace slowfast

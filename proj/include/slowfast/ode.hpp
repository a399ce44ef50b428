#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "slowfast/errors.hpp"

namespace slowfast {

using Rhs = std::function<void(double t, const double* y, double* dydt)>;
using EventFn = std::function<double(double t, const double* y)>;
using Observer = std::function<void(double t, const double* y)>;

enum class EventDirection { Rising, Falling, Any };

// Direction is interpreted along the traversal order of the trajectory,
// i.e. a "rising" event in a backward run fires where g increases as the
// integration proceeds (toward smaller t).
struct EventSpec {
    EventFn g;
    EventDirection direction = EventDirection::Any;
    bool terminal = false;
    double tol = 1e-10;
};

struct OdeSpec {
    int dimension = 1;
    Rhs rhs;
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    std::vector<double> abs_tol_vec;  // per-component override when non-empty
    double max_step = std::numeric_limits<double>::infinity();
    long long max_steps = 100000000LL;  // per trajectory
    bool store = true;                  // keep all accepted steps for dense output
    Observer observer;                  // called at every accepted sample
};

struct EventRecord {
    double t;
    std::vector<double> state;
    int event_id;
};

struct Trajectory {
    int dimension = 0;
    // Traversal order: ascending times for forward runs, descending for backward.
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> derivs;  // dy/dt at the samples
    std::vector<EventRecord> events;
    bool terminated_by_event = false;
    long long steps = 0;

    double final_time() const { return times.back(); }
    const std::vector<double>& final_state() const { return states.back(); }
};

namespace detail {

inline bool all_finite(const double* v, int n) {
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

// Cubic Hermite interpolation on [ta, tb]; local error O(h^4).
inline void hermite(double ta, const double* ya, const double* fa, double tb,
                    const double* yb, const double* fb, int n, double t,
                    double* out) {
    const double h = tb - ta;
    const double th = (t - ta) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    const double c0 = 2 * th3 - 3 * th2 + 1;
    const double c1 = th3 - 2 * th2 + th;
    const double c2 = -2 * th3 + 3 * th2;
    const double c3 = th3 - th2;
    for (int i = 0; i < n; ++i)
        out[i] = c0 * ya[i] + c1 * h * fa[i] + c2 * yb[i] + c3 * h * fb[i];
}

}  // namespace detail

inline std::vector<double> dense_eval(const Trajectory& traj, double t) {
    const auto& ts = traj.times;
    if (ts.size() < 1) throw OutOfRange("dense_eval: empty trajectory");
    const bool fwd = ts.size() < 2 || ts.back() >= ts.front();
    const double lo = fwd ? ts.front() : ts.back();
    const double hi = fwd ? ts.back() : ts.front();
    if (t < lo || t > hi) throw OutOfRange("dense_eval: t outside trajectory range");
    // exact node hits return the stored sample
    std::size_t idx;
    if (fwd) {
        idx = std::lower_bound(ts.begin(), ts.end(), t) - ts.begin();
    } else {
        idx = std::lower_bound(ts.begin(), ts.end(), t, std::greater<double>()) -
              ts.begin();
    }
    if (idx < ts.size() && ts[idx] == t) return traj.states[idx];
    if (traj.derivs.size() != traj.states.size())
        throw OutOfRange("dense_eval: trajectory stored without derivatives");
    const std::size_t a = idx - 1, b = idx;
    std::vector<double> out(traj.dimension);
    detail::hermite(ts[a], traj.states[a].data(), traj.derivs[a].data(), ts[b],
                    traj.states[b].data(), traj.derivs[b].data(), traj.dimension,
                    t, out.data());
    return out;
}

namespace detail {

// Dormand-Prince 5(4) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                            a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct EventState {
    double g_prev;
    bool armed;  // disarmed while g sits exactly on zero
};

}  // namespace detail

// Adaptive explicit RK5(4) integration over [t0, t1]; t1 < t0 integrates
// backward by negating time internally.
inline Trajectory integrate_with_events(const OdeSpec& spec,
                                        const std::vector<double>& y0, double t0,
                                        double t1,
                                        const std::vector<EventSpec>& events) {
    using D = detail::Dopri5;
    const int n = spec.dimension;
    if (n < 1) throw UsageError("OdeSpec.dimension must be >= 1");
    if (!(spec.rel_tol > 0) || !(spec.abs_tol > 0))
        throw UsageError("tolerances must be > 0");
    if (static_cast<int>(y0.size()) != n)
        throw DimensionMismatch("initial state has wrong dimension");
    if (t0 == t1) throw UsageError("integrate: t0 == t1");
    if (!detail::all_finite(y0.data(), n))
        throw NonFiniteState("initial state not finite");

    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    Trajectory traj;
    traj.dimension = n;

    // internal time s in [0, span]; actual t = t0 + dir*s
    std::vector<double> y = y0, ynew(n), ytmp(n), yerr(n), yev(n), fev(n);
    std::vector<std::vector<double>> k(7, std::vector<double>(n));

    auto frhs = [&](double s, const double* yy, double* dy) {
        spec.rhs(t0 + dir * s, yy, dy);
        if (dir < 0)
            for (int i = 0; i < n; ++i) dy[i] = -dy[i];
    };

    frhs(0.0, y.data(), k[0].data());
    if (!detail::all_finite(k[0].data(), n))
        throw NonFiniteState("rhs not finite at initial state");

    auto push_sample = [&](double s, const std::vector<double>& yy,
                           const std::vector<double>& f) {
        const double t = t0 + dir * s;
        if (spec.store || traj.times.empty()) {
            traj.times.push_back(t);
            traj.states.push_back(yy);
            std::vector<double> ft(n);
            for (int i = 0; i < n; ++i) ft[i] = dir * f[i];
            traj.derivs.push_back(ft);
        } else {
            traj.times.back() = t;
            traj.states.back() = yy;
            for (int i = 0; i < n; ++i) traj.derivs.back()[i] = dir * f[i];
        }
        if (spec.observer) spec.observer(t, yy.data());
    };
    push_sample(0.0, y, k[0]);
    if (!spec.store) {  // keep the initial sample as its own slot
        traj.times.push_back(traj.times[0]);
        traj.states.push_back(traj.states[0]);
        traj.derivs.push_back(traj.derivs[0]);
    }

    // event bookkeeping
    std::vector<detail::EventState> evs(events.size());
    for (std::size_t j = 0; j < events.size(); ++j) {
        const double g0 = events[j].g(t0, y.data());
        evs[j] = {g0, g0 != 0.0};
    }

    // initial step size (Hairer-style heuristic)
    const double* atv =
        spec.abs_tol_vec.empty() ? nullptr : spec.abs_tol_vec.data();
    if (atv && static_cast<int>(spec.abs_tol_vec.size()) != n)
        throw DimensionMismatch("abs_tol_vec has wrong dimension");
    auto sc_norm = [&](const double* v, const double* ya, const double* yb) {
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            const double sc =
                (atv ? atv[i] : spec.abs_tol) +
                spec.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double q = v[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / n);
    };
    double h;
    {
        const double d0 = sc_norm(y.data(), y.data(), y.data());
        const double d1 = sc_norm(k[0].data(), y.data(), y.data());
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h0 * k[0][i];
        frhs(h0, ytmp.data(), k[1].data());
        double d2 = 0;
        for (int i = 0; i < n; ++i) {
            const double sc = spec.abs_tol + spec.rel_tol * std::abs(y[i]);
            const double q = (k[1][i] - k[0][i]) / sc;
            d2 += q * q;
        }
        d2 = std::sqrt(d2 / n) / h0;
        const double dm = std::max(d1, d2);
        double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dm, 0.2);
        h = std::min({100 * h0, h1, span, spec.max_step});
    }

    double s = 0.0;
    double err_old = 1e-4;
    long long steps = 0;
    bool done = false;

    while (!done) {
        if (steps++ >= spec.max_steps)
            throw StepCapExceeded("integrate: max_steps reached at t=" +
                                  std::to_string(t0 + dir * s));
        if (s + h >= span) {
            h = span - s;
            done = true;
        }
        // stages (k[0] holds f(s, y) via FSAL)
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + h * D::a21 * k[0][i];
        frhs(s + D::c2 * h, ytmp.data(), k[1].data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (D::a31 * k[0][i] + D::a32 * k[1][i]);
        frhs(s + D::c3 * h, ytmp.data(), k[2].data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (D::a41 * k[0][i] + D::a42 * k[1][i] +
                                  D::a43 * k[2][i]);
        frhs(s + D::c4 * h, ytmp.data(), k[3].data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (D::a51 * k[0][i] + D::a52 * k[1][i] +
                                  D::a53 * k[2][i] + D::a54 * k[3][i]);
        frhs(s + D::c5 * h, ytmp.data(), k[4].data());
        for (int i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (D::a61 * k[0][i] + D::a62 * k[1][i] +
                                  D::a63 * k[2][i] + D::a64 * k[3][i] +
                                  D::a65 * k[4][i]);
        frhs(s + h, ytmp.data(), k[5].data());
        for (int i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (D::a71 * k[0][i] + D::a73 * k[2][i] +
                                  D::a74 * k[3][i] + D::a75 * k[4][i] +
                                  D::a76 * k[5][i]);
        frhs(s + h, ynew.data(), k[6].data());
        for (int i = 0; i < n; ++i)
            yerr[i] = h * (D::e1 * k[0][i] + D::e3 * k[2][i] + D::e4 * k[3][i] +
                           D::e5 * k[4][i] + D::e6 * k[5][i] + D::e7 * k[6][i]);

        double err = sc_norm(yerr.data(), y.data(), ynew.data());
        if (!std::isfinite(err)) {
            // blow-up inside the step; retry much smaller before giving up
            h *= 0.1;
            done = false;
            if (h < 1e-14 * std::max(1.0, std::abs(s)))
                throw NonFiniteState("integrate: state became non-finite at t=" +
                                     std::to_string(t0 + dir * s));
            continue;
        }
        if (err > 1.0) {
            // reject
            const double fac =
                std::max(0.2, 0.9 * std::pow(err, -0.2));
            h *= fac;
            done = false;
            if (h < 1e-14 * std::max(1.0, std::abs(s)))
                throw StepCapExceeded("integrate: step size underflow at t=" +
                                      std::to_string(t0 + dir * s));
            continue;
        }

        // accepted
        if (!detail::all_finite(ynew.data(), n))
            throw NonFiniteState("integrate: state became non-finite at t=" +
                                 std::to_string(t0 + dir * (s + h)));

        // event detection on [s, s+h]
        const double ta = t0 + dir * s, tb = t0 + dir * (s + h);
        double s_stop = s + h;
        int stop_id = -1;
        std::vector<std::pair<double, int>> fired;  // (s_event, id), non-terminal
        for (std::size_t j = 0; j < events.size(); ++j) {
            const EventSpec& ev = events[j];
            const double g1 = ev.g(tb, ynew.data());
            const double g0 = evs[j].g_prev;
            bool crossed = false;
            if (evs[j].armed &&
                ((g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0))) {
                const bool rising = g1 > g0;
                crossed = (ev.direction == EventDirection::Any) ||
                          (ev.direction == EventDirection::Rising && rising) ||
                          (ev.direction == EventDirection::Falling && !rising);
            }
            if (crossed) {
                // bisection on the Hermite interpolant of this step
                double sa = s, sb = s + h, ga = g0, gm = g1;
                double sm = sb;
                for (int it = 0; it < 200; ++it) {
                    sm = 0.5 * (sa + sb);
                    detail::hermite(s, y.data(), k[0].data(), s + h, ynew.data(),
                                    k[6].data(), n, sm, yev.data());
                    gm = ev.g(t0 + dir * sm, yev.data());
                    if (std::abs(gm) <= ev.tol && (sb - sa) <= 1e-12 * (1 + std::abs(sm)))
                        break;
                    if ((ga <= 0) == (gm <= 0)) {
                        sa = sm;
                        ga = gm;
                    } else {
                        sb = sm;
                    }
                    if (sb - sa < 4e-16 * std::max(1.0, std::abs(sm))) break;
                }
                if (ev.terminal) {
                    if (sm < s_stop) {
                        s_stop = sm;
                        stop_id = static_cast<int>(j);
                    }
                } else {
                    fired.emplace_back(sm, static_cast<int>(j));
                }
            }
            evs[j].g_prev = g1;
            evs[j].armed = (g1 != 0.0) || evs[j].armed;
        }

        std::sort(fired.begin(), fired.end());
        for (const auto& [se, id] : fired) {
            if (se > s_stop) break;
            detail::hermite(s, y.data(), k[0].data(), s + h, ynew.data(),
                            k[6].data(), n, se, yev.data());
            traj.events.push_back({t0 + dir * se, yev, id});
        }

        if (stop_id >= 0) {
            detail::hermite(s, y.data(), k[0].data(), s + h, ynew.data(),
                            k[6].data(), n, s_stop, yev.data());
            frhs(s_stop, yev.data(), fev.data());
            traj.events.push_back({t0 + dir * s_stop, yev, stop_id});
            push_sample(s_stop, yev, fev);
            traj.terminated_by_event = true;
            break;
        }

        s += h;
        y.swap(ynew);
        k[0].swap(k[6]);  // FSAL
        push_sample(s, y, k[0]);

        if (!done) {
            err = std::max(err, 1e-10);
            const double fac = 0.9 * std::pow(err, -0.7 / 5.0) *
                               std::pow(err_old, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 10.0);
            h = std::min(h, spec.max_step);
            err_old = err;
        }
    }

    traj.steps = steps;
    return traj;
}

inline Trajectory integrate(const OdeSpec& spec, const std::vector<double>& y0,
                            double t0, double t1) {
    return integrate_with_events(spec, y0, t0, t1, {});
}

}  // namespace slowfast

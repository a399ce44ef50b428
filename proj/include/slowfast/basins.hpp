#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slowfast/equilibria.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/models.hpp"
#include "slowfast/ode.hpp"
#include "slowfast/parallel.hpp"
#include "slowfast/rng.hpp"

namespace slowfast {

enum class LabelKind { Undecided, PointAttractor, RotatingOrbit, BoundedCycle };

struct BasinLabel {
    LabelKind kind = LabelKind::Undecided;
    int attractor_id = -1;  // index into the classifier's stable equilibria
};

// integer codes used in emitted grids
inline int label_code(const BasinLabel& l) {
    switch (l.kind) {
        case LabelKind::Undecided: return 0;
        case LabelKind::PointAttractor:
            return l.attractor_id >= 0 ? 1 + l.attractor_id : 90;
        case LabelKind::BoundedCycle: return 98;
        case LabelKind::RotatingOrbit: return 99;
    }
    return 0;
}

struct ClassifyOptions {
    double horizon = 0.0;  // 0 -> 10/eps
    double mu_threshold = 9.0;
    bool use_threshold_event = true;  // false: winding-number classifier only
    double winding_threshold = 4.0 * kPi;
    double prox_tol = 1e-3;
    double capture_tol = 1e-4;
    bool capture_events = true;  // terminal stop once a stable point is reached
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
};

class BasinClassifier {
public:
    BasinClassifier(SlowFastSystem sys, std::vector<Equilibrium> stable_eqs,
                    ClassifyOptions opt = {})
        : sys_(std::move(sys)), opt_(opt) {
        for (auto& e : stable_eqs)
            if (e.is_stable()) stable_.push_back(std::move(e));
    }

    const SlowFastSystem& system() const { return sys_; }
    const std::vector<Equilibrium>& stable_equilibria() const { return stable_; }
    const ClassifyOptions& options() const { return opt_; }

    double horizon() const {
        return opt_.horizon > 0 ? opt_.horizon : 10.0 / sys_.eps;
    }

    BasinLabel classify(const std::vector<double>& y0) const {
        try {
            return classify_impl(y0);
        } catch (const NumericError&) {
            return {LabelKind::Undecided, -1};
        }
    }

private:
    // wrapped distance to a stable equilibrium
    double eq_distance(const double* y, const Equilibrium& e) const {
        double acc = 0;
        const int n = sys_.dim();
        for (int i = 0; i < n; ++i) {
            double d = y[i] - e.state[i];
            if (i < sys_.fast_dim && sys_.angular[i])
                d = std::remainder(d, kTwoPi);
            acc += d * d;
        }
        return std::sqrt(acc);
    }

    int nearest_equilibrium(const double* y, double tol) const {
        int best = -1;
        double bd = tol;
        for (std::size_t i = 0; i < stable_.size(); ++i) {
            const double d = eq_distance(y, stable_[i]);
            if (d <= bd) {
                bd = d;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    struct RunResult {
        std::vector<double> final_state;
        bool threshold_fired = false;
        bool captured = false;
        double winding = 0.0;
        bool winding_valid = false;
        double mu_amp_second_half = 0.0;
    };

    RunResult run(const std::vector<double>& y0, double t0, double t1) const {
        const int n = sys_.dim();
        OdeSpec spec;
        spec.dimension = n;
        spec.rhs = sys_.rhs;
        spec.rel_tol = opt_.rel_tol;
        spec.abs_tol = opt_.abs_tol;
        spec.store = false;

        const double t_half = 0.5 * (t0 + t1);
        struct Obs {
            double t_prev = 0.0, phi_prev = 0.0;
            bool have_prev = false;
            double phi_half = 0.0;
            bool have_half = false;
            double phi_last = 0.0;
            double mu_min = 0.0, mu_max = 0.0;
            bool have_mu_range = false;
        };
        auto obs = std::make_shared<Obs>();
        const bool track_phi = sys_.fast_dim >= 1 && sys_.angular[0];
        const int mu_idx = sys_.fast_dim;
        spec.observer = [obs, t_half, track_phi, mu_idx](double t,
                                                         const double* y) {
            if (track_phi) {
                if (t >= t_half && !obs->have_half) {
                    // linear interpolation across the step that crosses t_half
                    if (obs->have_prev && obs->t_prev < t_half) {
                        const double w =
                            (t_half - obs->t_prev) / (t - obs->t_prev);
                        obs->phi_half =
                            obs->phi_prev + w * (y[0] - obs->phi_prev);
                    } else {
                        obs->phi_half = y[0];
                    }
                    obs->have_half = true;
                }
                obs->phi_last = y[0];
                obs->t_prev = t;
                obs->phi_prev = y[0];
                obs->have_prev = true;
            }
            if (t >= t_half) {
                const double mu = y[mu_idx];
                if (!obs->have_mu_range) {
                    obs->mu_min = obs->mu_max = mu;
                    obs->have_mu_range = true;
                } else {
                    obs->mu_min = std::min(obs->mu_min, mu);
                    obs->mu_max = std::max(obs->mu_max, mu);
                }
            }
        };

        std::vector<EventSpec> events;
        const bool rotational =
            sys_.tag == ModelTag::Rotator || sys_.tag == ModelTag::Network;
        int threshold_id = -1;
        if (rotational && opt_.use_threshold_event) {
            threshold_id = static_cast<int>(events.size());
            const double thr = opt_.mu_threshold;
            events.push_back({[thr, mu_idx](double, const double* y) {
                                  return y[mu_idx] - thr;
                              },
                              EventDirection::Rising, true, 1e-10});
        }
        int capture_base = static_cast<int>(events.size());
        if (opt_.capture_events) {
            for (const auto& e : stable_) {
                const Equilibrium* eq = &e;
                const double ct = opt_.capture_tol;
                auto self = this;
                events.push_back({[self, eq, ct](double, const double* y) {
                                      return self->eq_distance(y, *eq) - ct;
                                  },
                                  EventDirection::Falling, true, 1e-12});
            }
        }

        const Trajectory traj =
            integrate_with_events(spec, y0, t0, t1, events);

        RunResult r;
        r.final_state = traj.final_state();
        if (traj.terminated_by_event && !traj.events.empty()) {
            const int id = traj.events.back().event_id;
            if (id == threshold_id) r.threshold_fired = true;
            else if (id >= capture_base) r.captured = true;
        }
        if (track_phi && obs->have_half) {
            r.winding = std::abs(obs->phi_last - obs->phi_half);
            r.winding_valid = !traj.terminated_by_event;
        }
        r.mu_amp_second_half = obs->mu_max - obs->mu_min;
        return r;
    }

    BasinLabel classify_impl(const std::vector<double>& y0) const {
        const double T = horizon();
        const bool rotational =
            sys_.tag == ModelTag::Rotator || sys_.tag == ModelTag::Network;

        RunResult r = run(y0, 0.0, T);
        if (r.threshold_fired) return {LabelKind::RotatingOrbit, -1};

        auto point_label = [&](const double* y) -> BasinLabel {
            const int id = nearest_equilibrium(y, opt_.prox_tol);
            if (id >= 0) return {LabelKind::PointAttractor, id};
            return {LabelKind::Undecided, -1};
        };

        if (r.captured) return point_label(r.final_state.data());

        if (rotational) {
            const auto lbl = point_label(r.final_state.data());
            if (lbl.kind == LabelKind::PointAttractor) return lbl;
            if (r.winding_valid && r.winding > opt_.winding_threshold)
                return {LabelKind::RotatingOrbit, -1};
            // last resort: polish the endpoint; an unlisted stable point
            // still counts as a point attractor
            if (auto sol = newton_polish(sys_, r.final_state)) {
                double d = 0;
                for (int i = 0; i < sys_.dim(); ++i) {
                    double q = r.final_state[i] - (*sol)[i];
                    if (i < sys_.fast_dim && sys_.angular[i])
                        q = std::remainder(q, kTwoPi);
                    d += q * q;
                }
                if (std::sqrt(d) <= opt_.prox_tol) {
                    try {
                        if (slowfast::classify(sys_, *sol).is_stable())
                            return {LabelKind::PointAttractor, -1};
                    } catch (const NotAnEquilibrium&) {
                    }
                }
            }
            if (r.winding_valid && r.winding < 0.5 &&
                r.mu_amp_second_half > 1e-4 && r.mu_amp_second_half < 5.0)
                return {LabelKind::BoundedCycle, -1};
            return {LabelKind::Undecided, -1};
        }

        // pitchfork / tanh: proximity at horizon end, one x2 extension
        auto lbl = point_label(r.final_state.data());
        if (lbl.kind == LabelKind::PointAttractor) return lbl;
        const RunResult r2 = run(r.final_state, T, 2.0 * T);
        return point_label(r2.final_state.data());
    }

    SlowFastSystem sys_;
    std::vector<Equilibrium> stable_;
    ClassifyOptions opt_;
};

// Equilibrium seeding suitable for each model family; used by the CLI and
// the preset pipelines when no explicit list is given.
inline std::vector<Equilibrium> default_stable_equilibria(
    const SlowFastSystem& sys) {
    switch (sys.tag) {
        case ModelTag::Pitchfork: {
            Box box{{0.0, -6.0}, {5.0, 10.0}};
            auto eqs = find_equilibria(sys, box, 12);
            std::vector<Equilibrium> out;
            for (auto& e : eqs)
                if (e.is_stable()) out.push_back(e);
            return out;
        }
        case ModelTag::Tanh: {
            Box box{{0.0, -8.0}, {5.0, 8.0}};
            auto eqs = find_equilibria(sys, box, 12);
            std::vector<Equilibrium> out;
            for (auto& e : eqs)
                if (e.is_stable()) out.push_back(e);
            return out;
        }
        case ModelTag::Rotator: {
            Box box{{-kPi, -12.0}, {kPi, 12.0}};
            auto eqs = find_equilibria(sys, box, 16);
            std::vector<Equilibrium> out;
            for (auto& e : eqs)
                if (e.is_stable()) out.push_back(e);
            return out;
        }
        case ModelTag::Network: {
            // relax a deterministic fan of initial conditions onto attractors
            std::vector<std::vector<double>> ics;
            const int N = sys.fast_dim;
            for (int k = 0; k < 8; ++k) {
                std::vector<double> ic(N + 1, kTwoPi * k / 8.0);
                ic[N] = 4.0;
                ics.push_back(ic);
                ic[N] = 2.0;
                ics.push_back(ic);
            }
            auto eqs = find_attractors_by_relaxation(sys, ics, 60.0 / sys.eps);
            std::vector<Equilibrium> out;
            for (auto& e : eqs)
                if (e.is_stable()) out.push_back(e);
            return out;
        }
    }
    return {};
}

// --- basin cross-section grids ----------------------------------------------

struct CrossSection {
    int axis_i = 0;  // state index of the first free axis (columns)
    int axis_j = 1;  // state index of the second free axis (rows)
    double i_lo = 0, i_hi = 1;
    double j_lo = 0, j_hi = 1;
    std::vector<double> fixed;  // full-state template; free entries ignored
    std::string name_i = "x";
    std::string name_j = "mu";
};

struct BasinGrid {
    CrossSection section;
    int res_i = 0, res_j = 0;
    std::vector<int> codes;  // row-major: codes[j*res_i + i]
    std::map<std::string, double> params;
    double eps = 0;
    long undecided = 0;

    int at(int i, int j) const { return codes[static_cast<std::size_t>(j) * res_i + i]; }
};

// Node k of an axis with resolution R sits at lo + (hi-lo)*k/R, so doubling
// the resolution keeps every existing node.
inline BasinGrid basin_grid(const BasinClassifier& cl, const CrossSection& cs,
                            int res_i, int res_j, int threads = 1) {
    const int n = cl.system().dim();
    if (static_cast<int>(cs.fixed.size()) != n)
        throw DimensionMismatch("cross-section template has wrong dimension");
    BasinGrid g;
    g.section = cs;
    g.res_i = res_i;
    g.res_j = res_j;
    g.codes.assign(static_cast<std::size_t>(res_i) * res_j, 0);
    g.params = cl.system().param_record;
    g.eps = cl.system().eps;

    parallel_for(g.codes.size(), threads, [&](std::size_t q) {
        const int i = static_cast<int>(q % res_i);
        const int j = static_cast<int>(q / res_i);
        std::vector<double> y0 = cs.fixed;
        y0[cs.axis_i] = cs.i_lo + (cs.i_hi - cs.i_lo) * i / res_i;
        y0[cs.axis_j] = cs.j_lo + (cs.j_hi - cs.j_lo) * j / res_j;
        g.codes[q] = label_code(cl.classify(y0));
    });
    for (int c : g.codes)
        if (c == 0) ++g.undecided;
    return g;
}

// --- Monte Carlo volume -----------------------------------------------------

struct McEstimate {
    long long trials = 0;     // M
    long long hits = 0;       // K
    long long undecided = 0;  // tallied separately, counted as non-hits
    double volume = 0;        // K/M
    double std_error = 0;     // sqrt(V(1-V)/M)
    Box region;
    std::uint64_t master_seed = 0;
    double eps = 0;
};

// Trial i draws its initial condition from a counter-based stream keyed by
// (master_seed, i); the tally is independent of worker count and order.
inline McEstimate mc_volume(const BasinClassifier& cl, const Box& region,
                            long long trials, std::uint64_t master_seed,
                            LabelKind target = LabelKind::RotatingOrbit,
                            int threads = 1) {
    const int n = cl.system().dim();
    if (region.dim() != n) throw DimensionMismatch("mc_volume: region dim");
    if (trials < 1) throw UsageError("mc_volume: M must be >= 1");
    for (int i = 0; i < n; ++i)
        if (!(region.hi[i] > region.lo[i]))
            throw UsageError("mc_volume: empty region");

    const int nt = resolve_threads(threads);
    std::vector<long long> hits(nt, 0), und(nt, 0);
    const long long chunk = (trials + nt - 1) / nt;
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t i) {
        Philox rng(master_seed, static_cast<std::uint64_t>(i));
        std::vector<double> y0(n);
        for (int d = 0; d < n; ++d)
            y0[d] = rng.uniform(region.lo[d], region.hi[d]);
        const BasinLabel lbl = cl.classify(y0);
        const int slot = static_cast<int>(i / chunk);
        if (lbl.kind == target) ++hits[slot];
        if (lbl.kind == LabelKind::Undecided) ++und[slot];
    });

    McEstimate e;
    e.trials = trials;
    for (int t = 0; t < nt; ++t) {
        e.hits += hits[t];
        e.undecided += und[t];
    }
    e.volume = static_cast<double>(e.hits) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.volume * (1.0 - e.volume) /
                            static_cast<double>(trials));
    e.region = region;
    e.master_seed = master_seed;
    e.eps = cl.system().eps;
    return e;
}

}  // namespace slowfast

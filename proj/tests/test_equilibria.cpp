#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "slowfast/equilibria.hpp"
#include "slowfast/models.hpp"

using namespace slowfast;

namespace {

double hausdorff(const ManifoldCurve& a, const ManifoldCurve& b) {
    // point-to-segment distances, so unequal step placement along the two
    // polylines does not inflate the result
    auto seg_dist = [](const std::vector<double>& p,
                       const std::vector<double>& q1,
                       const std::vector<double>& q2) {
        double vv = 0, vp = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            vv += (q2[i] - q1[i]) * (q2[i] - q1[i]);
            vp += (q2[i] - q1[i]) * (p[i] - q1[i]);
        }
        const double s = vv > 0 ? std::clamp(vp / vv, 0.0, 1.0) : 0.0;
        double d = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double c = q1[i] + s * (q2[i] - q1[i]) - p[i];
            d += c * c;
        }
        return std::sqrt(d);
    };
    auto one_sided = [&](const ManifoldCurve& u, const ManifoldCurve& v) {
        double worst = 0;
        for (const auto& p : u.points) {
            double best = 1e300;
            for (std::size_t j = 1; j < v.points.size(); ++j)
                best = std::min(best,
                                seg_dist(p, v.points[j - 1], v.points[j]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

// segment intersection test on the fast/slow plane
bool polylines_cross(const ManifoldCurve& a, const ManifoldCurve& b) {
    auto orient = [](const std::vector<double>& p, const std::vector<double>& q,
                     const std::vector<double>& r) {
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    };
    for (std::size_t i = 1; i < a.points.size(); ++i)
        for (std::size_t j = 1; j < b.points.size(); ++j) {
            const auto &p1 = a.points[i - 1], &p2 = a.points[i];
            const auto &q1 = b.points[j - 1], &q2 = b.points[j];
            const double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
            const double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
            if (o1 * o2 < 0 && o3 * o4 < 0) return true;
        }
    return false;
}

}  // namespace

TEST_CASE("pitchfork equilibria and classifications", "[equilibria]") {
    const SlowFastSystem sys = make_pitchfork({});
    const Box box{{0.0, -6.0}, {5.0, 10.0}};
    const auto eqs = find_equilibria(sys, box);
    REQUIRE(eqs.size() == 3);
    const double expect[3][2] = {{0.0, -2.0}, {1.0, 1.0}, {2.0, 4.0}};
    const EqClass cls[3] = {EqClass::StableNode, EqClass::Saddle,
                            EqClass::StableNode};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(std::abs(eqs[i].state[0] - expect[i][0]) < 1e-8);
        REQUIRE(std::abs(eqs[i].state[1] - expect[i][1]) < 1e-8);
        REQUIRE(eqs[i].cls == cls[i]);
    }
}

TEST_CASE("tanh equilibria", "[equilibria]") {
    const SlowFastSystem sys = make_tanh({});
    const auto eqs = find_equilibria(sys, {{0.5, -8.0}, {4.0, 8.0}});
    REQUIRE(eqs.size() == 3);
    const double mus[3] = {-4.9995456, 0.0, 4.9995456};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(std::abs(eqs[i].mu() - mus[i]) < 1e-4);
        REQUIRE(std::abs(eqs[i].state[0] - (std::tanh(eqs[i].mu()) + 2.0)) <
                1e-8);
    }
    REQUIRE(eqs[0].is_stable());
    REQUIRE(eqs[1].cls == EqClass::Saddle);
    REQUIRE(eqs[2].is_stable());
}

TEST_CASE("rotator equilibria in the stripe", "[equilibria]") {
    const SlowFastSystem sys = make_rotator({});
    const auto eqs = find_equilibria(sys, {{-kPi, -12.0}, {kPi, 12.0}}, 16);
    REQUIRE(eqs.size() == 2);
    const double disc = std::sqrt(820.0 * 820.0 - 4.0 * 101.0 * 1600.0);
    const double mu_stable = (820.0 - disc) / 202.0;
    const double mu_saddle = (820.0 + disc) / 202.0;
    const Equilibrium* stable = nullptr;
    const Equilibrium* saddle = nullptr;
    for (const auto& e : eqs) {
        if (e.is_stable()) stable = &e;
        if (e.cls == EqClass::Saddle) saddle = &e;
    }
    REQUIRE(stable != nullptr);
    REQUIRE(saddle != nullptr);
    REQUIRE(std::abs(stable->mu() - mu_stable) < 1e-4);
    REQUIRE(std::abs(saddle->mu() - mu_saddle) < 1e-4);
    // both phases sit on the attracting fast branch (cos phi > 0); the saddle
    // direction comes from the slow coupling, cos phi* = 1 - mu*/10
    for (const Equilibrium* e : {stable, saddle}) {
        REQUIRE(std::abs(std::sin(e->state[0]) - (e->mu() - 4.0)) < 1e-8);
        REQUIRE(std::cos(e->state[0]) ==
                Catch::Approx(1.0 - e->mu() / 10.0).margin(1e-8));
    }
}

TEST_CASE("finite-difference Jacobian matches the analytic one", "[equilibria]") {
    const PitchforkParams p;
    const SlowFastSystem sys = make_pitchfork(p);
    for (const auto& st : std::vector<std::vector<double>>{
             {0.0, -2.0}, {1.0, 1.0}, {2.0, 4.0}, {0.7, 2.3}}) {
        const Eigen::MatrixXd J = fd_jacobian(sys, st);
        const double x = st[0], mu = st[1];
        REQUIRE(J(0, 0) == Catch::Approx(mu - 3.0 * x * x).margin(1e-6));
        REQUIRE(J(0, 1) == Catch::Approx(x).margin(1e-6));
        REQUIRE(J(1, 0) == Catch::Approx(p.eps * p.a).margin(1e-6));
        REQUIRE(J(1, 1) == Catch::Approx(-p.eps).margin(1e-6));
    }
}

TEST_CASE("classification eigenvalues at the trivial equilibrium", "[equilibria]") {
    const SlowFastSystem sys = make_pitchfork({});
    const Equilibrium e = classify(sys, {0.0, -2.0});
    // triangular Jacobian at x = 0: eigenvalues {mu, -eps}
    REQUIRE(e.eigenvalues[0].real() == Catch::Approx(-2.0).margin(1e-5));
    REQUIRE(e.eigenvalues[1].real() == Catch::Approx(-0.1).margin(1e-5));
    REQUIRE_THROWS_AS(classify(sys, {0.5, 0.5}), NotAnEquilibrium);
}

TEST_CASE("pitchfork manifold branch forms the funnel boundary", "[equilibria]") {
    const SlowFastSystem sys = make_pitchfork({});
    const Equilibrium saddle = classify(sys, {1.0, 1.0});
    const Box box{{0.0, -4.0}, {4.0, 8.0}};
    ManifoldTraceOptions opt;
    opt.abs_tol_vec = {1e-300, 1e-14};  // x must stay resolvable near 0
    auto [plus, minus] = trace_stable_manifold(sys, saddle, box, opt);

    // one branch runs toward x = 0 as mu grows; x positive and decreasing
    const ManifoldCurve* funnel = nullptr;
    for (const ManifoldCurve* c : {&plus, &minus})
        if (c->points.size() > 2 && c->points.back().back() > 6.0) funnel = c;
    REQUIRE(funnel != nullptr);
    double prev_x = 1e9;
    for (const auto& pt : funnel->points) {
        if (pt[1] < 2.0) continue;
        REQUIRE(pt[0] > 0.0);
        REQUIRE(pt[0] < prev_x);
        prev_x = pt[0];
    }
    REQUIRE_FALSE(polylines_cross(plus, minus));

    // delta halved: curves agree within 10*delta over the shared arc
    ManifoldTraceOptions opt2 = opt;
    opt2.delta = opt.delta / 2.0;
    auto [plus2, minus2] = trace_stable_manifold(sys, saddle, box, opt2);
    REQUIRE(hausdorff(plus, plus2) <= 10.0 * opt.delta + 1e-3);
}

// Phase distance between the down-going W^s branch and the repelling phase
// phi_r = pi - asin(mu - 4), probed where the branch first crosses mu_probe.
double repelling_branch_lag(double eps, double mu_probe) {
    RotatorParams p;
    p.eps = eps;
    const SlowFastSystem sys = make_rotator(p);
    const auto eqs = find_equilibria(sys, {{-kPi, -12.0}, {kPi, 12.0}}, 16);
    const Equilibrium* saddle = nullptr;
    for (const auto& e : eqs)
        if (e.cls == EqClass::Saddle) saddle = &e;
    REQUIRE(saddle != nullptr);
    const Box box{{-20.0 * kPi, -12.0}, {20.0 * kPi, 12.0}};
    ManifoldTraceOptions opt;
    opt.arc_cap = 300.0;
    auto [plus, minus] = trace_stable_manifold(sys, *saddle, box, opt);
    // the down-going branch traverses the stripe; the other leaves upward
    const ManifoldCurve& down =
        (plus.points.back().back() < minus.points.back().back()) ? plus : minus;
    for (std::size_t i = 1; i < down.points.size(); ++i) {
        const double m0 = down.points[i - 1].back(), m1 = down.points[i].back();
        if ((m0 - mu_probe) * (m1 - mu_probe) > 0.0 || m0 == m1) continue;
        const double w = (mu_probe - m0) / (m1 - m0);
        const double phi = down.points[i - 1][0] +
                           w * (down.points[i][0] - down.points[i - 1][0]);
        const double phi_r = kPi - std::asin(mu_probe - 4.0);
        return std::abs(std::remainder(phi - phi_r, kTwoPi));
    }
    FAIL("branch never crossed the probe mu");
    return 0.0;
}

TEST_CASE("rotator manifold approaches the repelling branch as eps -> 0",
          "[equilibria]") {
    // the O(eps) slow-manifold lag shrinks monotonically with eps
    const double lag_coarse = repelling_branch_lag(0.1, 4.5);
    const double lag_mid = repelling_branch_lag(0.05, 4.5);
    const double lag_fine = repelling_branch_lag(0.02, 4.5);
    REQUIRE(lag_coarse < 1.0);
    REQUIRE(lag_mid < lag_coarse);
    REQUIRE(lag_fine < lag_mid);
    REQUIRE(lag_fine < 0.5 * lag_coarse);
}

TEST_CASE("funnel width profile behaves like the gap ODE", "[equilibria]") {
    const SlowFastSystem sys = make_pitchfork({});
    const Equilibrium saddle = classify(sys, {1.0, 1.0});
    const Box box{{0.0, -4.0}, {4.0, 8.0}};
    ManifoldTraceOptions opt;
    opt.abs_tol_vec = {1e-300, 1e-14};
    auto [plus, minus] = trace_stable_manifold(sys, saddle, box, opt);
    const ManifoldCurve* funnel =
        (plus.points.back().back() > 6.0) ? &plus : &minus;
    const ManifoldCurve wall = constant_fast_curve(0.0, 1.0, 8.0);

    std::vector<double> grid;
    for (double mu = 2.0; mu <= 6.0 + 1e-9; mu += 0.25) grid.push_back(mu);
    const auto widths = funnel_width_profile(*funnel, wall, grid);
    // log delta affine in mu with negative slope, R^2 >= 0.99
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double n = static_cast<double>(widths.size());
    for (const auto& [mu, w] : widths) {
        REQUIRE(w > 0.0);
        const double y = std::log(w);
        sx += mu;
        sy += y;
        sxx += mu * mu;
        sxy += mu * y;
        syy += y * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double r2 = (n * sxy - sx * sy) * (n * sxy - sx * sy) /
                      ((n * sxx - sx * sx) * (n * syy - sy * sy));
    REQUIRE(slope < 0.0);
    REQUIRE(r2 >= 0.99);

    REQUIRE_THROWS_AS(funnel_width_profile(*funnel, wall, {100.0}),
                      RangeNotCovered);
}

TEST_CASE("reduced roots lift to full equilibria", "[equilibria]") {
    const SlowFastSystem sys = make_rotator({});
    const auto eqs = find_equilibria(sys, {{-kPi, -12.0}, {kPi, 12.0}}, 16);
    // both stripe equilibria correspond to roots of the reduced drift; the
    // third reduced root (mu = 10) has a rotating layer, not an equilibrium
    REQUIRE(eqs.size() == 2);
    for (const auto& e : eqs) {
        const double res = rhs_norm(sys, e.state);
        REQUIRE(res <= 1e-11);
    }
}

TEST_CASE("manifold tracing rejects non-saddles", "[equilibria]") {
    const SlowFastSystem sys = make_pitchfork({});
    const Equilibrium stable = classify(sys, {2.0, 4.0});
    REQUIRE_THROWS_AS(
        trace_stable_manifold(sys, stable, {{0.0, -4.0}, {4.0, 8.0}}),
        NotASaddle);
}

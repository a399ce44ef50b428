#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "slowfast/ode.hpp"
#include "slowfast/reduction.hpp"
#include "slowfast/rng.hpp"

using namespace slowfast;

namespace {

// Brute-force time average of sin(phi(t)+alpha) along the free layer rotation,
// taken over a whole number of rotations so the window cutoff adds no bias.
// Outside the locking stripe phi is strictly monotone, which the bisection
// for the window end relies on.
double layer_time_average(const RotatorParams& p, double mu, double t_end = 300,
                          double transient = 50) {
    OdeSpec spec;
    spec.dimension = 1;
    spec.rhs = [&](double, const double* y, double* d) {
        d[0] = p.omega + mu - std::sin(y[0]);
    };
    const Trajectory tr = integrate(spec, {0.1}, 0.0, t_end);
    const double phi1 = dense_eval(tr, transient)[0];
    const double phiT = dense_eval(tr, t_end)[0];
    const double sgn = (phiT > phi1) ? 1.0 : -1.0;
    const double turns = std::floor(std::abs(phiT - phi1) / kTwoPi);
    REQUIRE(turns >= 1.0);
    const double phi2 = phi1 + sgn * turns * kTwoPi;
    double lo = transient, hi = t_end;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((dense_eval(tr, mid)[0] - phi2) * sgn < 0.0 ? lo : hi) = mid;
    }
    const double t2 = 0.5 * (lo + hi);
    const long m = 20000;
    const double dt = (t2 - transient) / m;
    double acc = 0, prev = std::sin(phi1 + p.alpha);
    for (long k = 1; k <= m; ++k) {
        const double v = std::sin(dense_eval(tr, transient + k * dt)[0] + p.alpha);
        acc += 0.5 * (prev + v) * dt;
        prev = v;
    }
    return acc / (t2 - transient);
}

}  // namespace

TEST_CASE("reduced pitchfork slow system", "[reduction]") {
    const ReducedSystem r = reduced_pitchfork({});
    REQUIRE(r.f(0.0) == -2.0);
    REQUIRE(r.f(4.0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(r.f(1.0) == Catch::Approx(0.0).margin(1e-14));
    REQUIRE(r.potential(0.0) == 0.0);
    REQUIRE(r.f(-3.0) == 1.0);  // H(mu)=0 for mu<0
}

TEST_CASE("reduced tanh slow system", "[reduction]") {
    const ReducedSystem r = reduced_tanh({});  // a=5, b=10 -> f = -mu + 5 tanh
    REQUIRE(r.f(0.0) == Catch::Approx(0.0).margin(1e-14));
    // nonzero roots near +-4.99955 (mu = 5 tanh mu) by sign change
    REQUIRE(r.f(4.9) > 0.0);
    REQUIRE(r.f(5.1) < 0.0);
    REQUIRE(r.f(4.9995456) == Catch::Approx(0.0).margin(1e-6));
    // saturation: slope -1 for large mu
    REQUIRE(r.f(40.0) - r.f(41.0) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("reduced rotator slow system", "[reduction]") {
    const ReducedSystem r = reduced_rotator({});
    REQUIRE(r.f(10.0) == Catch::Approx(0.0).margin(1e-12));
    // inner-branch roots from the quadratic 101 mu^2 - 820 mu + 1600 = 0
    const double disc = std::sqrt(820.0 * 820.0 - 4.0 * 101.0 * 1600.0);
    const double mu_stable = (820.0 - disc) / 202.0;    // ~3.2611
    const double mu_saddle = (820.0 + disc) / 202.0;    // ~4.8577
    REQUIRE(r.f(mu_stable) == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(r.f(mu_saddle) == Catch::Approx(0.0).margin(1e-9));
    REQUIRE(r.f(mu_stable - 0.01) * r.f(mu_stable + 0.01) < 0.0);
    // continuity across the stripe boundary |mu+omega| = 1: the square roots
    // of both branches vanish there, so the branch values coincide
    RotatorParams pa;
    pa.alpha = kPi / 4;
    for (double mu_b : {3.0, 5.0}) {
        const double u = mu_b + pa.omega;  // +-1
        const double inside = u * std::cos(pa.alpha) +
                              std::sqrt(1.0 - u * u) * std::sin(pa.alpha);
        const double outside =
            (u - (u > 0 ? 1.0 : -1.0) * std::sqrt(u * u - 1.0)) *
            std::cos(pa.alpha);
        REQUIRE(std::abs(inside - outside) <= 1e-9);
        REQUIRE(std::abs(r.f(mu_b - 1e-9) - r.f(mu_b + 1e-9)) <= 1e-3);
    }
}

TEST_CASE("analytic rotation average", "[reduction]") {
    RotatorParams p;  // alpha = pi/2
    REQUIRE(analytic_rotation_average(p, 10.0) == Catch::Approx(0.0).margin(1e-15));
    p.alpha = 0.0;
    REQUIRE(analytic_rotation_average(p, 10.0) ==
            Catch::Approx(6.0 - std::sqrt(35.0)).margin(1e-12));
    REQUIRE_THROWS_AS(analytic_rotation_average(p, 4.0), DomainError);
    // decay at large frequency offset
    REQUIRE(std::abs(analytic_rotation_average(p, 1000.0)) < 1e-3);
    // bounded for the opposite rotation direction too
    REQUIRE(std::abs(analytic_rotation_average(p, -10.0)) < 1.0);
}

TEST_CASE("rotation average matches a brute-force time average", "[reduction]") {
    for (double alpha : {0.0, kPi / 4}) {
        RotatorParams p;
        p.alpha = alpha;
        for (double mu : {1.5, 6.0, 10.0, -2.0}) {  // |mu+omega| > 1.1
            const double num = layer_time_average(p, mu);
            REQUIRE(analytic_rotation_average(p, mu) ==
                    Catch::Approx(num).margin(1e-3));
        }
    }
}

TEST_CASE("potential gradient equals minus the drift", "[reduction]") {
    struct Case {
        ReducedSystem r;
        double lo, hi;
    };
    const std::vector<Case> cases{{reduced_pitchfork({}), -4.0, 8.0},
                                  {reduced_tanh({}), -8.0, 8.0},
                                  {reduced_rotator({}), -10.0, 12.0}};
    Philox rng(31, 0);
    for (const auto& c : cases) {
        for (int k = 0; k < 100; ++k) {
            const double mu = rng.uniform(c.lo, c.hi);
            const double h = 1e-6;
            const double du =
                (c.r.potential(mu + h) - c.r.potential(mu - h)) / (2.0 * h);
            const double scale = std::max(1.0, std::abs(c.r.f(mu)));
            REQUIRE(std::abs(du + c.r.f(mu)) / scale < 1e-6);
        }
    }
}

TEST_CASE("numeric network averaging agrees with N=1 analytics", "[reduction]") {
    NetworkParams p{{-4.0}, 1.0, 10.0, 0.0, 0.1};
    // rotating layer: brute-force average vs the analytic formula
    for (double mu : {8.0, 10.0}) {
        const AveragedSample s = numeric_average_network(p, mu, 7);
        const RotatorParams rp{-4.0, 10.0, 0.0, 0.1};
        const double expect = -mu + p.eta * (1.0 - analytic_rotation_average(rp, mu));
        REQUIRE(s.g_bar == Catch::Approx(expect).margin(2e-3));
    }
    // inside the stripe: layer settles on the attracting branch
    {
        const double mu = 3.5;
        const AveragedSample s = numeric_average_network(p, mu, 7);
        const double phi_star = std::asin(mu - 4.0);
        const double expect = -mu + p.eta * (1.0 - std::sin(phi_star + p.alpha));
        REQUIRE(s.g_bar == Catch::Approx(expect).margin(1e-6));
    }
}

TEST_CASE("numeric potential trapezoid oracle", "[reduction]") {
    std::vector<AveragedSample> flat, lin;
    for (int k = 0; k <= 100; ++k) {
        const double mu = -2.0 + 4.0 * k / 100.0;
        flat.push_back({mu, 0.0, 0.0, 0.0, 1.0});
        lin.push_back({mu, -mu, 0.0, 0.0, 1.0});
    }
    for (const auto& [mu, u] : numeric_potential(flat)) REQUIRE(u == 0.0);
    // g = -mu: default U = -int g = mu^2/2; SM sign gives -mu^2/2
    for (const auto& [mu, u] : numeric_potential(lin))
        REQUIRE(u == Catch::Approx(mu * mu / 2.0).margin(1e-3));
    for (const auto& [mu, u] : numeric_potential(lin, PotentialSign::PlusIntG))
        REQUIRE(u == Catch::Approx(-mu * mu / 2.0).margin(1e-3));
    // unsorted input rejected
    std::swap(lin[3], lin[4]);
    REQUIRE_THROWS_AS(numeric_potential(lin), UnsortedInput);
}

TEST_CASE("reduced flow tracks the full system at small eps", "[reduction]") {
    // start on the attracting branch S1 away from fold and funnel
    const double eps = 0.01;
    const SlowFastSystem sys = make_pitchfork({3.0, 2.0, eps});
    const ReducedSystem red = reduced_pitchfork({3.0, 2.0, eps});
    OdeSpec spec;
    spec.dimension = 2;
    spec.rhs = sys.rhs;
    const double mu0 = 3.0;
    const Trajectory full =
        integrate(spec, {std::sqrt(mu0), mu0}, 0.0, 5.0 / eps);
    OdeSpec rspec;
    rspec.dimension = 1;
    rspec.rhs = [&](double, const double* y, double* d) { d[0] = red.f(y[0]); };
    const Trajectory slow = integrate(rspec, {mu0}, 0.0, 5.0);
    for (double tau : {1.0, 2.5, 5.0}) {
        const double mu_full = dense_eval(full, tau / eps)[1];
        const double mu_red = dense_eval(slow, tau)[0];
        REQUIRE(std::abs(mu_full - mu_red) <= 10.0 * eps);
    }
}

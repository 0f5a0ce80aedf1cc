#include <doctest.h>

#include <cmath>

#include "cshe/noise.hpp"
#include "cshe/rng.hpp"

using namespace cshe;

namespace {

struct Setup {
    PolygonalDomain domain;
    FemSystem system;
    Setup()
        : domain(build_domain({{0, 0}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}})),
          system(domain, triangulate(domain, 0.15)) {
        system.compute_eigenpairs(24);
    }
};

Setup& setup() {
    static Setup s;
    return s;
}

Eigen::VectorXd uniform_grid(double T, int n) {
    Eigen::VectorXd t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = T * i / n;
    return t;
}

} // namespace

TEST_CASE("covariance spec: power law and trace") {
    CovarianceSpec spec;
    spec.q0 = 2.0;
    spec.rho = 2.2;
    spec.rank = 50;
    CHECK(spec.q(1) == doctest::Approx(2.0));
    CHECK(spec.q(2) == doctest::Approx(2.0 * std::pow(2.0, -2.2)));
    CHECK(spec.q(51) == 0.0);
    double tr = 0.0;
    for (int k = 1; k <= 50; ++k) tr += spec.q(k);
    CHECK(spec.trace() == doctest::Approx(tr));
}

TEST_CASE("increments: zero law, determinism, variance statistics") {
    CovarianceSpec spec;
    spec.rank = 6;
    const Eigen::VectorXd grid = uniform_grid(1.0, 16);

    CovarianceSpec silent = spec;
    silent.q0 = 0.0;
    CHECK(sample_increments(silent, grid, 11).cwiseAbs().maxCoeff() == 0.0);

    const Eigen::MatrixXd a = sample_increments(spec, grid, 42);
    const Eigen::MatrixXd b = sample_increments(spec, grid, 42);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0); // bit-identical
    CHECK(sample_increments(spec, grid, 43) != a);

    // sample variance of dW/sqrt(dt) over many draws within 5% of q_k
    const int draws = 100000;
    const double dt = 1.0 / 16.0;
    for (int k = 0; k < 3; ++k) {
        double sum2 = 0.0;
        for (int King = 0; King < draws / 16; ++King) {
            const Eigen::MatrixXd dw =
                sample_increments(spec, grid, rng::substream(7, static_cast<std::uint64_t>(King)));
            for (int n = 0; n < 16; ++n) sum2 += dw(n, k) * dw(n, k) / dt;
        }
        const double var = sum2 / ((draws / 16) * 16);
        CHECK(var == doctest::Approx(spec.q(k + 1)).epsilon(0.05));
    }

    Eigen::VectorXd bad(3);
    bad << 0.0, 0.5, 0.5; // nonpositive step
    CHECK_THROWS(sample_increments(spec, bad, 1));
}

TEST_CASE("trace check: E||W(t)||^2 = t * trace(Q) within MC error") {
    CovarianceSpec spec;
    spec.rank = 8;
    const double T = 1.0;
    const int steps = 32, paths = 4000;
    const Eigen::VectorXd grid = uniform_grid(T, steps);
    double mean = 0.0;
    for (int p = 0; p < paths; ++p) {
        const Eigen::MatrixXd dw =
            sample_increments(spec, grid, rng::substream(123, static_cast<std::uint64_t>(p)));
        Eigen::VectorXd w = Eigen::VectorXd::Zero(spec.rank);
        for (int n = 0; n < steps; ++n) w += dw.row(n);
        mean += w.squaredNorm();
    }
    mean /= paths;
    CHECK(mean == doctest::Approx(T * spec.trace()).epsilon(0.08));
}

TEST_CASE("additive diffusion is constant in u and has exact HS norm") {
    auto& s = setup();
    CovarianceSpec spec;
    spec.rank = 8;
    const CoefficientModel model = make_additive_model();
    Eigen::VectorXd w(8);
    for (int k = 0; k < 8; ++k) w[k] = rng::normal(3, static_cast<std::uint64_t>(k), 0, 0);
    const Eigen::VectorXd u1 = Eigen::VectorXd::Zero(s.system.dof_count());
    const Eigen::VectorXd u2 = Eigen::VectorXd::Constant(s.system.dof_count(), 2.5);
    const Eigen::VectorXd g1 = apply_G(model, s.system, spec, u1, w);
    const Eigen::VectorXd g2 = apply_G(model, s.system, spec, u2, w);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hs_norm_G(model, s.system, spec, u1) == doctest::Approx(std::sqrt(spec.trace())));
}

TEST_CASE("drift: identity profile and Lipschitz certificates") {
    auto& s = setup();
    CovarianceSpec spec;
    spec.rank = 4;

    CoefficientModel identity = make_nemytskii_model(1.0, 1.0);
    identity.f_scalar = [](double v) { return v; };
    Eigen::VectorXd u(s.system.dof_count());
    for (int d = 0; d < u.size(); ++d)
        u[d] = rng::normal(17, static_cast<std::uint64_t>(d), 0, 0);
    CHECK((apply_F(identity, s.system, u) - u).cwiseAbs().maxCoeff() == 0.0);

    // ||F(u)-F(v)|| <= L ||u-v|| and same for G, on random pairs
    const CoefficientModel model = make_nemytskii_model(0.7, 1.0);
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd a(s.system.dof_count()), b(s.system.dof_count());
        for (int d = 0; d < a.size(); ++d) {
            a[d] = rng::normal(31, i, static_cast<std::uint64_t>(d), 0);
            b[d] = rng::normal(37, i, static_cast<std::uint64_t>(d), 0);
        }
        const double fa = s.system.l2_norm(Eigen::VectorXd(apply_F(model, s.system, a) -
                                                           apply_F(model, s.system, b)));
        CHECK(fa <= model.lipschitz_f * s.system.l2_norm(Eigen::VectorXd(a - b)) * (1 + 1e-12));
        Eigen::VectorXd w(4);
        for (int k = 0; k < 4; ++k) w[k] = rng::normal(41, i, static_cast<std::uint64_t>(k), 0);
        const double ga = s.system.l2_norm(Eigen::VectorXd(
            apply_G(model, s.system, spec, a, w) - apply_G(model, s.system, spec, b, w)));
        const double field_sup =
            (s.system.eigenvectors().leftCols(4) * w).cwiseAbs().maxCoeff();
        CHECK(ga <= model.lipschitz_g * field_sup *
                        s.system.l2_norm(Eigen::VectorXd(a - b)) * (1 + 1e-12));
    }
}

TEST_CASE("threshold-gated diffusion switches the singular channel") {
    auto& s = setup();
    CovarianceSpec spec;
    spec.rho = 0.0;
    spec.rank = 1;
    const Eigen::VectorXd u0 = s.system.interpolate(
        [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); });
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(s.system.dof_count());
    v0[0] = 1.0;
    const double c = 0.9;
    const CoefficientModel model = make_example2_model(u0, v0, c);

    Eigen::VectorXd w(1);
    w << 1.0;
    // below threshold: channel off, G(u) w = w * u0
    Eigen::VectorXd small = 0.5 * c / s.system.l2_norm(u0) * u0;
    CHECK((apply_G(model, s.system, spec, small, w) - u0).cwiseAbs().maxCoeff() == 0.0);
    // above threshold: v0 contribution present with slope-1 activation
    Eigen::VectorXd big = 2.0 * c / s.system.l2_norm(u0) * u0;
    const double act = s.system.l2_norm(big) - c;
    CHECK((apply_G(model, s.system, spec, big, w) - (u0 + act * v0)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK_THROWS(apply_G(model, s.system, spec, big, Eigen::VectorXd::Ones(2)));
}

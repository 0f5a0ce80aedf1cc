#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "cshe/rng.hpp"
#include "cshe/she.hpp"

using namespace cshe;

namespace {

struct Setup {
    PolygonalDomain domain;
    FemSystem system;
    Setup()
        : domain(build_domain({{0, 0}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}})),
          system(domain, triangulate(domain, 0.15)) {
        system.compute_eigenpairs(16);
    }
};

Setup& setup() {
    static Setup s;
    return s;
}

} // namespace

TEST_CASE("deterministic heat flow is exact per mode") {
    auto& s = setup();
    CovarianceSpec silent;
    silent.q0 = 0.0;
    silent.rank = 4;
    const CoefficientModel model = make_additive_model();
    const int k = 2;
    const Eigen::VectorXd u0 = s.system.eigenvectors().col(k);
    const PathSample path = simulate_path(s.system, silent, model, u0, 1.0, 64, 5);
    for (int n = 0; n <= 64; ++n) {
        const double expect = std::exp(-s.system.eigenvalues()[k] * path.times[n]);
        CHECK(path.coeffs(n, k) == doctest::Approx(expect).epsilon(1e-13));
        for (int j = 0; j < path.mode_count(); ++j) {
            // cross modes stay at the round-off level of the projection
            if (j != k) CHECK(std::abs(path.coeffs(n, j)) < 1e-13);
        }
    }
}

TEST_CASE("linear drift: first-order convergence to the closed form") {
    auto& s = setup();
    CovarianceSpec silent;
    silent.q0 = 0.0;
    silent.rank = 4;
    CoefficientModel model = make_nemytskii_model(1.0, 1.0);
    model.f_scalar = [](double v) { return -v; }; // F(u) = -u
    const int k = 1;
    const double lam = s.system.eigenvalues()[k];
    const Eigen::VectorXd u0 = s.system.eigenvectors().col(k);

    auto end_error = [&](int steps) {
        const PathSample path = simulate_path(s.system, silent, model, u0, 1.0, steps, 5);
        double err = 0.0;
        for (int n = 0; n <= steps; ++n) {
            err = std::max(err,
                           std::abs(path.coeffs(n, k) - std::exp(-(lam + 1.0) * path.times[n])));
        }
        return err;
    };
    const double e1 = end_error(64);
    const double e2 = end_error(128);
    const double e3 = end_error(256);
    CHECK(e2 < e1);
    CHECK(e3 < e2);
    const double order = std::log2(e1 / e3) / 2.0;
    CHECK(order == doctest::Approx(1.0).epsilon(0.25)); // first order
}

TEST_CASE("additive noise endpoint variance matches the OU oracle") {
    auto& s = setup();
    CovarianceSpec spec;
    spec.rank = 3;
    const CoefficientModel model = make_additive_model();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.system.dof_count());
    const double T = 1.0;
    const int steps = 64, paths = 10000;

    Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(3);
    for (int p = 0; p < paths; ++p) {
        const PathSample path =
            simulate_path(s.system, spec, model, zero, T, steps, rng::substream(99, p));
        for (int k = 0; k < 3; ++k) sum2[k] += path.coeffs(steps, k) * path.coeffs(steps, k);
    }
    for (int k = 0; k < 3; ++k) {
        const double lam = s.system.eigenvalues()[k];
        // discrete-time oracle: exact variance of the left-point
        // exponential Euler recursion
        const double dt = T / steps;
        double oracle = 0.0;
        for (int n = 0; n < steps; ++n) {
            const double tail = std::exp(-lam * (T - n * dt));
            oracle += tail * tail * spec.q(k + 1) * dt;
        }
        // continuous OU variance for scale reference
        const double cont = spec.q(k + 1) * (1.0 - std::exp(-2 * lam * T)) / (2 * lam);
        CHECK(sum2[k] / paths == doctest::Approx(oracle).epsilon(0.06));
        CHECK(oracle == doctest::Approx(cont).epsilon(0.1));
    }
}

TEST_CASE("path statistics: zero data, ordering invariance, resolution stability") {
    auto& s = setup();
    CovarianceSpec spec;
    spec.rank = 4;
    const CoefficientModel model = make_additive_model();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.system.dof_count());

    CovarianceSpec silent = spec;
    silent.q0 = 0.0;
    const PathSample quiet = simulate_path(s.system, silent, model, zero, 1.0, 16, 1);
    const PathStatistics zst = path_statistics({quiet});
    CHECK(zst.sup_mean_square == 0.0);
    CHECK(zst.end_mean_square == 0.0);

    std::vector<PathSample> paths;
    for (int p = 0; p < 8; ++p)
        paths.push_back(simulate_path(s.system, spec, model, zero, 1.0, 64, rng::substream(4, p)));
    const PathStatistics st = path_statistics(paths);
    std::reverse(paths.begin(), paths.end());
    const PathStatistics st_rev = path_statistics(paths);
    CHECK(st.sup_mean_square == doctest::Approx(st_rev.sup_mean_square).epsilon(1e-12));
    CHECK(st.end_mean_square == doctest::Approx(st_rev.end_mean_square).epsilon(1e-12));

    // boundedness under step doubling (common seeds, +-10%)
    std::vector<PathSample> fine;
    for (int p = 0; p < 64; ++p)
        fine.push_back(simulate_path(s.system, spec, model, zero, 1.0, 128, rng::substream(4, p)));
    std::vector<PathSample> coarse;
    for (int p = 0; p < 64; ++p)
        coarse.push_back(simulate_path(s.system, spec, model, zero, 1.0, 64, rng::substream(4, p)));
    CHECK(path_statistics(fine).sup_mean_square ==
          doctest::Approx(path_statistics(coarse).sup_mean_square).epsilon(0.10));

    CHECK_THROWS(path_statistics({}));
}

TEST_CASE("reproducibility and the binary trajectory store") {
    auto& s = setup();
    CovarianceSpec spec;
    spec.rank = 5;
    const CoefficientModel model = make_additive_model();
    const Eigen::VectorXd u0 = s.system.interpolate(
        [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); });

    const PathSample a = simulate_path(s.system, spec, model, u0, 1.0, 32, 777);
    const PathSample b = simulate_path(s.system, spec, model, u0, 1.0, 32, 777);
    CHECK((a.coeffs - b.coeffs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.increments - b.increments).cwiseAbs().maxCoeff() == 0.0);

    const std::string file = "/tmp/cshe_test_path.traj";
    write_path(a, file);
    const PathSample c = read_path(file, 1.0);
    CHECK(c.seed == a.seed);
    CHECK((a.coeffs - c.coeffs).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.increments - c.increments).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.times - c.times).cwiseAbs().maxCoeff() == 0.0);
    // byte-identical rewrite
    write_path(c, file + "2");
    std::FILE* f1 = std::fopen(file.c_str(), "rb");
    std::FILE* f2 = std::fopen((file + "2").c_str(), "rb");
    REQUIRE(f1);
    REQUIRE(f2);
    int ch1, ch2;
    do {
        ch1 = std::fgetc(f1);
        ch2 = std::fgetc(f2);
        CHECK(ch1 == ch2);
    } while (ch1 != EOF);
    std::fclose(f1);
    std::fclose(f2);

    CHECK_THROWS(simulate_path(s.system, spec, model, u0, 1.0, 1, 5)); // too few steps
}

TEST_CASE("non-finite states abort with the step index") {
    auto& s = setup();
    CovarianceSpec silent;
    silent.q0 = 0.0;
    silent.rank = 2;
    CoefficientModel model = make_nemytskii_model(1.0, 1.0);
    model.f_scalar = [](double v) { return 1e200 * (v + 1.0); }; // blows up fast
    const Eigen::VectorXd u0 = s.system.eigenvectors().col(0);
    try {
        simulate_path(s.system, silent, model, u0, 1.0, 16, 3);
        CHECK(false);
    } catch (const std::runtime_error& err) {
        CHECK(std::string(err.what()).find("step") != std::string::npos);
    }
}

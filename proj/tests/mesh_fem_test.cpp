#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "cshe/fem.hpp"
#include "cshe/rng.hpp"

using namespace cshe;

namespace {

PolygonalDomain l_shape() {
    return build_domain({{0, 0}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}});
}

PolygonalDomain square(double side = 1.0) {
    return build_domain({{0, 0}, {side, 0}, {side, side}, {0, side}});
}

} // namespace

TEST_CASE("triangulate: uniform square mesh basics") {
    const PolygonalDomain dom = square();
    const Mesh mesh = triangulate(dom, 0.5);
    CHECK(mesh.triangle_count() >= 8);
    CHECK(mesh.min_angle() >= 15.0 * M_PI / 180.0);
    double area = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        CHECK(mesh.triangle_area(t) > 0.0);
        area += mesh.triangle_area(t);
    }
    CHECK(area == doctest::Approx(1.0));
    // all nodes on the boundary are flagged and vice versa
    for (int i = 0; i < mesh.node_count(); ++i) {
        const Vec2& p = mesh.nodes[static_cast<std::size_t>(i)];
        const bool on_boundary = std::abs(p.x()) < 1e-12 || std::abs(p.x() - 1) < 1e-12 ||
                                 std::abs(p.y()) < 1e-12 || std::abs(p.y() - 1) < 1e-12;
        CHECK(mesh.boundary[static_cast<std::size_t>(i)] == on_boundary);
    }
    for (const auto& t : mesh.triangles) {
        double diam = 0.0;
        for (int e = 0; e < 3; ++e)
            diam = std::max(diam, (mesh.nodes[t[e]] - mesh.nodes[t[(e + 1) % 3]]).norm());
        CHECK(diam <= 0.5 + 1e-12);
    }
    CHECK_THROWS(triangulate(dom, -1.0));
}

TEST_CASE("triangulate: graded L-shape pulls nodes into the corner") {
    const PolygonalDomain dom = l_shape();
    const double h = 0.1;
    const Mesh mesh = triangulate(dom, h); // beta defaults to alpha = 2/3
    CHECK(mesh.min_angle() >= 15.0 * M_PI / 180.0);
    double rmin = 1e9;
    for (int i = 0; i < mesh.node_count(); ++i) {
        const double r = mesh.nodes[static_cast<std::size_t>(i)].norm();
        if (r > 1e-12) rmin = std::min(rmin, r);
    }
    CHECK(rmin < std::pow(h, 1.5));
    // conforming: every interior edge is shared by exactly two triangles
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int u = t[e], v = t[(e + 1) % 3];
            if (u > v) std::swap(u, v);
            edge_count[{u, v}]++;
        }
    }
    for (const auto& [edge, cnt] : edge_count) {
        const bool boundary_edge = mesh.boundary[static_cast<std::size_t>(edge.first)] &&
                                   mesh.boundary[static_cast<std::size_t>(edge.second)];
        CHECK(cnt <= 2);
        if (!boundary_edge) CHECK(cnt == 2);
    }
}

TEST_CASE("mesh text round trip is deterministic and exact") {
    const PolygonalDomain dom = l_shape();
    const Mesh mesh = triangulate(dom, 0.25);
    std::stringstream buf;
    write_mesh(mesh, buf);
    const std::string once = buf.str();
    Mesh back = read_mesh(buf);
    back.h = mesh.h;
    back.grading = mesh.grading;
    REQUIRE(back.node_count() == mesh.node_count());
    REQUIRE(back.triangle_count() == mesh.triangle_count());
    for (int i = 0; i < mesh.node_count(); ++i) {
        CHECK(back.nodes[static_cast<std::size_t>(i)] == mesh.nodes[static_cast<std::size_t>(i)]);
        CHECK(back.boundary[static_cast<std::size_t>(i)] ==
              mesh.boundary[static_cast<std::size_t>(i)]);
    }
    std::stringstream buf2;
    write_mesh(back, buf2);
    CHECK(buf2.str() == once);
}

TEST_CASE("P1 element matrices: row sums and positivity") {
    const Vec2 a(0, 0), b(1, 0), c(0, 1);
    const Eigen::Matrix3d k = p1_local_stiffness(a, b, c);
    for (int i = 0; i < 3; ++i)
        CHECK(k.row(i).sum() == doctest::Approx(0.0).epsilon(1e-14));
    const Eigen::Matrix3d m = p1_local_mass(a, b, c);
    CHECK(m.sum() == doctest::Approx(0.5)); // triangle area
    CHECK_THROWS(p1_local_stiffness(a, c, b)); // inverted
}

TEST_CASE("assembled system: mass total, SPD stiffness, interpolant norm") {
    const PolygonalDomain dom = square();
    FemSystem sys(dom, triangulate(dom, 0.1));
    CHECK(sys.full_mass_sum() == doctest::Approx(dom.area()));
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd w(sys.dof_count());
        for (int d = 0; d < sys.dof_count(); ++d)
            w[d] = 2.0 * rng::uniform(3, i, static_cast<std::uint64_t>(d), 0) - 1.0;
        CHECK(w.dot(sys.stiffness() * w) >= 0.0);
    }
    // L2 norm of the sin*sin interpolant tends to 1/2 under refinement
    auto l2_of_interpolant = [&](double h) {
        FemSystem s(dom, triangulate(dom, h));
        const Eigen::VectorXd w = s.interpolate(
            [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); });
        return s.l2_norm(w);
    };
    const double e1 = std::abs(l2_of_interpolant(0.2) - 0.5);
    const double e2 = std::abs(l2_of_interpolant(0.1) - 0.5);
    CHECK(e2 < e1);
    CHECK(e2 < 5e-3);
}

TEST_CASE("eigenpairs: orthonormality, Rayleigh, classical oracle, bracketing") {
    const PolygonalDomain dom = square();
    FemSystem sys(dom, triangulate(dom, 0.05));
    sys.compute_eigenpairs(8);
    const Eigen::VectorXd lam = sys.eigenvalues();
    // unit square eigenvalues pi^2 (m^2+n^2): 2, 5, 5, 8, 10, 10, 13, 13
    CHECK(lam[0] == doctest::Approx(2 * M_PI * M_PI).epsilon(0.01));
    CHECK(lam[1] == doctest::Approx(5 * M_PI * M_PI).epsilon(0.01));
    CHECK(lam[3] == doctest::Approx(8 * M_PI * M_PI).epsilon(0.02));
    for (int k = 1; k < 8; ++k) CHECK(lam[k] >= lam[k - 1]);
    // M-orthonormality
    const Eigen::MatrixXd gram =
        sys.eigenvectors().transpose() * sys.mass() * sys.eigenvectors();
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).norm() < 1e-9);
    // Rayleigh quotient of e1 equals lambda1 to machine precision
    const Eigen::VectorXd e1 = sys.eigenvectors().col(0);
    CHECK(e1.dot(sys.stiffness() * e1) / e1.dot(sys.mass() * e1) ==
          doctest::Approx(lam[0]).epsilon(1e-12));
    CHECK_THROWS(sys.compute_eigenpairs(sys.dof_count() + 1));

    // monotonicity under refinement (conforming P1 upper bounds)
    FemSystem coarse(dom, triangulate(dom, 0.1));
    coarse.compute_eigenpairs(8);
    for (int k = 0; k < 8; ++k) CHECK(lam[k] <= coarse.eigenvalues()[k] + 1e-9);

    // L-shape lambda1 bracketed by domain monotonicity:
    // containing square (-1,1)^2 and contained unit square
    const PolygonalDomain lshape = l_shape();
    FemSystem lsys(lshape, triangulate(lshape, 0.05));
    lsys.compute_eigenpairs(1);
    const double l1 = lsys.eigenvalues()[0];
    CHECK(l1 > 2 * M_PI * M_PI / 4.0);
    CHECK(l1 < 2 * M_PI * M_PI);
}

TEST_CASE("resolvent: eigen relation, Poisson residual, imaginary-axis bound") {
    const PolygonalDomain dom = l_shape();
    FemSystem sys(dom, triangulate(dom, 0.1));
    sys.compute_eigenpairs(12);

    // g = e_k: w = e_k / (z + lambda_k)
    const Complex z(0.7, 1.3);
    for (int k = 0; k < 4; ++k) {
        const Eigen::VectorXcd g = sys.eigenvectors().col(k).cast<Complex>();
        const Eigen::VectorXcd w = sys.resolvent_apply(z, g);
        const Eigen::VectorXcd expect = g / (z + sys.eigenvalues()[k]);
        CHECK((w - expect).norm() <= 1e-8 * expect.norm());
    }

    // z = 0: discrete Poisson solve, residual <= 1e-10
    Eigen::VectorXcd g(sys.dof_count());
    for (int d = 0; d < sys.dof_count(); ++d)
        g[d] = Complex(2.0 * rng::uniform(5, static_cast<std::uint64_t>(d), 0, 0) - 1.0, 0.0);
    const Eigen::VectorXcd w0 = sys.resolvent_apply(Complex(0, 0), g);
    const Eigen::VectorXcd res =
        sys.stiffness().cast<Complex>() * w0 - sys.mass().cast<Complex>() * g;
    CHECK(res.norm() <= 1e-10 * (sys.mass().cast<Complex>() * g).norm());

    // eigen-expansion agreement for g in the span of cached pairs
    Eigen::VectorXd coeffs(12);
    for (int k = 0; k < 12; ++k) coeffs[k] = rng::normal(9, static_cast<std::uint64_t>(k), 0, 0);
    const Eigen::VectorXcd gs = sys.eigen_combination(coeffs).cast<Complex>();
    const Eigen::VectorXcd ws = sys.resolvent_apply(z, gs);
    Eigen::VectorXcd expect = Eigen::VectorXcd::Zero(sys.dof_count());
    for (int k = 0; k < 12; ++k)
        expect += (coeffs[k] / (z + sys.eigenvalues()[k])) * sys.eigenvectors().col(k);
    CHECK((ws - expect).norm() <= 1e-8 * expect.norm());

    // imaginary axis: ||w|| <= ||g|| / |xi| (eigen-expansion oracle)
    const double xi = 500.0;
    const Eigen::VectorXcd wim = sys.resolvent_apply(Complex(0.0, xi), gs);
    CHECK(sys.l2_norm(wim) <= sys.l2_norm(gs) / xi * (1.0 + 1e-9));

    // near-spectrum rejection
    CHECK_THROWS(sys.resolvent_apply(Complex(-sys.eigenvalues()[0], 0.0), gs));
}

TEST_CASE("norms: eigenvector L2/H1, zero vector, surrogate passthrough") {
    const PolygonalDomain dom = square();
    FemSystem sys(dom, triangulate(dom, 0.1));
    sys.compute_eigenpairs(3);
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd e = sys.eigenvectors().col(k);
        CHECK(sys.l2_norm(e) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sys.h1_seminorm(e) ==
              doctest::Approx(std::sqrt(sys.eigenvalues()[k])).epsilon(1e-12));
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.dof_count());
    CHECK(sys.l2_norm(zero) == 0.0);
    CHECK(sys.h1_seminorm(zero) == 0.0);
    CHECK(sys.h2_surrogate(Eigen::VectorXcd::Zero(sys.dof_count())) == 0.0);
    const Eigen::VectorXd short_vec = Eigen::VectorXd::Zero(3);
    CHECK_THROWS(sys.l2_norm(short_vec));
}

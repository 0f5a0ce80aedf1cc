#include <doctest.h>

#include <cmath>

#include "cshe/transform.hpp"

using namespace cshe;

namespace {

PolygonalDomain l_shape() {
    return build_domain({{0, 0}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}});
}

} // namespace

TEST_CASE("order outside (1,2) is rejected") {
    const PolygonalDomain dom = l_shape();
    const SlobodeckijRegion region = corner_region(dom, 0);
    auto grad = [](const Vec2&) { return Vec2(0, 0); };
    CHECK_THROWS(slobodeckij_seminorm(dom, region, grad, 0.9, 2));
    CHECK_THROWS(slobodeckij_seminorm(dom, region, grad, 2.0, 2));
    CHECK_THROWS(slobodeckij_seminorm(dom, region, grad, 1.5, 0));
}

TEST_CASE("smooth bump: finite and stable across levels") {
    const PolygonalDomain dom = l_shape();
    const SlobodeckijRegion region = corner_region(dom, 0);
    // compactly supported C^1 bump away from the boundary
    auto grad = [](const Vec2& x) -> Vec2 {
        const Vec2 c(0.5, 0.5);
        const double r2 = (x - c).squaredNorm();
        const double R2 = 0.16;
        if (r2 >= R2) return Vec2(0, 0);
        // f = (1 - r2/R2)^3, grad = -6 (1-r2/R2)^2 (x-c)/R2
        const double q = 1.0 - r2 / R2;
        return (-3.0 * q * q * 2.0 / R2) * (x - c);
    };
    const double a = slobodeckij_seminorm(dom, region, grad, 1.5, 4);
    const double b = slobodeckij_seminorm(dom, region, grad, 1.5, 5);
    CHECK(std::isfinite(a));
    CHECK(a > 0.0);
    CHECK(std::abs(b / a - 1.0) <= 0.02);
}

TEST_CASE("singular function: converges below 1+alpha, blows up above") {
    const PolygonalDomain dom = l_shape();
    const SlobodeckijRegion region = corner_region(dom, 0);
    const double alpha = dom.corner(0).alpha;
    auto grad = [&](const Vec2& x) { return singular_gradient(dom, 0, x); };

    // s = 1 + alpha - 0.1: stabilizes across the two finest levels
    {
        std::vector<double> v;
        for (int level = 3; level <= 6; ++level)
            v.push_back(slobodeckij_seminorm(dom, region, grad, 1.0 + alpha - 0.1, level));
        CHECK(std::abs(v[3] / v[2] - 1.0) <= 0.02);
    }
    // s = 1 + alpha + 0.1: grows by at least 1.2 per level
    {
        std::vector<double> v;
        for (int level = 1; level <= 6; ++level)
            v.push_back(slobodeckij_seminorm(dom, region, grad, 1.0 + alpha + 0.1, level));
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] / v[i - 1] >= 1.2);
    }
}

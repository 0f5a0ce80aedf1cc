#include <cmath>
#include <stdexcept>

#include "cshe/quadrature.hpp"
#include "cshe/transform.hpp"

namespace cshe {

SlobodeckijRegion corner_region(const PolygonalDomain& domain, int corner) {
    const Corner& c = domain.corner(corner);
    SlobodeckijRegion r;
    r.center = c.frame.origin;
    r.base_angle = c.frame.base_angle;
    r.angle_span = c.gamma;
    r.outer_radius = 0.5 * c.r1;
    return r;
}

double slobodeckij_seminorm(const PolygonalDomain& domain, const SlobodeckijRegion& region,
                            const std::function<Vec2(const Vec2&)>& gradient, double s, int level,
                            double far_size) {
    if (!(s > 1.0 && s < 2.0))
        throw std::invalid_argument("slobodeckij_seminorm: order must be in (1,2)");
    if (level < 1) throw std::invalid_argument("slobodeckij_seminorm: level must be >= 1");
    const double sigma = s - 1.0;
    const double r_out = region.outer_radius;
    // The truncated double integral behaves like A + B * delta^{-2(sigma-alpha)}
    // for fields with an r^{alpha-1} gradient; four decades of band
    // shrinkage per level make that term dominate the level-to-level
    // ratio from the first refinement on.
    const double delta = r_out * std::pow(1e4, -level);

    struct QP {
        Vec2 x;
        double w;
        Vec2 g;
    };
    std::vector<QP> pts;

    // Fixed far field: centroid rule on a quasi-uniform triangulation,
    // excluding triangles inside the shell region.
    const Mesh far = triangulate(domain, far_size,
                                 std::vector<double>(static_cast<std::size_t>(domain.corner_count()), 1.0));
    for (int t = 0; t < far.triangle_count(); ++t) {
        const auto& tri = far.triangles[static_cast<std::size_t>(t)];
        const Vec2 cen = (far.nodes[tri[0]] + far.nodes[tri[1]] + far.nodes[tri[2]]) / 3.0;
        if ((cen - region.center).norm() < r_out) continue;
        pts.push_back({cen, far.triangle_area(t), gradient(cen)});
    }

    // Dyadic polar shells, halving down to delta.
    const int n_shells = static_cast<int>(std::ceil(std::log2(r_out / delta)));
    const auto gauss_r = quad::gauss_legendre(4, 0.0, 1.0);
    const auto gauss_t = quad::gauss_legendre(24, 0.0, 1.0);
    for (int i = 0; i < n_shells; ++i) {
        const double hi = r_out * std::pow(2.0, -i);
        const double lo = 0.5 * hi;
        for (const auto& [tt, wt] : gauss_t) {
            const double th = region.base_angle + region.angle_span * tt;
            const Vec2 dir(std::cos(th), std::sin(th));
            for (const auto& [rr, wr] : gauss_r) {
                const double r = lo + (hi - lo) * rr;
                const Vec2 x = region.center + r * dir;
                const double w = wt * region.angle_span * wr * (hi - lo) * r;
                pts.push_back({x, w, gradient(x)});
            }
        }
    }

    double sum = 0.0;
    const double d2min = delta * delta;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const QP& p = pts[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const QP& q = pts[j];
            const double dx = p.x.x() - q.x.x();
            const double dy = p.x.y() - q.x.y();
            const double d2 = dx * dx + dy * dy;
            if (d2 < d2min) continue;
            const double diff2 = (p.g - q.g).squaredNorm();
            sum += 2.0 * p.w * q.w * diff2 / std::pow(d2, 1.0 + sigma);
        }
    }
    return std::sqrt(sum);
}

} // namespace cshe

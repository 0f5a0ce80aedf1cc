#include "cshe/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace cshe {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        const double v = cross2(q - p, r - p);
        if (v > 1e-14) return 1;
        if (v < -1e-14) return -1;
        return 0;
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    auto on_seg = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        return std::min(p.x(), q.x()) - 1e-14 <= r.x() && r.x() <= std::max(p.x(), q.x()) + 1e-14 &&
               std::min(p.y(), q.y()) - 1e-14 <= r.y() && r.y() <= std::max(p.y(), q.y()) + 1e-14;
    };
    if (o1 == 0 && on_seg(a, b, c)) return true;
    if (o2 == 0 && on_seg(a, b, d)) return true;
    if (o3 == 0 && on_seg(c, d, a)) return true;
    if (o4 == 0 && on_seg(c, d, b)) return true;
    return false;
}

double point_segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double t = std::clamp(ab.dot(x - a) / ab.squaredNorm(), 0.0, 1.0);
    return (x - (a + t * ab)).norm();
}

// Quintic blend: 1 at s=0, 0 at s=1, C^2 with flat ends.
double blend(double s) { return 1.0 - (10.0 * s * s * s - 15.0 * s * s * s * s + 6.0 * s * s * s * s * s); }
double blend_d1(double s) { return -(30.0 * s * s - 60.0 * s * s * s + 30.0 * s * s * s * s); }
double blend_d2(double s) { return -(60.0 * s - 180.0 * s * s + 120.0 * s * s * s); }

} // namespace

std::pair<double, double> CornerFrame::polar(const Vec2& x) const {
    const Vec2 d = x - origin;
    const double r = d.norm();
    double th = std::atan2(d.y(), d.x()) - base_angle;
    while (th < 0.0) th += 2.0 * M_PI;
    while (th >= 2.0 * M_PI) th -= 2.0 * M_PI;
    return {r, th};
}

const Corner& PolygonalDomain::corner(int j) const {
    if (j < 0 || j >= corner_count()) throw std::out_of_range("corner index out of range");
    return corners_[static_cast<std::size_t>(j)];
}

bool PolygonalDomain::contains(const Vec2& x, double tol) const {
    // On or inside the boundary: ray cast with a boundary-distance guard.
    if (boundary_distance(x) <= tol) return true;
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& pi = vertices_[i];
        const Vec2& pj = vertices_[j];
        if ((pi.y() > x.y()) != (pj.y() > x.y())) {
            const double xint = pj.x() + (x.y() - pj.y()) / (pi.y() - pj.y()) * (pi.x() - pj.x());
            if (x.x() < xint) inside = !inside;
        }
    }
    return inside;
}

double PolygonalDomain::boundary_distance(const Vec2& x) const {
    double d = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        d = std::min(d, point_segment_distance(x, vertices_[i], vertices_[(i + 1) % n]));
    }
    return d;
}

PolygonalDomain build_domain(const std::vector<Vec2>& vertices,
                             const std::vector<std::pair<double, double>>& cutoff_radii) {
    const std::size_t n = vertices.size();
    if (n < 3) throw std::invalid_argument("build_domain: need at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if ((vertices[i] - vertices[j]).norm() < 1e-12)
                throw std::invalid_argument("build_domain: repeated vertices");
        }
    }
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        area2 += cross2(vertices[i], vertices[(i + 1) % n]);
    }
    if (area2 <= 0.0)
        throw std::invalid_argument("build_domain: vertices must be counter-clockwise");
    // Non-adjacent edges must not intersect.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j],
                                   vertices[(j + 1) % n]))
                throw std::invalid_argument("build_domain: polygon is self-intersecting");
        }
    }

    PolygonalDomain dom;
    dom.vertices_ = vertices;
    dom.area_ = 0.5 * area2;
    dom.angles_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& prev = vertices[(i + n - 1) % n];
        const Vec2& next = vertices[(i + 1) % n];
        const Vec2 e_in = vertices[i] - prev;
        const Vec2 e_out = next - vertices[i];
        const double turn = std::atan2(cross2(e_in, e_out), e_in.dot(e_out));
        dom.angles_[i] = M_PI - turn; // interior angle in (0, 2*pi)
    }

    // Re-entrant corners with their frames and cutoff radii.
    std::vector<std::size_t> reentrant;
    for (std::size_t i = 0; i < n; ++i) {
        if (dom.angles_[i] > M_PI + 1e-12) reentrant.push_back(i);
    }
    for (std::size_t c = 0; c < reentrant.size(); ++c) {
        const std::size_t i = reentrant[c];
        Corner k;
        k.vertex = static_cast<int>(i);
        k.gamma = dom.angles_[i];
        k.alpha = M_PI / k.gamma;
        const Vec2 edge = vertices[(i + 1) % n] - vertices[i];
        k.frame.origin = vertices[i];
        k.frame.base_angle = std::atan2(edge.y(), edge.x());

        // Distance from the vertex to every boundary feature not meeting
        // it, and half the distance to other re-entrant corners; the
        // annulus must stay clear of both.
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < n; ++e) {
            if (e == i || (e + 1) % n == i) continue; // edges meeting the vertex
            d = std::min(d, point_segment_distance(vertices[i], vertices[e], vertices[(e + 1) % n]));
        }
        for (const std::size_t o : reentrant) {
            if (o != i) d = std::min(d, 0.5 * (vertices[o] - vertices[i]).norm());
        }
        k.r0 = 0.3 * d;
        k.r1 = 0.6 * d;
        dom.corners_.push_back(k);
    }

    if (!cutoff_radii.empty()) {
        if (cutoff_radii.size() != dom.corners_.size())
            throw std::invalid_argument("build_domain: cutoff radii count does not match the "
                                        "number of re-entrant corners");
        for (std::size_t c = 0; c < cutoff_radii.size(); ++c) {
            const auto [r0, r1] = cutoff_radii[c];
            if (!(0.0 < r0 && r0 < r1))
                throw std::invalid_argument("build_domain: cutoff radii need 0 < r0 < r1");
            if (r1 > dom.corners_[c].r1 / 0.6 + 1e-12)
                throw std::invalid_argument("build_domain: cutoff support reaches a non-adjacent "
                                            "boundary feature");
            dom.corners_[c].r0 = r0;
            dom.corners_[c].r1 = r1;
        }
    }
    return dom;
}

double cutoff_eval(const PolygonalDomain& domain, int j, double r) {
    const Corner& c = domain.corner(j);
    if (r <= c.r0) return 1.0;
    if (r >= c.r1) return 0.0;
    return blend((r - c.r0) / (c.r1 - c.r0));
}

double cutoff_d1(const PolygonalDomain& domain, int j, double r) {
    const Corner& c = domain.corner(j);
    if (r <= c.r0 || r >= c.r1) return 0.0;
    const double w = c.r1 - c.r0;
    return blend_d1((r - c.r0) / w) / w;
}

double cutoff_d2(const PolygonalDomain& domain, int j, double r) {
    const Corner& c = domain.corner(j);
    if (r <= c.r0 || r >= c.r1) return 0.0;
    const double w = c.r1 - c.r0;
    return blend_d2((r - c.r0) / w) / (w * w);
}

double singular_eval(const PolygonalDomain& domain, int j, const Vec2& x) {
    if (!domain.contains(x, 1e-9))
        throw std::invalid_argument("singular_eval: point outside the domain closure");
    const Corner& c = domain.corner(j);
    const auto [r, th] = c.frame.polar(x);
    if (r >= c.r1) return 0.0;
    if (r == 0.0) return 0.0;
    return cutoff_eval(domain, j, r) * std::pow(r, c.alpha) * std::sin(c.alpha * th);
}

double dual_seed_eval(const PolygonalDomain& domain, int j, const Vec2& x) {
    if (!domain.contains(x, 1e-9))
        throw std::invalid_argument("dual_seed_eval: point outside the domain closure");
    const Corner& c = domain.corner(j);
    const auto [r, th] = c.frame.polar(x);
    if (r >= c.r1) return 0.0;
    return std::pow(r, -c.alpha) * std::sin(c.alpha * th) * cutoff_eval(domain, j, r);
}

Complex sqrt_right_half(Complex z) {
    if (z.imag() == 0.0 && z.real() < 0.0)
        throw std::invalid_argument("sqrt_right_half: z on the negative real axis");
    const Complex s = std::sqrt(z);
    return (s.real() >= 0.0) ? s : -s;
}

Complex laplacian_of_singular(const PolygonalDomain& domain, int j, const Vec2& x,
                              std::optional<Complex> z) {
    const Corner& c = domain.corner(j);
    const auto [r, th] = c.frame.polar(x);
    if (r >= c.r1 || r == 0.0) return Complex(0.0, 0.0);
    const double a = c.alpha;
    const double eta = cutoff_eval(domain, j, r);
    const double eta1 = cutoff_d1(domain, j, r);
    const double eta2 = cutoff_d2(domain, j, r);
    const double s = std::sin(a * th);
    // Lap(eta * r^a * sin) = sin * (eta'' r^a + (2a+1) eta' r^{a-1}).
    const double lap_s = s * (eta2 * std::pow(r, a) + (2.0 * a + 1.0) * eta1 * std::pow(r, a - 1.0));
    if (!z.has_value()) return Complex(lap_s, 0.0);
    const Complex beta = sqrt_right_half(*z);
    // Lap(e^{-beta r} B sin) = e^{-beta r} [Lap(B sin) + (beta^2 B
    // - beta (2B' + B/r)) sin], B = eta r^a.
    const double B = eta * std::pow(r, a);
    const double B1 = eta1 * std::pow(r, a) + a * eta * std::pow(r, a - 1.0);
    const Complex extra = (*z) * B - beta * (2.0 * B1 + B / r);
    return std::exp(-beta * r) * (Complex(lap_s, 0.0) + extra * s);
}

double laplacian_of_dual_seed(const PolygonalDomain& domain, int j, const Vec2& x) {
    const Corner& c = domain.corner(j);
    const auto [r, th] = c.frame.polar(x);
    if (r >= c.r1 || r <= c.r0) return 0.0;
    const double a = c.alpha;
    const double eta1 = cutoff_d1(domain, j, r);
    const double eta2 = cutoff_d2(domain, j, r);
    // Lap(eta * r^{-a} * sin) = sin * (eta'' r^{-a} + (1-2a) eta' r^{-a-1}).
    return std::sin(a * th) *
           (eta2 * std::pow(r, -a) + (1.0 - 2.0 * a) * eta1 * std::pow(r, -a - 1.0));
}

Complex damped_singular_eval(const PolygonalDomain& domain, int j, const Vec2& x, Complex z) {
    const Corner& c = domain.corner(j);
    const auto [r, th] = c.frame.polar(x);
    if (r >= c.r1 || r == 0.0) return Complex(0.0, 0.0);
    const Complex beta = sqrt_right_half(z);
    return std::exp(-beta * r) * cutoff_eval(domain, j, r) * std::pow(r, c.alpha) *
           std::sin(c.alpha * th);
}

Vec2 singular_gradient(const PolygonalDomain& domain, int j, const Vec2& x) {
    const Corner& c = domain.corner(j);
    const auto [r, th] = c.frame.polar(x);
    if (r >= c.r1 || r == 0.0) return Vec2::Zero();
    const double a = c.alpha;
    const double eta = cutoff_eval(domain, j, r);
    const double eta1 = cutoff_d1(domain, j, r);
    const double amp = eta1 * std::pow(r, a) + a * eta * std::pow(r, a - 1.0);
    const double dr = amp * std::sin(a * th);
    const double dth = eta * std::pow(r, a - 1.0) * a * std::cos(a * th);
    const double phi = c.frame.base_angle + th;
    return Vec2(dr * std::cos(phi) - dth * std::sin(phi), dr * std::sin(phi) + dth * std::cos(phi));
}

double levy_kernel(double t, double r) {
    if (t <= 0.0) return 0.0;
    return 0.5 / std::sqrt(M_PI) * std::pow(t, -1.5) * r * std::exp(-r * r / (4.0 * t));
}

} // namespace cshe

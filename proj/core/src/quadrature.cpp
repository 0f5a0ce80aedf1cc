#include "cshe/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace cshe {
namespace quad {

std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b) {
    // Newton iteration on Legendre polynomials, nodes on [-1,1] then
    // mapped to [a,b].
    std::vector<std::pair<double, double>> out(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
        out[i] = {xm - xl * x, xl * w};
        out[n - 1 - i] = {xm + xl * x, xl * w};
    }
    return out;
}

std::vector<Point2> triangle_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                  const Eigen::Vector2d& c) {
    // 7-point degree-5 rule (barycentric).
    static const double w0 = 9.0 / 40.0;
    static const double wa = (155.0 - std::sqrt(15.0)) / 1200.0;
    static const double wb = (155.0 + std::sqrt(15.0)) / 1200.0;
    static const double a1 = (6.0 - std::sqrt(15.0)) / 21.0;
    static const double b1 = (6.0 + std::sqrt(15.0)) / 21.0;
    static const std::array<std::array<double, 4>, 7> bary = {{
        {1.0 / 3, 1.0 / 3, 1.0 / 3, w0},
        {a1, a1, 1 - 2 * a1, wa},
        {a1, 1 - 2 * a1, a1, wa},
        {1 - 2 * a1, a1, a1, wa},
        {b1, b1, 1 - 2 * b1, wb},
        {b1, 1 - 2 * b1, b1, wb},
        {1 - 2 * b1, b1, b1, wb},
    }};
    const double area =
        0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
    std::vector<Point2> pts;
    pts.reserve(7);
    for (const auto& q : bary) {
        const Eigen::Vector2d p = q[0] * a + q[1] * b + q[2] * c;
        pts.push_back({p.x(), p.y(), q[3] * area});
    }
    return pts;
}

namespace {

template <typename T>
T corner_integral_impl(const Eigen::Vector2d& v, const Eigen::Vector2d& a,
                       const Eigen::Vector2d& b, double p,
                       const std::function<T(const Eigen::Vector2d&)>& f, int n_theta,
                       int n_radial) {
    if (p <= -2.0) throw std::invalid_argument("corner_triangle_integral: power must be > -2");
    const Eigen::Vector2d da = a - v, db = b - v;
    const double tha = std::atan2(da.y(), da.x());
    double thb = std::atan2(db.y(), db.x());
    // Sweep from tha to thb the short way (triangle apex angle < pi).
    double span = thb - tha;
    while (span > M_PI) span -= 2 * M_PI;
    while (span < -M_PI) span += 2 * M_PI;
    // Line through a,b: n . x = d.
    const Eigen::Vector2d ab = b - a;
    Eigen::Vector2d nrm(ab.y(), -ab.x());
    nrm.normalize();
    const double dist = nrm.dot(a - v);

    const double q = p + 2.0;
    const auto gth = gauss_legendre(n_theta, 0.0, 1.0);
    const auto gr = gauss_legendre(n_radial, 0.0, 1.0);
    T sum{};
    for (const auto& [ts, wt] : gth) {
        const double th = tha + span * ts;
        const Eigen::Vector2d dir(std::cos(th), std::sin(th));
        const double denom = nrm.dot(dir);
        if (std::abs(denom) < 1e-14) continue;
        const double R = dist / denom;
        // \int_0^R r^{p+1} g(r) dr = R^q/q \int_0^1 g(R s^{1/q}) ds
        const double fac = std::pow(R, q) / q * std::abs(span) * wt;
        for (const auto& [ss, ws] : gr) {
            const double r = R * std::pow(ss, 1.0 / q);
            sum += fac * ws * f(v + r * dir);
        }
    }
    return sum;
}

struct GK715 {
    // Kronrod 15 nodes (positive half) and weights; Gauss-7 weights.
    static constexpr std::array<double, 8> xk = {0.0,
                                                 0.2077849550078985,
                                                 0.4058451513773972,
                                                 0.5860872354676911,
                                                 0.7415311855993945,
                                                 0.8648644233597691,
                                                 0.9491079123427585,
                                                 0.9914553711208126};
    static constexpr std::array<double, 8> wk = {0.2094821410847278, 0.2044329400752989,
                                                 0.1903505780647854, 0.1690047266392679,
                                                 0.1406532597155259, 0.1047900103222502,
                                                 0.0630920926299786, 0.0229353220105292};
    static constexpr std::array<double, 4> wg = {0.4179591836734694, 0.3818300505051189,
                                                 0.2797053914892767, 0.1294849661688697};
};

std::complex<double> gk_panel(const std::function<std::complex<double>(double)>& f, double a,
                              double b, double& err) {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    std::complex<double> ik = GK715::wk[0] * f(c);
    std::complex<double> ig = GK715::wg[0] * f(c);
    for (int i = 1; i < 8; ++i) {
        const std::complex<double> fv = f(c - h * GK715::xk[i]) + f(c + h * GK715::xk[i]);
        ik += GK715::wk[i] * fv;
        if (i % 2 == 0) ig += GK715::wg[i / 2] * fv;
    }
    ik *= h;
    ig *= h;
    err = std::abs(ik - ig);
    return ik;
}

std::complex<double> gk_adapt(const std::function<std::complex<double>(double)>& f, double a,
                              double b, double tol, int depth) {
    double err = 0.0;
    const std::complex<double> whole = gk_panel(f, a, b, err);
    if (err <= tol || depth <= 0) return whole;
    const double m = 0.5 * (a + b);
    return gk_adapt(f, a, m, tol * 0.5, depth - 1) + gk_adapt(f, m, b, tol * 0.5, depth - 1);
}

} // namespace

double corner_triangle_integral(const Eigen::Vector2d& v, const Eigen::Vector2d& a,
                                const Eigen::Vector2d& b, double p,
                                const std::function<double(const Eigen::Vector2d&)>& f,
                                int n_theta, int n_radial) {
    return corner_integral_impl<double>(v, a, b, p, f, n_theta, n_radial);
}

std::complex<double>
corner_triangle_integral_c(const Eigen::Vector2d& v, const Eigen::Vector2d& a,
                           const Eigen::Vector2d& b, double p,
                           const std::function<std::complex<double>(const Eigen::Vector2d&)>& f,
                           int n_theta, int n_radial) {
    return corner_integral_impl<std::complex<double>>(v, a, b, p, f, n_theta, n_radial);
}

std::complex<double> adaptive_gk(const std::function<std::complex<double>(double)>& f, double a,
                                 double b, double rel_tol, int max_depth) {
    double err = 0.0;
    const std::complex<double> rough = gk_panel(f, a, b, err);
    const double tol = std::max(std::abs(rough), 1e-300) * rel_tol;
    return gk_adapt(f, a, b, tol, max_depth);
}

} // namespace quad
} // namespace cshe

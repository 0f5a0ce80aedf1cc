#ifndef CSHE_QUADRATURE_HPP
#define CSHE_QUADRATURE_HPP

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace cshe {
namespace quad {

struct Point2 {
    double x;
    double y;
    double w;
};

// Gauss-Legendre nodes/weights on [a,b].
std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b);

// Symmetric degree-5 rule on a triangle (7 points), weights carry the
// physical area.
std::vector<Point2> triangle_rule(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                  const Eigen::Vector2d& c);

// Integrates |x - v|^p * f(x) over the triangle (v, a, b), p > -2.
// Polar coordinates about v with the radial power absorbed by the
// substitution r = R(theta) * t^{1/(p+2)}, so the integrand seen by the
// Gauss rule is smooth.
double corner_triangle_integral(const Eigen::Vector2d& v, const Eigen::Vector2d& a,
                                const Eigen::Vector2d& b, double p,
                                const std::function<double(const Eigen::Vector2d&)>& f,
                                int n_theta = 12, int n_radial = 12);

std::complex<double>
corner_triangle_integral_c(const Eigen::Vector2d& v, const Eigen::Vector2d& a,
                           const Eigen::Vector2d& b, double p,
                           const std::function<std::complex<double>(const Eigen::Vector2d&)>& f,
                           int n_theta = 12, int n_radial = 12);

// Adaptive Gauss-Kronrod (7-15) on [a,b] for complex-valued integrands.
std::complex<double> adaptive_gk(const std::function<std::complex<double>(double)>& f, double a,
                                 double b, double rel_tol = 1e-10, int max_depth = 30);

} // namespace quad
} // namespace cshe

#endif

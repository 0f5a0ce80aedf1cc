#ifndef CSHE_GEOMETRY_HPP
#define CSHE_GEOMETRY_HPP

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace cshe {

using Vec2 = Eigen::Vector2d;
using Complex = std::complex<double>;

// Per-corner polar frame: origin at the vertex, zero angle along the
// outgoing edge, angles measured counter-clockwise into the domain.
struct CornerFrame {
    Vec2 origin;
    double base_angle = 0.0;

    // (r, theta) of a point in this frame, theta normalized to [0, 2*pi).
    std::pair<double, double> polar(const Vec2& x) const;
};

struct Corner {
    int vertex = 0;            // index into PolygonalDomain::vertices
    double gamma = 0.0;        // interior angle
    double alpha = 0.0;        // pi / gamma
    CornerFrame frame;
    double r0 = 0.0;           // cutoff plateau radius
    double r1 = 0.0;           // cutoff support radius
};

// Simple, closed, positively oriented polygon with its re-entrant
// corner data. Immutable after construction; all evaluators are pure.
class PolygonalDomain {
  public:
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<double>& angles() const { return angles_; }
    const std::vector<Corner>& corners() const { return corners_; }
    const Corner& corner(int j) const;
    int corner_count() const { return static_cast<int>(corners_.size()); }

    double area() const { return area_; }
    bool contains(const Vec2& x, double tol = 1e-12) const;
    double boundary_distance(const Vec2& x) const;

    friend PolygonalDomain
    build_domain(const std::vector<Vec2>& vertices,
                 const std::vector<std::pair<double, double>>& cutoff_radii);

  private:
    std::vector<Vec2> vertices_;
    std::vector<double> angles_;
    std::vector<Corner> corners_;
    double area_ = 0.0;
};

// Validates the polygon (>= 3 distinct vertices, CCW, simple), computes
// interior angles, flags re-entrant corners and assigns cutoff radii.
// `cutoff_radii` overrides the default (r0, r1) per re-entrant corner in
// corner order; pass {} for defaults.
PolygonalDomain build_domain(const std::vector<Vec2>& vertices,
                             const std::vector<std::pair<double, double>>& cutoff_radii = {});

// Radial cutoff: 1 on [0, r0], 0 on [r1, inf), quintic C^2 blend between.
double cutoff_eval(const PolygonalDomain& domain, int j, double r);
double cutoff_d1(const PolygonalDomain& domain, int j, double r);
double cutoff_d2(const PolygonalDomain& domain, int j, double r);

// Corner singularity function S_j = cutoff * r^alpha * sin(alpha*theta).
double singular_eval(const PolygonalDomain& domain, int j, const Vec2& x);

// Dual seed psi_j = cutoff * r^{-alpha} * sin(alpha*theta).
double dual_seed_eval(const PolygonalDomain& domain, int j, const Vec2& x);

// Laplacian of S_j (z = nullopt) or of exp(-r*sqrt(z))*S_j (z given),
// closed form. sqrt uses the branch with nonnegative real part; z on the
// negative real axis is rejected.
Complex laplacian_of_singular(const PolygonalDomain& domain, int j, const Vec2& x,
                              std::optional<Complex> z = std::nullopt);

// Same for the dual seed: Laplacian of psi_j (supported on the cutoff
// annulus).
double laplacian_of_dual_seed(const PolygonalDomain& domain, int j, const Vec2& x);

// exp(-r*sqrt(z)) * S_j at x.
Complex damped_singular_eval(const PolygonalDomain& domain, int j, const Vec2& x, Complex z);

// Cartesian gradient of S_j (closed form, defined away from the vertex).
Vec2 singular_gradient(const PolygonalDomain& domain, int j, const Vec2& x);

// Time-domain kernel whose Laplace transform in t is exp(-r*sqrt(z))
// (the Levy first-passage density): 1_{t>0} * r/(2*sqrt(pi)) * t^{-3/2}
// * exp(-r^2/(4t)).
double levy_kernel(double t, double r);

// Principal square root with Re >= 0; throws on the negative real axis.
Complex sqrt_right_half(Complex z);

} // namespace cshe

#endif

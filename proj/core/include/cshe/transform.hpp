#ifndef CSHE_TRANSFORM_HPP
#define CSHE_TRANSFORM_HPP

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cshe/she.hpp"

namespace cshe {

// Symmetric uniform frequency grid xi_m = m * spacing, m = -M..M. Data
// for real signals is Hermitian, so containers store m = 0..M and the
// negative half is the conjugate.
struct FrequencyGrid {
    double spacing = 0.0;
    int half_count = 0;

    double xi(int m) const { return spacing * m; }
    int size() const { return 2 * half_count + 1; }
    double pad() const { return M_PI / spacing; } // half-length of the time window

    // spacing = pi / (pad_factor * T), half_count up to the path Nyquist
    // pi / dt.
    static FrequencyGrid for_path(double T, int n_steps, int pad_factor = 4);
};

struct ScalarSpectrum {
    FrequencyGrid grid;
    Eigen::VectorXcd values; // index m = 0..M

    Complex at(int m) const { return m >= 0 ? values[m] : std::conj(values[-m]); }
};

// Per-frequency coefficient vectors in the eigenbasis, rows m = 0..M.
struct FieldSpectrum {
    FrequencyGrid grid;
    Eigen::MatrixXcd coeffs;

    Eigen::VectorXcd at(int m) const {
        return m >= 0 ? coeffs.row(m).transpose().eval()
                      : coeffs.row(-m).transpose().conjugate().eval();
    }
};

// Time samples on the uniform grid covering [-pad, pad).
struct PhiSignal {
    Eigen::VectorXd times;
    Eigen::VectorXd values;
    double dt = 0.0;
};

struct SupportCheck {
    double mass_fraction = 0.0;
    double delta = 0.0;
    double tol = 0.0;
    bool accepted = false;
};

struct DecompositionOptions {
    int pad_factor = 4;
    double window_fraction = 0.1; // raised-cosine taper on the outer grid
    double sobolev_s = 0.75;
    double support_delta_steps = 5.0; // delta = steps * dt
    double support_tol = 1e-2;
};

// Output of the per-path frequency-domain split. The regular part is
// stored eigen-projected (coefficients row per frequency); its full
// L2 / Laplacian-L2 magnitudes are computed against the closed-form
// singular fields during the sweep and kept as per-frequency traces.
struct Decomposition {
    FrequencyGrid grid;
    DecompositionOptions options;
    std::vector<ScalarSpectrum> coefficient;  // c_j per re-entrant corner
    std::vector<PhiSignal> phi;               // windowed inverse transforms
    std::vector<SupportCheck> support;
    std::vector<double> phi_norm_windowed;    // H^{(1-alpha_j)/2 - s}(R)
    std::vector<double> phi_norm_raw;
    Eigen::MatrixXcd regular_coeffs;          // (M+1) x m eigen-projected U_R
    Eigen::VectorXd regular_l2;               // ||U_R(i xi_m)||
    Eigen::VectorXd regular_lap_l2;           // ||Lap U_R(i xi_m)||
    Eigen::VectorXd h_l2;                     // ||H(i xi_m)||
    double regular_tensor_norm_sq = 0.0;      // sum (1+xi^2)^{-s} ||Lap U_R||^2 dxi
    bool accepted = false;
};

// ---- frequency-domain transforms of a path ----

// Trapezoidal Laplace transform of the path along z = i xi.
FieldSpectrum laplace_of_path(const PathSample& path, const FrequencyGrid& grid);

// H(i xi) = int e^{-i xi t} F(u) dt + sum e^{-i xi t_n} G(u_n) dW_n
//           - e^{-i xi T} u(T) + u(0),
// trapezoid for the drift, left-point Ito sums reusing the path's own
// increments for the stochastic term.
FieldSpectrum h_transform(const PathSample& path, const FemSystem& system,
                          const CovarianceSpec& spec, const CoefficientModel& model,
                          const FrequencyGrid& grid);

// Per-frequency relative residual of -Lap U + z U = H in the dual
// discrete norm; exact coefficient identity per mode.
Eigen::VectorXd helmholtz_residual(const FemSystem& system, const FieldSpectrum& u,
                                   const FieldSpectrum& h);
double helmholtz_residual_at(const FemSystem& system, Complex z, const Eigen::VectorXcd& u,
                             const Eigen::VectorXcd& h);

// ---- dual singular functions ----

// v0 = (psi0 - phi0)/pi: phi0 solves the Poisson problem with the
// analytic Laplacian of the dual seed as load; psi0 interpolated
// nodally, patch-averaged within 1e-3 of the corner.
Eigen::VectorXd dual_base(const FemSystem& system, int corner);

// v(z) = v0 - z (z - Lap)^{-1} v0 via the complex shifted solve.
Eigen::VectorXcd dual_function(const FemSystem& system, int corner, Complex z,
                               const Eigen::VectorXd& v0);

// Eigen-pairings of the dual function: d_k(z) = <e_k, conj(v(z))> =
// v0_k * lambda_k / (z + lambda_k), closed form (exact for the discrete
// resolvent on the eigen-span).
Eigen::VectorXcd dual_eigen_pairings(const FemSystem& system, const Eigen::VectorXd& v0_coeffs,
                                     Complex z);

// c(z) = <H(z), conj(v(z))> for a frequency field in the eigen-span.
ScalarSpectrum singular_coefficient(const FemSystem& system, const FieldSpectrum& h,
                                    const Eigen::VectorXd& v0);
Complex singular_coefficient_at(const FemSystem& system, const Eigen::VectorXcd& h_nodal,
                                const Eigen::VectorXcd& v_z);

// ---- regular part at a single z for general (non eigen-span) data ----

struct RegularPart {
    Eigen::VectorXcd field;     // U_R = (z - Lap)^{-1} H - c e^{-r sqrt z} S
    Eigen::VectorXcd laplacian; // z (z - Lap)^{-1} H - H - c Lap(e^{-r sqrt z} S)
};

RegularPart regular_part_at(const FemSystem& system, Complex z, const Eigen::VectorXcd& h,
                            const std::vector<Complex>& c_per_corner);

// ---- inverse transform, support and norms ----

// Inverse Fourier transform of the coefficient spectrum onto the time
// grid covering [-pad, pad), raised-cosine window on the outer
// `window_fraction` of the grid, output real by Hermitian symmetry.
PhiSignal phi_from_spectrum(const ScalarSpectrum& c, double window_fraction);

SupportCheck support_check(const PhiSignal& phi, double delta, double tol);

// sqrt( sum (1 + xi^2)^s |f(xi)|^2 dxi ) over the full symmetric grid.
double sobolev_time_norm(const ScalarSpectrum& f, double s);
// Spectrum of uniformly sampled data (for time-domain inputs).
ScalarSpectrum spectrum_of_signal(const PhiSignal& signal);

// ---- kernel convolution ----

struct ConvolutionResult {
    PhiSignal convolved; // (phi * g)(t), g(t) = int k(t, r(x)) S(x) psi(x) dx
    double pairing = 0.0;
};

ConvolutionResult convolve_singular(const FemSystem& system, int corner, const PhiSignal& phi,
                                    const Eigen::VectorXd& psi_test,
                                    const Eigen::VectorXd& phi_test);

// ---- the end-to-end split of one path ----

// Workspace shared by per-frequency sweeps: dof lists and eigen blocks
// restricted to the support of each corner's singular functions.
struct CornerSweep {
    int corner = 0;
    std::vector<int> dofs;          // dofs with r < r1
    Eigen::MatrixXd mass_eigs;      // rows of M*E for those dofs
    SparseD mass_block;             // M restricted to those dofs
    Eigen::VectorXd v0;             // dual base (all dofs)
    Eigen::VectorXd v0_coeffs;      // eigen coefficients of v0
    std::vector<double> radius;     // polar radius per support dof
    std::vector<double> angle;      // polar angle per support dof
};

CornerSweep make_corner_sweep(const FemSystem& system, int corner);

// Nodal values (on the sweep's support dofs) of e^{-r sqrt z} S and its
// Laplacian at a given z.
void corner_fields_at(const FemSystem& system, const CornerSweep& sweep, Complex z,
                      Eigen::VectorXcd& singular, Eigen::VectorXcd& laplacian);

// Path-independent per-frequency data: eigen pairings and norms of the
// corner fields on the grid. Built once per (system, grid), shared by
// every path decomposed on it.
struct TransformPlan {
    FrequencyGrid grid;
    std::vector<CornerSweep> corners;
    std::vector<Eigen::MatrixXcd> singular_pairings;  // per corner, (M+1) x m
    std::vector<Eigen::MatrixXcd> laplacian_pairings; // per corner, (M+1) x m
    std::vector<Eigen::VectorXd> singular_norm2;      // per corner, M+1
    std::vector<Eigen::VectorXd> laplacian_norm2;     // per corner, M+1
};

TransformPlan make_transform_plan(const FemSystem& system, const FrequencyGrid& grid,
                                  int threads = 1);

Decomposition decompose_path(const FemSystem& system, const CovarianceSpec& spec,
                             const CoefficientModel& model, const PathSample& path,
                             const TransformPlan& plan, const DecompositionOptions& options);

// Worst-case relative mismatch of time-space test pairings between the
// path and (regular + convolution) reconstruction; Gaussian-windowed
// Fourier modes in time, leading eigenfunctions in space.
double decomposition_residual(const FemSystem& system, const PathSample& path,
                              const Decomposition& decomp, int n_time_tests, int n_space_tests);

// ---- fractional Sobolev seminorm of order s in (1,2) ----

// Region descriptor for the graded product quadrature: dyadic shells
// around `center` spanning [outer_radius * 1e-4^level, outer_radius]
// over the angular range, plus a fixed quasi-uniform far field. The
// diagonal band |x - y| < outer_radius * 1e-4^level is excluded, so the
// value at increasing levels witnesses convergence or blow-up of the
// double integral.
struct SlobodeckijRegion {
    Vec2 center = Vec2::Zero();
    double base_angle = 0.0;
    double angle_span = 2.0 * M_PI;
    double outer_radius = 0.0;
};

SlobodeckijRegion corner_region(const PolygonalDomain& domain, int corner);

double slobodeckij_seminorm(const PolygonalDomain& domain, const SlobodeckijRegion& region,
                            const std::function<Vec2(const Vec2&)>& gradient, double s, int level,
                            double far_size = 0.09);

} // namespace cshe

#endif

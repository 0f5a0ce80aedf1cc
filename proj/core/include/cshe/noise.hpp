#ifndef CSHE_NOISE_HPP
#define CSHE_NOISE_HPP

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "cshe/fem.hpp"

namespace cshe {

// Trace-class covariance diagonal in the discrete Laplacian eigenbasis:
// Q e_k = q_k e_k with q_k = q0 * k^{-rho}, truncated at `rank` modes.
struct CovarianceSpec {
    double q0 = 1.0;
    double rho = 2.2;
    int rank = 100;
    bool dense_range = true; // q_k > 0 for all k <= rank

    double q(int k) const; // 1-based mode index
    double trace() const;
    Eigen::VectorXd q_vector() const;
};

enum class ModelVariant { additive, nemytskii_smooth, finite_dim, example2 };

ModelVariant model_variant_from_string(const std::string& name);
std::string to_string(ModelVariant v);

// Drift/diffusion coefficient pair. The noise-mode argument w of
// apply_G holds the increment's coefficients in the covariance
// eigenbasis (variance q_k dt per mode), so the additive variant is the
// identity embedding of those modes.
struct CoefficientModel {
    ModelVariant variant = ModelVariant::additive;
    // Scalar Nemytskii profiles for the drift f(x,.) and diffusion
    // g(x,.); empty f_scalar means zero drift.
    std::function<double(double)> f_scalar;
    std::function<double(double)> g_scalar;
    double lipschitz_f = 0.0;
    double lipschitz_g = 1.0;
    // example2 data
    Eigen::VectorXd u0_field; // dof vector
    Eigen::VectorXd v0_field; // dof vector
    double threshold = 0.0;   // activation threshold c, supp g = [c, inf)

    bool has_drift() const;
};

CoefficientModel make_additive_model();
CoefficientModel make_nemytskii_model(double lipschitz_f, double lipschitz_g);
CoefficientModel make_finite_dim_model(double lipschitz_f, double lipschitz_g);
CoefficientModel make_example2_model(Eigen::VectorXd u0_field, Eigen::VectorXd v0_field,
                                     double threshold);

// Gaussian increments dW(n,k) ~ N(0, q_k * dt_n), reproducible from
// (seed, n, k); rows are steps, columns modes.
Eigen::MatrixXd sample_increments(const CovarianceSpec& spec, const Eigen::VectorXd& time_grid,
                                  std::uint64_t seed);

// Nodal (Nemytskii) drift: zero for the additive/example2 variants,
// lipschitz_f * tanh(u(x)) otherwise.
Eigen::VectorXd apply_F(const CoefficientModel& model, const FemSystem& system,
                        const Eigen::VectorXd& u);

// Diffusion applied to a noise-mode vector; returns a dof vector.
Eigen::VectorXd apply_G(const CoefficientModel& model, const FemSystem& system,
                        const CovarianceSpec& spec, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& w);

// Hilbert-Schmidt norm of G(u) against the covariance; exact closed
// forms per variant.
double hs_norm_G(const CoefficientModel& model, const FemSystem& system,
                 const CovarianceSpec& spec, const Eigen::VectorXd& u);

// Lipschitz profile used by the Nemytskii variants.
double nemytskii_profile(double s);

} // namespace cshe

#endif

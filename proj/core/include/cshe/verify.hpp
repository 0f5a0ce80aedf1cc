#ifndef CSHE_VERIFY_HPP
#define CSHE_VERIFY_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cshe/transform.hpp"

namespace cshe {

// Quantitative outcome of one experiment: per-sample left/right hand
// sides, ratio quantiles, a refinement trace and a pass flag against
// the configured stability tolerances.
struct EstimateReport {
    std::string tag;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> ratios;
    std::vector<std::pair<std::string, double>> trace;
    std::map<std::string, double> scalars;
    std::vector<std::string> notes;
    bool pass = true;

    void quantiles_into_scalars();
};

// Ratio sup of [||Lap w_R|| + (1+|z|)^{(1-alpha)/2} |c|] / ||g|| over
// rays arg z in {0, +-theta0/2, +-theta0}, log-spaced magnitudes and a
// random eigen-span ensemble; one trace entry per mesh level, pass iff
// the sup is finite and stable within `stability`.
EstimateReport grisvard_sweep(const std::vector<const FemSystem*>& levels, double theta0,
                              int n_magnitudes, int n_samples, int sample_modes,
                              std::uint64_t seed, double stability = 0.2);

// Global Helmholtz residual of the stochastic pipeline per refinement
// level (simultaneous dt/h halving), aggregated over the frequency
// window shared by all levels; pass iff decreasing and the finest value
// is at most `final_tol`.
EstimateReport helmholtz_refinement(const std::vector<std::pair<const FemSystem*, int>>& levels,
                                    const CovarianceSpec& spec, const CoefficientModel& model,
                                    double T, int n_paths, std::uint64_t seed,
                                    double final_tol = 5e-2);

// Ensemble ratio of the decomposition estimate: LHS = tensor norm of
// the regular part + squared coefficient-signal norm, RHS = data terms;
// trace over time-step levels, pass iff stable within `stability`.
EstimateReport main_estimate_check(const FemSystem& system, const CovarianceSpec& spec,
                                   const CoefficientModel& model, const Eigen::VectorXd& u0,
                                   double T, const std::vector<int>& step_levels, int n_paths,
                                   double s, std::uint64_t seed, int threads = 1,
                                   double stability = 0.25);

// Hilbert-Schmidt sum over an orthonormal time basis: partial sums in K
// must converge (last increment below `tail_fraction` of the total) and
// the additive model must match the Ito isometry within 4 MC standard
// errors.
EstimateReport hs_operator_check(const FemSystem& system, const CovarianceSpec& spec,
                                 const CoefficientModel& model, const Eigen::VectorXd& u0,
                                 double T, int n_steps, int n_paths, double s, int basis_size,
                                 std::uint64_t seed, double tail_fraction = 0.05);

// Additive-noise linear equation: empirical probability that the
// coefficient signal is active at frequency zero (threshold 3x the
// zero-noise floor) and the Ito variance identity for <H(0), v0>.
EstimateReport example1_experiment(const FemSystem& system, const CovarianceSpec& spec,
                                   const Eigen::VectorXd& u0, double T, int n_steps, int n_paths,
                                   std::uint64_t seed, double min_probability = 0.99,
                                   double variance_tol = 0.15);

// Threshold-gated scalar-noise model: activation probability with a
// Wilson interval strictly inside (0,1), monotone in the threshold
// under common random numbers, plus the exact Ornstein-Uhlenbeck
// excursion diagnostic.
EstimateReport example2_experiment(const FemSystem& system, const Eigen::VectorXd& u0, double T,
                                   int n_steps, int n_paths, double threshold,
                                   std::uint64_t seed);

// Wilson 95% interval.
std::pair<double, double> wilson_interval(int successes, int trials);

// Integral of ||F(u(t))||^2 over the path (trapezoid).
double drift_energy(const FemSystem& system, const CoefficientModel& model,
                    const PathSample& path);

} // namespace cshe

#endif

#ifndef CSHE_SHE_HPP
#define CSHE_SHE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cshe/noise.hpp"

namespace cshe {

// One simulated trajectory in the eigenbasis of the discrete Dirichlet
// Laplacian: rows are time steps, columns modes. Increments are padded
// to the same mode count for the on-disk layout.
struct PathSample {
    Eigen::VectorXd times;      // N+1 points, uniform
    Eigen::MatrixXd coeffs;     // (N+1) x m
    Eigen::MatrixXd increments; // N x m (noise modes in the leading columns)
    std::uint64_t seed = 0;
    std::string model_tag;

    int step_count() const { return static_cast<int>(times.size()) - 1; }
    int mode_count() const { return static_cast<int>(coeffs.cols()); }
    double dt() const { return times[1] - times[0]; }
};

// Exponential Euler on the spectral Galerkin projection: per mode
//   u_{n+1} = e^{-lam dt} u_n + (1 - e^{-lam dt})/lam * F(u_n)
//             + e^{-lam dt} * G(u_n) dW_n,
// Ito (left point) evaluation of G, exact on the linear part.
PathSample simulate_path(const FemSystem& system, const CovarianceSpec& spec,
                         const CoefficientModel& model, const Eigen::VectorXd& u0_dofs, double T,
                         int n_steps, std::uint64_t seed);

struct PathStatistics {
    double sup_mean_square = 0.0; // max_n mean ||u_n||^2
    double end_mean_square = 0.0; // mean ||u_N||^2
    double init_mean_square = 0.0;
    double end_stderr = 0.0;
    double init_stderr = 0.0;
    int paths = 0;
};

PathStatistics path_statistics(const std::vector<PathSample>& paths);

// Binary trajectory store, little-endian: magic "CSP1", u32 step count
// + 1, u32 mode count, u64 seed, then row-major doubles for the
// coefficients and the increments. Bit-exact round trip; the uniform
// grid is rebuilt from the caller-supplied horizon T.
void write_path(const PathSample& path, const std::string& file);
PathSample read_path(const std::string& file, double T);

} // namespace cshe

#endif

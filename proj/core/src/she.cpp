#include "cshe/she.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cshe {

namespace {

// Eigenbasis image of G(u_n) dW_n; closed form for the variants whose
// diffusion lives in the eigen-span, nodal round trip otherwise.
Eigen::VectorXd diffusion_coeffs(const FemSystem& system, const CovarianceSpec& spec,
                                 const CoefficientModel& model, const Eigen::VectorXd& u_coeffs,
                                 const Eigen::VectorXd& u0_coeffs, const Eigen::VectorXd& v0_coeffs,
                                 const Eigen::VectorXd& dw) {
    const int m = static_cast<int>(u_coeffs.size());
    switch (model.variant) {
        case ModelVariant::additive: {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
            out.head(dw.size()) = dw;
            return out;
        }
        case ModelVariant::example2: {
            const double norm = u_coeffs.norm(); // M-orthonormal basis
            const double g = std::max(0.0, norm - model.threshold);
            return dw[0] * (u0_coeffs + g * v0_coeffs);
        }
        default: {
            const Eigen::VectorXd u_nodal = system.eigen_combination(u_coeffs);
            const Eigen::VectorXd img = apply_G(model, system, spec, u_nodal, dw);
            return system.eigen_coefficients(img);
        }
    }
}

} // namespace

PathSample simulate_path(const FemSystem& system, const CovarianceSpec& spec,
                         const CoefficientModel& model, const Eigen::VectorXd& u0_dofs, double T,
                         int n_steps, std::uint64_t seed) {
    if (n_steps < 2) throw std::invalid_argument("simulate_path: need at least two steps");
    if (spec.rank > system.eigen_count())
        throw std::invalid_argument("simulate_path: noise rank exceeds cached eigenpairs");
    if (u0_dofs.size() != system.dof_count())
        throw std::invalid_argument("simulate_path: initial data dimension mismatch");
    if (model.variant == ModelVariant::example2 &&
        (model.u0_field.size() != system.dof_count() ||
         model.v0_field.size() != system.dof_count()))
        throw std::invalid_argument("simulate_path: model field dimension mismatch");
    const int m = system.eigen_count();
    const double dt = T / n_steps;

    PathSample path;
    path.seed = seed;
    path.model_tag = to_string(model.variant);
    path.times.resize(n_steps + 1);
    for (int n = 0; n <= n_steps; ++n) path.times[n] = dt * n;

    const Eigen::MatrixXd dw = sample_increments(spec, path.times, seed);
    path.increments = Eigen::MatrixXd::Zero(n_steps, m);
    path.increments.leftCols(spec.rank) = dw;

    const Eigen::VectorXd& lam = system.eigenvalues();
    Eigen::VectorXd decay(m), phi(m);
    for (int k = 0; k < m; ++k) {
        decay[k] = std::exp(-lam[k] * dt);
        phi[k] = -std::expm1(-lam[k] * dt) / lam[k];
    }

    Eigen::VectorXd u0_coeffs, v0_coeffs;
    if (model.variant == ModelVariant::example2) {
        u0_coeffs = system.eigen_coefficients(model.u0_field);
        v0_coeffs = system.eigen_coefficients(model.v0_field);
    }

    path.coeffs.resize(n_steps + 1, m);
    Eigen::VectorXd u = system.eigen_coefficients(u0_dofs);
    path.coeffs.row(0) = u;
    for (int n = 0; n < n_steps; ++n) {
        Eigen::VectorXd next = decay.cwiseProduct(u);
        if (model.has_drift()) {
            const Eigen::VectorXd fu =
                system.eigen_coefficients(apply_F(model, system, system.eigen_combination(u)));
            next += phi.cwiseProduct(fu);
        }
        const Eigen::VectorXd gw = diffusion_coeffs(system, spec, model, u, u0_coeffs, v0_coeffs,
                                                    path.increments.row(n).head(spec.rank));
        next += decay.cwiseProduct(gw);
        if (!next.allFinite())
            throw std::runtime_error("simulate_path: non-finite state at step " + std::to_string(n + 1));
        u = next;
        path.coeffs.row(n + 1) = u;
    }
    return path;
}

PathStatistics path_statistics(const std::vector<PathSample>& paths) {
    if (paths.empty()) throw std::invalid_argument("path_statistics: empty collection");
    PathStatistics st;
    st.paths = static_cast<int>(paths.size());
    const int n_steps = paths.front().step_count();
    Eigen::VectorXd mean_sq = Eigen::VectorXd::Zero(n_steps + 1);
    double end_sum = 0.0, end_sum2 = 0.0, init_sum = 0.0, init_sum2 = 0.0;
    for (const auto& p : paths) {
        if (p.step_count() != n_steps)
            throw std::invalid_argument("path_statistics: inconsistent grids");
        for (int n = 0; n <= n_steps; ++n) mean_sq[n] += p.coeffs.row(n).squaredNorm();
        const double e = p.coeffs.row(n_steps).squaredNorm();
        const double i0 = p.coeffs.row(0).squaredNorm();
        end_sum += e;
        end_sum2 += e * e;
        init_sum += i0;
        init_sum2 += i0 * i0;
    }
    mean_sq /= st.paths;
    st.sup_mean_square = mean_sq.maxCoeff();
    st.end_mean_square = end_sum / st.paths;
    st.init_mean_square = init_sum / st.paths;
    if (st.paths > 1) {
        const double vend = (end_sum2 - end_sum * end_sum / st.paths) / (st.paths - 1);
        const double vini = (init_sum2 - init_sum * init_sum / st.paths) / (st.paths - 1);
        st.end_stderr = std::sqrt(std::max(0.0, vend) / st.paths);
        st.init_stderr = std::sqrt(std::max(0.0, vini) / st.paths);
    }
    return st;
}

namespace {

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("trajectory store: truncated file");
}

} // namespace

void write_path(const PathSample& path, const std::string& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trajectory file for writing: " + file);
    const char magic[4] = {'C', 'S', 'P', '1'};
    write_raw(out, magic, 4);
    const std::uint32_t rows = static_cast<std::uint32_t>(path.times.size());
    const std::uint32_t cols = static_cast<std::uint32_t>(path.coeffs.cols());
    write_raw(out, &rows, 4);
    write_raw(out, &cols, 4);
    write_raw(out, &path.seed, 8);
    for (int n = 0; n < path.coeffs.rows(); ++n) {
        for (int k = 0; k < path.coeffs.cols(); ++k) {
            const double v = path.coeffs(n, k);
            write_raw(out, &v, 8);
        }
    }
    for (int n = 0; n < path.increments.rows(); ++n) {
        for (int k = 0; k < path.increments.cols(); ++k) {
            const double v = path.increments(n, k);
            write_raw(out, &v, 8);
        }
    }
}

PathSample read_path(const std::string& file, double T) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + file);
    char magic[4];
    read_raw(in, magic, 4);
    if (std::memcmp(magic, "CSP1", 4) != 0)
        throw std::runtime_error("trajectory store: bad magic in " + file);
    std::uint32_t rows = 0, cols = 0;
    std::uint64_t seed = 0;
    read_raw(in, &rows, 4);
    read_raw(in, &cols, 4);
    read_raw(in, &seed, 8);
    PathSample path;
    path.seed = seed;
    const int n_steps = static_cast<int>(rows) - 1;
    path.times.resize(rows);
    for (std::uint32_t n = 0; n < rows; ++n)
        path.times[n] = T * static_cast<double>(n) / static_cast<double>(n_steps);
    path.coeffs.resize(rows, cols);
    path.increments.resize(n_steps, cols);
    for (std::uint32_t n = 0; n < rows; ++n) {
        for (std::uint32_t k = 0; k < cols; ++k) {
            double v;
            read_raw(in, &v, 8);
            path.coeffs(n, k) = v;
        }
    }
    for (int n = 0; n < n_steps; ++n) {
        for (std::uint32_t k = 0; k < cols; ++k) {
            double v;
            read_raw(in, &v, 8);
            path.increments(n, k) = v;
        }
    }
    return path;
}

} // namespace cshe

#ifndef CSHE_FEM_HPP
#define CSHE_FEM_HPP

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cshe/mesh.hpp"

namespace cshe {

using SparseD = Eigen::SparseMatrix<double>;
using SparseC = Eigen::SparseMatrix<std::complex<double>>;

// Exact P1 element matrices (row-major 3x3), for tests and assembly.
Eigen::Matrix3d p1_local_stiffness(const Vec2& a, const Vec2& b, const Vec2& c);
Eigen::Matrix3d p1_local_mass(const Vec2& a, const Vec2& b, const Vec2& c);

// P1 discretization of the Dirichlet Laplacian on a graded mesh: sparse
// mass/stiffness on interior dofs, generalized eigenpairs, complex
// shifted solves and discrete norms. Immutable after construction apart
// from internal factorization caches (mutex guarded, deterministic).
class FemSystem {
  public:
    FemSystem(const PolygonalDomain& domain, Mesh mesh);

    const PolygonalDomain& domain() const { return *domain_; }
    const Mesh& mesh() const { return mesh_; }
    int dof_count() const { return n_dofs_; }
    int dof_of_node(int node) const { return dof_of_node_[static_cast<std::size_t>(node)]; }
    int node_of_dof(int dof) const { return node_of_dof_[static_cast<std::size_t>(dof)]; }

    const SparseD& mass() const { return mass_; }
    const SparseD& stiffness() const { return stiffness_; }
    double full_mass_sum() const { return full_mass_sum_; }

    // Dirichlet-reduced <-> full nodal vectors.
    Eigen::VectorXd to_nodal(const Eigen::VectorXd& dofs) const;
    Eigen::VectorXd to_dofs(const Eigen::VectorXd& nodal) const;

    // Smallest m generalized eigenpairs K e = lambda M e, M-orthonormal
    // and ascending; cached. Throws on non-convergence.
    void compute_eigenpairs(int m);
    int eigen_count() const { return static_cast<int>(eigenvalues_.size()); }
    const Eigen::VectorXd& eigenvalues() const;
    const Eigen::MatrixXd& eigenvectors() const;      // n_dofs x m
    const Eigen::MatrixXd& mass_eigenvectors() const; // M * eigenvectors

    // Coefficients of w in the eigenbasis: (M e_k, w).
    Eigen::VectorXd eigen_coefficients(const Eigen::VectorXd& w) const;
    Eigen::VectorXd eigen_combination(const Eigen::VectorXd& coeffs) const;

    // w solving (z M + K) w = M g, i.e. the discrete (z id - Lap)^{-1} g.
    // One symbolic factorization is reused across calls (pattern fixed).
    Eigen::VectorXcd resolvent_apply(std::complex<double> z, const Eigen::VectorXcd& g) const;
    Eigen::MatrixXcd resolvent_apply(std::complex<double> z, const Eigen::MatrixXcd& g) const;

    // K w = rhs and M w = rhs with cached Cholesky factorizations.
    Eigen::VectorXd solve_stiffness(const Eigen::VectorXd& rhs) const;
    Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;

    // Discrete norms.
    double l2_norm(const Eigen::VectorXd& w) const;
    double l2_norm(const Eigen::VectorXcd& w) const;
    double h1_seminorm(const Eigen::VectorXd& w) const;
    double h1_seminorm(const Eigen::VectorXcd& w) const;
    // L2 norm of a supplied analytic Laplacian field (H^2 surrogate).
    double h2_surrogate(const Eigen::VectorXcd& laplacian_field) const;

    // Load vector b_i = int f * phi_i over triangles selected by
    // `filter` (pass nullptr for all), 7-point rule per triangle.
    Eigen::VectorXd assemble_load(const std::function<double(const Vec2&)>& f,
                                  const std::function<bool(int)>& filter = nullptr) const;
    Eigen::VectorXcd assemble_load_c(const std::function<std::complex<double>(const Vec2&)>& f,
                                     const std::function<bool(int)>& filter = nullptr) const;

    // Nodal interpolation of an analytic function, reduced to dofs.
    Eigen::VectorXd interpolate(const std::function<double(const Vec2&)>& f) const;
    Eigen::VectorXcd interpolate_c(const std::function<std::complex<double>(const Vec2&)>& f) const;

  private:
    const PolygonalDomain* domain_;
    Mesh mesh_;
    int n_dofs_ = 0;
    std::vector<int> dof_of_node_;
    std::vector<int> node_of_dof_;
    SparseD mass_;
    SparseD stiffness_;
    double full_mass_sum_ = 0.0;

    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    Eigen::MatrixXd mass_eigenvectors_;

    struct Solvers;
    std::shared_ptr<Solvers> solvers_;
};

} // namespace cshe

#endif

#include "cshe/fem.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "cshe/quadrature.hpp"
#include "cshe/rng.hpp"

namespace cshe {

Eigen::Matrix3d p1_local_stiffness(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double area2 = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (area2 <= 0.0) throw std::invalid_argument("p1_local_stiffness: inverted triangle");
    const double bb[3] = {b.y() - c.y(), c.y() - a.y(), a.y() - b.y()};
    const double cc[3] = {c.x() - b.x(), a.x() - c.x(), b.x() - a.x()};
    Eigen::Matrix3d k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k(i, j) = (bb[i] * bb[j] + cc[i] * cc[j]) / (2.0 * area2);
    return k;
}

Eigen::Matrix3d p1_local_mass(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double area2 = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    if (area2 <= 0.0) throw std::invalid_argument("p1_local_mass: inverted triangle");
    Eigen::Matrix3d m;
    m.setConstant(area2 / 24.0);
    m.diagonal().setConstant(area2 / 12.0);
    return m;
}

struct FemSystem::Solvers {
    std::mutex mutex;
    Eigen::SimplicialLDLT<SparseD> stiffness;
    bool stiffness_ready = false;
    Eigen::SimplicialLDLT<SparseD> mass;
    bool mass_ready = false;
    Eigen::SparseLU<SparseC> shifted;
    bool pattern_ready = false;
    SparseC mass_c;
    SparseC stiffness_c;
};

FemSystem::FemSystem(const PolygonalDomain& domain, Mesh mesh)
    : domain_(&domain), mesh_(std::move(mesh)), solvers_(std::make_shared<Solvers>()) {
    const int n_nodes = mesh_.node_count();
    dof_of_node_.assign(static_cast<std::size_t>(n_nodes), -1);
    for (int i = 0; i < n_nodes; ++i) {
        if (!mesh_.boundary[static_cast<std::size_t>(i)]) {
            dof_of_node_[static_cast<std::size_t>(i)] = n_dofs_++;
            node_of_dof_.push_back(i);
        }
    }

    std::vector<Eigen::Triplet<double>> tk, tm;
    tk.reserve(static_cast<std::size_t>(mesh_.triangle_count()) * 9);
    tm.reserve(static_cast<std::size_t>(mesh_.triangle_count()) * 9);
    full_mass_sum_ = 0.0;
    for (const auto& tri : mesh_.triangles) {
        const Vec2 &a = mesh_.nodes[tri[0]], &b = mesh_.nodes[tri[1]], &c = mesh_.nodes[tri[2]];
        const Eigen::Matrix3d lk = p1_local_stiffness(a, b, c);
        const Eigen::Matrix3d lm = p1_local_mass(a, b, c);
        full_mass_sum_ += lm.sum();
        for (int i = 0; i < 3; ++i) {
            const int di = dof_of_node_[static_cast<std::size_t>(tri[i])];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = dof_of_node_[static_cast<std::size_t>(tri[j])];
                if (dj < 0) continue;
                tk.emplace_back(di, dj, lk(i, j));
                tm.emplace_back(di, dj, lm(i, j));
            }
        }
    }
    stiffness_.resize(n_dofs_, n_dofs_);
    mass_.resize(n_dofs_, n_dofs_);
    stiffness_.setFromTriplets(tk.begin(), tk.end());
    mass_.setFromTriplets(tm.begin(), tm.end());
    stiffness_.makeCompressed();
    mass_.makeCompressed();
}

Eigen::VectorXd FemSystem::to_nodal(const Eigen::VectorXd& dofs) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(mesh_.node_count());
    for (int d = 0; d < n_dofs_; ++d) full[node_of_dof_[static_cast<std::size_t>(d)]] = dofs[d];
    return full;
}

Eigen::VectorXd FemSystem::to_dofs(const Eigen::VectorXd& nodal) const {
    Eigen::VectorXd out(n_dofs_);
    for (int d = 0; d < n_dofs_; ++d) out[d] = nodal[node_of_dof_[static_cast<std::size_t>(d)]];
    return out;
}

void FemSystem::compute_eigenpairs(int m) {
    if (eigen_count() >= m) return;
    if (m >= n_dofs_) throw std::invalid_argument("eigenpairs: m must be below the dof count");

    // Shift-invert Lanczos at zero shift on the pencil (K, M): the
    // operator w = K^{-1} M v is self-adjoint in the M inner product with
    // eigenvalues 1/lambda, so the largest Ritz values converge to the
    // smallest lambda. Full reorthogonalization, deterministic start.
    Eigen::SimplicialLDLT<SparseD> kinv(stiffness_);
    if (kinv.info() != Eigen::Success)
        throw std::runtime_error("eigenpairs: stiffness factorization failed");

    int j_max = std::min(n_dofs_ - 1, std::max(2 * m + 40, 120));
    for (int attempt = 0; attempt < 2; ++attempt) {
        Eigen::MatrixXd V(n_dofs_, j_max);
        Eigen::VectorXd alpha(j_max), beta(j_max);
        Eigen::VectorXd v(n_dofs_);
        for (int i = 0; i < n_dofs_; ++i) {
            v[i] = 2.0 * rng::uniform(0x9d2c5680u, static_cast<std::uint64_t>(i), 7, 0) - 1.0;
        }
        v /= std::sqrt(v.dot(mass_ * v));
        Eigen::VectorXd prev = Eigen::VectorXd::Zero(n_dofs_);
        double beta_prev = 0.0;
        int j = 0;
        for (; j < j_max; ++j) {
            V.col(j) = v;
            Eigen::VectorXd w = kinv.solve(mass_ * v);
            alpha[j] = w.dot(mass_ * v);
            w -= alpha[j] * v + beta_prev * prev;
            // two-pass reorthogonalization in the M inner product
            for (int pass = 0; pass < 2; ++pass) {
                const Eigen::VectorXd proj = V.leftCols(j + 1).transpose() * (mass_ * w);
                w -= V.leftCols(j + 1) * proj;
            }
            const double b = std::sqrt(std::max(0.0, w.dot(mass_ * w)));
            beta[j] = b;
            if (b < 1e-14) {
                ++j;
                break;
            }
            prev = v;
            v = w / b;
            beta_prev = b;
        }

        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j, j);
        for (int i = 0; i < j; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < j) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigenpairs: tridiagonal solve failed");

        // Largest mu first -> smallest lambda.
        std::vector<int> order(static_cast<std::size_t>(j));
        for (int i = 0; i < j; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return es.eigenvalues()[a] > es.eigenvalues()[b]; });

        Eigen::VectorXd lam(m);
        Eigen::MatrixXd vec(n_dofs_, m);
        bool ok = j >= m;
        for (int k = 0; ok && k < m; ++k) {
            const double mu = es.eigenvalues()[order[static_cast<std::size_t>(k)]];
            if (mu <= 0.0) {
                ok = false;
                break;
            }
            lam[k] = 1.0 / mu;
            vec.col(k) = V.leftCols(j) * es.eigenvectors().col(order[static_cast<std::size_t>(k)]);
            vec.col(k) /= std::sqrt(vec.col(k).dot(mass_ * vec.col(k)));
            const Eigen::VectorXd res = stiffness_ * vec.col(k) - lam[k] * (mass_ * vec.col(k));
            if (res.norm() > 1e-7 * lam[k]) ok = false;
        }
        if (ok) {
            eigenvalues_ = lam;
            eigenvectors_ = vec;
            mass_eigenvectors_ = mass_ * vec;
            return;
        }
        j_max = std::min(n_dofs_ - 1, 2 * j_max);
    }
    throw std::runtime_error("eigenpairs: Lanczos did not converge for the requested count");
}

const Eigen::VectorXd& FemSystem::eigenvalues() const {
    if (eigenvalues_.size() == 0) throw std::logic_error("eigenpairs not computed");
    return eigenvalues_;
}

const Eigen::MatrixXd& FemSystem::eigenvectors() const {
    if (eigenvectors_.size() == 0) throw std::logic_error("eigenpairs not computed");
    return eigenvectors_;
}

const Eigen::MatrixXd& FemSystem::mass_eigenvectors() const {
    if (mass_eigenvectors_.size() == 0) throw std::logic_error("eigenpairs not computed");
    return mass_eigenvectors_;
}

Eigen::VectorXd FemSystem::eigen_coefficients(const Eigen::VectorXd& w) const {
    return mass_eigenvectors().transpose() * w;
}

Eigen::VectorXd FemSystem::eigen_combination(const Eigen::VectorXd& coeffs) const {
    return eigenvectors() * coeffs;
}

Eigen::MatrixXcd FemSystem::resolvent_apply(std::complex<double> z, const Eigen::MatrixXcd& g) const {
    if (g.rows() != n_dofs_) throw std::invalid_argument("resolvent_apply: dimension mismatch");
    if (eigenvalues_.size() > 0) {
        for (int k = 0; k < eigenvalues_.size(); ++k) {
            if (std::abs(z + eigenvalues_[k]) < 1e-10 * eigenvalues_[k])
                throw std::invalid_argument("resolvent_apply: z is numerically on the spectrum");
        }
    }
    std::lock_guard<std::mutex> lock(solvers_->mutex);
    auto& s = *solvers_;
    if (!s.pattern_ready) {
        s.mass_c = mass_.cast<std::complex<double>>();
        s.stiffness_c = stiffness_.cast<std::complex<double>>();
        SparseC probe = s.stiffness_c + std::complex<double>(1.0, 1.0) * s.mass_c;
        probe.makeCompressed();
        s.shifted.analyzePattern(probe);
        s.pattern_ready = true;
    }
    SparseC a = s.stiffness_c + z * s.mass_c;
    a.makeCompressed();
    s.shifted.factorize(a);
    if (s.shifted.info() != Eigen::Success)
        throw std::runtime_error("resolvent_apply: complex factorization failed");
    return s.shifted.solve(s.mass_c * g);
}

Eigen::VectorXcd FemSystem::resolvent_apply(std::complex<double> z, const Eigen::VectorXcd& g) const {
    Eigen::MatrixXcd gm(g.rows(), 1);
    gm.col(0) = g;
    return resolvent_apply(z, gm).col(0);
}

Eigen::VectorXd FemSystem::solve_stiffness(const Eigen::VectorXd& rhs) const {
    std::lock_guard<std::mutex> lock(solvers_->mutex);
    auto& s = *solvers_;
    if (!s.stiffness_ready) {
        s.stiffness.compute(stiffness_);
        if (s.stiffness.info() != Eigen::Success)
            throw std::runtime_error("stiffness factorization failed");
        s.stiffness_ready = true;
    }
    return s.stiffness.solve(rhs);
}

Eigen::VectorXd FemSystem::solve_mass(const Eigen::VectorXd& rhs) const {
    std::lock_guard<std::mutex> lock(solvers_->mutex);
    auto& s = *solvers_;
    if (!s.mass_ready) {
        s.mass.compute(mass_);
        if (s.mass.info() != Eigen::Success) throw std::runtime_error("mass factorization failed");
        s.mass_ready = true;
    }
    return s.mass.solve(rhs);
}

double FemSystem::l2_norm(const Eigen::VectorXd& w) const {
    if (w.size() != n_dofs_) throw std::invalid_argument("l2_norm: dimension mismatch");
    return std::sqrt(std::max(0.0, w.dot(mass_ * w)));
}

double FemSystem::l2_norm(const Eigen::VectorXcd& w) const {
    if (w.size() != n_dofs_) throw std::invalid_argument("l2_norm: dimension mismatch");
    return std::sqrt(std::max(0.0, (w.adjoint() * (mass_ * w))(0).real()));
}

double FemSystem::h1_seminorm(const Eigen::VectorXd& w) const {
    if (w.size() != n_dofs_) throw std::invalid_argument("h1_seminorm: dimension mismatch");
    return std::sqrt(std::max(0.0, w.dot(stiffness_ * w)));
}

double FemSystem::h1_seminorm(const Eigen::VectorXcd& w) const {
    if (w.size() != n_dofs_) throw std::invalid_argument("h1_seminorm: dimension mismatch");
    return std::sqrt(std::max(0.0, (w.adjoint() * (stiffness_ * w))(0).real()));
}

double FemSystem::h2_surrogate(const Eigen::VectorXcd& laplacian_field) const {
    return l2_norm(laplacian_field);
}

namespace {

template <typename Scalar, typename Fn>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> load_impl(const FemSystem& sys, const Mesh& mesh,
                                                   const Fn& f,
                                                   const std::function<bool(int)>& filter) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(sys.dof_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (filter && !filter(t)) continue;
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        const Vec2 &a = mesh.nodes[tri[0]], &b = mesh.nodes[tri[1]], &c = mesh.nodes[tri[2]];
        const auto rule = quad::triangle_rule(a, b, c);
        for (const auto& q : rule) {
            const Vec2 x(q.x, q.y);
            const Scalar fx = f(x);
            // barycentric weights of x
            const double area2 = (b - a).x() * (c - a).y() - (c - a).x() * (b - a).y();
            const double l0 = ((b - x).x() * (c - x).y() - (c - x).x() * (b - x).y()) / area2;
            const double l1 = ((c - x).x() * (a - x).y() - (a - x).x() * (c - x).y()) / area2;
            const double l2 = 1.0 - l0 - l1;
            const double lam[3] = {l0, l1, l2};
            for (int i = 0; i < 3; ++i) {
                const int d = sys.dof_of_node(tri[i]);
                if (d >= 0) out[d] += q.w * lam[i] * fx;
            }
        }
    }
    return out;
}

} // namespace

Eigen::VectorXd FemSystem::assemble_load(const std::function<double(const Vec2&)>& f,
                                         const std::function<bool(int)>& filter) const {
    return load_impl<double>(*this, mesh_, f, filter);
}

Eigen::VectorXcd FemSystem::assemble_load_c(const std::function<std::complex<double>(const Vec2&)>& f,
                                            const std::function<bool(int)>& filter) const {
    return load_impl<std::complex<double>>(*this, mesh_, f, filter);
}

Eigen::VectorXd FemSystem::interpolate(const std::function<double(const Vec2&)>& f) const {
    Eigen::VectorXd out(n_dofs_);
    for (int d = 0; d < n_dofs_; ++d) out[d] = f(mesh_.nodes[node_of_dof_[static_cast<std::size_t>(d)]]);
    return out;
}

Eigen::VectorXcd FemSystem::interpolate_c(const std::function<std::complex<double>(const Vec2&)>& f) const {
    Eigen::VectorXcd out(n_dofs_);
    for (int d = 0; d < n_dofs_; ++d) out[d] = f(mesh_.nodes[node_of_dof_[static_cast<std::size_t>(d)]]);
    return out;
}

} // namespace cshe

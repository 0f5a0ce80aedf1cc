#include "cshe/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "cshe/rng.hpp"

namespace cshe {

double CovarianceSpec::q(int k) const {
    if (k < 1 || k > rank) return 0.0;
    return q0 * std::pow(static_cast<double>(k), -rho);
}

double CovarianceSpec::trace() const {
    double s = 0.0;
    for (int k = 1; k <= rank; ++k) s += q(k);
    return s;
}

Eigen::VectorXd CovarianceSpec::q_vector() const {
    Eigen::VectorXd v(rank);
    for (int k = 1; k <= rank; ++k) v[k - 1] = q(k);
    return v;
}

ModelVariant model_variant_from_string(const std::string& name) {
    if (name == "additive") return ModelVariant::additive;
    if (name == "nemytskii_smooth") return ModelVariant::nemytskii_smooth;
    if (name == "finite_dim") return ModelVariant::finite_dim;
    if (name == "example2") return ModelVariant::example2;
    throw std::invalid_argument("unknown model variant: " + name);
}

std::string to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::additive: return "additive";
        case ModelVariant::nemytskii_smooth: return "nemytskii_smooth";
        case ModelVariant::finite_dim: return "finite_dim";
        case ModelVariant::example2: return "example2";
    }
    return "?";
}

bool CoefficientModel::has_drift() const { return static_cast<bool>(f_scalar); }

double nemytskii_profile(double s) { return std::tanh(s); }

CoefficientModel make_additive_model() {
    CoefficientModel m;
    m.variant = ModelVariant::additive;
    m.lipschitz_f = 0.0;
    m.lipschitz_g = 0.0; // constant diffusion
    return m;
}

CoefficientModel make_nemytskii_model(double lipschitz_f, double lipschitz_g) {
    CoefficientModel m;
    m.variant = ModelVariant::nemytskii_smooth;
    m.lipschitz_f = lipschitz_f;
    m.lipschitz_g = lipschitz_g;
    if (lipschitz_f != 0.0) m.f_scalar = [lipschitz_f](double s) { return lipschitz_f * nemytskii_profile(s); };
    m.g_scalar = [](double s) { return nemytskii_profile(s); };
    return m;
}

CoefficientModel make_finite_dim_model(double lipschitz_f, double lipschitz_g) {
    CoefficientModel m = make_nemytskii_model(lipschitz_f, lipschitz_g);
    m.variant = ModelVariant::finite_dim;
    return m;
}

CoefficientModel make_example2_model(Eigen::VectorXd u0_field, Eigen::VectorXd v0_field,
                                     double threshold) {
    if (!(threshold >= 0.0)) throw std::invalid_argument("example2 threshold must be >= 0");
    CoefficientModel m;
    m.variant = ModelVariant::example2;
    m.u0_field = std::move(u0_field);
    m.v0_field = std::move(v0_field);
    m.threshold = threshold;
    m.lipschitz_f = 0.0;
    m.lipschitz_g = 1.0;
    return m;
}

Eigen::MatrixXd sample_increments(const CovarianceSpec& spec, const Eigen::VectorXd& time_grid,
                                  std::uint64_t seed) {
    const int n_steps = static_cast<int>(time_grid.size()) - 1;
    if (n_steps < 1) throw std::invalid_argument("sample_increments: need at least two grid points");
    Eigen::MatrixXd dw(n_steps, spec.rank);
    for (int n = 0; n < n_steps; ++n) {
        const double dt = time_grid[n + 1] - time_grid[n];
        if (!(dt > 0.0)) throw std::invalid_argument("sample_increments: nonpositive time step");
        for (int k = 0; k < spec.rank; ++k) {
            const double sd = std::sqrt(spec.q(k + 1) * dt);
            dw(n, k) = sd * rng::normal(seed, static_cast<std::uint64_t>(n),
                                        static_cast<std::uint64_t>(k), 0);
        }
    }
    return dw;
}

Eigen::VectorXd apply_F(const CoefficientModel& model, const FemSystem& system,
                        const Eigen::VectorXd& u) {
    if (u.size() != system.dof_count()) throw std::invalid_argument("apply_F: dimension mismatch");
    if (!model.f_scalar) return Eigen::VectorXd::Zero(u.size());
    Eigen::VectorXd out(u.size());
    for (int i = 0; i < u.size(); ++i) out[i] = model.f_scalar(u[i]);
    return out;
}

Eigen::VectorXd apply_G(const CoefficientModel& model, const FemSystem& system,
                        const CovarianceSpec& spec, const Eigen::VectorXd& u,
                        const Eigen::VectorXd& w) {
    (void)spec;
    switch (model.variant) {
        case ModelVariant::additive: {
            if (w.size() > system.eigen_count())
                throw std::invalid_argument("apply_G: more noise modes than cached eigenpairs");
            return system.eigenvectors().leftCols(w.size()) * w;
        }
        case ModelVariant::nemytskii_smooth: {
            const Eigen::VectorXd field = system.eigenvectors().leftCols(w.size()) * w;
            Eigen::VectorXd out(u.size());
            for (int i = 0; i < u.size(); ++i)
                out[i] = model.lipschitz_g * model.g_scalar(u[i]) * field[i];
            return out;
        }
        case ModelVariant::finite_dim: {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
            for (int i = 0; i < u.size(); ++i) {
                const Vec2& x = system.mesh().nodes[static_cast<std::size_t>(system.node_of_dof(i))];
                double s = 0.0;
                for (int k = 0; k < w.size(); ++k)
                    s += w[k] * std::cos((k + 1) * M_PI * x.x()) / (k + 1);
                out[i] = model.lipschitz_g * model.g_scalar(u[i]) * s;
            }
            return out;
        }
        case ModelVariant::example2: {
            if (w.size() != 1) throw std::invalid_argument("apply_G: example2 uses scalar noise");
            const double norm = system.l2_norm(u);
            const double g = std::max(0.0, norm - model.threshold);
            return w[0] * (model.u0_field + g * model.v0_field);
        }
    }
    throw std::invalid_argument("apply_G: unknown variant tag");
}

double hs_norm_G(const CoefficientModel& model, const FemSystem& system,
                 const CovarianceSpec& spec, const Eigen::VectorXd& u) {
    switch (model.variant) {
        case ModelVariant::additive: {
            double s = 0.0;
            for (int k = 1; k <= spec.rank; ++k) s += spec.q(k);
            return std::sqrt(s);
        }
        case ModelVariant::example2: {
            const double g = std::max(0.0, system.l2_norm(u) - model.threshold);
            const Eigen::VectorXd v = model.u0_field + g * model.v0_field;
            return std::sqrt(spec.q(1)) * system.l2_norm(v);
        }
        default: {
            // Nemytskii variants: sum of the mode images' squared L2 norms.
            double s = 0.0;
            for (int k = 1; k <= spec.rank; ++k) {
                Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
                w[k - 1] = std::sqrt(spec.q(k));
                const Eigen::VectorXd img = apply_G(model, system, spec, u, w);
                s += img.dot(system.mass() * img);
            }
            return std::sqrt(s);
        }
    }
}

} // namespace cshe

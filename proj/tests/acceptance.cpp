// Acceptance suite at desk scale: L-shaped domain, h = 0.02 graded,
// T = 1, N_t = 2048, 100 modes. One pass/fail line per criterion; the
// process exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "cshe/driver.hpp"
#include "cshe/quadrature.hpp"
#include "cshe/rng.hpp"

using namespace cshe;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("[%2d/11] %s  %-24s %s\n", index, pass ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct DeskScale {
    double T = 1.0;
    int steps = 2048;
    int modes = 100;
    double h = 0.02;
    std::uint64_t seed = 20260810;

    PolygonalDomain domain;
    std::unique_ptr<FemSystem> desk;   // h = 0.02, eigenpairs cached
    std::unique_ptr<FemSystem> half;   // h = 0.04, eigenpairs cached
    CovarianceSpec spec;               // q0 = 1, rho = 2.2, rank = 100
    Eigen::VectorXd u0;

    DeskScale() : domain(build_domain({{0, 0}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}})) {
        desk = std::make_unique<FemSystem>(domain, triangulate(domain, h));
        desk->compute_eigenpairs(modes);
        half = std::make_unique<FemSystem>(domain, triangulate(domain, 2 * h));
        half->compute_eigenpairs(modes);
        spec.rank = modes;
        u0 = desk->interpolate(
            [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); });
    }
};

Eigen::VectorXcd l2_project_c(const FemSystem& sys, const Eigen::VectorXcd& load) {
    Eigen::VectorXcd out(load.size());
    out.real() = sys.solve_mass(load.real());
    out.imag() = sys.solve_mass(load.imag());
    return out;
}

// 1. Manufactured Helmholtz recovery (c within 2%, U_R decay >= 1.5x).
void criterion_manufactured(const DeskScale& ds) {
    const std::vector<Complex> zs = {Complex(0, 0), Complex(1, 0), Complex(1, 5),
                                     Complex(0, 100)};
    const std::vector<double> hs = {0.08, 0.04, 0.02};
    bool pass = true;
    double worst_c = 0.0, worst_ratio = 1e18;
    std::vector<double> prev(zs.size(), 0.0);
    for (const double h : hs) {
        FemSystem sys(ds.domain, triangulate(ds.domain, h));
        const Eigen::VectorXd v0 = dual_base(sys, 0);
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const Complex z = zs[i];
            const Eigen::VectorXcd load = sys.assemble_load_c([&](const Vec2& x) {
                return z * damped_singular_eval(ds.domain, 0, x, z) -
                       laplacian_of_singular(ds.domain, 0, x, z);
            });
            const Eigen::VectorXcd g = l2_project_c(sys, load);
            const Eigen::VectorXcd vz = dual_function(sys, 0, z, v0);
            const Complex c = singular_coefficient_at(sys, g, vz);
            const RegularPart rp = regular_part_at(sys, z, g, {c});
            const double ur = sys.l2_norm(rp.field);
            if (prev[i] > 0.0) worst_ratio = std::min(worst_ratio, prev[i] / ur);
            prev[i] = ur;
            if (h == hs.back()) {
                worst_c = std::max(worst_c, std::abs(c - 1.0));
                pass = pass && std::abs(c - 1.0) <= 0.02;
            }
        }
    }
    pass = pass && worst_ratio >= 1.5;
    std::ostringstream os;
    os << "max |c-1| = " << worst_c << " (tol 0.02), min ||U_R|| decay/halving = " << worst_ratio
       << " (>= 1.5)";
    report(1, "manufactured-helmholtz", pass, os.str());
}

// 2. Kernel Laplace identity on a 3x3 (r, z) grid to 1e-6 relative.
void criterion_kernel_identity() {
    const double radii[3] = {0.1, 0.5, 1.0};
    const Complex zs[3] = {Complex(1, 0), Complex(1, 2), Complex(10, 0)};
    double worst = 0.0;
    for (const double r : radii) {
        for (const Complex z : zs) {
            auto integrand = [&](double t) { return std::exp(-z * t) * levy_kernel(t, r); };
            Complex integral(0.0, 0.0);
            const double cuts[5] = {0.0, r * r / 20.0, r * r, 1.0 + r * r, 60.0};
            for (int p = 0; p + 1 < 5; ++p)
                integral += quad::adaptive_gk(integrand, cuts[p], cuts[p + 1], 1e-12);
            const Complex expect = std::exp(-r * std::sqrt(z));
            worst = std::max(worst, std::abs(integral - expect) / std::abs(expect));
        }
    }
    std::ostringstream os;
    os << "max relative error = " << worst << " (tol 1e-6)";
    report(2, "kernel-laplace-identity", worst <= 1e-6, os.str());
}

// 3. Grisvard sweep stability under mesh halving.
void criterion_grisvard(const DeskScale& ds) {
    const EstimateReport rep =
        grisvard_sweep({ds.half.get(), ds.desk.get()}, 3.0 * M_PI / 4.0, 12, 6, 40, ds.seed, 0.2);
    std::ostringstream os;
    os << "sup ratio " << rep.trace[0].second << " -> " << rep.trace[1].second
       << " (stability tol 20%)";
    report(3, "grisvard-sweep", rep.pass, os.str());
}

// 4. Helmholtz residual of the stochastic pipeline under (dt, h) halving.
void criterion_helmholtz(const DeskScale& ds) {
    const CoefficientModel model = make_additive_model();
    const EstimateReport rep = helmholtz_refinement(
        {{ds.half.get(), ds.steps / 2}, {ds.desk.get(), ds.steps}}, ds.spec, model, ds.T, 3,
        ds.seed, 5e-2);
    std::ostringstream os;
    os << "residual " << rep.trace[0].second << " -> " << rep.trace[1].second
       << " (final tol 5e-2, band |xi| <= " << rep.scalars.at("xi_cap") << ")";
    report(4, "helmholtz-residual", rep.pass, os.str());
}

// 5. Causality of the coefficient signal over 100 additive paths.
void criterion_causality(const DeskScale& ds, const TransformPlan& plan) {
    const CoefficientModel model = make_additive_model();
    DecompositionOptions options;
    double worst = 0.0;
    bool pass = true;
    for (int p = 0; p < 100; ++p) {
        const PathSample path = simulate_path(*ds.desk, ds.spec, model, ds.u0, ds.T, ds.steps,
                                              rng::substream(ds.seed, p));
        const Decomposition dec = decompose_path(*ds.desk, ds.spec, model, path, plan, options);
        worst = std::max(worst, dec.support[0].mass_fraction);
        pass = pass && dec.accepted;
    }
    std::ostringstream os;
    os << "max mass on t < -5dt over 100 paths = " << worst << " (tol 1e-2)";
    report(5, "causality", pass && worst <= 1e-2, os.str());
}

// 6. Regularity dichotomy of the corner function in the fractional scale.
void criterion_dichotomy(const DeskScale& ds) {
    const SlobodeckijRegion region = corner_region(ds.domain, 0);
    const double alpha = ds.domain.corner(0).alpha;
    auto grad = [&](const Vec2& x) { return singular_gradient(ds.domain, 0, x); };
    std::vector<double> low, high;
    for (int level = 1; level <= 5; ++level) {
        low.push_back(slobodeckij_seminorm(ds.domain, region, grad, 1.0 + alpha - 0.1, level));
        high.push_back(slobodeckij_seminorm(ds.domain, region, grad, 1.0 + alpha + 0.1, level));
    }
    const double stab = std::abs(low[4] / low[3] - 1.0);
    double min_growth = 1e18;
    for (std::size_t i = 1; i < high.size(); ++i)
        min_growth = std::min(min_growth, high[i] / high[i - 1]);
    const bool pass = stab <= 0.02 && min_growth >= 1.2;
    std::ostringstream os;
    os << "s=1+a-0.1 change " << stab << " (tol 2%); s=1+a+0.1 min growth/level " << min_growth
       << " (>= 1.2)";
    report(6, "regularity-dichotomy", pass, os.str());
}

// 7. Main estimate ratio stability under dt halving (100 paths).
void criterion_main_estimate(const DeskScale& ds) {
    const CoefficientModel model = make_additive_model();
    const EstimateReport rep =
        main_estimate_check(*ds.desk, ds.spec, model, ds.u0, ds.T, {ds.steps / 2, ds.steps}, 100,
                            0.75, ds.seed, 2, 0.25);
    std::ostringstream os;
    os << "ensemble ratio " << rep.trace[0].second << " -> " << rep.trace[1].second
       << " (stability tol 25%)";
    report(7, "main-estimate", rep.pass, os.str());
}

// 8. Hilbert-Schmidt partial sums over K = 64 time-basis elements.
void criterion_hs(const DeskScale& ds) {
    const CoefficientModel model = make_additive_model();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ds.desk->dof_count());
    const EstimateReport rep = hs_operator_check(*ds.desk, ds.spec, model, zero, ds.T, ds.steps,
                                                 100, 0.75, 64, ds.seed, 0.05);
    std::ostringstream os;
    os << "tail fraction " << rep.scalars.at("last_increment_fraction") << " (< 5%), isometry |mc-oracle| = "
       << std::abs(rep.scalars.at("isometry_mc") - rep.scalars.at("isometry_oracle")) << " vs 4se = "
       << 4.0 * rep.scalars.at("isometry_se");
    report(8, "hilbert-schmidt", rep.pass, os.str());
}

// 9. Example experiment: additive noise activates the coefficient signal.
void criterion_example1(const DeskScale& ds) {
    const EstimateReport rep =
        example1_experiment(*ds.desk, ds.spec, ds.u0, ds.T, ds.steps, 400, ds.seed);
    std::ostringstream os;
    os << "P = " << rep.scalars.at("probability") << " (>= 0.99), variance error = "
       << rep.scalars.at("variance_rel_error") << " (tol 15%)";
    report(9, "example-additive", rep.pass, os.str());
}

// 10. Example experiment: threshold-gated scalar noise, two-sided law.
void criterion_example2(const DeskScale& ds) {
    const double threshold = 1.01 * ds.desk->l2_norm(ds.u0);
    const EstimateReport rep =
        example2_experiment(*ds.desk, ds.u0, ds.T, ds.steps, 1000, threshold, ds.seed);
    std::ostringstream os;
    os << "activation P = " << rep.scalars.at("activation_probability") << ", Wilson ["
       << rep.scalars.at("wilson_low") << ", " << rep.scalars.at("wilson_high")
       << "] strictly inside (0,1), monotone in threshold";
    report(10, "example-threshold", rep.pass, os.str());
}

// 11. Determinism of suite reruns (timestamp excluded) and stores.
void criterion_determinism() {
    const fs::path out = fs::temp_directory_path() / "cshe_acceptance_det";
    fs::remove_all(out);
    RunConfig config; // desk-scale defaults
    config.paths = 10;
    config.threads = 2;
    config.seed = 424242;
    config.output = out.string();

    bool pass = true;
    std::string detail;
    try {
        cmd_verify(config, "hs-operator");
        const std::string first = strip_timestamp(slurp(out / "verify_hs-operator.json"));
        cmd_verify(config, "hs-operator");
        const std::string second = strip_timestamp(slurp(out / "verify_hs-operator.json"));
        cmd_simulate(config);
        const std::string traj1 = slurp(out / "paths/path_00003.traj");
        cmd_simulate(config);
        const std::string traj2 = slurp(out / "paths/path_00003.traj");
        pass = (first == second) && (traj1 == traj2) && !first.empty() && !traj1.empty();
        detail = std::string("verify report rerun identical: ") + (first == second ? "yes" : "no") +
                 ", trajectory store rerun identical: " + (traj1 == traj2 ? "yes" : "no");
    } catch (const std::exception& err) {
        pass = false;
        detail = err.what();
    }
    fs::remove_all(out);
    report(11, "determinism", pass, detail);
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    std::printf("acceptance suite: L-shaped domain, h = 0.02 graded, T = 1, 2048 steps, 100 modes\n");
    DeskScale ds;
    std::printf("systems ready: %d dofs (desk), %d dofs (half), lambda_1 = %.4f\n",
                ds.desk->dof_count(), ds.half->dof_count(), ds.desk->eigenvalues()[0]);

    criterion_manufactured(ds);
    criterion_kernel_identity();
    criterion_grisvard(ds);
    criterion_helmholtz(ds);
    {
        const FrequencyGrid grid = FrequencyGrid::for_path(ds.T, ds.steps);
        const TransformPlan plan = make_transform_plan(*ds.desk, grid, 2);
        criterion_causality(ds, plan);
    }
    criterion_dichotomy(ds);
    criterion_main_estimate(ds);
    criterion_hs(ds);
    criterion_example1(ds);
    criterion_example2(ds);
    criterion_determinism();

    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%d/11 criteria passed in %.0f s\n", 11 - failures, elapsed);
    return failures == 0 ? 0 : 1;
}

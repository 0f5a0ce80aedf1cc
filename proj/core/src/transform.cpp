#include "cshe/transform.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

#include "cshe/fft.hpp"
#include "cshe/quadrature.hpp"

namespace cshe {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n < 4) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const int nt = std::min(threads, n);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < n; i += nt) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// FFT length matching the grid/path duality xi_m t_n = 2 pi m n / L.
int fft_length(const PathSample& path, const FrequencyGrid& grid) {
    const double prod = grid.spacing * path.dt();
    const double l_real = 2.0 * M_PI / prod;
    const int l = static_cast<int>(std::llround(l_real));
    if (std::abs(l_real - l) > 1e-6 || grid.half_count > l / 2)
        throw std::invalid_argument("frequency grid is incommensurate with the path grid");
    if (l < static_cast<int>(path.times.size()))
        throw std::invalid_argument("frequency grid too short for the path");
    return l;
}

// Spectrum rows m=0..M of sum_n seq(n) e^{-i xi_m t_n} for every column
// of seq, via zero-padded FFTs.
Eigen::MatrixXcd phase_sums(const Eigen::MatrixXcd& seq, int l, int half_count) {
    Eigen::MatrixXcd out(half_count + 1, seq.cols());
    Eigen::VectorXcd buf(l);
    for (int k = 0; k < seq.cols(); ++k) {
        buf.setZero();
        buf.head(seq.rows()) = seq.col(k);
        const Eigen::VectorXcd hat = fft::transform(buf, -1);
        out.col(k) = hat.head(half_count + 1);
    }
    return out;
}

double raised_cosine(int m, int half_count, double fraction) {
    const double edge = (1.0 - fraction) * half_count;
    const double a = std::abs(static_cast<double>(m));
    if (a <= edge || fraction <= 0.0) return 1.0;
    const double s = (a - edge) / (half_count - edge);
    return 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, s)));
}

} // namespace

FrequencyGrid FrequencyGrid::for_path(double T, int n_steps, int pad_factor) {
    if (pad_factor < 1) throw std::invalid_argument("pad_factor must be >= 1");
    FrequencyGrid g;
    g.spacing = M_PI / (pad_factor * T);
    g.half_count = pad_factor * n_steps;
    return g;
}

FieldSpectrum laplace_of_path(const PathSample& path, const FrequencyGrid& grid) {
    const int n = path.step_count();
    const int m = path.mode_count();
    const double dt = path.dt();
    for (int i = 0; i < n; ++i) {
        if (std::abs(path.times[i + 1] - path.times[i] - dt) > 1e-12 * std::max(1.0, dt))
            throw std::invalid_argument("laplace_of_path: non-uniform path grid");
    }
    const int l = fft_length(path, grid);
    Eigen::MatrixXcd seq(n + 1, m);
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        seq.row(i) = (dt * w) * path.coeffs.row(i).cast<Complex>();
    }
    FieldSpectrum u;
    u.grid = grid;
    u.coeffs = phase_sums(seq, l, grid.half_count);
    return u;
}

FieldSpectrum h_transform(const PathSample& path, const FemSystem& system,
                          const CovarianceSpec& spec, const CoefficientModel& model,
                          const FrequencyGrid& grid) {
    const int n = path.step_count();
    const int m = path.mode_count();
    const double dt = path.dt();
    const double T = path.times[n];
    if (path.increments.rows() != n)
        throw std::invalid_argument("h_transform: path carries no increments");
    const int l = fft_length(path, grid);

    Eigen::VectorXd u0_coeffs, v0_coeffs;
    if (model.variant == ModelVariant::example2) {
        u0_coeffs = system.eigen_coefficients(model.u0_field);
        v0_coeffs = system.eigen_coefficients(model.v0_field);
    }

    Eigen::MatrixXcd seq = Eigen::MatrixXcd::Zero(n + 1, m);
    for (int i = 0; i <= n; ++i) {
        if (model.has_drift()) {
            const Eigen::VectorXd fu = system.eigen_coefficients(
                apply_F(model, system, system.eigen_combination(path.coeffs.row(i).transpose())));
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            seq.row(i) += (dt * w) * fu.cast<Complex>();
        }
        if (i < n) {
            // Ito left-point image of G(u_i) dW_i in the eigenbasis.
            Eigen::VectorXd g;
            switch (model.variant) {
                case ModelVariant::additive:
                    g = path.increments.row(i).transpose();
                    break;
                case ModelVariant::example2: {
                    const double norm = path.coeffs.row(i).norm();
                    const double act = std::max(0.0, norm - model.threshold);
                    g = path.increments(i, 0) * (u0_coeffs + act * v0_coeffs);
                    break;
                }
                default: {
                    const Eigen::VectorXd u_nodal =
                        system.eigen_combination(path.coeffs.row(i).transpose());
                    g = system.eigen_coefficients(apply_G(
                        model, system, spec, u_nodal,
                        path.increments.row(i).head(spec.rank).transpose()));
                }
            }
            seq.row(i) += g.cast<Complex>();
        }
    }

    FieldSpectrum h;
    h.grid = grid;
    h.coeffs = phase_sums(seq, l, grid.half_count);
    const Eigen::VectorXcd u0 = path.coeffs.row(0).transpose().cast<Complex>();
    const Eigen::VectorXcd uT = path.coeffs.row(n).transpose().cast<Complex>();
    for (int k = 0; k <= grid.half_count; ++k) {
        const Complex phase = std::exp(Complex(0.0, -grid.xi(k) * T));
        h.coeffs.row(k) += (u0 - phase * uT).transpose();
    }
    return h;
}

Eigen::VectorXd helmholtz_residual(const FemSystem& system, const FieldSpectrum& u,
                                   const FieldSpectrum& h) {
    if (u.coeffs.rows() != h.coeffs.rows() || u.coeffs.cols() != h.coeffs.cols())
        throw std::invalid_argument("helmholtz_residual: grid mismatch");
    const Eigen::VectorXd& lam = system.eigenvalues();
    Eigen::VectorXd out(u.coeffs.rows());
    for (int m = 0; m < u.coeffs.rows(); ++m) {
        const Complex z(0.0, u.grid.xi(m));
        double num = 0.0, den = 0.0;
        for (int k = 0; k < u.coeffs.cols(); ++k) {
            num += std::norm((z + lam[k]) * u.coeffs(m, k) - h.coeffs(m, k));
            den += std::norm(h.coeffs(m, k));
        }
        out[m] = den > 0.0 ? std::sqrt(num / den) : 0.0;
    }
    return out;
}

double helmholtz_residual_at(const FemSystem& system, Complex z, const Eigen::VectorXcd& u,
                             const Eigen::VectorXcd& h) {
    const Eigen::VectorXcd mh = system.mass().cast<Complex>() * h;
    const Eigen::VectorXcd res =
        system.stiffness().cast<Complex>() * u + z * (system.mass().cast<Complex>() * u) - mh;
    // dual norm through M^{-1}
    const Eigen::VectorXd rr = system.solve_mass(res.real());
    const Eigen::VectorXd ri = system.solve_mass(res.imag());
    const Eigen::VectorXd hr = system.solve_mass(mh.real());
    const Eigen::VectorXd hi = system.solve_mass(mh.imag());
    const double num = res.real().dot(rr) + res.imag().dot(ri);
    const double den = mh.real().dot(hr) + mh.imag().dot(hi);
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

Eigen::VectorXd dual_base(const FemSystem& system, int corner) {
    const PolygonalDomain& domain = system.domain();
    const Corner& c = domain.corner(corner);
    const Mesh& mesh = system.mesh();

    // Annulus load from the analytic Laplacian of the dual seed.
    auto touches_annulus = [&](int t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double r = (mesh.nodes[tri[i]] - c.frame.origin).norm();
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        return rmin < c.r1 * 1.02 && rmax > c.r0 * 0.98;
    };
    const Eigen::VectorXd load = system.assemble_load(
        [&](const Vec2& x) { return laplacian_of_dual_seed(domain, corner, x); }, touches_annulus);
    const Eigen::VectorXd phi0 = system.solve_stiffness(-load);

    Eigen::VectorXd psi0(system.dof_count());
    for (int d = 0; d < system.dof_count(); ++d) {
        const Vec2& x = mesh.nodes[static_cast<std::size_t>(system.node_of_dof(d))];
        const auto [r, th] = c.frame.polar(x);
        (void)th;
        if (r >= 1e-3) {
            psi0[d] = dual_seed_eval(domain, corner, x);
        } else {
            // Patch average over the adjacent triangles; corner-vertex
            // triangles get the graded radial rule.
            double num = 0.0, den = 0.0;
            for (int t = 0; t < mesh.triangle_count(); ++t) {
                const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
                int local = -1;
                bool has_corner_vertex = false;
                for (int i = 0; i < 3; ++i) {
                    if (tri[i] == system.node_of_dof(d)) local = i;
                    if ((mesh.nodes[tri[i]] - c.frame.origin).norm() < 1e-14)
                        has_corner_vertex = true;
                }
                if (local < 0) continue;
                const Vec2 &a = mesh.nodes[tri[0]], &b = mesh.nodes[tri[1]],
                           &cc = mesh.nodes[tri[2]];
                auto hat = [&](const Vec2& p) {
                    const double area2 = (b - a).x() * (cc - a).y() - (cc - a).x() * (b - a).y();
                    double lam[3];
                    lam[0] = ((b - p).x() * (cc - p).y() - (cc - p).x() * (b - p).y()) / area2;
                    lam[1] = ((cc - p).x() * (a - p).y() - (a - p).x() * (cc - p).y()) / area2;
                    lam[2] = 1.0 - lam[0] - lam[1];
                    return lam[local];
                };
                if (has_corner_vertex) {
                    // order so the corner vertex leads
                    std::array<Vec2, 3> v = {a, b, cc};
                    std::sort(v.begin(), v.end(), [&](const Vec2& p, const Vec2& q) {
                        return (p - c.frame.origin).norm() < (q - c.frame.origin).norm();
                    });
                    num += quad::corner_triangle_integral(
                        v[0], v[1], v[2], -c.alpha,
                        [&](const Vec2& p) {
                            const auto [rr, tt] = c.frame.polar(p);
                            return cutoff_eval(domain, corner, rr) * std::sin(c.alpha * tt) *
                                   hat(p);
                        });
                    den += quad::corner_triangle_integral(v[0], v[1], v[2], 0.0, hat);
                } else {
                    for (const auto& q : quad::triangle_rule(a, b, cc)) {
                        const Vec2 p(q.x, q.y);
                        num += q.w * dual_seed_eval(domain, corner, p) * hat(p);
                        den += q.w * hat(p);
                    }
                }
            }
            psi0[d] = den > 0.0 ? num / den : 0.0;
        }
    }
    return (psi0 - phi0) / M_PI;
}

Eigen::VectorXcd dual_function(const FemSystem& system, int corner, Complex z,
                               const Eigen::VectorXd& v0) {
    (void)corner;
    if (z == Complex(0.0, 0.0)) return v0.cast<Complex>();
    const Eigen::VectorXcd v0c = v0.cast<Complex>();
    return v0c - z * system.resolvent_apply(z, v0c);
}

Eigen::VectorXcd dual_eigen_pairings(const FemSystem& system, const Eigen::VectorXd& v0_coeffs,
                                     Complex z) {
    const Eigen::VectorXd& lam = system.eigenvalues();
    Eigen::VectorXcd d(v0_coeffs.size());
    for (int k = 0; k < v0_coeffs.size(); ++k) d[k] = v0_coeffs[k] * lam[k] / (z + lam[k]);
    return d;
}

ScalarSpectrum singular_coefficient(const FemSystem& system, const FieldSpectrum& h,
                                    const Eigen::VectorXd& v0) {
    const Eigen::VectorXd v0_coeffs = system.eigen_coefficients(v0);
    ScalarSpectrum c;
    c.grid = h.grid;
    c.values.resize(h.grid.half_count + 1);
    for (int m = 0; m <= h.grid.half_count; ++m) {
        const Eigen::VectorXcd d =
            dual_eigen_pairings(system, v0_coeffs, Complex(0.0, h.grid.xi(m)));
        c.values[m] = (h.coeffs.row(m).transpose().array() * d.array()).sum();
    }
    return c;
}

Complex singular_coefficient_at(const FemSystem& system, const Eigen::VectorXcd& h_nodal,
                                const Eigen::VectorXcd& v_z) {
    // <H, conj(v)> = int H v
    return (h_nodal.transpose() * (system.mass().cast<Complex>() * v_z))(0);
}

CornerSweep make_corner_sweep(const FemSystem& system, int corner) {
    const Corner& c = system.domain().corner(corner);
    CornerSweep sweep;
    sweep.corner = corner;
    for (int d = 0; d < system.dof_count(); ++d) {
        const Vec2& x = system.mesh().nodes[static_cast<std::size_t>(system.node_of_dof(d))];
        const auto [r, th] = c.frame.polar(x);
        if (r < c.r1) {
            sweep.dofs.push_back(d);
            sweep.radius.push_back(r);
            sweep.angle.push_back(th);
        }
    }
    const int ns = static_cast<int>(sweep.dofs.size());
    sweep.mass_eigs.resize(ns, system.eigen_count());
    for (int i = 0; i < ns; ++i) sweep.mass_eigs.row(i) = system.mass_eigenvectors().row(sweep.dofs[i]);
    std::vector<int> inv(system.dof_count(), -1);
    for (int i = 0; i < ns; ++i) inv[static_cast<std::size_t>(sweep.dofs[i])] = i;
    std::vector<Eigen::Triplet<double>> trips;
    for (int col = 0; col < system.mass().outerSize(); ++col) {
        if (inv[static_cast<std::size_t>(col)] < 0) continue;
        for (SparseD::InnerIterator it(system.mass(), col); it; ++it) {
            if (inv[static_cast<std::size_t>(it.row())] < 0) continue;
            trips.emplace_back(inv[static_cast<std::size_t>(it.row())],
                               inv[static_cast<std::size_t>(col)], it.value());
        }
    }
    sweep.mass_block.resize(ns, ns);
    sweep.mass_block.setFromTriplets(trips.begin(), trips.end());
    sweep.v0 = dual_base(system, corner);
    sweep.v0_coeffs = system.eigen_coefficients(sweep.v0);
    return sweep;
}

void corner_fields_at(const FemSystem& system, const CornerSweep& sweep, Complex z,
                      Eigen::VectorXcd& singular, Eigen::VectorXcd& laplacian) {
    const PolygonalDomain& domain = system.domain();
    const Corner& c = domain.corner(sweep.corner);
    const double a = c.alpha;
    const Complex beta = (z == Complex(0.0, 0.0)) ? Complex(0.0, 0.0) : sqrt_right_half(z);
    const int ns = static_cast<int>(sweep.dofs.size());
    singular.resize(ns);
    laplacian.resize(ns);
    for (int i = 0; i < ns; ++i) {
        const double r = sweep.radius[static_cast<std::size_t>(i)];
        const double th = sweep.angle[static_cast<std::size_t>(i)];
        const double s = std::sin(a * th);
        const double eta = cutoff_eval(domain, sweep.corner, r);
        const double eta1 = cutoff_d1(domain, sweep.corner, r);
        const double eta2 = cutoff_d2(domain, sweep.corner, r);
        const double ra = std::pow(r, a);
        const Complex damp = std::exp(-beta * r);
        singular[i] = damp * eta * ra * s;
        const double lap_s = s * (eta2 * ra + (2.0 * a + 1.0) * eta1 * ra / r);
        const double B = eta * ra;
        const double B1 = eta1 * ra + a * eta * ra / r;
        laplacian[i] = damp * (lap_s + (z * B - beta * (2.0 * B1 + B / r)) * s);
    }
}

TransformPlan make_transform_plan(const FemSystem& system, const FrequencyGrid& grid,
                                  int threads) {
    TransformPlan plan;
    plan.grid = grid;
    const int n_corners = system.domain().corner_count();
    const int m_eig = system.eigen_count();
    for (int j = 0; j < n_corners; ++j) plan.corners.push_back(make_corner_sweep(system, j));
    plan.singular_pairings.resize(n_corners);
    plan.laplacian_pairings.resize(n_corners);
    plan.singular_norm2.resize(n_corners);
    plan.laplacian_norm2.resize(n_corners);
    for (int j = 0; j < n_corners; ++j) {
        plan.singular_pairings[j].resize(grid.half_count + 1, m_eig);
        plan.laplacian_pairings[j].resize(grid.half_count + 1, m_eig);
        plan.singular_norm2[j].resize(grid.half_count + 1);
        plan.laplacian_norm2[j].resize(grid.half_count + 1);
    }
    parallel_for(grid.half_count + 1, threads, [&](int m) {
        const Complex z(0.0, grid.xi(m));
        Eigen::VectorXcd s, w;
        for (int j = 0; j < n_corners; ++j) {
            const CornerSweep& sweep = plan.corners[static_cast<std::size_t>(j)];
            corner_fields_at(system, sweep, z, s, w);
            plan.singular_pairings[j].row(m) = (sweep.mass_eigs.transpose() * s).transpose();
            plan.laplacian_pairings[j].row(m) = (sweep.mass_eigs.transpose() * w).transpose();
            plan.singular_norm2[j][m] = (s.adjoint() * (sweep.mass_block * s))(0).real();
            plan.laplacian_norm2[j][m] = (w.adjoint() * (sweep.mass_block * w))(0).real();
        }
    });
    return plan;
}

PhiSignal phi_from_spectrum(const ScalarSpectrum& c, double window_fraction) {
    const int half = c.grid.half_count;
    const int l = 2 * half;
    // Hermitian check relative to the overall scale.
    const double scale = c.values.cwiseAbs().maxCoeff();
    if (std::abs(c.values[0].imag()) > 1e-8 * std::max(scale, 1e-300))
        throw std::invalid_argument("phi_from_spectrum: non-Hermitian input (complex at xi=0)");

    Eigen::VectorXcd bins = Eigen::VectorXcd::Zero(l);
    for (int m = 0; m <= half; ++m) {
        const double win = raised_cosine(m, half, window_fraction);
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        if (m == 0) {
            bins[0] = sign * win * Complex(c.values[0].real(), 0.0);
        } else if (m == half) {
            bins[half] = sign * win * 2.0 * c.values[half].real();
        } else {
            bins[m] = sign * win * c.values[m];
            bins[l - m] = std::conj(bins[m]);
        }
    }
    const Eigen::VectorXcd time = fft::transform(bins, +1);
    PhiSignal phi;
    const double pad = c.grid.pad();
    phi.dt = 2.0 * pad / l;
    phi.times.resize(l);
    phi.values.resize(l);
    const double factor = c.grid.spacing / (2.0 * M_PI);
    for (int k = 0; k < l; ++k) {
        phi.times[k] = -pad + k * phi.dt;
        phi.values[k] = factor * time[k].real();
    }
    return phi;
}

SupportCheck support_check(const PhiSignal& phi, double delta, double tol) {
    double neg = 0.0, total = 0.0;
    for (int k = 0; k < phi.values.size(); ++k) {
        const double v2 = phi.values[k] * phi.values[k];
        total += v2;
        if (phi.times[k] < -delta) neg += v2;
    }
    SupportCheck s;
    s.delta = delta;
    s.tol = tol;
    s.mass_fraction = total > 0.0 ? neg / total : 0.0;
    s.accepted = s.mass_fraction <= tol;
    return s;
}

double sobolev_time_norm(const ScalarSpectrum& f, double s) {
    double sum = std::norm(f.values[0]);
    for (int m = 1; m <= f.grid.half_count; ++m) {
        const double xi = f.grid.xi(m);
        sum += 2.0 * std::pow(1.0 + xi * xi, s) * std::norm(f.values[m]);
    }
    return std::sqrt(sum * f.grid.spacing);
}

ScalarSpectrum spectrum_of_signal(const PhiSignal& signal) {
    const int l = static_cast<int>(signal.values.size());
    ScalarSpectrum out;
    out.grid.half_count = l / 2;
    out.grid.spacing = 2.0 * M_PI / (l * signal.dt);
    Eigen::VectorXcd buf = signal.values.cast<Complex>();
    const Eigen::VectorXcd hat = fft::transform(buf, -1);
    out.values.resize(out.grid.half_count + 1);
    for (int m = 0; m <= out.grid.half_count; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        out.values[m] = signal.dt * sign * hat[m];
    }
    return out;
}

ConvolutionResult convolve_singular(const FemSystem& system, int corner, const PhiSignal& phi,
                                    const Eigen::VectorXd& psi_test,
                                    const Eigen::VectorXd& phi_test) {
    if (phi_test.size() != phi.values.size())
        throw std::invalid_argument("convolve_singular: test grid mismatch");
    const PolygonalDomain& domain = system.domain();
    const Corner& c = domain.corner(corner);
    const Mesh& mesh = system.mesh();
    const Eigen::VectorXd psi_nodal = system.to_nodal(psi_test);

    // Quadrature data over the singular support: radius and weight *
    // S(x) * psi(x) per point.
    std::vector<double> qr, qw;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        bool near = false;
        for (int i = 0; i < 3; ++i) {
            if ((mesh.nodes[tri[i]] - c.frame.origin).norm() < c.r1) near = true;
        }
        if (!near) continue;
        const Vec2 &a = mesh.nodes[tri[0]], &b = mesh.nodes[tri[1]], &cc = mesh.nodes[tri[2]];
        const double area2 = (b - a).x() * (cc - a).y() - (cc - a).x() * (b - a).y();
        for (const auto& q : quad::triangle_rule(a, b, cc)) {
            const Vec2 p(q.x, q.y);
            const auto [r, th] = c.frame.polar(p);
            if (r >= c.r1 || r <= 0.0) continue;
            const double sv =
                cutoff_eval(domain, corner, r) * std::pow(r, c.alpha) * std::sin(c.alpha * th);
            double lam[3];
            lam[0] = ((b - p).x() * (cc - p).y() - (cc - p).x() * (b - p).y()) / area2;
            lam[1] = ((cc - p).x() * (a - p).y() - (a - p).x() * (cc - p).y()) / area2;
            lam[2] = 1.0 - lam[0] - lam[1];
            const double psi =
                lam[0] * psi_nodal[tri[0]] + lam[1] * psi_nodal[tri[1]] + lam[2] * psi_nodal[tri[2]];
            if (sv * psi != 0.0) {
                qr.push_back(r);
                qw.push_back(q.w * sv * psi);
            }
        }
    }

    const int l = static_cast<int>(phi.values.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(l);
    for (int k = 0; k < l; ++k) {
        const double t = k * phi.dt;
        if (t <= 0.0) continue;
        double sum = 0.0;
        for (std::size_t i = 0; i < qr.size(); ++i) sum += qw[i] * levy_kernel(t, qr[i]);
        g[k] = sum;
    }

    // Linear convolution via FFT, result on the phi grid.
    Eigen::VectorXcd fa = Eigen::VectorXcd::Zero(2 * l), fb = Eigen::VectorXcd::Zero(2 * l);
    fa.head(l) = phi.values.cast<Complex>();
    fb.head(l) = g.cast<Complex>();
    const Eigen::VectorXcd ca = fft::transform(fa, -1);
    const Eigen::VectorXcd cb = fft::transform(fb, -1);
    Eigen::VectorXcd prod = ca.cwiseProduct(cb);
    const Eigen::VectorXcd conv = fft::transform(prod, +1) / static_cast<double>(2 * l);

    ConvolutionResult out;
    out.convolved.dt = phi.dt;
    out.convolved.times = phi.times;
    out.convolved.values.resize(l);
    for (int k = 0; k < l; ++k) out.convolved.values[k] = phi.dt * conv[k].real();
    out.pairing = phi.dt * out.convolved.values.dot(phi_test);
    return out;
}

Decomposition decompose_path(const FemSystem& system, const CovarianceSpec& spec,
                             const CoefficientModel& model, const PathSample& path,
                             const TransformPlan& plan, const DecompositionOptions& options) {
    const FrequencyGrid& grid = plan.grid;
    const int half = grid.half_count;
    const int m_eig = system.eigen_count();
    const int n_corners = static_cast<int>(plan.corners.size());
    const Eigen::VectorXd& lam = system.eigenvalues();

    const FieldSpectrum h = h_transform(path, system, spec, model, grid);

    Decomposition dec;
    dec.grid = grid;
    dec.options = options;
    dec.coefficient.resize(n_corners);
    for (int j = 0; j < n_corners; ++j) {
        dec.coefficient[j].grid = grid;
        dec.coefficient[j].values.resize(half + 1);
    }
    dec.regular_coeffs.resize(half + 1, m_eig);
    dec.regular_l2.resize(half + 1);
    dec.regular_lap_l2.resize(half + 1);
    dec.h_l2.resize(half + 1);
    dec.regular_tensor_norm_sq = 0.0;

    Eigen::VectorXcd a(m_eig), b(m_eig);
    for (int m = 0; m <= half; ++m) {
        const Complex z(0.0, grid.xi(m));
        const Eigen::VectorXcd hrow = h.coeffs.row(m).transpose();
        for (int k = 0; k < m_eig; ++k) {
            a[k] = hrow[k] / (z + lam[k]);
            b[k] = -lam[k] * a[k];
        }
        double ur2 = a.squaredNorm();
        double lap2 = b.squaredNorm();
        Eigen::VectorXcd proj = a;
        for (int j = 0; j < n_corners; ++j) {
            const CornerSweep& sweep = plan.corners[static_cast<std::size_t>(j)];
            const Eigen::VectorXcd d = dual_eigen_pairings(system, sweep.v0_coeffs, z);
            const Complex c = (hrow.array() * d.array()).sum();
            dec.coefficient[j].values[m] = c;
            const Eigen::VectorXcd t = plan.singular_pairings[j].row(m).transpose();
            const Eigen::VectorXcd q = plan.laplacian_pairings[j].row(m).transpose();
            ur2 += -2.0 * std::real(std::conj(c) * (a.array() * t.array().conjugate()).sum()) +
                   std::norm(c) * plan.singular_norm2[j][m];
            lap2 += -2.0 * std::real(std::conj(c) * (b.array() * q.array().conjugate()).sum()) +
                    std::norm(c) * plan.laplacian_norm2[j][m];
            proj -= c * t;
        }
        dec.regular_coeffs.row(m) = proj.transpose();
        dec.regular_l2[m] = std::sqrt(std::max(0.0, ur2));
        dec.regular_lap_l2[m] = std::sqrt(std::max(0.0, lap2));
        dec.h_l2[m] = hrow.norm();
        const double weight = (m == 0) ? 1.0 : 2.0;
        dec.regular_tensor_norm_sq += weight * grid.spacing *
                                      std::pow(1.0 + grid.xi(m) * grid.xi(m), -options.sobolev_s) *
                                      std::max(0.0, lap2);
    }

    dec.phi.resize(n_corners);
    dec.support.resize(n_corners);
    dec.phi_norm_windowed.resize(n_corners);
    dec.phi_norm_raw.resize(n_corners);
    dec.accepted = true;
    for (int j = 0; j < n_corners; ++j) {
        dec.phi[j] = phi_from_spectrum(dec.coefficient[j], options.window_fraction);
        const double dt_phi = dec.phi[j].dt;
        dec.support[j] = support_check(dec.phi[j], options.support_delta_steps * dt_phi,
                                       options.support_tol);
        dec.accepted = dec.accepted && dec.support[j].accepted;
        const double alpha = system.domain().corner(j).alpha;
        const double order = 0.5 * (1.0 - alpha) - options.sobolev_s;
        dec.phi_norm_raw[j] = sobolev_time_norm(dec.coefficient[j], order);
        ScalarSpectrum windowed = dec.coefficient[j];
        for (int m = 0; m <= half; ++m)
            windowed.values[m] *= raised_cosine(m, half, options.window_fraction);
        dec.phi_norm_windowed[j] = sobolev_time_norm(windowed, order);
    }
    return dec;
}

RegularPart regular_part_at(const FemSystem& system, Complex z, const Eigen::VectorXcd& h,
                            const std::vector<Complex>& c_per_corner) {
    const int n_corners = system.domain().corner_count();
    if (static_cast<int>(c_per_corner.size()) != n_corners)
        throw std::invalid_argument("regular_part_at: one coefficient per re-entrant corner");
    const Eigen::VectorXcd w = system.resolvent_apply(z, h);
    RegularPart out;
    out.field = w;
    out.laplacian = z * w - h;
    for (int j = 0; j < n_corners; ++j) {
        CornerSweep sweep; // local, light variant without eigen blocks
        const Corner& c = system.domain().corner(j);
        for (int d = 0; d < system.dof_count(); ++d) {
            const Vec2& x = system.mesh().nodes[static_cast<std::size_t>(system.node_of_dof(d))];
            const auto [r, th] = c.frame.polar(x);
            if (r < c.r1) {
                sweep.dofs.push_back(d);
                sweep.radius.push_back(r);
                sweep.angle.push_back(th);
            }
        }
        sweep.corner = j;
        Eigen::VectorXcd s, lap;
        corner_fields_at(system, sweep, z, s, lap);
        for (std::size_t i = 0; i < sweep.dofs.size(); ++i) {
            out.field[sweep.dofs[i]] -= c_per_corner[static_cast<std::size_t>(j)] * s[static_cast<long>(i)];
            out.laplacian[sweep.dofs[i]] -=
                c_per_corner[static_cast<std::size_t>(j)] * lap[static_cast<long>(i)];
        }
    }
    return out;
}

double decomposition_residual(const FemSystem& system, const PathSample& path,
                              const Decomposition& decomp, int n_time_tests, int n_space_tests) {
    const int n = path.step_count();
    const double T = path.times[n];
    const double dt = path.dt();
    const int half = decomp.grid.half_count;
    const int n_modes = std::min(n_space_tests, path.mode_count());
    const double sigma = T / 4.0, tc = T / 2.0;

    double worst_abs = 0.0, scale = 0.0;
    for (int q = 0; q < n_time_tests; ++q) {
        const double nu = q * M_PI / T;
        for (int trig = 0; trig < (q == 0 ? 1 : 2); ++trig) {
            // phi(t) = exp(-(t-tc)^2/(2 sigma^2)) * {cos,sin}(nu t)
            auto phi_t = [&](double t) {
                const double g = std::exp(-(t - tc) * (t - tc) / (2.0 * sigma * sigma));
                return trig == 0 ? g * std::cos(nu * t) : g * std::sin(nu * t);
            };
            // analytic Fourier transform at xi (convention int e^{-i xi t} phi dt)
            auto phi_hat = [&](double xi) {
                auto ghat = [&](double w) {
                    return sigma * std::sqrt(2.0 * M_PI) * std::exp(-0.5 * sigma * sigma * w * w) *
                           std::exp(Complex(0.0, -w * tc));
                };
                if (trig == 0) return 0.5 * (ghat(xi - nu) + ghat(xi + nu));
                return Complex(0.0, -0.5) * (ghat(xi - nu) - ghat(xi + nu));
            };

            for (int j = 0; j < n_modes; ++j) {
                // left side: time-domain pairing with the path
                double lhs = 0.0;
                for (int i = 0; i <= n; ++i) {
                    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
                    lhs += dt * w * phi_t(path.times[i]) * path.coeffs(i, j);
                }
                // right side 1: regular part in the frequency domain
                Complex rhs1(0.0, 0.0);
                for (int m = 0; m <= half; ++m) {
                    const double xi = decomp.grid.xi(m);
                    const Complex term = phi_hat(-xi) * decomp.regular_coeffs(m, j);
                    rhs1 += (m == 0) ? term : term + std::conj(term);
                }
                rhs1 *= decomp.grid.spacing / (2.0 * M_PI);
                // right side 2: kernel convolution channel per corner
                double rhs2 = 0.0;
                for (std::size_t cj = 0; cj < decomp.phi.size(); ++cj) {
                    Eigen::VectorXd psi = Eigen::VectorXd::Zero(system.dof_count());
                    psi = system.eigenvectors().col(j);
                    Eigen::VectorXd phi_samples(decomp.phi[cj].times.size());
                    for (int k = 0; k < phi_samples.size(); ++k)
                        phi_samples[k] = phi_t(decomp.phi[cj].times[k]);
                    const ConvolutionResult conv = convolve_singular(
                        system, static_cast<int>(cj), decomp.phi[cj], psi, phi_samples);
                    rhs2 += conv.pairing;
                }
                const double err = std::abs(lhs - (rhs1.real() + rhs2));
                worst_abs = std::max(worst_abs, err);
                scale = std::max(scale, std::abs(lhs));
            }
        }
    }
    return scale > 0.0 ? worst_abs / scale : 0.0;
}

} // namespace cshe

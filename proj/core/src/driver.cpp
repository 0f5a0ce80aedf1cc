#include "cshe/driver.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "cshe/rng.hpp"

namespace cshe {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json config_json(const RunConfig& config) {
    json j;
    for (const auto& [k, v] : config.resolved()) j[k] = v;
    return j;
}

// Resolved corner data; coefficient values are only comparable for a
// fixed cutoff, so every artifact carries it.
json domain_json(const PolygonalDomain& domain) {
    json corners = json::array();
    for (int j = 0; j < domain.corner_count(); ++j) {
        const Corner& c = domain.corner(j);
        corners.push_back({{"vertex", c.vertex},
                           {"gamma", c.gamma},
                           {"alpha", c.alpha},
                           {"r0", c.r0},
                           {"r1", c.r1},
                           {"blend", "quintic"}});
    }
    return corners;
}

std::int64_t timestamp_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open report for writing: " + path.string());
    out << j.dump(2) << "\n";
}

json report_json(const EstimateReport& report, const RunConfig& config, std::uint64_t input_hash) {
    json j;
    j["experiment"] = report.tag;
    j["config"] = config_json(config);
    j["corners"] = domain_json(build_domain(config.vertices, config.cutoffs));
    j["input_hash"] = input_hash;
    j["pass"] = report.pass;
    j["timestamp"] = timestamp_now();
    json trace = json::array();
    for (const auto& [label, value] : report.trace) {
        trace.push_back({{"label", label}, {"value", value}});
    }
    j["trace"] = trace;
    for (const auto& [k, v] : report.scalars) j["scalars"][k] = v;
    if (!report.lhs.empty()) j["lhs"] = report.lhs;
    if (!report.rhs.empty()) j["rhs"] = report.rhs;
    if (!report.ratios.empty()) j["ratios"] = report.ratios;
    if (!report.notes.empty()) j["notes"] = report.notes;
    return j;
}

void write_trace_csv(const EstimateReport& report, const fs::path& path) {
    std::ofstream out(path);
    out.precision(17);
    out << "label,value\n";
    for (const auto& [label, value] : report.trace) out << label << "," << value << "\n";
}

Eigen::VectorXd initial_field(const RunConfig& config, const FemSystem& system) {
    if (config.initial == "zero") return Eigen::VectorXd::Zero(system.dof_count());
    return system.interpolate(
        [](const Vec2& x) { return std::sin(M_PI * x.x()) * std::sin(M_PI * x.y()); });
}

} // namespace

RunContext make_context(const RunConfig& config) {
    config.validate();
    RunContext ctx;
    ctx.config = config;
    ctx.threads = config.threads > 0
                      ? config.threads
                      : std::max(1u, std::thread::hardware_concurrency());
    ctx.domain = std::make_unique<PolygonalDomain>(build_domain(config.vertices, config.cutoffs));
    std::vector<double> beta;
    if (config.mesh_beta > 0.0)
        beta.assign(static_cast<std::size_t>(ctx.domain->corner_count()), config.mesh_beta);
    Mesh mesh = triangulate(*ctx.domain, config.mesh_h, beta);
    ctx.system = std::make_unique<FemSystem>(*ctx.domain, std::move(mesh));
    ctx.system->compute_eigenpairs(config.modes);

    ctx.spec.q0 = config.q0;
    ctx.spec.rho = config.rho;
    ctx.spec.rank = config.rank;

    ctx.u0 = initial_field(config, *ctx.system);
    const ModelVariant variant = model_variant_from_string(config.model_variant);
    switch (variant) {
        case ModelVariant::additive:
            ctx.model = make_additive_model();
            break;
        case ModelVariant::nemytskii_smooth:
            ctx.model = make_nemytskii_model(config.lipschitz_f, config.lipschitz_g);
            break;
        case ModelVariant::finite_dim:
            ctx.model = make_finite_dim_model(config.lipschitz_f, config.lipschitz_g);
            break;
        case ModelVariant::example2: {
            if (ctx.domain->corner_count() == 0)
                throw std::invalid_argument("example2 model needs a re-entrant corner");
            ctx.spec.rho = 0.0;
            ctx.spec.rank = 1;
            const Eigen::VectorXd v0 = dual_base(*ctx.system, 0);
            double threshold = config.threshold;
            if (threshold <= 0.0) threshold = 1.01 * ctx.system->l2_norm(ctx.u0);
            ctx.model = make_example2_model(ctx.u0, v0, threshold);
            break;
        }
    }
    return ctx;
}

bool cmd_simulate(const RunConfig& config) {
    RunContext ctx = make_context(config);
    const fs::path out_dir(config.output);
    fs::create_directories(out_dir / "paths");

    json manifest;
    manifest["config"] = config_json(config);
    manifest["corners"] = domain_json(*ctx.domain);
    std::string all_config;
    for (const auto& [k, v] : config.resolved()) all_config += k + "=" + v + "\n";
    manifest["input_hash"] = fnv1a(all_config);
    manifest["timestamp"] = timestamp_now();

    json files = json::array();
    std::vector<PathSample> paths;
    for (int p = 0; p < config.paths; ++p) {
        const std::uint64_t sub = rng::substream(config.seed, static_cast<std::uint64_t>(p));
        PathSample path =
            simulate_path(*ctx.system, ctx.spec, ctx.model, ctx.u0, config.T, config.steps, sub);
        char name[32];
        std::snprintf(name, sizeof(name), "path_%05d.traj", p);
        write_path(path, (out_dir / "paths" / name).string());
        files.push_back({{"file", std::string("paths/") + name}, {"seed", sub}});
        paths.push_back(std::move(path));
    }
    manifest["paths"] = files;
    const PathStatistics st = path_statistics(paths);
    manifest["statistics"] = {{"sup_mean_square", st.sup_mean_square},
                              {"end_mean_square", st.end_mean_square},
                              {"init_mean_square", st.init_mean_square},
                              {"end_stderr", st.end_stderr},
                              {"init_stderr", st.init_stderr}};
    write_json(manifest, out_dir / "simulate.json");
    return true;
}

bool cmd_decompose(const RunConfig& config) {
    const fs::path out_dir(config.output);
    const fs::path manifest_path = out_dir / "simulate.json";
    if (!fs::exists(manifest_path))
        throw std::runtime_error("missing manifest " + manifest_path.string() +
                                 " (run simulate first)");
    json manifest;
    {
        std::ifstream in(manifest_path);
        in >> manifest;
    }
    std::string all_config;
    for (const auto& [k, v] : config.resolved()) all_config += k + "=" + v + "\n";
    if (manifest["input_hash"].get<std::uint64_t>() != fnv1a(all_config))
        throw std::runtime_error("config hash mismatch against " + manifest_path.string());

    RunContext ctx = make_context(config);
    DecompositionOptions options;
    options.pad_factor = config.pad_factor;
    options.window_fraction = config.window_fraction;
    options.sobolev_s = config.sobolev_s;
    options.support_tol = config.support_tol;
    options.support_delta_steps = config.support_delta_steps;

    const FrequencyGrid grid =
        FrequencyGrid::for_path(config.T, config.steps, config.pad_factor);
    const TransformPlan plan = make_transform_plan(*ctx.system, grid, ctx.threads);

    json out;
    out["config"] = config_json(config);
    out["corners"] = domain_json(*ctx.domain);
    out["timestamp"] = timestamp_now();
    out["grid"] = {{"spacing", grid.spacing},
                   {"half_count", grid.half_count},
                   {"pad", grid.pad()},
                   {"window_fraction", options.window_fraction}};
    json per_path = json::array();
    std::uint64_t input_hash = manifest["input_hash"].get<std::uint64_t>();
    bool all_accepted = true;

    // Helmholtz residual reported over the resolved, driven band.
    const double xi_cap =
        std::min(ctx.system->eigenvalues()[ctx.spec.rank - 1], 0.1 * config.steps / config.T);

    int index = 0;
    for (const auto& entry : manifest["paths"]) {
        const fs::path file = out_dir / entry["file"].get<std::string>();
        input_hash = rng::hash(input_hash, hash_file(file.string()), 0, 0);
        const PathSample path = read_path(file.string(), config.T);
        const Decomposition dec =
            decompose_path(*ctx.system, ctx.spec, ctx.model, path, plan, options);
        const FieldSpectrum u = laplace_of_path(path, grid);
        const FieldSpectrum h = h_transform(path, *ctx.system, ctx.spec, ctx.model, grid);
        const Eigen::VectorXd residuals = helmholtz_residual(*ctx.system, u, h);
        double res_num = 0.0;
        int res_count = 0;
        for (int m = 0; m <= grid.half_count && grid.xi(m) <= xi_cap; ++m) {
            res_num += residuals[m] * residuals[m] * dec.h_l2[m] * dec.h_l2[m];
            ++res_count;
        }
        double res_den = 0.0;
        for (int m = 0; m <= grid.half_count && grid.xi(m) <= xi_cap; ++m)
            res_den += dec.h_l2[m] * dec.h_l2[m];
        json d;
        d["file"] = entry["file"];
        d["accepted"] = dec.accepted;
        d["tensor_norm_sq"] = dec.regular_tensor_norm_sq;
        d["helmholtz_residual"] = res_den > 0.0 ? std::sqrt(res_num / res_den) : 0.0;
        json corners = json::array();
        for (std::size_t j = 0; j < dec.support.size(); ++j) {
            corners.push_back({{"support_mass", dec.support[j].mass_fraction},
                               {"support_delta", dec.support[j].delta},
                               {"phi_norm_windowed", dec.phi_norm_windowed[j]},
                               {"phi_norm_raw", dec.phi_norm_raw[j]}});
        }
        d["corners"] = corners;
        per_path.push_back(d);
        all_accepted = all_accepted && dec.accepted;

        if (index == 0) {
            // CSV exports for the first path: coefficient spectrum and
            // time-domain signal per corner.
            for (std::size_t j = 0; j < dec.coefficient.size(); ++j) {
                std::ofstream cs(out_dir / ("coefficient_corner" + std::to_string(j) + ".csv"));
                cs.precision(17);
                cs << "xi,re,im\n";
                for (int m = 0; m <= grid.half_count; ++m) {
                    cs << grid.xi(m) << "," << dec.coefficient[j].values[m].real() << ","
                       << dec.coefficient[j].values[m].imag() << "\n";
                }
                std::ofstream ps(out_dir / ("phi_corner" + std::to_string(j) + ".csv"));
                ps.precision(17);
                ps << "t,phi\n";
                for (int k = 0; k < dec.phi[j].values.size(); ++k) {
                    ps << dec.phi[j].times[k] << "," << dec.phi[j].values[k] << "\n";
                }
            }
        }
        ++index;
    }
    out["input_hash"] = input_hash;
    out["paths"] = per_path;
    out["all_accepted"] = all_accepted;
    write_json(out, out_dir / "decompose.json");
    return all_accepted;
}

bool cmd_verify(const RunConfig& config, const std::string& suite) {
    const fs::path out_dir(config.output);
    fs::create_directories(out_dir);
    std::string all_config;
    for (const auto& [k, v] : config.resolved()) all_config += k + "=" + v + "\n";
    const std::uint64_t input_hash = fnv1a(all_config);

    EstimateReport report;
    if (suite == "helmholtz") {
        RunConfig coarse = config;
        coarse.mesh_h = 2.0 * config.mesh_h;
        coarse.validate();
        RunContext cc = make_context(coarse);
        RunContext cf = make_context(config);
        report = helmholtz_refinement(
            {{cc.system.get(), config.steps / 2}, {cf.system.get(), config.steps}}, cf.spec,
            cf.model, config.T, std::min(config.paths, 3), config.seed);
    } else if (suite == "grisvard") {
        RunConfig coarse = config;
        coarse.mesh_h = 2.0 * config.mesh_h;
        RunContext cc = make_context(coarse);
        RunContext cf = make_context(config);
        report = grisvard_sweep({cc.system.get(), cf.system.get()}, 3.0 * M_PI / 4.0, 12, 6, 40,
                                config.seed);
    } else if (suite == "main-estimate") {
        RunContext ctx = make_context(config);
        report = main_estimate_check(*ctx.system, ctx.spec, ctx.model, ctx.u0, config.T,
                                     {config.steps / 2, config.steps}, config.paths,
                                     config.sobolev_s, config.seed, ctx.threads);
    } else if (suite == "hs-operator") {
        RunContext ctx = make_context(config);
        report = hs_operator_check(*ctx.system, ctx.spec, ctx.model, ctx.u0, config.T,
                                   config.steps, config.paths, config.sobolev_s, 64, config.seed);
    } else {
        throw std::invalid_argument("unknown verify suite: " + suite +
                                    " (expected helmholtz|grisvard|main-estimate|hs-operator)");
    }

    write_json(report_json(report, config, input_hash), out_dir / ("verify_" + suite + ".json"));
    write_trace_csv(report, out_dir / ("verify_" + suite + "_trace.csv"));
    return report.pass;
}

bool cmd_example(const RunConfig& config, int which) {
    const fs::path out_dir(config.output);
    fs::create_directories(out_dir);
    std::string all_config;
    for (const auto& [k, v] : config.resolved()) all_config += k + "=" + v + "\n";
    const std::uint64_t input_hash = fnv1a(all_config);

    EstimateReport report;
    if (which == 1) {
        RunConfig cfg = config;
        cfg.model_variant = "additive";
        RunContext ctx = make_context(cfg);
        report = example1_experiment(*ctx.system, ctx.spec, ctx.u0, cfg.T, cfg.steps, cfg.paths,
                                     cfg.seed);
    } else if (which == 2) {
        RunConfig cfg = config;
        cfg.model_variant = "example2";
        RunContext ctx = make_context(cfg);
        report = example2_experiment(*ctx.system, ctx.u0, cfg.T, cfg.steps, cfg.paths,
                                     ctx.model.threshold, cfg.seed);
    } else {
        throw std::invalid_argument("example must be 1 or 2");
    }
    write_json(report_json(report, config, input_hash), out_dir / ("example" +
                                                                   std::to_string(which) + ".json"));
    write_trace_csv(report, out_dir / ("example" + std::to_string(which) + "_trace.csv"));
    return report.pass;
}

std::string strip_timestamp(const std::string& json_text) {
    json j = json::parse(json_text);
    j.erase("timestamp");
    return j.dump(2);
}

} // namespace cshe

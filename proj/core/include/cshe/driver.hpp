#ifndef CSHE_DRIVER_HPP
#define CSHE_DRIVER_HPP

#include <memory>
#include <string>

#include "cshe/config.hpp"
#include "cshe/verify.hpp"

namespace cshe {

// Everything a run needs, resolved once from the configuration.
struct RunContext {
    RunConfig config;
    std::unique_ptr<PolygonalDomain> domain;
    std::unique_ptr<FemSystem> system;
    CovarianceSpec spec;
    CoefficientModel model;
    Eigen::VectorXd u0;
    int threads = 1;
};

RunContext make_context(const RunConfig& config);

// Subcommand drivers: deterministic outputs under `config.output`, every
// report embeds the resolved configuration and a content hash of its
// inputs. Return value is the pass/fail gate (true = pass).
bool cmd_simulate(const RunConfig& config);
bool cmd_decompose(const RunConfig& config);
bool cmd_verify(const RunConfig& config, const std::string& suite);
bool cmd_example(const RunConfig& config, int which);

// Report JSON with the timestamp field removed, for byte comparisons.
std::string strip_timestamp(const std::string& json_text);

} // namespace cshe

#endif

#ifndef CSHE_CONFIG_HPP
#define CSHE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cshe/geometry.hpp"

namespace cshe {

// Flat key = value configuration with [section] headers; values keep
// their raw text and are parsed on access.
class ConfigFile {
  public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_; // "section.key" -> value
};

// Resolved run parameters for the command-line front end. Defaults give
// the L-shaped desk-scale setup.
struct RunConfig {
    std::vector<Vec2> vertices = {{0, 0}, {0, -1}, {1, -1}, {1, 1}, {-1, 1}, {-1, 0}};
    std::vector<std::pair<double, double>> cutoffs; // optional per corner

    double mesh_h = 0.02;
    double mesh_beta = 0.0; // 0 means alpha_j per corner
    int modes = 100;

    std::string model_variant = "additive";
    double q0 = 1.0;
    double rho = 2.2;
    int rank = 100;
    double lipschitz_f = 0.0;
    double lipschitz_g = 1.0;
    double threshold = 0.0;      // example2; 0 means the documented default
    std::string initial = "sinsin"; // or "zero"

    double T = 1.0;
    int steps = 2048;

    int pad_factor = 4;
    double window_fraction = 0.1;
    double support_tol = 1e-2;
    double support_delta_steps = 5.0;

    double sobolev_s = 0.75;

    std::uint64_t seed = 1;
    int paths = 100;
    int threads = 0; // 0 = hardware
    std::string output = "out";

    static RunConfig from_file(const std::string& path);
    static RunConfig from_config(const ConfigFile& file);
    // Throws std::invalid_argument naming the offending field.
    void validate() const;
    // Deterministic flat listing of every resolved field.
    std::map<std::string, std::string> resolved() const;
};

// FNV-1a content hash for reproducibility stamps.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t hash_file(const std::string& path);

} // namespace cshe

#endif

#include "cshe/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cshe/noise.hpp"

namespace cshe {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

} // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        cfg.entries_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: field '" + key + "' is not a number: " + it->second);
    }
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: field '" + key + "' is not an integer: " + it->second);
    }
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: field '" + key + "' is not an integer: " + it->second);
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_config(ConfigFile::parse_file(path));
}

RunConfig RunConfig::from_config(const ConfigFile& file) {
    RunConfig rc;
    // Vertices: "(x,y) (x,y) ..." or "x,y; x,y; ..."; the struct default
    // (L-shaped domain) stays unless the key is present.
    if (file.has("domain.vertices")) {
        const std::string vtx = file.get_string("domain.vertices", "");
        std::string cleaned;
        for (const char ch : vtx)
            cleaned += (ch == '(' || ch == ')' || ch == ';' || ch == ',') ? ' ' : ch;
        std::istringstream vs(cleaned);
        rc.vertices.clear();
        double x, y;
        while (vs >> x >> y) rc.vertices.emplace_back(x, y);
        if (rc.vertices.size() < 3)
            throw std::invalid_argument("config: domain.vertices needs >= 3 points");
    }

    const std::string cuts = file.get_string("domain.cutoffs", "");
    if (!cuts.empty()) {
        std::string c2;
        for (const char ch : cuts) c2 += (ch == ':' || ch == ';' || ch == ',') ? ' ' : ch;
        std::istringstream cs(c2);
        double r0, r1;
        while (cs >> r0 >> r1) rc.cutoffs.emplace_back(r0, r1);
    }

    rc.mesh_h = file.get_double("mesh.h", rc.mesh_h);
    rc.mesh_beta = file.get_double("mesh.beta", rc.mesh_beta);
    rc.modes = file.get_int("mesh.modes", rc.modes);

    rc.model_variant = file.get_string("model.variant", rc.model_variant);
    rc.q0 = file.get_double("model.q0", rc.q0);
    rc.rho = file.get_double("model.rho", rc.rho);
    rc.rank = file.get_int("model.rank", rc.rank);
    rc.lipschitz_f = file.get_double("model.lipschitz_f", rc.lipschitz_f);
    rc.lipschitz_g = file.get_double("model.lipschitz_g", rc.lipschitz_g);
    rc.threshold = file.get_double("model.threshold", rc.threshold);
    rc.initial = file.get_string("model.initial", rc.initial);

    rc.T = file.get_double("time.T", rc.T);
    rc.steps = file.get_int("time.steps", rc.steps);

    rc.pad_factor = file.get_int("frequency.pad_factor", rc.pad_factor);
    rc.window_fraction = file.get_double("frequency.window_fraction", rc.window_fraction);
    rc.support_tol = file.get_double("frequency.support_tol", rc.support_tol);
    rc.support_delta_steps = file.get_double("frequency.support_delta_steps", rc.support_delta_steps);

    rc.sobolev_s = file.get_double("sobolev.s", rc.sobolev_s);

    rc.seed = file.get_u64("run.seed", rc.seed);
    rc.paths = file.get_int("run.paths", rc.paths);
    rc.threads = file.get_int("run.threads", rc.threads);
    rc.output = file.get_string("run.output", rc.output);
    rc.validate();
    return rc;
}

void RunConfig::validate() const {
    if (!(sobolev_s > 0.5))
        throw std::invalid_argument("config: sobolev.s must satisfy s > 1/2 (got " +
                                    std::to_string(sobolev_s) + ")");
    if (!is_power_of_two(steps))
        throw std::invalid_argument("config: time.steps must be a power of two");
    if (!(T > 0.0)) throw std::invalid_argument("config: time.T must be positive");
    if (!(mesh_h > 0.0)) throw std::invalid_argument("config: mesh.h must be positive");
    if (mesh_beta != 0.0 && !(mesh_beta > 0.0 && mesh_beta <= 1.0))
        throw std::invalid_argument("config: mesh.beta must lie in (0,1]");
    if (modes < 1) throw std::invalid_argument("config: mesh.modes must be >= 1");
    if (rank < 1) throw std::invalid_argument("config: model.rank must be >= 1");
    if (rank > modes)
        throw std::invalid_argument("config: model.rank must not exceed mesh.modes");
    if (paths < 1) throw std::invalid_argument("config: run.paths must be >= 1");
    if (pad_factor < 1) throw std::invalid_argument("config: frequency.pad_factor must be >= 1");
    if (!(window_fraction >= 0.0 && window_fraction < 1.0))
        throw std::invalid_argument("config: frequency.window_fraction must lie in [0,1)");
    if (threads < 0) throw std::invalid_argument("config: run.threads must be >= 0");
    if (initial != "sinsin" && initial != "zero")
        throw std::invalid_argument("config: model.initial must be 'sinsin' or 'zero'");
    model_variant_from_string(model_variant); // throws on unknown tags
}

std::map<std::string, std::string> RunConfig::resolved() const {
    std::map<std::string, std::string> out;
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    std::ostringstream vs;
    vs.precision(17);
    for (const auto& v : vertices) vs << "(" << v.x() << "," << v.y() << ") ";
    out["domain.vertices"] = vs.str();
    std::ostringstream cs;
    cs.precision(17);
    for (const auto& [r0, r1] : cutoffs) cs << r0 << ":" << r1 << " ";
    out["domain.cutoffs"] = cs.str();
    out["mesh.h"] = num(mesh_h);
    out["mesh.beta"] = mesh_beta == 0.0 ? "alpha" : num(mesh_beta);
    out["mesh.modes"] = std::to_string(modes);
    out["model.variant"] = model_variant;
    out["model.q0"] = num(q0);
    out["model.rho"] = num(rho);
    out["model.rank"] = std::to_string(rank);
    out["model.lipschitz_f"] = num(lipschitz_f);
    out["model.lipschitz_g"] = num(lipschitz_g);
    out["model.threshold"] = num(threshold);
    out["model.initial"] = initial;
    out["time.T"] = num(T);
    out["time.steps"] = std::to_string(steps);
    out["frequency.pad_factor"] = std::to_string(pad_factor);
    out["frequency.window_fraction"] = num(window_fraction);
    out["frequency.support_tol"] = num(support_tol);
    out["frequency.support_delta_steps"] = num(support_delta_steps);
    out["sobolev.s"] = num(sobolev_s);
    out["run.seed"] = std::to_string(seed);
    out["run.paths"] = std::to_string(paths);
    out["run.threads"] = std::to_string(threads);
    out["run.output"] = output;
    return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return fnv1a(buf.str());
}

} // namespace cshe

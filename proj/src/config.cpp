#include "msgreen/config.hpp"

#include <fstream>

namespace msgreen {

using nlohmann::json;

Eigen::VectorXd parse_point(const json& j, int dim, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ConfigError(what + ": expected an array of " + std::to_string(dim) + " numbers");
    Eigen::VectorXd p(dim);
    for (int a = 0; a < dim; ++a) p[a] = j[a].get<double>();
    return p;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a matrix");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw ConfigError(what + ": ragged matrix rows");
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

CoefficientField parse_field(const json& j) {
    if (!j.is_object()) throw ConfigError("field: expected an object");
    if (!j.contains("kind")) throw ConfigError("field: missing 'kind'");
    std::string kind = j["kind"].get<std::string>();
    if (!j.contains("mu")) throw ConfigError("field: missing 'mu'");
    double mu = j["mu"].get<double>();

    try {
        if (kind == "constant") {
            return CoefficientField::constant(parse_matrix(j.at("matrix"), "field.matrix"), mu);
        }
        if (kind == "layered") {
            int dim = j.at("dim").get<int>();
            if (j.contains("samples"))
                return CoefficientField::layered_samples(
                    dim, j["samples"].get<std::vector<double>>(), mu);
            return CoefficientField::layered(dim, j.at("offset").get<double>(),
                                             j.at("amplitude").get<double>(),
                                             j.value("frequency", 1), j.value("phase", 0.0), mu);
        }
        if (kind == "trigonometric") {
            int dim = j.at("dim").get<int>();
            Eigen::MatrixXd base = parse_matrix(j.at("base"), "field.base");
            std::vector<TrigTerm> terms;
            for (const auto& tj : j.value("terms", json::array())) {
                TrigTerm t;
                t.amplitude = parse_matrix(tj.at("amplitude"), "field.terms.amplitude");
                t.frequency = tj.at("frequency").get<std::vector<int>>();
                if (tj.contains("sin"))
                    t.use_sin = tj["sin"].get<std::vector<bool>>();
                terms.push_back(std::move(t));
            }
            return CoefficientField::trigonometric(dim, base, std::move(terms), mu);
        }
        if (kind == "tabulated") {
            return CoefficientField::tabulated_from_file(j.at("path").get<std::string>(), mu);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field: ") + e.what());
    }
    throw ConfigError("field: unknown kind '" + kind + "'");
}

CoefficientField RunConfig::field() const {
    if (!raw.contains("field")) throw ConfigError("config: missing 'field' block");
    return parse_field(raw["field"]);
}

TorusGrid RunConfig::grid() const {
    if (!raw.contains("grid") || !raw["grid"].contains("N"))
        throw ConfigError("config: missing 'grid.N'");
    int dim = raw["grid"].value("dim", 0);
    if (dim == 0) {
        if (!raw.contains("field") || !raw["field"].contains("dim")) {
            if (raw.contains("field") && raw["field"].value("kind", "") == "constant")
                dim = static_cast<int>(raw["field"]["matrix"].size());
            else
                throw ConfigError("config: grid.dim not given and not derivable from field");
        } else {
            dim = raw["field"]["dim"].get<int>();
        }
    }
    try {
        return TorusGrid::unit(dim, raw["grid"]["N"].get<int>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::vector<int> RunConfig::n_list() const {
    if (!raw.contains("n")) return {1};
    std::vector<int> n = raw["n"].get<std::vector<int>>();
    if (n.empty()) throw ConfigError("config: 'n' list is empty");
    for (int v : n)
        if (v < 1) throw ConfigError("config: oscillation indices must be >= 1");
    return n;
}

double RunConfig::solver_tol() const {
    return raw.contains("solver") ? raw["solver"].value("tol", 1e-10) : 1e-10;
}

int RunConfig::solver_max_iter() const {
    return raw.contains("solver") ? raw["solver"].value("max_iter", 0) : 0;
}

int RunConfig::jobs() const { return raw.value("jobs", 0); }

bool RunConfig::snap_sources() const { return raw.value("snap_sources", true); }

const json& RunConfig::require_block(const std::string& name) const {
    if (!raw.contains(name)) throw ConfigError("config: missing '" + name + "' block");
    return raw[name];
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    cfg.raw = j;
    // eager schema checks: field parses, grid parses when present
    cfg.field();
    if (j.contains("grid")) cfg.grid();
    cfg.n_list();
    return cfg;
}

void write_manifest(const std::string& path, const std::string& command, const json& config,
                    double wall_time_s, const json& extra) {
    json j;
    j["version"] = kToolkitVersion;
    j["command"] = command;
    j["config"] = config;
    j["wall_time_s"] = wall_time_s;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace msgreen

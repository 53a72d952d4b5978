#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "msgreen/coeff_field.hpp"
#include "msgreen/grid.hpp"

namespace msgreen {

inline constexpr const char* kToolkitVersion = "0.1.0";

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parsed and validated run configuration. The JSON schema is documented in
/// the README; key blocks: field, grid, n, solver, and one block per task.
struct RunConfig {
    nlohmann::json raw;  // resolved config echoed into the manifest

    CoefficientField field() const;
    TorusGrid grid() const;
    std::vector<int> n_list() const;
    double solver_tol() const;
    int solver_max_iter() const;
    int jobs() const;
    bool snap_sources() const;

    const nlohmann::json& require_block(const std::string& name) const;
    static RunConfig load(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j);
};

Eigen::VectorXd parse_point(const nlohmann::json& j, int dim, const std::string& what);
Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& what);
CoefficientField parse_field(const nlohmann::json& j);

/// Writes {version, command, config, wall_time_s, residuals, outputs, notes}.
void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::json& config, double wall_time_s,
                    const nlohmann::json& extra);

}  // namespace msgreen

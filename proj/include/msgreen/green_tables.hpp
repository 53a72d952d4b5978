#pragma once

#include "msgreen/solver.hpp"

namespace msgreen {

/// Sampled Green function column G(., y) with solver metadata. Periodic kind
/// lives on the unit torus; the windowed kind approximates the whole-space
/// kernel by a large-torus solve and carries the window size and the measured
/// truncation bias.
struct GreenTable {
    enum class Kind { periodic, windowed_freespace };

    Kind kind = Kind::periodic;
    int oscillation = 1;
    Eigen::VectorXd source;
    GridFunction values;
    double residual = 0.0;
    int window_periods = 0;
    double bias = 0.0;
    std::string field_tag;

    const TorusGrid& grid() const { return values.grid; }
    double at_point(const Eigen::VectorXd& x) const { return values.interpolate(x); }
    double at_node(const std::vector<int>& c) const { return values.at(c.data()); }
};

/// G(., y) of -div(A(n.) grad .) on the unit torus, zero mean.
/// Off-node sources are snapped to the nearest node when `snap` is set and
/// rejected otherwise.
GreenTable periodic_green(const CoefficientField& field, int oscillation, const TorusGrid& grid,
                          const Eigen::VectorXd& y, double tol = 1e-10, bool snap = false);

struct FreespaceOptions {
    bool richardson_bias = true;          // also solve the doubled window for the bias estimate
    std::int64_t point_cap = std::int64_t{1} << 27;
    double tol = 1e-10;
    bool snap = false;
};

/// Whole-space Green function approximated on a torus of `window_periods`
/// periods per axis at spacing h. The bias stores a Richardson estimate of
/// the O(L^{2-d}) window truncation error, measured against the doubled
/// window on the overlap region.
GreenTable freespace_green(const CoefficientField& field, int window_periods, double spacing,
                           const Eigen::VectorXd& y, const FreespaceOptions& options = {});

/// Two-dimensional periodic Green function obtained by solving the extruded
/// three-dimensional problem (unit coefficient on the added axis) with source
/// (y, 0) and integrating over the added coordinate with the periodic
/// trapezoid rule on the grid slices.
GreenTable green_2d_from_3d(const CoefficientField& field2d, const TorusGrid& grid2d,
                            const Eigen::VectorXd& y, double tol = 1e-10, bool snap = false);

/// JSON sidecar {kind, n, y, residual, L, bias, field} next to a GSGF dump.
void write_green_sidecar(const std::string& path, const GreenTable& table);

}  // namespace msgreen

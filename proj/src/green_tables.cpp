#include "msgreen/green_tables.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace msgreen {

namespace {

std::vector<int> source_node(const TorusGrid& grid, const Eigen::VectorXd& y, bool snap) {
    if (!snap && !grid.on_node(y))
        throw std::invalid_argument("green: source is not on a grid node (snap disabled)");
    return grid.nearest_node(y);
}

}  // namespace

GreenTable periodic_green(const CoefficientField& field, int oscillation, const TorusGrid& grid,
                          const Eigen::VectorXd& y, double tol, bool snap) {
    if (grid.axis_extent != 1.0)
        throw std::invalid_argument("periodic_green: expects the unit torus");
    std::vector<int> node = source_node(grid, y, snap);
    DiscreteOperator op = assemble(field, oscillation, grid);
    SolveOptions opts;
    opts.tol = tol;
    SolveResult res = solve(op, discrete_delta(grid, node), opts);

    GreenTable table;
    table.kind = GreenTable::Kind::periodic;
    table.oscillation = oscillation;
    table.source = grid.node(node.data());
    table.values = std::move(res.u);
    table.residual = res.residual;
    table.field_tag = op.field_tag;
    return table;
}

GreenTable freespace_green(const CoefficientField& field, int window_periods, double spacing,
                           const Eigen::VectorXd& y, const FreespaceOptions& options) {
    const int d = field.dim();
    if (d < 3) throw std::invalid_argument("freespace_green: requires dimension >= 3");
    if (window_periods < 4 || (window_periods & (window_periods - 1)) != 0)
        throw std::invalid_argument("freespace_green: window must be a power of two >= 4");
    TorusGrid grid = TorusGrid::window(d, window_periods, spacing);
    if (grid.size() > options.point_cap)
        throw std::runtime_error("freespace_green: window grid exceeds the point cap");

    std::vector<int> node = source_node(grid, y, options.snap);
    Eigen::VectorXd y_snapped = grid.node(node.data());
    DiscreteOperator op = assemble(field, 1, grid);
    SolveOptions opts;
    opts.tol = options.tol;
    SolveResult res = solve(op, discrete_delta(grid, node), opts);

    GreenTable table;
    table.kind = GreenTable::Kind::windowed_freespace;
    table.oscillation = 1;
    table.source = y_snapped;
    table.values = std::move(res.u);
    table.residual = res.residual;
    table.window_periods = window_periods;
    table.field_tag = op.field_tag;

    if (options.richardson_bias) {
        TorusGrid grid2 = TorusGrid::window(d, 2 * window_periods, spacing);
        if (grid2.size() > options.point_cap)
            throw std::runtime_error("freespace_green: doubled window exceeds the point cap");
        std::vector<int> node2 = grid2.nearest_node(y_snapped);
        DiscreteOperator op2 = assemble(field, 1, grid2);
        SolveResult res2 = solve(op2, discrete_delta(grid2, node2), opts);

        // compare on |x - y|_inf <= L/4; for the O(L^{2-d}) error model the
        // window value differs from the limit by (u_L - u_2L)/(1 - 2^{2-d})
        double factor = 1.0 / (1.0 - std::pow(2.0, 2 - d));
        double h = grid.spacing();
        int reach = static_cast<int>(std::lround(window_periods / (4.0 * h)));
        std::vector<int> offset(d, -reach), c1(d), c2(d);
        double worst = 0.0;
        while (true) {
            for (int a = 0; a < d; ++a) {
                c1[a] = node[a] + offset[a];
                c2[a] = node2[a] + offset[a];
            }
            double diff = table.values.at(c1.data()) - res2.u.at(c2.data());
            worst = std::max(worst, std::abs(diff));
            int a = d - 1;
            while (a >= 0) {
                if (++offset[a] <= reach) break;
                offset[a] = -reach;
                --a;
            }
            if (a < 0) break;
        }
        table.bias = factor * worst;
    }
    return table;
}

GreenTable green_2d_from_3d(const CoefficientField& field2d, const TorusGrid& grid2d,
                            const Eigen::VectorXd& y, double tol, bool snap) {
    if (field2d.dim() != 2 || grid2d.dim != 2)
        throw std::invalid_argument("green_2d_from_3d: expects a 2d field and grid");
    CoefficientField field3 = field2d.extruded();
    TorusGrid grid3 = TorusGrid::unit(3, grid2d.points_per_axis);

    Eigen::VectorXd y3 = Eigen::VectorXd::Zero(3);
    y3.head<2>() = y;
    std::vector<int> node3 = source_node(grid3, y3, snap);

    DiscreteOperator op = assemble(field3, 1, grid3);
    SolveOptions opts;
    opts.tol = tol;
    SolveResult res = solve(op, discrete_delta(grid3, node3), opts);

    // G(x, y) = int_0^1 Gtilde((x,t), (y,0)) dt, periodic trapezoid over slices
    const int n = grid3.points_per_axis;
    GreenTable table;
    table.kind = GreenTable::Kind::periodic;
    table.oscillation = 1;
    table.source = grid3.node(node3.data()).head<2>();
    table.values = GridFunction(grid2d);
    int c3[3];
    for (c3[0] = 0; c3[0] < n; ++c3[0])
        for (c3[1] = 0; c3[1] < n; ++c3[1]) {
            double acc = 0.0;
            for (c3[2] = 0; c3[2] < n; ++c3[2]) acc += res.u.at(c3);
            int c2[2] = {c3[0], c3[1]};
            table.values.at(c2) = acc * grid3.spacing();
        }
    table.residual = res.residual;
    table.field_tag = op.field_tag + " [t-integrated]";
    return table;
}

void write_green_sidecar(const std::string& path, const GreenTable& table) {
    nlohmann::json j;
    j["kind"] = table.kind == GreenTable::Kind::periodic ? "periodic" : "windowed_freespace";
    j["n"] = table.oscillation;
    j["y"] = std::vector<double>(table.source.data(), table.source.data() + table.source.size());
    j["residual"] = table.residual;
    j["L"] = table.window_periods;
    j["bias"] = table.bias;
    j["field"] = table.field_tag;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_green_sidecar: cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace msgreen

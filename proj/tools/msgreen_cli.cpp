// Batch front end: wires a JSON run configuration to the library computations
// and emits CSV/JSON tables plus GSGF grid dumps for plotting.

#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "msgreen/cell_problems.hpp"
#include "msgreen/config.hpp"
#include "msgreen/decomposition.hpp"
#include "msgreen/estimates.hpp"
#include "msgreen/green_tables.hpp"
#include "msgreen/parallel.hpp"
#include "msgreen/shells.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace msgreen;

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir = ".";
    int jobs = 0;
    bool verbose = false;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void log_verbose(const CliArgs& args, const std::string& msg) {
    if (args.verbose) std::cerr << "[msgreen] " << msg << "\n";
}

int cmd_correctors(const CliArgs& args, const RunConfig& cfg) {
    Timer timer;
    CoefficientField field = cfg.field();
    TorusGrid grid = cfg.grid();
    log_verbose(args, "solving cell problems on N=" + std::to_string(grid.points_per_axis));

    CorrectorSet set = correctors(field, grid, cfg.solver_tol());
    HomogenizedTensor tensor = homogenize(set);

    json outputs = json::array();
    for (int i = 0; i < grid.dim; ++i) {
        std::string wp = (fs::path(args.out_dir) / ("corrector_w" + std::to_string(i + 1) + ".gsgf")).string();
        write_gsgf(wp, set.w[i]);
        outputs.push_back(wp);
        std::string wd = (fs::path(args.out_dir) / ("corrector_w" + std::to_string(i + 1) + "_dagger.gsgf")).string();
        write_gsgf(wd, set.w_dagger[i]);
        outputs.push_back(wd);
    }

    json hj;
    auto mat_to_json = [](const Eigen::MatrixXd& m) {
        json rows = json::array();
        for (int i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(row);
        }
        return rows;
    };
    hj["A_star"] = mat_to_json(tensor.a_star);
    hj["A_star_sym"] = mat_to_json(tensor.a_star_sym);
    hj["eigvals"] = std::vector<double>(tensor.eigenvalues.data(),
                                        tensor.eigenvalues.data() + tensor.eigenvalues.size());
    hj["eigvecs"] = mat_to_json(tensor.eigenvectors);
    std::string hpath = (fs::path(args.out_dir) / "homogenized.json").string();
    std::ofstream(hpath) << hj.dump(2) << "\n";
    outputs.push_back(hpath);

    json extra;
    extra["residuals"] = set.residuals;
    extra["outputs"] = outputs;
    write_manifest((fs::path(args.out_dir) / "manifest.json").string(), "correctors", cfg.raw,
                   timer.seconds(), extra);
    return 0;
}

int cmd_green(const CliArgs& args, const RunConfig& cfg) {
    Timer timer;
    CoefficientField field = cfg.field();
    TorusGrid grid = cfg.grid();
    const json& block = cfg.require_block("green");
    if (!block.contains("sources") || block["sources"].empty())
        throw ConfigError("green: missing 'sources'");

    json outputs = json::array();
    json residuals = json::array();
    json mean_checks = json::array();
    std::vector<GreenTable> tables;
    for (int n : cfg.n_list()) {
        int idx = 0;
        for (const auto& sj : block["sources"]) {
            Eigen::VectorXd y = parse_point(sj, grid.dim, "green.sources");
            GreenTable table =
                periodic_green(field, n, grid, y, cfg.solver_tol(), cfg.snap_sources());
            std::string base = "green_n" + std::to_string(n) + "_s" + std::to_string(idx++);
            std::string gp = (fs::path(args.out_dir) / (base + ".gsgf")).string();
            write_gsgf(gp, table.values);
            write_green_sidecar((fs::path(args.out_dir) / (base + ".json")).string(), table);
            outputs.push_back(gp);
            residuals.push_back(table.residual);
            mean_checks.push_back(std::abs(table.values.mean()));
            tables.push_back(std::move(table));
        }
    }

    json extra;
    extra["residuals"] = residuals;
    extra["mean_abs"] = mean_checks;
    extra["outputs"] = outputs;
    // reciprocity spot check when the field is symmetric and two sources given
    if (field.symmetric() && tables.size() >= 2 &&
        tables[0].oscillation == tables[1].oscillation) {
        double lhs = tables[0].at_point(tables[1].source);
        double rhs = tables[1].at_point(tables[0].source);
        extra["reciprocity_gap"] = std::abs(lhs - rhs);
        extra["reciprocity_ok"] =
            std::abs(lhs - rhs) <= 10.0 * cfg.solver_tol() * tables[0].values.max_abs() +
                                       10.0 * cfg.solver_tol();
    }
    write_manifest((fs::path(args.out_dir) / "manifest.json").string(), "green", cfg.raw,
                   timer.seconds(), extra);
    return 0;
}

int cmd_decompose(const CliArgs& args, const RunConfig& cfg) {
    Timer timer;
    CoefficientField field = cfg.field();
    TorusGrid grid = cfg.grid();
    const json& block = cfg.require_block("decompose");
    Eigen::VectorXd x = parse_point(block.at("x"), grid.dim, "decompose.x");
    Eigen::VectorXd y = parse_point(block.at("y"), grid.dim, "decompose.y");
    int m_max = block.value("m_max", 3);

    log_verbose(args, "cell problems for the homogenized tensor");
    CorrectorSet set = correctors(field, grid, cfg.solver_tol());
    HomogenizedTensor tensor = homogenize(set);

    QuadPolicy policy;
    policy.points_per_axis = block.value("quad_order", 12);
    policy.refine_depth = block.value("refine_depth", 12);
    policy.distance_scaled = true;

    std::string source_kind = block.value("source", "analytic");
    std::shared_ptr<const GreenSource> source;
    if (source_kind == "analytic") {
        source = std::make_shared<StarGreenSource>(make_star_green(tensor), policy);
    } else if (source_kind == "windowed") {
        int window = block.value("L", 8);
        double spacing = block.value("spacing", grid.spacing());
        source = std::make_shared<WindowedGreenSource>(field, window, spacing, y,
                                                       cfg.solver_tol());
    } else {
        throw ConfigError("decompose: source must be 'analytic' or 'windowed'");
    }

    HTermContext ctx(source, policy);
    DecompositionReport report = decompose(ctx, x, y, m_max, tensor);

    if (block.value("compare_direct", true)) {
        GreenTable direct =
            periodic_green(field, 1, grid, report.y, cfg.solver_tol(), cfg.snap_sources());
        CompareResult cmp = compare_with_direct(report, direct);
        report.direct_value = direct.at_point(report.x);
        report.abs_error = cmp.abs;
        report.rel_error = cmp.rel;
    }

    std::string rpath = (fs::path(args.out_dir) / "decomposition.json").string();
    write_report_json(rpath, report);

    json extra;
    extra["outputs"] = {rpath};
    extra["residuals"] = set.residuals;
    extra["beta_hat"] = report.beta_hat;
    write_manifest((fs::path(args.out_dir) / "manifest.json").string(), "decompose", cfg.raw,
                   timer.seconds(), extra);
    return 0;
}

int cmd_estimate(const CliArgs& args, const RunConfig& cfg) {
    Timer timer;
    CoefficientField field = cfg.field();
    TorusGrid grid = cfg.grid();
    const json& block = cfg.require_block("estimate");
    std::vector<int> n_list = cfg.n_list();

    std::vector<Quantity> quantities;
    for (const auto& qj : block.value("quantities", json::array({"value"})))
        quantities.push_back(quantity_from_name(qj.get<std::string>()));
    if (quantities.empty()) throw ConfigError("estimate: empty quantities");

    double h = grid.spacing();
    double r_min = 4.0 * h, r_max = 0.25;
    if (block.contains("window")) {
        r_min = block["window"][0].get<double>();
        r_max = block["window"][1].get<double>();
    }
    int radii = block.value("radii", 10);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(grid.dim);
    if (block.contains("source")) y = parse_point(block["source"], grid.dim, "estimate.source");

    bool need_shifts = false;
    for (Quantity q : quantities)
        need_shifts |= (q == Quantity::grad_y || q == Quantity::mixed);

    log_verbose(args, "building Green column families");
    std::vector<GreenColumnFamily> families;
    for (int n : n_list)
        families.push_back(green_family(field, n, grid, y, cfg.solver_tol(), need_shifts));

    std::vector<DecayFit> fits;
    json summary = json::array();
    for (Quantity q : quantities) {
        DecayFit fit = decay_fit(families, q, r_min, r_max, radii);
        UniformityReport uni =
            uniformity_report(field, grid, n_list, q, y, cfg.solver_tol(), r_min, r_max, radii);
        json s;
        s["quantity"] = quantity_name(q);
        s["p_hat"] = fit.p_hat;
        s["p_per_n"] = fit.p_per_n;
        s["C_hat"] = fit.c_hat;
        s["C_per_n"] = uni.c_n;
        s["spread"] = uni.spread;
        s["target_exponent"] = target_exponent(q, grid.dim);
        summary.push_back(s);
        fits.push_back(std::move(fit));
    }

    std::string csv = (fs::path(args.out_dir) / "decay_samples.csv").string();
    write_fit_csv(csv, fits);
    std::string spath = (fs::path(args.out_dir) / "estimates.json").string();
    std::ofstream(spath) << summary.dump(2) << "\n";

    json extra;
    extra["outputs"] = {csv, spath};
    write_manifest((fs::path(args.out_dir) / "manifest.json").string(), "estimate", cfg.raw,
                   timer.seconds(), extra);
    return 0;
}

int cmd_shells(const CliArgs& args, const RunConfig& cfg) {
    Timer timer;
    const json& block = cfg.require_block("shells");
    int m_max = block.value("m_max", 6);

    HomogenizedTensor tensor;
    if (block.contains("tensor") && block["tensor"].is_array()) {
        Eigen::MatrixXd m = parse_matrix(block["tensor"], "shells.tensor");
        try {
            tensor = HomogenizedTensor::from_matrix(m);
        } catch (const std::runtime_error& e) {
            throw ConfigError(std::string("shells: ") + e.what());
        }
    } else {
        CoefficientField field = cfg.field();
        TorusGrid grid = cfg.grid();
        tensor = homogenize(correctors(field, grid, cfg.solver_tol()));
    }

    StarGreen star = make_star_green(tensor);
    std::vector<ShellDecayRow> rows = shell_decay_certificate(star, m_max);
    std::string cpath = (fs::path(args.out_dir) / "shell_certificate.csv").string();
    write_certificate_csv(cpath, rows);

    json extra;
    extra["outputs"] = {cpath};
    json norms = json::array();
    for (const auto& r : rows) norms.push_back({{"m", r.m}, {"norm", r.norm}, {"abs", r.abs_sum}});
    extra["shell_norms"] = norms;
    write_manifest((fs::path(args.out_dir) / "manifest.json").string(), "shells", cfg.raw,
                   timer.seconds(), extra);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"periodic Green function toolkit for multiscale elliptic operators"};
    app.require_subcommand(1);

    CliArgs args;
    app.add_option("--config", args.config_path, "path to the JSON run configuration")
        ->required();
    app.add_option("--out", args.out_dir, "output directory");
    app.add_option("--jobs", args.jobs, "worker thread cap (0 = hardware)");
    app.add_flag("--verbose", args.verbose, "progress logging to stderr");

    auto* c_correctors = app.add_subcommand("correctors", "cell problems and homogenized tensor");
    auto* c_green = app.add_subcommand("green", "periodic Green tables");
    auto* c_decompose = app.add_subcommand("decompose", "shell-grouped decomposition report");
    auto* c_estimate = app.add_subcommand("estimate", "decay exponents and constants");
    auto* c_shells = app.add_subcommand("shells", "shell cancellation certificate");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = RunConfig::load(args.config_path);
        if (args.jobs > 0)
            worker_cap() = args.jobs;
        else if (cfg.jobs() > 0)
            worker_cap() = cfg.jobs();
        fs::create_directories(args.out_dir);

        if (c_correctors->parsed()) return cmd_correctors(args, cfg);
        if (c_green->parsed()) return cmd_green(args, cfg);
        if (c_decompose->parsed()) return cmd_decompose(args, cfg);
        if (c_estimate->parsed()) return cmd_estimate(args, cfg);
        if (c_shells->parsed()) return cmd_shells(args, cfg);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const SolverFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

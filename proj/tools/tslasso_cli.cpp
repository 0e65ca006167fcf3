// Command-line front end: simulate, fit, scaling, conditions, concentration,
// diagnose. Exit codes: 0 ok, 1 bad config or arguments, 2 runtime failure.

#include <tslasso/error.hpp>
#include <tslasso/harness.hpp>
#include <tslasso/lasso.hpp>
#include <tslasso/problem.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace tslasso;

namespace {

struct CommonOpts
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    std::optional<std::string> example;
};

// file < TSLASSO_OUT < --out
ExperimentConfig resolve(const CommonOpts& o)
{
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    if (const char* env = std::getenv("TSLASSO_OUT"); env && *env) cfg.output_dir = env;
    if (o.out) cfg.output_dir = *o.out;
    if (o.seed) cfg.base_seed = *o.seed;
    if (o.workers) cfg.workers = *o.workers;
    if (o.example) cfg.examples = {example_from_string(*o.example)};
    validate_config(cfg);
    return cfg;
}

void add_common(CLI::App* app, CommonOpts& o)
{
    app->add_option("--config", o.config, "JSON config file (a manifest also works)")->check(CLI::ExistingFile);
    app->add_option("--seed", o.seed, "base seed");
    app->add_option("--out", o.out, "output directory");
    app->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--example", o.example, "gaussian_var | subgaussian_var | omitted_var | arch");
}

std::ofstream open_out(const fs::path& path)
{
    fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f.precision(17);
    return f;
}

void write_text(const fs::path& path, const std::string& text)
{
    auto f = open_out(path);
    f << text << '\n';
    if (!f) throw IoError("failed writing " + path.string());
}

void write_matrix(const fs::path& path, const DenseMatrix& m)
{
    auto f = open_out(path);
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            f << (j ? "," : "") << buf;
        }
        f << '\n';
    }
    if (!f) throw IoError("failed writing " + path.string());
}

DenseMatrix read_matrix(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t n = 0;
        std::vector<double> row;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::logic_error&) {
                numeric = false;
                break;
            }
            ++n;
        }
        if (!numeric) {
            if (rows == 0 && data.empty()) continue; // header
            throw IoError(path + ": non-numeric cell '" + cell + "'");
        }
        if (cols == 0) cols = n;
        if (n != cols) throw IoError(path + ": ragged rows");
        data.insert(data.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw IoError(path + ": no data");
    return DenseMatrix(rows, cols, std::move(data));
}

void print_collapse(const std::vector<ExperimentRecord>& records, const std::string& column, nlohmann::json& out)
{
    std::map<Example, std::vector<ExperimentRecord>> by;
    for (const auto& r : records) by[r.example].push_back(r);
    for (const auto& [e, recs] : by) {
        nlohmann::json entry;
        try {
            const CollapseResult c = collapse_diagnostics(recs, column);
            entry = {{"slope", c.slope},
                     {"p", c.p_values},
                     {"slopes", c.slopes},
                     {"collapse_spread", c.collapse_spread},
                     {"common_points", c.common_points}};
        } catch (const ArgumentError& ex) {
            entry = {{"error", ex.what()}};
        }
        out[std::string(to_string(e))] = entry;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sparse lagged-regression laboratory: simulate, fit and diagnose"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version()));

    CommonOpts common;
    std::size_t p = 10, T = 1000, lag = 1;
    std::string input, column = "l2_err";
    double lambda_c = -1.0, lambda = -1.0;

    auto* sim = app.add_subcommand("simulate", "simulate one series to series.csv");
    add_common(sim, common);
    sim->add_option("--p", p, "dimension")->check(CLI::PositiveNumber);
    sim->add_option("--T", T, "length")->check(CLI::PositiveNumber);

    auto* fit = app.add_subcommand("fit", "fit the lasso to a series CSV");
    add_common(fit, common);
    fit->add_option("--input", input, "series CSV (rows = time)")->required()->check(CLI::ExistingFile);
    fit->add_option("--lag", lag, "number of lags d")->check(CLI::PositiveNumber);
    fit->add_option("--lambda", lambda, "penalty (overrides the config rule)");
    fit->add_option("--lambda-c", lambda_c, "c in lambda = c sqrt(log(pq)/T)");

    auto* scaling = app.add_subcommand("scaling", "error-scaling study");
    add_common(scaling, common);
    auto* conditions = app.add_subcommand("conditions", "RE and deviation-bound study");
    add_common(conditions, common);
    auto* concentration = app.add_subcommand("concentration", "blocked concentration tail study");
    add_common(concentration, common);

    auto* diagnose = app.add_subcommand("diagnose", "slope and collapse of an existing records.csv");
    diagnose->add_option("--input", input, "records.csv")->required()->check(CLI::ExistingFile);
    diagnose->add_option("--column", column, "l2_err or l2_rel_err")->check(CLI::IsMember({"l2_err", "l2_rel_err"}));
    diagnose->add_option("--out", common.out, "directory for diagnostics.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*diagnose) {
            std::ifstream in(input);
            const auto records = read_records_csv(in);
            nlohmann::json out;
            print_collapse(records, column, out);
            std::cout << out.dump(2) << '\n';
            if (common.out) write_text(fs::path(*common.out) / "diagnostics.json", out.dump(2));
            return 0;
        }

        const ExperimentConfig cfg = resolve(common);
        const fs::path dir(cfg.output_dir);

        if (*sim) {
            const Example e = cfg.examples.front();
            const ModelSpec spec = build_example(e, p, cfg);
            SimulationOptions opts;
            opts.burn_in = cfg.burn_in;
            const std::uint64_t seed = record_seed(cfg.base_seed, e, p, T, 0);
            const Series z = simulate(spec, T, seed, opts);
            write_matrix(dir / "series.csv", z.values);
            write_matrix(dir / "theta_star.csv", population_target(spec, 1));
            const nlohmann::json manifest{{"library_version", std::string(library_version())},
                                          {"command", "simulate"},
                                          {"example", std::string(to_string(e))},
                                          {"p", p},
                                          {"T", T},
                                          {"seed", seed},
                                          {"config", nlohmann::json::parse(config_to_json(cfg))}};
            write_text(dir / "manifest.json", manifest.dump(2));
            std::cout << "wrote " << (dir / "series.csv").string() << '\n';
        } else if (*fit) {
            const DenseMatrix values = read_matrix(input);
            const RegressionProblem prob = build_problem(Series{values}, lag);
            LassoConfig lc;
            lc.tol = cfg.lasso_tol;
            lc.max_sweeps = cfg.max_sweeps;
            lc.lambda = lambda >= 0.0 ? lambda
                                      : lambda_value(lambda_c >= 0.0 ? lambda_c : cfg.lambda.c, prob.design_dim(),
                                                     prob.outputs(), prob.samples());
            const LassoSolution sol = solve(prob, lc);
            write_matrix(dir / "theta_hat.csv", sol.theta_hat);
            const nlohmann::json summary{{"lambda", lc.lambda},
                                         {"objective", sol.objective},
                                         {"sweeps", sol.sweeps},
                                         {"kkt_residual", sol.kkt_residual},
                                         {"active_set_size", sol.active_set_size},
                                         {"converged", sol.converged}};
            write_text(dir / "fit.json", summary.dump(2));
            std::cout << summary.dump(2) << '\n';
        } else if (*scaling) {
            auto csv = open_out(dir / "records.csv");
            RunSink sink{&csv};
            const auto records = run_scaling_experiment(cfg, sink);
            write_text(dir / "manifest.json", scaling_manifest(cfg, records, "scaling"));
            nlohmann::json out;
            if (cfg.p_grid.size() >= 2 && cfg.T_grid.size() >= 3) print_collapse(records, "l2_err", out);
            std::size_t failed = 0;
            for (const auto& r : records) failed += r.status != "ok";
            out["records"] = records.size();
            out["failed"] = failed;
            std::cout << out.dump(2) << '\n';
        } else if (*conditions) {
            auto csv = open_out(dir / "records.csv");
            const auto rows = run_condition_study(cfg, &csv);
            write_text(dir / "manifest.json",
                       nlohmann::json{{"library_version", std::string(library_version())},
                                      {"command", "conditions"},
                                      {"rows", rows.size()},
                                      {"config", nlohmann::json::parse(config_to_json(cfg))}}
                           .dump(2));
            std::cout << "wrote " << rows.size() << " rows to " << (dir / "records.csv").string() << '\n';
        } else if (*concentration) {
            auto csv = open_out(dir / "records.csv");
            const auto rows = run_concentration_study(cfg, &csv);
            write_text(dir / "manifest.json",
                       nlohmann::json{{"library_version", std::string(library_version())},
                                      {"command", "concentration"},
                                      {"rows", rows.size()},
                                      {"config", nlohmann::json::parse(config_to_json(cfg))}}
                           .dump(2));
            std::size_t invalid = 0;
            for (const auto& r : rows) invalid += !r.bound_valid;
            std::cout << "wrote " << rows.size() << " rows; bound violations: " << invalid << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

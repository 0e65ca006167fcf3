#include <tslasso/harness.hpp>

#include <tslasso/error.hpp>
#include <tslasso/lasso.hpp>
#include <tslasso/numerics.hpp>
#include <tslasso/problem.hpp>
#include <tslasso/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#ifndef TSLASSO_VERSION
#define TSLASSO_VERSION "0.0.0"
#endif

namespace tslasso {

using nlohmann::json;

std::string_view library_version()
{
    return TSLASSO_VERSION;
}

std::string_view to_string(Example e)
{
    switch (e) {
    case Example::gaussian_var: return "gaussian_var";
    case Example::subgaussian_var: return "subgaussian_var";
    case Example::omitted_var: return "omitted_var";
    case Example::arch: return "arch";
    }
    return "unknown";
}

Example example_from_string(std::string_view tag)
{
    for (Example e : {Example::gaussian_var, Example::subgaussian_var, Example::omitted_var, Example::arch})
        if (to_string(e) == tag) return e;
    throw ConfigError("unknown example '" + std::string(tag) +
                      "' (expected gaussian_var, subgaussian_var, omitted_var or arch)");
}

// ---------------------------------------------------------------------------
// Config

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read_into(const json& obj, const char* key, T& out)
{
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

json to_json(const ExperimentConfig& c)
{
    json ex = json::array();
    for (Example e : c.examples) ex.push_back(std::string(to_string(e)));
    return json{
        {"examples", ex},
        {"p_grid", c.p_grid},
        {"T_grid", c.T_grid},
        {"replicates", c.replicates},
        {"sparsity_rule", c.sparsity_rule},
        {"op_norm_target", c.op_norm_target},
        {"lambda", {{"c", c.lambda.c}, {"grid", c.lambda.grid}}},
        {"base_seed", c.base_seed},
        {"burn_in", c.burn_in},
        {"output_dir", c.output_dir},
        {"workers", c.workers},
        {"innovation", c.innovation},
        {"arch",
         {{"scale", c.arch.scale}, {"exponent", c.arch.exponent}, {"clip_lo", c.arch.clip_lo}, {"clip_hi", c.arch.clip_hi}}},
        {"lasso", {{"tol", c.lasso_tol}, {"max_sweeps", c.max_sweeps}}},
        {"C_B", c.C_B},
        {"xi", c.xi},
        {"concentration",
         {{"T", c.concentration.T},
          {"a_T", c.concentration.a_T},
          {"t", c.concentration.t},
          {"reps", c.concentration.reps},
          {"ar_coeff", c.concentration.ar_coeff},
          {"C_B", c.concentration.C_B}}},
    };
}

template <class T>
void sort_unique(std::vector<T>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

ExperimentConfig parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (doc.is_object() && doc.contains("config") && doc.contains("records")) doc = doc.at("config");
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    reject_unknown(doc,
                   {"examples", "p_grid", "T_grid", "replicates", "sparsity_rule", "op_norm_target", "lambda",
                    "base_seed", "burn_in", "output_dir", "workers", "innovation", "arch", "lasso", "C_B", "xi",
                    "concentration"},
                   "config");
    ExperimentConfig c;
    if (doc.contains("examples")) {
        std::vector<std::string> tags;
        read_into(doc, "examples", tags);
        c.examples.clear();
        for (const auto& t : tags) c.examples.push_back(example_from_string(t));
    }
    read_into(doc, "p_grid", c.p_grid);
    read_into(doc, "T_grid", c.T_grid);
    read_into(doc, "replicates", c.replicates);
    read_into(doc, "sparsity_rule", c.sparsity_rule);
    read_into(doc, "op_norm_target", c.op_norm_target);
    read_into(doc, "base_seed", c.base_seed);
    read_into(doc, "burn_in", c.burn_in);
    read_into(doc, "output_dir", c.output_dir);
    read_into(doc, "workers", c.workers);
    read_into(doc, "innovation", c.innovation);
    read_into(doc, "C_B", c.C_B);
    read_into(doc, "xi", c.xi);
    if (doc.contains("lambda")) {
        const json& l = doc.at("lambda");
        if (l.is_number()) {
            c.lambda.c = l.get<double>();
        } else {
            reject_unknown(l, {"c", "grid"}, "lambda");
            read_into(l, "c", c.lambda.c);
            read_into(l, "grid", c.lambda.grid);
        }
    }
    if (doc.contains("arch")) {
        const json& a = doc.at("arch");
        reject_unknown(a, {"scale", "exponent", "clip_lo", "clip_hi"}, "arch");
        read_into(a, "scale", c.arch.scale);
        read_into(a, "exponent", c.arch.exponent);
        read_into(a, "clip_lo", c.arch.clip_lo);
        read_into(a, "clip_hi", c.arch.clip_hi);
    }
    if (doc.contains("lasso")) {
        const json& l = doc.at("lasso");
        reject_unknown(l, {"tol", "max_sweeps"}, "lasso");
        read_into(l, "tol", c.lasso_tol);
        read_into(l, "max_sweeps", c.max_sweeps);
    }
    if (doc.contains("concentration")) {
        const json& k = doc.at("concentration");
        reject_unknown(k, {"T", "a_T", "t", "reps", "ar_coeff", "C_B"}, "concentration");
        read_into(k, "T", c.concentration.T);
        read_into(k, "a_T", c.concentration.a_T);
        read_into(k, "t", c.concentration.t);
        read_into(k, "reps", c.concentration.reps);
        read_into(k, "ar_coeff", c.concentration.ar_coeff);
        read_into(k, "C_B", c.concentration.C_B);
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg, int indent)
{
    return to_json(cfg).dump(indent);
}

void validate_config(ExperimentConfig& c)
{
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (c.examples.empty()) fail("examples must be non-empty");
    if (c.p_grid.empty() || c.T_grid.empty()) fail("p_grid and T_grid must be non-empty");
    sort_unique(c.p_grid);
    sort_unique(c.T_grid);
    if (c.p_grid.front() < 2) fail("p_grid entries must be >= 2");
    if (c.T_grid.front() < 2) fail("T_grid entries must be >= 2");
    if (c.replicates < 1) fail("replicates must be >= 1");
    if (c.sparsity_rule != "ceil_sqrt_p" && c.sparsity_rule != "round_sqrt_p")
        fail("sparsity_rule must be ceil_sqrt_p or round_sqrt_p");
    if (!(c.op_norm_target > 0.0 && c.op_norm_target < 1.0)) fail("op_norm_target must lie in (0,1)");
    if (!(c.lambda.c >= 0.0)) fail("lambda.c must be >= 0");
    for (double g : c.lambda.grid)
        if (!(g >= 0.0)) fail("lambda.grid entries must be >= 0");
    if (c.workers < 1) fail("workers must be >= 1");
    if (c.innovation != "uniform" && c.innovation != "gaussian") fail("innovation must be uniform or gaussian");
    if (!(c.arch.scale > 0.0) || !(c.arch.exponent > 0.0 && c.arch.exponent < 1.0) || !(c.arch.clip_lo > 0.0) ||
        !(c.arch.clip_hi > c.arch.clip_lo))
        fail("arch parameters need scale > 0, exponent in (0,1), 0 < clip_lo < clip_hi");
    if (!(c.lasso_tol > 0.0) || c.max_sweeps < 1) fail("lasso.tol must be > 0 and max_sweeps >= 1");
    if (!(c.C_B > 0.0)) fail("C_B must be > 0");
    if (!(c.xi > 0.0 && c.xi < 1.0)) fail("xi must lie in (0,1)");
    auto& k = c.concentration;
    if (k.T.empty() || k.a_T.empty() || k.t.empty()) fail("concentration grids must be non-empty");
    if (k.reps < 100) fail("concentration.reps must be >= 100");
    if (!(std::abs(k.ar_coeff) < 1.0)) fail("concentration.ar_coeff must satisfy |a| < 1");
    if (!(k.C_B > 0.0)) fail("concentration.C_B must be > 0");
    for (double t : k.t)
        if (!(t > 0.0)) fail("concentration.t entries must be > 0");
    for (std::size_t T : k.T)
        if (T < 2) fail("concentration.T entries must be >= 2");
}

// ---------------------------------------------------------------------------
// Models and seeds

std::size_t sparsity_for(const ExperimentConfig& cfg, std::size_t p)
{
    const double r = std::sqrt(static_cast<double>(p));
    const auto s = static_cast<std::size_t>(cfg.sparsity_rule == "round_sqrt_p" ? std::round(r) : std::ceil(r - 1e-12));
    return std::clamp<std::size_t>(s, 1, p);
}

DistributionSpec innovation_for(const ExperimentConfig& cfg)
{
    return cfg.innovation == "gaussian" ? DistributionSpec::gaussian(1.0) : DistributionSpec::unit_uniform();
}

ModelSpec build_example(Example e, std::size_t p, const ExperimentConfig& cfg)
{
    const std::size_t s = sparsity_for(cfg, p);
    switch (e) {
    case Example::gaussian_var:
        return GaussianVar{{banded_sparse_coefficients(p, s, cfg.op_norm_target)}, SymmetricMatrix::identity(p)};
    case Example::subgaussian_var:
        return SubgaussianVar{banded_sparse_coefficients(p, s, cfg.op_norm_target), innovation_for(cfg)};
    case Example::omitted_var:
        return OmittedVarVar{omitted_variable_coefficients(p, s, cfg.op_norm_target), p, innovation_for(cfg)};
    case Example::arch:
        return ClippedArch{banded_sparse_coefficients(p, s, cfg.op_norm_target),
                           cfg.arch.scale,
                           cfg.arch.exponent,
                           cfg.arch.clip_lo,
                           cfg.arch.clip_hi,
                           innovation_for(cfg)};
    }
    throw ArgumentError("build_example: unknown example");
}

std::uint64_t record_seed(std::uint64_t base_seed, Example e, std::size_t p, std::size_t T, std::size_t replicate)
{
    return derive_key({base_seed, tag_hash(to_string(e)), p, T, replicate});
}

double lambda_value(double c, std::size_t p, std::size_t q, std::size_t T)
{
    return c * std::sqrt(std::log(static_cast<double>(p) * static_cast<double>(q)) / static_cast<double>(T));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v)
{
    return v ? num(*v) : std::string();
}

std::string clean(std::string s)
{
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

std::string status_of(const std::exception& e)
{
    const char* kind = "error";
    if (dynamic_cast<const StabilityError*>(&e)) kind = "stability_error";
    else if (dynamic_cast<const NumericError*>(&e)) kind = "numeric_error";
    else if (dynamic_cast<const DegenerateColumnError*>(&e)) kind = "degenerate_column";
    else if (dynamic_cast<const DimensionError*>(&e)) kind = "dimension_error";
    else if (dynamic_cast<const ArgumentError*>(&e)) kind = "argument_error";
    return clean(std::string(kind) + ": " + e.what());
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw IoError("records.csv: bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw IoError("records.csv: bad number '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s)
{
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw IoError("records.csv: bad integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw IoError("records.csv: bad integer '" + s + "'");
    }
}

} // namespace

std::string_view records_header()
{
    return "example,p,T,replicate,seed,s,lambda,l2_err,l2_rel_err,pred_err,kkt_residual,converged,sweeps,"
           "active_set_size,lambda_best,l2_err_best,re_min_sparse_eig,db_stat,status,wall_time";
}

std::string format_record(const ExperimentRecord& r)
{
    std::ostringstream os;
    os << to_string(r.example) << ',' << r.p << ',' << r.T << ',' << r.replicate << ',' << r.seed << ',' << r.s << ','
       << num(r.lambda) << ',' << num(r.l2_err) << ',' << num(r.l2_rel_err) << ',' << num(r.pred_err) << ','
       << num(r.kkt_residual) << ',' << (r.converged ? 1 : 0) << ',' << r.sweeps << ',' << r.active_set_size << ','
       << num(r.lambda_best) << ',' << num(r.l2_err_best) << ',' << opt_num(r.re_min_sparse_eig) << ','
       << opt_num(r.db_stat) << ',' << clean(r.status) << ',' << num(r.wall_time);
    return os.str();
}

void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& records)
{
    os << records_header() << '\n';
    for (const auto& r : records) os << format_record(r) << '\n';
}

std::vector<ExperimentRecord> read_records_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw IoError("records.csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != records_header()) throw IoError("records.csv: unexpected header");
    const std::size_t ncol = split_csv(std::string(records_header())).size();
    std::vector<ExperimentRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != ncol) throw IoError("records.csv: row has " + std::to_string(f.size()) + " fields");
        ExperimentRecord r;
        r.example = example_from_string(f[0]);
        r.p = parse_u64(f[1]);
        r.T = parse_u64(f[2]);
        r.replicate = parse_u64(f[3]);
        r.seed = parse_u64(f[4]);
        r.s = parse_u64(f[5]);
        r.lambda = parse_double(f[6]);
        r.l2_err = parse_double(f[7]);
        r.l2_rel_err = parse_double(f[8]);
        r.pred_err = parse_double(f[9]);
        r.kkt_residual = parse_double(f[10]);
        r.converged = f[11] == "1";
        r.sweeps = parse_u64(f[12]);
        r.active_set_size = parse_u64(f[13]);
        r.lambda_best = parse_double(f[14]);
        r.l2_err_best = parse_double(f[15]);
        if (!f[16].empty()) r.re_min_sparse_eig = parse_double(f[16]);
        if (!f[17].empty()) r.db_stat = parse_double(f[17]);
        r.status = f[18];
        r.wall_time = parse_double(f[19]);
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling study

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CellContext
{
    ModelSpec spec;
    DenseMatrix theta_star;
    double theta_norm = 0.0;
    std::size_t s = 0;
};

CellContext make_context(const ExperimentConfig& cfg, Example e, std::size_t p)
{
    CellContext ctx{build_example(e, p, cfg), {}, 0.0, sparsity_for(cfg, p)};
    ctx.theta_star = population_target(ctx.spec, 1);
    ctx.theta_norm = ctx.theta_star.frobenius_norm();
    return ctx;
}

ExperimentRecord blank_record(const ExperimentConfig& cfg, Example e, std::size_t p, std::size_t T, std::size_t rep)
{
    ExperimentRecord r;
    r.example = e;
    r.p = p;
    r.T = T;
    r.replicate = rep;
    r.seed = record_seed(cfg.base_seed, e, p, T, rep);
    r.s = sparsity_for(cfg, p);
    r.lambda = lambda_value(cfg.lambda.c, p, p, T);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.l2_err = r.l2_rel_err = r.pred_err = r.kkt_residual = r.lambda_best = r.l2_err_best = nan;
    return r;
}

ExperimentRecord compute_cell(const ExperimentConfig& cfg, const CellContext& ctx, Example e, std::size_t p,
                              std::size_t T, std::size_t rep)
{
    const auto t0 = Clock::now();
    ExperimentRecord r = blank_record(cfg, e, p, T, rep);
    try {
        SimulationOptions opts;
        opts.burn_in = cfg.burn_in;
        // T + 1 observations give T regression rows.
        const Series z = simulate(ctx.spec, T + 1, r.seed, opts);
        RegressionProblem prob = build_problem(z, 1);
        residuals(prob, ctx.theta_star);

        LassoConfig lc;
        lc.lambda = r.lambda;
        lc.tol = cfg.lasso_tol;
        lc.max_sweeps = cfg.max_sweeps;
        const LassoSolution sol = solve(prob, lc);
        const ErrorMetrics m = error_metrics(sol.theta_hat, ctx.theta_star, prob.gram);
        r.l2_err = m.l2_err;
        r.l2_rel_err = ctx.theta_norm > 0.0 ? m.l2_err / ctx.theta_norm : std::numeric_limits<double>::quiet_NaN();
        r.pred_err = m.pred_err;
        r.kkt_residual = sol.kkt_residual;
        r.converged = sol.converged;
        r.sweeps = sol.sweeps;
        r.active_set_size = sol.active_set_size;

        if (!cfg.lambda.grid.empty()) {
            // Largest penalty first so each fit warm-starts the next.
            std::vector<double> grid = cfg.lambda.grid;
            std::sort(grid.rbegin(), grid.rend());
            LassoConfig gc = lc;
            double best = std::numeric_limits<double>::infinity();
            for (double c : grid) {
                gc.lambda = lambda_value(c, p, p, T);
                const LassoSolution gs = solve(prob, gc);
                const double err = (gs.theta_hat - ctx.theta_star).frobenius_norm();
                if (err < best) {
                    best = err;
                    r.lambda_best = gc.lambda;
                }
                gc.warm_start = gs.theta_hat;
            }
            r.l2_err_best = best;
        }
        r.db_stat = db_statistic(prob.X, *prob.W);
    } catch (const std::exception& ex) {
        r.status = status_of(ex);
    }
    r.wall_time = seconds_since(t0);
    return r;
}

template <class Row, class Fn>
std::vector<Row> fan_out(std::size_t count, std::size_t workers, Fn&& fn)
{
    std::vector<Row> rows(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    return rows;
}

} // namespace

ExperimentRecord run_scaling_record(const ExperimentConfig& cfg, Example e, std::size_t p, std::size_t T,
                                    std::size_t replicate)
{
    try {
        const CellContext ctx = make_context(cfg, e, p);
        return compute_cell(cfg, ctx, e, p, T, replicate);
    } catch (const std::exception& ex) {
        ExperimentRecord r = blank_record(cfg, e, p, T, replicate);
        r.status = status_of(ex);
        return r;
    }
}

std::vector<ExperimentRecord> run_scaling_experiment(const ExperimentConfig& cfg_in, const RunSink& sink)
{
    ExperimentConfig cfg = cfg_in;
    validate_config(cfg);
    if (sink.csv) *sink.csv << records_header() << '\n';

    std::vector<ExperimentRecord> all;
    const std::size_t reps = cfg.replicates;
    const std::size_t cells = cfg.T_grid.size() * reps;
    for (Example e : cfg.examples)
        for (std::size_t p : cfg.p_grid) {
            std::optional<CellContext> ctx;
            std::string setup_error;
            try {
                ctx = make_context(cfg, e, p);
            } catch (const std::exception& ex) {
                setup_error = status_of(ex);
            }
            auto block = fan_out<ExperimentRecord>(cells, cfg.workers, [&](std::size_t i) {
                const std::size_t T = cfg.T_grid[i / reps];
                const std::size_t rep = i % reps;
                if (!ctx) {
                    ExperimentRecord r = blank_record(cfg, e, p, T, rep);
                    r.status = setup_error;
                    return r;
                }
                return compute_cell(cfg, *ctx, e, p, T, rep);
            });
            if (sink.csv) {
                for (const auto& r : block) *sink.csv << format_record(r) << '\n';
                sink.csv->flush();
                if (!*sink.csv) throw IoError("failed writing records.csv");
            }
            all.insert(all.end(), block.begin(), block.end());
        }
    return all;
}

// ---------------------------------------------------------------------------
// Condition study

std::string_view condition_header()
{
    return "example,p,T,replicate,seed,s,re_mode,re_min_sparse_eig,re_alpha,re_holds,re_tau2,re_required_T,"
           "db_stat,db_Q,db_R,db_holds,c_beta,status,wall_time";
}

std::string format_condition(const ConditionRecord& r)
{
    std::ostringstream os;
    os << to_string(r.example) << ',' << r.p << ',' << r.T << ',' << r.replicate << ',' << r.seed << ',' << r.s << ','
       << to_string(r.re_mode) << ',' << num(r.re_min_sparse_eig) << ',' << num(r.re_alpha) << ','
       << (r.re_holds ? 1 : 0) << ',' << num(r.re_tau2) << ',' << num(r.re_required_T) << ',' << num(r.db_stat) << ','
       << num(r.db_Q) << ',' << num(r.db_R) << ',' << (r.db_holds ? 1 : 0) << ',' << num(r.c_beta) << ','
       << clean(r.status) << ',' << num(r.wall_time);
    return os.str();
}

namespace {

// Lower bound on lambda_min(Σ_X): exact for the linear models; for the
// clipped ARCH the noise alone contributes at least (c a)² var(e) I.
double lambda_min_sigma_x(const ModelSpec& spec)
{
    if (const auto* a = std::get_if<ClippedArch>(&spec)) {
        const double floor = a->scale * a->clip_lo;
        return floor * floor * a->innovation.var();
    }
    return min_eigen_sym(observed_covariance(spec));
}

} // namespace

std::vector<ConditionRecord> run_condition_study(const ExperimentConfig& cfg_in, std::ostream* csv)
{
    ExperimentConfig cfg = cfg_in;
    validate_config(cfg);
    if (csv) *csv << condition_header() << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<ConditionRecord> all;
    const std::size_t reps = cfg.replicates;
    for (Example e : cfg.examples)
        for (std::size_t p : cfg.p_grid) {
            struct Setup
            {
                CellContext ctx;
                double lambda_min, c_beta;
                SubgaussianConstants k;
            };
            std::optional<Setup> setup;
            std::string setup_error;
            try {
                CellContext ctx = make_context(cfg, e, p);
                const double lmin = lambda_min_sigma_x(ctx.spec);
                const double cb = default_c_beta(ctx.spec);
                const SubgaussianConstants k = subgaussian_constants(ctx.spec, ctx.theta_star);
                setup = Setup{std::move(ctx), lmin, cb, k};
            } catch (const std::exception& ex) {
                setup_error = status_of(ex);
            }

            auto block = fan_out<ConditionRecord>(cfg.T_grid.size() * reps, cfg.workers, [&](std::size_t i) {
                const auto t0 = Clock::now();
                ConditionRecord r;
                r.example = e;
                r.p = p;
                r.T = cfg.T_grid[i / reps];
                r.replicate = i % reps;
                r.seed = record_seed(cfg.base_seed, e, p, r.T, r.replicate);
                r.s = sparsity_for(cfg, p);
                r.re_min_sparse_eig = r.re_alpha = r.re_tau2 = r.re_required_T = nan;
                r.db_stat = r.db_Q = r.db_R = r.c_beta = nan;
                if (!setup) {
                    r.status = setup_error;
                    return r;
                }
                try {
                    SimulationOptions opts;
                    opts.burn_in = cfg.burn_in;
                    const Series z = simulate(setup->ctx.spec, r.T + 1, r.seed, opts);
                    RegressionProblem prob = build_problem(z, 1);
                    residuals(prob, setup->ctx.theta_star);

                    r.c_beta = setup->c_beta;
                    r.re_alpha = 0.5 * setup->lambda_min;
                    const std::size_t k = std::min(r.s, p / 2);
                    const REReport re = lower_re_certificate(prob.gram, k, REMode::automatic, r.re_alpha, 0.0, r.seed);
                    r.re_mode = re.mode;
                    r.re_min_sparse_eig = re.min_sparse_eig;
                    r.re_holds = re.holds;
                    try {
                        const RETolerance tol = re_tolerance({setup->k.K_X, setup->lambda_min, setup->c_beta, cfg.C_B,
                                                              static_cast<double>(r.T), static_cast<double>(p)});
                        r.re_tau2 = tol.tau2;
                        r.re_required_T = tol.required_T;
                    } catch (const ThresholdError& te) {
                        r.re_required_T = te.required_T();
                    }

                    const DBBound b = db_bound(setup->k.K_composite, cfg.C_B, cfg.xi, static_cast<double>(p),
                                               static_cast<double>(p), static_cast<double>(r.T), setup->c_beta);
                    const DBReport db = db_report(db_statistic(prob.X, *prob.W), b);
                    r.db_stat = db.stat;
                    r.db_Q = db.Q;
                    r.db_R = db.R;
                    r.db_holds = db.holds;
                } catch (const std::exception& ex) {
                    r.status = status_of(ex);
                }
                r.wall_time = seconds_since(t0);
                return r;
            });
            if (csv) {
                for (const auto& r : block) *csv << format_condition(r) << '\n';
                csv->flush();
                if (!*csv) throw IoError("failed writing records.csv");
            }
            all.insert(all.end(), block.begin(), block.end());
        }
    return all;
}

// ---------------------------------------------------------------------------
// Concentration study

std::string_view concentration_header()
{
    return "T,a_T,mu_T,t,reps,exceed,empirical_tail,binomial_sigma,bound,K,C_B,c_beta,bound_valid,seed";
}

std::string format_concentration(const ConcentrationRow& row)
{
    const auto& r = row.report;
    std::ostringstream os;
    os << r.T << ',' << r.a_T << ',' << r.mu_T << ',' << num(r.t) << ',' << r.reps << ',' << r.exceed << ','
       << num(r.empirical_tail) << ',' << num(r.binomial_sigma) << ',' << num(r.bound) << ',' << num(r.K) << ','
       << num(r.C_B) << ',' << num(r.c_beta) << ',' << (row.bound_valid ? 1 : 0) << ',' << row.seed;
    return os.str();
}

std::vector<ConcentrationRow> run_concentration_study(const ExperimentConfig& cfg_in, std::ostream* csv)
{
    ExperimentConfig cfg = cfg_in;
    validate_config(cfg);
    const auto& k = cfg.concentration;
    if (csv) *csv << concentration_header() << '\n';

    const double a = k.ar_coeff;
    const ModelSpec spec = GaussianVar{{DenseMatrix{{a}}}, SymmetricMatrix::identity(1)};
    const double variance = 1.0 / (1.0 - a * a);
    const double root_K = scalar_subgaussian_norm(DistributionSpec::gaussian(variance));
    const double K = root_K * root_K;
    const double c_beta = default_c_beta(spec);

    std::vector<ConcentrationRow> rows;
    for (std::size_t T : k.T) {
        const std::uint64_t seed = derive_key({cfg.base_seed, tag_hash("concentration"), T});
        ConcentrationSetup setup{{1.0}, T, k.reps, seed, cfg.burn_in};
        const std::vector<double> dev = concentration_deviations(spec, setup);
        for (std::size_t a_T : k.a_T) {
            const std::size_t block = a_T == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(T)))) : a_T;
            if (2 * block > T) throw ConfigError("concentration: a_T = " + std::to_string(block) + " too large for T = " +
                                                 std::to_string(T));
            for (double t : k.t) {
                ConcentrationRow row;
                row.report = summarize_tail(dev, t, T, block, K, k.C_B, c_beta);
                row.seed = seed;
                row.bound_valid = row.report.bound >= 1.0 ||
                                  row.report.empirical_tail <= row.report.bound + 3.0 * row.report.binomial_sigma;
                if (csv) *csv << format_concentration(row) << '\n';
                rows.push_back(row);
            }
        }
    }
    if (csv) {
        csv->flush();
        if (!*csv) throw IoError("failed writing records.csv");
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Collapse diagnostics

namespace {

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

struct Curve
{
    std::vector<double> log_n;   // ascending
    std::vector<double> log_err; // log median error
    std::vector<double> log_T;
};

double interpolate(const Curve& c, double x)
{
    const auto& xs = c.log_n;
    if (x <= xs.front()) return c.log_err.front();
    if (x >= xs.back()) return c.log_err.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return c.log_err[lo] + w * (c.log_err[hi] - c.log_err[lo]);
}

} // namespace

CollapseResult collapse_diagnostics(const std::vector<ExperimentRecord>& records, std::string_view column)
{
    if (column != "l2_err" && column != "l2_rel_err") throw ArgumentError("collapse_diagnostics: unknown column");
    // p -> T -> errors; p -> s
    std::map<std::size_t, std::map<std::size_t, std::vector<double>>> errs;
    std::map<std::size_t, std::size_t> sparsity;
    std::set<std::size_t> Ts;
    for (const auto& r : records) {
        const double v = column == "l2_err" ? r.l2_err : r.l2_rel_err;
        if (r.status != "ok" || !std::isfinite(v) || !(v > 0.0)) continue;
        errs[r.p][r.T].push_back(v);
        sparsity[r.p] = r.s;
        Ts.insert(r.T);
    }
    if (errs.size() < 2 || Ts.size() < 3)
        throw ArgumentError("collapse_diagnostics: need >= 2 distinct p and >= 3 distinct T");

    CollapseResult out;
    std::vector<Curve> curves;
    for (const auto& [p, byT] : errs) {
        if (byT.size() < 3) throw ArgumentError("collapse_diagnostics: every p needs >= 3 distinct T");
        const double scale = static_cast<double>(sparsity[p]) * std::log(static_cast<double>(p));
        Curve c;
        for (const auto& [T, v] : byT) {
            c.log_T.push_back(std::log(static_cast<double>(T)));
            c.log_n.push_back(std::log(static_cast<double>(T) / scale));
            c.log_err.push_back(std::log(median(v)));
        }
        const double slope = ls_slope(c.log_T, c.log_err);
        out.p_values.push_back(p);
        out.slopes.push_back(slope);
        curves.push_back(std::move(c));
    }
    double total = 0.0;
    for (double s : out.slopes) total += s;
    out.slope = total / static_cast<double>(out.slopes.size());

    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
        lo = std::max(lo, c.log_n.front());
        hi = std::min(hi, c.log_n.back());
    }
    if (lo > hi) throw ArgumentError("collapse_diagnostics: rescaled sample ranges do not overlap");
    constexpr double eps = 1e-12;
    std::vector<double> points;
    for (const auto& c : curves)
        for (double x : c.log_n)
            if (x >= lo - eps && x <= hi + eps) points.push_back(std::clamp(x, lo, hi));
    std::sort(points.begin(), points.end());

    double spread = 0.0;
    for (double x : points) {
        std::vector<double> at;
        for (const auto& c : curves) at.push_back(std::exp(interpolate(c, x)));
        const auto [mn, mx] = std::minmax_element(at.begin(), at.end());
        spread = std::max(spread, (*mx - *mn) / median(at));
    }
    out.collapse_spread = spread;
    out.common_points = points.size();
    return out;
}

// ---------------------------------------------------------------------------
// Manifest

std::string scaling_manifest(const ExperimentConfig& cfg, const std::vector<ExperimentRecord>& records,
                             std::string_view command)
{
    json recs = json::array();
    for (const auto& r : records)
        recs.push_back({{"example", std::string(to_string(r.example))},
                        {"p", r.p},
                        {"T", r.T},
                        {"replicate", r.replicate},
                        {"seed", r.seed},
                        {"status", r.status}});
    const json doc{
        {"schema_version", kRecordsSchemaVersion},
        {"library_version", std::string(library_version())},
        {"command", std::string(command)},
        {"innovation_family", innovation_for(cfg).name()},
        {"config", to_json(cfg)},
        {"records", recs},
    };
    return doc.dump(2);
}

} // namespace tslasso

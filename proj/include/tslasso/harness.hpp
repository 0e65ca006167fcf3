#pragma once

#include <tslasso/conditions.hpp>
#include <tslasso/dgm.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tslasso {

std::string_view library_version();

enum class Example { gaussian_var, subgaussian_var, omitted_var, arch };

std::string_view to_string(Example e);
/// Throws ConfigError on an unknown tag.
Example example_from_string(std::string_view tag);

struct ArchParams
{
    double scale = 0.7;
    double exponent = 0.2;
    double clip_lo = 0.5;
    double clip_hi = 1.5;
};

/// lambda = c * sqrt(log(p q) / T). The optional grid is evaluated on top
/// of the fixed value and the oracle-best entry is reported separately.
struct LambdaRule
{
    double c = 2.0;
    std::vector<double> grid;
};

struct ConcentrationGrid
{
    std::vector<std::size_t> T{2000};
    std::vector<std::size_t> a_T{0}; // 0 means ceil(sqrt(T))
    std::vector<double> t{0.3};
    std::size_t reps = 10000;
    double ar_coeff = 0.5;
    double C_B = 0.5;
};

struct ExperimentConfig
{
    std::vector<Example> examples{Example::gaussian_var};
    std::vector<std::size_t> p_grid{50};
    std::vector<std::size_t> T_grid{500, 1000, 2000};
    std::size_t replicates = 10;
    std::string sparsity_rule = "ceil_sqrt_p";
    double op_norm_target = 0.9;
    LambdaRule lambda;
    std::uint64_t base_seed = 20240601;
    std::size_t burn_in = 500;
    std::string output_dir = "out";
    std::size_t workers = 1;
    std::string innovation = "uniform"; // "uniform" or "gaussian"
    ArchParams arch;
    double lasso_tol = 1e-7;
    std::size_t max_sweeps = 10000;
    double C_B = 0.5;
    double xi = 0.5;
    ConcentrationGrid concentration;
};

/// Parses the JSON config (or a manifest, whose "config" member is used).
/// Unknown keys and invalid values raise ConfigError.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);
/// Sorts and de-duplicates grids; throws ConfigError on violations.
void validate_config(ExperimentConfig& cfg);

std::size_t sparsity_for(const ExperimentConfig& cfg, std::size_t p);
DistributionSpec innovation_for(const ExperimentConfig& cfg);
/// The experiment model for one example at dimension p (d = 1).
ModelSpec build_example(Example e, std::size_t p, const ExperimentConfig& cfg);
std::uint64_t record_seed(std::uint64_t base_seed, Example e, std::size_t p, std::size_t T, std::size_t replicate);
double lambda_value(double c, std::size_t p, std::size_t q, std::size_t T);

struct ExperimentRecord
{
    Example example = Example::gaussian_var;
    std::size_t p = 0;
    std::size_t T = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::size_t s = 0;
    double lambda = 0.0;
    double l2_err = 0.0;
    double l2_rel_err = 0.0;
    double pred_err = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    std::size_t sweeps = 0;
    std::size_t active_set_size = 0;
    double lambda_best = 0.0; // NaN without a grid
    double l2_err_best = 0.0;
    std::optional<double> re_min_sparse_eig;
    std::optional<double> db_stat;
    std::string status = "ok";
    double wall_time = 0.0;
};

/// Fixed, versioned header of records.csv. wall_time is always last.
std::string_view records_header();
inline constexpr int kRecordsSchemaVersion = 1;
std::string format_record(const ExperimentRecord& r);
void write_records_csv(std::ostream& os, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(std::istream& is);

/// Runs one scaling cell; failures are caught and reported in `status`.
ExperimentRecord run_scaling_record(const ExperimentConfig& cfg, Example e, std::size_t p, std::size_t T,
                                    std::size_t replicate);

/// Options for writing results while a study runs.
struct RunSink
{
    std::ostream* csv = nullptr; // rows are flushed per (example, p) block
};

/// Every (example, p, T, replicate) cell, sorted in that order. Cells fan
/// out over cfg.workers threads; output does not depend on the count.
std::vector<ExperimentRecord> run_scaling_experiment(const ExperimentConfig& cfg, const RunSink& sink = {});

struct ConditionRecord
{
    Example example = Example::gaussian_var;
    std::size_t p = 0;
    std::size_t T = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::size_t s = 0;
    REMode re_mode = REMode::exact;
    double re_min_sparse_eig = 0.0;
    double re_alpha = 0.0;
    bool re_holds = false;
    double re_tau2 = 0.0;        // analytic tolerance; NaN below the sample threshold
    double re_required_T = 0.0;
    double db_stat = 0.0;
    double db_Q = 0.0;
    double db_R = 0.0;
    bool db_holds = false;
    double c_beta = 0.0;
    std::string status = "ok";
    double wall_time = 0.0;
};

std::string_view condition_header();
std::string format_condition(const ConditionRecord& r);
std::vector<ConditionRecord> run_condition_study(const ExperimentConfig& cfg, std::ostream* csv = nullptr);

struct ConcentrationRow
{
    ConcentrationReport report;
    std::uint64_t seed = 0;
    bool bound_valid = false; // bound >= 1 or tail <= bound + 3 sigma
};

std::string_view concentration_header();
std::string format_concentration(const ConcentrationRow& r);
std::vector<ConcentrationRow> run_concentration_study(const ExperimentConfig& cfg, std::ostream* csv = nullptr);

struct CollapseResult
{
    double slope = 0.0;
    std::vector<std::size_t> p_values;
    std::vector<double> slopes; // per p
    double collapse_spread = 0.0;
    std::size_t common_points = 0;
};

/// Records of a single example. `column` is "l2_err" or "l2_rel_err".
/// Curves are compared at n = T / (s log p), interpolating log error
/// linearly in log n inside the range every p covers.
CollapseResult collapse_diagnostics(const std::vector<ExperimentRecord>& records, std::string_view column = "l2_err");

/// JSON manifest: config, version, per-record seeds.
std::string scaling_manifest(const ExperimentConfig& cfg, const std::vector<ExperimentRecord>& records,
                             std::string_view command);

} // namespace tslasso

#pragma once

#include "sro/benchmarks.hpp"
#include "sro/evaluate.hpp"
#include "sro/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sro {

/// Either a named generator ("inventory", "scheduling", "example2",
/// "example3") with its parameters, or an instance file.
struct InstanceSource {
    std::string generator;
    std::filesystem::path file;
    int n = 4;
    double K = 20.0;
    double c = 2.0;
    std::optional<std::uint64_t> seed; ///< defaults to the plan seed
};

struct ExperimentPlan {
    InstanceSource instance;
    DistributionKind distribution = DistributionKind::Uniform;
    /// Explicit moments; required for file instances, optional otherwise.
    std::optional<Eigen::VectorXd> dist_mean;
    std::optional<Eigen::VectorXd> dist_std;
    std::vector<Method> methods{Method::SAA, Method::MP};
    std::vector<int> N_grid;
    int M = 20;
    std::size_t test_size = 2000;
    std::size_t vstar_size = 20000;
    /// Known optimal value; skips the estimation solve when set.
    std::optional<double> v_star;
    std::map<Method, RadiusSchedule> schedules;
    Norm norm = Norm::L2;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    int jobs = 1;

    /// Throws ContractViolation.
    void validate() const;
    RadiusSchedule schedule_for(Method method) const;

    static ExperimentPlan parse(const std::string& json_text);
    static ExperimentPlan load(const std::filesystem::path& path);
    std::string to_json() const;
};

struct ExperimentRow {
    Method method = Method::MP;
    int N = 0;
    int trial = 0;
    double radius = 0.0;
    Norm norm = Norm::L2;
    std::string status;
    std::optional<double> objective;
    std::optional<EvalReport> report;
    double solve_time = 0.0;
};

struct AggregateStats {
    std::size_t count = 0; ///< trials where the metric is defined
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double median = 0.0;
};

struct AggregateRow {
    Method method = Method::MP;
    int N = 0;
    int trials = 0;
    int solved = 0;
    std::map<std::string, AggregateStats> metrics;
    double solve_time_mean = 0.0;
};

struct ExperimentResult {
    TwoStageProblem problem;
    DistributionSpec distribution;
    double v_star = 0.0;
    std::vector<ExperimentRow> rows;        ///< ordered by (method, N, trial)
    std::vector<AggregateRow> aggregate;    ///< ordered by (method, N)
};

/// Metric names in the order used by the aggregate CSV.
const std::vector<std::string>& aggregate_metrics();

/// Instance and sampling distribution described by the plan.
GeneratedInstance materialize_instance(const ExperimentPlan& plan);

/// Runs the full grid. When `plan.out` is non-empty, writes results.csv,
/// aggregate.csv and plan.json there. Solver failures are recorded per row.
ExperimentResult run_experiment(const ExperimentPlan& plan);

std::vector<AggregateRow> aggregate_rows(const std::vector<ExperimentRow>& rows);

std::string results_csv(const std::vector<ExperimentRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Reads an aggregate CSV and writes one `<metric>.csv` and `<metric>.json`
/// series per metric with columns N, method, mean, min, max, p50. Undefined
/// values become empty fields / nulls. Returns the files written.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& aggregate_path,
                                                  const std::filesystem::path& out_dir);

} // namespace sro

#include "sro/benchmarks.hpp"
#include "sro/evaluate.hpp"
#include "sro/experiment.hpp"
#include "sro/feasibility.hpp"
#include "sro/io.hpp"
#include "sro/reformulate.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
    return rows;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) std::cout << text << '\n';
    else write_text(out_path, text);
}

// Radius from --radius or --schedule; the schedule is evaluated at N.
struct RadiusOptions {
    std::optional<double> radius;
    std::string schedule;

    void attach(CLI::App* cmd) {
        auto* r = cmd->add_option("--radius", radius, "Uncertainty-set radius");
        auto* s = cmd->add_option("--schedule", schedule, "Radius schedule kappa=<k>,exp=<e>");
        r->excludes(s);
    }

    double value(int N) const {
        if (radius) return *radius;
        if (!schedule.empty()) return sro::RadiusSchedule::parse(schedule)(N);
        return 0.0;
    }
};

json distribution_json(const sro::DistributionSpec& spec) {
    json doc;
    doc["kind"] = sro::to_string(spec.kind);
    doc["mean"] = vector_json(spec.mean);
    doc["std"] = vector_json(spec.std);
    doc["truncation"] = {{"G", matrix_json(spec.truncation.G)}, {"g0", vector_json(spec.truncation.g0)}};
    doc["seed"] = spec.seed;
    doc["prng"] = "philox4x32-10";
    return doc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sample robust two-stage linear programs with multi-policy decision rules"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a benchmark instance and a sample set");
    std::string gen_kind = "inventory";
    int gen_n = 4;
    double gen_K = 20.0;
    double gen_c = 2.0;
    std::uint64_t gen_seed = 0;
    std::string gen_dist = "uniform";
    std::size_t gen_count = 0;
    std::uint32_t gen_stream = 1;
    std::string gen_out = ".";
    gen->add_option("--generator", gen_kind, "inventory | scheduling | example2 | example3")
        ->check(CLI::IsMember({"inventory", "scheduling", "example2", "example3"}));
    gen->add_option("--n", gen_n, "Locations or patients");
    gen->add_option("--K", gen_K, "Inventory capacity");
    gen->add_option("--c", gen_c, "Overtime cost");
    gen->add_option("--seed", gen_seed, "Seed");
    gen->add_option("--distribution", gen_dist, "uniform | normal | lognormal");
    gen->add_option("--samples", gen_count, "Number of samples to draw (0 = none)");
    gen->add_option("--stream", gen_stream, "Random stream for the samples");
    gen->add_option("--out", gen_out, "Output directory");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve SAA, SP or MP on an instance and samples");
    std::string solve_instance, solve_samples, solve_method = "mp", solve_norm = "l2", solve_out, solve_lp;
    RadiusOptions solve_radius;
    solve->add_option("--instance", solve_instance, "Instance JSON")->required();
    solve->add_option("--samples", solve_samples, "Training samples CSV")->required();
    solve->add_option("--method", solve_method, "saa | sp | mp");
    solve->add_option("--norm", solve_norm, "l1 | l2 | linf");
    solve_radius.attach(solve);
    solve->add_option("--out", solve_out, "Solution JSON (stdout if omitted)");
    solve->add_option("--lp", solve_lp, "Also write the program in LP text format");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Out-of-sample evaluation of a solution");
    std::string eval_instance, eval_solution, eval_test, eval_vstar_samples, eval_out;
    std::optional<double> eval_vstar;
    int eval_jobs = 1;
    bool eval_csv = false;
    eval->add_option("--instance", eval_instance, "Instance JSON")->required();
    eval->add_option("--solution", eval_solution, "Solution JSON")->required();
    eval->add_option("--test", eval_test, "Test samples CSV")->required();
    auto* vs = eval->add_option("--v-star", eval_vstar, "Known optimal value");
    auto* vss = eval->add_option("--vstar-samples", eval_vstar_samples, "Samples CSV for estimating v* by SAA");
    vs->excludes(vss);
    eval->add_option("--jobs", eval_jobs, "Worker threads")->check(CLI::PositiveNumber);
    eval->add_flag("--csv", eval_csv, "Print a CSV row instead of JSON");
    eval->add_option("--out", eval_out, "Output file");

    // verify-a4
    auto* a4 = app.add_subcommand("verify-a4", "Sufficient check for a single affine rule feasible on the support");
    std::string a4_instance, a4_out;
    a4->add_option("--instance", a4_instance, "Instance JSON")->required();
    a4->add_option("--out", a4_out, "Output file");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a plan over methods, N grid and trials");
    std::string exp_plan, exp_out, exp_norm;
    std::optional<std::uint64_t> exp_seed;
    std::optional<int> exp_jobs;
    std::string exp_schedule;
    exp->add_option("--plan", exp_plan, "Plan JSON")->required();
    exp->add_option("--seed", exp_seed, "Override the plan seed");
    exp->add_option("--jobs", exp_jobs, "Override the worker count")->check(CLI::PositiveNumber);
    exp->add_option("--norm", exp_norm, "Override the norm");
    exp->add_option("--schedule", exp_schedule, "Override the SP/MP radius schedule");
    exp->add_option("--out", exp_out, "Override the output directory");

    // plot-data
    auto* plot = app.add_subcommand("plot-data", "Per-metric series from an aggregate CSV");
    std::string plot_in, plot_out = ".";
    plot->add_option("--aggregate", plot_in, "aggregate.csv")->required();
    plot->add_option("--out", plot_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto params = sro::conic::SolverParams::from_env();

        if (*gen) {
            const auto kind = sro::parse_distribution(gen_dist);
            sro::GeneratedInstance inst;
            if (gen_kind == "inventory") inst = sro::gen_inventory(gen_n, gen_K, gen_seed, kind);
            else if (gen_kind == "scheduling") inst = sro::gen_scheduling(gen_n, gen_c, gen_seed, kind);
            else {
                sro::ExperimentPlan plan;
                plan.instance.generator = gen_kind;
                plan.distribution = kind;
                plan.seed = gen_seed;
                inst = sro::materialize_instance(plan);
            }
            const fs::path dir = gen_out;
            fs::create_directories(dir);
            sro::save_problem(inst.problem, dir / "instance.json");
            write_text(dir / "distribution.json", distribution_json(inst.distribution).dump(1));
            std::cout << "wrote " << (dir / "instance.json").string() << '\n';
            if (gen_count > 0) {
                const auto samples = sro::sample(inst.distribution, gen_count, gen_stream);
                sro::save_samples(samples, dir / "samples.csv");
                std::cout << "wrote " << (dir / "samples.csv").string() << '\n';
            }
            return 0;
        }

        if (*solve) {
            const auto problem = sro::load_problem(solve_instance);
            const auto samples = sro::load_samples(solve_samples, problem);
            const auto method = sro::parse_method(solve_method);
            sro::RobustConfig config{sro::parse_norm(solve_norm), solve_radius.value(static_cast<int>(samples.size()))};
            if (!solve_lp.empty()) {
                sro::ReformulationArtifacts art;
                if (method == sro::Method::SAA) art = sro::build_saa(problem, samples);
                else if (method == sro::Method::SP) art = sro::build_sp(problem, samples, config);
                else art = sro::build_mp(problem, samples, config);
                std::ofstream lp(solve_lp);
                sro::conic::write_lp(art.program, lp);
            }
            const auto solution = sro::solve_method(problem, samples, method, config, params);
            emit(solve_out, sro::serialize_solution(solution));
            if (!solve_out.empty()) std::cout << "objective " << sro::format_double(solution.objective) << '\n';
            return 0;
        }

        if (*eval) {
            const auto problem = sro::load_problem(eval_instance);
            const auto solution = sro::load_solution(eval_solution);
            const auto test = sro::load_samples(eval_test, problem);
            double v_star = 0.0;
            if (eval_vstar) v_star = *eval_vstar;
            else if (!eval_vstar_samples.empty()) {
                v_star = sro::estimate_v_star(problem, sro::load_samples(eval_vstar_samples, problem), params);
            } else {
                throw CLI::ValidationError("evaluate", "one of --v-star or --vstar-samples is required");
            }
            auto report = sro::out_of_sample(problem, solution, test, v_star, eval_jobs, params);
            if (eval_csv) emit(eval_out, sro::EvalReport::csv_header() + "\n" + report.csv_row());
            else emit(eval_out, report.to_json());
            return 0;
        }

        if (*a4) {
            const auto problem = sro::load_problem(a4_instance);
            const auto res = sro::check_a4_sufficient(problem, params);
            json doc;
            doc["verdict"] = sro::to_string(res.verdict);
            doc["solver_status"] = sro::conic::to_string(res.solver_status);
            if (res.holds()) {
                doc["x"] = vector_json(res.x);
                doc["y0"] = vector_json(res.policy.y0);
                doc["Y"] = matrix_json(res.policy.Y);
            }
            emit(a4_out, doc.dump(1));
            return 0;
        }

        if (*exp) {
            auto plan = sro::ExperimentPlan::load(exp_plan);
            if (exp_seed) plan.seed = *exp_seed;
            if (exp_jobs) plan.jobs = *exp_jobs;
            if (!exp_norm.empty()) plan.norm = sro::parse_norm(exp_norm);
            if (!exp_schedule.empty()) {
                const auto sched = sro::RadiusSchedule::parse(exp_schedule);
                plan.schedules[sro::Method::SP] = sched;
                plan.schedules[sro::Method::MP] = sched;
            }
            if (!exp_out.empty()) plan.out = exp_out;
            if (plan.out.empty()) plan.out = "experiment_out";
            const auto result = sro::run_experiment(plan);
            std::cout << "v* " << sro::format_double(result.v_star) << '\n';
            std::cout << sro::aggregate_csv(result.aggregate);
            std::cout << "results in " << plan.out.string() << '\n';
            return 0;
        }

        if (*plot) {
            for (const auto& f : sro::emit_plot_data(plot_in, plot_out)) std::cout << "wrote " << f.string() << '\n';
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

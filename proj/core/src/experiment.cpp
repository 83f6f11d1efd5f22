#include "sro/experiment.hpp"

#include "parallel.hpp"
#include "sro/io.hpp"
#include "sro/reformulate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

namespace sro {

using nlohmann::json;

namespace {

constexpr std::uint32_t kTestStream = 1;
constexpr std::uint32_t kVStarStream = 2;
constexpr std::uint32_t kTrainingStreamBase = 16;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << text;
}

Eigen::VectorXd json_vector(const json& v, const char* key) {
    if (!v.is_array()) throw ParseError(std::string("plan field '") + key + "' must be an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    return out;
}

RadiusSchedule schedule_from_json(const json& v) {
    if (v.is_string()) return RadiusSchedule::parse(v.get<std::string>());
    if (v.is_number()) return RadiusSchedule{v.get<double>(), 0.0};
    if (!v.is_object()) throw ParseError("radius schedule must be a string, number or object");
    RadiusSchedule s;
    s.kappa = v.at("kappa").get<double>();
    const auto& e = v.at("exp");
    if (e.is_string()) s.exponent = RadiusSchedule::parse("kappa=0,exp=" + e.get<std::string>()).exponent;
    else s.exponent = e.get<double>();
    return s;
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::vector<std::uint64_t> bits_of(const Eigen::VectorXd& x) {
    std::vector<std::uint64_t> key(static_cast<std::size_t>(x.size()));
    for (Eigen::Index k = 0; k < x.size(); ++k) key[static_cast<std::size_t>(k)] = std::bit_cast<std::uint64_t>(x(k));
    return key;
}

AggregateStats stats_of(std::vector<double> values) {
    AggregateStats s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    s.min = values.front();
    s.max = values.back();
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

} // namespace

const std::vector<std::string>& aggregate_metrics() {
    static const std::vector<std::string> names{"objective", "pct_infeasible", "optimality_gap",
                                                "prediction_error", "mean_cost"};
    return names;
}

void ExperimentPlan::validate() const {
    if (instance.generator.empty() && instance.file.empty()) {
        throw ContractViolation("plan needs an instance generator or file");
    }
    if (methods.empty()) throw ContractViolation("plan needs at least one method");
    if (N_grid.empty()) throw ContractViolation("plan needs a nonempty N grid");
    for (std::size_t k = 0; k < N_grid.size(); ++k) {
        if (N_grid[k] < 1) throw ContractViolation("N grid entries must be positive");
        if (k > 0 && N_grid[k] <= N_grid[k - 1]) throw ContractViolation("N grid must be strictly increasing");
    }
    if (M < 1) throw ContractViolation("M must be at least 1");
    if (test_size < 1) throw ContractViolation("test size must be at least 1");
    if (!v_star && vstar_size < 1) throw ContractViolation("v* sample size must be at least 1");
    if (jobs < 1) throw ContractViolation("jobs must be at least 1");
}

RadiusSchedule ExperimentPlan::schedule_for(Method method) const {
    if (method == Method::SAA) return {};
    auto it = schedules.find(method);
    return it == schedules.end() ? RadiusSchedule{} : it->second;
}

ExperimentPlan ExperimentPlan::parse(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed plan JSON: ") + e.what());
    }
    ExperimentPlan plan;
    try {
        const auto& inst = doc.at("instance");
        if (inst.contains("file")) plan.instance.file = inst.at("file").get<std::string>();
        if (inst.contains("generator")) plan.instance.generator = inst.at("generator").get<std::string>();
        plan.instance.n = inst.value("n", plan.instance.n);
        plan.instance.K = inst.value("K", plan.instance.K);
        plan.instance.c = inst.value("c", plan.instance.c);
        if (inst.contains("seed")) plan.instance.seed = inst.at("seed").get<std::uint64_t>();

        if (auto it = doc.find("distribution"); it != doc.end()) {
            if (it->is_string()) {
                plan.distribution = parse_distribution(it->get<std::string>());
            } else {
                plan.distribution = parse_distribution(it->at("kind").get<std::string>());
                if (it->contains("mean")) plan.dist_mean = json_vector(it->at("mean"), "mean");
                if (it->contains("std")) plan.dist_std = json_vector(it->at("std"), "std");
            }
        }
        if (auto it = doc.find("methods"); it != doc.end()) {
            plan.methods.clear();
            for (const auto& m : *it) plan.methods.push_back(parse_method(m.get<std::string>()));
        }
        plan.N_grid = doc.at("N_grid").get<std::vector<int>>();
        plan.M = doc.value("M", plan.M);
        plan.test_size = doc.value("test_size", plan.test_size);
        plan.vstar_size = doc.value("vstar_size", plan.vstar_size);
        if (doc.contains("v_star")) plan.v_star = doc.at("v_star").get<double>();
        if (auto it = doc.find("schedule"); it != doc.end()) {
            const auto s = schedule_from_json(*it);
            plan.schedules[Method::SP] = s;
            plan.schedules[Method::MP] = s;
        }
        if (auto it = doc.find("schedules"); it != doc.end()) {
            for (const auto& [name, value] : it->items()) plan.schedules[parse_method(name)] = schedule_from_json(value);
        }
        if (doc.contains("norm")) plan.norm = parse_norm(doc.at("norm").get<std::string>());
        plan.seed = doc.value("seed", plan.seed);
        if (doc.contains("out")) plan.out = doc.at("out").get<std::string>();
        plan.jobs = doc.value("jobs", plan.jobs);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

ExperimentPlan ExperimentPlan::load(const std::filesystem::path& path) { return parse(read_text(path)); }

std::string ExperimentPlan::to_json() const {
    json doc;
    json inst;
    if (!instance.generator.empty()) inst["generator"] = instance.generator;
    if (!instance.file.empty()) inst["file"] = instance.file.string();
    inst["n"] = instance.n;
    inst["K"] = instance.K;
    inst["c"] = instance.c;
    if (instance.seed) inst["seed"] = *instance.seed;
    doc["instance"] = inst;
    json dist;
    dist["kind"] = to_string(distribution);
    if (dist_mean) dist["mean"] = std::vector<double>(dist_mean->data(), dist_mean->data() + dist_mean->size());
    if (dist_std) dist["std"] = std::vector<double>(dist_std->data(), dist_std->data() + dist_std->size());
    doc["distribution"] = dist;
    json methods_json = json::array();
    for (auto m : methods) methods_json.push_back(to_string(m));
    doc["methods"] = methods_json;
    doc["N_grid"] = N_grid;
    doc["M"] = M;
    doc["test_size"] = test_size;
    doc["vstar_size"] = vstar_size;
    if (v_star) doc["v_star"] = *v_star;
    json sched = json::object();
    for (const auto& [m, s] : schedules) sched[to_string(m)] = {{"kappa", s.kappa}, {"exp", s.exponent}};
    doc["schedules"] = sched;
    doc["norm"] = to_string(norm);
    doc["seed"] = seed;
    if (!out.empty()) doc["out"] = out.string();
    doc["jobs"] = jobs;
    return doc.dump(1);
}

GeneratedInstance materialize_instance(const ExperimentPlan& plan) {
    const auto seed = plan.instance.seed.value_or(plan.seed);
    const auto& gen = plan.instance.generator;
    GeneratedInstance inst;
    if (gen == "inventory") {
        inst = gen_inventory(plan.instance.n, plan.instance.K, seed, plan.distribution);
    } else if (gen == "scheduling") {
        inst = gen_scheduling(plan.instance.n, plan.instance.c, seed, plan.distribution);
    } else if (gen == "example3") {
        // Samples uniform on [0, 1].
        inst.problem = gen_example3();
        inst.distribution.mean = Eigen::VectorXd::Constant(1, 0.5);
        inst.distribution.std = Eigen::VectorXd::Constant(1, 1.0 / std::sqrt(12.0));
    } else if (gen == "example2") {
        inst.problem = gen_example2();
        inst.distribution.mean = Eigen::VectorXd::Zero(2);
        inst.distribution.std = Eigen::VectorXd::Constant(2, 1.0 / std::sqrt(3.0));
    } else if (gen.empty()) {
        inst.problem = load_problem(plan.instance.file);
        if (!plan.dist_mean || !plan.dist_std) {
            throw ContractViolation("file instances need distribution mean and std in the plan");
        }
    } else {
        throw ParseError("unknown instance generator '" + gen + "'");
    }
    if (gen != "inventory" && gen != "scheduling") {
        inst.distribution.truncation = inst.problem.support;
    }
    inst.distribution.kind = plan.distribution;
    inst.distribution.seed = plan.seed;
    if (plan.dist_mean) inst.distribution.mean = *plan.dist_mean;
    if (plan.dist_std) inst.distribution.std = *plan.dist_std;
    if (inst.distribution.dim() != inst.problem.d()) {
        throw DimensionError("distribution dimension does not match the instance");
    }
    inst.distribution.validate();
    return inst;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<ExperimentRow>& rows) {
    std::vector<AggregateRow> out;
    std::size_t start = 0;
    while (start < rows.size()) {
        std::size_t end = start;
        while (end < rows.size() && rows[end].method == rows[start].method && rows[end].N == rows[start].N) ++end;
        AggregateRow agg;
        agg.method = rows[start].method;
        agg.N = rows[start].N;
        agg.trials = static_cast<int>(end - start);
        std::map<std::string, std::vector<double>> values;
        double time_sum = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            const auto& row = rows[k];
            time_sum += row.solve_time;
            if (row.objective) {
                ++agg.solved;
                values["objective"].push_back(*row.objective);
            }
            if (row.report) {
                values["pct_infeasible"].push_back(row.report->pct_infeasible);
                if (row.report->optimality_gap) values["optimality_gap"].push_back(*row.report->optimality_gap);
                if (row.report->prediction_error) values["prediction_error"].push_back(*row.report->prediction_error);
                if (row.report->mean_cost) values["mean_cost"].push_back(*row.report->mean_cost);
            }
        }
        for (const auto& name : aggregate_metrics()) agg.metrics[name] = stats_of(values[name]);
        agg.solve_time_mean = time_sum / agg.trials;
        out.push_back(std::move(agg));
        start = end;
    }
    return out;
}

std::string results_csv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << "method,N,trial,radius,norm,status,objective,pct_infeasible,optimality_gap,prediction_error,"
           "mean_cost,infeasible,failed,solve_time\n";
    for (const auto& row : rows) {
        out << to_string(row.method) << ',' << row.N << ',' << row.trial << ',' << format_double(row.radius) << ','
            << to_string(row.norm) << ',' << row.status << ',' << optional_field(row.objective) << ',';
        if (row.report) {
            const auto& r = *row.report;
            out << format_double(r.pct_infeasible) << ',' << optional_field(r.optimality_gap) << ','
                << optional_field(r.prediction_error) << ',' << optional_field(r.mean_cost) << ','
                << r.infeasible << ',' << r.failed;
        } else {
            out << ",,,,,";
        }
        out << ',' << format_double(row.solve_time) << '\n';
    }
    return out.str();
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream out;
    out << "method,N,trials,solved";
    for (const auto& m : aggregate_metrics()) {
        out << ',' << m << "_count," << m << "_mean," << m << "_min," << m << "_max," << m << "_p50";
    }
    out << ",solve_time_mean\n";
    for (const auto& row : rows) {
        out << to_string(row.method) << ',' << row.N << ',' << row.trials << ',' << row.solved;
        for (const auto& m : aggregate_metrics()) {
            const auto& s = row.metrics.at(m);
            out << ',' << s.count;
            if (s.count == 0) {
                out << ",,,,";
            } else {
                out << ',' << format_double(s.mean) << ',' << format_double(s.min) << ',' << format_double(s.max)
                    << ',' << format_double(s.median);
            }
        }
        out << ',' << format_double(row.solve_time_mean) << '\n';
    }
    return out.str();
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    const auto params = conic::SolverParams::from_env();
    ExperimentResult result;
    auto inst = materialize_instance(plan);
    result.problem = inst.problem;
    result.distribution = inst.distribution;
    const auto& problem = result.problem;
    const auto& dist = result.distribution;

    const SampleSet test = sample(dist, plan.test_size, kTestStream);
    if (plan.v_star) {
        result.v_star = *plan.v_star;
    } else {
        result.v_star = estimate_v_star(problem, sample(dist, plan.vstar_size, kVStarStream), params);
    }

    const int M = plan.M;
    const std::size_t num_n = plan.N_grid.size();
    std::vector<SampleSet> training(num_n * static_cast<std::size_t>(M));
    detail::parallel_for(training.size(), plan.jobs, [&](std::size_t k) {
        const auto n_idx = k / static_cast<std::size_t>(M);
        training[k] = sample(dist, static_cast<std::size_t>(plan.N_grid[n_idx]),
                             kTrainingStreamBase + static_cast<std::uint32_t>(k));
    });

    struct CachedCosts {
        std::vector<std::optional<double>> costs;
        std::size_t failed = 0;
    };
    std::mutex cache_mutex;
    std::map<std::vector<std::uint64_t>, std::shared_ptr<const CachedCosts>> cache;

    const std::size_t per_method = training.size();
    result.rows.resize(plan.methods.size() * per_method);
    detail::parallel_for(result.rows.size(), plan.jobs, [&](std::size_t cell) {
        const Method method = plan.methods[cell / per_method];
        const std::size_t k = cell % per_method;
        const int N = plan.N_grid[k / static_cast<std::size_t>(M)];
        ExperimentRow& row = result.rows[cell];
        row.method = method;
        row.N = N;
        row.trial = static_cast<int>(k % static_cast<std::size_t>(M));
        row.norm = plan.norm;
        row.radius = method == Method::SAA ? 0.0 : plan.schedule_for(method)(N);

        const auto start = std::chrono::steady_clock::now();
        PolicySolution sol;
        try {
            sol = solve_method(problem, training[k], method, RobustConfig{plan.norm, row.radius}, params);
            row.status = "Optimal";
        } catch (const SolveFailure& e) {
            row.status = conic::to_string(e.status());
        }
        row.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (row.status != "Optimal") return;
        row.objective = sol.objective;

        const auto key = bits_of(sol.x);
        std::shared_ptr<const CachedCosts> entry;
        {
            std::lock_guard lock(cache_mutex);
            if (auto it = cache.find(key); it != cache.end()) entry = it->second;
        }
        if (!entry) {
            auto fresh = std::make_shared<CachedCosts>();
            fresh->costs = second_stage_costs(problem, sol.x, test, &fresh->failed, 1, params);
            std::lock_guard lock(cache_mutex);
            entry = cache.emplace(key, std::move(fresh)).first->second;
        }
        row.report = summarize(problem, sol, N, entry->costs, entry->failed, result.v_star);
        row.report->per_realization_costs.clear();
    });

    result.aggregate = aggregate_rows(result.rows);

    if (!plan.out.empty()) {
        std::filesystem::create_directories(plan.out);
        write_text(plan.out / "results.csv", results_csv(result.rows));
        write_text(plan.out / "aggregate.csv", aggregate_csv(result.aggregate));
        write_text(plan.out / "plan.json", plan.to_json() + "\n");
        json meta;
        meta["v_star"] = result.v_star;
        meta["test_size"] = plan.test_size;
        meta["instance"] = json::parse(serialize_problem(problem));
        write_text(plan.out / "run.json", meta.dump(1) + "\n");
    }
    return result;
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& aggregate_path,
                                                  const std::filesystem::path& out_dir) {
    std::istringstream in(read_text(aggregate_path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("aggregate file '" + aggregate_path.string() + "' is empty");
    const auto header = split(line, ',');
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("aggregate file lacks column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto c_method = column("method");
    const auto c_n = column("N");
    std::vector<std::vector<std::string>> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size()) throw ParseError("aggregate row has the wrong number of fields");
        records.push_back(std::move(cells));
    }

    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    for (const auto& metric : aggregate_metrics()) {
        const std::array<std::size_t, 4> cols{column(metric + "_mean"), column(metric + "_min"),
                                              column(metric + "_max"), column(metric + "_p50")};
        std::ostringstream csv;
        csv << "N,method,mean,min,max,p50\n";
        json series = json::array();
        for (const auto& rec : records) {
            csv << rec[c_n] << ',' << rec[c_method];
            json point;
            point["N"] = std::stoi(rec[c_n]);
            point["method"] = rec[c_method];
            const std::array<const char*, 4> names{"mean", "min", "max", "p50"};
            for (std::size_t k = 0; k < cols.size(); ++k) {
                const auto& cell = rec[cols[k]];
                csv << ',' << cell;
                point[names[k]] = cell.empty() ? json(nullptr) : json(std::stod(cell));
            }
            csv << '\n';
            series.push_back(std::move(point));
        }
        const auto csv_path = out_dir / (metric + ".csv");
        const auto json_path = out_dir / (metric + ".json");
        write_text(csv_path, csv.str());
        write_text(json_path, series.dump(1) + "\n");
        written.push_back(csv_path);
        written.push_back(json_path);
    }
    return written;
}

} // namespace sro

#include "sro/benchmarks.hpp"

#include "sro/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sro {

namespace {

// Stream ids reserved for instance construction, disjoint from sampling
// streams chosen by callers.
constexpr std::uint32_t kInstanceStream = 0xFFFF0000u;

double parse_real(std::string_view text, const char* what) {
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        return parse_real(text.substr(0, slash), what) / parse_real(text.substr(slash + 1), what);
    }
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(std::string("bad ") + what + " value '" + std::string(text) + "'");
    }
    return v;
}

} // namespace

DistributionKind parse_distribution(std::string_view text) {
    if (text == "uniform") return DistributionKind::Uniform;
    if (text == "normal") return DistributionKind::Normal;
    if (text == "lognormal") return DistributionKind::Lognormal;
    throw ParseError("unknown distribution '" + std::string(text) + "' (expected uniform, normal, lognormal)");
}

std::string to_string(DistributionKind kind) {
    switch (kind) {
    case DistributionKind::Uniform: return "uniform";
    case DistributionKind::Normal: return "normal";
    case DistributionKind::Lognormal: return "lognormal";
    }
    return "uniform";
}

void DistributionSpec::validate() const {
    if (mean.size() < 1 || std.size() != mean.size()) {
        throw ContractViolation("distribution mean and std must have equal positive length");
    }
    if (!(std.array() > 0.0).all() || !std.allFinite() || !mean.allFinite()) {
        throw ContractViolation("distribution std must be positive and finite");
    }
    if (kind == DistributionKind::Lognormal && !(mean.array() > 0.0).all()) {
        throw ContractViolation("lognormal distribution needs a positive mean");
    }
    if (truncation.rows() > 0 && truncation.dim() != dim()) {
        throw DimensionError("truncation set has dimension " + std::to_string(truncation.dim()) +
                             ", expected " + std::to_string(dim()));
    }
}

GeneratedInstance gen_inventory(int n, double K, std::uint64_t seed, DistributionKind kind) {
    if (n < 2) throw ContractViolation("inventory instance needs n >= 2 locations");
    if (!(K > 0.0)) throw ContractViolation("inventory capacity K must be positive");

    RandomStream rng(seed, kInstanceStream, 0);
    std::vector<Eigen::Vector2d> loc(static_cast<std::size_t>(n));
    for (auto& p : loc) p = Eigen::Vector2d(rng.normal(), rng.normal());

    const int r = n * (n - 1);
    const int m = 3 * n + 2 * r;
    // Transfer variable index for the ordered pair (i, j), i != j.
    auto arc = [n](int i, int j) { return i * (n - 1) + (j < i ? j : j - 1); };

    TwoStageProblem p;
    p.c = Eigen::VectorXd::Ones(n);
    p.q.resize(r);
    Eigen::VectorXd cap(r);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            p.q(arc(i, j)) = (loc[static_cast<std::size_t>(i)] - loc[static_cast<std::size_t>(j)]).norm();
            cap(arc(i, j)) = K / (n - 1) * rng.uniform();
        }
    }
    p.T = Eigen::MatrixXd::Zero(m, n);
    p.W = Eigen::MatrixXd::Zero(m, r);
    p.H = Eigen::MatrixXd::Zero(m, n);
    p.h0 = Eigen::VectorXd::Zero(m);
    int row = 0;
    for (int i = 0; i < n; ++i, ++row) { // stock plus inflow minus outflow covers demand
        p.T(row, i) = 1.0;
        p.H(row, i) = 1.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            p.W(row, arc(i, j)) = -1.0;
            p.W(row, arc(j, i)) = 1.0;
        }
    }
    for (int i = 0; i < n; ++i, ++row) p.T(row, i) = 1.0;
    for (int i = 0; i < n; ++i, ++row) {
        p.T(row, i) = -1.0;
        p.h0(row) = -K;
    }
    for (int a = 0; a < r; ++a, ++row) p.W(row, a) = 1.0;
    for (int a = 0; a < r; ++a, ++row) {
        p.W(row, a) = -1.0;
        p.h0(row) = -cap(a);
    }
    p.support = SupportPolyhedron::box(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Constant(n, K));
    for (int i = 0; i < n; ++i) p.names.push_back("demand" + std::to_string(i + 1));
    p.validate();

    DistributionSpec dist;
    dist.kind = kind;
    dist.mean = Eigen::VectorXd::Constant(n, K / 2.0);
    dist.std = Eigen::VectorXd::Constant(n, K / std::sqrt(12.0));
    dist.truncation = p.support;
    dist.truncation.G.conservativeResize(2 * n + 1, n);
    dist.truncation.g0.conservativeResize(2 * n + 1);
    dist.truncation.G.row(2 * n).setConstant(-1.0);
    dist.truncation.g0(2 * n) = -std::sqrt(static_cast<double>(n)) * K;
    dist.seed = seed;
    dist.validate();
    return {std::move(p), std::move(dist)};
}

GeneratedInstance gen_scheduling(int n, double c, std::uint64_t seed, DistributionKind kind) {
    if (n < 1) throw ContractViolation("scheduling instance needs n >= 1 patients");

    RandomStream rng(seed, kInstanceStream, 1);
    Eigen::VectorXd mu(n), sigma(n);
    for (int i = 0; i < n; ++i) {
        mu(i) = rng.uniform(30.0, 60.0);
        sigma(i) = rng.uniform(0.0, 0.3 * mu(i));
    }
    const double horizon = mu.sum() + 0.5 * sigma.norm();

    // Recourse w_2..w_{n+1}: waiting times of patients 2..n, then overtime.
    const int r = n;
    const int m = 3 * n + 1;
    TwoStageProblem p;
    p.c = Eigen::VectorXd::Zero(n);
    p.q = Eigen::VectorXd::Ones(r);
    p.q(r - 1) = c;
    p.T = Eigen::MatrixXd::Zero(m, n);
    p.W = Eigen::MatrixXd::Zero(m, r);
    p.H = Eigen::MatrixXd::Zero(m, n);
    p.h0 = Eigen::VectorXd::Zero(m);
    int row = 0;
    for (int i = 0; i < n; ++i, ++row) { // w_{i+1} >= w_i + xi_i - x_i
        p.W(row, i) = 1.0;
        if (i > 0) p.W(row, i - 1) = -1.0;
        p.T(row, i) = 1.0;
        p.H(row, i) = 1.0;
    }
    for (int l = 0; l < r; ++l, ++row) p.W(row, l) = 1.0;
    for (int i = 0; i < n; ++i) p.T(row, i) = -1.0;
    p.h0(row++) = -horizon;
    for (int i = 0; i < n; ++i, ++row) p.T(row, i) = 1.0;
    p.support.G = Eigen::MatrixXd::Identity(n, n);
    p.support.g0 = Eigen::VectorXd::Zero(n);
    p.validate();

    DistributionSpec dist;
    dist.kind = kind;
    dist.mean = mu;
    dist.std = sigma;
    dist.truncation = p.support;
    dist.seed = seed;
    dist.validate();
    return {std::move(p), std::move(dist)};
}

double scheduling_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, double c) {
    const auto n = x.size();
    double wait = 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        wait = std::max(wait + xi(i) - x(i), 0.0);
        total += (i + 1 < n ? 1.0 : c) * wait;
    }
    return total;
}

TwoStageProblem gen_example3() {
    TwoStageProblem p;
    p.c = Eigen::VectorXd::Ones(1);
    p.q = Eigen::VectorXd::Zero(1);
    p.T = Eigen::MatrixXd::Ones(1, 1);
    p.W = Eigen::MatrixXd::Zero(1, 1);
    p.h0 = Eigen::VectorXd::Zero(1);
    p.H = Eigen::MatrixXd::Ones(1, 1);
    p.support = SupportPolyhedron::box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0));
    p.validate();
    return p;
}

double closed_form_example3(const SampleSet& samples, double radius, ClosedFormMethod method) {
    if (samples.points.empty()) throw DimensionError("sample set is empty");
    double top = samples.points.front()(0);
    for (const auto& s : samples.points) top = std::max(top, s(0));
    switch (method) {
    case ClosedFormMethod::SAA: return top;
    case ClosedFormMethod::SRO: return std::min(top + radius, 2.0);
    case ClosedFormMethod::Feasible: return 2.0;
    }
    return top;
}

TwoStageProblem gen_example2() {
    TwoStageProblem p;
    p.c = Eigen::VectorXd::Zero(1);
    p.q = Eigen::VectorXd::Ones(1);
    p.T = Eigen::MatrixXd::Zero(6, 1);
    p.W = Eigen::MatrixXd::Zero(6, 1);
    p.H = Eigen::MatrixXd::Zero(6, 2);
    p.h0 = Eigen::VectorXd::Zero(6);
    p.W.col(0) << 1, 1, -1, -1, 0, 0;
    p.H << 1, -1,
          -1, 1,
          -1, -1,
           1, 1,
           0, 0,
           0, 0;
    p.h0 << 0, 0, -2, -2, 0, -1;
    p.T(4, 0) = 1.0;
    p.T(5, 0) = -1.0;
    p.support = SupportPolyhedron::box(Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0));
    p.validate();
    return p;
}

SampleSet sample(const DistributionSpec& spec, std::size_t count, std::uint32_t stream, std::size_t max_attempts) {
    spec.validate();
    if (count < 1) throw ContractViolation("sample count must be at least 1");
    const int d = spec.dim();
    Eigen::VectorXd lo(d), hi(d), mu_log(d), sigma_log(d);
    for (int k = 0; k < d; ++k) {
        const double half = std::sqrt(3.0) * spec.std(k);
        lo(k) = spec.mean(k) - half;
        hi(k) = spec.mean(k) + half;
        const double var_log = std::log1p(spec.std(k) * spec.std(k) / (spec.mean(k) * spec.mean(k)));
        sigma_log(k) = std::sqrt(var_log);
        mu_log(k) = std::log(spec.mean(k)) - var_log / 2.0;
    }

    SampleSet set;
    set.seed = spec.seed;
    set.source = to_string(spec.kind) + ":stream" + std::to_string(stream);
    set.points.resize(count);
    Eigen::VectorXd point(d);
    for (std::size_t idx = 0; idx < count; ++idx) {
        RandomStream rng(spec.seed, stream, idx);
        bool accepted = false;
        for (std::size_t attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
            for (int k = 0; k < d; ++k) {
                switch (spec.kind) {
                case DistributionKind::Uniform: point(k) = rng.uniform(lo(k), hi(k)); break;
                case DistributionKind::Normal: point(k) = spec.mean(k) + spec.std(k) * rng.normal(); break;
                case DistributionKind::Lognormal: point(k) = std::exp(mu_log(k) + sigma_log(k) * rng.normal()); break;
                }
            }
            accepted = spec.truncation.contains(point, 0.0);
        }
        if (!accepted) {
            throw std::runtime_error("rejection sampling exhausted " + std::to_string(max_attempts) +
                                     " attempts for point " + std::to_string(idx));
        }
        set.points[idx] = point;
    }
    return set;
}

double radius_schedule(double kappa, double exponent, int N) {
    if (N < 1) throw ContractViolation("radius schedule needs N >= 1");
    if (!(kappa >= 0.0)) throw ContractViolation("radius schedule needs kappa >= 0");
    // Through log2 so that powers of two come out exact.
    return kappa * std::exp2(-exponent * std::log2(static_cast<double>(N)));
}

RadiusSchedule RadiusSchedule::parse(std::string_view text) {
    RadiusSchedule s;
    bool have_kappa = false;
    bool have_exp = false;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ParseError("schedule item '" + std::string(item) + "' lacks '='");
        const auto key = item.substr(0, eq);
        const auto value = item.substr(eq + 1);
        if (key == "kappa") {
            s.kappa = parse_real(value, "kappa");
            have_kappa = true;
        } else if (key == "exp") {
            s.exponent = parse_real(value, "exp");
            have_exp = true;
        } else {
            throw ParseError("unknown schedule key '" + std::string(key) + "'");
        }
    }
    if (!have_kappa || !have_exp) throw ParseError("schedule needs both kappa=<k> and exp=<e>");
    if (!(s.kappa >= 0.0)) throw ParseError("schedule kappa must be nonnegative");
    return s;
}

} // namespace sro

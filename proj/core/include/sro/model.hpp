#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sro {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Malformed input file or value.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent matrix/vector dimensions; the message names the offending field.
class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sample point lies outside the support polyhedron.
class SupportViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation called with a precondition that does not hold (e.g. extracting a
/// solution from a non-optimal solve).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

enum class Norm { L1, L2, Linf };

constexpr Norm dual_norm(Norm norm) noexcept {
    switch (norm) {
    case Norm::L1: return Norm::Linf;
    case Norm::Linf: return Norm::L1;
    case Norm::L2: return Norm::L2;
    }
    return Norm::L2;
}

/// "l1", "l2", "linf" (case-insensitive; "inf" accepted for linf).
Norm parse_norm(std::string_view text);
std::string to_string(Norm norm);

double norm_value(const Eigen::VectorXd& v, Norm norm);

// ---------------------------------------------------------------------------
// Problem data
// ---------------------------------------------------------------------------

/// Xi = { zeta : G zeta >= g0 }. Zero rows encode Xi = R^d.
struct SupportPolyhedron {
    Eigen::MatrixXd G;
    Eigen::VectorXd g0;

    static SupportPolyhedron whole_space(int d);
    static SupportPolyhedron box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

    int rows() const { return static_cast<int>(G.rows()); }
    int dim() const { return static_cast<int>(G.cols()); }
    bool contains(const Eigen::VectorXd& zeta, double tol) const;

    /// Throws DimensionError for inconsistent sizes or an all-zero row.
    void validate(int d) const;
};

/// Data of the two-stage problem
///   min c'x + E[Q(x, xi)],  Q(x, xi) = min { q'y : T x + W y >= h0 + H xi }.
struct TwoStageProblem {
    Eigen::VectorXd c;
    Eigen::VectorXd q;
    Eigen::MatrixXd T;
    Eigen::MatrixXd W;
    Eigen::VectorXd h0;
    Eigen::MatrixXd H;
    SupportPolyhedron support;
    std::vector<std::string> names;

    int n() const { return static_cast<int>(c.size()); }
    int r() const { return static_cast<int>(q.size()); }
    int m() const { return static_cast<int>(h0.size()); }
    int d() const { return static_cast<int>(H.cols()); }

    Eigen::VectorXd rhs(const Eigen::VectorXd& xi) const { return h0 + H * xi; }

    /// Row j has no recourse and no uncertainty: it constrains x alone.
    bool is_first_stage_row(int j) const;

    void validate() const;
};

bool operator==(const SupportPolyhedron& a, const SupportPolyhedron& b);
bool operator==(const TwoStageProblem& a, const TwoStageProblem& b);

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

inline constexpr double kDefaultSupportTol = 1e-9;

struct SampleSet {
    std::vector<Eigen::VectorXd> points;
    std::optional<std::uint64_t> seed;
    std::string source;

    std::size_t size() const { return points.size(); }
    int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
};

/// Checks N >= 1, every point has length d, and every point lies in Xi up to
/// `tol`. Throws DimensionError or SupportViolation.
void validate_samples(const SampleSet& samples, const SupportPolyhedron& support,
                      double tol = kDefaultSupportTol);

// ---------------------------------------------------------------------------
// Robustness configuration and solutions
// ---------------------------------------------------------------------------

struct RobustConfig {
    Norm norm = Norm::L2;
    double radius = 0.0;

    void validate() const;
};

enum class Method { SAA, SP, MP };

Method parse_method(std::string_view text);
std::string to_string(Method method);

/// y(zeta) = y0 + Y zeta.
struct AffinePolicy {
    Eigen::VectorXd y0;
    Eigen::MatrixXd Y;

    Eigen::VectorXd operator()(const Eigen::VectorXd& zeta) const { return y0 + Y * zeta; }
};

struct PolicySolution {
    Eigen::VectorXd x;
    /// N entries for MP and SAA, one for SP.
    std::vector<AffinePolicy> policies;
    /// Centers of the uncertainty sets (the training samples), needed to
    /// route a realization to its policies.
    std::vector<Eigen::VectorXd> centers;
    double objective = 0.0;
    Method method = Method::MP;
    double radius = 0.0;
    Norm norm = Norm::L2;
};

} // namespace sro

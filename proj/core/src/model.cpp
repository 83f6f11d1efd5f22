#include "sro/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace sro {

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

void expect_shape(const Eigen::MatrixXd& M, Eigen::Index rows, Eigen::Index cols,
                  const char* field) {
    if (M.rows() != rows || M.cols() != cols) {
        std::ostringstream msg;
        msg << "field '" << field << "' has shape " << M.rows() << "x" << M.cols()
            << ", expected " << rows << "x" << cols;
        throw DimensionError(msg.str());
    }
}

void expect_length(const Eigen::VectorXd& v, Eigen::Index len, const char* field) {
    if (v.size() != len) {
        std::ostringstream msg;
        msg << "field '" << field << "' has length " << v.size() << ", expected " << len;
        throw DimensionError(msg.str());
    }
}

void expect_finite(const Eigen::MatrixXd& M, const char* field) {
    if (!M.allFinite()) throw ParseError(std::string("field '") + field + "' has non-finite entries");
}

} // namespace

Norm parse_norm(std::string_view text) {
    const auto t = lowercase(text);
    if (t == "l1") return Norm::L1;
    if (t == "l2") return Norm::L2;
    if (t == "linf" || t == "inf" || t == "l_inf") return Norm::Linf;
    throw ParseError("unknown norm '" + std::string(text) + "' (expected l1, l2, linf)");
}

std::string to_string(Norm norm) {
    switch (norm) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
    }
    return "l2";
}

double norm_value(const Eigen::VectorXd& v, Norm norm) {
    if (v.size() == 0) return 0.0;
    switch (norm) {
    case Norm::L1: return v.lpNorm<1>();
    case Norm::L2: return v.norm();
    case Norm::Linf: return v.lpNorm<Eigen::Infinity>();
    }
    return v.norm();
}

Method parse_method(std::string_view text) {
    const auto t = lowercase(text);
    if (t == "saa") return Method::SAA;
    if (t == "sp") return Method::SP;
    if (t == "mp") return Method::MP;
    throw ParseError("unknown method '" + std::string(text) + "' (expected SAA, SP, MP)");
}

std::string to_string(Method method) {
    switch (method) {
    case Method::SAA: return "SAA";
    case Method::SP: return "SP";
    case Method::MP: return "MP";
    }
    return "MP";
}

SupportPolyhedron SupportPolyhedron::whole_space(int d) {
    return {Eigen::MatrixXd(0, d), Eigen::VectorXd(0)};
}

SupportPolyhedron SupportPolyhedron::box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    const auto d = lower.size();
    SupportPolyhedron s;
    s.G.setZero(2 * d, d);
    s.g0.resize(2 * d);
    s.G.topRows(d).setIdentity();
    s.G.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
    s.g0.head(d) = lower;
    s.g0.tail(d) = -upper;
    return s;
}

bool SupportPolyhedron::contains(const Eigen::VectorXd& zeta, double tol) const {
    if (G.rows() == 0) return true;
    return ((G * zeta - g0).array() >= -tol).all();
}

void SupportPolyhedron::validate(int d) const {
    if (G.cols() != d && !(G.rows() == 0)) {
        std::ostringstream msg;
        msg << "field 'G' has " << G.cols() << " columns, expected d = " << d;
        throw DimensionError(msg.str());
    }
    expect_length(g0, G.rows(), "g0");
    expect_finite(G, "G");
    expect_finite(g0, "g0");
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        if (G.row(i).isZero(0.0)) {
            throw DimensionError("field 'G' has an all-zero row " + std::to_string(i));
        }
    }
}

bool TwoStageProblem::is_first_stage_row(int j) const {
    return W.row(j).isZero(0.0) && H.row(j).isZero(0.0);
}

void TwoStageProblem::validate() const {
    const auto n_ = c.size();
    const auto r_ = q.size();
    const auto m_ = h0.size();
    const auto d_ = H.cols();
    if (r_ < 1) throw DimensionError("field 'q' must have length r >= 1");
    if (m_ < 1) throw DimensionError("field 'h0' must have length m >= 1");
    if (d_ < 1) throw DimensionError("field 'H' must have d >= 1 columns");
    expect_shape(T, m_, n_, "T");
    expect_shape(W, m_, r_, "W");
    expect_shape(H, m_, d_, "H");
    for (const auto& [M, name] : {std::pair<const Eigen::MatrixXd*, const char*>{&T, "T"},
                                  {&W, "W"}, {&H, "H"}}) {
        expect_finite(*M, name);
    }
    expect_finite(c, "c");
    expect_finite(q, "q");
    expect_finite(h0, "h0");
    support.validate(static_cast<int>(d_));
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != d_) {
        throw DimensionError("field 'names' has " + std::to_string(names.size()) +
                             " entries, expected d = " + std::to_string(d_));
    }
}

bool operator==(const SupportPolyhedron& a, const SupportPolyhedron& b) {
    return a.G.rows() == b.G.rows() && a.G.cols() == b.G.cols() && a.G == b.G && a.g0 == b.g0;
}

bool operator==(const TwoStageProblem& a, const TwoStageProblem& b) {
    auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    return same(a.c, b.c) && same(a.q, b.q) && same(a.T, b.T) && same(a.W, b.W) &&
           same(a.h0, b.h0) && same(a.H, b.H) && a.support == b.support && a.names == b.names;
}

void validate_samples(const SampleSet& samples, const SupportPolyhedron& support, double tol) {
    if (samples.points.empty()) throw DimensionError("sample set is empty");
    const int d = support.dim();
    for (std::size_t i = 0; i < samples.points.size(); ++i) {
        const auto& p = samples.points[i];
        if (p.size() != d) {
            throw DimensionError("sample " + std::to_string(i) + " has length " +
                                 std::to_string(p.size()) + ", expected d = " + std::to_string(d));
        }
        if (!p.allFinite()) throw ParseError("sample " + std::to_string(i) + " is not finite");
        if (!support.contains(p, tol)) {
            const Eigen::VectorXd slack = support.G * p - support.g0;
            Eigen::Index row = 0;
            const double worst = slack.minCoeff(&row);
            std::ostringstream msg;
            msg << "sample " << i << " violates support row " << row << " by " << -worst;
            throw SupportViolation(msg.str());
        }
    }
}

void RobustConfig::validate() const {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
        throw ContractViolation("radius must be finite and nonnegative");
    }
}

} // namespace sro

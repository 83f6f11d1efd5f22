#include "sro/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace sro {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    out << text;
}

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
    return *it;
}

int require_int(const json& obj, const char* key) {
    const auto& v = require(obj, key);
    if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

Eigen::VectorXd to_vector(const json& v, const char* key) {
    if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ParseError(std::string("field '") + key + "' has a non-numeric entry");
        out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
}

// An empty array yields a rows x cols matrix only when rows == 0; `cols` is
// the expected width used for that case.
Eigen::MatrixXd to_matrix(const json& v, const char* key, Eigen::Index empty_cols) {
    if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array of rows");
    if (v.empty()) return Eigen::MatrixXd(0, empty_cols);
    const auto rows = static_cast<Eigen::Index>(v.size());
    if (!v[0].is_array()) throw ParseError(std::string("field '") + key + "' must be an array of rows");
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = v[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw DimensionError(std::string("field '") + key + "' has ragged rows");
        }
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto& e = row[static_cast<std::size_t>(j)];
            if (!e.is_number()) throw ParseError(std::string("field '") + key + "' has a non-numeric entry");
            out(i, j) = e.get<double>();
        }
    }
    return out;
}

json from_vector(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json from_matrix(const Eigen::MatrixXd& M) {
    json out = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

void check_declared(int declared, Eigen::Index actual, const char* dim, const char* field) {
    if (declared != actual) {
        std::ostringstream msg;
        msg << "field '" << field << "' implies " << dim << " = " << actual << " but '" << dim
            << "' = " << declared;
        throw DimensionError(msg.str());
    }
}

bool parse_number(std::string_view cell, double& out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, out);
    return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

TwoStageProblem parse_problem(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed instance JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("instance JSON must be an object");

    const int n = require_int(doc, "n");
    const int r = require_int(doc, "r");
    const int m = require_int(doc, "m");
    const int d = require_int(doc, "d");
    if (n < 0 || r < 1 || m < 1 || d < 1) {
        throw DimensionError("dimensions must satisfy n >= 0, r >= 1, m >= 1, d >= 1");
    }

    TwoStageProblem p;
    p.c = to_vector(require(doc, "c"), "c");
    p.q = to_vector(require(doc, "q"), "q");
    p.T = to_matrix(require(doc, "T"), "T", n);
    p.W = to_matrix(require(doc, "W"), "W", r);
    p.h0 = to_vector(require(doc, "h0"), "h0");
    p.H = to_matrix(require(doc, "H"), "H", d);
    p.support.G = to_matrix(require(doc, "G"), "G", d);
    p.support.g0 = to_vector(require(doc, "g0"), "g0");

    // n = 0 makes T an m x 0 matrix, which JSON writes as m empty rows.
    if (n == 0 && p.T.rows() == m) p.T.resize(m, 0);

    check_declared(n, p.c.size(), "n", "c");
    check_declared(r, p.q.size(), "r", "q");
    check_declared(m, p.h0.size(), "m", "h0");
    check_declared(m, p.T.rows(), "m", "T");
    check_declared(n, p.T.cols(), "n", "T");
    check_declared(m, p.W.rows(), "m", "W");
    check_declared(r, p.W.cols(), "r", "W");
    check_declared(m, p.H.rows(), "m", "H");
    check_declared(d, p.H.cols(), "d", "H");
    if (p.support.G.rows() > 0) check_declared(d, p.support.G.cols(), "d", "G");
    check_declared(static_cast<int>(p.support.G.rows()), p.support.g0.size(), "G rows", "g0");

    if (auto it = doc.find("names"); it != doc.end() && !it->is_null()) {
        if (!it->is_array()) throw ParseError("field 'names' must be an array of strings");
        for (const auto& s : *it) p.names.push_back(s.get<std::string>());
    }
    p.validate();
    return p;
}

TwoStageProblem load_problem(const std::filesystem::path& path) {
    return parse_problem(read_file(path));
}

std::string serialize_problem(const TwoStageProblem& p) {
    json doc;
    doc["n"] = p.n();
    doc["r"] = p.r();
    doc["m"] = p.m();
    doc["d"] = p.d();
    doc["c"] = from_vector(p.c);
    doc["q"] = from_vector(p.q);
    doc["T"] = from_matrix(p.T);
    doc["W"] = from_matrix(p.W);
    doc["h0"] = from_vector(p.h0);
    doc["H"] = from_matrix(p.H);
    doc["G"] = from_matrix(p.support.G);
    doc["g0"] = from_vector(p.support.g0);
    if (!p.names.empty()) doc["names"] = p.names;
    return doc.dump(1);
}

void save_problem(const TwoStageProblem& problem, const std::filesystem::path& path) {
    write_file(path, serialize_problem(problem) + "\n");
}

SampleSet parse_samples(std::istream& in, std::string source) {
    SampleSet set;
    set.source = std::move(source);
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto cells = split_csv(line);
        Eigen::VectorXd point(static_cast<Eigen::Index>(cells.size()));
        bool numeric = true;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            double v = 0.0;
            if (!parse_number(cells[k], v)) {
                numeric = false;
                break;
            }
            point(static_cast<Eigen::Index>(k)) = v;
        }
        if (!numeric) {
            if (set.points.empty() && width == 0) {
                width = cells.size(); // header
                continue;
            }
            throw ParseError("non-numeric sample at line " + std::to_string(lineno));
        }
        if (width == 0) width = cells.size();
        if (cells.size() != width) {
            throw DimensionError("sample at line " + std::to_string(lineno) + " has " +
                                 std::to_string(cells.size()) + " columns, expected " +
                                 std::to_string(width));
        }
        set.points.push_back(std::move(point));
    }
    if (set.points.empty()) throw ParseError("sample file '" + set.source + "' has no samples");
    return set;
}

SampleSet load_samples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return parse_samples(in, path.string());
}

SampleSet load_samples(const std::filesystem::path& path, const TwoStageProblem& problem, double tol) {
    auto set = load_samples(path);
    validate_samples(set, problem.support, tol);
    return set;
}

void write_samples(const SampleSet& samples, std::ostream& out) {
    const int d = samples.dim();
    for (int k = 0; k < d; ++k) out << (k ? "," : "") << "xi" << k + 1;
    out << '\n';
    for (const auto& p : samples.points) {
        for (Eigen::Index k = 0; k < p.size(); ++k) out << (k ? "," : "") << format_double(p(k));
        out << '\n';
    }
}

void save_samples(const SampleSet& samples, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    write_samples(samples, out);
}

std::string serialize_solution(const PolicySolution& s) {
    json doc;
    doc["method"] = to_string(s.method);
    doc["norm"] = to_string(s.norm);
    doc["radius"] = s.radius;
    doc["objective"] = s.objective;
    doc["x"] = from_vector(s.x);
    json policies = json::array();
    for (const auto& p : s.policies) {
        policies.push_back({{"y0", from_vector(p.y0)}, {"Y", from_matrix(p.Y)}});
    }
    doc["policies"] = std::move(policies);
    json centers = json::array();
    for (const auto& c : s.centers) centers.push_back(from_vector(c));
    doc["centers"] = std::move(centers);
    return doc.dump(1);
}

PolicySolution parse_solution(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed solution JSON: ") + e.what());
    }
    PolicySolution s;
    s.method = parse_method(require(doc, "method").get<std::string>());
    s.norm = parse_norm(require(doc, "norm").get<std::string>());
    s.radius = require(doc, "radius").get<double>();
    s.objective = require(doc, "objective").get<double>();
    s.x = to_vector(require(doc, "x"), "x");
    for (const auto& p : require(doc, "policies")) {
        AffinePolicy pol;
        pol.y0 = to_vector(require(p, "y0"), "y0");
        pol.Y = to_matrix(require(p, "Y"), "Y", 0);
        s.policies.push_back(std::move(pol));
    }
    if (auto it = doc.find("centers"); it != doc.end()) {
        for (const auto& c : *it) s.centers.push_back(to_vector(c, "centers"));
    }
    return s;
}

PolicySolution load_solution(const std::filesystem::path& path) {
    return parse_solution(read_file(path));
}

} // namespace sro

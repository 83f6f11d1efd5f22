#pragma once

#include "sro/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sro {

/// Reads an instance in the JSON schema
///   {"n","r","m","d","c","q","T","W","h0","H","G","g0"[,"names"]}
/// and validates it. Throws ParseError or DimensionError.
TwoStageProblem load_problem(const std::filesystem::path& path);
TwoStageProblem parse_problem(const std::string& json_text);

std::string serialize_problem(const TwoStageProblem& problem);
void save_problem(const TwoStageProblem& problem, const std::filesystem::path& path);

/// CSV with one sample per row; a non-numeric first row is treated as a header.
SampleSet load_samples(const std::filesystem::path& path);
SampleSet parse_samples(std::istream& in, std::string source);

/// Loads and validates against the support polyhedron of `problem`.
SampleSet load_samples(const std::filesystem::path& path, const TwoStageProblem& problem,
                       double tol = kDefaultSupportTol);

void write_samples(const SampleSet& samples, std::ostream& out);
void save_samples(const SampleSet& samples, const std::filesystem::path& path);

std::string serialize_solution(const PolicySolution& solution);
PolicySolution parse_solution(const std::string& json_text);
PolicySolution load_solution(const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

} // namespace sro

#pragma once

#include "sro/model.hpp"

#include <cstdint>
#include <string>

namespace sro {

enum class DistributionKind { Uniform, Normal, Lognormal };

DistributionKind parse_distribution(std::string_view text);
std::string to_string(DistributionKind kind);

/// Componentwise independent distribution, rejected onto `truncation`.
/// Uniform components live on [mean - sqrt(3) std, mean + sqrt(3) std];
/// lognormal components match mean and std before truncation.
struct DistributionSpec {
    DistributionKind kind = DistributionKind::Uniform;
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
    SupportPolyhedron truncation;
    std::uint64_t seed = 0;

    int dim() const { return static_cast<int>(mean.size()); }
    /// Throws ContractViolation on nonpositive std, mismatched lengths, or a
    /// truncation set that excludes the mean.
    void validate() const;
};

struct GeneratedInstance {
    TwoStageProblem problem;
    DistributionSpec distribution;
};

/// Capacitated network inventory: n locations at standard 2D Gaussian
/// positions, transshipment cost equal to Euclidean distance, unit holding
/// cost, capacity K. Demand support is [0, K]^n; samples are additionally
/// truncated to sum(xi) <= sqrt(n) K.
GeneratedInstance gen_inventory(int n, double K, std::uint64_t seed,
                                DistributionKind kind = DistributionKind::Uniform);

/// Appointment scheduling with n patients and overtime cost c. Recourse is
/// the waiting time of patients 2..n and the overtime (the first patient
/// never waits). Support is the nonnegative orthant.
GeneratedInstance gen_scheduling(int n, double c, std::uint64_t seed,
                                 DistributionKind kind = DistributionKind::Uniform);

/// Waiting-time recursion for the scheduling instance: sum of waits plus c
/// times overtime.
double scheduling_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, double c);

/// min x s.t. x >= zeta for zeta in [0, 2].
TwoStageProblem gen_example3();

enum class ClosedFormMethod { SAA, SRO, Feasible };

/// Closed-form optimal values of the one-dimensional coverage instance.
double closed_form_example3(const SampleSet& samples, double radius, ClosedFormMethod method);

/// |zeta1 - zeta2| system over the unit infinity-ball with a dummy first-stage
/// variable in [0, 1].
TwoStageProblem gen_example2();

/// i.i.d. draws; point k uses its own counter stream so the result does not
/// depend on thread count. Throws std::runtime_error after `max_attempts`
/// rejected draws for one point.
SampleSet sample(const DistributionSpec& spec, std::size_t count, std::uint32_t stream,
                 std::size_t max_attempts = 1'000'000);

/// kappa * N^(-exponent).
double radius_schedule(double kappa, double exponent, int N);

struct RadiusSchedule {
    double kappa = 0.0;
    double exponent = 0.0;

    double operator()(int N) const { return radius_schedule(kappa, exponent, N); }
    /// "kappa=<k>,exp=<e>"; exp also accepts a fraction such as 1/10.
    static RadiusSchedule parse(std::string_view text);
};

} // namespace sro

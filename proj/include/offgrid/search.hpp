#ifndef OFFGRID_SEARCH_HPP
#define OFFGRID_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "offgrid/dataset.hpp"
#include "offgrid/fastexp.hpp"
#include "offgrid/kernel.hpp"
#include "offgrid/kkm.hpp"
#include "offgrid/quality.hpp"

namespace offgrid::search {

struct SigmaBound {
    double value = 0.0;
    /// Set when duplicate points force the bound to zero.
    bool degenerate = false;
};

/// Bandwidth at or below which a single assignment pass moves nothing:
/// min off-diagonal squared distance divided by ln(3n).
SigmaBound sigma_lower_bound(const data::SquaredDistanceMatrix& dm);

enum class RestrictionPolicy { kFull, kMovers, kMarginTopFraction };

RestrictionPolicy parse_restriction_policy(const std::string& text, double* fraction);

struct CriticalSearchOptions {
    int depth = 10;
    RestrictionPolicy policy = RestrictionPolicy::kFull;
    double margin_fraction = 0.25;
    /// Run a full probe next to every restricted probe and count
    /// disagreements on the changed flag.
    bool validate_restriction = false;
    /// Probe the input matrix first and fail if the partition is not a
    /// fixed point under it.
    bool verify_converged = true;
    bool record_step_times = false;
};

struct CriticalSearchResult {
    bool found = false;
    /// Last changing exponent e of the walk (final walk value when not
    /// found); sigma_next = bandwidth / e.
    fastexp::DyadicExponent exponent;
    double sigma_next = 0.0;
    kernel::KernelMatrix K_next;
    std::vector<std::size_t> movers;
    std::size_t probes = 0;
    std::size_t sqrt_ops = 0;
    std::size_t hadamard_ops = 0;
    std::size_t validation_disagreements = 0;
    std::vector<double> step_ms;
};

/// Dyadic binary search for the critical bandwidth: the candidate C walks
/// the exponent e_j = e_{j-1} +- 2^{-j} (starting from e_0 = 1, first move
/// down) using one element-wise square root, one Hadamard product or
/// quotient, and one probe per step. A changing probe raises the exponent
/// (pulling sigma' back toward the critical value from above); an
/// unchanged probe lowers it. After the walk, the last changing exponent
/// and its next dyadic neighbor bracket the critical exponent.
CriticalSearchResult critical_search(const kernel::KernelMatrix& K,
                                     const kkm::Partition& p,
                                     const CriticalSearchOptions& opts = {});

struct TraceStep {
    double sigma = 0.0;
    kkm::Partition partition;
    std::optional<double> nmi;
    double cnnc = 0.0;
    std::size_t empty_clusters = 0;
    std::vector<double> per_cluster_nnc;
    std::size_t kkm_iterations = 0;
    std::size_t probe_count = 0;
    double wall_time_ms = 0.0;
};

/// Ordered record of the bandwidths adopted by a search strategy;
/// sigma is strictly increasing across the steps of one trace.
struct SearchTrace {
    int depth = 0;
    std::vector<TraceStep> steps;

    const TraceStep* best_by_cnnc() const;
    std::optional<double> best_nmi() const;
};

struct DriverOptions {
    std::size_t k = 2;
    double sigma0 = 0.0;  // required, > 0
    int depth = 1;
    std::size_t max_steps = 100;
    /// 0 selects the default cap: 1000 x max squared pairwise distance.
    double sigma_cap = 0.0;
    RestrictionPolicy policy = RestrictionPolicy::kFull;
    double margin_fraction = 0.25;
    std::size_t kkm_max_iters = 300;
};

/// Converges kernel k-means at sigma0 from a seeded random partition, then
/// alternates critical_search and kkm_run, recording every adopted sigma
/// with its partition and quality scores. Stops when no critical value is
/// found, the cap is exceeded, or max_steps is reached.
SearchTrace offgrid_driver(const data::SquaredDistanceMatrix& dm,
                           const DriverOptions& opts, std::uint64_t seed,
                           const std::vector<int>* labels = nullptr,
                           const quality::NeighborOrdering* nbr = nullptr);

/// Driver loop continuing from an already-converged state; records the
/// starting sigma as its first step.
SearchTrace drive_from(const data::SquaredDistanceMatrix& dm,
                       const kernel::KernelMatrix& K0, const kkm::Partition& p0,
                       const DriverOptions& opts,
                       const std::vector<int>* labels = nullptr,
                       const quality::NeighborOrdering* nbr = nullptr);

struct HierarchicalResult {
    std::vector<SearchTrace> stages;

    double best_cnnc() const;
    std::optional<double> best_nmi() const;
};

/// Coarse-to-fine driver: each stage after the first restarts from the
/// better of the two best-c-NNC bandwidths of the previous stage and caps
/// the search at the other one, with the next depth in the schedule.
HierarchicalResult hierarchical_search(const data::SquaredDistanceMatrix& dm,
                                       const DriverOptions& base,
                                       std::span<const int> depth_schedule,
                                       std::uint64_t seed,
                                       const std::vector<int>* labels = nullptr,
                                       const quality::NeighborOrdering* nbr = nullptr);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iters = 100;
    /// 0 selects 1.1 x the current bandwidth.
    double sigma_start = 0.0;
    /// 0 selects 1e6 x the current bandwidth.
    double sigma_cap = 0.0;
};

struct NewtonResult {
    bool converged = false;
    double sigma_root = 0.0;
    int iterations = 0;
    std::string failure;
};

/// Proximity gap g(x, sigma') between the point's own cluster and the
/// other cluster of a 2-partition, evaluated at a new bandwidth through
/// the exponent sigma/sigma'.
double newton_g(const kernel::KernelMatrix& K, const kkm::Partition& p,
                std::size_t x, double sigma_prime);
/// Analytic derivative of g with respect to sigma'.
double newton_dg(const kernel::KernelMatrix& K, const kkm::Partition& p,
                 std::size_t x, double sigma_prime);

/// Newton iteration on g(x, sigma') = 0 for sigma' > sigma. Flat
/// derivatives, iterates leaving (sigma, cap), and exhausted iterations
/// all report divergence.
NewtonResult newton_critical(const kernel::KernelMatrix& K, const kkm::Partition& p,
                             std::size_t x, const NewtonOptions& opts = {});

struct NewtonInstanceResult {
    bool found = false;
    double sigma_crit = 0.0;
    std::size_t argmin_point = 0;
    std::size_t converged_points = 0;
    std::size_t diverged_points = 0;
};

/// Minimum over points of their Newton roots; the per-instance critical
/// value cross-check.
NewtonInstanceResult newton_instance(const kernel::KernelMatrix& K,
                                     const kkm::Partition& p,
                                     const NewtonOptions& opts = {});

struct BisectOptions {
    double precision = 1e-3;  // absolute width of the final bracket
    bool record_step_times = false;
};

struct BisectResult {
    bool found = false;
    double sigma_crit = 0.0;  // midpoint of the final bracket
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;  // guaranteed-changing upper end
    std::size_t probes = 0;
    std::vector<double> step_ms;
};

/// Classic bisection on sigma, rebuilding the candidate kernel by exact
/// element-wise exponentiation for every probe.
BisectResult binary_search_critical(const data::SquaredDistanceMatrix& dm,
                                    double sigma, const kkm::Partition& p,
                                    double sigma_hi,
                                    const BisectOptions& opts = {});

struct MknnResult {
    std::vector<double> sigmas;
    std::size_t dropped = 0;  // zero values from duplicate points
};

/// Bandwidths from the mean distance to the k-th nearest neighbor for
/// k = 1..floor(2(log n + 1)), converted from the exp(-d^2/(2s^2))
/// convention as sigma = 2 s^2. Natural log by default.
MknnResult mknn_sigmas(const data::SquaredDistanceMatrix& dm, bool log_base2 = false);

/// The 13 grid-search values 1e-6 .. 1e6.
std::vector<double> grid_sigmas();

}  // namespace offgrid::search

#endif  // OFFGRID_SEARCH_HPP

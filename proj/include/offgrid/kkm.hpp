#ifndef OFFGRID_KKM_HPP
#define OFFGRID_KKM_HPP

#include <cstddef>
#include <vector>

#include "offgrid/kernel.hpp"
#include "offgrid/rng.hpp"

namespace offgrid::kkm {

/// Assignment of n points to k clusters. Initial partitions have every
/// cluster nonempty; partitions produced by iteration may contain empty
/// clusters, which stay empty and keep counting toward k.
struct Partition {
    std::vector<int> assignment;
    std::size_t k = 0;
    std::vector<std::size_t> sizes;

    static Partition from_assignment(std::vector<int> assignment, std::size_t k);

    std::size_t n() const { return assignment.size(); }
    std::size_t empty_clusters() const;

    bool operator==(const Partition& other) const = default;
};

/// Uniform random assignment with all k clusters nonempty (violating draws
/// are resampled).
Partition random_partition(std::size_t n, std::size_t k, Rng& rng);

/// Per-point cluster proximities:
///   cross(x,c) = sum_{y in pi_c} K(x,y)
///   self(c)    = sum_{y,z in pi_c} K(y,z)
///   delta(x,c) = 2 cross(x,c)/n_c - self(c)/n_c^2
/// Empty clusters carry delta = -inf so they are never selected.
struct ProximityTable {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<double> cross;      // n x k
    std::vector<double> self_sums;  // k
    std::vector<double> delta;      // n x k

    double delta_at(std::size_t x, std::size_t c) const { return delta[x * k + c]; }
};

ProximityTable proximity_table(const kernel::KernelMatrix& K, const Partition& p);

struct AssignResult {
    Partition partition;
    std::size_t reassigned = 0;
};

/// One synchronous assignment pass: every point moves to the cluster
/// maximizing delta computed from the old partition. Ties go to the
/// point's current cluster, then to the lowest cluster id.
AssignResult assign_step(const kernel::KernelMatrix& K, const Partition& p);

struct KkmResult {
    Partition partition;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objectives;  // clustering objective after each pass
};

/// Lloyd iteration in feature space until no reassignments or max_iters.
/// The objective is checked for monotone non-increase each pass.
KkmResult kkm_run(const kernel::KernelMatrix& K, const Partition& p0,
                  std::size_t max_iters = 300);

/// Feature-space k-means objective computed through kernel sums.
double objective(const kernel::KernelMatrix& K, const Partition& p);

struct ProbeResult {
    bool changed = false;
    std::vector<std::size_t> movers;
};

/// Single assignment pass restricted to the given points (all points when
/// absent), answering whether the candidate kernel would move anything.
/// The partition is expected to be a fixed point under some earlier kernel.
ProbeResult probe_changes(const kernel::KernelMatrix& K_candidate, const Partition& p,
                          const std::vector<std::size_t>* restriction = nullptr);

/// Points ordered by ascending assignment margin
/// delta(x, c(x)) - max_{c != c(x)} delta(x, c); k = 1 yields an empty list.
std::vector<std::size_t> margin_ranking(const ProximityTable& table, const Partition& p);

}  // namespace offgrid::kkm

#endif  // OFFGRID_KKM_HPP

#ifndef OFFGRID_QUALITY_HPP
#define OFFGRID_QUALITY_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "offgrid/dataset.hpp"
#include "offgrid/kkm.hpp"

namespace offgrid::quality {

/// For every point, the other points sorted by ascending distance
/// (ties broken by ascending index). Row i holds n-1 neighbor indices.
struct NeighborOrdering {
    std::size_t n = 0;
    std::vector<std::uint32_t> order;  // n x (n-1)

    std::uint32_t neighbor(std::size_t i, std::size_t rank) const {
        return order[i * (n - 1) + rank];
    }
};

NeighborOrdering neighbor_ordering(const data::SquaredDistanceMatrix& dm);

/// Normalized mutual information 2I/(H+H) with natural logs.
/// Degenerate inputs: one constant labeling against a non-constant one
/// scores 0; two constant labelings describe the same single-block
/// partition and score 1.
double nmi(const std::vector<int>& y, const std::vector<int>& z);

/// Fraction of the c nearest neighbors of point i lying in a different
/// cluster.
double nnc(std::size_t i, std::size_t c, const kkm::Partition& p,
           const NeighborOrdering& nbr);

/// Harmonically weighted neighbor disagreement of one cluster, normalized
/// by C = ln(n-1) + gamma + 1/(2n-2) so the value stays in [0,1].
/// Empty clusters score 0.
double nnc_cluster(std::size_t cluster, const kkm::Partition& p,
                   const NeighborOrdering& nbr);

struct QualityReport {
    std::optional<double> nmi;
    double cnnc = 0.0;
    std::size_t empty_clusters = 0;
    std::vector<double> per_cluster_nnc;
};

/// c-NNC(P) = (empty clusters + sum of per-cluster NNC) / k. Depends only
/// on the distance ordering and the partition, never on a bandwidth.
QualityReport cnnc(const kkm::Partition& p, const NeighborOrdering& nbr);
QualityReport cnnc(const kkm::Partition& p, const data::SquaredDistanceMatrix& dm);

}  // namespace offgrid::quality

#endif  // OFFGRID_QUALITY_HPP

#include "offgrid/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace offgrid::quality {

namespace {

constexpr double kEulerMascheroni = 0.5772156649015329;

double harmonic_bound(std::size_t n) {
    return std::log(static_cast<double>(n - 1)) + kEulerMascheroni +
           1.0 / (2.0 * static_cast<double>(n) - 2.0);
}

}  // namespace

NeighborOrdering neighbor_ordering(const data::SquaredDistanceMatrix& dm) {
    if (dm.n < 2) {
        throw std::invalid_argument("neighbor ordering needs at least 2 points");
    }
    NeighborOrdering nbr;
    nbr.n = dm.n;
    nbr.order.resize(dm.n * (dm.n - 1));
    const auto nn = static_cast<std::int64_t>(dm.n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < nn; ++i) {
        auto* row = nbr.order.data() + i * (nn - 1);
        std::size_t w = 0;
        for (std::int64_t j = 0; j < nn; ++j) {
            if (j != i) row[w++] = static_cast<std::uint32_t>(j);
        }
        const double* dist = dm.entries.data() + i * nn;
        std::sort(row, row + (nn - 1), [dist](std::uint32_t a, std::uint32_t b) {
            if (dist[a] != dist[b]) return dist[a] < dist[b];
            return a < b;
        });
    }
    return nbr;
}

double nmi(const std::vector<int>& y, const std::vector<int>& z) {
    if (y.size() != z.size()) {
        throw std::invalid_argument("label vectors differ in length");
    }
    if (y.empty()) {
        throw std::invalid_argument("label vectors are empty");
    }
    const auto n = static_cast<double>(y.size());

    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> py;
    std::map<int, double> pz;
    for (std::size_t i = 0; i < y.size(); ++i) {
        joint[{y[i], z[i]}] += 1.0;
        py[y[i]] += 1.0;
        pz[z[i]] += 1.0;
    }

    double hy = 0.0;
    for (const auto& entry : py) {
        const double p = entry.second / n;
        hy -= p * std::log(p);
    }
    double hz = 0.0;
    for (const auto& entry : pz) {
        const double p = entry.second / n;
        hz -= p * std::log(p);
    }

    if (hy == 0.0 && hz == 0.0) return 1.0;  // both trivial, same partition
    if (hy == 0.0 || hz == 0.0) return 0.0;

    double info = 0.0;
    for (const auto& [pair, count] : joint) {
        const double pxy = count / n;
        const double marg = (py[pair.first] / n) * (pz[pair.second] / n);
        info += pxy * std::log(pxy / marg);
    }
    return std::clamp(2.0 * info / (hy + hz), 0.0, 1.0);
}

double nnc(std::size_t i, std::size_t c, const kkm::Partition& p,
           const NeighborOrdering& nbr) {
    if (c < 1 || c > nbr.n - 1) {
        throw std::invalid_argument("neighbor count out of range");
    }
    const int own = p.assignment[i];
    std::size_t foreign = 0;
    for (std::size_t j = 0; j < c; ++j) {
        foreign += (p.assignment[nbr.neighbor(i, j)] != own);
    }
    return static_cast<double>(foreign) / static_cast<double>(c);
}

double nnc_cluster(std::size_t cluster, const kkm::Partition& p,
                   const NeighborOrdering& nbr) {
    const std::size_t n = nbr.n;
    if (n < 2) {
        throw std::invalid_argument("need at least 2 points");
    }
    if (p.sizes[cluster] == 0) return 0.0;

    // sum_{c=1}^{n-1} NNC(i,c)/c via prefix counts of foreign neighbors.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(p.assignment[i]) != cluster) continue;
        double point_sum = 0.0;
        std::size_t foreign = 0;
        for (std::size_t c = 1; c <= n - 1; ++c) {
            foreign += (p.assignment[nbr.neighbor(i, c - 1)] != p.assignment[i]);
            const auto cd = static_cast<double>(c);
            point_sum += static_cast<double>(foreign) / (cd * cd);
        }
        total += point_sum;
    }
    const double scale =
        harmonic_bound(n) * std::max<double>(1.0, static_cast<double>(p.sizes[cluster]));
    return total / scale;
}

QualityReport cnnc(const kkm::Partition& p, const NeighborOrdering& nbr) {
    if (p.k < 1) {
        throw std::invalid_argument("partition must request at least 1 cluster");
    }
    QualityReport report;
    report.empty_clusters = p.empty_clusters();
    report.per_cluster_nnc.resize(p.k);
    double sum = 0.0;
    for (std::size_t c = 0; c < p.k; ++c) {
        report.per_cluster_nnc[c] = nnc_cluster(c, p, nbr);
        sum += report.per_cluster_nnc[c];
    }
    report.cnnc = (static_cast<double>(report.empty_clusters) + sum) /
                  static_cast<double>(p.k);
    return report;
}

QualityReport cnnc(const kkm::Partition& p, const data::SquaredDistanceMatrix& dm) {
    return cnnc(p, neighbor_ordering(dm));
}

}  // namespace offgrid::quality

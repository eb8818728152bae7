#include "offgrid/kkm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "offgrid/kernels.hpp"

namespace offgrid::kkm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_dims(const kernel::KernelMatrix& K, const Partition& p) {
    if (K.size() != p.n()) {
        throw std::invalid_argument("partition length does not match kernel size");
    }
}

/// delta row for one point from its cross sums and the shared self terms.
void fill_delta_row(const double* cross_row, const std::vector<double>& self_over_sq,
                    const std::vector<std::size_t>& sizes, std::size_t k, double* out) {
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) {
            out[c] = kNegInf;
        } else {
            out[c] = 2.0 * cross_row[c] / static_cast<double>(sizes[c]) - self_over_sq[c];
        }
    }
}

/// argmax over clusters with ties resolved toward `current`, then lowest id.
int pick_cluster(const double* delta_row, std::size_t k, int current) {
    double best = delta_row[current];
    int best_c = current;
    for (std::size_t c = 0; c < k; ++c) {
        if (delta_row[c] > best) {
            best = delta_row[c];
            best_c = static_cast<int>(c);
        }
    }
    return best_c;
}

std::vector<double> self_over_squared(const ProximityTable& table,
                                      const Partition& p) {
    std::vector<double> out(table.k, 0.0);
    for (std::size_t c = 0; c < table.k; ++c) {
        if (p.sizes[c] > 0) {
            const auto nc = static_cast<double>(p.sizes[c]);
            out[c] = table.self_sums[c] / (nc * nc);
        }
    }
    return out;
}

}  // namespace

Partition Partition::from_assignment(std::vector<int> assignment, std::size_t k) {
    Partition p;
    p.k = k;
    p.sizes.assign(k, 0);
    for (int c : assignment) {
        if (c < 0 || static_cast<std::size_t>(c) >= k) {
            throw std::invalid_argument("cluster id out of range");
        }
        ++p.sizes[static_cast<std::size_t>(c)];
    }
    p.assignment = std::move(assignment);
    return p;
}

std::size_t Partition::empty_clusters() const {
    std::size_t count = 0;
    for (std::size_t s : sizes) count += (s == 0);
    return count;
}

Partition random_partition(std::size_t n, std::size_t k, Rng& rng) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("need 1 <= k <= n for an initial partition");
    }
    std::vector<int> assignment(n);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            assignment[i] = static_cast<int>(rng.uniform_int(k));
            ++sizes[static_cast<std::size_t>(assignment[i])];
        }
        if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) == sizes.end()) {
            return Partition::from_assignment(std::move(assignment), k);
        }
    }
    throw std::runtime_error("failed to draw a nonempty initial partition");
}

ProximityTable proximity_table(const kernel::KernelMatrix& K, const Partition& p) {
    check_dims(K, p);
    ProximityTable table;
    table.n = p.n();
    table.k = p.k;
    table.cross.resize(table.n * table.k);
    table.self_sums.assign(table.k, 0.0);
    table.delta.resize(table.n * table.k);

    kernels::proximity_cross(K.entries().data(), table.n, p.assignment.data(),
                             table.k, table.cross.data());

    // self(c) = sum over members (ascending) of their cross sums; matches
    // the double-sum over ordered pairs in a fixed order.
    for (std::size_t x = 0; x < table.n; ++x) {
        const auto c = static_cast<std::size_t>(p.assignment[x]);
        table.self_sums[c] += table.cross[x * table.k + c];
    }

    const auto self_sq = self_over_squared(table, p);
    for (std::size_t x = 0; x < table.n; ++x) {
        fill_delta_row(table.cross.data() + x * table.k, self_sq, p.sizes, table.k,
                       table.delta.data() + x * table.k);
    }
    return table;
}

AssignResult assign_step(const kernel::KernelMatrix& K, const Partition& p) {
    const ProximityTable table = proximity_table(K, p);
    std::vector<int> next(p.n());
    std::size_t moved = 0;
    for (std::size_t x = 0; x < p.n(); ++x) {
        next[x] = pick_cluster(table.delta.data() + x * table.k, table.k,
                               p.assignment[x]);
        if (next[x] != p.assignment[x]) ++moved;
    }
    return AssignResult{Partition::from_assignment(std::move(next), p.k), moved};
}

double objective(const kernel::KernelMatrix& K, const Partition& p) {
    const ProximityTable table = proximity_table(K, p);
    double obj = 0.0;
    for (std::size_t x = 0; x < p.n(); ++x) {
        const auto c = static_cast<std::size_t>(p.assignment[x]);
        obj += K(x, x) - table.delta_at(x, c);
    }
    return obj;
}

namespace {

double objective_from_table(const kernel::KernelMatrix& K, const ProximityTable& table,
                            const Partition& p) {
    double obj = 0.0;
    for (std::size_t x = 0; x < p.n(); ++x) {
        const auto c = static_cast<std::size_t>(p.assignment[x]);
        obj += K(x, x) - table.delta_at(x, c);
    }
    return obj;
}

}  // namespace

KkmResult kkm_run(const kernel::KernelMatrix& K, const Partition& p0,
                  std::size_t max_iters) {
    check_dims(K, p0);
    if (max_iters < 1) {
        throw std::invalid_argument("max_iters must be at least 1");
    }
    KkmResult result;
    result.partition = p0;
    ProximityTable table = proximity_table(K, p0);
    for (std::size_t it = 0; it < max_iters; ++it) {
        std::vector<int> next(p0.n());
        std::size_t moved = 0;
        for (std::size_t x = 0; x < p0.n(); ++x) {
            next[x] = pick_cluster(table.delta.data() + x * table.k, table.k,
                                   result.partition.assignment[x]);
            if (next[x] != result.partition.assignment[x]) ++moved;
        }
        ++result.iterations;
        result.partition = Partition::from_assignment(std::move(next), p0.k);
        table = proximity_table(K, result.partition);
        result.objectives.push_back(objective_from_table(K, table, result.partition));
        if (result.objectives.size() >= 2) {
            const double prev = result.objectives[result.objectives.size() - 2];
            const double curr = result.objectives.back();
            if (curr > prev + 1e-9 * (1.0 + std::abs(prev))) {
                throw std::runtime_error("clustering objective increased between passes");
            }
        }
        if (moved == 0) {
            result.converged = true;
            break;
        }
    }
    return result;
}

ProbeResult probe_changes(const kernel::KernelMatrix& K_candidate, const Partition& p,
                          const std::vector<std::size_t>* restriction) {
    check_dims(K_candidate, p);
    ProbeResult result;

    if (restriction == nullptr) {
        const ProximityTable table = proximity_table(K_candidate, p);
        for (std::size_t x = 0; x < p.n(); ++x) {
            const int pick = pick_cluster(table.delta.data() + x * table.k, table.k,
                                          p.assignment[x]);
            if (pick != p.assignment[x]) result.movers.push_back(x);
        }
        result.changed = !result.movers.empty();
        return result;
    }

    const std::size_t n = p.n();
    const std::size_t k = p.k;

    // Cross sums only for the restricted rows.
    std::vector<double> cross(n * k, 0.0);
    kernels::proximity_cross_rows(K_candidate.entries().data(), n,
                                  p.assignment.data(), k, restriction->data(),
                                  restriction->size(), cross.data());

    // Cluster self sums over members only: summed per member row first,
    // then across members, the same shape as the full-table path.
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t y = 0; y < n; ++y) {
        members[static_cast<std::size_t>(p.assignment[y])].push_back(y);
    }
    std::vector<double> self_sq(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double total = 0.0;
        for (std::size_t y : members[c]) {
            double row = 0.0;
            for (std::size_t z : members[c]) row += K_candidate(y, z);
            total += row;
        }
        if (!members[c].empty()) {
            const auto nc = static_cast<double>(members[c].size());
            self_sq[c] = total / (nc * nc);
        }
    }

    std::vector<double> delta_row(k);
    for (std::size_t x : *restriction) {
        if (x >= n) {
            throw std::invalid_argument("restriction index out of range");
        }
        fill_delta_row(cross.data() + x * k, self_sq, p.sizes, k, delta_row.data());
        const int pick = pick_cluster(delta_row.data(), k, p.assignment[x]);
        if (pick != p.assignment[x]) result.movers.push_back(x);
    }
    std::sort(result.movers.begin(), result.movers.end());
    result.changed = !result.movers.empty();
    return result;
}

std::vector<std::size_t> margin_ranking(const ProximityTable& table,
                                        const Partition& p) {
    if (p.k < 2) return {};
    std::vector<double> margins(table.n);
    for (std::size_t x = 0; x < table.n; ++x) {
        const auto own = static_cast<std::size_t>(p.assignment[x]);
        double best_other = kNegInf;
        for (std::size_t c = 0; c < table.k; ++c) {
            if (c != own) best_other = std::max(best_other, table.delta_at(x, c));
        }
        margins[x] = table.delta_at(x, own) - best_other;
    }
    std::vector<std::size_t> order(table.n);
    for (std::size_t i = 0; i < table.n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (margins[a] != margins[b]) return margins[a] < margins[b];
        return a < b;
    });
    return order;
}

}  // namespace offgrid::kkm

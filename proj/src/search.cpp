#include "offgrid/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace offgrid::search {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double default_cap(const data::SquaredDistanceMatrix& dm) {
    return 1e3 * dm.max_entry();
}

}  // namespace

SigmaBound sigma_lower_bound(const data::SquaredDistanceMatrix& dm) {
    if (dm.n < 2) {
        throw std::invalid_argument("need at least 2 points");
    }
    const double d_min = dm.min_off_diagonal();
    if (d_min == 0.0) {
        return SigmaBound{0.0, true};
    }
    return SigmaBound{d_min / std::log(3.0 * static_cast<double>(dm.n)), false};
}

RestrictionPolicy parse_restriction_policy(const std::string& text, double* fraction) {
    if (text == "full") return RestrictionPolicy::kFull;
    if (text == "movers") return RestrictionPolicy::kMovers;
    if (text.rfind("margin", 0) == 0) {
        if (text.size() > 7 && text[6] == ':' && fraction != nullptr) {
            *fraction = std::stod(text.substr(7));
        }
        return RestrictionPolicy::kMarginTopFraction;
    }
    throw std::invalid_argument("unknown restriction policy '" + text + "'");
}

CriticalSearchResult critical_search(const kernel::KernelMatrix& K,
                                     const kkm::Partition& p,
                                     const CriticalSearchOptions& opts) {
    if (opts.depth < 1 || opts.depth > fastexp::kMaxDepth) {
        throw std::invalid_argument("depth out of range");
    }
    if (opts.verify_converged) {
        if (kkm::probe_changes(K, p).changed) {
            throw std::runtime_error(
                "partition is not converged under the input kernel");
        }
    }

    std::vector<std::size_t> restriction_storage;
    const std::vector<std::size_t>* restriction = nullptr;
    if (opts.policy == RestrictionPolicy::kMarginTopFraction) {
        const auto table = kkm::proximity_table(K, p);
        const auto ranking = kkm::margin_ranking(table, p);
        auto count = static_cast<std::size_t>(
            std::ceil(opts.margin_fraction * static_cast<double>(p.n())));
        count = std::min(count, ranking.size());
        restriction_storage.assign(ranking.begin(), ranking.begin() + count);
        restriction = &restriction_storage;
    }

    CriticalSearchResult res;
    kernel::KernelMatrix C = K.rebased();
    kernel::KernelMatrix R = C;  // root chain, same lineage as C
    const double sigma = C.bandwidth();

    std::vector<std::int8_t> signs;
    fastexp::Dyadic e = fastexp::Dyadic::one();
    bool last_changed = false;

    bool have_best = false;
    fastexp::Dyadic best_e;
    std::vector<std::int8_t> best_signs;
    kernel::KernelMatrix best_K;
    std::vector<std::size_t> best_movers;

    for (int j = 1; j <= opts.depth; ++j) {
        const auto t0 = Clock::now();
        R = elementwise_sqrt(R);
        ++res.sqrt_ops;
        if (last_changed) {
            C = hadamard(C, R);
            e = e + fastexp::Dyadic::pow2(j);
            signs.push_back(1);
        } else {
            C = hadamard_div(C, R);
            e = e - fastexp::Dyadic::pow2(j);
            signs.push_back(j == 1 ? 1 : -1);  // the first move is m_1 = +1
        }
        ++res.hadamard_ops;

        const auto probe = kkm::probe_changes(C, p, restriction);
        ++res.probes;
        if (opts.validate_restriction && restriction != nullptr) {
            const auto full = kkm::probe_changes(C, p);
            if (full.changed != probe.changed) ++res.validation_disagreements;
        }
        if (opts.policy == RestrictionPolicy::kMovers && restriction == nullptr &&
            probe.changed) {
            restriction_storage = probe.movers;
            restriction = &restriction_storage;
        }
        last_changed = probe.changed;
        if (probe.changed) {
            have_best = true;
            best_e = e;
            best_signs = signs;
            best_K = C;
            best_movers = probe.movers;
        }
        if (opts.record_step_times) res.step_ms.push_back(ms_since(t0));
    }

    res.found = have_best;
    if (have_best) {
        res.exponent = fastexp::DyadicExponent(std::move(best_signs), best_e);
        res.sigma_next = sigma / best_e.to_double();
        res.K_next = std::move(best_K);
        res.movers = std::move(best_movers);
    } else {
        res.exponent = fastexp::DyadicExponent(std::move(signs), e);
        res.sigma_next = sigma / e.to_double();
        res.K_next = std::move(C);
    }
    return res;
}

const TraceStep* SearchTrace::best_by_cnnc() const {
    const TraceStep* best = nullptr;
    for (const auto& step : steps) {
        if (best == nullptr || step.cnnc < best->cnnc) best = &step;
    }
    return best;
}

std::optional<double> SearchTrace::best_nmi() const {
    std::optional<double> best;
    for (const auto& step : steps) {
        if (step.nmi && (!best || *step.nmi > *best)) best = step.nmi;
    }
    return best;
}

namespace {

TraceStep make_step(double sigma, kkm::Partition partition, std::size_t kkm_iters,
                    std::size_t probe_count, double wall_ms,
                    const std::vector<int>* labels,
                    const quality::NeighborOrdering& nbr) {
    TraceStep step;
    step.sigma = sigma;
    step.kkm_iterations = kkm_iters;
    step.probe_count = probe_count;
    step.wall_time_ms = wall_ms;
    const auto report = quality::cnnc(partition, nbr);
    step.cnnc = report.cnnc;
    step.empty_clusters = report.empty_clusters;
    step.per_cluster_nnc = report.per_cluster_nnc;
    if (labels != nullptr) {
        step.nmi = quality::nmi(*labels, partition.assignment);
    }
    step.partition = std::move(partition);
    return step;
}

}  // namespace

SearchTrace drive_from(const data::SquaredDistanceMatrix& dm,
                       const kernel::KernelMatrix& K0, const kkm::Partition& p0,
                       const DriverOptions& opts, const std::vector<int>* labels,
                       const quality::NeighborOrdering* nbr) {
    const double cap = opts.sigma_cap > 0.0 ? opts.sigma_cap : default_cap(dm);
    quality::NeighborOrdering owned;
    if (nbr == nullptr) {
        owned = quality::neighbor_ordering(dm);
        nbr = &owned;
    }

    SearchTrace trace;
    trace.depth = opts.depth;

    auto t0 = Clock::now();
    kernel::KernelMatrix K = K0;
    auto run = kkm::kkm_run(K, p0, opts.kkm_max_iters);
    kkm::Partition p = std::move(run.partition);
    trace.steps.push_back(make_step(K.bandwidth(), p, run.iterations, 0,
                                    ms_since(t0), labels, *nbr));

    CriticalSearchOptions search_opts;
    search_opts.depth = opts.depth;
    search_opts.policy = opts.policy;
    search_opts.margin_fraction = opts.margin_fraction;
    search_opts.verify_converged = false;  // p is the converged output of K

    while (run.converged && trace.steps.size() < opts.max_steps) {
        t0 = Clock::now();
        const auto found = critical_search(K, p, search_opts);
        if (!found.found || found.sigma_next > cap) break;
        K = found.K_next;
        run = kkm::kkm_run(K, p, opts.kkm_max_iters);
        p = run.partition;
        trace.steps.push_back(make_step(found.sigma_next, std::move(run.partition),
                                        run.iterations, found.probes, ms_since(t0),
                                        labels, *nbr));
    }
    return trace;
}

SearchTrace offgrid_driver(const data::SquaredDistanceMatrix& dm,
                           const DriverOptions& opts, std::uint64_t seed,
                           const std::vector<int>* labels,
                           const quality::NeighborOrdering* nbr) {
    if (!(opts.sigma0 > 0.0)) {
        throw std::invalid_argument("sigma0 must be positive");
    }
    Rng rng(seed);
    const auto p0 = kkm::random_partition(dm.n, opts.k, rng);
    const auto K0 = kernel::rbf_kernel(dm, opts.sigma0);
    return drive_from(dm, K0, p0, opts, labels, nbr);
}

double HierarchicalResult::best_cnnc() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& stage : stages) {
        if (const auto* step = stage.best_by_cnnc()) best = std::min(best, step->cnnc);
    }
    return best;
}

std::optional<double> HierarchicalResult::best_nmi() const {
    std::optional<double> best;
    for (const auto& stage : stages) {
        if (const auto v = stage.best_nmi(); v && (!best || *v > *best)) best = v;
    }
    return best;
}

HierarchicalResult hierarchical_search(const data::SquaredDistanceMatrix& dm,
                                       const DriverOptions& base,
                                       std::span<const int> depth_schedule,
                                       std::uint64_t seed,
                                       const std::vector<int>* labels,
                                       const quality::NeighborOrdering* nbr) {
    if (depth_schedule.empty()) {
        throw std::invalid_argument("depth schedule must be nonempty");
    }
    for (std::size_t i = 1; i < depth_schedule.size(); ++i) {
        if (depth_schedule[i] <= depth_schedule[i - 1]) {
            throw std::invalid_argument("depth schedule must be strictly increasing");
        }
    }
    quality::NeighborOrdering owned;
    if (nbr == nullptr) {
        owned = quality::neighbor_ordering(dm);
        nbr = &owned;
    }

    HierarchicalResult result;
    DriverOptions opts = base;
    opts.depth = depth_schedule[0];
    result.stages.push_back(offgrid_driver(dm, opts, seed, labels, nbr));

    for (std::size_t s = 1; s < depth_schedule.size(); ++s) {
        const auto& prev = result.stages.back();
        if (prev.steps.size() < 2) break;

        // Two best steps by c-NNC, ties resolved by step order.
        std::size_t first = 0;
        for (std::size_t i = 1; i < prev.steps.size(); ++i) {
            if (prev.steps[i].cnnc < prev.steps[first].cnnc) first = i;
        }
        std::size_t second = (first == 0) ? 1 : 0;
        for (std::size_t i = 0; i < prev.steps.size(); ++i) {
            if (i == first) continue;
            if (prev.steps[i].cnnc < prev.steps[second].cnnc) second = i;
        }
        const std::size_t lo_idx = std::min(first, second);
        const std::size_t hi_idx = std::max(first, second);
        const double sigma_a = prev.steps[lo_idx].sigma;
        const double sigma_b = prev.steps[hi_idx].sigma;
        if (sigma_a == sigma_b) break;  // degenerate interval

        DriverOptions stage_opts = base;
        stage_opts.depth = depth_schedule[s];
        stage_opts.sigma_cap = sigma_b;
        const auto K = kernel::rbf_kernel(dm, sigma_a);
        result.stages.push_back(drive_from(dm, K, prev.steps[lo_idx].partition,
                                           stage_opts, labels, nbr));
    }
    return result;
}

namespace {

void check_two_clusters(const kkm::Partition& p) {
    if (p.k != 2) {
        throw std::invalid_argument("Newton baseline requires exactly 2 clusters");
    }
    if (p.sizes[0] == 0 || p.sizes[1] == 0) {
        throw std::invalid_argument("Newton baseline requires both clusters nonempty");
    }
}

}  // namespace

double newton_g(const kernel::KernelMatrix& K, const kkm::Partition& p,
                std::size_t x, double sigma_prime) {
    check_two_clusters(p);
    const double ratio = K.bandwidth() / sigma_prime;
    const std::size_t n = p.n();
    double s[2] = {0.0, 0.0};
    double t[2] = {0.0, 0.0};
    for (std::size_t y = 0; y < n; ++y) {
        const auto cy = static_cast<std::size_t>(p.assignment[y]);
        s[cy] += std::pow(K(x, y), ratio);
        for (std::size_t z = 0; z < n; ++z) {
            if (static_cast<std::size_t>(p.assignment[z]) == cy) {
                t[cy] += std::pow(K(y, z), ratio);
            }
        }
    }
    const auto own = static_cast<std::size_t>(p.assignment[x]);
    const std::size_t other = 1 - own;
    const auto n_own = static_cast<double>(p.sizes[own]);
    const auto n_other = static_cast<double>(p.sizes[other]);
    const double delta_own = 2.0 * s[own] / n_own - t[own] / (n_own * n_own);
    const double delta_other = 2.0 * s[other] / n_other - t[other] / (n_other * n_other);
    return delta_own - delta_other;
}

double newton_dg(const kernel::KernelMatrix& K, const kkm::Partition& p,
                 std::size_t x, double sigma_prime) {
    check_two_clusters(p);
    const double sigma = K.bandwidth();
    const double ratio = sigma / sigma_prime;
    const std::size_t n = p.n();
    // L(y,z) = log(kappa(y,z)^sigma) is constant in sigma'; the entry at
    // sigma' is exp(L/sigma').
    double s[2] = {0.0, 0.0};
    double t[2] = {0.0, 0.0};
    for (std::size_t y = 0; y < n; ++y) {
        const auto cy = static_cast<std::size_t>(p.assignment[y]);
        s[cy] += sigma * std::log(K(x, y)) * std::pow(K(x, y), ratio);
        for (std::size_t z = 0; z < n; ++z) {
            if (static_cast<std::size_t>(p.assignment[z]) == cy) {
                t[cy] += sigma * std::log(K(y, z)) * std::pow(K(y, z), ratio);
            }
        }
    }
    const auto own = static_cast<std::size_t>(p.assignment[x]);
    const std::size_t other = 1 - own;
    const auto n_own = static_cast<double>(p.sizes[own]);
    const auto n_other = static_cast<double>(p.sizes[other]);
    const double sp2 = sigma_prime * sigma_prime;
    return (2.0 * s[other] / n_other - t[other] / (n_other * n_other) -
            2.0 * s[own] / n_own + t[own] / (n_own * n_own)) /
           sp2;
}

NewtonResult newton_critical(const kernel::KernelMatrix& K, const kkm::Partition& p,
                             std::size_t x, const NewtonOptions& opts) {
    check_two_clusters(p);
    const double sigma = K.bandwidth();
    const double cap = opts.sigma_cap > 0.0 ? opts.sigma_cap : 1e6 * sigma;
    double sp = opts.sigma_start > 0.0 ? opts.sigma_start : 1.1 * sigma;

    NewtonResult result;
    for (int it = 1; it <= opts.max_iters; ++it) {
        result.iterations = it;
        const double g = newton_g(K, p, x, sp);
        const double dg = newton_dg(K, p, x, sp);
        if (std::abs(dg) < 1e-14) {
            result.failure = "flat derivative";
            return result;
        }
        const double next = sp - g / dg;
        if (!std::isfinite(next) || next <= sigma || next > cap) {
            result.failure = "iterate left (sigma, cap)";
            return result;
        }
        if (std::abs(next - sp) <= opts.tol * sp) {
            result.converged = true;
            result.sigma_root = next;
            return result;
        }
        sp = next;
    }
    result.failure = "max iterations exceeded";
    return result;
}

NewtonInstanceResult newton_instance(const kernel::KernelMatrix& K,
                                     const kkm::Partition& p,
                                     const NewtonOptions& opts) {
    check_two_clusters(p);
    NewtonInstanceResult result;
    result.sigma_crit = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < p.n(); ++x) {
        const auto r = newton_critical(K, p, x, opts);
        if (r.converged) {
            ++result.converged_points;
            if (r.sigma_root < result.sigma_crit) {
                result.sigma_crit = r.sigma_root;
                result.argmin_point = x;
                result.found = true;
            }
        } else {
            ++result.diverged_points;
        }
    }
    return result;
}

BisectResult binary_search_critical(const data::SquaredDistanceMatrix& dm,
                                    double sigma, const kkm::Partition& p,
                                    double sigma_hi, const BisectOptions& opts) {
    if (!(sigma > 0.0) || !(sigma_hi > sigma)) {
        throw std::invalid_argument("need 0 < sigma < sigma_hi");
    }
    if (!(opts.precision > 0.0)) {
        throw std::invalid_argument("precision must be positive");
    }
    const auto K = kernel::rbf_kernel(dm, sigma);

    BisectResult result;
    {
        const auto C = kernel::reparametrize_exact(K, sigma_hi);
        ++result.probes;
        if (!kkm::probe_changes(C, p).changed) {
            return result;  // nothing changes up to sigma_hi
        }
    }

    double lo = sigma;
    double hi = sigma_hi;
    while (hi - lo > opts.precision) {
        const double mid = 0.5 * (lo + hi);
        const auto t0 = Clock::now();
        const auto C = kernel::reparametrize_exact(K, mid);
        const bool changed = kkm::probe_changes(C, p).changed;
        if (opts.record_step_times) result.step_ms.push_back(ms_since(t0));
        ++result.probes;
        if (changed) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    result.found = true;
    result.sigma_crit = 0.5 * (lo + hi);
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    return result;
}

MknnResult mknn_sigmas(const data::SquaredDistanceMatrix& dm, bool log_base2) {
    if (dm.n < 3) {
        throw std::invalid_argument("mknn needs at least 3 points");
    }
    const auto n = static_cast<double>(dm.n);
    const double log_n = log_base2 ? std::log2(n) : std::log(n);
    auto k_max = static_cast<std::size_t>(std::floor(2.0 * (log_n + 1.0)));
    k_max = std::min(k_max, dm.n - 1);

    const auto nbr = quality::neighbor_ordering(dm);
    MknnResult result;
    for (std::size_t k = 1; k <= k_max; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < dm.n; ++i) {
            mean += std::sqrt(dm(i, nbr.neighbor(i, k - 1)));
        }
        mean /= n;
        const double sigma = 2.0 * mean * mean;
        if (sigma > 0.0) {
            result.sigmas.push_back(sigma);
        } else {
            ++result.dropped;
        }
    }
    return result;
}

std::vector<double> grid_sigmas() {
    return {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0,
            1e1,  1e2,  1e3,  1e4,  1e5,  1e6};
}

}  // namespace offgrid::search

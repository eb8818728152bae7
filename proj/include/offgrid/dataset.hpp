#ifndef OFFGRID_DATASET_HPP
#define OFFGRID_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace offgrid::data {

/// n points in d dimensions, row-major, with optional ground-truth labels.
struct DataSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> points;  // n * d, row-major
    std::optional<std::vector<int>> labels;
    std::vector<std::string> label_names;  // id -> original label text
    std::string name;

    double at(std::size_t i, std::size_t j) const { return points[i * d + j]; }
    double& at(std::size_t i, std::size_t j) { return points[i * d + j]; }
    std::size_t num_classes() const { return label_names.size(); }
};

/// Symmetric n x n matrix of squared L2 distances, zero diagonal.
struct SquaredDistanceMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // n * n, row-major

    double operator()(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return entries[i * n + j]; }

    double min_off_diagonal() const;
    double max_entry() const;
    /// True when some off-diagonal entry is exactly zero (duplicate points).
    bool has_duplicates() const { return min_off_diagonal() == 0.0; }
};

struct LoadOptions {
    std::optional<std::size_t> label_column;
    bool standardize = false;
    bool skip_header = false;
    std::string name;
};

/// Loads a comma-separated file. With standardize set, every feature column
/// with nonzero variance is scaled to unit sample variance. The label
/// column, if named, is removed from the features and encoded to ids in
/// order of first appearance.
DataSet load_csv(const std::string& path, const LoadOptions& opts = {});

SquaredDistanceMatrix pairwise_sq_distances(const DataSet& ds);

/// q-th percentile (nearest-rank) of the strict upper-triangle entries.
double percentile_sq_distance(const SquaredDistanceMatrix& dm, double q);

/// Two-cluster instance family given directly by its squared distances:
/// every off-diagonal entry is eps except from the special point (the
/// first point of the second cluster) to the rest of its own cluster,
/// where it is 2*eps.
struct TightExample {
    SquaredDistanceMatrix distances;
    std::vector<int> planted;  // 0 for the first cluster, 1 for the second
    std::size_t special_point = 0;
    double eps = 0.0;
};

TightExample generate_tight_example(std::size_t n1, std::size_t n2, double eps);

/// Uniform points in [0,1]^d; test and benchmark plumbing.
DataSet random_dataset(std::size_t n, std::size_t d, std::uint64_t seed);

/// k Gaussian-ish blobs with the given center separation; labels attached.
DataSet generate_blobs(std::size_t n, std::size_t d, std::size_t k,
                       double separation, std::uint64_t seed);

void write_matrix_csv(const SquaredDistanceMatrix& dm, const std::string& path);

}  // namespace offgrid::data

#endif  // OFFGRID_DATASET_HPP

#include "offgrid/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "offgrid/kernels.hpp"
#include "offgrid/rng.hpp"

namespace offgrid::data {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return fields;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw std::runtime_error("csv parse failure at row " + std::to_string(row + 1) +
                                 ", column " + std::to_string(col + 1) + ": '" +
                                 std::string(cell) + "'");
    }
    return value;
}

}  // namespace

double SquaredDistanceMatrix::min_off_diagonal() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            best = std::min(best, entries[i * n + j]);
        }
    }
    return best;
}

double SquaredDistanceMatrix::max_entry() const {
    double best = 0.0;
    for (double v : entries) best = std::max(best, v);
    return best;
}

DataSet load_csv(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }

    DataSet ds;
    ds.name = opts.name.empty() ? path : opts.name;

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::string line;
    std::size_t row_index = 0;
    std::size_t width = 0;
    bool first_data_row = true;
    bool skipped_header = false;

    while (std::getline(in, line)) {
        if (opts.skip_header && !skipped_header) {
            skipped_header = true;
            ++row_index;
            continue;
        }
        if (trim(line).empty()) {
            ++row_index;
            continue;
        }
        const auto fields = split_csv(line);
        if (first_data_row) {
            width = fields.size();
            if (opts.label_column && *opts.label_column >= width) {
                throw std::runtime_error("label column " +
                                         std::to_string(*opts.label_column) +
                                         " out of range for width " +
                                         std::to_string(width));
            }
            first_data_row = false;
        } else if (fields.size() != width) {
            throw std::runtime_error("ragged row " + std::to_string(row_index + 1) +
                                     ": expected " + std::to_string(width) +
                                     " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> coords;
        coords.reserve(width);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (opts.label_column && c == *opts.label_column) {
                raw_labels.emplace_back(fields[c]);
            } else {
                coords.push_back(parse_cell(fields[c], row_index, c));
            }
        }
        rows.push_back(std::move(coords));
        ++row_index;
    }

    if (rows.size() < 2) {
        throw std::runtime_error("dataset '" + path + "' has fewer than 2 rows");
    }
    if (rows.front().empty()) {
        throw std::runtime_error("dataset '" + path + "' has no feature columns");
    }

    ds.n = rows.size();
    ds.d = rows.front().size();
    ds.points.resize(ds.n * ds.d);
    for (std::size_t i = 0; i < ds.n; ++i) {
        std::copy(rows[i].begin(), rows[i].end(), ds.points.begin() + i * ds.d);
    }

    if (opts.label_column) {
        std::unordered_map<std::string, int> ids;
        std::vector<int> labels;
        labels.reserve(ds.n);
        for (const auto& text : raw_labels) {
            const auto [it, inserted] = ids.emplace(text, static_cast<int>(ds.label_names.size()));
            if (inserted) ds.label_names.push_back(text);
            labels.push_back(it->second);
        }
        ds.labels = std::move(labels);
    }

    if (opts.standardize) {
        for (std::size_t c = 0; c < ds.d; ++c) {
            double mean = 0.0;
            for (std::size_t i = 0; i < ds.n; ++i) mean += ds.at(i, c);
            mean /= static_cast<double>(ds.n);
            double ss = 0.0;
            for (std::size_t i = 0; i < ds.n; ++i) {
                const double dv = ds.at(i, c) - mean;
                ss += dv * dv;
            }
            const double var = ss / static_cast<double>(ds.n - 1);
            if (var > 0.0) {
                const double scale = 1.0 / std::sqrt(var);
                for (std::size_t i = 0; i < ds.n; ++i) ds.at(i, c) *= scale;
            }
        }
    }

    return ds;
}

SquaredDistanceMatrix pairwise_sq_distances(const DataSet& ds) {
    SquaredDistanceMatrix dm;
    dm.n = ds.n;
    dm.entries.resize(ds.n * ds.n);
    kernels::pairwise_sq_distances(ds.points.data(), ds.n, ds.d, dm.entries.data());
    return dm;
}

double percentile_sq_distance(const SquaredDistanceMatrix& dm, double q) {
    if (!(q > 0.0) || !(q <= 100.0)) {
        throw std::invalid_argument("percentile must lie in (0, 100]");
    }
    if (dm.n < 2) {
        throw std::invalid_argument("need at least 2 points");
    }
    std::vector<double> upper;
    upper.reserve(dm.n * (dm.n - 1) / 2);
    for (std::size_t i = 0; i < dm.n; ++i) {
        for (std::size_t j = i + 1; j < dm.n; ++j) {
            upper.push_back(dm.entries[i * dm.n + j]);
        }
    }
    std::sort(upper.begin(), upper.end());
    const auto m = upper.size();
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(m)));
    rank = std::clamp<std::size_t>(rank, 1, m);
    return upper[rank - 1];
}

TightExample generate_tight_example(std::size_t n1, std::size_t n2, double eps) {
    if (n1 < 1 || n2 < 2) {
        throw std::invalid_argument("tight example needs n1 >= 1 and n2 >= 2");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("eps must be positive");
    }
    const std::size_t n = n1 + n2;
    TightExample ex;
    ex.eps = eps;
    ex.special_point = n1;  // first point of the second cluster
    ex.distances.n = n;
    ex.distances.entries.assign(n * n, eps);
    for (std::size_t i = 0; i < n; ++i) ex.distances(i, i) = 0.0;
    for (std::size_t z = n1 + 1; z < n; ++z) {
        ex.distances(ex.special_point, z) = 2.0 * eps;
        ex.distances(z, ex.special_point) = 2.0 * eps;
    }
    ex.planted.assign(n, 1);
    for (std::size_t i = 0; i < n1; ++i) ex.planted[i] = 0;
    return ex;
}

DataSet random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    DataSet ds;
    ds.n = n;
    ds.d = d;
    ds.name = "random";
    ds.points.resize(n * d);
    Rng rng(seed);
    for (auto& v : ds.points) v = rng.uniform();
    return ds;
}

DataSet generate_blobs(std::size_t n, std::size_t d, std::size_t k,
                       double separation, std::uint64_t seed) {
    if (k < 1 || n < k) {
        throw std::invalid_argument("blobs need 1 <= k <= n");
    }
    DataSet ds;
    ds.n = n;
    ds.d = d;
    ds.name = "blobs";
    ds.points.resize(n * d);
    std::vector<int> labels(n);
    Rng rng(seed);

    std::vector<double> centers(k * d);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t t = 0; t < d; ++t) {
            centers[c * d + t] = separation * rng.normal();
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(i % k);  // balanced clusters
        labels[i] = static_cast<int>(c);
        for (std::size_t t = 0; t < d; ++t) {
            ds.points[i * d + t] = centers[c * d + t] + rng.normal();
        }
    }
    ds.labels = std::move(labels);
    ds.label_names.resize(k);
    for (std::size_t c = 0; c < k; ++c) ds.label_names[c] = std::to_string(c);
    return ds;
}

void write_matrix_csv(const SquaredDistanceMatrix& dm, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out.precision(17);
    for (std::size_t i = 0; i < dm.n; ++i) {
        for (std::size_t j = 0; j < dm.n; ++j) {
            if (j) out << ',';
            out << dm.entries[i * dm.n + j];
        }
        out << '\n';
    }
}

}  // namespace offgrid::data

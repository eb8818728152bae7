#include "offgrid/kernels.hpp"

#include <cmath>

namespace offgrid::kernels {

namespace {
using index_t = std::int64_t;
}

std::int64_t exp_neg_scaled(const double* src, double* out, std::size_t m,
                            double inv_scale, double floor) {
    std::int64_t clamps = 0;
    const auto mm = static_cast<index_t>(m);
#pragma omp parallel for schedule(static) reduction(+ : clamps)
    for (index_t i = 0; i < mm; ++i) {
        double v = std::exp(-src[i] * inv_scale);
        if (v < floor) {
            v = floor;
            ++clamps;
        }
        out[i] = v;
    }
    return clamps;
}

void ew_sqrt(const double* src, double* out, std::size_t m) {
    const auto mm = static_cast<index_t>(m);
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < mm; ++i) {
        out[i] = std::sqrt(src[i]);
    }
}

std::int64_t ew_mul(const double* a, const double* b, double* out,
                    std::size_t m, double floor) {
    std::int64_t clamps = 0;
    const auto mm = static_cast<index_t>(m);
#pragma omp parallel for schedule(static) reduction(+ : clamps)
    for (index_t i = 0; i < mm; ++i) {
        double v = a[i] * b[i];
        if (v < floor) {
            v = floor;
            ++clamps;
        }
        out[i] = v;
    }
    return clamps;
}

std::int64_t ew_div(const double* a, const double* b, double* out,
                    std::size_t m, double floor) {
    std::int64_t clamps = 0;
    const auto mm = static_cast<index_t>(m);
#pragma omp parallel for schedule(static) reduction(+ : clamps)
    for (index_t i = 0; i < mm; ++i) {
        double num = a[i];
        double den = b[i];
        bool adjusted = false;
        if (num < floor) {
            num = floor;
            adjusted = true;
        }
        if (den < floor) {
            den = floor;
            adjusted = true;
        }
        double v = num / den;
        if (v > 1.0) {
            v = 1.0;
            adjusted = true;
        }
        if (adjusted) ++clamps;
        out[i] = v;
    }
    return clamps;
}

std::int64_t ew_pow(const double* src, double* out, std::size_t m,
                    double exponent, double floor) {
    std::int64_t clamps = 0;
    const auto mm = static_cast<index_t>(m);
#pragma omp parallel for schedule(static) reduction(+ : clamps)
    for (index_t i = 0; i < mm; ++i) {
        double v = std::pow(src[i], exponent);
        if (v < floor) {
            v = floor;
            ++clamps;
        }
        out[i] = v;
    }
    return clamps;
}

void pairwise_sq_distances(const double* pts, std::size_t n, std::size_t d,
                           double* out) {
    const auto nn = static_cast<index_t>(n);
#pragma omp parallel for schedule(static)
    for (index_t i = 0; i < nn; ++i) {
        out[i * nn + i] = 0.0;
        const double* xi = pts + i * static_cast<index_t>(d);
        for (index_t j = i + 1; j < nn; ++j) {
            const double* xj = pts + j * static_cast<index_t>(d);
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = xi[t] - xj[t];
                s += diff * diff;
            }
            out[i * nn + j] = s;
            out[j * nn + i] = s;
        }
    }
}

void proximity_cross(const double* K, std::size_t n, const int* assign,
                     std::size_t k, double* cross) {
    const auto nn = static_cast<index_t>(n);
#pragma omp parallel for schedule(static)
    for (index_t x = 0; x < nn; ++x) {
        double* row = cross + x * static_cast<index_t>(k);
        for (std::size_t c = 0; c < k; ++c) row[c] = 0.0;
        const double* krow = K + x * nn;
        for (index_t y = 0; y < nn; ++y) {
            row[assign[y]] += krow[y];
        }
    }
}

void proximity_cross_rows(const double* K, std::size_t n, const int* assign,
                          std::size_t k, const std::size_t* rows,
                          std::size_t nrows, double* cross) {
    const auto rr = static_cast<index_t>(nrows);
#pragma omp parallel for schedule(static)
    for (index_t r = 0; r < rr; ++r) {
        const std::size_t x = rows[r];
        double* row = cross + x * k;
        for (std::size_t c = 0; c < k; ++c) row[c] = 0.0;
        const double* krow = K + x * n;
        for (std::size_t y = 0; y < n; ++y) {
            row[assign[y]] += krow[y];
        }
    }
}

namespace serial {

std::int64_t exp_neg_scaled(const double* src, double* out, std::size_t m,
                            double inv_scale, double floor) {
    std::int64_t clamps = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = std::exp(-src[i] * inv_scale);
        if (v < floor) {
            v = floor;
            ++clamps;
        }
        out[i] = v;
    }
    return clamps;
}

void ew_sqrt(const double* src, double* out, std::size_t m) {
    for (std::size_t i = 0; i < m; ++i) out[i] = std::sqrt(src[i]);
}

std::int64_t ew_mul(const double* a, const double* b, double* out,
                    std::size_t m, double floor) {
    std::int64_t clamps = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = a[i] * b[i];
        if (v < floor) {
            v = floor;
            ++clamps;
        }
        out[i] = v;
    }
    return clamps;
}

std::int64_t ew_div(const double* a, const double* b, double* out,
                    std::size_t m, double floor) {
    std::int64_t clamps = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double num = a[i];
        double den = b[i];
        bool adjusted = false;
        if (num < floor) {
            num = floor;
            adjusted = true;
        }
        if (den < floor) {
            den = floor;
            adjusted = true;
        }
        double v = num / den;
        if (v > 1.0) {
            v = 1.0;
            adjusted = true;
        }
        if (adjusted) ++clamps;
        out[i] = v;
    }
    return clamps;
}

std::int64_t ew_pow(const double* src, double* out, std::size_t m,
                    double exponent, double floor) {
    std::int64_t clamps = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double v = std::pow(src[i], exponent);
        if (v < floor) {
            v = floor;
            ++clamps;
        }
        out[i] = v;
    }
    return clamps;
}

void pairwise_sq_distances(const double* pts, std::size_t n, std::size_t d,
                           double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i * n + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < d; ++t) {
                const double diff = pts[i * d + t] - pts[j * d + t];
                s += diff * diff;
            }
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
}

void proximity_cross(const double* K, std::size_t n, const int* assign,
                     std::size_t k, double* cross) {
    for (std::size_t x = 0; x < n; ++x) {
        double* row = cross + x * k;
        for (std::size_t c = 0; c < k; ++c) row[c] = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            row[assign[y]] += K[x * n + y];
        }
    }
}

}  // namespace serial

}  // namespace offgrid::kernels

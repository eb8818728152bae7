#ifndef OFFGRID_KERNELS_HPP
#define OFFGRID_KERNELS_HPP

#include <cstddef>
#include <cstdint>

// Element-wise and accumulation primitives behind the kernel-matrix and
// clustering code. The default entry points are OpenMP-parallel; the
// serial namespace keeps reference implementations that the tests compare
// against bitwise. Every output element depends on a fixed input slice
// summed in a fixed order, so parallel and serial results are identical.

namespace offgrid::kernels {

/// out[i] = exp(-src[i] * neg_inv_scale_arg), entries below floor raised
/// to floor. Returns the number of clamped entries.
std::int64_t exp_neg_scaled(const double* src, double* out, std::size_t m,
                            double inv_scale, double floor);

void ew_sqrt(const double* src, double* out, std::size_t m);

/// Element-wise product, clamped below at floor.
std::int64_t ew_mul(const double* a, const double* b, double* out,
                    std::size_t m, double floor);

/// Element-wise quotient. Operands are clamped to floor before dividing
/// and the result is capped at 1. Returns the number of adjusted entries.
std::int64_t ew_div(const double* a, const double* b, double* out,
                    std::size_t m, double floor);

/// Element-wise power with positive exponent, clamped below at floor.
std::int64_t ew_pow(const double* src, double* out, std::size_t m,
                    double exponent, double floor);

/// Squared L2 distances between rows of pts (n x d) into out (n x n).
/// Each unordered pair is computed once and mirrored.
void pairwise_sq_distances(const double* pts, std::size_t n, std::size_t d,
                           double* out);

/// cross[x*k + c] = sum over y with assign[y] == c of K[x*n + y],
/// accumulated in ascending y order per row.
void proximity_cross(const double* K, std::size_t n, const int* assign,
                     std::size_t k, double* cross);

/// Same accumulation for the listed rows only; other rows untouched.
void proximity_cross_rows(const double* K, std::size_t n, const int* assign,
                          std::size_t k, const std::size_t* rows,
                          std::size_t nrows, double* cross);

namespace serial {

std::int64_t exp_neg_scaled(const double* src, double* out, std::size_t m,
                            double inv_scale, double floor);
void ew_sqrt(const double* src, double* out, std::size_t m);
std::int64_t ew_mul(const double* a, const double* b, double* out,
                    std::size_t m, double floor);
std::int64_t ew_div(const double* a, const double* b, double* out,
                    std::size_t m, double floor);
std::int64_t ew_pow(const double* src, double* out, std::size_t m,
                    double exponent, double floor);
void pairwise_sq_distances(const double* pts, std::size_t n, std::size_t d,
                           double* out);
void proximity_cross(const double* K, std::size_t n, const int* assign,
                     std::size_t k, double* cross);

}  // namespace serial

}  // namespace offgrid::kernels

#endif  // OFFGRID_KERNELS_HPP

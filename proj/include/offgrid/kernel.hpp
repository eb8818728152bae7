#ifndef OFFGRID_KERNEL_HPP
#define OFFGRID_KERNEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "offgrid/dataset.hpp"
#include "offgrid/fastexp.hpp"

namespace offgrid::kernel {

/// Default floor applied to entries before division (and to any produced
/// entry), so that underflowed far-pair values never reach 0/0.
inline constexpr double kClampFloor = 1e-300;

/// Symmetric RBF Gram matrix with unit diagonal and entries in (0,1].
/// Tracks the effective bandwidth and the exact dyadic power applied
/// relative to its base matrix, so element-wise algebra can verify
/// lineage and exponent arithmetic without floating point.
class KernelMatrix {
  public:
    KernelMatrix() = default;

    std::size_t size() const { return n_; }
    const std::vector<double>& entries() const { return entries_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

    /// Effective bandwidth: base bandwidth divided by the tracked exponent.
    double bandwidth() const;
    double base_bandwidth() const { return sigma_base_; }
    const fastexp::Dyadic& exponent() const { return exponent_; }
    std::uint64_t lineage() const { return lineage_; }
    /// Entries clamped to the floor so far along this matrix's history.
    std::int64_t clamp_count() const { return clamps_; }
    double min_entry() const;

    /// Same entries re-tagged as a fresh base matrix with unit exponent,
    /// so a new search can start its exponent walk from 1.
    KernelMatrix rebased() const;

    /// Row-major 64-bit floats preceded by an 8-byte size header.
    void save_binary(const std::string& path) const;
    static KernelMatrix load_binary(const std::string& path, double bandwidth = 1.0);

    friend KernelMatrix rbf_kernel(const data::SquaredDistanceMatrix& dm,
                                   double sigma, double floor);
    friend KernelMatrix elementwise_sqrt(const KernelMatrix& K);
    friend KernelMatrix hadamard(const KernelMatrix& a, const KernelMatrix& b,
                                 double floor);
    friend KernelMatrix hadamard_div(const KernelMatrix& a, const KernelMatrix& b,
                                     double floor);
    friend KernelMatrix reparametrize_exact(const KernelMatrix& K, double sigma_new,
                                            double floor);

  private:
    std::size_t n_ = 0;
    std::vector<double> entries_;
    double sigma_base_ = 1.0;
    fastexp::Dyadic exponent_ = fastexp::Dyadic::one();
    std::uint64_t lineage_ = 0;
    std::int64_t clamps_ = 0;
};

/// K(i,j) = exp(-D(i,j) / sigma).
KernelMatrix rbf_kernel(const data::SquaredDistanceMatrix& dm, double sigma,
                        double floor = kClampFloor);

/// Element-wise square root; tracked exponent halves, bandwidth doubles.
KernelMatrix elementwise_sqrt(const KernelMatrix& K);

/// Element-wise product of two matrices from the same base; exponents add.
KernelMatrix hadamard(const KernelMatrix& a, const KernelMatrix& b,
                      double floor = kClampFloor);

/// Element-wise quotient; requires exponent(a) > exponent(b) so the result
/// stays a positive power of the base with entries in (0,1].
KernelMatrix hadamard_div(const KernelMatrix& a, const KernelMatrix& b,
                          double floor = kClampFloor);

/// Entry-wise power with exponent sigma/sigma_new: the slow exact
/// re-parametrization used as oracle and by the bisection baseline.
/// The result is a fresh base matrix at the new bandwidth.
KernelMatrix reparametrize_exact(const KernelMatrix& K, double sigma_new,
                                 double floor = kClampFloor);

}  // namespace offgrid::kernel

#endif  // OFFGRID_KERNEL_HPP

#include "offgrid/kernel.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "offgrid/kernels.hpp"

namespace offgrid::kernel {

namespace {

std::atomic<std::uint64_t> next_lineage{1};

std::uint64_t fresh_lineage() { return next_lineage.fetch_add(1); }

void check_same_shape(const KernelMatrix& a, const KernelMatrix& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("kernel matrices differ in size");
    }
    if (a.lineage() != b.lineage()) {
        throw std::invalid_argument("kernel matrices have different base lineage");
    }
}

}  // namespace

double KernelMatrix::bandwidth() const {
    return sigma_base_ / exponent_.to_double();
}

double KernelMatrix::min_entry() const {
    double best = 1.0;
    for (double v : entries_) best = std::min(best, v);
    return best;
}

KernelMatrix KernelMatrix::rebased() const {
    KernelMatrix out = *this;
    out.sigma_base_ = bandwidth();
    out.exponent_ = fastexp::Dyadic::one();
    out.lineage_ = fresh_lineage();
    return out;
}

void KernelMatrix::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    const std::uint64_t header = n_;
    out.write(reinterpret_cast<const char*>(&header), sizeof(header));
    out.write(reinterpret_cast<const char*>(entries_.data()),
              static_cast<std::streamsize>(entries_.size() * sizeof(double)));
}

KernelMatrix KernelMatrix::load_binary(const std::string& path, double bandwidth) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::uint64_t header = 0;
    in.read(reinterpret_cast<char*>(&header), sizeof(header));
    KernelMatrix K;
    K.n_ = header;
    K.entries_.resize(K.n_ * K.n_);
    in.read(reinterpret_cast<char*>(K.entries_.data()),
            static_cast<std::streamsize>(K.entries_.size() * sizeof(double)));
    if (!in) {
        throw std::runtime_error("truncated kernel dump '" + path + "'");
    }
    K.sigma_base_ = bandwidth;
    K.exponent_ = fastexp::Dyadic::one();
    K.lineage_ = fresh_lineage();
    return K;
}

KernelMatrix rbf_kernel(const data::SquaredDistanceMatrix& dm, double sigma,
                        double floor) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("bandwidth must be positive and finite");
    }
    KernelMatrix K;
    K.n_ = dm.n;
    K.entries_.resize(dm.n * dm.n);
    K.sigma_base_ = sigma;
    K.exponent_ = fastexp::Dyadic::one();
    K.lineage_ = fresh_lineage();
    K.clamps_ = kernels::exp_neg_scaled(dm.entries.data(), K.entries_.data(),
                                        K.entries_.size(), 1.0 / sigma, floor);
    return K;
}

KernelMatrix elementwise_sqrt(const KernelMatrix& K) {
    KernelMatrix out;
    out.n_ = K.n_;
    out.entries_.resize(K.entries_.size());
    out.sigma_base_ = K.sigma_base_;
    out.exponent_ = K.exponent_.half();
    out.lineage_ = K.lineage_;
    out.clamps_ = K.clamps_;
    kernels::ew_sqrt(K.entries_.data(), out.entries_.data(), out.entries_.size());
    return out;
}

KernelMatrix hadamard(const KernelMatrix& a, const KernelMatrix& b, double floor) {
    check_same_shape(a, b);
    KernelMatrix out;
    out.n_ = a.n_;
    out.entries_.resize(a.entries_.size());
    out.sigma_base_ = a.sigma_base_;
    out.exponent_ = a.exponent_ + b.exponent_;
    out.lineage_ = a.lineage_;
    out.clamps_ = a.clamps_ + b.clamps_;
    out.clamps_ += kernels::ew_mul(a.entries_.data(), b.entries_.data(),
                                   out.entries_.data(), out.entries_.size(), floor);
    return out;
}

KernelMatrix hadamard_div(const KernelMatrix& a, const KernelMatrix& b, double floor) {
    check_same_shape(a, b);
    if (!(b.exponent() < a.exponent())) {
        throw std::invalid_argument(
            "hadamard_div requires a strictly larger exponent in the numerator");
    }
    KernelMatrix out;
    out.n_ = a.n_;
    out.entries_.resize(a.entries_.size());
    out.sigma_base_ = a.sigma_base_;
    out.exponent_ = a.exponent_ - b.exponent_;
    out.lineage_ = a.lineage_;
    out.clamps_ = a.clamps_ + b.clamps_;
    out.clamps_ += kernels::ew_div(a.entries_.data(), b.entries_.data(),
                                   out.entries_.data(), out.entries_.size(), floor);
    return out;
}

KernelMatrix reparametrize_exact(const KernelMatrix& K, double sigma_new,
                                 double floor) {
    if (!(sigma_new > 0.0) || !std::isfinite(sigma_new)) {
        throw std::invalid_argument("new bandwidth must be positive and finite");
    }
    const double exponent = K.bandwidth() / sigma_new;
    if (!std::isfinite(exponent) || !(exponent > 0.0)) {
        throw std::invalid_argument("re-parametrization exponent not finite");
    }
    KernelMatrix out;
    out.n_ = K.n_;
    out.entries_.resize(K.entries_.size());
    out.sigma_base_ = sigma_new;
    out.exponent_ = fastexp::Dyadic::one();
    out.lineage_ = fresh_lineage();
    out.clamps_ = kernels::ew_pow(K.entries_.data(), out.entries_.data(),
                                  out.entries_.size(), exponent, floor);
    return out;
}

}  // namespace offgrid::kernel

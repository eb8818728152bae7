#include "offgrid/fastexp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace offgrid::fastexp {

namespace {

void check_depth(int depth) {
    if (depth < 1 || depth > kMaxDepth) {
        throw std::invalid_argument("depth must be in [1, " +
                                    std::to_string(kMaxDepth) + "]");
    }
}

void check_base(double b) {
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument("base must be positive and finite");
    }
}

}  // namespace

Dyadic::Dyadic(std::int64_t num, int log2_den) : num_(num), log2_den_(log2_den) {
    if (log2_den_ < 0 || log2_den_ > 62) {
        throw std::invalid_argument("dyadic denominator exponent out of range");
    }
    if (num_ == 0) {
        log2_den_ = 0;
        return;
    }
    while (log2_den_ > 0 && (num_ % 2) == 0) {
        num_ /= 2;
        --log2_den_;
    }
}

Dyadic Dyadic::pow2(int neg_exponent) { return Dyadic(1, neg_exponent); }

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(num_), -log2_den_); }

Dyadic Dyadic::half() const { return Dyadic(num_, log2_den_ + 1); }

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    const int den = std::max(a.log2_den_, b.log2_den_);
    const std::int64_t na = a.num_ << (den - a.log2_den_);
    const std::int64_t nb = b.num_ << (den - b.log2_den_);
    return Dyadic(na + nb, den);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) {
    const int den = std::max(a.log2_den_, b.log2_den_);
    const std::int64_t na = a.num_ << (den - a.log2_den_);
    const std::int64_t nb = b.num_ << (den - b.log2_den_);
    return Dyadic(na - nb, den);
}

bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.num_ == b.num_ && a.log2_den_ == b.log2_den_;
}

bool operator<(const Dyadic& a, const Dyadic& b) {
    const int den = std::max(a.log2_den_, b.log2_den_);
    return (a.num_ << (den - a.log2_den_)) < (b.num_ << (den - b.log2_den_));
}

DyadicExponent::DyadicExponent(std::vector<std::int8_t> signs, Dyadic value)
    : signs_(std::move(signs)), value_(value) {}

bool DyadicExponent::exact_match() const {
    return !signs_.empty() && signs_.back() == 0;
}

DyadicExponent DyadicExponent::approximate(double target, int depth) {
    check_depth(depth);
    if (target < 0.0 || target >= 1.0) {
        throw std::invalid_argument("target must lie in [0, 1)");
    }
    if (target == 0.0) return DyadicExponent({}, Dyadic::zero());

    std::vector<std::int8_t> signs;
    signs.reserve(static_cast<std::size_t>(depth));
    signs.push_back(1);
    Dyadic value = Dyadic::pow2(1);  // s_1 = 1/2
    for (int j = 2; j <= depth; ++j) {
        const double current = value.to_double();  // exact for depth <= 50
        if (current == target) {
            signs.push_back(0);
            break;
        }
        if (current < target) {
            signs.push_back(1);
            value = value + Dyadic::pow2(j);
        } else {
            signs.push_back(-1);
            value = value - Dyadic::pow2(j);
        }
    }
    return DyadicExponent(std::move(signs), value);
}

double int_pow(double b, std::uint64_t z, OpCounter* ops) {
    check_base(b);
    if (z == 0) return 1.0;

    int top = 63;
    while (((z >> top) & 1u) == 0) --top;
    double acc = b;  // leading bit
    for (int i = top - 1; i >= 0; --i) {
        acc *= acc;
        if (ops) ++ops->mults;
        if ((z >> i) & 1u) {
            acc *= b;
            if (ops) ++ops->mults;
        }
    }
    return acc;
}

FracPowResult dyadic_frac_pow(double b, double f, int depth, OpCounter* ops,
                              bool exact_zero) {
    check_base(b);
    check_depth(depth);
    if (!(f >= 0.0) || f >= 1.0) {
        throw std::invalid_argument("fractional exponent must lie in [0, 1)");
    }
    if (f == 0.0 && exact_zero) {
        return FracPowResult{1.0, DyadicExponent({}, Dyadic::zero())};
    }

    std::vector<std::int8_t> signs;
    signs.reserve(static_cast<std::size_t>(depth));

    double root = std::sqrt(b);
    if (ops) ++ops->sqrts;
    double acc = root;
    signs.push_back(1);
    Dyadic value = Dyadic::pow2(1);

    for (int j = 2; j <= depth; ++j) {
        const double current = value.to_double();
        if (current == f) {
            signs.push_back(0);
            break;
        }
        root = std::sqrt(root);
        if (ops) ++ops->sqrts;
        if (current < f) {
            acc *= root;
            signs.push_back(1);
            value = value + Dyadic::pow2(j);
        } else {
            acc /= root;
            signs.push_back(-1);
            value = value - Dyadic::pow2(j);
        }
        if (ops) ++ops->mults;
    }
    return FracPowResult{acc, DyadicExponent(std::move(signs), value)};
}

double fast_pow(double b, double p, int depth, PowFlags* flags, OpCounter* ops) {
    check_base(b);
    check_depth(depth);
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument("exponent must be positive and finite");
    }
    if (p >= 9.007199254740992e15) {  // past this, floor(p) loses integrality
        throw std::invalid_argument("integral part of exponent too large");
    }

    const double ip = std::floor(p);
    const auto z = static_cast<std::uint64_t>(ip);
    const double f = p - ip;

    double result;
    const FracPowResult frac = dyadic_frac_pow(b, f, depth, ops);
    if (z == 0) {
        result = frac.value;
    } else {
        result = int_pow(b, z, ops) * frac.value;
        if (ops) ++ops->mults;
    }

    if (flags) {
        flags->overflow = std::isinf(result);
        flags->underflow = (result == 0.0);
    }
    return result;
}

int required_depth(double b, double eps) {
    check_base(b);
    if (!(eps > 0.0)) {
        throw std::invalid_argument("eps must be positive");
    }
    if (b == 1.0) return 0;

    const double log_big = std::abs(std::log(b));
    const auto ok = [&](int i) {
        return std::expm1(std::ldexp(log_big, -i)) <= eps;
    };

    int i = static_cast<int>(std::ceil(std::log2(log_big / std::log1p(eps))));
    if (i < 0) i = 0;
    while (!ok(i)) ++i;
    while (i > 0 && ok(i - 1)) --i;
    return i;
}

}  // namespace offgrid::fastexp

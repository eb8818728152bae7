#ifndef OFFGRID_FASTEXP_HPP
#define OFFGRID_FASTEXP_HPP

#include <cstdint>
#include <vector>

namespace offgrid::fastexp {

/// Exact rational of the form num / 2^log2_den. Used for exponent
/// bookkeeping so that lineage and bracket checks never go through
/// floating point.
class Dyadic {
  public:
    Dyadic() = default;
    Dyadic(std::int64_t num, int log2_den);

    static Dyadic zero() { return Dyadic(); }
    static Dyadic one() { return Dyadic(1, 0); }
    /// 2^{-j}
    static Dyadic pow2(int neg_exponent);

    std::int64_t num() const { return num_; }
    int log2_den() const { return log2_den_; }
    double to_double() const;
    bool is_zero() const { return num_ == 0; }

    Dyadic half() const;

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend bool operator==(const Dyadic& a, const Dyadic& b);
    friend bool operator<(const Dyadic& a, const Dyadic& b);
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return a < b || a == b; }
    friend bool operator>(const Dyadic& a, const Dyadic& b) { return b < a; }
    friend bool operator>=(const Dyadic& a, const Dyadic& b) { return b <= a; }

  private:
    std::int64_t num_ = 0;
    int log2_den_ = 0;  // denominator is 2^log2_den_; num_ odd unless zero
};

/// Maximum supported approximation depth. Keeps all dyadic numerators
/// within the exact range of both int64 and double.
inline constexpr int kMaxDepth = 50;

/// Sign-sequence approximation of a target in (0,1) by a dyadic rational,
/// built as s_j = s_{j-1} + m_j 2^{-j} with m_1 = +1 and m_j in {-1,0,+1}.
/// A trailing zero sign records an exact match (the walk stops there).
class DyadicExponent {
  public:
    DyadicExponent() = default;
    DyadicExponent(std::vector<std::int8_t> signs, Dyadic value);

    /// Runs the comparison walk against a known target in [0,1).
    /// target == 0 yields the empty (zero-valued) exponent.
    static DyadicExponent approximate(double target, int depth);

    const std::vector<std::int8_t>& signs() const { return signs_; }
    int depth() const { return static_cast<int>(signs_.size()); }
    const Dyadic& value() const { return value_; }
    double value_as_double() const { return value_.to_double(); }
    /// True when the walk hit the target exactly (trailing zero sign).
    bool exact_match() const;

  private:
    std::vector<std::int8_t> signs_;
    Dyadic value_;
};

/// Operation counters for the instrumented cost guarantees.
struct OpCounter {
    std::int64_t sqrts = 0;
    std::int64_t mults = 0;  // multiplications and divisions
};

struct PowFlags {
    bool overflow = false;
    bool underflow = false;
};

/// b^z by binary exponentiation, floor(log2 z) squarings plus at most as
/// many extra multiplies. z == 0 returns 1.
double int_pow(double b, std::uint64_t z, OpCounter* ops = nullptr);

struct FracPowResult {
    double value = 1.0;
    DyadicExponent exponent;
};

/// b^s where s is the depth-limited dyadic approximation of f in [0,1),
/// computed with at most `depth` square roots and `depth` multiplies or
/// divides. When exact_zero is true (default), f == 0 short-circuits to 1;
/// otherwise the walk runs and lands on the smallest reachable dyadic.
FracPowResult dyadic_frac_pow(double b, double f, int depth,
                              OpCounter* ops = nullptr, bool exact_zero = true);

/// b^p approximated as int_pow(b, floor(p)) * dyadic_frac_pow(b, frac(p)).
/// Guarantee: result lies between b^{p-2^{-depth}} and b^{p+2^{-depth}},
/// i.e. relative error at most max(b,1/b)^{2^{-depth}} - 1.
double fast_pow(double b, double p, int depth, PowFlags* flags = nullptr,
                OpCounter* ops = nullptr);

/// Smallest depth i such that max(b,1/b)^{2^{-i}} - 1 <= eps.
/// Returns 0 for b == 1 (any depth suffices).
int required_depth(double b, double eps);

}  // namespace offgrid::fastexp

#endif  // OFFGRID_FASTEXP_HPP

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mef {

using Complex = std::complex<double>;

// Error taxonomy used across the library.  UsageError maps to CLI exit 2,
// NumericError to exit 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct PoleError : NumericError {
    using NumericError::NumericError;
};

namespace util {

// Kahan compensated accumulator (real).
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double get() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Compensated accumulator for complex values: one Kahan channel per part.
class KahanSumComplex {
  public:
    void add(const Complex& z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    Complex get() const { return {re_.get(), im_.get()}; }

  private:
    KahanSum re_, im_;
};

std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::uint64_t power_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t mod);

// Deterministic splitmix64; used where tests need reproducible draws.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next() % n; }

  private:
    std::uint64_t state_;
};

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads.
// Callers own any output buffers; writes must be index-disjoint.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace util
}  // namespace mef

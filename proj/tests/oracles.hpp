#pragma once

// Test-side oracles, independent of the library evaluation paths they check.

#include <cstdint>
#include <functional>
#include <vector>

namespace oracles {

// Mertens-style sums by a segmented sieve (block factorization by primes up
// to sqrt(limit)); no linear-sieve machinery shared with the library.
long long mertens_segmented(std::uint64_t limit);
std::vector<int> mobius_segment(std::uint64_t lo, std::uint64_t hi);

// Catalan constant by the alternating series with iterated Euler averaging.
double catalan_constant();

// zeta'(2) = -sum log n / n^2 by direct summation plus an integral tail.
double zeta_prime_2();

// Root localization by plain scan-and-bisect over [lo, hi] with the given
// probe step; returns the refined root midpoints.
std::vector<double> bisection_roots(const std::function<double(double)>& f, double lo, double hi,
                                    double probe_step, double tol);

}  // namespace oracles

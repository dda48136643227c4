#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mef/characters.hpp"
#include "mef/util.hpp"

namespace mef::field {
struct AbelianField;
}

namespace mef::sieve {

// mu(n) and smallest prime factors up to a limit.  The spf array is only
// populated when the table was sieved in-process; tables loaded from a binary
// cache carry mu values alone.
class MobiusTable {
  public:
    std::uint64_t limit() const { return limit_; }
    int mu(std::uint64_t n) const;
    bool has_spf() const { return !spf_.empty(); }
    std::uint32_t spf(std::uint64_t n) const;

    void write_binary(std::ostream& os) const;  // "MBT1" format
    static MobiusTable read_binary(std::istream& is);

    friend MobiusTable mobius_sieve(std::uint64_t N, std::uint64_t memory_budget_bytes);

  private:
    std::uint64_t limit_ = 0;
    std::vector<std::int8_t> mu_;    // index 0 unused
    std::vector<std::uint32_t> spf_;
};

// Linear sieve, O(N) time, O(N) memory.  Rejects N above the memory budget
// with a sizing message.
MobiusTable mobius_sieve(std::uint64_t N, std::uint64_t memory_budget_bytes = 2'000'000'000ULL);

// sum'_{n<=x} chi(n) mu(n); the n == x term gets weight 1/2 at integer x
Complex summatory_twisted(double x, const chars::DirichletCharacter& chi, const MobiusTable& table);

// sum'_{n<=x, n==a mod q} mu(n); requires gcd(a,q) = 1
double summatory_progression(double x, std::uint64_t q, std::uint64_t a, const MobiusTable& table);

// distance from x to the nearest square-free integer coprime to q, != x
double nearest_squarefree_coprime(double x, std::uint64_t q, const MobiusTable& table);

// Dirichlet coefficients of zeta_K and of 1/zeta_K: a_n counts integral
// ideals of norm n, m_n sums mu_K over ideals of norm n.  Both are exact
// integers recovered from complex convolutions of the character sequences.
struct FieldCoefficients {
    std::uint64_t limit = 0;
    std::vector<std::int64_t> ideal_counts;   // a_n, index 0 unused
    std::vector<std::int64_t> mobius_coeffs;  // m_n
    // squarefree_counts[n] > 0 iff some square-free ideal has norm n
    // (coefficients of zeta_K(s)/zeta_K(2s))
    std::vector<std::int64_t> squarefree_counts;

    void write_csv(std::ostream& os) const;  // n, a_n, m_n
};

FieldCoefficients field_coefficients(const field::AbelianField& K, std::uint64_t N);

// sum'_{n<=x} m_n with the half-weight boundary convention
double summatory_field(double x, const FieldCoefficients& coeffs);

struct ActiveNorm {
    std::uint64_t n_x = 0;
    std::int64_t ideal_count = 0;  // a_{n_x}
    bool tie_flag = false;         // equal distance and equal a_n; smaller n picked
};

// Nearest integer n != x carrying a square-free ideal of norm n.  Ties at
// equal distance go to the larger ideal count a_n, then to the smaller n
// (flagged).
ActiveNorm nearest_active_norm(double x, const FieldCoefficients& coeffs);

// sup over integer x <= limit of |A(x) - kappa_K x| / x^(1 - 1/n_K),
// an empirical stand-in for the ideal-count error constant.
double ideal_count_error_scan(double kappa, unsigned degree, const FieldCoefficients& coeffs);

}  // namespace mef::sieve

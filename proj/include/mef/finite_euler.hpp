#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mef/characters.hpp"
#include "mef/rational_angle.hpp"
#include "mef/util.hpp"

namespace mef::feuler {

// F_{q,chi*}(s) = prod_{p|q} (1 - chi*(p) p^{-s}).  Only primes p | q with
// p not dividing the conductor contribute (chi*(p) = 0 kills the rest).  All
// zeros sit on the imaginary axis in arithmetic lattices eta = (theta_p +
// 2 pi k)/log p; the zero at s = 0 has multiplicity r = #{p : chi*(p) = 1}.
struct ActivePrime {
    std::uint64_t p = 2;
    RationalAngle angle;  // chi*(p) = e(angle)
    double log_p = 0.0;
};

struct LatticeZero {
    double eta = 0.0;
    std::uint64_t source_prime = 0;
    int multiplicity = 1;  // 2 when two prime lattices collide (flagged)
};

class FiniteEulerProduct {
  public:
    // chi is a character mod q (possibly principal); chi* its inducer.
    FiniteEulerProduct(std::uint64_t q, const chars::DirichletCharacter& chi);

    std::uint64_t q() const { return q_; }
    const chars::DirichletCharacter& chi_star() const { return chi_star_; }
    const std::vector<ActivePrime>& active_primes() const { return active_; }
    bool is_identically_one() const { return active_.empty(); }
    int zero_multiplicity_at_origin() const { return r_; }
    std::uint64_t rad_q() const { return rad_q_; }
    std::uint64_t rad_d() const { return rad_d_; }
    unsigned omega_ratio() const { return unsigned(active_.size()); }  // omega(q'/d')

    // value and s-derivatives from the expanded Dirichlet polynomial
    Complex value(Complex s) const;
    Complex derivative(Complex s, unsigned order = 1) const;
    Complex log_derivative(Complex s) const;  // F'/F, via the Euler factors

    // Dirichlet-polynomial terms (n, coefficient) with F(s) = sum c_n n^{-s}
    const std::vector<std::pair<std::uint64_t, Complex>>& terms() const { return terms_; }

  private:
    std::uint64_t q_ = 1;
    chars::DirichletCharacter chi_star_;
    std::vector<ActivePrime> active_;
    int r_ = 0;
    std::uint64_t rad_q_ = 1, rad_d_ = 1;
    std::vector<std::pair<std::uint64_t, Complex>> terms_;
};

FiniteEulerProduct build_product(std::uint64_t q, const chars::DirichletCharacter& chi);

// all lattice zeros with |eta| < T, eta != 0, sorted ascending; collisions
// between distinct prime lattices merged with multiplicity 2
std::vector<LatticeZero> zero_lattice(const FiniteEulerProduct& F, double T);

// b of the Hadamard factorization F(s) = s^r e^{a+bs} prod (1 - s/(i eta)) e^{s/(i eta)}:
// b = -1/2 log(q'/d') + i sum_{chi*(p) not in {0,1}} Im chi*(p) / (2 - 2 Re chi*(p)) * log p
Complex b_constant(const FiniteEulerProduct& F);

// relative residual of the K-pair truncated Hadamard product against the
// direct value; the constant e^a is calibrated at s0 = 1
double hadamard_check(const FiniteEulerProduct& F, Complex s, std::size_t K_pairs);

struct ZeroCountCheck {
    std::uint64_t count = 0;  // lattice zeros with t <= eta <= t+h (origin with multiplicity r)
    double bound = 0.0;       // omega(q'/d') + (h/2) log(q'/d') + h^2/(h^2+t^2) r
    bool holds = false;
};
ZeroCountCheck count_zeros(const FiniteEulerProduct& F, double t, double h);

struct ValueBoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};
// right half-plane: 1/|F(sigma+it)| <= exp(2 omega(q) log q), needs sigma >= 1/log q
ValueBoundCheck value_bound_right(const FiniteEulerProduct& F, double sigma, double t);
// left half-plane: |F(sigma+it)| >= |sigma|^omega(q) log 2, needs sigma <= -1/log q
ValueBoundCheck value_bound_left(const FiniteEulerProduct& F, double sigma, double t);

struct LogDerivativeCheck {
    double residual = 0.0;  // |F'/F - (r/s + local zero sum)|
    double budget = 0.0;    // 5 (h^{-1} omega(q'/d') + log(q'/d') + r/(|t|+h))
    bool holds = false;
};
LogDerivativeCheck log_derivative_check(const FiniteEulerProduct& F, Complex s, double h);

void write_lattice_csv(std::ostream& os, const std::vector<LatticeZero>& lattice);

}  // namespace mef::feuler

#pragma once

#include <cstdint>
#include <vector>

#include "mef/characters.hpp"
#include "mef/util.hpp"

namespace mef::field {
struct AbelianField;
}

namespace mef::lfunc {

// Knobs of the Euler-Maclaurin evaluator.  The error estimate carried by
// results is the first-omitted-term heuristic, not a proof.
struct PrecisionPolicy {
    double target_relative_error = 1e-11;
    unsigned euler_maclaurin_order = 12;    // even, >= 2
    double series_cutoff_scale = 1.3;       // N = ceil(|t|*scale + base)
    double series_cutoff_base = 30.0;

    void validate() const;
    std::string fingerprint() const;  // stable id used in cache filenames
};

struct EvalResult {
    Complex value{0.0, 0.0};
    double error_estimate = 0.0;
    bool exact_zero = false;  // set when a trivial zero was hit analytically
};

// log Gamma via Stirling with argument shift; value is branch-insensitive
// under exponentiation.  Reflection handles Re z < 0.5.
Complex log_gamma(Complex z);

// d^k/ds^k zeta_H(s, alpha) for k = 0..kmax (Euler-Maclaurin, alpha in (0,1]).
std::vector<Complex> hurwitz_zeta_derivs(Complex s, double alpha, unsigned kmax,
                                         const PrecisionPolicy& policy, double* err_estimate);

// L(s, chi) by Hurwitz decomposition per residue class; principal characters
// are assembled as zeta(s) * prod_{p|q}(1 - p^{-s}).  Pole at s = 1 for
// principal-like characters is an error.
EvalResult l_eval(Complex s, const chars::DirichletCharacter& chi, const PrecisionPolicy& policy);

// k-th s-derivative along the same route
EvalResult l_derivative(Complex s, const chars::DirichletCharacter& chi, unsigned order,
                        const PrecisionPolicy& policy);

// Completed function Lambda(s,chi) = (d/pi)^((s+kappa)/2) Gamma((s+kappa)/2) L(s,chi),
// satisfying Lambda(s,chi) = eps(chi) Lambda(1-s, conj chi).  chi must be primitive.
Complex completed_lambda(Complex s, const chars::DirichletCharacter& chi,
                         const PrecisionPolicy& policy);

// Left half-plane evaluation through the functional equation
// L(s,chi) = eps(chi) L(1-s,conj chi) 2^s pi^(s-1) d^(1/2-s) Gamma(1-s) sin(pi(s+kappa)/2);
// requires sigma < -1 and chi primitive.  Exact trivial-zero hits return 0 with flag.
EvalResult reflect_eval(Complex s, const chars::DirichletCharacter& chi,
                        const PrecisionPolicy& policy);

// Route picker: direct Euler-Maclaurin in the strip, reflection far left,
// inducer-times-finite-product for imprimitive characters.
EvalResult l_value_auto(Complex s, const chars::DirichletCharacter& chi,
                        const PrecisionPolicy& policy);

// Rotated critical-line value, real for real t, vanishing exactly at the
// critical-line ordinates.  The positive Gamma-factor magnitude is divided
// out so the scale stays bounded at large t; zeros and signs are unchanged.
double hardy_z(double t, const chars::DirichletCharacter& chi, const PrecisionPolicy& policy);

// zeta_K(s) as the product of L(s, chi*) over X(K); simple pole at s = 1
// (residue kappa_K lives on the field descriptor).  Uses reflection when a
// factor needs the left half-plane.
EvalResult dedekind_eval(Complex s, const field::AbelianField& K, const PrecisionPolicy& policy);

// Per-character constants computed once and shared: Gauss sum, root number,
// and the fixed branch of eps^(1/2) used by hardy_z.
struct CharConstants {
    Complex tau;
    Complex epsilon;
    Complex sqrt_epsilon;
};
const CharConstants& char_constants(const chars::DirichletCharacter& chi);

}  // namespace mef::lfunc

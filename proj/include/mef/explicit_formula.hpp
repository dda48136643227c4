#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mef/characters.hpp"
#include "mef/field.hpp"
#include "mef/finite_euler.hpp"
#include "mef/lfunc.hpp"
#include "mef/sieve.hpp"
#include "mef/util.hpp"
#include "mef/zeros.hpp"

namespace mef::explicit_formula {

enum class ResidueKind { nontrivial_zero, trivial_zero, s_zero, imaginary_axis };
enum class ResidueMethod { closed_form, contour_quadrature };

struct ResidueTerm {
    Complex location{0.0, 0.0};
    ResidueKind kind = ResidueKind::s_zero;
    Complex value{0.0, 0.0};
    ResidueMethod method = ResidueMethod::closed_form;
    int multiplicity_used = 1;
};

struct ErrorBudget {
    double main_term = 0.0;      // (x/T_nu)(log(x+3) + attained bound), or the (1.7) analogue
    double boundary_term = 0.0;  // min{1, x/(T <x>)}, or a_{n_x} min{1, x/(T |x-n_x|)}
    double total = 0.0;
    double nearest_distance = 0.0;
    std::uint64_t nearest_norm = 0;  // n_x, field path only
    std::int64_t nearest_count = 1;  // a_{n_x}
    bool nearest_tie_flag = false;
};

struct ExplicitFormulaReport {
    std::string target;
    double x = 0.0;
    double T_requested = 0.0;
    double T_nu = 0.0;
    std::optional<double> T_star;
    double attained_bound = 0.0;
    Complex zero_sum{0.0, 0.0};
    Complex imaginary_axis_sum{0.0, 0.0};
    Complex trivial_sum{0.0, 0.0};
    Complex s_zero_term{0.0, 0.0};
    Complex formula_total{0.0, 0.0};
    Complex sieve_truth{0.0, 0.0};
    Complex residual{0.0, 0.0};
    ErrorBudget budget;
    std::size_t zero_terms_used = 0;
    std::size_t trivial_terms_used = 0;
};

// Shared state for assemblies: sieve table, precision policy, zero caches and
// memoized per-zero derivative values.  Caches are keyed by character label
// and must be count-verified before a zero sum will touch them.
struct AssemblyContext {
    const sieve::MobiusTable* mobius = nullptr;
    lfunc::PrecisionPolicy policy;
    double sigma_grid_step = 0.25;
    double t_grid_step = 0.0625;

    std::map<std::string, zeros::ZeroCache> caches;
    std::map<std::string, std::map<double, Complex>> l_prime_at_zero;  // label -> gamma -> L'(rho)
    std::map<std::string, zeros::GoodOrdinate> good_ordinates;         // memoized find_t_nu
    std::map<std::string, field::GoodOrdinate> field_ordinates;

    const zeros::ZeroCache& cache_for(const chars::DirichletCharacter& chi_star, double T_needed);
    // scan + verify when absent or too short
    void ensure_cache(const chars::DirichletCharacter& chi_star, double T_needed);
    zeros::GoodOrdinate good_ordinate(double T, const std::vector<chars::DirichletCharacter>& set);
};

using Integrand = std::function<Complex(Complex)>;

// reciprocal assemblies that multiply x^s/s inside residue_quadrature
Integrand integrand_inverse_l(const chars::DirichletCharacter& chi,
                              const lfunc::PrecisionPolicy& policy);
Integrand integrand_l_minus1(std::uint64_t q, std::uint64_t a, const lfunc::PrecisionPolicy& policy);
Integrand integrand_inverse_dedekind(const field::AbelianField& K,
                                     const lfunc::PrecisionPolicy& policy);

// (1/2 pi i) of f(s) x^s / s around the pole; trapezoid nodes are doubled
// until two sweeps agree to 1e-10 (k <= 16), then the radius is halved once.
ResidueTerm residue_quadrature(double x, Complex pole, double radius, const Integrand& f,
                               ResidueKind kind);

// Theorem 1 closed-form residues at s = -l (l >= 1) and s = 0 (l == 0) for a
// primitive character; parity-mismatched l gives an exact zero.  The trivial
// character mod 1 takes the Riemann-zeta forms.
ResidueTerm trivial_residue_primitive(double x, const chars::DirichletCharacter& chi, unsigned l,
                                      const lfunc::PrecisionPolicy& policy);

// sum over |gamma| < T_nu of x^rho / (L'(rho, chi) rho); the gamma < 0 half
// comes from the conjugate character's cache.  Terms are added in ascending
// |gamma| order.  chi may be imprimitive, in which case L' = L'(chi*) F on
// the zeros of the inducer.
Complex zero_sum(AssemblyContext& ctx, double x, const chars::DirichletCharacter& chi,
                 double T_nu, std::size_t* terms_used = nullptr);

// Residues of x^s/(L(s,chi*) F(s) s) on the imaginary axis: the s = 0 term by
// quadrature (any pole order), eta != 0 lattice terms in closed form unless
// flagged.  Returns (s_zero_term, sum over eta != 0).
std::pair<Complex, Complex> imaginary_axis_sum(AssemblyContext& ctx, double x,
                                               const feuler::FiniteEulerProduct& F,
                                               double T_star);

ExplicitFormulaReport assemble_theorem1(AssemblyContext& ctx, double x,
                                        const chars::DirichletCharacter& chi, double T,
                                        const zeros::GoodOrdinate* shared_ordinate = nullptr);
ExplicitFormulaReport assemble_theorem2(AssemblyContext& ctx, double x,
                                        const chars::DirichletCharacter& chi, double T,
                                        const zeros::GoodOrdinate* shared_ordinate = nullptr,
                                        const double* shared_t_star = nullptr);
ExplicitFormulaReport assemble_corollary1(AssemblyContext& ctx, double x, std::uint64_t q,
                                          std::uint64_t a, double T);
ExplicitFormulaReport assemble_theorem3(AssemblyContext& ctx, double x,
                                        const field::AbelianField& K, double T,
                                        const sieve::FieldCoefficients& coeffs);

struct DerivativeSumResult {
    double T_nu = 0.0;
    Complex sum{0.0, 0.0};
    double t_nu_over_2pi = 0.0;
    Complex difference{0.0, 0.0};
    double abs_sum = 0.0;  // sum of 1/|L'(rho)|
    std::vector<std::pair<double, Complex>> trajectory;  // (gamma, partial sum)
};

// Empirical leading exponent m of the s = 0 residue of f(s) x^s / s as
// x grows, from a least-squares fit of log|Res| against log log x.  Settles
// the pole-order bookkeeping of the principal-character corner numerically.
double fit_s_zero_leading_exponent(const Integrand& f, const std::vector<double>& xs,
                                   double radius);

// Theorem 4: sum over 0 < gamma < T_nu of 1/L'(rho, chi)
DerivativeSumResult derivative_sum(AssemblyContext& ctx, const chars::DirichletCharacter& chi,
                                   double T);
// Theorem 5 analogue with zeta_K' from the product rule over X(K)
DerivativeSumResult derivative_sum_field(AssemblyContext& ctx, const field::AbelianField& K,
                                         double T);

}  // namespace mef::explicit_formula

#include "mef/explicit_formula.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace mef::explicit_formula {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double euler_gamma = std::numbers::egamma;

std::string ordinate_key(double T, const std::vector<chars::DirichletCharacter>& set,
                         double sstep, double tstep) {
    std::ostringstream ss;
    ss.precision(17);
    ss << T << 'c' << sstep << 'c' << tstep;
    for (const auto& chi : set) ss << '|' << chi.label();
    return ss.str();
}

std::vector<chars::DirichletCharacter> with_conjugate(const chars::DirichletCharacter& chi) {
    std::vector<chars::DirichletCharacter> set = {chi};
    auto bar = chi.conjugate();
    if (bar.label() != chi.label()) set.push_back(bar);
    return set;
}

Complex x_to(double x, Complex s) { return std::exp(s * std::log(x)); }

}  // namespace

const zeros::ZeroCache& AssemblyContext::cache_for(const chars::DirichletCharacter& chi_star,
                                                   double T_needed) {
    auto it = caches.find(chi_star.label());
    if (it == caches.end())
        throw UsageError("no zero cache for " + chi_star.label() + "; run the zeros scan first");
    if (!it->second.count_verified)
        throw UsageError("zero cache for " + chi_star.label() + " is not count-verified");
    if (it->second.t_max + 1e-9 < T_needed)
        throw UsageError("zero cache for " + chi_star.label() + " stops at T=" +
                         std::to_string(it->second.t_max) + ", need " + std::to_string(T_needed));
    return it->second;
}

void AssemblyContext::ensure_cache(const chars::DirichletCharacter& chi_star, double T_needed) {
    auto it = caches.find(chi_star.label());
    if (it != caches.end() && it->second.count_verified && it->second.t_max + 1e-9 >= T_needed)
        return;
    caches[chi_star.label()] = zeros::scan_zeros_verified(chi_star, T_needed, policy);
    l_prime_at_zero.erase(chi_star.label());
}

zeros::GoodOrdinate AssemblyContext::good_ordinate(double T,
                                                   const std::vector<chars::DirichletCharacter>& set) {
    std::string key = ordinate_key(T, set, sigma_grid_step, t_grid_step);
    auto it = good_ordinates.find(key);
    if (it == good_ordinates.end()) {
        it = good_ordinates.emplace(key, zeros::find_t_nu(T, set, policy, sigma_grid_step,
                                                          t_grid_step))
                 .first;
    }
    return it->second;
}

Integrand integrand_inverse_l(const chars::DirichletCharacter& chi,
                              const lfunc::PrecisionPolicy& policy) {
    auto star = chars::primitive_inducer(chi);
    auto F = feuler::build_product(chi.modulus(), chi);
    return [star, F, policy](Complex s) {
        return 1.0 / (lfunc::l_value_auto(s, star, policy).value * F.value(s));
    };
}

Integrand integrand_l_minus1(std::uint64_t q, std::uint64_t a,
                             const lfunc::PrecisionPolicy& policy) {
    auto group = chars::build_group(q);
    if (q > 1 && std::gcd(a % q, q) != 1) throw UsageError("a must be coprime to q");
    std::vector<std::pair<Complex, Integrand>> parts;
    for (const auto& chi : group.characters)
        parts.emplace_back(std::conj(chi.value(a % std::max<std::uint64_t>(q, 1))),
                           integrand_inverse_l(chi, policy));
    const double phi = double(group.euler_phi);
    return [parts, phi](Complex s) {
        Complex out{0.0, 0.0};
        for (const auto& [w, f] : parts) out += w * f(s);
        return out / phi;
    };
}

Integrand integrand_inverse_dedekind(const field::AbelianField& K,
                                     const lfunc::PrecisionPolicy& policy) {
    auto inducers = K.primitive_inducers;
    return [inducers, policy](Complex s) {
        Complex prod{1.0, 0.0};
        for (const auto& chi : inducers) prod *= lfunc::l_value_auto(s, chi, policy).value;
        return 1.0 / prod;
    };
}

ResidueTerm residue_quadrature(double x, Complex pole, double radius, const Integrand& f,
                               ResidueKind kind) {
    if (x <= 0.0) throw UsageError("x must be positive");
    if (radius <= 0.0) throw UsageError("quadrature radius must be positive");
    const double lx = std::log(x);
    for (int halvings = 0; halvings < 2; ++halvings) {
        Complex prev{0.0, 0.0};
        bool have_prev = false;
        for (unsigned k = 5; k <= 16; ++k) {
            const std::size_t n = std::size_t(1) << k;
            util::KahanSumComplex acc;
            for (std::size_t j = 0; j < n; ++j) {
                const double theta = 2.0 * pi * double(j) / double(n);
                const Complex e = std::polar(1.0, theta);
                const Complex s = pole + radius * e;
                acc.add(f(s) * std::exp(s * lx) / s * e);
            }
            Complex val = acc.get() * (radius / double(n));
            if (have_prev && std::abs(val - prev) <= 1e-10 * (1.0 + std::abs(val)))
                return {pole, kind, val, ResidueMethod::contour_quadrature, 1};
            prev = val;
            have_prev = true;
        }
        radius *= 0.5;
    }
    throw NumericError("residue quadrature failed to converge at pole");
}

ResidueTerm trivial_residue_primitive(double x, const chars::DirichletCharacter& chi, unsigned l,
                                      const lfunc::PrecisionPolicy& policy) {
    if (!chi.is_primitive())
        throw UsageError("closed-form residues hold for primitive characters only");
    if (x <= 0.0) throw UsageError("x must be positive");
    const double d = double(chi.modulus());
    const int kappa = chi.parity_kappa();
    const auto chibar = chi.conjugate();

    if (l == 0) {
        if (chi.modulus() == 1) {
            // Res_{s=0} x^s/(zeta(s) s) = 1/zeta(0) = -2
            return {{0.0, 0.0}, ResidueKind::s_zero, {-2.0, 0.0}, ResidueMethod::closed_form, 1};
        }
        const Complex tau = lfunc::char_constants(chi).tau;
        const Complex L1 = lfunc::l_eval({1.0, 0.0}, chibar, policy).value;
        if (kappa == 1) {
            // simple pole from 1/s: residue pi i / (tau L(1, bar chi))
            return {{0.0, 0.0}, ResidueKind::s_zero, Complex{0.0, pi} / (tau * L1),
                    ResidueMethod::closed_form, 1};
        }
        // even chi: L has a simple trivial zero at 0, double pole overall
        const Complex L1p = lfunc::l_derivative({1.0, 0.0}, chibar, 1, policy).value;
        Complex v = 2.0 / (tau * L1) * (std::log(d * x / (2.0 * pi)) + L1p / L1 - euler_gamma);
        return {{0.0, 0.0}, ResidueKind::s_zero, v, ResidueMethod::closed_form, 1};
    }

    // l >= 1: nonzero only when l matches the parity of the trivial zeros
    // (odd chi vanishes at odd negatives, even chi at even negatives)
    if (int(l % 2) != kappa % 2)
        return {{-double(l), 0.0}, ResidueKind::trivial_zero, {0.0, 0.0},
                ResidueMethod::closed_form, 1};

    // magnitudes go through logs: (dx/2pi)^{-l} and the factorial can each
    // overflow a double separately while their ratio stays tame at small x
    const Complex tau = chi.modulus() == 1 ? Complex{1.0, 0.0} : lfunc::char_constants(chi).tau;
    if (kappa == 1) {
        const unsigned k = (l + 1) / 2;  // l = 2k - 1
        const Complex L2k = lfunc::l_eval({double(2 * k), 0.0}, chibar, policy).value;
        double sign = (k % 2 == 0) ? 1.0 : -1.0;
        double log_mag = -double(2 * k - 1) * std::log(d * x / (2.0 * pi)) -
                         std::log(double(2 * k - 1)) - std::lgamma(double(2 * k));
        if (log_mag > 700.0)
            throw NumericError("trivial-zero residue overflows double at x = " + std::to_string(x));
        Complex v = Complex{0.0, sign * 2.0} * std::exp(log_mag) / (tau * L2k);
        return {{-double(l), 0.0}, ResidueKind::trivial_zero, v, ResidueMethod::closed_form, 1};
    }
    // even chi, l = 2k.  Derived sign is (-1)^(k+1): at s = -2k the functional
    // equation gives L'(-2k, chi) = (-1)^k tau L(2k+1, bar chi) (2k)! (d/2pi)^(2k) / 2,
    // and the residue x^(-2k)/(L'(-2k) (-2k)) flips the sign once more.
    const unsigned k = l / 2;
    const Complex L2k1 = lfunc::l_eval({double(2 * k + 1), 0.0}, chibar, policy).value;
    double sign = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^(k+1)
    double log_mag = -double(2 * k) * std::log(d * x / (2.0 * pi)) - std::log(double(k)) -
                     std::lgamma(double(2 * k + 1));
    if (log_mag > 700.0)
        throw NumericError("trivial-zero residue overflows double at x = " + std::to_string(x));
    Complex v = sign * std::exp(log_mag) / (tau * L2k1);
    return {{-double(l), 0.0}, ResidueKind::trivial_zero, v, ResidueMethod::closed_form, 1};
}

namespace {

Complex memoized_l_prime(AssemblyContext& ctx, const chars::DirichletCharacter& chi_star,
                         double gamma) {
    auto& per = ctx.l_prime_at_zero[chi_star.label()];
    auto it = per.find(gamma);
    if (it == per.end()) {
        Complex v = lfunc::l_derivative({0.5, gamma}, chi_star, 1, ctx.policy).value;
        it = per.emplace(gamma, v).first;
    }
    return it->second;
}

// one-sided sum over the cache of psi (gamma > 0), with L' scaled by F(rho)
void half_zero_sum(AssemblyContext& ctx, double x, const chars::DirichletCharacter& psi,
                      const feuler::FiniteEulerProduct& F, double T_nu,
                      std::vector<std::pair<double, Complex>>& terms) {
    const auto& cache = ctx.cache_for(psi, T_nu);
    for (const auto& r : cache.records) {
        if (r.ordinate_gamma >= T_nu) break;
        const Complex rho{0.5, r.ordinate_gamma};
        Complex w = memoized_l_prime(ctx, psi, r.ordinate_gamma) * F.value(rho);
        Complex term;
        if (std::abs(w) < 1e-12) {
            // suspected multiple zero: fall back to a contour residue
            auto f = [&](Complex s) {
                return 1.0 / (lfunc::l_value_auto(s, psi, ctx.policy).value * F.value(s));
            };
            term = residue_quadrature(x, rho, 0.01, f, ResidueKind::nontrivial_zero).value;
        } else {
            term = x_to(x, rho) / (w * rho);
        }
        terms.emplace_back(r.ordinate_gamma, term);
    }
}

}  // namespace

Complex zero_sum(AssemblyContext& ctx, double x, const chars::DirichletCharacter& chi,
                 double T_nu, std::size_t* terms_used) {
    auto star = chars::primitive_inducer(chi);
    auto starbar = star.conjugate();
    auto F = feuler::build_product(chi.modulus(), chi);
    auto Fbar = feuler::build_product(chi.modulus(), chi.conjugate());

    std::vector<std::pair<double, Complex>> upper, lower;
    half_zero_sum(ctx, x, star, F, T_nu, upper);
    if (starbar.label() == star.label()) {
        lower = upper;  // real character: mirrored zeros
    } else {
        half_zero_sum(ctx, x, starbar, Fbar, T_nu, lower);
    }
    for (auto& [g, t] : lower) t = std::conj(t);

    std::vector<std::pair<double, Complex>> merged;
    merged.reserve(upper.size() + lower.size());
    merged.insert(merged.end(), upper.begin(), upper.end());
    merged.insert(merged.end(), lower.begin(), lower.end());
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    util::KahanSumComplex acc;
    for (const auto& [g, t] : merged) acc.add(t);
    if (terms_used) *terms_used = merged.size();
    return acc.get();
}

std::pair<Complex, Complex> imaginary_axis_sum(AssemblyContext& ctx, double x,
                                               const feuler::FiniteEulerProduct& F,
                                               double T_star) {
    if (F.is_identically_one())
        throw UsageError("imaginary-axis residues need a nontrivial finite product");
    const auto& star = F.chi_star();
    auto lattice = feuler::zero_lattice(F, T_star);

    auto inv_l = [&](Complex s) {
        return 1.0 / (lfunc::l_value_auto(s, star, ctx.policy).value * F.value(s));
    };

    // s = 0 by quadrature, radius kept inside the first lattice ordinate and
    // away from the trivial-zero line and the s = 1 pole of the zeta case
    double first_eta = std::numeric_limits<double>::infinity();
    for (const auto& z : lattice) first_eta = std::min(first_eta, std::abs(z.eta));
    double radius = std::min({0.35, first_eta / 2.0});
    Complex s_zero = residue_quadrature(x, {0.0, 0.0}, radius, inv_l, ResidueKind::s_zero).value;

    std::sort(lattice.begin(), lattice.end(), [](const auto& a, const auto& b) {
        return std::abs(a.eta) == std::abs(b.eta) ? a.eta < b.eta
                                                  : std::abs(a.eta) < std::abs(b.eta);
    });
    util::KahanSumComplex acc;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        const auto& z = lattice[i];
        const Complex ie{0.0, z.eta};
        // closest other singularity on the axis bounds the fallback radius
        double gap = std::abs(z.eta);
        for (std::size_t j = 0; j < lattice.size(); ++j)
            if (j != i) gap = std::min(gap, std::abs(z.eta - lattice[j].eta));
        Complex lval = lfunc::l_value_auto(ie, star, ctx.policy).value;
        if (z.multiplicity > 1 || std::abs(lval) <= 1e-8) {
            if (std::abs(lval) <= 1e-8)
                std::cerr << "[mef] warning: |L(i eta)| tiny at eta = " << z.eta
                          << "; residue taken by quadrature\n";
            acc.add(residue_quadrature(x, ie, std::min(0.3, gap / 2.0), inv_l,
                                       ResidueKind::imaginary_axis)
                        .value);
        } else {
            acc.add(x_to(x, ie) / (lval * F.derivative(ie, 1) * ie));
        }
    }
    return {s_zero, acc.get()};
}

namespace {

// trivial-zero series sum_{l>=1}, closed forms scaled by 1/F(-l) (F == 1 for
// the primitive path); stops at l > 200 or once the parity-matched terms fall
// below 1e-16 (1 + |partial|)
Complex trivial_series(AssemblyContext& ctx, double x, const chars::DirichletCharacter& chi_star,
                       const feuler::FiniteEulerProduct* F, std::size_t* used) {
    util::KahanSumComplex acc;
    std::size_t count = 0;
    double peak = 0.0;
    for (unsigned l = 1; l <= 200; ++l) {
        ResidueTerm t = trivial_residue_primitive(x, chi_star, l, ctx.policy);
        if (t.value == Complex{0.0, 0.0}) continue;  // parity mismatch
        Complex term = t.value;
        if (F) term /= F->value({-double(l), 0.0});
        acc.add(term);
        peak = std::max(peak, std::abs(term));
        ++count;
        if (std::abs(term) < 1e-16 * (1.0 + std::abs(acc.get()))) break;
    }
    // for qx/2pi << 1 the series cancels through terms of size exp(2pi/qx);
    // past ~1e12 the cancellation eats every significant digit
    if (peak > 1e12)
        throw NumericError("trivial-zero series is ill-conditioned at x = " + std::to_string(x) +
                           " (terms reach " + std::to_string(peak) + "); x is too small");
    if (used) *used = count;
    return acc.get();
}

ErrorBudget character_budget(AssemblyContext& ctx, double x, std::uint64_t q, double T_nu,
                             double attained_bound) {
    ErrorBudget b;
    b.nearest_distance = sieve::nearest_squarefree_coprime(x, q, *ctx.mobius);
    b.main_term = x / T_nu * (std::log(x + 3.0) + attained_bound);
    b.boundary_term = std::min(1.0, x / (T_nu * b.nearest_distance));
    b.total = b.main_term + b.boundary_term;
    return b;
}

}  // namespace

ExplicitFormulaReport assemble_theorem1(AssemblyContext& ctx, double x,
                                        const chars::DirichletCharacter& chi, double T,
                                        const zeros::GoodOrdinate* shared_ordinate) {
    if (!chi.is_primitive()) throw UsageError("theorem 1 path needs a primitive character");
    if (!ctx.mobius) throw UsageError("assembly context has no sieve table");
    if (T < 2.0 / x) throw UsageError("need T >= 2/x");
    ExplicitFormulaReport rep;
    rep.target = "theorem1 chi=" + chi.label();
    rep.x = x;
    rep.T_requested = T;

    zeros::GoodOrdinate good =
        shared_ordinate ? *shared_ordinate : ctx.good_ordinate(T, with_conjugate(chi));
    rep.T_nu = good.t_nu;
    rep.attained_bound = good.attained_bound;

    for (const auto& psi : with_conjugate(chi)) ctx.ensure_cache(psi, good.t_nu);

    rep.zero_sum = zero_sum(ctx, x, chi, good.t_nu, &rep.zero_terms_used);
    rep.s_zero_term = trivial_residue_primitive(x, chi, 0, ctx.policy).value;
    rep.trivial_sum = trivial_series(ctx, x, chi, nullptr, &rep.trivial_terms_used);
    rep.formula_total = rep.zero_sum + rep.imaginary_axis_sum + rep.trivial_sum + rep.s_zero_term;
    rep.sieve_truth = sieve::summatory_twisted(x, chi, *ctx.mobius);
    rep.residual = rep.sieve_truth - rep.formula_total;
    rep.budget = character_budget(ctx, x, chi.modulus(), good.t_nu, good.attained_bound);
    return rep;
}

ExplicitFormulaReport assemble_theorem2(AssemblyContext& ctx, double x,
                                        const chars::DirichletCharacter& chi, double T,
                                        const zeros::GoodOrdinate* shared_ordinate,
                                        const double* shared_t_star) {
    if (!ctx.mobius) throw UsageError("assembly context has no sieve table");
    if (T < 2.0 / x) throw UsageError("need T >= 2/x");
    auto F = feuler::build_product(chi.modulus(), chi);
    if (F.is_identically_one())
        throw UsageError("F == 1: run the theorem 1 path on the inducer instead");
    auto star = chars::primitive_inducer(chi);

    ExplicitFormulaReport rep;
    rep.target = "theorem2 chi=" + chi.label() + " q=" + std::to_string(chi.modulus());
    rep.x = x;
    rep.T_requested = T;

    zeros::GoodOrdinate good =
        shared_ordinate ? *shared_ordinate : ctx.good_ordinate(T, with_conjugate(star));
    rep.T_nu = good.t_nu;
    rep.attained_bound = good.attained_bound;
    for (const auto& psi : with_conjugate(star)) ctx.ensure_cache(psi, good.t_nu);

    double t_star;
    if (shared_t_star) {
        t_star = *shared_t_star;
    } else {
        std::vector<const feuler::FiniteEulerProduct*> ptrs = {&F};
        t_star = zeros::find_t_star(good.t_nu, ptrs).t_star;
    }
    rep.T_star = t_star;

    rep.zero_sum = zero_sum(ctx, x, chi, good.t_nu, &rep.zero_terms_used);
    auto [s0, imag] = imaginary_axis_sum(ctx, x, F, t_star);
    rep.s_zero_term = s0;
    rep.imaginary_axis_sum = imag;
    rep.trivial_sum = trivial_series(ctx, x, star, &F, &rep.trivial_terms_used);
    rep.formula_total = rep.zero_sum + rep.imaginary_axis_sum + rep.trivial_sum + rep.s_zero_term;
    rep.sieve_truth = sieve::summatory_twisted(x, chi, *ctx.mobius);
    rep.residual = rep.sieve_truth - rep.formula_total;
    rep.budget = character_budget(ctx, x, chi.modulus(), good.t_nu, good.attained_bound);
    return rep;
}

ExplicitFormulaReport assemble_corollary1(AssemblyContext& ctx, double x, std::uint64_t q,
                                          std::uint64_t a, double T) {
    if (q == 0) throw UsageError("modulus must be positive");
    if (q > 1 && std::gcd(a % q, q) != 1) throw UsageError("a must be coprime to q");
    if (!ctx.mobius) throw UsageError("assembly context has no sieve table");
    if (T < 2.0 / x) throw UsageError("need T >= 2/x");
    auto group = chars::build_group(q);

    // one good ordinate for the whole primitive-inducer family
    std::vector<chars::DirichletCharacter> inducers;
    for (const auto& chi : group.characters) {
        auto star = chars::primitive_inducer(chi);
        bool dup = false;
        for (const auto& have : inducers) dup = dup || have.label() == star.label();
        if (!dup) inducers.push_back(star);
    }
    zeros::GoodOrdinate good = ctx.good_ordinate(T, inducers);

    // one T_* against the union of the finite-product lattices
    std::vector<feuler::FiniteEulerProduct> products;
    for (const auto& chi : group.characters) {
        auto F = feuler::build_product(q, chi);
        if (!F.is_identically_one()) products.push_back(std::move(F));
    }
    double t_star = good.t_nu + 0.5;
    if (!products.empty()) {
        std::vector<const feuler::FiniteEulerProduct*> ptrs;
        for (const auto& F : products) ptrs.push_back(&F);
        t_star = zeros::find_t_star(good.t_nu, ptrs).t_star;
    }

    ExplicitFormulaReport rep;
    rep.target = "corollary1 q=" + std::to_string(q) + " a=" + std::to_string(a % std::max<std::uint64_t>(q, 1));
    rep.x = x;
    rep.T_requested = T;
    rep.T_nu = good.t_nu;
    rep.T_star = t_star;
    rep.attained_bound = good.attained_bound;

    const double phi = double(group.euler_phi);
    util::KahanSumComplex zsum, isum, tsum, ssum;
    for (const auto& chi : group.characters) {
        Complex w = std::conj(chi.value(a % std::max<std::uint64_t>(q, 1))) / phi;
        auto F = feuler::build_product(q, chi);
        ExplicitFormulaReport sub =
            F.is_identically_one()
                ? assemble_theorem1(ctx, x, chars::primitive_inducer(chi), T, &good)
                : assemble_theorem2(ctx, x, chi, T, &good, &t_star);
        zsum.add(w * sub.zero_sum);
        isum.add(w * sub.imaginary_axis_sum);
        tsum.add(w * sub.trivial_sum);
        ssum.add(w * sub.s_zero_term);
        rep.zero_terms_used += sub.zero_terms_used;
        rep.trivial_terms_used += sub.trivial_terms_used;
    }
    rep.zero_sum = zsum.get();
    rep.imaginary_axis_sum = isum.get();
    rep.trivial_sum = tsum.get();
    rep.s_zero_term = ssum.get();
    rep.formula_total = rep.zero_sum + rep.imaginary_axis_sum + rep.trivial_sum + rep.s_zero_term;
    if (std::abs(rep.formula_total.imag()) >= 1e-8)
        throw NumericError("corollary 1 total failed to be real; conjugate pairing broke");
    rep.sieve_truth = {sieve::summatory_progression(x, q, a, *ctx.mobius), 0.0};
    rep.residual = rep.sieve_truth - rep.formula_total;
    rep.budget = character_budget(ctx, x, q, good.t_nu, good.attained_bound);
    return rep;
}

namespace {

struct FieldZero {
    double gamma;
    std::size_t chi_index;
    int multiplicity;
};

Complex dedekind_prime_at_zero(AssemblyContext& ctx, const field::AbelianField& K,
                               std::size_t chi_index, double gamma) {
    auto& per = ctx.l_prime_at_zero["zK:" + K.label + ":" + std::to_string(chi_index)];
    auto it = per.find(gamma);
    if (it == per.end()) {
        const Complex rho{0.5, gamma};
        Complex v = lfunc::l_derivative(rho, K.primitive_inducers[chi_index], 1, ctx.policy).value;
        for (std::size_t j = 0; j < K.primitive_inducers.size(); ++j)
            if (j != chi_index)
                v *= lfunc::l_value_auto(rho, K.primitive_inducers[j], ctx.policy).value;
        it = per.emplace(gamma, v).first;
    }
    return it->second;
}

std::vector<FieldZero> merged_field_zeros(AssemblyContext& ctx, const field::AbelianField& K,
                                          double T_nu) {
    std::vector<FieldZero> zs;
    for (std::size_t i = 0; i < K.primitive_inducers.size(); ++i) {
        const auto& cache = ctx.cache_for(K.primitive_inducers[i], T_nu);
        for (const auto& r : cache.records)
            if (r.ordinate_gamma < T_nu) zs.push_back({r.ordinate_gamma, i, 1});
    }
    std::sort(zs.begin(), zs.end(),
              [](const FieldZero& a, const FieldZero& b) { return a.gamma < b.gamma; });
    // ordinates coinciding across characters within 1e-9 get merged
    std::vector<FieldZero> out;
    for (const auto& z : zs) {
        if (!out.empty() && z.gamma - out.back().gamma < 1e-9 &&
            z.chi_index != out.back().chi_index) {
            out.back().multiplicity += 1;
        } else {
            out.push_back(z);
        }
    }
    return out;
}

}  // namespace

ExplicitFormulaReport assemble_theorem3(AssemblyContext& ctx, double x,
                                        const field::AbelianField& K, double T,
                                        const sieve::FieldCoefficients& coeffs) {
    if (T < 2.0 / x) throw UsageError("need T >= 2/x");
    ExplicitFormulaReport rep;
    rep.target = "theorem3 K=" + K.label;
    rep.x = x;
    rep.T_requested = T;

    std::ostringstream fkey;
    fkey.precision(17);
    fkey << K.label << '@' << T;
    auto fit = ctx.field_ordinates.find(fkey.str());
    if (fit == ctx.field_ordinates.end())
        fit = ctx.field_ordinates
                  .emplace(fkey.str(), field::good_ordinate_field(K, T, ctx.policy,
                                                                  ctx.sigma_grid_step,
                                                                  ctx.t_grid_step))
                  .first;
    const auto& good = fit->second;
    rep.T_nu = good.t_nu;
    rep.attained_bound = good.attained_bound;

    for (const auto& chi : K.primitive_inducers) ctx.ensure_cache(chi, good.t_nu);

    auto inv_zk = integrand_inverse_dedekind(K, ctx.policy);

    // zeros: upper half from the per-character caches, lower half by symmetry
    util::KahanSumComplex upper;
    auto zs = merged_field_zeros(ctx, K, good.t_nu);
    for (const auto& z : zs) {
        const Complex rho{0.5, z.gamma};
        if (z.multiplicity > 1) {
            upper.add(residue_quadrature(x, rho, 1e-4, inv_zk, ResidueKind::nontrivial_zero).value);
            continue;
        }
        Complex zkp = dedekind_prime_at_zero(ctx, K, z.chi_index, z.gamma);
        if (std::abs(zkp) < 1e-12) {
            upper.add(residue_quadrature(x, rho, 1e-4, inv_zk, ResidueKind::nontrivial_zero).value);
        } else {
            upper.add(x_to(x, rho) / (zkp * rho));
        }
    }
    rep.zero_terms_used = 2 * zs.size();
    rep.zero_sum = upper.get() + std::conj(upper.get());

    // residues at -l, l >= 0, all by quadrature; radius follows 1/log(x+3)
    const double radius = std::min(0.4, 1.0 / std::log(x + 3.0));
    rep.s_zero_term = residue_quadrature(x, {0.0, 0.0}, radius, inv_zk, ResidueKind::s_zero).value;
    util::KahanSumComplex triv;
    std::size_t below = 0;
    for (unsigned l = 1; l <= 200; ++l) {
        Complex term =
            residue_quadrature(x, {-double(l), 0.0}, radius, inv_zk, ResidueKind::trivial_zero)
                .value;
        triv.add(term);
        ++rep.trivial_terms_used;
        if (std::abs(term) < 1e-13 * (1.0 + std::abs(triv.get()))) {
            if (++below >= 2) break;
        } else {
            below = 0;
        }
    }
    rep.trivial_sum = triv.get();

    rep.formula_total = rep.zero_sum + rep.imaginary_axis_sum + rep.trivial_sum + rep.s_zero_term;
    rep.sieve_truth = {sieve::summatory_field(x, coeffs), 0.0};
    rep.residual = rep.sieve_truth - rep.formula_total;

    // (1.7)-shaped budget with unit constants and the empirical Phi_0
    const double nk = double(K.degree);
    const double phi0 = sieve::ideal_count_error_scan(K.residue_kappa, K.degree, coeffs);
    auto nearest = sieve::nearest_active_norm(x, coeffs);
    rep.budget.nearest_norm = nearest.n_x;
    rep.budget.nearest_count = nearest.ideal_count;
    rep.budget.nearest_tie_flag = nearest.tie_flag;
    rep.budget.nearest_distance = std::abs(x - double(nearest.n_x));
    const double lx2 = std::log(x + 2.0);
    const double phik = std::min(std::exp(nk / x) * std::pow(lx2, nk),
                                 K.residue_kappa * lx2 + phi0 / (1.0 / lx2 + 1.0 / nk));
    rep.budget.main_term = x / good.t_nu * (phik + good.attained_bound);
    rep.budget.boundary_term =
        double(nearest.ideal_count) *
        std::min(1.0, x / (good.t_nu * rep.budget.nearest_distance));
    rep.budget.total = rep.budget.main_term + rep.budget.boundary_term;
    return rep;
}

double fit_s_zero_leading_exponent(const Integrand& f, const std::vector<double>& xs,
                                   double radius) {
    if (xs.size() < 2) throw UsageError("exponent fit needs at least two x values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double x : xs) {
        Complex res = residue_quadrature(x, {0.0, 0.0}, radius, f, ResidueKind::s_zero).value;
        double u = std::log(std::log(x));
        double v = std::log(std::abs(res));
        sx += u;
        sy += v;
        sxx += u * u;
        sxy += u * v;
    }
    double n = double(xs.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

DerivativeSumResult derivative_sum(AssemblyContext& ctx, const chars::DirichletCharacter& chi,
                                   double T) {
    if (!chi.is_primitive()) throw UsageError("derivative sums need a primitive character");
    DerivativeSumResult out;
    zeros::GoodOrdinate good = ctx.good_ordinate(T, with_conjugate(chi));
    out.T_nu = good.t_nu;
    out.t_nu_over_2pi = good.t_nu / (2.0 * pi);
    ctx.ensure_cache(chi, good.t_nu);
    const auto& cache = ctx.cache_for(chi, good.t_nu);
    util::KahanSumComplex acc;
    util::KahanSum aacc;
    for (const auto& r : cache.records) {
        if (r.ordinate_gamma >= good.t_nu) break;
        Complex lp = memoized_l_prime(ctx, chi, r.ordinate_gamma);
        if (std::abs(lp) < 1e-12)
            throw NumericError("|L'(rho)| < 1e-12 at gamma = " + std::to_string(r.ordinate_gamma) +
                               "; suspected multiple zero");
        acc.add(1.0 / lp);
        aacc.add(1.0 / std::abs(lp));
        out.trajectory.emplace_back(r.ordinate_gamma, acc.get());
    }
    out.sum = acc.get();
    out.abs_sum = aacc.get();
    out.difference = out.sum - Complex{out.t_nu_over_2pi, 0.0};
    return out;
}

DerivativeSumResult derivative_sum_field(AssemblyContext& ctx, const field::AbelianField& K,
                                         double T) {
    DerivativeSumResult out;
    std::ostringstream fkey;
    fkey.precision(17);
    fkey << K.label << '@' << T;
    auto fit = ctx.field_ordinates.find(fkey.str());
    if (fit == ctx.field_ordinates.end())
        fit = ctx.field_ordinates
                  .emplace(fkey.str(), field::good_ordinate_field(K, T, ctx.policy,
                                                                  ctx.sigma_grid_step,
                                                                  ctx.t_grid_step))
                  .first;
    const auto& good = fit->second;
    out.T_nu = good.t_nu;
    out.t_nu_over_2pi = good.t_nu / (2.0 * pi);
    for (const auto& chi : K.primitive_inducers) ctx.ensure_cache(chi, good.t_nu);
    auto zs = merged_field_zeros(ctx, K, good.t_nu);
    util::KahanSumComplex acc;
    util::KahanSum aacc;
    for (const auto& z : zs) {
        if (z.multiplicity > 1)
            throw NumericError("coinciding ordinates across factors; simplicity assumption broke");
        Complex zkp = dedekind_prime_at_zero(ctx, K, z.chi_index, z.gamma);
        if (std::abs(zkp) < 1e-12)
            throw NumericError("|zeta_K'(rho)| < 1e-12; suspected multiple zero");
        acc.add(1.0 / zkp);
        aacc.add(1.0 / std::abs(zkp));
        out.trajectory.emplace_back(z.gamma, acc.get());
    }
    out.sum = acc.get();
    out.abs_sum = aacc.get();
    out.difference = out.sum - Complex{out.t_nu_over_2pi, 0.0};
    return out;
}

}  // namespace mef::explicit_formula

#include "mef/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "mef/lfunc.hpp"

namespace mef::field {

AbelianField build_field(std::uint64_t m, const std::vector<std::string>& generator_labels,
                         const lfunc::PrecisionPolicy& policy) {
    auto group = chars::build_group(m);
    std::vector<chars::DirichletCharacter> gens;
    for (const auto& lbl : generator_labels) gens.push_back(group.by_label(lbl));
    return build_field(m, gens, policy);
}

AbelianField build_field(std::uint64_t m, const std::vector<chars::DirichletCharacter>& generators,
                         const lfunc::PrecisionPolicy& policy) {
    for (const auto& g : generators)
        if (g.modulus() != m) throw UsageError("generator characters must live mod m");
    auto group = chars::build_group(m);

    // closure of the generated subgroup
    std::vector<chars::DirichletCharacter> members = {group.principal()};
    std::set<std::string> seen = {group.principal().label()};
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<chars::DirichletCharacter> fresh;
        for (const auto& g : generators)
            for (const auto& x : members) {
                auto prod = x * g;
                if (seen.insert(prod.label()).second) {
                    fresh.push_back(prod);
                    grew = true;
                }
            }
        members.insert(members.end(), fresh.begin(), fresh.end());
    }
    for (const auto& x : members)
        if (!seen.count(x.conjugate().label()))
            throw UsageError("character set is not closed under conjugation");
    std::sort(members.begin(), members.end(),
              [](const auto& a, const auto& b) { return a.label() < b.label(); });

    AbelianField K;
    K.cyclotomic_conductor = m;
    K.character_set = members;
    K.degree = unsigned(members.size());

    unsigned odd = 0;
    std::uint64_t disc_abs = 1;
    double kappa = 1.0;
    double kappa_im = 0.0;
    Complex kprod{1.0, 0.0};
    for (const auto& chi : members) {
        auto star = chars::primitive_inducer(chi);
        K.primitive_inducers.push_back(star);
        if (star.parity_kappa() == 1) ++odd;
        disc_abs *= star.modulus();
        if (!star.is_principal()) kprod *= lfunc::l_eval({1.0, 0.0}, star, policy).value;
    }
    kappa = kprod.real();
    kappa_im = kprod.imag();
    if (std::abs(kappa_im) > 1e-9 * std::max(1.0, std::abs(kappa)))
        throw NumericError("residue kappa_K came out non-real; character set inconsistent");
    if (kappa <= 0.0) throw NumericError("residue kappa_K must be positive");

    // Galois fields are totally real or totally imaginary; any odd character
    // forces the imaginary case, where the odd members are exactly half the set.
    if (odd == 0) {
        K.r1 = K.degree;
        K.r2 = 0;
    } else {
        if (2 * odd != K.degree)
            throw NumericError("odd characters are not half of the set; not conjugation-closed?");
        K.r1 = 0;
        K.r2 = K.degree / 2;
    }
    K.discriminant = (K.r2 % 2 == 0) ? std::int64_t(disc_abs) : -std::int64_t(disc_abs);
    K.residue_kappa = kappa;

    K.label = "K" + std::to_string(m);
    for (const auto& chi : members)
        if (!chi.is_principal()) K.label += "_" + chi.label();
    return K;
}

GoodOrdinate good_ordinate_field(const AbelianField& K, double T, const lfunc::PrecisionPolicy& policy,
                                 double sigma_step, double t_step) {
    if (T <= 0) throw UsageError("T must be positive");
    std::vector<double> sigmas;
    for (double sg = 0.5; sg <= 2.0 + 1e-12; sg += sigma_step) sigmas.push_back(sg);
    const auto n_t = std::size_t(std::floor(T / t_step)) + 1;
    std::vector<double> bound(n_t, std::numeric_limits<double>::infinity());
    std::vector<double> per_char(n_t, std::numeric_limits<double>::infinity());
    util::parallel_for(n_t, [&](std::size_t i) {
        const double t = T + double(i) * t_step;
        if (t > 2.0 * T + 1e-12) return;
        double worst = 0.0;
        std::vector<double> factor_worst(K.primitive_inducers.size(), 0.0);
        for (double sg : sigmas) {
            Complex prod{1.0, 0.0};
            for (std::size_t c = 0; c < K.primitive_inducers.size(); ++c) {
                Complex v = lfunc::l_value_auto({sg, t}, K.primitive_inducers[c], policy).value;
                if (std::abs(v) == 0.0) return;  // grid point on a zero: skip
                factor_worst[c] = std::max(factor_worst[c], 1.0 / std::abs(v));
                prod *= v;
            }
            worst = std::max(worst, 1.0 / std::abs(prod));
        }
        bound[i] = worst;
        double p = 1.0;
        for (double f : factor_worst) p *= f;
        per_char[i] = p;
    });
    // same height-weighted selection as find_t_nu
    constexpr double kBudgetLogOffset = 6.0;
    GoodOrdinate out;
    out.sigma_step = sigma_step;
    out.t_step = t_step;
    out.attained_bound = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_t; ++i) {
        const double t = T + double(i) * t_step;
        if (t > 2.0 * T + 1e-12) break;
        const double score = (kBudgetLogOffset + bound[i]) / t;
        if (score < best) {
            best = score;
            out.attained_bound = bound[i];
            out.per_character_bound_product = per_char[i];
            out.t_nu = t;
        }
    }
    if (!std::isfinite(out.attained_bound))
        throw NumericError("good_ordinate_field: every grid ordinate hit a zero");
    return out;
}

void write_descriptor(std::ostream& os, const AbelianField& K) {
    os << "m " << K.cyclotomic_conductor << '\n';
    for (const auto& chi : K.character_set) os << "chi " << chi.label() << '\n';
    os.precision(17);
    os << "degree " << K.degree << '\n'
       << "signature " << K.r1 << ' ' << K.r2 << '\n'
       << "discriminant " << K.discriminant << '\n'
       << "kappa " << K.residue_kappa << '\n';
}

}  // namespace mef::field

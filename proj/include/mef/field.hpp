#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mef/characters.hpp"
#include "mef/util.hpp"

namespace mef::lfunc {
struct PrecisionPolicy;
}

namespace mef::field {

// An Abelian number field given by its character group: K sits inside the
// m-th cyclotomic field and X(K) is the subgroup of characters mod m cutting
// it out.  zeta_K factors as the product of L(s, chi*) over X(K).
struct AbelianField {
    std::uint64_t cyclotomic_conductor = 1;          // m
    std::vector<chars::DirichletCharacter> character_set;  // X(K), sorted by label
    std::vector<chars::DirichletCharacter> primitive_inducers;  // chi* per member
    unsigned degree = 1;                             // n_K = #X(K)
    unsigned r1 = 1, r2 = 0;                         // signature
    std::int64_t discriminant = 1;                   // d_K
    double residue_kappa = 1.0;                      // residue of zeta_K at 1
    std::string label;

    bool totally_real() const { return r2 == 0; }
};

// Builds the field descriptor from generator characters mod m.  The generated
// set must be closed under conjugation (automatic for generated subgroups).
AbelianField build_field(std::uint64_t m, const std::vector<std::string>& generator_labels,
                         const lfunc::PrecisionPolicy& policy);
AbelianField build_field(std::uint64_t m, const std::vector<chars::DirichletCharacter>& generators,
                         const lfunc::PrecisionPolicy& policy);

struct GoodOrdinate {
    double t_nu = 0.0;
    double attained_bound = 0.0;           // max over the sigma grid of 1/|zeta_K|
    double per_character_bound_product = 0.0;  // product of per-factor grid bounds at t_nu
    double sigma_step = 0.0;
    double t_step = 0.0;
};

// Grid minimizer of max_{sigma in [1/2,2]} 1/|zeta_K(sigma+it)| over
// t in [T, 2T].  Grid points sitting on a zero are skipped.
GoodOrdinate good_ordinate_field(const AbelianField& K, double T, const lfunc::PrecisionPolicy& policy,
                                 double sigma_step = 0.25, double t_step = 0.0625);

// Plain text serialization (m, character labels, derived constants).
void write_descriptor(std::ostream& os, const AbelianField& K);

}  // namespace mef::field

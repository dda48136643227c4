#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mef/rational_angle.hpp"
#include "mef/util.hpp"

namespace mef::chars {

// One cyclic factor of (Z/qZ)*: a generator lifted to Z/qZ by CRT, its order,
// and a discrete-log table over the prime-power component.
struct UnitGroupFactor {
    std::uint64_t prime_power = 1;  // p^e component this factor lives in
    std::uint64_t generator = 1;    // lifted generator (== 1 mod q/p^e)
    std::uint64_t order = 1;
};

// Shared per-modulus tables: factor list plus discrete logs for every unit.
// Built once per q; characters hold a shared pointer to it.
class UnitGroup {
  public:
    explicit UnitGroup(std::uint64_t q);

    std::uint64_t modulus() const { return q_; }
    std::uint64_t phi() const { return phi_; }
    const std::vector<UnitGroupFactor>& factors() const { return factors_; }

    // exponents of n on the generator list; n must be coprime to q
    const std::vector<std::uint32_t>& dlog(std::uint64_t n) const;
    bool is_unit(std::uint64_t n) const;

  private:
    std::uint64_t q_;
    std::uint64_t phi_;
    std::vector<UnitGroupFactor> factors_;
    std::vector<std::vector<std::uint32_t>> dlog_;  // index n mod q -> exponents, empty if not unit
};

class DirichletCharacter {
  public:
    DirichletCharacter() = default;
    DirichletCharacter(std::shared_ptr<const UnitGroup> group, std::vector<std::uint32_t> exponents);

    std::uint64_t modulus() const { return group_->modulus(); }
    const std::vector<std::uint32_t>& exponents() const { return exponents_; }
    std::uint64_t conductor() const { return conductor_; }
    bool is_primitive() const { return conductor_ == modulus(); }
    bool is_principal() const { return conductor_ == 1; }
    int parity_kappa() const { return kappa_; }  // chi(-1) = (-1)^kappa
    const std::string& label() const { return label_; }

    CharValue operator()(std::uint64_t n) const;
    Complex value(std::uint64_t n) const { return (*this)(n).to_complex(); }

    DirichletCharacter conjugate() const;
    DirichletCharacter operator*(const DirichletCharacter& other) const;
    bool same_values(const DirichletCharacter& other) const;

  private:
    std::shared_ptr<const UnitGroup> group_;
    std::vector<std::uint32_t> exponents_;
    std::uint64_t conductor_ = 1;
    int kappa_ = 0;
    std::string label_;

    void finish_init();
};

struct CharacterGroup {
    std::uint64_t modulus = 1;
    std::uint64_t euler_phi = 1;
    std::vector<DirichletCharacter> characters;  // sorted by label

    const DirichletCharacter& principal() const;
    const DirichletCharacter& by_label(const std::string& label) const;
};

// All phi(q) characters mod q, deterministic order.  q == 0 rejected.
CharacterGroup build_group(std::uint64_t q);

// The primitive character (modulus = conductor of chi) agreeing with chi on
// residues coprime to chi's modulus.  Idempotent on primitive characters.
DirichletCharacter primitive_inducer(const DirichletCharacter& chi);

// tau(chi) = sum_{a=1..q} chi(a) e(a/q)
Complex gauss_sum(const DirichletCharacter& chi);

// eps(chi) = tau(chi) / (i^kappa sqrt(q)); requires chi primitive
Complex epsilon_factor(const DirichletCharacter& chi);

// CSV value table: n, Re chi(n), Im chi(n) for n = 0..limit
void write_value_table_csv(std::ostream& os, const DirichletCharacter& chi, std::uint64_t limit);

}  // namespace mef::chars

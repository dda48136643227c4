#include "mef/characters.hpp"

#include <algorithm>
#include <numeric>
#include <map>
#include <ostream>

namespace mef::chars {

namespace {

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, unsigned>> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

std::uint64_t phi_of(std::uint64_t n) {
    std::uint64_t out = n;
    for (auto [p, e] : factorize(n)) out = out / p * (p - 1);
    return out;
}

// smallest primitive root mod p^e for odd prime p
std::uint64_t primitive_root_odd(std::uint64_t p, unsigned e) {
    std::uint64_t ord = p - 1;
    auto pf = factorize(ord);
    std::uint64_t g = 2;
    for (;; ++g) {
        bool ok = true;
        for (auto [f, fe] : pf)
            if (util::power_mod(g, ord / f, p) == 1) {
                ok = false;
                break;
            }
        if (ok) break;
    }
    if (e == 1) return g;
    // lift: g stays primitive mod p^e unless g^(p-1) == 1 mod p^2
    if (util::power_mod(g, p - 1, p * p) == 1) g += p;
    return g;
}

// CRT lift: x == a mod m, x == 1 mod (q/m)
std::uint64_t crt_lift(std::uint64_t a, std::uint64_t m, std::uint64_t q) {
    std::uint64_t rest = q / m;
    if (rest == 1) return a % q;
    for (std::uint64_t x = a % q;; x += m)
        if (x % rest == 1) return x % q;
}

}  // namespace

UnitGroup::UnitGroup(std::uint64_t q) : q_(q) {
    if (q == 0) throw UsageError("modulus must be positive");
    phi_ = phi_of(q);
    for (auto [p, e] : factorize(q)) {
        std::uint64_t pe = 1;
        for (unsigned i = 0; i < e; ++i) pe *= p;
        if (p == 2) {
            if (e == 1) continue;  // trivial component
            if (e == 2) {
                factors_.push_back({pe, crt_lift(3, pe, q), 2});
            } else {
                // (Z/2^e)* = <-1> x <5>
                factors_.push_back({pe, crt_lift(pe - 1, pe, q), 2});
                factors_.push_back({pe, crt_lift(5, pe, q), pe / 4});
            }
        } else {
            factors_.push_back({pe, crt_lift(primitive_root_odd(p, e), pe, q), pe / p * (p - 1)});
        }
    }
    // discrete logs by direct enumeration over exponent tuples; q stays small
    dlog_.assign(q_ == 1 ? 1 : q_, {});
    std::vector<std::uint32_t> expo(factors_.size(), 0);
    std::uint64_t count = 0;
    for (;;) {
        std::uint64_t n = 1 % q_;
        for (std::size_t i = 0; i < factors_.size(); ++i)
            n = (__uint128_t(n) * util::power_mod(factors_[i].generator, expo[i], q_ ? q_ : 1)) % (q_ ? q_ : 1);
        if (q_ == 1) n = 0;
        dlog_[n] = expo;
        const std::vector<std::uint32_t> empty;
        ++count;
        // mixed-radix increment
        std::size_t i = 0;
        for (; i < expo.size(); ++i) {
            if (++expo[i] < factors_[i].order) break;
            expo[i] = 0;
        }
        if (i == expo.size()) break;
    }
    if (count != phi_) throw NumericError("unit group enumeration mismatch");
    if (q_ == 1) dlog_[0] = {};
}

const std::vector<std::uint32_t>& UnitGroup::dlog(std::uint64_t n) const {
    static const std::vector<std::uint32_t> none;
    if (q_ == 1) return dlog_[0];
    n %= q_;
    if (std::gcd(n, q_) != 1) return none;
    return dlog_[n];
}

bool UnitGroup::is_unit(std::uint64_t n) const {
    if (q_ == 1) return true;
    return std::gcd(n % q_, q_) == 1;
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const UnitGroup> group,
                                       std::vector<std::uint32_t> exponents)
    : group_(std::move(group)), exponents_(std::move(exponents)) {
    if (exponents_.size() != group_->factors().size())
        throw UsageError("exponent vector size mismatch");
    finish_init();
}

void DirichletCharacter::finish_init() {
    const std::uint64_t q = group_->modulus();
    // label: modulus '.' exponent vector
    label_ = std::to_string(q);
    if (!exponents_.empty()) {
        label_ += '.';
        for (std::size_t i = 0; i < exponents_.size(); ++i) {
            if (i) label_ += '_';
            label_ += std::to_string(exponents_[i]);
        }
    }
    // parity
    kappa_ = (q <= 2) ? 0 : ((*this)(q - 1).is_one() ? 0 : 1);
    // conductor: smallest d | q with chi == 1 on units n == 1 (mod d)
    conductor_ = q;
    for (std::uint64_t d = 1; d <= q; ++d) {
        if (q % d) continue;
        bool ok = true;
        for (std::uint64_t n = 1 + d; n < q + (q == 1 ? 1 : 0) && ok; n += d)
            if (group_->is_unit(n) && !(*this)(n).is_one()) ok = false;
        if (ok) {
            conductor_ = d;
            break;
        }
    }
}

CharValue DirichletCharacter::operator()(std::uint64_t n) const {
    const auto& logs = group_->dlog(n);
    if (group_->modulus() > 1 && logs.empty() && !group_->is_unit(n)) return CharValue::null();
    RationalAngle angle;  // zero angle
    const auto& factors = group_->factors();
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (exponents_[i] == 0 || logs[i] == 0) continue;
        angle = angle + RationalAngle::make(std::int64_t(exponents_[i]) * logs[i],
                                            std::int64_t(factors[i].order));
    }
    return CharValue::of(angle);
}

DirichletCharacter DirichletCharacter::conjugate() const {
    std::vector<std::uint32_t> conj(exponents_.size());
    const auto& factors = group_->factors();
    for (std::size_t i = 0; i < factors.size(); ++i)
        conj[i] = exponents_[i] == 0 ? 0 : std::uint32_t(factors[i].order - exponents_[i]);
    return DirichletCharacter(group_, std::move(conj));
}

DirichletCharacter DirichletCharacter::operator*(const DirichletCharacter& other) const {
    if (modulus() != other.modulus())
        throw UsageError("character product needs a common modulus");
    std::vector<std::uint32_t> e(exponents_.size());
    const auto& factors = group_->factors();
    for (std::size_t i = 0; i < factors.size(); ++i)
        e[i] = std::uint32_t((std::uint64_t(exponents_[i]) + other.exponents_[i]) % factors[i].order);
    return DirichletCharacter(group_, std::move(e));
}

bool DirichletCharacter::same_values(const DirichletCharacter& other) const {
    if (modulus() != other.modulus()) return false;
    for (std::uint64_t n = 0; n < modulus(); ++n) {
        CharValue a = (*this)(n), b = other(n);
        if (a.zero != b.zero) return false;
        if (!a.zero && !(a.angle == b.angle)) return false;
    }
    return true;
}

const DirichletCharacter& CharacterGroup::principal() const {
    for (const auto& chi : characters)
        if (chi.is_principal()) return chi;
    throw NumericError("group without principal character");
}

const DirichletCharacter& CharacterGroup::by_label(const std::string& label) const {
    for (const auto& chi : characters)
        if (chi.label() == label) return chi;
    throw UsageError("no character with label " + label + " mod " + std::to_string(modulus));
}

CharacterGroup build_group(std::uint64_t q) {
    if (q == 0) throw UsageError("modulus must be positive");
    auto group = std::make_shared<const UnitGroup>(q);
    CharacterGroup out;
    out.modulus = q;
    out.euler_phi = group->phi();
    std::vector<std::uint32_t> expo(group->factors().size(), 0);
    for (;;) {
        out.characters.emplace_back(group, expo);
        std::size_t i = 0;
        for (; i < expo.size(); ++i) {
            if (++expo[i] < group->factors()[i].order) break;
            expo[i] = 0;
        }
        if (i == expo.size()) break;
    }
    std::sort(out.characters.begin(), out.characters.end(),
              [](const auto& a, const auto& b) { return a.label() < b.label(); });
    return out;
}

DirichletCharacter primitive_inducer(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.modulus();
    const std::uint64_t d = chi.conductor();
    if (d == q) return chi;
    CharacterGroup sub = build_group(d);
    for (const auto& psi : sub.characters) {
        bool ok = true;
        for (std::uint64_t n = 1; n <= q && ok; ++n) {
            if (q > 1 && std::gcd(n, q) != 1) continue;
            CharValue a = chi(n), b = psi(n % (d ? d : 1));
            if (a.zero || b.zero || !(a.angle == b.angle)) ok = false;
        }
        if (ok) return psi;
    }
    throw NumericError("no inducing character found for " + chi.label());
}

Complex gauss_sum(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.modulus();
    util::KahanSumComplex acc;
    for (std::uint64_t a = 1; a <= q; ++a) {
        CharValue v = chi(a % q);
        if (v.zero) continue;
        acc.add(v.angle.to_complex() *
                RationalAngle::make(std::int64_t(a), std::int64_t(q)).to_complex());
    }
    return acc.get();
}

Complex epsilon_factor(const DirichletCharacter& chi) {
    if (!chi.is_primitive())
        throw UsageError("epsilon factor requires a primitive character, got " + chi.label());
    Complex tau = gauss_sum(chi);
    Complex ik = chi.parity_kappa() ? Complex{0.0, 1.0} : Complex{1.0, 0.0};
    return tau / (ik * std::sqrt(double(chi.modulus())));
}

void write_value_table_csv(std::ostream& os, const DirichletCharacter& chi, std::uint64_t limit) {
    os << "n,re,im\n";
    os.precision(17);
    for (std::uint64_t n = 0; n <= limit; ++n) {
        Complex v = chi.value(n % std::max<std::uint64_t>(chi.modulus(), 1));
        os << n << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

}  // namespace mef::chars

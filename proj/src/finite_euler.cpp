#include "mef/finite_euler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace mef::feuler {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        out.push_back(p);
        while (n % p == 0) n /= p;
    }
    if (n > 1) out.push_back(n);
    return out;
}
}  // namespace

FiniteEulerProduct::FiniteEulerProduct(std::uint64_t q, const chars::DirichletCharacter& chi)
    : q_(q), chi_star_(chars::primitive_inducer(chi)) {
    if (chi.modulus() != q) throw UsageError("character modulus does not match q");
    const std::uint64_t d = chi_star_.modulus();
    rad_q_ = 1;
    rad_d_ = 1;
    for (std::uint64_t p : prime_factors(q)) {
        rad_q_ *= p;
        if (d % p == 0) {
            rad_d_ *= p;
            continue;  // chi*(p) = 0, factor is 1
        }
        CharValue v = chi_star_(p % std::max<std::uint64_t>(d, 1));
        if (v.zero) throw NumericError("inducer vanished on a prime coprime to its modulus");
        active_.push_back({p, v.angle, std::log(double(p))});
        if (v.angle.is_one()) ++r_;
    }
    // expand prod (1 - chi*(p) p^{-s}) into a Dirichlet polynomial
    terms_.assign(1, {1, Complex{1.0, 0.0}});
    for (const auto& ap : active_) {
        std::vector<std::pair<std::uint64_t, Complex>> next = terms_;
        Complex c = -ap.angle.to_complex();
        for (const auto& [n, coef] : terms_) next.emplace_back(n * ap.p, coef * c);
        terms_ = std::move(next);
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
}

FiniteEulerProduct build_product(std::uint64_t q, const chars::DirichletCharacter& chi) {
    return FiniteEulerProduct(q, chi);
}

Complex FiniteEulerProduct::value(Complex s) const {
    Complex out{0.0, 0.0};
    for (const auto& [n, c] : terms_)
        out += c * std::exp(-s * std::log(double(n)));
    return out;
}

Complex FiniteEulerProduct::derivative(Complex s, unsigned order) const {
    Complex out{0.0, 0.0};
    for (const auto& [n, c] : terms_) {
        double ln = std::log(double(n));
        out += c * std::pow(Complex{-ln, 0.0}, double(order)) * std::exp(-s * ln);
    }
    return out;
}

Complex FiniteEulerProduct::log_derivative(Complex s) const {
    Complex out{0.0, 0.0};
    for (const auto& ap : active_) {
        Complex chi_p = ap.angle.to_complex();
        out += chi_p * ap.log_p / (std::exp(s * ap.log_p) - chi_p);
    }
    return out;
}

std::vector<LatticeZero> zero_lattice(const FiniteEulerProduct& F, double T) {
    if (T <= 0) throw UsageError("lattice height must be positive");
    std::vector<LatticeZero> zeros;
    for (const auto& ap : F.active_primes()) {
        const double theta = two_pi * double(ap.angle.num) / double(ap.angle.den);
        // eta = (theta + 2 pi k)/log p in (-T, T), skipping eta == 0
        auto k_lo = std::int64_t(std::floor((-T * ap.log_p - theta) / two_pi)) - 1;
        auto k_hi = std::int64_t(std::ceil((T * ap.log_p - theta) / two_pi)) + 1;
        for (std::int64_t k = k_lo; k <= k_hi; ++k) {
            double eta = (theta + two_pi * double(k)) / ap.log_p;
            if (std::abs(eta) >= T) continue;
            if (ap.angle.is_one() && k == 0) continue;  // the origin zero, multiplicity r
            zeros.push_back({eta, ap.p, 1});
        }
    }
    std::sort(zeros.begin(), zeros.end(),
              [](const LatticeZero& a, const LatticeZero& b) { return a.eta < b.eta; });
    // merge collisions between distinct prime lattices
    std::vector<LatticeZero> merged;
    for (const auto& z : zeros) {
        if (!merged.empty() &&
            std::abs(z.eta - merged.back().eta) <= 1e-12 * std::max(1.0, std::abs(z.eta))) {
            merged.back().multiplicity += 1;
        } else {
            merged.push_back(z);
        }
    }
    return merged;
}

Complex b_constant(const FiniteEulerProduct& F) {
    double re = -0.5 * std::log(double(F.rad_q()) / double(F.rad_d()));
    double im = 0.0;
    for (const auto& ap : F.active_primes()) {
        if (ap.angle.is_one()) continue;
        Complex v = ap.angle.to_complex();
        im += v.imag() / (2.0 - 2.0 * v.real()) * ap.log_p;
    }
    return {re, im};
}

double hadamard_check(const FiniteEulerProduct& F, Complex s, std::size_t K_pairs) {
    if (F.is_identically_one()) throw UsageError("F == 1 has no Hadamard data");
    const int r = F.zero_multiplicity_at_origin();
    const Complex b = b_constant(F);
    // collect the K_pairs smallest |eta| on each side
    double T = 10.0;
    std::vector<LatticeZero> lat;
    for (;;) {
        lat = zero_lattice(F, T);
        std::size_t pos = 0, neg = 0;
        for (const auto& z : lat) (z.eta > 0 ? pos : neg) += std::size_t(z.multiplicity);
        if (pos >= K_pairs && neg >= K_pairs) break;
        T *= 2.0;
    }
    std::sort(lat.begin(), lat.end(), [](const LatticeZero& a, const LatticeZero& b2) {
        return std::abs(a.eta) < std::abs(b2.eta);
    });
    auto truncated = [&](Complex z) {
        Complex prod{1.0, 0.0};
        std::size_t pos = 0, neg = 0;
        for (const auto& zr : lat) {
            auto& side = zr.eta > 0 ? pos : neg;
            for (int mult = 0; mult < zr.multiplicity; ++mult) {
                if (side >= K_pairs) break;
                ++side;
                Complex ie{0.0, zr.eta};
                prod *= (1.0 - z / ie) * std::exp(z / ie);
            }
        }
        return prod;
    };
    // calibrate e^a at s0 = 1
    const Complex s0{1.0, 0.0};
    Complex ea = F.value(s0) / (std::pow(s0, double(r)) * std::exp(b * s0) * truncated(s0));
    Complex model = std::pow(s, double(r)) * ea * std::exp(b * s) * truncated(s);
    Complex direct = F.value(s);
    return std::abs(model / direct - 1.0);
}

ZeroCountCheck count_zeros(const FiniteEulerProduct& F, double t, double h) {
    if (h <= 0) throw UsageError("window height must be positive");
    ZeroCountCheck out;
    for (const auto& z : zero_lattice(F, std::abs(t) + h + 1.0))
        if (z.eta >= t && z.eta <= t + h) out.count += std::uint64_t(z.multiplicity);
    if (t <= 0.0 && 0.0 <= t + h) out.count += std::uint64_t(F.zero_multiplicity_at_origin());
    const double lqd = std::log(double(F.rad_q()) / double(F.rad_d()));
    out.bound = double(F.omega_ratio()) + 0.5 * h * lqd +
                h * h / (h * h + t * t) * double(F.zero_multiplicity_at_origin());
    out.holds = double(out.count) <= out.bound + 1e-12;
    return out;
}

ValueBoundCheck value_bound_right(const FiniteEulerProduct& F, double sigma, double t) {
    const double h = 1.0 / std::log(double(F.q()));
    if (sigma < h) throw UsageError("right-regime bound needs sigma >= 1/log q");
    ValueBoundCheck out;
    out.lhs = 1.0 / std::abs(F.value({sigma, t}));
    out.rhs = std::exp(2.0 * double(prime_factors(F.q()).size()) * std::log(double(F.q())));
    out.holds = out.lhs <= out.rhs;
    return out;
}

ValueBoundCheck value_bound_left(const FiniteEulerProduct& F, double sigma, double t) {
    const double h = 1.0 / std::log(double(F.q()));
    if (sigma > -h) throw UsageError("left-regime bound needs sigma <= -1/log q");
    ValueBoundCheck out;
    out.lhs = std::abs(F.value({sigma, t}));
    out.rhs = std::pow(std::abs(sigma), double(prime_factors(F.q()).size())) * std::numbers::ln2;
    out.holds = out.lhs >= out.rhs;
    return out;
}

LogDerivativeCheck log_derivative_check(const FiniteEulerProduct& F, Complex s, double h) {
    if (h <= 0 || std::abs(s.real()) > h) throw UsageError("needs |sigma| <= h and h > 0");
    const double t = s.imag();
    Complex local{0.0, 0.0};
    for (const auto& z : zero_lattice(F, std::abs(t) + h + 1.0))
        if (std::abs(t - z.eta) <= h)
            local += double(z.multiplicity) / (s - Complex{0.0, z.eta});
    Complex model = double(F.zero_multiplicity_at_origin()) / s + local;
    LogDerivativeCheck out;
    out.residual = std::abs(F.log_derivative(s) - model);
    const double lqd = std::log(double(F.rad_q()) / double(F.rad_d()));
    out.budget = 5.0 * (double(F.omega_ratio()) / h + lqd +
                        double(F.zero_multiplicity_at_origin()) / (std::abs(t) + h));
    out.holds = out.residual <= out.budget;
    return out;
}

void write_lattice_csv(std::ostream& os, const std::vector<LatticeZero>& lattice) {
    os << "eta,source_prime,multiplicity\n";
    os.precision(17);
    for (const auto& z : lattice)
        os << z.eta << ',' << z.source_prime << ',' << z.multiplicity << '\n';
}

}  // namespace mef::feuler

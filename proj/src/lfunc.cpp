#include "mef/lfunc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "mef/field.hpp"
#include "mef/finite_euler.hpp"

namespace mef::lfunc {

namespace {

constexpr double pi = std::numbers::pi;

// B_2, B_4, ..., B_34
constexpr std::array<double, 17> kBernoulli = {
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
    -3617.0 / 510,
    43867.0 / 798,
    -174611.0 / 330,
    854513.0 / 138,
    -236364091.0 / 2730,
    8553103.0 / 6,
    -23749461029.0 / 870,
    8615841276005.0 / 14322,
    -7709321041217.0 / 510,
    2577687858367.0 / 6,
};

double binom(unsigned n, unsigned k) {
    if (k > n) return 0.0;
    double out = 1.0;
    for (unsigned i = 0; i < k; ++i) out = out * double(n - i) / double(i + 1);
    return out;
}

// coefficients of the rising factorial s(s+1)...(s+len-1), degree len;
// deque keeps element addresses stable for references handed out earlier
const std::vector<double>& rising_factorial_coeffs(unsigned len) {
    static std::mutex mu;
    static std::deque<std::vector<double>> cache;  // cache[len]
    std::lock_guard<std::mutex> lock(mu);
    if (cache.empty()) cache.push_back({1.0});  // empty product
    while (cache.size() <= len) {
        const auto& prev = cache.back();
        unsigned m = unsigned(cache.size()) - 1;  // multiply by (s + m)
        std::vector<double> next(prev.size() + 1, 0.0);
        for (std::size_t d = 0; d < prev.size(); ++d) {
            next[d] += prev[d] * double(m);
            next[d + 1] += prev[d];
        }
        cache.push_back(std::move(next));
    }
    return cache[len];
}

// i-th derivative of the polynomial with the given coefficients, at s
Complex poly_derivative_at(const std::vector<double>& coeffs, unsigned i, Complex s) {
    Complex out{0.0, 0.0};
    Complex sp{1.0, 0.0};
    for (std::size_t d = i; d < coeffs.size(); ++d) {
        double fall = 1.0;
        for (unsigned j = 0; j < i; ++j) fall *= double(d - j);
        out += coeffs[d] * fall * sp;
        sp *= s;
    }
    return out;
}

Complex log_sin_pi(Complex z) {
    Complex w = pi * z;
    if (std::abs(w.imag()) < 600.0) return std::log(std::sin(w));
    // asymptotic: sin w ~ -+ e^{-+iw}/(2i) for Im w -> +-inf
    if (w.imag() > 0) return Complex{0.0, 1.0} * (-w) + std::log(Complex{0.0, 0.5});
    return Complex{0.0, 1.0} * w + std::log(Complex{0.0, -0.5});
}

}  // namespace

Complex log_gamma(Complex z) {
    if (z.real() < 0.5) {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return std::log(pi) - log_sin_pi(z) - log_gamma(1.0 - z);
    }
    Complex shift{0.0, 0.0};
    while (std::abs(z) < 12.0) {
        shift += std::log(z);
        z += 1.0;
    }
    Complex out = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi);
    Complex zinv = 1.0 / z;
    Complex zpow = zinv;
    for (std::size_t j = 0; j < 9; ++j) {
        out += kBernoulli[j] / (double(2 * j + 1) * double(2 * j + 2)) * zpow;
        zpow *= zinv * zinv;
    }
    return out - shift;
}

void PrecisionPolicy::validate() const {
    if (euler_maclaurin_order < 2 || euler_maclaurin_order % 2 != 0 ||
        euler_maclaurin_order / 2 + 1 > kBernoulli.size())
        throw UsageError("euler_maclaurin_order must be even, >= 2, <= 32");
    if (series_cutoff_base < 10.0) throw UsageError("series cutoff base must be >= 10");
    if (target_relative_error <= 0.0) throw UsageError("target_relative_error must be positive");
}

std::string PrecisionPolicy::fingerprint() const {
    std::ostringstream ss;
    ss << "p" << euler_maclaurin_order << "s" << series_cutoff_scale << "b" << series_cutoff_base
       << "e" << target_relative_error;
    std::string s = ss.str();
    std::replace(s.begin(), s.end(), '.', '_');
    return s;
}

std::vector<Complex> hurwitz_zeta_derivs_n(Complex s, double alpha, unsigned kmax,
                                           const PrecisionPolicy& policy, double* em_err,
                                           double* round_err, bool minus_pole, std::size_t N) {
    const unsigned J = policy.euler_maclaurin_order / 2;

    std::vector<util::KahanSumComplex> acc(kmax + 1);
    double term_magnitude = 0.0;  // feeds the rounding part of the error estimate
    for (std::size_t n = 0; n < N; ++n) {
        const double l = std::log(double(n) + alpha);
        const Complex base = std::exp(-s * l);
        term_magnitude += std::exp(-s.real() * l);
        double lp = 1.0;
        for (unsigned k = 0; k <= kmax; ++k) {
            acc[k].add(base * ((k & 1) ? -lp : lp));
            lp *= l;
        }
    }
    std::vector<Complex> out(kmax + 1);
    for (unsigned k = 0; k <= kmax; ++k) out[k] = acc[k].get();

    const double Na = double(N) + alpha;
    const double L = std::log(Na);
    const Complex eNs = std::exp(-s * L);     // (N+alpha)^{-s}
    const Complex e1s = eNs * Na;             // (N+alpha)^{1-s}
    std::vector<double> Lpow(kmax + 1, 1.0);  // L^k
    for (unsigned k = 1; k <= kmax; ++k) Lpow[k] = Lpow[k - 1] * L;

    // tail integral term e^{(1-s)L}/(s-1) (with the 1/(s-1) pole removed when
    // requested; the per-class poles cancel in non-principal assemblies) and
    // the midpoint term e^{-sL}/2
    const Complex u = s - 1.0;
    const bool series_route = minus_pole && std::abs(u) < 0.25;
    for (unsigned k = 0; k <= kmax; ++k) {
        if (series_route) {
            // regularized tail (e^{(1-s)L} - 1)/(s-1) as a Taylor series in
            // u = s-1: sum_{m>=0} (-L)^{m+1} u^m/(m+1)!, differentiated k times
            Complex acc2{0.0, 0.0};
            Complex upow{1.0, 0.0};
            for (unsigned m = k; m < k + 70; ++m) {
                double fall = 1.0;  // m!/(m-k)!
                for (unsigned j = 0; j < k; ++j) fall *= double(m - j);
                double fct = 1.0;  // (m+1)!
                for (unsigned j = 2; j <= m + 1; ++j) fct *= double(j);
                acc2 += std::pow(-L, double(m + 1)) * fall / fct * upow;
                upow *= u;
            }
            out[k] += acc2;
        } else {
            Complex t1{0.0, 0.0};
            double jfact = 1.0;
            Complex sm1_pow = 1.0 / (s - 1.0);
            for (unsigned j = 0; j <= k; ++j) {
                double sgnL = ((k - j) & 1) ? -1.0 : 1.0;
                double sgnj = (j & 1) ? -1.0 : 1.0;
                t1 += binom(k, j) * sgnL * Lpow[k - j] * sgnj * jfact * sm1_pow;
                jfact *= double(j + 1);
                sm1_pow /= (s - 1.0);
            }
            out[k] += e1s * t1;
            if (minus_pole) {
                // subtract d^k/ds^k (s-1)^{-1} = (-1)^k k! (s-1)^{-k-1}
                double kfact = 1.0;
                for (unsigned j = 2; j <= k; ++j) kfact *= double(j);
                double sgn = (k & 1) ? -1.0 : 1.0;
                out[k] -= sgn * kfact * std::pow(u, -double(k) - 1.0);
            }
        }
        out[k] += 0.5 * eNs * ((k & 1) ? -Lpow[k] : Lpow[k]);
    }

    // Bernoulli corrections B_2j/(2j)! * P_j(s) (N+alpha)^{-s-2j+1},
    // P_j the rising factorial of length 2j-1
    double fact2j = 2.0;  // (2j)!
    for (unsigned j = 1; j <= J; ++j) {
        const double bj = kBernoulli[j - 1] / fact2j;
        const Complex expf = eNs * std::pow(Na, 1.0 - 2.0 * double(j));
        const auto& coeffs = rising_factorial_coeffs(2 * j - 1);
        for (unsigned k = 0; k <= kmax; ++k) {
            Complex ck{0.0, 0.0};
            for (unsigned i = 0; i <= k; ++i) {
                double sgn = ((k - i) & 1) ? -1.0 : 1.0;
                ck += binom(k, i) * poly_derivative_at(coeffs, i, s) * sgn * Lpow[k - i];
            }
            out[k] += bj * ck * expf;
        }
        fact2j *= double(2 * j + 1) * double(2 * j + 2);
    }

    if (em_err) {
        const double bnext = std::abs(kBernoulli[J] / (fact2j));
        const auto& coeffs = rising_factorial_coeffs(2 * J + 1);
        double pmag = std::abs(poly_derivative_at(coeffs, 0, s));
        *em_err = bnext * pmag * std::pow(Na, -s.real() - 2.0 * double(J) - 1.0);
    }
    if (round_err) *round_err = 1e-15 * term_magnitude;
    return out;
}

// The cutoff rule N = ceil(base + scale |t|) is tuned for the critical strip.
// Left of it the Euler-Maclaurin remainder inflates like (N+alpha)^{-sigma},
// so N doubles until the truncation part of the estimate meets the target --
// but only while truncation still dominates: at sigma < 0 the finite sum
// grows as N^{1-sigma} and cancels against the tail, so the rounding part
// climbs with N and bounds how far doubling can help.
std::vector<Complex> hurwitz_zeta_derivs_impl(Complex s, double alpha, unsigned kmax,
                                              const PrecisionPolicy& policy, double* err_estimate,
                                              bool minus_pole) {
    policy.validate();
    if (alpha <= 0.0 || alpha > 1.0) throw UsageError("hurwitz alpha must be in (0, 1]");
    if (!minus_pole && std::abs(s - Complex{1.0, 0.0}) < 1e-13)
        throw PoleError("hurwitz zeta pole at s = 1");
    auto N = std::size_t(
        std::ceil(policy.series_cutoff_base + policy.series_cutoff_scale * std::abs(s.imag())));
    double em = 0.0, rnd = 0.0;
    std::vector<Complex> out;
    for (int attempt = 0;; ++attempt) {
        out = hurwitz_zeta_derivs_n(s, alpha, kmax, policy, &em, &rnd, minus_pole, N);
        if (attempt >= 3) break;
        if (em <= policy.target_relative_error * std::abs(out[0]) || em <= rnd) break;
        N *= 2;
    }
    if (err_estimate) *err_estimate = em + rnd;
    return out;
}

std::vector<Complex> hurwitz_zeta_derivs(Complex s, double alpha, unsigned kmax,
                                         const PrecisionPolicy& policy, double* err_estimate) {
    return hurwitz_zeta_derivs_impl(s, alpha, kmax, policy, err_estimate, false);
}

namespace {

// finite product over p | q of (1 - p^{-s}) and derivatives, for principal chi
const feuler::FiniteEulerProduct& principal_product(std::uint64_t q) {
    static std::mutex mu;
    static std::map<std::uint64_t, feuler::FiniteEulerProduct> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(q);
    if (it == cache.end()) {
        auto group = chars::build_group(q);
        it = cache.emplace(q, feuler::build_product(q, group.principal())).first;
    }
    return it->second;
}

std::vector<Complex> l_derivs(Complex s, const chars::DirichletCharacter& chi, unsigned kmax,
                              const PrecisionPolicy& policy, double* err) {
    const std::uint64_t q = chi.modulus();
    if (chi.is_principal()) {
        if (std::abs(s - Complex{1.0, 0.0}) < 1e-13)
            throw PoleError("pole of L(s, principal) at s = 1");
        // zeta(s) * F(s) with F = prod_{p|q} (1 - p^{-s})
        double zerr = 0.0;
        auto zd = hurwitz_zeta_derivs(s, 1.0, kmax, policy, &zerr);
        const auto& F = principal_product(q);
        std::vector<Complex> out(kmax + 1, Complex{0.0, 0.0});
        double fmag = 0.0;
        for (const auto& [n, c] : F.terms()) fmag += std::abs(c);
        for (unsigned k = 0; k <= kmax; ++k)
            for (unsigned j = 0; j <= k; ++j)
                out[k] += binom(k, j) * zd[j] * (k == j ? F.value(s) : F.derivative(s, k - j));
        if (err) *err = zerr * fmag;
        return out;
    }
    // q^{-s} sum_a chi(a) zeta_H(s, a/q), differentiated by Leibniz; the
    // per-class 1/(s-1) poles cancel against sum chi(a) = 0, so each class is
    // evaluated with the pole subtracted
    std::vector<std::vector<Complex>> zh;  // per class derivatives
    std::vector<Complex> weights;
    double err_acc = 0.0;
    for (std::uint64_t a = 1; a <= q; ++a) {
        CharValue v = chi(a % q);
        if (v.zero) continue;
        double e = 0.0;
        zh.push_back(hurwitz_zeta_derivs_impl(s, double(a) / double(q), kmax, policy, &e, true));
        weights.push_back(v.to_complex());
        err_acc += e;
    }
    const double lq = std::log(double(q));
    const Complex qs = std::exp(-s * lq);
    std::vector<Complex> out(kmax + 1, Complex{0.0, 0.0});
    for (unsigned k = 0; k <= kmax; ++k) {
        Complex sum{0.0, 0.0};
        for (unsigned j = 0; j <= k; ++j) {
            util::KahanSumComplex cls;
            for (std::size_t i = 0; i < zh.size(); ++i) cls.add(weights[i] * zh[i][j]);
            double sgn = ((k - j) & 1) ? -1.0 : 1.0;
            sum += binom(k, j) * sgn * std::pow(lq, double(k - j)) * cls.get();
        }
        out[k] = qs * sum;
    }
    if (err) *err = err_acc * std::abs(qs);
    return out;
}

}  // namespace

EvalResult l_eval(Complex s, const chars::DirichletCharacter& chi, const PrecisionPolicy& policy) {
    if (s.real() < -3.0 - 1e-9)
        throw UsageError("l_eval is limited to sigma >= -3; use reflect_eval further left");
    double err = 0.0;
    auto d = l_derivs(s, chi, 0, policy, &err);
    return {d[0], err, false};
}

EvalResult l_derivative(Complex s, const chars::DirichletCharacter& chi, unsigned order,
                        const PrecisionPolicy& policy) {
    if (s.real() < -3.0 - 1e-9)
        throw UsageError("l_derivative is limited to sigma >= -3");
    double err = 0.0;
    auto d = l_derivs(s, chi, order, policy, &err);
    return {d[order], err, false};
}

const CharConstants& char_constants(const chars::DirichletCharacter& chi) {
    static std::mutex mu;
    static std::map<std::string, CharConstants> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(chi.label());
    if (it == cache.end()) {
        CharConstants c;
        c.tau = chars::gauss_sum(chi);
        if (chi.is_primitive()) {
            c.epsilon = chars::epsilon_factor(chi);
            c.sqrt_epsilon = std::sqrt(c.epsilon);  // principal branch, fixed once
        } else {
            c.epsilon = c.sqrt_epsilon = Complex{0.0, 0.0};
        }
        it = cache.emplace(chi.label(), c).first;
    }
    return it->second;
}

Complex completed_lambda(Complex s, const chars::DirichletCharacter& chi,
                         const PrecisionPolicy& policy) {
    if (!chi.is_primitive())
        throw UsageError("completed_lambda requires a primitive character");
    const double d = double(chi.modulus());
    const double kappa = chi.parity_kappa();
    Complex half = (s + kappa) / 2.0;
    Complex pre = std::exp(half * std::log(d / pi) + log_gamma(half));
    Complex lv;
    if (chi.modulus() == 1) {
        double err = 0.0;
        lv = hurwitz_zeta_derivs(s, 1.0, 0, policy, &err)[0];
    } else {
        lv = l_eval(s, chi, policy).value;
    }
    return pre * lv;
}

EvalResult reflect_eval(Complex s, const chars::DirichletCharacter& chi,
                        const PrecisionPolicy& policy) {
    if (!chi.is_primitive()) throw UsageError("reflect_eval requires a primitive character");
    if (s.real() >= -1.0) throw UsageError("reflect_eval wants sigma < -1");
    const int kappa = chi.parity_kappa();
    // exact trivial-zero hit: s = -l with l == kappa (mod 2)
    double li = -s.real();
    if (s.imag() == 0.0 && li == std::floor(li) && (std::int64_t(li) % 2 + 2) % 2 == kappa % 2)
        return {Complex{0.0, 0.0}, 0.0, true};
    const double d = double(chi.modulus());
    EvalResult right =
        chi.modulus() == 1
            ? EvalResult{hurwitz_zeta_derivs(1.0 - s, 1.0, 0, policy, nullptr)[0], 0.0, false}
            : l_eval(1.0 - s, chi.conjugate(), policy);
    Complex eps = chi.modulus() == 1 ? Complex{1.0, 0.0} : char_constants(chi).epsilon;
    Complex factor = std::exp(s * std::log(2.0) + (s - 1.0) * std::log(pi) +
                              (0.5 - s) * std::log(d) + log_gamma(1.0 - s));
    Complex sine = std::sin(pi / 2.0 * (s + double(kappa)));
    Complex v = eps * right.value * factor * sine;
    return {v, right.error_estimate * std::abs(factor * sine), false};
}

EvalResult l_value_auto(Complex s, const chars::DirichletCharacter& chi,
                        const PrecisionPolicy& policy) {
    if (chi.is_principal()) {
        // zeta route with the finite product; zeta itself reflected if far left
        const auto& F = principal_product(chi.modulus());
        EvalResult z;
        if (s.real() < -1.5) {
            static const auto triv = chars::build_group(1).characters.front();
            z = reflect_eval(s, triv, policy);
        } else {
            double err = 0.0;
            z = {hurwitz_zeta_derivs(s, 1.0, 0, policy, &err)[0], err, false};
        }
        Complex f = F.value(s);
        return {z.value * f, z.error_estimate * std::abs(f), z.exact_zero};
    }
    if (!chi.is_primitive()) {
        auto star = chars::primitive_inducer(chi);
        auto F = feuler::build_product(chi.modulus(), chi);
        EvalResult base = l_value_auto(s, star, policy);
        Complex f = F.value(s);
        return {base.value * f, base.error_estimate * std::abs(f), base.exact_zero};
    }
    if (s.real() < -1.5) return reflect_eval(s, chi, policy);
    return l_eval(s, chi, policy);
}

double hardy_z(double t, const chars::DirichletCharacter& chi, const PrecisionPolicy& policy) {
    if (!chi.is_primitive()) throw UsageError("hardy_z requires a primitive character");
    const double d = double(chi.modulus());
    const double kappa = chi.parity_kappa();
    const Complex s{0.5, t};
    Complex half = (s + kappa) / 2.0;
    Complex logpre = half * std::log(d / pi) + log_gamma(half);
    Complex phase = std::exp(Complex{0.0, logpre.imag()});
    EvalResult lv;
    if (chi.modulus() == 1) {
        double err = 0.0;
        lv.value = hurwitz_zeta_derivs(s, 1.0, 0, policy, &err)[0];
        lv.error_estimate = err;
    } else {
        lv = l_eval(s, chi, policy);
    }
    Complex sqrt_eps = chi.modulus() == 1 ? Complex{1.0, 0.0} : char_constants(chi).sqrt_epsilon;
    Complex z = std::conj(sqrt_eps) * phase * lv.value;
    double tol = 1e-9 * std::abs(z) + 20.0 * lv.error_estimate + 1e-300;
    if (std::abs(z.imag()) > tol)
        throw NumericError("hardy_z lost reality at t = " + std::to_string(t) +
                           " for " + chi.label() + "; branch or precision bug");
    return z.real();
}

EvalResult dedekind_eval(Complex s, const field::AbelianField& K, const PrecisionPolicy& policy) {
    if (std::abs(s - Complex{1.0, 0.0}) < 1e-13)
        throw PoleError("zeta_K pole at s = 1");
    Complex prod{1.0, 0.0};
    double rel_err = 0.0;
    for (const auto& chi_star : K.primitive_inducers) {
        EvalResult r = l_value_auto(s, chi_star, policy);
        rel_err += r.error_estimate / std::max(std::abs(r.value), 1e-300);
        prod *= r.value;
    }
    return {prod, rel_err * std::abs(prod), false};
}

}  // namespace mef::lfunc

#include "mef/sieve.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <istream>
#include <ostream>

#include "mef/field.hpp"

namespace mef::sieve {

int MobiusTable::mu(std::uint64_t n) const {
    if (n == 0 || n > limit_) throw UsageError("mu(n) out of table range");
    return mu_[n];
}

std::uint32_t MobiusTable::spf(std::uint64_t n) const {
    if (!has_spf()) throw UsageError("table loaded from cache has no spf array");
    if (n < 2 || n > limit_) throw UsageError("spf(n) out of table range");
    return spf_[n];
}

namespace {

// linear sieve: O(N) time, mu plus smallest prime factors
void sieve_linear(std::uint64_t N, std::vector<std::int8_t>& mu, std::vector<std::uint32_t>& spf) {
    mu.assign(N + 1, 0);
    spf.assign(N + 1, 0);
    mu[1] = 1;
    std::vector<std::uint32_t> primes;
    primes.reserve(N > 16 ? std::size_t(double(N) / std::log(double(N)) * 1.2) : 8);
    for (std::uint64_t i = 2; i <= N; ++i) {
        if (spf[i] == 0) {
            spf[i] = std::uint32_t(i);
            mu[i] = -1;
            primes.push_back(std::uint32_t(i));
        }
        for (std::uint32_t p : primes) {
            if (p > spf[i] || i * p > N) break;
            spf[i * p] = p;
            mu[i * p] = (p == spf[i]) ? 0 : -mu[i];
        }
    }
}

// segmented sieve: mu only, O(N log log N) time, one byte per value plus a
// block-sized scratch; used when the spf array would blow the budget
void sieve_segmented(std::uint64_t N, std::vector<std::int8_t>& out) {
    out.assign(N + 1, 0);
    out[1] = 1;
    const auto root = std::uint64_t(std::sqrt(double(N))) + 1;
    std::vector<bool> composite(root + 1, false);
    std::vector<std::uint32_t> primes;
    for (std::uint64_t p = 2; p <= root; ++p) {
        if (composite[p]) continue;
        primes.push_back(std::uint32_t(p));
        for (std::uint64_t m = p * p; m <= root; m += p) composite[m] = true;
    }
    const std::uint64_t block = 1u << 16;
    std::vector<std::uint64_t> rest(block);
    std::vector<std::int8_t> mu(block);
    for (std::uint64_t lo = 1; lo <= N; lo += block) {
        const std::uint64_t hi = std::min(N, lo + block - 1);
        const std::uint64_t len = hi - lo + 1;
        for (std::uint64_t i = 0; i < len; ++i) {
            rest[i] = lo + i;
            mu[i] = 1;
        }
        for (std::uint32_t p : primes) {
            for (std::uint64_t n = (lo + p - 1) / p * p; n <= hi; n += p) {
                std::uint64_t i = n - lo;
                int count = 0;
                while (rest[i] % p == 0) {
                    rest[i] /= p;
                    ++count;
                }
                mu[i] = count >= 2 ? 0 : std::int8_t(-mu[i]);
            }
        }
        for (std::uint64_t i = 0; i < len; ++i)
            out[lo + i] = rest[i] > 1 ? std::int8_t(-mu[i]) : mu[i];
    }
    out[1] = 1;
}

}  // namespace

MobiusTable mobius_sieve(std::uint64_t N, std::uint64_t memory_budget_bytes) {
    if (N < 1) throw UsageError("sieve limit must be >= 1");
    MobiusTable t;
    t.limit_ = N;
    const std::uint64_t linear_need =
        N * (sizeof(std::int8_t) + sizeof(std::uint32_t)) + (N >> 3);
    if (linear_need <= memory_budget_bytes) {
        sieve_linear(N, t.mu_, t.spf_);
        return t;
    }
    const std::uint64_t segmented_need = N * sizeof(std::int8_t) + (3u << 19);  // + scratch
    if (segmented_need <= memory_budget_bytes) {
        sieve_segmented(N, t.mu_);
        return t;
    }
    throw UsageError("sieve limit " + std::to_string(N) + " needs about " +
                     std::to_string(segmented_need) + " bytes even mu-only, budget is " +
                     std::to_string(memory_budget_bytes));
}

namespace {
void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b), 8);
}
std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}
}  // namespace

void MobiusTable::write_binary(std::ostream& os) const {
    os.write("MBT1", 4);
    put_u64(os, limit_);
    // 2-bit codes: 0 -> mu=0, 1 -> mu=1, 2 -> mu=-1; n = 1..limit packed LSB first
    std::uint8_t byte = 0;
    int fill = 0;
    for (std::uint64_t n = 1; n <= limit_; ++n) {
        std::uint8_t code = mu_[n] == 0 ? 0 : (mu_[n] > 0 ? 1 : 2);
        byte |= code << (2 * fill);
        if (++fill == 4) {
            os.put(char(byte));
            byte = 0;
            fill = 0;
        }
    }
    if (fill) os.put(char(byte));
}

MobiusTable MobiusTable::read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "MBT1") throw UsageError("bad mobius cache magic");
    MobiusTable t;
    t.limit_ = get_u64(is);
    t.mu_.assign(t.limit_ + 1, 0);
    std::uint64_t n = 1;
    while (n <= t.limit_) {
        int c = is.get();
        if (c < 0) throw UsageError("truncated mobius cache");
        for (int k = 0; k < 4 && n <= t.limit_; ++k, ++n) {
            std::uint8_t code = (std::uint8_t(c) >> (2 * k)) & 3;
            t.mu_[n] = code == 0 ? 0 : (code == 1 ? 1 : -1);
        }
    }
    return t;
}

namespace {
// shared half-weight walk: calls f(n, weight) for each term of sum'_{n<=x}
template <typename F>
void half_weight_walk(double x, std::uint64_t limit, F&& f) {
    if (x < 1) return;
    if (x > double(limit)) throw UsageError("x exceeds table limit");
    auto n_max = std::uint64_t(std::floor(x));
    bool boundary = (double(n_max) == x);
    for (std::uint64_t n = 1; n <= n_max; ++n)
        f(n, (boundary && n == n_max) ? 0.5 : 1.0);
}
}  // namespace

Complex summatory_twisted(double x, const chars::DirichletCharacter& chi, const MobiusTable& table) {
    util::KahanSumComplex acc;
    half_weight_walk(x, table.limit(), [&](std::uint64_t n, double w) {
        int m = table.mu(n);
        if (m == 0) return;
        CharValue v = chi(n);
        if (v.zero) return;
        acc.add(w * double(m) * v.to_complex());
    });
    return acc.get();
}

double summatory_progression(double x, std::uint64_t q, std::uint64_t a, const MobiusTable& table) {
    if (q == 0) throw UsageError("modulus must be positive");
    if (std::gcd(a % q, q) != 1 && q > 1) throw UsageError("a must be coprime to q");
    util::KahanSum acc;
    half_weight_walk(x, table.limit(), [&](std::uint64_t n, double w) {
        if (n % q != a % q) return;
        acc.add(w * table.mu(n));
    });
    return acc.get();
}

double nearest_squarefree_coprime(double x, std::uint64_t q, const MobiusTable& table) {
    auto admissible = [&](std::uint64_t n) {
        if (n < 1 || n > table.limit()) return false;
        if (double(n) == x) return false;
        if (table.mu(n) == 0) return false;
        return q <= 1 || std::gcd(n % q, q) == 1;
    };
    for (std::uint64_t window = 64;; window *= 2) {
        double best = -1.0;
        std::int64_t lo = std::int64_t(std::ceil(x - double(window)));
        std::int64_t hi = std::int64_t(std::floor(x + double(window)));
        for (std::int64_t n = std::max<std::int64_t>(1, lo); n <= hi; ++n) {
            if (std::uint64_t(n) > table.limit()) break;
            if (!admissible(std::uint64_t(n))) continue;
            double d = std::abs(x - double(n));
            if (best < 0 || d < best) best = d;
        }
        if (best >= 0) return best;
        bool covers_left = lo <= 1;
        bool covers_right = hi >= std::int64_t(table.limit());
        if (covers_left && covers_right)
            throw NumericError("no square-free integer coprime to q inside the table; widen the window");
    }
}

FieldCoefficients field_coefficients(const field::AbelianField& K, std::uint64_t N) {
    if (N < 1) throw UsageError("coefficient limit must be >= 1");
    auto dirichlet_mult = [N](const std::vector<Complex>& f, const std::vector<Complex>& g) {
        std::vector<Complex> h(N + 1, Complex{0.0, 0.0});
        for (std::uint64_t a = 1; a <= N; ++a) {
            if (f[a] == Complex{0.0, 0.0}) continue;
            for (std::uint64_t b = 1; a * b <= N; ++b) {
                if (g[b] == Complex{0.0, 0.0}) continue;
                h[a * b] += f[a] * g[b];
            }
        }
        return h;
    };
    // mu is needed for the 1/L coefficient sequences
    MobiusTable mob = mobius_sieve(N);
    std::vector<Complex> a(N + 1, Complex{0.0, 0.0}), m = a;
    a[1] = m[1] = Complex{1.0, 0.0};
    for (const auto& chi_star : K.primitive_inducers) {
        std::vector<Complex> ca(N + 1), cm(N + 1);
        for (std::uint64_t n = 1; n <= N; ++n) {
            Complex v = chi_star.value(n % std::max<std::uint64_t>(chi_star.modulus(), 1));
            ca[n] = v;
            cm[n] = double(mob.mu(n)) * v;
        }
        a = dirichlet_mult(a, ca);
        m = dirichlet_mult(m, cm);
    }
    FieldCoefficients out;
    out.limit = N;
    out.ideal_counts.assign(N + 1, 0);
    out.mobius_coeffs.assign(N + 1, 0);
    auto snap = [](Complex z, const char* what) {
        double r = std::round(z.real());
        if (std::abs(z.real() - r) > 1e-6 || std::abs(z.imag()) > 1e-6)
            throw NumericError(std::string("field coefficient ") + what +
                               " failed integer rounding; character set is not conjugation-closed?");
        return std::int64_t(r);
    };
    for (std::uint64_t n = 1; n <= N; ++n) {
        out.ideal_counts[n] = snap(a[n], "a_n");
        out.mobius_coeffs[n] = snap(m[n], "m_n");
        if (out.ideal_counts[n] < 0) throw NumericError("negative ideal count a_n");
    }
    // squarefree-ideal counts: coefficients of zeta_K(s)/zeta_K(2s),
    // sf(n) = sum_{k^2 | n} a_{n/k^2} m_k
    out.squarefree_counts.assign(N + 1, 0);
    for (std::uint64_t k = 1; k * k <= N; ++k) {
        if (out.mobius_coeffs[k] == 0 && k > 1) continue;
        for (std::uint64_t j = 1; j * k * k <= N; ++j)
            out.squarefree_counts[j * k * k] += out.ideal_counts[j] * out.mobius_coeffs[k];
    }
    for (std::uint64_t n = 1; n <= N; ++n)
        if (out.squarefree_counts[n] < 0)
            throw NumericError("negative square-free ideal count; coefficient bug");
    return out;
}

double summatory_field(double x, const FieldCoefficients& coeffs) {
    util::KahanSum acc;
    half_weight_walk(x, coeffs.limit, [&](std::uint64_t n, double w) {
        acc.add(w * double(coeffs.mobius_coeffs[n]));
    });
    return acc.get();
}

ActiveNorm nearest_active_norm(double x, const FieldCoefficients& coeffs) {
    ActiveNorm best;
    double best_dist = -1.0;
    for (std::uint64_t window = 64;; window *= 2) {
        std::int64_t lo = std::int64_t(std::ceil(x - double(window)));
        std::int64_t hi = std::int64_t(std::floor(x + double(window)));
        for (std::int64_t sn = std::max<std::int64_t>(1, lo); sn <= hi; ++sn) {
            auto n = std::uint64_t(sn);
            if (n > coeffs.limit) break;
            if (double(n) == x) continue;
            if (coeffs.squarefree_counts[n] == 0) continue;
            double d = std::abs(x - double(n));
            if (best_dist >= 0 && d > best_dist) continue;
            std::int64_t count = coeffs.ideal_counts[n];
            if (best_dist < 0 || d < best_dist) {
                best = {n, count, false};
                best_dist = d;
            } else {
                // equidistant: bigger a_n wins, then smaller n (flagged)
                if (count > best.ideal_count) {
                    best = {n, count, false};
                } else if (count == best.ideal_count && n < best.n_x) {
                    best = {n, count, true};
                } else if (count == best.ideal_count) {
                    best.tie_flag = true;
                }
            }
        }
        if (best_dist >= 0) return best;
        if (lo <= 1 && hi >= std::int64_t(coeffs.limit))
            throw NumericError("no active norm inside the coefficient table; widen the window");
    }
}

double ideal_count_error_scan(double kappa, unsigned degree, const FieldCoefficients& coeffs) {
    double sup = 0.0;
    double running = 0.0;
    const double expo = 1.0 - 1.0 / double(degree);
    for (std::uint64_t n = 1; n <= coeffs.limit; ++n) {
        running += double(coeffs.ideal_counts[n]);
        double stat = std::abs(running - kappa * double(n)) / std::pow(double(n), expo);
        sup = std::max(sup, stat);
    }
    return sup;
}

void FieldCoefficients::write_csv(std::ostream& os) const {
    os << "n,a_n,m_n\n";
    for (std::uint64_t n = 1; n <= limit; ++n)
        os << n << ',' << ideal_counts[n] << ',' << mobius_coeffs[n] << '\n';
}

}  // namespace mef::sieve

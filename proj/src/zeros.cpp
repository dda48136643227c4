#include "mef/zeros.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <istream>
#include <numbers>
#include <ostream>

namespace mef::zeros {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;

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
void put_f64(std::ostream& os, double x) {
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    put_u64(os, v);
}
double get_f64(std::istream& is) {
    std::uint64_t v = get_u64(is);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}
}  // namespace

std::size_t ZeroCache::count_below(double T) const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.ordinate_gamma < T) ++n;
    return n;
}

void ZeroCache::write_binary(std::ostream& os) const {
    os.write("LZC1", 4);
    put_u64(os, character_label.size());
    os.write(character_label.data(), std::streamsize(character_label.size()));
    put_f64(os, t_max);
    put_u64(os, records.size());
    for (const auto& r : records) {
        put_f64(os, r.ordinate_gamma);
        put_f64(os, r.half_width);
    }
}

ZeroCache ZeroCache::read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "LZC1") throw UsageError("bad zero cache magic");
    ZeroCache c;
    std::uint64_t len = get_u64(is);
    c.character_label.resize(len);
    is.read(c.character_label.data(), std::streamsize(len));
    c.t_max = get_f64(is);
    std::uint64_t n = get_u64(is);
    c.records.resize(n);
    for (auto& r : c.records) {
        r.ordinate_gamma = get_f64(is);
        r.half_width = get_f64(is);
    }
    if (!is) throw UsageError("truncated zero cache");
    return c;
}

void ZeroCache::write_csv(std::ostream& os) const {
    os << "gamma,half_width\n";
    os.precision(17);
    for (const auto& r : records) os << r.ordinate_gamma << ',' << r.half_width << '\n';
}

ZeroCache scan_zeros(const chars::DirichletCharacter& chi, double T,
                     const lfunc::PrecisionPolicy& policy, const ScanOptions& opts) {
    if (!chi.is_primitive()) throw UsageError("scan_zeros requires a primitive character");
    if (T <= 0 || T > 1000.0) throw UsageError("scan height must be in (0, 1000]");
    ZeroCache cache;
    cache.character_label = chi.label();
    cache.t_max = T;

    const auto n_grid = std::size_t(std::floor((T - opts.t_min) / opts.step)) + 1;
    std::vector<double> z(n_grid);
    util::parallel_for(n_grid, [&](std::size_t i) {
        z[i] = lfunc::hardy_z(opts.t_min + double(i) * opts.step, chi, policy);
    });

    // sign changes, plus a dip check for suspected multiple zeros
    std::vector<std::pair<double, double>> brackets;
    for (std::size_t i = 0; i + 1 < n_grid; ++i) {
        double a = opts.t_min + double(i) * opts.step;
        if (z[i] == 0.0) {
            brackets.emplace_back(a - opts.step * 0.5, a + opts.step * 0.5);
            continue;
        }
        if (z[i] * z[i + 1] < 0.0) brackets.emplace_back(a, a + opts.step);
        if (i > 0 && std::abs(z[i]) < 1e-6 * std::min(std::abs(z[i - 1]), std::abs(z[i + 1])) &&
            z[i - 1] * z[i] > 0.0 && z[i] * z[i + 1] > 0.0)
            std::cerr << "[mef] warning: |Z| dip without sign change near t = " << a
                      << " for " << chi.label() << " (suspected multiple zero)\n";
    }

    cache.records.resize(brackets.size());
    util::parallel_for(brackets.size(), [&](std::size_t i) {
        auto [lo, hi] = brackets[i];
        double flo = lfunc::hardy_z(lo, chi, policy);
        for (unsigned it = 0; it < opts.max_bisections && (hi - lo) * 0.5 > opts.refine_half_width;
             ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = lfunc::hardy_z(mid, chi, policy);
            if (fm == 0.0) {
                lo = mid - opts.refine_half_width;
                hi = mid + opts.refine_half_width;
                break;
            }
            if (flo * fm < 0.0) {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        cache.records[i] = {0.5 * (lo + hi), 0.5 * (hi - lo), 1};
    });
    std::sort(cache.records.begin(), cache.records.end(),
              [](const ZeroRecord& a, const ZeroRecord& b) {
                  return a.ordinate_gamma < b.ordinate_gamma;
              });
    return cache;
}

namespace {

// total argument change of L along the segment [a, b], adaptive bisection on
// the phase increment
double arg_change(const chars::DirichletCharacter& chi, const lfunc::PrecisionPolicy& policy,
                  Complex a, Complex b, Complex fa, Complex fb, int depth = 0) {
    double d = std::arg(fb / fa);
    if (std::abs(d) < 0.9 && depth > 0) return d;
    if (depth > 42) throw NumericError("argument tracking failed to converge near contour point");
    Complex mid = 0.5 * (a + b);
    Complex fm = lfunc::l_value_auto(mid, chi, policy).value;
    if (std::abs(fm) == 0.0) throw NumericError("contour hit a zero of L");
    return arg_change(chi, policy, a, mid, fa, fm, depth + 1) +
           arg_change(chi, policy, mid, b, fm, fb, depth + 1);
}

}  // namespace

bool verify_count(ZeroCache& cache, const chars::DirichletCharacter& chi,
                  const lfunc::PrecisionPolicy& policy) {
    if (cache.character_label != chi.label())
        throw UsageError("cache/character mismatch in verify_count");
    const double t_floor = 0.1;  // keeps the t = 0 line (trivial zero of even chi) outside
    double top = cache.t_max;
    for (bool moved = true; moved;) {
        moved = false;
        for (const auto& r : cache.records)
            if (std::abs(r.ordinate_gamma - top) < 1e-3) {
                top += 1e-2;
                moved = true;
            }
    }
    const Complex corners[4] = {{1.5, t_floor}, {1.5, top}, {-0.5, top}, {-0.5, t_floor}};
    double total = 0.0;
    Complex prev = corners[0];
    Complex fprev = lfunc::l_value_auto(prev, chi, policy).value;
    for (int e = 0; e < 4; ++e) {
        Complex from = corners[e];
        Complex to = corners[(e + 1) % 4];
        // march in modest sub-segments so the adaptive recursion starts sane
        const double len = std::abs(to - from);
        const auto steps = std::max<std::size_t>(8, std::size_t(len / 0.5));
        for (std::size_t i = 1; i <= steps; ++i) {
            Complex next = from + (to - from) * (double(i) / double(steps));
            Complex fnext = lfunc::l_value_auto(next, chi, policy).value;
            total += arg_change(chi, policy, prev, next, fprev, fnext);
            prev = next;
            fprev = fnext;
        }
    }
    double winding = total / two_pi;
    auto count = std::int64_t(std::llround(winding));
    if (std::abs(winding - double(count)) > 0.1)
        throw NumericError("argument principle winding is not close to an integer: " +
                           std::to_string(winding));
    std::size_t expected = 0;
    for (const auto& r : cache.records)
        if (r.ordinate_gamma < top && r.ordinate_gamma > t_floor) ++expected;
    cache.count_verified = (count >= 0) && (std::size_t(count) == expected);
    return cache.count_verified;
}

ZeroCache scan_zeros_verified(const chars::DirichletCharacter& chi, double T,
                              const lfunc::PrecisionPolicy& policy, const ScanOptions& opts) {
    ScanOptions o = opts;
    for (int attempt = 0; attempt < 4; ++attempt) {
        ZeroCache cache = scan_zeros(chi, T, policy, o);
        if (verify_count(cache, chi, policy)) return cache;
        o.step /= 4.0;
    }
    throw NumericError("zero count kept disagreeing with the argument principle for " +
                       chi.label());
}

GoodOrdinate find_t_nu(double T, const std::vector<chars::DirichletCharacter>& characters,
                       const lfunc::PrecisionPolicy& policy, double sigma_grid_step,
                       double t_grid_step) {
    if (characters.empty()) throw UsageError("find_t_nu needs a nonempty character set");
    if (T <= 0) throw UsageError("T must be positive");
    std::vector<double> sigmas;
    for (double sg = 0.5; sg <= 2.0 + 1e-12; sg += sigma_grid_step) sigmas.push_back(sg);
    const auto n_t = std::size_t(std::floor(T / t_grid_step)) + 1;
    std::vector<double> bounds(n_t, std::numeric_limits<double>::infinity());
    util::parallel_for(n_t, [&](std::size_t i) {
        const double t = T + double(i) * t_grid_step;
        if (t > 2.0 * T + 1e-12) return;
        double worst = 0.0;
        for (const auto& chi : characters) {
            for (double sg : sigmas) {
                Complex v = lfunc::l_value_auto({sg, t}, chi, policy).value;
                double av = std::abs(v);
                if (av == 0.0) return;  // exact zero on a grid point: skip this t
                worst = std::max(worst, 1.0 / av);
            }
        }
        bounds[i] = worst;
    });
    // The truncation budget behaves like (log x + bound)/t, so the pick
    // weighs the attained bound against the height instead of minimizing the
    // bound alone; a bare argmin tends to sit low in [T, 2T] and wastes the
    // window.  The offset stands in for log(x+3) at desk-scale x.
    constexpr double kBudgetLogOffset = 6.0;
    GoodOrdinate out;
    out.sigma_step = sigma_grid_step;
    out.t_step = t_grid_step;
    out.attained_bound = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_t; ++i) {
        const double t = T + double(i) * t_grid_step;
        if (t > 2.0 * T + 1e-12) break;
        const double score = (kBudgetLogOffset + bounds[i]) / t;
        if (score < best) {
            best = score;
            out.attained_bound = bounds[i];
            out.t_nu = t;
        }
    }
    if (!std::isfinite(out.attained_bound))
        throw NumericError("find_t_nu: every grid ordinate hit a zero");
    return out;
}

GoodStar find_t_star(double T_nu, const std::vector<const feuler::FiniteEulerProduct*>& products) {
    if (products.empty()) throw UsageError("find_t_star needs a nonempty product set");
    // union of |eta| high enough to bound distances from anywhere in the window
    std::vector<double> etas;
    for (const auto* F : products)
        for (const auto& z : feuler::zero_lattice(*F, T_nu + 30.0)) etas.push_back(std::abs(z.eta));
    std::sort(etas.begin(), etas.end());
    etas.erase(std::unique(etas.begin(), etas.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               etas.end());
    auto full_dist = [&](double t) {
        double best = std::numeric_limits<double>::infinity();
        auto it = std::lower_bound(etas.begin(), etas.end(), t);
        if (it != etas.end()) best = std::min(best, std::abs(*it - t));
        if (it != etas.begin()) best = std::min(best, std::abs(*(it - 1) - t));
        return best;
    };
    // the maximin is taken against ordinates falling inside the window; a
    // lattice-free window takes the midpoint by convention
    std::vector<double> inside;
    for (double e : etas)
        if (e > T_nu && e < T_nu + 1.0) inside.push_back(e);
    if (inside.empty()) return {T_nu + 0.5, full_dist(T_nu + 0.5)};
    auto dist = [&](double t) {
        double best = std::numeric_limits<double>::infinity();
        for (double e : inside) best = std::min(best, std::abs(t - e));
        return best;
    };
    std::vector<double> cand = {T_nu, T_nu + 1.0};
    for (std::size_t i = 0; i + 1 < inside.size(); ++i)
        cand.push_back(0.5 * (inside[i] + inside[i + 1]));
    GoodStar out{T_nu, -1.0};
    for (double t : cand) {
        double d = dist(t);
        if (d > out.min_distance + 1e-15) out = {t, d};
    }
    return out;
}

}  // namespace mef::zeros

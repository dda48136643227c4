#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mef/finite_euler.hpp"
#include "mef/lfunc.hpp"
#include "mef/util.hpp"

using namespace mef;
using namespace mef::feuler;

namespace {
const lfunc::PrecisionPolicy kPolicy;

// the unique character mod 6 induced by the quadratic character mod 3
chars::DirichletCharacter chi6() {
    auto g = chars::build_group(6);
    for (const auto& chi : g.characters)
        if (!chi.is_principal()) return chi;
    throw std::runtime_error("unreachable");
}
chars::DirichletCharacter chi10_i() {
    // imprimitive mod 10 whose inducer mod 5 sends 2 -> i
    auto g = chars::build_group(10);
    for (const auto& chi : g.characters) {
        auto star = chars::primitive_inducer(chi);
        if (star.modulus() == 5 && std::abs(star.value(2) - Complex{0.0, 1.0}) < 1e-15) return chi;
    }
    throw std::runtime_error("no mod-10 character with chi*(2) = i");
}
}  // namespace

TEST_CASE("build_product: active primes and the origin multiplicity r") {
    auto g4 = chars::build_group(4);
    auto F4 = build_product(4, g4.principal());
    CHECK(F4.active_primes().size() == 1);
    CHECK(F4.zero_multiplicity_at_origin() == 1);
    CHECK(!F4.is_identically_one());

    auto F6 = build_product(6, chi6());
    CHECK(F6.active_primes().size() == 1);
    CHECK(F6.active_primes()[0].p == 2);
    CHECK(F6.zero_multiplicity_at_origin() == 0);

    auto g12 = chars::build_group(12);
    auto F12 = build_product(12, g12.principal());
    CHECK(F12.active_primes().size() == 2);
    CHECK(F12.zero_multiplicity_at_origin() == 2);

    // a primitive character leaves no active primes
    auto g5 = chars::build_group(5);
    for (const auto& chi : g5.characters)
        if (chi.is_primitive()) CHECK(build_product(5, chi).is_identically_one());
}

TEST_CASE("zero lattice: analytic positions and direct-evaluation roots") {
    auto F6 = build_product(6, chi6());
    auto lat = zero_lattice(F6, 20.0);
    // chi*(2) = -1: eta = pi(2k+1)/log 2
    const double step = std::numbers::pi / std::numbers::ln2;
    REQUIRE(!lat.empty());
    double first_pos = 1e9;
    for (const auto& z : lat)
        if (z.eta > 0) first_pos = std::min(first_pos, z.eta);
    CHECK(first_pos == doctest::Approx(step).epsilon(1e-14));
    for (const auto& z : lat) {
        double k = (z.eta * std::numbers::ln2 / std::numbers::pi - 1.0) / 2.0;
        CHECK(std::abs(k - std::round(k)) < 1e-12);
        CHECK(std::abs(F6.value({0.0, z.eta})) < 1e-12);
    }

    auto g4 = chars::build_group(4);
    auto F4 = build_product(4, g4.principal());
    auto lat4 = zero_lattice(F4, 30.0);
    const double spacing = 2.0 * std::numbers::pi / std::numbers::ln2;
    for (const auto& z : lat4) {
        double k = z.eta / spacing;
        CHECK(std::abs(k - std::round(k)) < 1e-12);
        CHECK(std::abs(std::round(k)) >= 1);  // origin excluded
        CHECK(std::abs(F4.value({0.0, z.eta})) < 1e-12);
    }
}

TEST_CASE("every fine-scan root on [0, 50] lands on a lattice point") {
    for (auto F : {build_product(6, chi6()), build_product(10, chi10_i())}) {
        auto lat = zero_lattice(F, 55.0);
        double prev = std::abs(F.value({0.0, 0.0}));
        for (double t = 0.01; t <= 50.0; t += 0.01) {
            double v = std::abs(F.value({0.0, t}));
            double next = std::abs(F.value({0.0, t + 0.01}));
            if (v < prev && v < next && v < 0.05) {
                // local dip: refine by golden-section on |F|
                double a = t - 0.01, b = t + 0.01;
                for (int it = 0; it < 60; ++it) {
                    double m1 = a + (b - a) * 0.382, m2 = a + (b - a) * 0.618;
                    if (std::abs(F.value({0.0, m1})) < std::abs(F.value({0.0, m2})))
                        b = m2;
                    else
                        a = m1;
                }
                double root = 0.5 * (a + b);
                if (std::abs(F.value({0.0, root})) < 1e-8) {
                    double best = 1e9;
                    for (const auto& z : lat) best = std::min(best, std::abs(z.eta - root));
                    CHECK(best < 1e-6);
                }
            }
            prev = v;
        }
    }
}

TEST_CASE("b constant closed forms including the complex mod-10 case") {
    auto g2 = chars::build_group(2);
    auto F2 = build_product(2, g2.principal());
    CHECK(std::abs(b_constant(F2) - Complex{-0.5 * std::numbers::ln2, 0.0}) < 1e-15);

    auto F6 = build_product(6, chi6());
    CHECK(std::abs(b_constant(F6) - Complex{-0.5 * std::numbers::ln2, 0.0}) < 1e-15);

    auto F10 = build_product(10, chi10_i());
    CHECK(std::abs(b_constant(F10) -
                   Complex{-0.5 * std::numbers::ln2, 0.5 * std::numbers::ln2}) < 1e-15);
}

TEST_CASE("b matches the numerical limit of F'/F(sigma) - r/sigma") {
    for (auto F : {build_product(4, chars::build_group(4).principal()),
                   build_product(6, chi6()), build_product(10, chi10_i()),
                   build_product(12, chars::build_group(12).principal())}) {
        Complex b = b_constant(F);
        const double r = F.zero_multiplicity_at_origin();
        // Richardson on sigma, 2h vs h
        auto probe = [&](double sg) {
            return F.log_derivative({sg, 0.0}) - r / Complex{sg, 0.0};
        };
        Complex v1 = probe(1e-4), v2 = probe(5e-5);
        Complex extrap = 2.0 * v2 - v1;
        CHECK(std::abs(extrap - b) < 1e-7);
    }
}

TEST_CASE("hadamard truncation residual decays as pairs double") {
    auto g4 = chars::build_group(4);
    auto F4 = build_product(4, g4.principal());
    double r100 = hadamard_check(F4, {0.7, 0.0}, 100);
    double r1000 = hadamard_check(F4, {0.7, 0.0}, 1000);
    double r10000 = hadamard_check(F4, {0.7, 0.0}, 10000);
    CHECK(r1000 < 0.5 * r100);
    CHECK(r10000 < 0.5 * r1000);
    CHECK(r10000 < 1e-4);

    // reflection symmetry for a real character
    auto F6 = build_product(6, chi6());
    double rp = hadamard_check(F6, {0.4, 2.0}, 500);
    double rm = hadamard_check(F6, {0.4, -2.0}, 500);
    CHECK(rp == doctest::Approx(rm).epsilon(1e-6));

    // s^r factor leaves a finite nonzero limit at the origin
    Complex near0 = F4.value({1e-6, 0.0}) / Complex{1e-6, 0.0};
    Complex nearer = F4.value({1e-7, 0.0}) / Complex{1e-7, 0.0};
    CHECK(std::abs(near0 - nearer) < 1e-5 * std::abs(near0));
    CHECK(std::abs(near0) > 0.1);
}

TEST_CASE("zero counting obeys the window bound") {
    auto F6 = build_product(6, chi6());
    auto c1 = count_zeros(F6, 0.0, 5.0);
    CHECK(c1.count == 1);  // eta = pi/log 2 = 4.532...
    CHECK(c1.bound == doctest::Approx(1.0 + 2.5 * std::numbers::ln2));
    CHECK(c1.holds);

    auto g4 = chars::build_group(4);
    auto F4 = build_product(4, g4.principal());
    auto c2 = count_zeros(F4, 8.0, 2.0);
    CHECK(c2.count == 1);  // 2 pi / log 2 = 9.0647
    CHECK(c2.holds);
    CHECK(c2.bound >= 1.0);

    auto c3 = count_zeros(F4, 0.37, 1e-9);
    CHECK(c3.count == 0);
    CHECK(c3.holds);

    // randomized windows stay under the bound
    util::SplitMix64 rng(0xfeu);
    for (auto F : {F4, F6, build_product(10, chi10_i()),
                   build_product(12, chars::build_group(12).principal())}) {
        for (int i = 0; i < 1000; ++i) {
            double t = rng.uniform(-60.0, 60.0);
            double h = rng.uniform(1e-3, 10.0);
            CHECK(count_zeros(F, t, h).holds);
        }
    }
}

TEST_CASE("value bounds in both half-planes") {
    auto g4 = chars::build_group(4);
    auto F4 = build_product(4, g4.principal());
    const double h4 = 1.0 / std::log(4.0);
    for (double t = -20.0; t <= 20.0; t += 0.37) {
        auto r = value_bound_right(F4, h4, t);
        CHECK(r.holds);
        CHECK(r.rhs == doctest::Approx(16.0));
    }
    auto F6 = build_product(6, chi6());
    for (double t = -20.0; t <= 20.0; t += 0.37) {
        auto l = value_bound_left(F6, -2.0, t);
        CHECK(l.holds);
    }
    // factors tend to 1 far right
    CHECK(std::abs(F4.value({40.0, 3.0}) - Complex{1.0, 0.0}) < 1e-11);
    CHECK_THROWS_AS(value_bound_right(F4, 0.0, 0.0), UsageError);
    CHECK_THROWS_AS(value_bound_left(F4, 0.0, 0.0), UsageError);
}

TEST_CASE("local log-derivative expansion stays inside its budget") {
    auto g4 = chars::build_group(4);
    auto F4 = build_product(4, g4.principal());
    auto r1 = log_derivative_check(F4, {0.1, 20.0}, 0.5);
    CHECK(r1.holds);
    CHECK(std::isfinite(r1.residual));

    // r/s pole cancels exactly on the real axis near the origin
    for (double sg : {0.05, 0.01, 0.002}) {
        auto r = log_derivative_check(F4, {sg, 0.0}, 0.1);
        CHECK(r.holds);
    }

    // doubling h keeps the residual within budget on a small grid
    auto F6 = build_product(6, chi6());
    for (double t : {3.0, 10.0, 31.0}) {
        for (double h : {0.25, 0.5, 1.0, 2.0}) {
            auto r = log_derivative_check(F6, {h / 4.0, t}, h);
            CHECK(r.holds);
        }
    }
}

TEST_CASE("the L = L* x F identity across moduli up to 30") {
    util::SplitMix64 rng(0x77);
    for (std::uint64_t q = 2; q <= 30; ++q) {
        auto g = chars::build_group(q);
        for (const auto& chi : g.characters) {
            if (chi.is_principal()) continue;  // pole bookkeeping handled elsewhere
            auto star = chars::primitive_inducer(chi);
            auto F = build_product(q, chi);
            for (int i = 0; i < 100; ++i) {
                Complex s{rng.uniform(-0.5, 2.5), rng.uniform(-25.0, 25.0)};
                Complex lhs = lfunc::l_eval(s, chi, kPolicy).value;
                Complex rhs = lfunc::l_eval(s, star, kPolicy).value * F.value(s);
                CHECK(std::abs(lhs - rhs) < 1e-9 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("conjugate symmetry of lattices and CSV export") {
    auto F10 = build_product(10, chi10_i());
    auto F10bar = build_product(10, chi10_i().conjugate());
    auto lat = zero_lattice(F10, 25.0);
    auto latbar = zero_lattice(F10bar, 25.0);
    REQUIRE(lat.size() == latbar.size());
    for (std::size_t i = 0; i < lat.size(); ++i)
        CHECK(lat[i].eta == doctest::Approx(-latbar[latbar.size() - 1 - i].eta).epsilon(1e-14));

    std::ostringstream ss;
    write_lattice_csv(ss, lat);
    CHECK(ss.str().substr(0, 30) == std::string("eta,source_prime,multiplicity\n"));
}

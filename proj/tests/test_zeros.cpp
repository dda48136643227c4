#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mef/zeros.hpp"
#include "oracles.hpp"

using namespace mef;
using namespace mef::zeros;

namespace {
const lfunc::PrecisionPolicy kPolicy;

const chars::DirichletCharacter& trivial_char() {
    static auto g = chars::build_group(1);
    return g.characters[0];
}
const chars::DirichletCharacter& chi4() {
    static auto g = chars::build_group(4);
    static auto c = g.characters[0].is_primitive() ? g.characters[0] : g.characters[1];
    return c;
}
}  // namespace

TEST_CASE("first ordinates against the scan-free bisection oracle") {
    // oracle: dense probe + bisection on hardy_z, no shared scan machinery
    auto z4 = [](double t) { return lfunc::hardy_z(t, chi4(), kPolicy); };
    auto roots4 = oracles::bisection_roots(z4, 5.5, 6.5, 1e-3, 1e-10);
    REQUIRE(roots4.size() == 1);

    auto cache4 = scan_zeros(chi4(), 10.0, kPolicy);
    REQUIRE(cache4.records.size() == 1);
    CHECK(std::abs(cache4.records[0].ordinate_gamma - roots4[0]) < 1e-9);
    CHECK(std::abs(cache4.records[0].ordinate_gamma - 6.0209489046) < 1e-6);
    CHECK(cache4.records[0].half_width <= 1e-9);

    auto zz = [](double t) { return lfunc::hardy_z(t, trivial_char(), kPolicy); };
    auto rootsz = oracles::bisection_roots(zz, 14.0, 14.3, 1e-3, 1e-10);
    REQUIRE(rootsz.size() == 1);
    auto cachez = scan_zeros(trivial_char(), 15.0, kPolicy);
    REQUIRE(cachez.records.size() == 1);
    CHECK(std::abs(cachez.records[0].ordinate_gamma - rootsz[0]) < 1e-9);
    CHECK(std::abs(cachez.records[0].ordinate_gamma - 14.1347251417) < 1e-6);

    // below the first ordinate the cache is empty
    auto none = scan_zeros(chi4(), 5.0, kPolicy);
    CHECK(none.records.empty());
}

TEST_CASE("stored ordinates re-verify as sign changes and survive a step change") {
    auto cache = scan_zeros(chi4(), 30.0, kPolicy);
    for (const auto& r : cache.records) {
        double lo = lfunc::hardy_z(r.ordinate_gamma - 1e-7, chi4(), kPolicy);
        double hi = lfunc::hardy_z(r.ordinate_gamma + 1e-7, chi4(), kPolicy);
        CHECK(lo * hi < 0.0);
    }
    ScanOptions fine;
    fine.step = 0.01;
    auto cache2 = scan_zeros(chi4(), 30.0, kPolicy, fine);
    REQUIRE(cache.records.size() == cache2.records.size());
    for (std::size_t i = 0; i < cache.records.size(); ++i)
        CHECK(std::abs(cache.records[i].ordinate_gamma - cache2.records[i].ordinate_gamma) < 1e-8);
}

TEST_CASE("argument-principle verification catches a deleted record") {
    auto cache = scan_zeros(chi4(), 50.0, kPolicy);
    CHECK(verify_count(cache, chi4(), kPolicy));
    CHECK(cache.count_verified);

    auto broken = cache;
    broken.records.pop_back();
    CHECK(!verify_count(broken, chi4(), kPolicy));

    auto empty = scan_zeros(chi4(), 5.0, kPolicy);
    CHECK(verify_count(empty, chi4(), kPolicy));  // winding 0 below the first zero
}

TEST_CASE("scan_zeros_verified produces a verified cache") {
    auto cache = scan_zeros_verified(trivial_char(), 30.0, kPolicy);
    CHECK(cache.count_verified);
    CHECK(cache.records.size() == 3);  // 14.13, 21.02, 25.01
}

TEST_CASE("find_t_nu: determinism, zero avoidance, monotonicity in the character set") {
    std::vector<chars::DirichletCharacter> just4 = {chi4()};
    auto g1 = find_t_nu(6.0, just4, kPolicy, 0.25, 0.0625);
    auto g2 = find_t_nu(6.0, just4, kPolicy, 0.25, 0.0625);
    CHECK(g1.t_nu == g2.t_nu);
    CHECK(g1.attained_bound == g2.attained_bound);
    // the window [6, 12] contains gamma_1 = 6.0209; the minimizer keeps clear
    CHECK(std::abs(g1.t_nu - 6.0209489046) > 0.0625);
    CHECK(std::isfinite(g1.attained_bound));

    // the grid bound over a superset of characters dominates pointwise
    std::vector<chars::DirichletCharacter> both = {chi4(), trivial_char()};
    auto g3 = find_t_nu(6.0, both, kPolicy, 0.25, 0.0625);
    double at_g3 = 0.0;
    for (double sg = 0.5; sg <= 2.0 + 1e-12; sg += 0.25)
        at_g3 = std::max(at_g3,
                         1.0 / std::abs(lfunc::l_eval({sg, g3.t_nu}, chi4(), kPolicy).value));
    CHECK(g3.attained_bound >= at_g3);

    // a window between consecutive zeta ordinates stays cheap
    std::vector<chars::DirichletCharacter> justz = {trivial_char()};
    auto gz = find_t_nu(5.0, justz, kPolicy, 0.25, 0.0625);
    CHECK(gz.attained_bound < 10.0);
}

TEST_CASE("find_t_star against an explicit lattice") {
    auto g6 = chars::build_group(6);
    chars::DirichletCharacter chi6;
    for (const auto& chi : g6.characters)
        if (!chi.is_principal()) chi6 = chi;
    auto F6 = feuler::build_product(6, chi6);
    std::vector<const feuler::FiniteEulerProduct*> ps = {&F6};
    // lattice eta = pi(2k+1)/log 2 = 4.53, 13.60, 22.66, ...; [10, 11] sits in
    // a gap, so the midpoint convention applies
    auto gs = find_t_star(10.0, ps);
    CHECK(gs.t_star == doctest::Approx(10.5));
    CHECK(gs.min_distance == doctest::Approx(13.59729 - 10.5).epsilon(1e-4));

    // gap-interior window for the principal product mod 4 (spacing 9.0647)
    auto g4 = chars::build_group(4);
    auto F4 = feuler::build_product(4, g4.principal());
    std::vector<const feuler::FiniteEulerProduct*> p4 = {&F4};
    auto gs4 = find_t_star(12.0, p4);
    CHECK(gs4.t_star == doctest::Approx(12.5));

    // an ordinate dead-center pushes the pick to an endpoint
    auto gs5 = find_t_star(13.59729 - 0.5, p4);  // not this lattice; use F6
    std::vector<const feuler::FiniteEulerProduct*> p6 = {&F6};
    auto gs6 = find_t_star(13.0973, p6);  // 13.5973 sits at window center
    CHECK((gs6.t_star == doctest::Approx(13.0973) ||
           gs6.t_star == doctest::Approx(14.0973)));
    CHECK(gs6.min_distance == doctest::Approx(0.5).epsilon(1e-3));
    (void)gs5;
}

TEST_CASE("cache files round-trip and csv export") {
    auto cache = scan_zeros(chi4(), 30.0, kPolicy);
    cache.count_verified = true;
    std::stringstream ss;
    cache.write_binary(ss);
    auto back = ZeroCache::read_binary(ss);
    CHECK(back.character_label == cache.character_label);
    CHECK(back.t_max == cache.t_max);
    REQUIRE(back.records.size() == cache.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) {
        CHECK(back.records[i].ordinate_gamma == cache.records[i].ordinate_gamma);
        CHECK(back.records[i].half_width == cache.records[i].half_width);
    }
    std::ostringstream csv;
    cache.write_csv(csv);
    CHECK(csv.str().substr(0, 17) == std::string("gamma,half_width\n"));
}

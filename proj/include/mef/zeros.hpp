#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mef/characters.hpp"
#include "mef/finite_euler.hpp"
#include "mef/lfunc.hpp"
#include "mef/util.hpp"

namespace mef::zeros {

struct ZeroRecord {
    double ordinate_gamma = 0.0;
    double half_width = 0.0;  // bisection radius, <= 1e-9
    int assumed_multiplicity = 1;
};

struct ZeroCache {
    std::string character_label;
    double t_max = 0.0;
    bool count_verified = false;
    std::vector<ZeroRecord> records;  // gamma increasing

    std::size_t count_below(double T) const;

    // "LZC1" binary layout: magic, label, T_max, count, (gamma, half_width) pairs
    void write_binary(std::ostream& os) const;
    static ZeroCache read_binary(std::istream& is);
    void write_csv(std::ostream& os) const;
};

struct ScanOptions {
    double step = 0.03;
    double refine_half_width = 1e-9;
    unsigned max_bisections = 60;
    double t_min = 0.0;
};

// All critical-line sign changes of hardy_z on [0, T], bisection-refined.
// Warns on |Z| dips without sign change (suspected multiple zero).
ZeroCache scan_zeros(const chars::DirichletCharacter& chi, double T,
                     const lfunc::PrecisionPolicy& policy, const ScanOptions& opts = {});

// Argument-principle count over [-1/2, 3/2] x [t_floor, T_max] compared with
// the cache; sets count_verified on success.  The contour keeps 1e-3 clear of
// recorded ordinates, nudging the top edge by 1e-2 when needed.
bool verify_count(ZeroCache& cache, const chars::DirichletCharacter& chi,
                  const lfunc::PrecisionPolicy& policy);

// scan + verify with up to 3 rescans at step/4 on a count mismatch
ZeroCache scan_zeros_verified(const chars::DirichletCharacter& chi, double T,
                              const lfunc::PrecisionPolicy& policy, const ScanOptions& opts = {});

struct GoodOrdinate {
    double t_nu = 0.0;
    double attained_bound = 0.0;  // max over grid and characters of 1/|L|
    double sigma_step = 0.0;
    double t_step = 0.0;
};

// Good-ordinate search over t in [T, 2T]: evaluates the grid bound
// max_{sigma in [1/2,2], chi in set} 1/|L(sigma+it,chi)| and picks the t
// minimizing (6 + bound)/t, the shape of the truncation budget.  Ties break
// to smaller t; grid points on a zero are skipped.
GoodOrdinate find_t_nu(double T, const std::vector<chars::DirichletCharacter>& characters,
                       const lfunc::PrecisionPolicy& policy, double sigma_grid_step = 0.25,
                       double t_grid_step = 0.0625);

struct GoodStar {
    double t_star = 0.0;
    double min_distance = 0.0;  // distance to the nearest lattice ordinate
};

// Point of [T_nu, T_nu + 1] farthest from the union of |eta| over the given
// finite Euler products; midpoint when the window is lattice-free.
GoodStar find_t_star(double T_nu, const std::vector<const feuler::FiniteEulerProduct*>& products);

}  // namespace mef::zeros

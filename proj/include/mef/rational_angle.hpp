#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "mef/util.hpp"

namespace mef {

// Exact root of unity e(num/den) = exp(2*pi*i*num/den), kept as a reduced
// rational angle with 0 <= num < den.  Multiplying characters is adding
// angles, so group arithmetic stays exact.
struct RationalAngle {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static RationalAngle make(std::int64_t n, std::int64_t d) {
        RationalAngle a;
        n %= d;
        if (n < 0) n += d;
        std::int64_t g = util::gcd64(n, d);
        a.num = n / g;
        a.den = d / g;
        return a;
    }

    RationalAngle operator+(const RationalAngle& o) const {
        std::int64_t g = util::gcd64(den, o.den);
        std::int64_t l = den / g * o.den;
        return make(num * (l / den) + o.num * (l / o.den), l);
    }
    RationalAngle operator-() const { return make(-num, den); }
    RationalAngle conj() const { return -*this; }
    bool operator==(const RationalAngle& o) const { return num == o.num && den == o.den; }
    bool is_one() const { return num == 0; }

    double radians() const { return 2.0 * std::numbers::pi * double(num) / double(den); }
    Complex to_complex() const {
        // exact values on the axes, trig otherwise
        if (den == 1) return {1.0, 0.0};
        if (den == 2) return {-1.0, 0.0};
        if (den == 4) return num == 1 ? Complex{0.0, 1.0} : Complex{0.0, -1.0};
        return std::polar(1.0, radians());
    }
};

// A Dirichlet-character value: zero off the units, an exact root of unity on
// them.
struct CharValue {
    bool zero = true;
    RationalAngle angle;

    static CharValue null() { return {}; }
    static CharValue of(RationalAngle a) { return {false, a}; }
    Complex to_complex() const { return zero ? Complex{0.0, 0.0} : angle.to_complex(); }
    CharValue conj() const { return zero ? *this : of(angle.conj()); }
    bool is_one() const { return !zero && angle.is_one(); }
    CharValue operator*(const CharValue& o) const {
        if (zero || o.zero) return null();
        return of(angle + o.angle);
    }
};

}  // namespace mef

#ifndef CDIST_INTERVAL_HPP
#define CDIST_INTERVAL_HPP

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "cdist/rational.hpp"

namespace cdist {

// Closed rational interval [lo, hi].
struct Interval {
    Rational lo;
    Rational hi;

    Interval() = default;
    explicit Interval(const Rational& point) : lo(point), hi(point) {}
    Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (hi < lo) throw std::invalid_argument("Interval: lo > hi");
    }

    Rational width() const { return hi - lo; }
    Rational mid() const { return (lo + hi) / Rational(2); }
    bool contains(const Rational& q) const { return lo <= q && q <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool intersects(const Interval& o) const { return !(hi < o.lo || o.hi < lo); }
    Rational mag() const { return max(lo.abs(), hi.abs()); }

    // Outward rounding to multiples of 2^-p.
    Interval round_out(unsigned long p) const { return {lo.round_down(p), hi.round_up(p)}; }

    friend bool operator==(const Interval&, const Interval&) = default;

    friend Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
    friend Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
    friend Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
    friend Interval operator*(const Interval& a, const Interval& b) {
        Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
        return {min(min(p1, p2), min(p3, p4)), max(max(p1, p2), max(p3, p4))};
    }
    friend Interval operator*(const Interval& a, const Rational& s) {
        return s.sign() >= 0 ? Interval{a.lo * s, a.hi * s} : Interval{a.hi * s, a.lo * s};
    }
    friend Interval operator/(const Interval& a, const Rational& s) { return a * (Rational(1) / s); }
};

// Interval hull.
inline Interval hull(const Interval& a, const Interval& b) { return {min(a.lo, b.lo), max(a.hi, b.hi)}; }

// {"lo":"p/q","hi":"p/q","precision":n}
inline nlohmann::json to_json(const Interval& iv, unsigned precision) {
    return {{"lo", iv.lo.to_string()}, {"hi", iv.hi.to_string()}, {"precision", precision}};
}

inline nlohmann::json to_json(const Interval& iv) { return {{"lo", iv.lo.to_string()}, {"hi", iv.hi.to_string()}}; }

} // namespace cdist

#endif

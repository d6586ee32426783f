#ifndef CDIST_OPENSET_HPP
#define CDIST_OPENSET_HPP

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cdist/creal.hpp"
#include "cdist/lazy.hpp"

namespace cdist {

// How a sample, observed at finite precision, relates to an open set.
enum class Membership { Inside, Outside, Straddle, Failed };

inline const char* to_string(Membership m) {
    switch (m) {
    case Membership::Inside: return "inside";
    case Membership::Outside: return "outside";
    case Membership::Straddle: return "straddle";
    case Membership::Failed: return "failed";
    }
    return "?";
}

// One coordinate of a flattened sample.
using Coord = std::variant<CReal, LazyNat, bool>;

// Open box; a missing bound is infinite.
struct Box {
    std::vector<std::optional<Rational>> lo;
    std::vector<std::optional<Rational>> hi;

    std::size_t dim() const { return lo.size(); }

    // The closed enclosure lies inside the open box.
    bool contains(const std::vector<Interval>& e) const {
        for (std::size_t i = 0; i < dim(); ++i) {
            if (lo[i] && !(*lo[i] < e[i].lo)) return false;
            if (hi[i] && !(e[i].hi < *hi[i])) return false;
        }
        return true;
    }
    bool disjoint(const std::vector<Interval>& e) const {
        for (std::size_t i = 0; i < dim(); ++i) {
            if (lo[i] && e[i].hi <= *lo[i]) return true;
            if (hi[i] && e[i].lo >= *hi[i]) return true;
        }
        return false;
    }
    bool covers(const Box& o) const {
        for (std::size_t i = 0; i < dim(); ++i) {
            if (lo[i] && (!o.lo[i] || *o.lo[i] < *lo[i])) return false;
            if (hi[i] && (!o.hi[i] || *hi[i] < *o.hi[i])) return false;
        }
        return true;
    }
};

// Finite union of open rational boxes in R^d, a finite or cofinite set of
// naturals, a subset of the booleans, a product of those, or empty.
class OpenSet {
public:
    enum class Kind { Empty, RealBoxes, NatSet, BoolSet, Product };

    static OpenSet empty() { return OpenSet(Kind::Empty); }

    static OpenSet boxes(std::vector<Box> bs) {
        if (bs.empty()) return empty();
        std::size_t d = bs.front().dim();
        for (const Box& b : bs) {
            if (b.dim() != d || d == 0) throw std::invalid_argument("open set: boxes of different dimension");
            for (std::size_t i = 0; i < d; ++i)
                if (b.lo[i] && b.hi[i] && !(*b.lo[i] < *b.hi[i]))
                    throw std::invalid_argument("open set: box with lo >= hi");
        }
        OpenSet s(Kind::RealBoxes);
        s.boxes_ = std::move(bs);
        s.canonicalize();
        return s;
    }

    static OpenSet interval(std::optional<Rational> lo, std::optional<Rational> hi) {
        return boxes({Box{{std::move(lo)}, {std::move(hi)}}});
    }

    static OpenSet nats(std::set<std::uint64_t> members) {
        OpenSet s(Kind::NatSet);
        s.nats_ = std::move(members);
        return s;
    }

    // Every natural except `excluded`.
    static OpenSet nats_except(std::set<std::uint64_t> excluded) {
        OpenSet s(Kind::NatSet);
        s.nats_ = std::move(excluded);
        s.cofinite_ = true;
        return s;
    }

    static OpenSet bools(bool with_false, bool with_true) {
        OpenSet s(Kind::BoolSet);
        s.bool_false_ = with_false;
        s.bool_true_ = with_true;
        return s;
    }

    static OpenSet product(std::vector<OpenSet> factors);

    // "(0,1/2)∪(3/4,1)", "{1,2,3}", "~{0}", "(0,1)×(-inf,2)", "{true}", "∅".
    static OpenSet parse(std::string_view text);

    Kind kind() const { return kind_; }
    // Number of flattened coordinates a sample must provide.
    std::size_t dim() const {
        switch (kind_) {
        case Kind::Empty: return 0;
        case Kind::RealBoxes: return boxes_.front().dim();
        case Kind::NatSet:
        case Kind::BoolSet: return 1;
        case Kind::Product: {
            std::size_t d = 0;
            for (const auto& f : factors_) d += f.dim();
            return d;
        }
        }
        return 0;
    }
    const std::vector<Box>& box_list() const { return boxes_; }
    const std::set<std::uint64_t>& nat_list() const { return nats_; }
    bool cofinite() const { return cofinite_; }

    OpenSet unite(const OpenSet& o) const;

    std::string to_string() const;

    // Decides membership from enclosures at precision n. Real coordinates
    // that cannot be queried and naturals that cannot be fully forced give
    // Failed, except where partial information already certifies Outside.
    Membership classify(const std::vector<Coord>& coords, unsigned n) const {
        if (kind_ == Kind::Empty) return Membership::Outside;
        if (coords.size() != dim())
            throw std::invalid_argument("open set of dimension " + std::to_string(dim()) + " applied to a sample with " +
                                        std::to_string(coords.size()) + " coordinates");
        return classify_at(coords, 0, n);
    }

private:
    explicit OpenSet(Kind k) : kind_(k) {}

    void canonicalize() {
        if (boxes_.front().dim() == 1) {
            // Merge overlapping open intervals; touching ones stay apart since
            // the shared endpoint is not a member.
            auto lo_less = [](const Box& a, const Box& b) {
                if (!a.lo[0]) return static_cast<bool>(b.lo[0]);
                if (!b.lo[0]) return false;
                return *a.lo[0] < *b.lo[0];
            };
            std::sort(boxes_.begin(), boxes_.end(), lo_less);
            std::vector<Box> merged;
            for (Box& b : boxes_) {
                if (!merged.empty()) {
                    Box& last = merged.back();
                    bool overlaps = !last.hi[0] || !b.lo[0] || *b.lo[0] < *last.hi[0];
                    if (overlaps) {
                        if (!last.hi[0] || !b.hi[0])
                            last.hi[0].reset();
                        else
                            last.hi[0] = max(*last.hi[0], *b.hi[0]);
                        continue;
                    }
                }
                merged.push_back(std::move(b));
            }
            boxes_ = std::move(merged);
            return;
        }
        std::vector<Box> kept;
        for (std::size_t i = 0; i < boxes_.size(); ++i) {
            bool redundant = false;
            for (std::size_t j = 0; j < boxes_.size() && !redundant; ++j)
                if (i != j && boxes_[j].covers(boxes_[i]) && (!boxes_[i].covers(boxes_[j]) || j < i)) redundant = true;
            if (!redundant) kept.push_back(boxes_[i]);
        }
        boxes_ = std::move(kept);
    }

    Membership classify_at(const std::vector<Coord>& c, std::size_t at, unsigned n) const {
        switch (kind_) {
        case Kind::Empty: return Membership::Outside;
        case Kind::RealBoxes: return classify_reals(c, at, n);
        case Kind::NatSet: return classify_nat(c[at]);
        case Kind::BoolSet: return classify_bool(c[at]);
        case Kind::Product: {
            bool failed = false, straddle = false;
            for (const auto& f : factors_) {
                Membership m = f.classify_at(c, at, n);
                at += f.dim();
                if (m == Membership::Outside) return Membership::Outside;
                if (m == Membership::Failed) failed = true;
                if (m == Membership::Straddle) straddle = true;
            }
            if (failed) return Membership::Failed;
            return straddle ? Membership::Straddle : Membership::Inside;
        }
        }
        return Membership::Failed;
    }

    Membership classify_reals(const std::vector<Coord>& c, std::size_t at, unsigned n) const {
        std::size_t d = dim();
        std::vector<Interval> e;
        e.reserve(d);
        for (std::size_t i = 0; i < d; ++i) {
            const CReal* x = std::get_if<CReal>(&c[at + i]);
            if (x == nullptr) throw std::invalid_argument("real box applied to a non-real coordinate");
            try {
                e.push_back(x->tight_enclosure(n));
            } catch (const Error&) {
                return Membership::Failed;
            }
        }
        bool all_disjoint = true;
        for (const Box& b : boxes_) {
            if (b.contains(e)) return Membership::Inside;
            if (!b.disjoint(e)) all_disjoint = false;
        }
        return all_disjoint ? Membership::Outside : Membership::Straddle;
    }

    Membership classify_nat(const Coord& c) const {
        const LazyNat* x = std::get_if<LazyNat>(&c);
        if (x == nullptr) throw std::invalid_argument("set of naturals applied to a non-natural coordinate");
        std::uint64_t top = nats_.empty() ? 0 : *nats_.rbegin();
        LazyNat::Partial p = x->peel(cofinite_ ? UINT64_MAX : top);
        if (p.exact) {
            bool listed = nats_.count(p.floor) != 0;
            return listed != cofinite_ ? Membership::Inside : Membership::Outside;
        }
        // Value is >= floor or undefined: outside every finite set below floor.
        if (!cofinite_ && (nats_.empty() || p.floor > top)) return Membership::Outside;
        return Membership::Failed;
    }

    Membership classify_bool(const Coord& c) const {
        const bool* b = std::get_if<bool>(&c);
        if (b == nullptr) throw std::invalid_argument("set of booleans applied to a non-boolean coordinate");
        return (*b ? bool_true_ : bool_false_) ? Membership::Inside : Membership::Outside;
    }

    Kind kind_;
    std::vector<Box> boxes_;
    std::set<std::uint64_t> nats_;
    bool cofinite_ = false;
    bool bool_false_ = false;
    bool bool_true_ = false;
    std::vector<OpenSet> factors_;
};

inline OpenSet OpenSet::product(std::vector<OpenSet> factors) {
    if (factors.empty()) throw std::invalid_argument("open set: empty product");
    if (factors.size() == 1) return factors.front();
    for (const auto& f : factors)
        if (f.kind_ == Kind::Empty) return empty();
    bool all_real = std::all_of(factors.begin(), factors.end(), [](const OpenSet& f) { return f.kind_ == Kind::RealBoxes; });
    if (all_real) {
        // Distribute the product over the unions.
        std::vector<Box> acc = factors.front().boxes_;
        for (std::size_t i = 1; i < factors.size(); ++i) {
            std::vector<Box> next;
            for (const Box& a : acc)
                for (const Box& b : factors[i].boxes_) {
                    Box c = a;
                    c.lo.insert(c.lo.end(), b.lo.begin(), b.lo.end());
                    c.hi.insert(c.hi.end(), b.hi.begin(), b.hi.end());
                    next.push_back(std::move(c));
                }
            acc = std::move(next);
        }
        return boxes(std::move(acc));
    }
    OpenSet s(Kind::Product);
    for (auto& f : factors) {
        if (f.kind_ == Kind::Product)
            s.factors_.insert(s.factors_.end(), f.factors_.begin(), f.factors_.end());
        else
            s.factors_.push_back(std::move(f));
    }
    return s;
}

inline OpenSet OpenSet::unite(const OpenSet& o) const {
    if (kind_ == Kind::Empty) return o;
    if (o.kind_ == Kind::Empty) return *this;
    if (kind_ != o.kind_) throw std::invalid_argument("open set: union of sets over different spaces");
    switch (kind_) {
    case Kind::RealBoxes: {
        if (dim() != o.dim()) throw std::invalid_argument("open set: union of boxes of different dimension");
        std::vector<Box> all = boxes_;
        all.insert(all.end(), o.boxes_.begin(), o.boxes_.end());
        return boxes(std::move(all));
    }
    case Kind::NatSet: {
        std::set<std::uint64_t> r;
        if (!cofinite_ && !o.cofinite_) {
            r = nats_;
            r.insert(o.nats_.begin(), o.nats_.end());
            return nats(std::move(r));
        }
        if (cofinite_ && o.cofinite_) {
            std::set_intersection(nats_.begin(), nats_.end(), o.nats_.begin(), o.nats_.end(), std::inserter(r, r.end()));
            return nats_except(std::move(r));
        }
        const OpenSet& co = cofinite_ ? *this : o;
        const OpenSet& fin = cofinite_ ? o : *this;
        std::set_difference(co.nats_.begin(), co.nats_.end(), fin.nats_.begin(), fin.nats_.end(), std::inserter(r, r.end()));
        return nats_except(std::move(r));
    }
    case Kind::BoolSet: return bools(bool_false_ || o.bool_false_, bool_true_ || o.bool_true_);
    default: throw std::invalid_argument("open set: union of product sets is not supported");
    }
}

inline std::string OpenSet::to_string() const {
    auto bound = [](const std::optional<Rational>& b, bool upper) {
        if (!b) return std::string(upper ? "inf" : "-inf");
        return b->to_string();
    };
    auto nat_list = [](const std::set<std::uint64_t>& s) {
        std::string r = "{";
        bool first = true;
        for (auto v : s) {
            if (!first) r += ",";
            r += std::to_string(v);
            first = false;
        }
        return r + "}";
    };
    switch (kind_) {
    case Kind::Empty: return "{}";
    case Kind::RealBoxes: {
        std::string r;
        for (std::size_t i = 0; i < boxes_.size(); ++i) {
            if (i > 0) r += "U";
            for (std::size_t j = 0; j < boxes_[i].dim(); ++j) {
                if (j > 0) r += "x";
                r += "(" + bound(boxes_[i].lo[j], false) + "," + bound(boxes_[i].hi[j], true) + ")";
            }
        }
        return r;
    }
    case Kind::NatSet: return (cofinite_ ? "~" : "") + nat_list(nats_);
    case Kind::BoolSet: {
        std::vector<std::string> m;
        if (bool_false_) m.emplace_back("false");
        if (bool_true_) m.emplace_back("true");
        std::string r = "{";
        for (std::size_t i = 0; i < m.size(); ++i) r += (i ? "," : "") + m[i];
        return r + "}";
    }
    case Kind::Product: {
        std::string r;
        for (std::size_t i = 0; i < factors_.size(); ++i) r += (i ? "x" : "") + factors_[i].to_string();
        return r;
    }
    }
    return "";
}

namespace detail {

class OpenSetParser {
public:
    explicit OpenSetParser(std::string_view s) : s_(s) {}

    OpenSet parse() {
        OpenSet r = parse_union();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw std::invalid_argument("open set '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + why);
    }
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    bool eat(std::string_view tok) {
        skip_ws();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    OpenSet parse_union() {
        OpenSet r = parse_product();
        while (eat("∪") || eat("U") || eat("|")) r = r.unite(parse_product());
        return r;
    }

    OpenSet parse_product() {
        std::vector<OpenSet> fs{parse_atom()};
        while (eat("×") || eat("x") || eat("*")) fs.push_back(parse_atom());
        return OpenSet::product(std::move(fs));
    }

    OpenSet parse_atom() {
        if (eat("∅")) return OpenSet::empty();
        if (eat("~")) {
            if (!eat("{")) fail("expected '{' after '~'");
            auto [nats, bools] = parse_members();
            if (bools) fail("complement of a boolean set");
            return OpenSet::nats_except(std::move(nats));
        }
        if (eat("{")) {
            auto [nats, bools] = parse_members();
            if (bools) return OpenSet::bools(bools->first, bools->second);
            if (nats.empty()) return OpenSet::empty();
            return OpenSet::nats(std::move(nats));
        }
        if (eat("(")) {
            auto lo = parse_bound();
            if (!eat(",")) fail("expected ','");
            auto hi = parse_bound();
            if (!eat(")")) fail("expected ')'");
            if (lo && hi && !(*lo < *hi)) fail("interval with lo >= hi");
            return OpenSet::interval(lo, hi);
        }
        fail("expected '(', '{', '~' or '∅'");
    }

    // Returns naturals, or (has_false, has_true) for a boolean set.
    std::pair<std::set<std::uint64_t>, std::optional<std::pair<bool, bool>>> parse_members() {
        std::set<std::uint64_t> nats;
        std::optional<std::pair<bool, bool>> bools;
        if (eat("}")) return {nats, bools};
        do {
            skip_ws();
            if (eat("true") || eat("false")) {
                bool t = s_.substr(pos_ - 4, 4) == "true";
                if (!nats.empty()) fail("mixed naturals and booleans");
                if (!bools) bools.emplace(false, false);
                (t ? bools->second : bools->first) = true;
                continue;
            }
            std::size_t start = pos_;
            while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
            if (start == pos_) fail("expected a natural number");
            if (bools) fail("mixed naturals and booleans");
            nats.insert(std::stoull(std::string(s_.substr(start, pos_ - start))));
        } while (eat(","));
        if (!eat("}")) fail("expected '}'");
        return {nats, bools};
    }

    std::optional<Rational> parse_bound() {
        skip_ws();
        if (eat("-inf") || eat("-∞")) return std::nullopt;
        if (eat("inf") || eat("∞") || eat("+inf")) return std::nullopt;
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::string_view("0123456789+-./").find(s_[pos_]) != std::string_view::npos) ++pos_;
        if (start == pos_) fail("expected a rational bound");
        try {
            return Rational::parse(s_.substr(start, pos_ - start));
        } catch (const std::invalid_argument&) {
            pos_ = start;
            fail("malformed rational bound");
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline OpenSet OpenSet::parse(std::string_view text) { return detail::OpenSetParser(text).parse(); }

} // namespace cdist

#endif

#ifndef CDIST_TAPE_HPP
#define CDIST_TAPE_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "cdist/error.hpp"
#include "cdist/rational.hpp"

namespace cdist {

// Source indices touched by reads, in increasing order.
class ReadLog {
public:
    void record(const Integer& i) {
        std::lock_guard lock(mutex_);
        reads_.insert(i);
    }
    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return reads_.size();
    }
    bool contains(const Integer& i) const {
        std::lock_guard lock(mutex_);
        return reads_.count(i) != 0;
    }
    std::vector<Integer> indices() const {
        std::lock_guard lock(mutex_);
        return {reads_.begin(), reads_.end()};
    }

private:
    struct Less {
        bool operator()(const Integer& a, const Integer& b) const { return cmp(a, b) < 0; }
    };
    mutable std::mutex mutex_;
    std::set<Integer, Less> reads_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class TapeSource {
public:
    virtual ~TapeSource() = default;
    virtual bool bit(const Integer& i) const = 0;
    // Number of readable bits, or nullopt for an infinite source.
    virtual std::optional<std::size_t> length() const { return std::nullopt; }
    // Number of reads past the end of a finite source.
    virtual std::uint64_t overruns() const { return 0; }
};

class FunctionSource final : public TapeSource {
public:
    explicit FunctionSource(std::function<bool(std::uint64_t)> f) : f_(std::move(f)) {}
    bool bit(const Integer& i) const override {
        if (!i.fits_ulong_p()) throw OutOfBits("index " + i.get_str() + " beyond a 64-bit function tape");
        std::uint64_t k = i.get_ui();
        std::lock_guard lock(mutex_);
        auto it = memo_.find(k);
        if (it != memo_.end()) return it->second;
        bool b = f_(k);
        memo_.emplace(k, b);
        return b;
    }

private:
    std::function<bool(std::uint64_t)> f_;
    mutable std::mutex mutex_;
    mutable std::map<std::uint64_t, bool> memo_;
};

// Every bit equal, at any index.
class ConstantSource final : public TapeSource {
public:
    explicit ConstantSource(bool b) : b_(b) {}
    bool bit(const Integer&) const override { return b_; }

private:
    bool b_;
};

// Bit i is a pure function of (seed, i): counter-based, so any index is
// addressable without generating its predecessors.
class SeedSource final : public TapeSource {
public:
    explicit SeedSource(std::uint64_t seed) : seed_(seed) {}
    bool bit(const Integer& i) const override {
        std::uint64_t h = splitmix64(seed_);
        Integer block = i >> 6;
        std::size_t limbs = mpz_size(block.get_mpz_t());
        if (limbs == 0) h = splitmix64(h);
        for (std::size_t l = 0; l < limbs; ++l)
            h = splitmix64(h ^ static_cast<std::uint64_t>(mpz_getlimbn(block.get_mpz_t(), l)));
        unsigned within = static_cast<unsigned>(mpz_fdiv_ui(i.get_mpz_t(), 64));
        return ((h >> within) & 1U) != 0;
    }

private:
    std::uint64_t seed_;
};

class PrefixSource final : public TapeSource {
public:
    explicit PrefixSource(std::vector<bool> bits) : bits_(std::move(bits)) {}
    bool bit(const Integer& i) const override {
        if (!i.fits_ulong_p() || i.get_ui() >= bits_.size()) {
            overruns_.fetch_add(1, std::memory_order_relaxed);
            throw OutOfBits("index " + i.get_str() + " of a " + std::to_string(bits_.size()) + "-bit prefix");
        }
        return bits_[i.get_ui()];
    }
    std::optional<std::size_t> length() const override { return bits_.size(); }
    std::uint64_t overruns() const override { return overruns_.load(std::memory_order_relaxed); }

private:
    std::vector<bool> bits_;
    mutable std::atomic<std::uint64_t> overruns_{0};
};

} // namespace detail

// An infinite (or finite-prefix) stream of bits, viewed through an index
// map i -> i*2^shift + offset. even() and odd() refine the map, so both
// halves of a split read disjoint source indices. Copies and splits share
// the source and every attached read log.
class BitTape {
public:
    static BitTape from_function(std::function<bool(std::uint64_t)> f) {
        return BitTape(std::make_shared<detail::FunctionSource>(std::move(f)));
    }
    static BitTape from_seed(std::uint64_t seed) { return BitTape(std::make_shared<detail::SeedSource>(seed)); }
    static BitTape from_prefix(std::vector<bool> bits) {
        return BitTape(std::make_shared<detail::PrefixSource>(std::move(bits)));
    }
    // Fixture literal such as "0110".
    static BitTape from_string(std::string_view bits) {
        std::vector<bool> v;
        v.reserve(bits.size());
        for (char c : bits) {
            if (c != '0' && c != '1') throw std::invalid_argument("tape literal must be a 0/1 string");
            v.push_back(c == '1');
        }
        return from_prefix(std::move(v));
    }
    // The first k bits of `index`, most significant first.
    static BitTape from_prefix_index(std::uint64_t index, unsigned k) {
        std::vector<bool> v(k);
        for (unsigned j = 0; j < k; ++j) v[j] = ((index >> (k - 1 - j)) & 1U) != 0;
        return from_prefix(std::move(v));
    }
    static BitTape constant(bool b) { return BitTape(std::make_shared<detail::ConstantSource>(b)); }

    bool read(std::uint64_t i) const {
        Integer src = source_index(i);
        bool b = src_->bit(src);
        for (const auto& log : logs_) log->record(src);
        return b;
    }

    Integer source_index(std::uint64_t i) const {
        Integer r(static_cast<unsigned long>(i));
        if (shift_ > 0) r <<= shift_;
        return r + offset_;
    }

    BitTape even() const {
        BitTape t = *this;
        t.shift_ = shift_ + 1;
        return t;
    }
    BitTape odd() const {
        BitTape t = *this;
        t.shift_ = shift_ + 1;
        t.offset_ = offset_ + (Integer(1) << shift_);
        return t;
    }
    std::pair<BitTape, BitTape> split() const { return {even(), odd()}; }

    // A copy that additionally records its reads into a fresh log.
    std::pair<BitTape, std::shared_ptr<ReadLog>> tracked() const {
        BitTape t = *this;
        auto log = std::make_shared<ReadLog>();
        t.logs_.push_back(log);
        return {t, log};
    }

    // Log shared by every tape derived from the same root.
    const ReadLog& reads() const { return *logs_.front(); }
    std::size_t bits_read() const { return logs_.front()->size(); }
    std::optional<std::size_t> prefix_length() const { return src_->length(); }
    std::uint64_t overruns() const { return src_->overruns(); }

private:
    explicit BitTape(std::shared_ptr<const detail::TapeSource> src)
        : src_(std::move(src)), logs_{std::make_shared<ReadLog>()} {}

    std::shared_ptr<const detail::TapeSource> src_;
    unsigned shift_ = 0;
    Integer offset_ = 0;
    std::vector<std::shared_ptr<ReadLog>> logs_;
};

} // namespace cdist

#endif

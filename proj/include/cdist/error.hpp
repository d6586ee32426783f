#ifndef CDIST_ERROR_HPP
#define CDIST_ERROR_HPP

#include <atomic>
#include <stdexcept>
#include <string>

namespace cdist {

// Root of every error the engine raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Why a computation was cut off. Fuel exhaustion and genuine bottoms are
// both divergence; the tag only helps diagnostics.
enum class DivergeReason { Fuel, Comparison, BotSampler, Bottom, Cycle };

inline const char* to_string(DivergeReason r) {
    switch (r) {
    case DivergeReason::Fuel: return "fuel";
    case DivergeReason::Comparison: return "comparison";
    case DivergeReason::BotSampler: return "botSamp";
    case DivergeReason::Bottom: return "bottom";
    case DivergeReason::Cycle: return "cycle";
    }
    return "unknown";
}

class Diverged : public Error {
public:
    explicit Diverged(DivergeReason reason, const std::string& what = "")
        : Error(std::string("diverged (") + to_string(reason) + ")" + (what.empty() ? "" : ": " + what)),
          reason_(reason) {}
    DivergeReason reason() const noexcept { return reason_; }

private:
    DivergeReason reason_;
};

// A finite-prefix tape was asked for a bit past its end.
class OutOfBits : public Error {
public:
    explicit OutOfBits(const std::string& what) : Error("out of bits: " + what) {}
};

class FastCauchyViolation : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class MassError : public Error {
public:
    using Error::Error;
};

class DenominatorIndistinguishableFromZero : public Error {
public:
    DenominatorIndistinguishableFromZero()
        : Error("DenominatorIndistinguishableFromZero: normalizing integral cannot be separated from 0") {}
};

// Process-wide fuel default (recursion depth and comparison refinements).
inline std::atomic<unsigned>& default_fuel_slot() {
    static std::atomic<unsigned> fuel{64};
    return fuel;
}

inline unsigned default_fuel() { return default_fuel_slot().load(std::memory_order_relaxed); }

inline void set_default_fuel(unsigned fuel) { default_fuel_slot().store(fuel, std::memory_order_relaxed); }

} // namespace cdist

#endif

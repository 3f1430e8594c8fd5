#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace valdist {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define VALDIST_DEFINE_ERROR(Name)                                    \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

// Parsing / structural
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error("SyntaxError", what + " (byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

VALDIST_DEFINE_ERROR(UnknownIdentifier);
VALDIST_DEFINE_ERROR(UnboundParameter);
VALDIST_DEFINE_ERROR(IndexOutOfRange);
VALDIST_DEFINE_ERROR(DegenerateScale);

// Jet evaluation
VALDIST_DEFINE_ERROR(EssentialSingularity);
VALDIST_DEFINE_ERROR(ZeroDivisor);
VALDIST_DEFINE_ERROR(Overflow);

// Sphere / regions
VALDIST_DEFINE_ERROR(OutsideUnitDisk);

// Monomials
VALDIST_DEFINE_ERROR(UndefinedOrder);

// Root location
VALDIST_DEFINE_ERROR(OnContourSingularity);
VALDIST_DEFINE_ERROR(NonConvergent);
VALDIST_DEFINE_ERROR(BudgetExceeded);

// Nevanlinna
VALDIST_DEFINE_ERROR(OnCircleSingularity);
VALDIST_DEFINE_ERROR(InsufficientGrowth);
VALDIST_DEFINE_ERROR(DegreeTooSmall);

// Audits
VALDIST_DEFINE_ERROR(DistinctnessViolation);
VALDIST_DEFINE_ERROR(ZeroTarget);
VALDIST_DEFINE_ERROR(FlatFamily);

// Generic precondition failures (caller contract broken)
VALDIST_DEFINE_ERROR(PreconditionError);

// Configuration / batch driver
VALDIST_DEFINE_ERROR(ConfigError);

#undef VALDIST_DEFINE_ERROR

} // namespace valdist

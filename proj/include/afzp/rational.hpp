#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace afzp {

/// Exact rational number in lowest terms with positive denominator.
///
/// Values that fit in 64-bit numerator/denominator stay on a fast path;
/// any overflow promotes transparently to a GMP rational. The two storage
/// modes are an implementation detail: equality, hashing and printing only
/// ever see the mathematical value.
class Rational {
public:
    Rational() noexcept = default;
    Rational(std::int64_t n) noexcept : num_(n) {}  // NOLINT(implicit)
    Rational(std::int64_t n, std::int64_t d);
    explicit Rational(const mpq_class& q);

    /// Parses "a" or "a/b" (optionally signed). Throws Error(ParseError).
    static Rational parse(std::string_view text);

    bool is_zero() const noexcept { return !big_ && num_ == 0; }
    bool is_one() const noexcept { return !big_ && num_ == 1 && den_ == 1; }
    bool is_integer() const;
    int sign() const;

    /// Numerator/denominator as int64 when representable.
    std::optional<std::int64_t> to_int64() const;
    mpq_class to_mpq() const;
    double to_double() const;
    std::string to_string() const;

    Rational operator-() const;
    Rational inverse() const;

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& b) { return *this = *this + b; }
    Rational& operator-=(const Rational& b) { return *this = *this - b; }
    Rational& operator*=(const Rational& b) { return *this = *this * b; }

    friend bool operator==(const Rational& a, const Rational& b);
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

    /// Exact square root when the value is the square of a rational.
    std::optional<Rational> sqrt_exact() const;

private:
    static Rational from_mpq(mpq_class q);
    void normalize_small();

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
    std::shared_ptr<const mpq_class> big_;  // set only when the value does not fit
};

}  // namespace afzp

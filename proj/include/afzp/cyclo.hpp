#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "afzp/rational.hpp"

namespace afzp {

/// The cyclotomic field Q(zeta_N) used as the scalar domain for one run,
/// together with the prime p of the acting group Z/p.
///
/// Contexts are interned: `FieldContext::get(p, N)` always returns the same
/// object for the same pair, so contexts compare by address and live for the
/// whole program. Supported orders are N in {p, p^2, 4p^2}.
class FieldContext {
public:
    static const FieldContext& get(int p, int order);
    /// N = 4p^2: holds p-th and p^2-th roots of unity and sqrt(p).
    static const FieldContext& default_for(int p) { return get(p, 4 * p * p); }
    static bool is_prime(int n);
    static bool supported_order(int p, int order);

    int p() const noexcept { return p_; }
    int order() const noexcept { return order_; }
    int degree() const noexcept { return degree_; }

    /// Coefficients of Phi_N, lowest degree first (monic, integer).
    const std::vector<std::int64_t>& cyclotomic() const noexcept { return phi_; }

    /// x^k mod Phi_N as sparse (index, coefficient) pairs, for 0 <= k < table size.
    const std::vector<std::pair<int, std::int64_t>>& power(int k) const { return powers_[k]; }
    int power_table_size() const noexcept { return static_cast<int>(powers_.size()); }

    FieldContext(const FieldContext&) = delete;
    FieldContext& operator=(const FieldContext&) = delete;

private:
    FieldContext(int p, int order);

    int p_;
    int order_;
    int degree_;
    std::vector<std::int64_t> phi_;
    std::vector<std::vector<std::pair<int, std::int64_t>>> powers_;
};

/// Decimal embedding of a field element under zeta_N -> exp(2 pi i / N).
struct ComplexApprox {
    double re = 0.0;
    double im = 0.0;
    std::string to_string(int digits) const;
};

/// Element of Q(zeta_N) in the power basis modulo Phi_N.
///
/// Immutable value type. The zero element stores no coefficients; every
/// other element stores exactly `degree()` rationals, so equality is a
/// coefficient-wise comparison of the unique reduced form.
class Scalar {
public:
    explicit Scalar(const FieldContext& ctx) noexcept : ctx_(&ctx) {}
    Scalar(const FieldContext& ctx, const Rational& r);
    /// From a full coefficient vector (length d); reduces nothing, validates length.
    Scalar(const FieldContext& ctx, std::vector<Rational> coeffs);

    static Scalar zero(const FieldContext& ctx) { return Scalar(ctx); }
    static Scalar one(const FieldContext& ctx) { return Scalar(ctx, Rational(1)); }
    /// zeta_N^k, k taken modulo N.
    static Scalar root(const FieldContext& ctx, long k);
    /// zeta_p^k for the context's p.
    static Scalar p_root(const FieldContext& ctx, long k);

    const FieldContext& context() const noexcept { return *ctx_; }
    bool is_zero() const noexcept { return c_.empty(); }
    bool is_one() const;
    bool is_rational() const;
    /// The constant coefficient (exact value when is_rational()).
    Rational rational_part() const;
    /// Full coefficient vector of length d (zeros included).
    std::vector<Rational> coeffs() const;
    const std::vector<Rational>& raw() const noexcept { return c_; }

    Scalar operator-() const;
    Scalar inv() const;
    Scalar conj() const;
    Scalar pow(long e) const;
    /// Image under Q(zeta_N) -> Q(zeta_M), N | M.
    Scalar embed(const FieldContext& target) const;

    /// Least m dividing N with a^m = 1, or nullopt when a is not an N-th root of unity.
    std::optional<int> root_order() const;
    /// k in [0, N) with a = zeta_N^k, or nullopt.
    std::optional<int> root_exponent() const;
    /// Exponent k in [0, p) with a = zeta_p^k, or nullopt.
    std::optional<int> p_root_exponent() const;

    ComplexApprox approx() const;
    std::string to_string() const;

    friend Scalar operator+(const Scalar& a, const Scalar& b);
    friend Scalar operator-(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Rational& r);
    friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inv(); }
    Scalar& operator+=(const Scalar& b);
    Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
    Scalar& operator*=(const Scalar& b) { return *this = *this * b; }

    friend bool operator==(const Scalar& a, const Scalar& b);

private:
    bool is_root_power(int k) const;  // equals zeta_N^k, 0 <= k < N
    void trim();  // collapses an all-zero vector to the zero representation
    void check_same(const Scalar& b) const;

    const FieldContext* ctx_;
    std::vector<Rational> c_;
};

// Free-function spellings of the field operations.
inline Scalar make_root(const FieldContext& ctx, long k) { return Scalar::root(ctx, k); }
inline Scalar add(const Scalar& a, const Scalar& b) { return a + b; }
inline Scalar mul(const Scalar& a, const Scalar& b) { return a * b; }
inline Scalar neg(const Scalar& a) { return -a; }
inline Scalar inv(const Scalar& a) { return a.inv(); }
inline Scalar conj(const Scalar& a) { return a.conj(); }
inline std::optional<int> root_order(const Scalar& a) { return a.root_order(); }
inline ComplexApprox approx(const Scalar& a) { return a.approx(); }

/// A p-th root of a root of unity lambda inside the same field, choosing
/// zeta_N^s with the least s >= 0. nullopt when none exists in Q(zeta_N).
std::optional<Scalar> root_of_unity_root(const Scalar& lambda, int p);

/// Square root of a positive rational inside Q(zeta_N), if one exists.
std::optional<Scalar> sqrt_in_field(const FieldContext& ctx, const Rational& r);

/// Some c with c * conj(c) = r for a positive rational r, if one is found.
/// Weaker than a square root: 2 = |1+i|^2 works in fields without sqrt 2.
std::optional<Scalar> norm_root(const FieldContext& ctx, const Rational& r);

/// An element c with c * conj(c) = 1/p; normalizes the p-point Fourier matrix.
/// Uses a quadratic Gauss sum for odd p and 1/(1+i) for p = 2.
std::optional<Scalar> fourier_normalizer(const FieldContext& ctx);

}  // namespace afzp

#include "afzp/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>

#include "afzp/error.hpp"

namespace afzp {

namespace {

using i128 = __int128;

constexpr std::int64_t kMin = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();

bool fits(i128 v) { return v > static_cast<i128>(kMin) && v <= static_cast<i128>(kMax); }

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b);
}

mpz_class to_mpz(i128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
    mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
}

// Builds a rational from 128-bit numerator/denominator (den > 0).
Rational make128(i128 n, i128 d);

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
    if (d == 0) throw Error(ErrorCode::DivisionByZero, "rational with zero denominator");
    if (n == kMin || d == kMin) {
        *this = from_mpq(mpq_class(mpz_class(static_cast<long>(n)), mpz_class(static_cast<long>(d))));
        return;
    }
    normalize_small();
}

Rational::Rational(const mpq_class& q) { *this = from_mpq(q); }

void Rational::normalize_small() {
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    if (den_ != 1) {
        auto g = gcd64(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }
    if (num_ == 0) den_ = 1;
}

Rational Rational::from_mpq(mpq_class q) {
    q.canonicalize();
    Rational r;
    if (q.get_num().fits_slong_p() && q.get_den().fits_slong_p() && q.get_num() != kMin) {
        r.num_ = q.get_num().get_si();
        r.den_ = q.get_den().get_si();
        return r;
    }
    r.big_ = std::make_shared<const mpq_class>(std::move(q));
    return r;
}

namespace {

Rational make128(i128 n, i128 d) {
    if (d < 0) {
        n = -n;
        d = -d;
    }
    if (fits(n) && fits(d)) return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
    mpq_class q(to_mpz(n), to_mpz(d));
    return Rational(q);
}

}  // namespace

Rational Rational::parse(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    auto valid_int = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view ns = text.substr(0, slash);
    std::string_view ds = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!valid_int(ns) || !valid_int(ds) || ds[0] == '-' || ds[0] == '+')
        throw Error(ErrorCode::ParseError, "malformed rational '" + std::string(text) + "'");
    if (ns[0] == '+') ns.remove_prefix(1);
    mpz_class n{std::string(ns)}, d{std::string(ds)};
    if (d == 0) throw Error(ErrorCode::DivisionByZero, "rational with zero denominator");
    return from_mpq(mpq_class(n, d));
}

bool Rational::is_integer() const { return big_ ? big_->get_den() == 1 : den_ == 1; }

int Rational::sign() const {
    if (big_) return sgn(*big_);
    return (num_ > 0) - (num_ < 0);
}

std::optional<std::int64_t> Rational::to_int64() const {
    if (big_ || den_ != 1) return std::nullopt;
    return num_;
}

mpq_class Rational::to_mpq() const {
    if (big_) return *big_;
    return mpq_class(mpz_class(static_cast<long>(num_)), mpz_class(static_cast<long>(den_)));
}

double Rational::to_double() const {
    if (big_) return big_->get_d();
    return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Rational::to_string() const {
    if (big_) {
        std::string s = big_->get_num().get_str();
        if (big_->get_den() != 1) s += "/" + big_->get_den().get_str();
        return s;
    }
    std::string s = std::to_string(num_);
    if (den_ != 1) s += "/" + std::to_string(den_);
    return s;
}

Rational Rational::operator-() const {
    if (big_) return from_mpq(-*big_);
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

Rational Rational::inverse() const {
    if (is_zero()) throw Error(ErrorCode::DivisionByZero, "inverse of zero");
    if (big_) return from_mpq(1 / *big_);
    Rational r;
    r.num_ = den_;
    r.den_ = num_;
    if (r.den_ < 0) {
        r.num_ = -r.num_;
        r.den_ = -r.den_;
    }
    return r;
}

Rational operator+(const Rational& a, const Rational& b) {
    if (a.big_ || b.big_) return Rational::from_mpq(a.to_mpq() + b.to_mpq());
    if (a.num_ == 0) return b;
    if (b.num_ == 0) return a;
    if (a.den_ == 1 && b.den_ == 1) {
        std::int64_t s;
        if (!__builtin_add_overflow(a.num_, b.num_, &s) && s != kMin) return Rational(s);
        return make128(static_cast<i128>(a.num_) + b.num_, 1);
    }
    i128 n = static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_;
    i128 d = static_cast<i128>(a.den_) * b.den_;
    if (a.den_ == b.den_) {
        n = static_cast<i128>(a.num_) + b.num_;
        d = a.den_;
    }
    if (n == 0) return Rational();
    // reduce in 128 bits before narrowing
    i128 x = n < 0 ? -n : n, y = d;
    while (y != 0) {
        i128 t = x % y;
        x = y;
        y = t;
    }
    return make128(n / x, d / x);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    if (a.big_ || b.big_) return Rational::from_mpq(a.to_mpq() * b.to_mpq());
    if (a.num_ == 0 || b.num_ == 0) return Rational();
    if (a.den_ == 1 && b.den_ == 1) {
        std::int64_t s;
        if (!__builtin_mul_overflow(a.num_, b.num_, &s) && s != kMin) return Rational(s);
        return make128(static_cast<i128>(a.num_) * b.num_, 1);
    }
    // cross-cancel keeps intermediates small
    std::int64_t g1 = gcd64(a.num_, b.den_);
    std::int64_t g2 = gcd64(b.num_, a.den_);
    i128 n = static_cast<i128>(a.num_ / g1) * (b.num_ / g2);
    i128 d = static_cast<i128>(a.den_ / g2) * (b.den_ / g1);
    return make128(n, d);
}

Rational operator/(const Rational& a, const Rational& b) { return a * b.inverse(); }

bool operator==(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) return a.num_ == b.num_ && a.den_ == b.den_;
    if (a.big_ && b.big_) return *a.big_ == *b.big_;
    return false;  // canonical storage: a value that fits is never big
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (!a.big_ && !b.big_) {
        i128 l = static_cast<i128>(a.num_) * b.den_;
        i128 r = static_cast<i128>(b.num_) * a.den_;
        return l <=> r;
    }
    int c = cmp(a.to_mpq(), b.to_mpq());
    return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

std::optional<Rational> Rational::sqrt_exact() const {
    if (sign() < 0) return std::nullopt;
    mpq_class q = to_mpq();
    mpz_class n = q.get_num(), d = q.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return std::nullopt;
    mpz_class sn, sd;
    mpz_sqrt(sn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(sd.get_mpz_t(), d.get_mpz_t());
    return from_mpq(mpq_class(sn, sd));
}

}  // namespace afzp

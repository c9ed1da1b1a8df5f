#include "afzp/cyclo.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "afzp/error.hpp"

namespace afzp {

namespace {

using IntPoly = std::vector<std::int64_t>;  // lowest degree first

IntPoly poly_mul(const IntPoly& a, const IntPoly& b) {
    IntPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// Exact division by a monic polynomial.
IntPoly poly_div_exact(IntPoly num, const IntPoly& den) {
    std::size_t dn = den.size() - 1;
    IntPoly q(num.size() - dn, 0);
    for (std::size_t k = num.size(); k-- > dn;) {
        std::int64_t c = num[k];
        q[k - dn] = c;
        for (std::size_t i = 0; i <= dn; ++i) num[k - dn + i] -= c * den[i];
    }
    return q;
}

IntPoly cyclotomic_poly(int n) {
    IntPoly num(static_cast<std::size_t>(n) + 1, 0);
    num[0] = -1;
    num[n] = 1;
    IntPoly den{1};
    for (int d = 1; d < n; ++d)
        if (n % d == 0) den = poly_mul(den, cyclotomic_poly(d));
    return poly_div_exact(num, den);
}

std::vector<Rational>& scratch(std::size_t n) {
    thread_local std::vector<Rational> buf;
    buf.assign(n, Rational());
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// FieldContext

bool FieldContext::is_prime(int n) {
    if (n < 2) return false;
    for (int q = 2; q * q <= n; ++q)
        if (n % q == 0) return false;
    return true;
}

bool FieldContext::supported_order(int p, int order) {
    return is_prime(p) && (order == p || order == p * p || order == 4 * p * p);
}

FieldContext::FieldContext(int p, int order) : p_(p), order_(order) {
    phi_ = cyclotomic_poly(order);
    degree_ = static_cast<int>(phi_.size()) - 1;
    int table = std::max(order_, 2 * degree_ - 1) + 1;
    powers_.resize(static_cast<std::size_t>(table));
    std::vector<std::int64_t> cur(static_cast<std::size_t>(degree_), 0);
    cur[0] = 1;
    for (int k = 0; k < table; ++k) {
        auto& row = powers_[static_cast<std::size_t>(k)];
        for (int i = 0; i < degree_; ++i)
            if (cur[static_cast<std::size_t>(i)] != 0) row.emplace_back(i, cur[static_cast<std::size_t>(i)]);
        // multiply by x and reduce with x^d = -sum phi_i x^i
        std::int64_t top = cur[static_cast<std::size_t>(degree_ - 1)];
        for (int i = degree_ - 1; i > 0; --i) cur[static_cast<std::size_t>(i)] = cur[static_cast<std::size_t>(i - 1)];
        cur[0] = 0;
        for (int i = 0; i < degree_; ++i) cur[static_cast<std::size_t>(i)] -= top * phi_[static_cast<std::size_t>(i)];
    }
}

const FieldContext& FieldContext::get(int p, int order) {
    if (!is_prime(p)) throw Error(ErrorCode::UnsupportedOrder, "group order " + std::to_string(p) + " is not prime");
    if (!supported_order(p, order))
        throw Error(ErrorCode::UnsupportedOrder, "field order " + std::to_string(order) + " not in {p, p^2, 4p^2} for p = " +
                                                     std::to_string(p));
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<FieldContext>> registry;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = registry[{p, order}];
    if (!slot) slot.reset(new FieldContext(p, order));
    return *slot;
}

// ---------------------------------------------------------------------------
// Scalar

Scalar::Scalar(const FieldContext& ctx, const Rational& r) : ctx_(&ctx) {
    if (!r.is_zero()) {
        c_.assign(static_cast<std::size_t>(ctx.degree()), Rational());
        c_[0] = r;
    }
}

Scalar::Scalar(const FieldContext& ctx, std::vector<Rational> coeffs) : ctx_(&ctx), c_(std::move(coeffs)) {
    if (static_cast<int>(c_.size()) != ctx.degree())
        throw Error(ErrorCode::ShapeMismatch, "scalar needs " + std::to_string(ctx.degree()) + " coefficients, got " +
                                                  std::to_string(c_.size()));
    trim();
}

Scalar Scalar::root(const FieldContext& ctx, long k) {
    long n = ctx.order();
    long e = ((k % n) + n) % n;
    Scalar s(ctx);
    s.c_.assign(static_cast<std::size_t>(ctx.degree()), Rational());
    for (auto [i, c] : ctx.power(static_cast<int>(e))) s.c_[static_cast<std::size_t>(i)] = Rational(c);
    return s;
}

Scalar Scalar::p_root(const FieldContext& ctx, long k) { return root(ctx, k * (ctx.order() / ctx.p())); }

void Scalar::trim() {
    for (const auto& r : c_)
        if (!r.is_zero()) return;
    c_.clear();
}

void Scalar::check_same(const Scalar& b) const {
    if (ctx_ != b.ctx_)
        throw Error(ErrorCode::ContextMismatch, "Q(zeta_" + std::to_string(ctx_->order()) + ") vs Q(zeta_" +
                                                    std::to_string(b.ctx_->order()) + ")");
}

bool Scalar::is_one() const {
    if (c_.empty() || !c_[0].is_one()) return false;
    for (std::size_t i = 1; i < c_.size(); ++i)
        if (!c_[i].is_zero()) return false;
    return true;
}

bool Scalar::is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
        if (!c_[i].is_zero()) return false;
    return true;
}

Rational Scalar::rational_part() const { return c_.empty() ? Rational() : c_[0]; }

std::vector<Rational> Scalar::coeffs() const {
    if (c_.empty()) return std::vector<Rational>(static_cast<std::size_t>(ctx_->degree()));
    return c_;
}

Scalar Scalar::operator-() const {
    Scalar r(*ctx_);
    r.c_.reserve(c_.size());
    for (const auto& x : c_) r.c_.push_back(-x);
    return r;
}

Scalar operator+(const Scalar& a, const Scalar& b) {
    a.check_same(b);
    if (a.c_.empty()) return b;
    if (b.c_.empty()) return a;
    Scalar r(*a.ctx_);
    r.c_.resize(a.c_.size());
    for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
    r.trim();
    return r;
}

Scalar& Scalar::operator+=(const Scalar& b) {
    check_same(b);
    if (b.c_.empty()) return *this;
    if (c_.empty()) return *this = b;
    for (std::size_t i = 0; i < c_.size(); ++i)
        if (!b.c_[i].is_zero()) c_[i] += b.c_[i];
    trim();
    return *this;
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Rational& r) {
    if (a.c_.empty() || r.is_zero()) return Scalar(*a.ctx_);
    Scalar out(*a.ctx_);
    out.c_.reserve(a.c_.size());
    for (const auto& x : a.c_) out.c_.push_back(x * r);
    return out;
}

Scalar operator*(const Scalar& a, const Scalar& b) {
    a.check_same(b);
    if (a.c_.empty() || b.c_.empty()) return Scalar(*a.ctx_);
    const FieldContext& ctx = *a.ctx_;
    const std::size_t d = static_cast<std::size_t>(ctx.degree());
    // rational-by-anything fast path
    if (a.is_rational()) return b * a.c_[0];
    if (b.is_rational()) return a * b.c_[0];
    auto& tmp = scratch(2 * d - 1);
    for (std::size_t i = 0; i < d; ++i) {
        if (a.c_[i].is_zero()) continue;
        for (std::size_t j = 0; j < d; ++j) {
            if (b.c_[j].is_zero()) continue;
            tmp[i + j] += a.c_[i] * b.c_[j];
        }
    }
    Scalar r(ctx);
    r.c_.assign(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(d));
    for (std::size_t k = d; k < 2 * d - 1; ++k) {
        if (tmp[k].is_zero()) continue;
        for (auto [i, c] : ctx.power(static_cast<int>(k))) r.c_[static_cast<std::size_t>(i)] += tmp[k] * Rational(c);
    }
    r.trim();
    return r;
}

bool operator==(const Scalar& a, const Scalar& b) { return a.ctx_ == b.ctx_ && a.c_ == b.c_; }

namespace {

using RatPoly = std::vector<Rational>;  // lowest degree first, no trailing zeros

void strip(RatPoly& p) {
    while (!p.empty() && p.back().is_zero()) p.pop_back();
}

// r = a - q*b, returns (q, r)
std::pair<RatPoly, RatPoly> poly_divmod(RatPoly a, const RatPoly& b) {
    strip(a);
    RatPoly q;
    if (a.size() < b.size()) return {q, a};
    q.assign(a.size() - b.size() + 1, Rational());
    Rational lead_inv = b.back().inverse();
    while (!a.empty() && a.size() >= b.size()) {
        std::size_t shift = a.size() - b.size();
        Rational c = a.back() * lead_inv;
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= c * b[i];
        a.pop_back();
        strip(a);
    }
    strip(q);
    return {q, a};
}

RatPoly poly_sub_mul(const RatPoly& a, const RatPoly& q, const RatPoly& b) {
    RatPoly r(std::max(a.size(), q.empty() || b.empty() ? 0 : q.size() + b.size() - 1), Rational());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i];
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] -= q[i] * b[j];
    strip(r);
    return r;
}

}  // namespace

Scalar Scalar::inv() const {
    if (c_.empty()) throw Error(ErrorCode::DivisionByZero, "inverse of zero in Q(zeta_" + std::to_string(ctx_->order()) + ")");
    if (is_rational()) return Scalar(*ctx_, c_[0].inverse());
    // extended Euclid: s*a + t*Phi = g, g a nonzero constant
    RatPoly phi;
    for (auto c : ctx_->cyclotomic()) phi.emplace_back(c);
    RatPoly r0 = phi, r1 = c_;
    strip(r1);
    RatPoly s0, s1{Rational(1)};
    while (r1.size() > 1) {
        auto [q, r] = poly_divmod(r0, r1);
        RatPoly s = poly_sub_mul(s0, q, s1);
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s);
    }
    // r1 is a nonzero constant since Phi is irreducible and a != 0
    Rational g_inv = r1[0].inverse();
    std::vector<Rational> out(static_cast<std::size_t>(ctx_->degree()), Rational());
    for (std::size_t i = 0; i < s1.size(); ++i) out[i] = s1[i] * g_inv;
    return Scalar(*ctx_, std::move(out));
}

Scalar Scalar::conj() const {
    if (c_.empty()) return *this;
    const int n = ctx_->order();
    Scalar r(*ctx_);
    r.c_.assign(c_.size(), Rational());
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (c_[j].is_zero()) continue;
        int e = (n - static_cast<int>(j)) % n;
        for (auto [i, c] : ctx_->power(e)) r.c_[static_cast<std::size_t>(i)] += c_[j] * Rational(c);
    }
    r.trim();
    return r;
}

Scalar Scalar::pow(long e) const {
    if (e < 0) return inv().pow(-e);
    Scalar result = one(*ctx_), base = *this;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

Scalar Scalar::embed(const FieldContext& target) const {
    if (&target == ctx_) return *this;
    if (target.order() % ctx_->order() != 0)
        throw Error(ErrorCode::ContextMismatch, "cannot embed Q(zeta_" + std::to_string(ctx_->order()) + ") into Q(zeta_" +
                                                    std::to_string(target.order()) + ")");
    const long step = target.order() / ctx_->order();
    Scalar r(target);
    for (std::size_t j = 0; j < c_.size(); ++j)
        if (!c_[j].is_zero()) r += root(target, static_cast<long>(j) * step) * c_[j];
    return r;
}

bool Scalar::is_root_power(int k) const {
    const auto& pw = ctx_->power(k);
    std::size_t nz = 0;
    for (const auto& x : c_)
        if (!x.is_zero()) ++nz;
    if (nz != pw.size()) return false;
    for (auto [i, c] : pw)
        if (c_[static_cast<std::size_t>(i)] != Rational(c)) return false;
    return true;
}

std::optional<int> Scalar::root_exponent() const {
    if (c_.empty()) return std::nullopt;
    for (const auto& x : c_)
        if (!x.is_integer()) return std::nullopt;
    for (int k = 0; k < ctx_->order(); ++k)
        if (is_root_power(k)) return k;
    return std::nullopt;
}

std::optional<int> Scalar::root_order() const {
    auto k = root_exponent();
    if (!k) return std::nullopt;
    const int n = ctx_->order();
    for (int m = 1; m <= n; ++m)
        if (n % m == 0 && (static_cast<long>(*k) * m) % n == 0) return m;
    return std::nullopt;
}

std::optional<int> Scalar::p_root_exponent() const {
    if (c_.empty()) return std::nullopt;
    const int step = ctx_->order() / ctx_->p();
    for (int j = 0; j < ctx_->p(); ++j)
        if (is_root_power(j * step)) return j;
    return std::nullopt;
}

ComplexApprox Scalar::approx() const {
    ComplexApprox z;
    const double n = ctx_->order();
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (c_[j].is_zero()) continue;
        double v = c_[j].to_double();
        double t = 2.0 * std::numbers::pi * static_cast<double>(j) / n;
        z.re += v * std::cos(t);
        z.im += v * std::sin(t);
    }
    return z;
}

std::string ComplexApprox::to_string(int digits) const {
    if (digits < 1) digits = 1;
    auto fmt = [digits](double v) {
        if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", digits, v);
        return std::string(buf);
    };
    return "(" + fmt(re) + ", " + fmt(im) + ")";
}

std::string Scalar::to_string() const {
    if (c_.empty()) return "0";
    std::string s;
    for (std::size_t j = 0; j < c_.size(); ++j) {
        if (c_[j].is_zero()) continue;
        std::string term = c_[j].to_string();
        if (j > 0) term = (term == "1" ? "" : term == "-1" ? "-" : term + "*") + "z^" + std::to_string(j);
        if (!s.empty() && term[0] != '-') s += "+";
        s += term;
    }
    return s;
}

// ---------------------------------------------------------------------------

std::optional<Scalar> root_of_unity_root(const Scalar& lambda, int p) {
    auto t = lambda.root_exponent();
    if (!t) return std::nullopt;
    const int n = lambda.context().order();
    for (int s = 0; s < n; ++s)
        if ((static_cast<long>(p) * s - *t) % n == 0) return Scalar::root(lambda.context(), s);
    return std::nullopt;
}

namespace {

// Quadratic Gauss sum over the p-th roots of unity (p odd): g^2 = (-1)^((p-1)/2) p.
Scalar gauss_sum(const FieldContext& ctx) {
    const long q = ctx.p();
    Scalar g(ctx);
    for (long j = 1; j < q; ++j) {
        long base = j, e = (q - 1) / 2, acc = 1;
        while (e) {
            if (e & 1) acc = acc * base % q;
            base = base * base % q;
            e >>= 1;
        }
        g += Scalar::p_root(ctx, j) * Rational(acc == 1 ? 1 : -1);
    }
    return g;
}

// Candidate square roots of small primes that may live in Q(zeta_N); verified by squaring.
std::optional<Scalar> sqrt_prime(const FieldContext& ctx, long q) {
    const int n = ctx.order();
    std::vector<Scalar> cands;
    if (q == 2 && n % 8 == 0) cands.push_back(Scalar::root(ctx, n / 8) + Scalar::root(ctx, -n / 8));
    if (q == ctx.p() && q != 2) {
        Scalar g = gauss_sum(ctx);
        cands.push_back(g);
        if (n % 4 == 0) cands.push_back(g * Scalar::root(ctx, -n / 4));
    }
    Scalar target(ctx, Rational(q));
    for (auto& c : cands)
        if (c * c == target) return c;
    return std::nullopt;
}

}  // namespace

std::optional<Scalar> sqrt_in_field(const FieldContext& ctx, const Rational& r) {
    if (r.sign() < 0) return std::nullopt;
    if (r.is_zero()) return Scalar(ctx);
    if (auto s = r.sqrt_exact()) return Scalar(ctx, *s);
    // sqrt(a/b) = sqrt(a*b)/b ; strip squares of small primes from a*b
    mpq_class q = r.to_mpq();
    mpz_class m = q.get_num() * q.get_den();
    Scalar acc = Scalar::one(ctx);
    for (long prime : {2L, static_cast<long>(ctx.p())}) {
        int e = 0;
        while (mpz_divisible_ui_p(m.get_mpz_t(), static_cast<unsigned long>(prime))) {
            m /= prime;
            ++e;
        }
        if (e % 2 == 1) {
            auto sp = sqrt_prime(ctx, prime);
            if (!sp) return std::nullopt;
            acc = acc * *sp;
        }
        if (e / 2 > 0) {
            mpz_class f;
            mpz_ui_pow_ui(f.get_mpz_t(), static_cast<unsigned long>(prime), static_cast<unsigned long>(e / 2));
            acc = acc * Rational(mpq_class(f));
        }
        if (prime == ctx.p()) break;
    }
    if (!mpz_perfect_square_p(m.get_mpz_t())) return std::nullopt;
    mpz_class sm;
    mpz_sqrt(sm.get_mpz_t(), m.get_mpz_t());
    Scalar result = acc * Rational(mpq_class(sm, q.get_den()));
    if (result * result != Scalar(ctx, r)) return std::nullopt;
    return result;
}

namespace {

// x with x * conj(x) = q for a prime q, searched among a + b zeta^k.
std::optional<Scalar> prime_norm_root(const FieldContext& ctx, long q) {
    static std::mutex mu;
    static std::map<std::pair<const FieldContext*, long>, std::optional<Scalar>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(&ctx, q);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    std::optional<Scalar> found;
    const Scalar target(ctx, Rational(q));
    auto try_with = [&](const Scalar& w) {
        for (int a = 1; a <= 3 && !found; ++a)
            for (int b = -3; b <= 3 && !found; ++b) {
                if (b == 0) continue;
                Scalar x = Scalar(ctx, Rational(a)) + w * Rational(b);
                if (x * x.conj() == target) found = x;
            }
    };
    for (int k = 1; k <= ctx.order() / 2 && !found; ++k) try_with(Scalar::root(ctx, k));
    // a + b (zeta^k +- zeta^l), e.g. 1 + sqrt(-2) for 3 in Q(zeta_16)
    for (int k = 1; k < ctx.order() && !found; ++k)
        for (int l = k + 1; l < ctx.order() && !found; ++l)
            for (int sg : {1, -1}) {
                if (found) break;
                try_with(Scalar::root(ctx, k) + Scalar::root(ctx, l) * Rational(sg));
            }
    cache[key] = found;
    return found;
}

}  // namespace

std::optional<Scalar> norm_root(const FieldContext& ctx, const Rational& r) {
    if (r.sign() < 0) return std::nullopt;
    if (r.is_zero()) return Scalar(ctx);
    if (auto s = sqrt_in_field(ctx, r)) return s;
    // c = x / den with |x|^2 = num * den
    mpq_class q = r.to_mpq();
    mpz_class m = q.get_num() * q.get_den();
    Scalar x = Scalar::one(ctx);
    for (long prime = 2; m > 1; ++prime) {
        if (prime > 100000) return std::nullopt;
        int e = 0;
        while (mpz_divisible_ui_p(m.get_mpz_t(), static_cast<unsigned long>(prime))) {
            m /= prime;
            ++e;
        }
        if (e == 0) continue;
        if (e % 2 == 1) {
            auto xp = prime_norm_root(ctx, prime);
            if (!xp) return std::nullopt;
            x = x * *xp;
        }
        for (int k = 0; k < e / 2; ++k) x = x * Rational(prime);
    }
    Scalar c = x * Rational(mpq_class(1, q.get_den()));
    if (c * c.conj() != Scalar(ctx, r)) return std::nullopt;
    return c;
}

std::optional<Scalar> fourier_normalizer(const FieldContext& ctx) {
    const int p = ctx.p();
    Scalar g(ctx);
    if (p == 2) {
        if (ctx.order() % 4 != 0) return std::nullopt;
        g = Scalar::one(ctx) + Scalar::root(ctx, ctx.order() / 4);
    } else {
        g = gauss_sum(ctx);
    }
    Scalar c = g.inv();
    if (c * c.conj() != Scalar(ctx, Rational(1, p))) return std::nullopt;
    return c;
}

}  // namespace afzp

#include <complex>
#include <random>

#include "afzp/cyclo.hpp"
#include "afzp/error.hpp"
#include "doctest.h"

using namespace afzp;

namespace {

// float oracle for approx(): evaluate the coefficient list directly
std::complex<double> eval(const Scalar& s) {
    std::complex<double> z = 0;
    auto c = s.coeffs();
    const double n = s.context().order();
    for (std::size_t j = 0; j < c.size(); ++j) z += c[j].to_double() * std::polar(1.0, 2 * M_PI * static_cast<double>(j) / n);
    return z;
}

Scalar random_scalar(const FieldContext& ctx, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(-4, 4), den(1, 3);
    std::vector<Rational> c;
    for (int j = 0; j < ctx.degree(); ++j) c.emplace_back(d(rng), den(rng));
    return Scalar(ctx, c);
}

}  // namespace

TEST_SUITE("cyclo") {
TEST_CASE("make_root examples") {
    const auto& f5 = FieldContext::get(5, 5);
    CHECK(make_root(f5, 5).is_one());
    const auto& f3 = FieldContext::get(3, 3);
    CHECK((make_root(f3, 1) * make_root(f3, 2)).is_one());
    const auto& f4 = FieldContext::get(2, 4);
    auto one = Scalar::one(f4), i = make_root(f4, 1);
    CHECK((one + i) * (one - i) == Scalar(f4, Rational(2)));
}

TEST_CASE("conj, cyclotomic relation, inverse of 2") {
    for (int p : {2, 3, 5}) {
        const auto& ctx = FieldContext::default_for(p);
        for (int k = 0; k < ctx.order(); k += 3) CHECK(conj(make_root(ctx, k)) == make_root(ctx, ctx.order() - k));
        const auto& fp = FieldContext::get(p, p);
        Scalar s(fp);
        for (int j = 0; j < p; ++j) s += make_root(fp, j);
        CHECK(s.is_zero());
        CHECK(inv(Scalar(ctx, Rational(2))) == Scalar(ctx, Rational(1, 2)));
    }
    const auto& ctx = FieldContext::default_for(3);
    CHECK_THROWS_AS(Scalar(ctx).inv(), Error);
    try {
        (void)Scalar(ctx).inv();
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DivisionByZero);
    }
}

TEST_CASE("context mismatch") {
    const auto& a = FieldContext::get(2, 4);
    const auto& b = FieldContext::get(2, 16);
    try {
        (void)(Scalar::one(a) + Scalar::one(b));
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ContextMismatch);
    }
}

TEST_CASE("root_order") {
    const auto& ctx = FieldContext::default_for(3);
    CHECK(root_order(Scalar::one(ctx)) == 1);
    CHECK(root_order(make_root(ctx, ctx.order() / 9 * 3)) == 3);  // zeta_{p^2}^p
    CHECK(root_order(make_root(ctx, ctx.order() / 9)) == 9);
    CHECK_FALSE(root_order(Scalar(ctx, Rational(1, 2))).has_value());
    CHECK(root_order(-Scalar::one(ctx)) == 2);
}

TEST_CASE("approx") {
    const auto& f4 = FieldContext::get(2, 4);
    auto z = approx(make_root(f4, 1));
    CHECK(z.re == doctest::Approx(0.0));
    CHECK(z.im == doctest::Approx(1.0));
    const auto& f3 = FieldContext::get(3, 3);
    auto w = approx(make_root(f3, 1));
    CHECK(w.re == doctest::Approx(std::cos(2 * M_PI / 3)));
    CHECK(w.im == doctest::Approx(std::sin(2 * M_PI / 3)));
    CHECK(approx(Scalar::one(f3)).to_string(1) == "(1.0, 0.0)");
}

TEST_CASE("field axioms on random triples, checked against a float oracle") {
    std::mt19937 rng(7);
    for (int p : {2, 3, 5}) {
        const auto& ctx = FieldContext::default_for(p);
        for (int t = 0; t < 30; ++t) {
            auto a = random_scalar(ctx, rng), b = random_scalar(ctx, rng), c = random_scalar(ctx, rng);
            CHECK((a * b) * c == a * (b * c));
            CHECK(a * (b + c) == a * b + a * c);
            CHECK(a * b == b * a);
            CHECK(std::abs(eval(a * b) - eval(a) * eval(b)) < 1e-6);
            CHECK(std::abs(eval(conj(a)) - std::conj(eval(a))) < 1e-9);
        }
    }
}

TEST_CASE("inv(a)*a = 1 for 100 random nonzero scalars") {
    std::mt19937 rng(11);
    int done = 0;
    while (done < 100) {
        const auto& ctx = FieldContext::default_for(done % 2 ? 3 : 2);
        auto a = random_scalar(ctx, rng);
        if (a.is_zero()) continue;
        CHECK((inv(a) * a).is_one());
        ++done;
    }
}

TEST_CASE("roots of unity are unimodular; reduce is idempotent") {
    for (int p : {2, 3, 5}) {
        const auto& ctx = FieldContext::default_for(p);
        for (int k = 0; k < ctx.order(); ++k) {
            auto z = make_root(ctx, k);
            CHECK((z * conj(z)).is_one());
            CHECK(Scalar(ctx, z.coeffs()) == z);
        }
    }
}

TEST_CASE("p-th roots of twists and Fourier normalizer") {
    for (int p : {2, 3, 5}) {
        const auto& ctx = FieldContext::default_for(p);
        // every 4p-th root of unity has a p-th root in Q(zeta_{4p^2})
        for (int k = 0; k < ctx.order(); k += ctx.order() / (4 * p)) {
            auto lam = make_root(ctx, k);
            auto mu = root_of_unity_root(lam, p);
            REQUIRE(mu.has_value());
            CHECK(mu->pow(p) == lam);
        }
        // for odd p a primitive p^2-th root would need zeta_{p^3}
        if (p > 2) CHECK_FALSE(root_of_unity_root(make_root(ctx, ctx.order() / (p * p)), p).has_value());
        auto c = fourier_normalizer(ctx);
        REQUIRE(c.has_value());
        CHECK(*c * conj(*c) == Scalar(ctx, Rational(1, p)));
        auto s = sqrt_in_field(ctx, Rational(p));
        REQUIRE(s.has_value());
        CHECK(*s * *s == Scalar(ctx, Rational(p)));
    }
    // zeta_4 has no square root in Q(zeta_4)
    const auto& f4 = FieldContext::get(2, 4);
    CHECK_FALSE(root_of_unity_root(make_root(f4, 1), 2).has_value());
}

TEST_CASE("norm_root where no square root exists") {
    const auto& f3 = FieldContext::default_for(3);
    // sqrt 2 is not in Q(zeta_36) but 2 = |1 + i|^2
    CHECK_FALSE(sqrt_in_field(f3, Rational(2)).has_value());
    for (auto r : {Rational(1, 2), Rational(2), Rational(3, 4), Rational(5), Rational(10, 3)}) {
        auto c = norm_root(f3, r);
        REQUIRE(c.has_value());
        CHECK(*c * conj(*c) == Scalar(f3, r));
    }
    const auto& f2 = FieldContext::default_for(2);
    for (auto r : {Rational(1, 2), Rational(3), Rational(6, 5)}) {
        auto c = norm_root(f2, r);
        REQUIRE(c.has_value());
        CHECK(*c * conj(*c) == Scalar(f2, r));
    }
    CHECK_FALSE(norm_root(f2, Rational(-1)).has_value());
}

TEST_CASE("rational overflow promotes to big values") {
    Rational big(std::int64_t{1} << 62);
    auto sq = big * big;
    CHECK(sq.to_string() == "21267647932558653966460912964485513216");
    CHECK(sq / big == big);
    CHECK(Rational::parse("-6/4") == Rational(-3, 2));
    CHECK(Rational::parse("12345678901234567890123/3").to_string() == "4115226300411522630041");
}
}

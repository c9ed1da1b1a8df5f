#include <random>

#include "afzp/error.hpp"
#include "afzp/matrix.hpp"
#include "doctest.h"

using namespace afzp;

namespace {

Mat random_p_diag(const FieldContext& ctx, int n, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(0, ctx.p() - 1);
    std::vector<int> e(static_cast<std::size_t>(n));
    for (auto& x : e) x = d(rng);
    return Mat::p_diag(ctx, e);
}

}  // namespace

TEST_SUITE("matrix") {
TEST_CASE("basic operations") {
    const auto& f = FieldContext::get(2, 16);
    auto i = Scalar::root(f, 4);
    CHECK(Mat::diag(f, {i}).dagger() == Mat::diag(f, {-i}));
    CHECK(kron(Mat::identity(f, 2), Mat::identity(f, 3)) == Mat::identity(f, 6));
    CHECK(Mat::identity(f, 5).trace() == Scalar(f, Rational(5)));
    CHECK_THROWS_AS(Mat::identity(f, 2) * Mat::identity(f, 3), Error);
}

TEST_CASE("is_unitary") {
    const auto& f = FieldContext::default_for(3);
    CHECK(is_unitary(Mat::p_diag(f, {0, 1})));
    Mat ones(f, 2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) ones.at(r, c) = Scalar::one(f);
    CHECK_FALSE(is_unitary(ones));
    CHECK(is_unitary(cyclic_shift(f, 3)));
}

TEST_CASE("spectral examples") {
    const auto& f2 = FieldContext::default_for(2);
    auto sd = spectral(Mat::p_diag(f2, {0, 1}), 2);
    CHECK(sd.multiplicities == std::vector<int>{1, 1});
    CHECK(sd.projections[0] == Mat::diag(f2, {Scalar::one(f2), Scalar(f2)}));
    const auto& f3 = FieldContext::default_for(3);
    CHECK(spectral(Mat::identity(f3, 3), 3).multiplicities == std::vector<int>{3, 0, 0});
    CHECK(spectral(Mat::p_diag(f2, {0, 0, 0, 1}), 2).multiplicities == std::vector<int>{3, 1});
    try {
        spectral(Mat::diag(f2, {Scalar::root(f2, 4)}), 2);
        FAIL("expected NotOrderP");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotOrderP);
    }
}

TEST_CASE("spectral reconstruction and commutant property") {
    std::mt19937 rng(3);
    for (int p : {2, 3, 5}) {
        const auto& f = FieldContext::default_for(p);
        for (int t = 0; t < 50; ++t) {
            int n = 1 + t % 4;
            auto perm_src = random_p_diag(f, n, rng);
            // conjugate by a permutation so V is not always sorted
            std::vector<int> perm(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) perm[static_cast<std::size_t>(j)] = j;
            std::shuffle(perm.begin(), perm.end(), rng);
            auto q = Mat::permutation(f, perm);
            auto v = conjugate(q, perm_src);
            auto sd = spectral(v, p);
            Mat sum(f, n, n), recon(f, n, n);
            int total = 0;
            for (int k = 0; k < p; ++k) {
                const auto& pk = sd.projections[static_cast<std::size_t>(k)];
                CHECK(pk * pk == pk);
                CHECK(pk.dagger() == pk);
                for (int j = 0; j < p; ++j)
                    if (j != k) CHECK((pk * sd.projections[static_cast<std::size_t>(j)]).is_zero());
                sum += pk;
                recon += pk * Scalar::p_root(f, k);
                total += sd.multiplicities[static_cast<std::size_t>(k)];
            }
            CHECK(sum.is_identity());
            CHECK(recon == v);
            CHECK(total == n);
            // a commutant element: polynomial in V plus a block-diagonal piece
            Mat c = v * Scalar(f, Rational(2)) + Mat::identity(f, n);
            for (int k = 0; k < p; ++k) CHECK(sd.projections[static_cast<std::size_t>(k)] * c == c * sd.projections[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("match_diagonals") {
    const auto& f = FieldContext::default_for(2);
    auto d = Mat::p_diag(f, {0, 1});
    CHECK(match_diagonals(d, d, 2).is_identity());
    auto q = match_diagonals(d, Mat::p_diag(f, {1, 0}), 2);
    CHECK(q == Mat::permutation(f, {1, 0}));
    auto d1 = Mat::p_diag(f, {0, 0, 1}), d2 = Mat::p_diag(f, {0, 1, 0});
    auto q3 = match_diagonals(d1, d2, 2);
    CHECK(q3 == Mat::permutation(f, {0, 2, 1}));
    CHECK(q3.dagger() * d1 * q3 == d2);
    try {
        match_diagonals(d1, Mat::p_diag(f, {0, 1, 1}), 2);
        FAIL("expected MultisetMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MultisetMismatch);
    }
    std::mt19937 rng(5);
    for (int p : {2, 3, 5}) {
        const auto& g = FieldContext::default_for(p);
        for (int t = 0; t < 20; ++t) {
            auto a = random_p_diag(g, 5, rng);
            auto e = p_diagonal_exponents(a);
            std::shuffle(e.begin(), e.end(), rng);
            auto b = Mat::p_diag(g, e);
            auto m = match_diagonals(a, b, p);
            CHECK(is_monomial(m));
            CHECK(m.dagger() * a * m == b);
        }
    }
}

TEST_CASE("solve") {
    const auto& f = FieldContext::default_for(2);
    Mat b(f, 3, 1);
    b.at(0, 0) = Scalar::root(f, 1);
    b.at(2, 0) = Scalar(f, Rational(-4, 3));
    auto s = solve(Mat::identity(f, 3), b);
    CHECK(s.particular == b);
    CHECK(s.null_basis.empty());
    auto z = solve(Mat(f, 1, 1), Mat(f, 1, 1));
    REQUIRE(z.null_basis.size() == 1);
    CHECK(z.null_basis[0].is_identity());
    CHECK_THROWS_AS(solve(Mat(f, 1, 1), Mat::identity(f, 1)), Error);
}

TEST_CASE("intertwiner system X diag(1,-1) = diag(-1,1) X") {
    const auto& f = FieldContext::default_for(2);
    auto d1 = Mat::p_diag(f, {0, 1}), d2 = Mat::p_diag(f, {1, 0});
    // unknown X = sum x_k E_k, row-major; column k of the system is vec(E_k d1 - d2 E_k)
    Mat sys(f, 4, 4);
    for (int k = 0; k < 4; ++k) {
        auto e = Mat::unit(f, 2, k / 2, k % 2);
        sys.set_block(0, k, vec(e * d1 - d2 * e));
    }
    auto ns = null_space(sys);
    CHECK(ns.size() == 2);
    // brute-force oracle: which matrix units satisfy the equation on their own
    std::vector<int> good;
    for (int k = 0; k < 4; ++k) {
        auto e = Mat::unit(f, 2, k / 2, k % 2);
        if (e * d1 == d2 * e) good.push_back(k);
    }
    CHECK(good == std::vector<int>{1, 2});
    for (const auto& v : ns) {
        auto x = unvec(v, 2, 2);
        CHECK(x * d1 == d2 * x);
        CHECK(x(0, 0).is_zero());
        CHECK(x(1, 1).is_zero());
    }
    CHECK(rank(sys) == 2);
}

TEST_CASE("fourier matrix diagonalizes the shift") {
    for (int p : {2, 3, 5}) {
        const auto& f = FieldContext::default_for(p);
        auto F = fourier_matrix(f);
        CHECK(is_unitary(F));
        std::vector<int> e;
        for (int r = 0; r < p; ++r) e.push_back((p - r) % p);
        CHECK(F.dagger() * cyclic_shift(f, p) * F == Mat::p_diag(f, e));
    }
}
}

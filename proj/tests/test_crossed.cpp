#include <random>

#include "afzp/crossed.hpp"
#include "doctest.h"

using namespace afzp;

namespace {

using CF = std::shared_ptr<const CanonicalForm>;

CF canon(const FieldContext& f, std::vector<IrredPiece> ps) { return std::make_shared<const CanonicalForm>(make_canonical(f, std::move(ps))); }

Mat random_mat(const FieldContext& f, int n, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(-2, 2), e(0, f.order() - 1);
    Mat m(f, n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.at(i, j) = Scalar::root(f, e(rng)) * Rational(d(rng));
    return m;
}

CrossedElement random_crossed(const CrossedPresentation& cp, std::mt19937& rng) {
    CrossedElement x = crossed_zero(cp);
    for (auto& c : x.coeff)
        for (auto& b : c) b = random_mat(cp.ctx(), b.rows(), rng);
    return x;
}

}  // namespace

TEST_SUITE("crossed") {
TEST_CASE("Fixed (M2, diag(1,-1)), p=2") {
    const auto& f = FieldContext::default_for(2);
    auto cp = crossed_product(canon(f, {fixed_piece(f, {0, 1})}));
    CHECK(cp.target_blocks == std::vector<int>{2, 2});
    CHECK(cp.special == std::vector<int>{1, 1});
    std::mt19937 rng(1);
    auto a0 = random_mat(f, 2, rng), a1 = random_mat(f, 2, rng);
    auto v = Mat::p_diag(f, {0, 1});
    auto y = identify(cp, CrossedElement{{{a0}, {a1}}});
    CHECK(y[0] == a0 + a1 * v);
    CHECK(y[1] == a0 - a1 * v);
    // iota(a) -> (a, a)
    auto ia = identify(cp, embed_iota(cp, {a0}));
    CHECK(ia[0] == a0);
    CHECK(ia[1] == a0);
    auto q = identify(cp, averaging_projection(cp));
    auto half = Scalar(f, Rational(1, 2));
    CHECK(q[0] == (Mat::identity(f, 2) + v) * half);
    CHECK(q[1] == (Mat::identity(f, 2) - v) * half);
    CHECK(projection_class(q) == cp.special);
}

TEST_CASE("Cycle n=1, p=2") {
    const auto& f = FieldContext::default_for(2);
    auto cp = crossed_product(canon(f, {cycle_piece(1)}));
    CHECK(cp.target_blocks == std::vector<int>{2});
    CHECK(cp.special == std::vector<int>{1});
    Element a{Mat::diag(f, {Scalar(f, Rational(3))}), Mat::diag(f, {Scalar(f, Rational(5))})};
    auto y = identify(cp, embed_iota(cp, a));
    CHECK(y[0] == Mat::diag(f, {Scalar(f, Rational(3)), Scalar(f, Rational(5))}));
    auto q = identify(cp, averaging_projection(cp));
    CHECK(projection_class(q) == std::vector<int>{1});
    CHECK(q[0] * q[0] == q[0]);
}

TEST_CASE("Fixed (M1, 1), p=3") {
    const auto& f = FieldContext::default_for(3);
    auto cp = crossed_product(canon(f, {fixed_piece(f, {0})}));
    CHECK(cp.target_blocks == std::vector<int>{1, 1, 1});
    CHECK(cp.special == std::vector<int>{1, 0, 0});
    auto d = dual_system(cp);
    CHECK(d.sigma == std::vector<int>{2, 0, 1});
    CHECK(validate(d).ok());
}

TEST_CASE("Fixed (M4, diag(1,1,1,-1)) averaging projection ranks (3,1)") {
    const auto& f = FieldContext::default_for(2);
    auto cp = crossed_product(canon(f, {fixed_piece(f, {0, 0, 0, 1})}));
    CHECK(projection_class(identify(cp, averaging_projection(cp))) == std::vector<int>{3, 1});
    CHECK(cp.special == std::vector<int>{3, 1});
}

TEST_CASE("p=3 special is read off the averaging projection") {
    const auto& f = FieldContext::default_for(3);
    // l = (1, 2, 0); summand i carries the zeta^{-i} eigenspace
    auto cp = crossed_product(canon(f, {fixed_piece(f, {0, 1, 1})}));
    CHECK(projection_class(identify(cp, averaging_projection(cp))) == std::vector<int>{1, 0, 2});
    CHECK(cp.special == std::vector<int>{1, 0, 2});
}

TEST_CASE("identify is a unital *-isomorphism, covariant; unidentify inverts it") {
    std::mt19937 rng(4);
    for (int p : {2, 3}) {
        const auto& f = FieldContext::default_for(p);
        std::vector<int> e;
        for (int i = 0; i < 3; ++i) e.push_back(static_cast<int>(rng() % static_cast<unsigned>(p)));
        auto cp = crossed_product(canon(f, {fixed_piece(f, e), cycle_piece(2)}));
        CHECK(identify(cp, crossed_one(cp)) == unit_element(FdSystem{&f, cp.target_blocks, {}, {}}));
        auto s = cp.source->system();
        for (int t = 0; t < 5; ++t) {
            auto x = random_crossed(cp, rng), y = random_crossed(cp, rng);
            auto ix = identify(cp, x), iy = identify(cp, y);
            auto ixy = identify(cp, crossed_mul(cp, x, y));
            for (std::size_t b = 0; b < ix.size(); ++b) CHECK(ixy[b] == ix[b] * iy[b]);
            auto ia = identify(cp, crossed_adjoint(cp, x));
            for (std::size_t b = 0; b < ix.size(); ++b) CHECK(ia[b] == ix[b].dagger());
            CHECK(unidentify(cp, ix) == x);
            // covariance: iota(alpha(a)) = U iota(a) U^dagger
            auto u = canonical_unitary(cp);
            auto a = x.coeff[0];
            CHECK(identify(cp, embed_iota(cp, apply_action(s, a))) ==
                  identify(cp, crossed_mul(cp, crossed_mul(cp, u, embed_iota(cp, a)), crossed_adjoint(cp, u))));
            // dual_system implements the dual action
            CHECK(apply_action(dual_system(cp), ix) == identify(cp, dual_action(cp, x)));
        }
        auto d = dual_system(cp);
        CHECK(validate(d).ok());
        auto x = identify(cp, random_crossed(cp, rng));
        auto z = x;
        for (int k = 0; k < p; ++k) z = apply_action(d, z);
        CHECK(z == x);
    }
}

TEST_CASE("Takai dimension law") {
    for (int p : {2, 3}) {
        const auto& f = FieldContext::default_for(p);
        for (int n = 1; n <= 3; ++n) {
            std::vector<int> e(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i)] = i % p;
            auto cp = crossed_product(canon(f, {fixed_piece(f, e)}));
            auto dd = std::make_shared<const CanonicalForm>(decompose(dual_system(cp)));
            auto cp2 = crossed_product(dd);
            CHECK(cp2.target_blocks == std::vector<int>{p * n});
        }
    }
}

TEST_CASE("extend_hom: M1 -> (M2, Ad diag(1,-1))") {
    const auto& f = FieldContext::default_for(2);
    auto a = canon(f, {fixed_piece(f, {0})});
    auto b = canon(f, {fixed_piece(f, {0, 1})});
    EqHom h{a, b, {{{Slot{0, 2, {0, 1}}}, Mat::identity(f, 2)}}, true};
    auto cpa = std::make_shared<const CrossedPresentation>(crossed_product(a));
    auto cpb = std::make_shared<const CrossedPresentation>(crossed_product(b));
    auto ext = extend_hom(h, cpa, cpb);
    std::vector<std::vector<int>> k(2, std::vector<int>(2));
    for (int s = 0; s < 2; ++s) {
        Element e{Mat(f, 1, 1), Mat(f, 1, 1)};
        e[static_cast<std::size_t>(s)].at(0, 0) = Scalar::one(f);
        auto img = projection_class(ext.apply(e));
        for (int t = 0; t < 2; ++t) k[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = img[static_cast<std::size_t>(t)];
    }
    CHECK(k == std::vector<std::vector<int>>{{1, 1}, {1, 1}});
    CHECK(ext.apply(identify(*cpa, averaging_projection(*cpa))) == identify(*cpb, averaging_projection(*cpb)));
    // intertwines the dual systems
    Element e{Mat::diag(f, {Scalar(f, Rational(2))}), Mat::diag(f, {Scalar::root(f, 3)})};
    CHECK(ext.apply(apply_action(dual_system(*cpa), e)) == apply_action(dual_system(*cpb), ext.apply(e)));
    // a non-equivariant hom is refused
    auto triv2 = canon(f, {fixed_piece(f, {0, 0})});
    EqHom bad{triv2, b, {{{Slot{0, 1, {}}}, Mat::identity(f, 2)}}, true};
    auto cpt = std::make_shared<const CrossedPresentation>(crossed_product(triv2));
    CHECK_THROWS_AS(extend_hom(bad, cpt, cpb), Error);
    // identity extends to identity
    auto id = extend_hom(identity_hom(b), cpb, cpb);
    Element y{Mat::unit(f, 2, 0, 1), Mat::unit(f, 2, 1, 1)};
    CHECK(id.apply(y) == y);
}

TEST_CASE("identify_matrix is square and invertible") {
    const auto& f = FieldContext::default_for(2);
    auto cp = crossed_product(canon(f, {fixed_piece(f, {0, 1}), cycle_piece(1)}));
    auto m = identify_matrix(cp);
    CHECK(m.rows() == m.cols());
    CHECK(rank(m) == m.rows());
}
}

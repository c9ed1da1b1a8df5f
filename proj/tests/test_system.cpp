#include <random>

#include "afzp/system.hpp"
#include "doctest.h"

using namespace afzp;

namespace {

const FieldContext& F2() { return FieldContext::default_for(2); }

FdSystem single(const Mat& u) {
    return FdSystem{&u.context(), {u.rows()}, {0}, {u}};
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::ParseError;
}

std::vector<int> random_perm(int n, std::mt19937& rng) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

// random monomial unitary with p-th root phases
Mat random_monomial(const FieldContext& ctx, int n, std::mt19937& rng) {
    std::uniform_int_distribution<int> d(0, ctx.order() - 1);
    std::vector<Scalar> ph;
    for (int i = 0; i < n; ++i) ph.push_back(Scalar::root(ctx, d(rng)));
    return Mat::permutation(ctx, random_perm(n, rng)) * Mat::diag(ctx, ph);
}

// A random valid system: canonical pieces, blocks shuffled, each block
// conjugated by a random monomial unitary, impls scaled by random roots.
FdSystem random_system(int p, std::mt19937& rng) {
    const auto& ctx = FieldContext::default_for(p);
    std::uniform_int_distribution<int> npieces(1, 3), size(1, 3), kind(0, 1), ex(0, p - 1), root(0, 4 * p - 1);
    std::vector<IrredPiece> pieces;
    for (int k = npieces(rng); k > 0; --k) {
        int n = size(rng);
        if (kind(rng)) {
            std::vector<int> e;
            for (int i = 0; i < n; ++i) e.push_back(ex(rng));
            pieces.push_back(fixed_piece(ctx, e));
        } else {
            pieces.push_back(cycle_piece(n));
        }
    }
    FdSystem c = make_canonical(ctx, pieces).system();
    const int m = c.block_count();
    auto perm = random_perm(m, rng);  // canonical block i -> new position perm[i]
    std::vector<Mat> w;
    for (int i = 0; i < m; ++i) w.push_back(random_monomial(ctx, c.blocks[static_cast<std::size_t>(i)], rng));
    FdSystem s{&ctx, std::vector<int>(static_cast<std::size_t>(m)), std::vector<int>(static_cast<std::size_t>(m)), {}};
    std::vector<Mat> impl(static_cast<std::size_t>(m), Mat::identity(ctx, 1));
    for (int i = 0; i < m; ++i) {
        auto pi = static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]);
        s.blocks[pi] = c.blocks[static_cast<std::size_t>(i)];
        s.sigma[pi] = perm[static_cast<std::size_t>(c.sigma[static_cast<std::size_t>(i)])];
        // b = w a w^dagger in new coordinates: impl' = w_i impl_i w_sigma(i)^dagger, times a 4p-th root
        auto si = static_cast<std::size_t>(c.sigma[static_cast<std::size_t>(i)]);
        impl[pi] = w[static_cast<std::size_t>(i)] * c.impl[static_cast<std::size_t>(i)] * w[si].dagger() *
                   Scalar::root(ctx, root(rng) * (ctx.order() / (4 * p)));
    }
    s.impl = impl;
    return s;
}

}  // namespace

TEST_SUITE("system") {
TEST_CASE("validate examples") {
    CHECK(validate(single(Mat::p_diag(F2(), {0, 1}))).ok());
    // zeta_3 is not in Q(zeta_16); diag(1, zeta_4) has the same defect: its square is not scalar
    auto rep = validate(single(Mat::diag(F2(), {Scalar::one(F2()), Scalar::root(F2(), 4)})));
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].identity == "alpha^p = id");
    CHECK(rep.violations[0].where == "block 0");
    FdSystem bad{&F2(), {1, 2}, {1, 0}, {Mat::identity(F2(), 1), Mat::identity(F2(), 2)}};
    CHECK_FALSE(validate(bad).ok());
}

TEST_CASE("decompose examples") {
    const auto& f = F2();
    FdSystem sw{&f, {1, 1}, {1, 0}, {Mat::identity(f, 1), Mat::identity(f, 1)}};
    auto c = decompose(sw);
    REQUIRE(c.pieces.size() == 1);
    CHECK(c.pieces[0].kind == PieceKind::Cycle);
    CHECK(c.pieces[0].n == 1);
    CHECK(c.conjugators[0].is_identity());
    CHECK(c.conjugators[1].is_identity());

    FdSystem tw{&f, {1, 1}, {1, 0}, {Mat::identity(f, 1), -Mat::identity(f, 1)}};
    auto ct = decompose(tw);
    CHECK(ct.pieces[0].kind == PieceKind::Cycle);
    // recorded conjugation diag(1, zeta_4)
    CHECK(ct.conjugators[0].is_identity());
    CHECK(ct.conjugators[1] == Mat::diag(f, {Scalar::root(f, 4)}));
    // direct multiplication: transported action is the exact swap
    CHECK(check_iso(tw, ct).ok());
    for (int k = 0; k < 2; ++k) {
        const auto& w = ct.conjugators[static_cast<std::size_t>(k)];
        const auto& wn = ct.conjugators[static_cast<std::size_t>(1 - k)];
        // w_k^dagger u_{b_k} w_{sigma} is a common scalar
        CHECK((w.dagger() * tw.impl[static_cast<std::size_t>(ct.block_map[static_cast<std::size_t>(k)])] * wn).as_scalar().has_value());
    }

    auto cf = decompose(single(Mat::p_diag(f, {0, 0, 0, 1})));
    REQUIRE(cf.pieces.size() == 1);
    CHECK(cf.pieces[0].kind == PieceKind::Fixed);
    CHECK(*cf.pieces[0].v == Mat::p_diag(f, {0, 0, 0, 1}));
}

TEST_CASE("decompose errors") {
    const auto& f3 = FieldContext::get(3, 3);
    // holonomy zeta_3 needs a cube root zeta_9
    FdSystem cyc{&f3, {1, 1, 1}, {1, 2, 0}, {Mat::identity(f3, 1), Mat::identity(f3, 1), Mat::diag(f3, {Scalar::root(f3, 1)})}};
    CHECK(validate(cyc).ok());
    try {
        decompose(cyc);
        FAIL("expected TwistRootOutsideField");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TwistRootOutsideField);
        CHECK(std::string(e.what()).find("zeta_9") != std::string::npos);
    }
    // same input over Q(zeta_9) decomposes
    const auto& f9 = FieldContext::get(3, 9);
    FdSystem cyc9{&f9, {1, 1, 1}, {1, 2, 0}, {Mat::identity(f9, 1), Mat::identity(f9, 1), Mat::diag(f9, {Scalar::root(f9, 3)})}};
    auto c9 = decompose(cyc9);
    CHECK(check_iso(cyc9, c9).ok());

    const auto& f4 = FieldContext::get(2, 4);
    Scalar pyth = (Scalar(f4, Rational(3)) + Scalar::root(f4, 1) * Rational(4)) * Rational(1, 5);
    CHECK(code_of([&] { decompose(single(Mat::diag(f4, {pyth}))); }) == ErrorCode::TwistNotRootOfUnity);

    // 3-cycle permutation on M_3: eigenvectors need 1/sqrt(3), absent from Q(zeta_3)
    auto shift3 = cyclic_shift(f3, 3);
    CHECK(code_of([&] { decompose(single(shift3)); }) == ErrorCode::NonDiagonalizableWithinField);
    CHECK(code_of([&] { decompose(single(Mat::diag(F2(), {Scalar::one(F2()), Scalar::root(F2(), 4)}))); }) ==
          ErrorCode::NonScalarHolonomy);
}

TEST_CASE("non-diagonal fixed blocks are diagonalized when the field allows") {
    for (int p : {2, 3, 5}) {
        const auto& ctx = FieldContext::default_for(p);
        auto s = single(cyclic_shift(ctx, p));
        auto c = decompose(s);
        std::vector<int> e(static_cast<std::size_t>(p));
        std::iota(e.begin(), e.end(), 0);
        CHECK(*c.pieces[0].v == Mat::p_diag(ctx, e));
        CHECK(check_iso(s, c).ok());
    }
}

TEST_CASE("decompose on random systems: iso checks out, canonical form is idempotent") {
    std::mt19937 rng(19);
    for (int t = 0; t < 60; ++t) {
        int p = t % 3 == 2 ? 3 : 2;
        auto s = random_system(p, rng);
        REQUIRE(validate(s).ok());
        auto c = decompose(s);
        CHECK(check_iso(s, c).ok());
        auto cs = c.system();
        CHECK(validate(cs).ok());
        auto again = decompose(cs);
        CHECK(again.pieces == c.pieces);
        CHECK(again == make_canonical(*c.ctx, c.pieces));
        // piece order: Fixed first, sizes nondecreasing within kind
        bool seen_cycle = false;
        for (std::size_t i = 0; i < c.pieces.size(); ++i) {
            if (c.pieces[i].kind == PieceKind::Cycle) seen_cycle = true;
            else CHECK_FALSE(seen_cycle);
            if (i > 0 && c.pieces[i].kind == c.pieces[i - 1].kind) CHECK(c.pieces[i - 1].n <= c.pieces[i].n);
        }
    }
}

TEST_CASE("recover_inner_unitary") {
    const auto& f = F2();
    CHECK(recover_inner_unitary(f, 2, [](const Mat& a) { return a; }).is_identity());
    auto d = Mat::p_diag(f, {0, 1});
    CHECK(recover_inner_unitary(f, 2, [&](const Mat& a) { return conjugate(d, a); }) == d);
    CHECK(recover_inner_unitary(single(d), 0) == d);
    CHECK(code_of([&] { recover_inner_unitary(f, 2, [](const Mat& a) { return a.transpose(); }); }) == ErrorCode::NotAnAutomorphism);
    // p=3 swap-like inner automorphism by a 3-cycle: needs normalization by the field
    const auto& g = FieldContext::default_for(3);
    auto sh = cyclic_shift(g, 3);
    auto u = recover_inner_unitary(g, 3, [&](const Mat& a) { return conjugate(sh, a); });
    CHECK(u.pow(3).is_identity());
    CHECK(is_unitary(u));
}

TEST_CASE("hom_validate examples") {
    const auto& f = F2();
    auto a = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0, 1})}));
    auto b = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0, 0, 0, 1})}));
    CHECK(hom_validate(identity_hom(a)).ok());
    // psi(a) = diag(a, a): kron(a, I_2) moved by the perfect shuffle
    std::vector<int> shuffle{0, 2, 1, 3};
    EqHom naive{a, b, {{{Slot{0, 2, {}}}, Mat::permutation(f, shuffle)}}, true};
    CHECK(evaluate_unit(naive, 0, 0, 1)[0] == direct_sum({Mat::unit(f, 2, 0, 1), Mat::unit(f, 2, 0, 1)}));
    auto rep = hom_validate(naive);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].identity == "psi(alpha(E)) = beta(psi(E))");
    CHECK(rep.violations[0].where.find("E_0,1") != std::string::npos);

    auto triv = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0})}));
    auto m2 = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0, 1})}));
    EqHom scal{triv, m2, {{{Slot{0, 2, {0, 1}}}, Mat::identity(f, 2)}}, true};
    CHECK(hom_validate(scal).ok());
    scal.unital = false;
    CHECK_FALSE(hom_validate(scal).ok());
}

TEST_CASE("hom_compose") {
    const auto& f = F2();
    auto m1 = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0})}));
    auto m2 = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0, 0})}));
    auto m4 = std::make_shared<const CanonicalForm>(make_canonical(f, {fixed_piece(f, {0, 0, 0, 0})}));
    EqHom h{m1, m2, {{{Slot{0, 2, {}}}, Mat::identity(f, 2)}}, true};
    EqHom g{m2, m4, {{{Slot{0, 2, {}}}, Mat::identity(f, 4)}}, true};
    auto gh = hom_compose(g, h);
    REQUIRE(gh.blocks[0].slots.size() == 1);
    CHECK(gh.blocks[0].slots[0].mult == 4);
    CHECK(hom_validate(gh).ok());
    CHECK(hom_compose(h, identity_hom(m1)) == h);
    CHECK(hom_compose(identity_hom(m2), h) == h);
    CHECK_THROWS_AS(hom_compose(h, g), Error);
}

TEST_CASE("hom_compose with padding, conjugators and associativity") {
    std::mt19937 rng(23);
    const auto& f = FieldContext::default_for(3);
    // trivial actions so any arrangement is equivariant
    auto sys = [&](std::vector<int> ns) {
        std::vector<IrredPiece> ps;
        for (int n : ns) ps.push_back(fixed_piece(f, std::vector<int>(static_cast<std::size_t>(n), 0)));
        return std::make_shared<const CanonicalForm>(make_canonical(f, ps));
    };
    auto rand_hom = [&](std::shared_ptr<const CanonicalForm> s, std::shared_ptr<const CanonicalForm> t) {
        EqHom h{s, t, {}, true};
        auto ss = s->block_sizes();
        bool full = true;
        for (int nt : t->block_sizes()) {
            Arrangement ar{{}, random_monomial(f, nt, rng)};
            int used = 0;
            for (int tries = 0; tries < 4; ++tries) {
                int src = static_cast<int>(rng() % ss.size());
                int ns = ss[static_cast<std::size_t>(src)];
                if (used + ns <= nt) {
                    ar.slots.push_back({src, 1, {}});
                    used += ns;
                }
            }
            full = full && used == nt;
            h.blocks.push_back(ar);
        }
        h.unital = full;
        return h;
    };
    for (int t = 0; t < 20; ++t) {
        auto a = sys({1, 2}), b = sys({3, 2}), c = sys({5, 4}), d = sys({6});
        auto h1 = rand_hom(a, b), h2 = rand_hom(b, c), h3 = rand_hom(c, d);
        REQUIRE(hom_validate(h1).ok());
        auto left = hom_compose(hom_compose(h3, h2), h1);
        auto right = hom_compose(h3, hom_compose(h2, h1));
        CHECK(hom_validate(left).ok());
        CHECK(same_map(left, right));
        // composite agrees with sequential evaluation
        for (int s = 0; s < 2; ++s) {
            auto sizes = a->block_sizes();
            Element e;
            for (int n : sizes) e.emplace_back(f, n, n);
            e[static_cast<std::size_t>(s)] = Mat::unit(f, sizes[static_cast<std::size_t>(s)], 0, sizes[static_cast<std::size_t>(s)] - 1);
            CHECK(evaluate(left, e) == evaluate(h3, evaluate(h2, evaluate(h1, e))));
        }
    }
}
}

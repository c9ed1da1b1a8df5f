#include "afzp/classify.hpp"
#include "doctest.h"
#include "grid.hpp"

using namespace afzp;
using grid::canon;

namespace {
const FieldContext& F2() { return FieldContext::default_for(2); }
const FieldContext& F3() { return FieldContext::default_for(3); }

bool has_code(ErrorCode c, const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == c;
    }
    return false;
}

// every integer matrix with entries in [0,bound] that passes check_pair
std::vector<KPair> brute_pairs(const KInvariant& a, const KInvariant& b, int bound) {
    std::vector<KPair> out;
    const int nf = a.m * b.m, np = a.mc * b.mc;
    std::vector<int> x(static_cast<std::size_t>(nf + np), 0);
    for (;;) {
        KPair kp{IntMat(static_cast<std::size_t>(b.m), IntVec(static_cast<std::size_t>(a.m))),
                 IntMat(static_cast<std::size_t>(b.mc), IntVec(static_cast<std::size_t>(a.mc))), true};
        for (int i = 0; i < nf; ++i) kp.f[static_cast<std::size_t>(i / a.m)][static_cast<std::size_t>(i % a.m)] = x[static_cast<std::size_t>(i)];
        for (int i = 0; i < np; ++i) kp.phi[static_cast<std::size_t>(i / a.mc)][static_cast<std::size_t>(i % a.mc)] = x[static_cast<std::size_t>(nf + i)];
        if (check_pair(kp, a, b).ok()) out.push_back(kp);
        std::size_t k = 0;
        while (k < x.size() && x[k] == bound) x[k++] = 0;
        if (k == x.size()) break;
        ++x[k];
    }
    return out;
}
}  // namespace

TEST_SUITE("classify") {
TEST_CASE("lift: Cycle (M1+M1) -> Fixed (M2, diag(1,-1))") {
    auto a = canon(F2(), {cycle_piece(1)});
    auto b = canon(F2(), {fixed_piece(F2(), {0, 1})});
    KPair kp{{{1, 1}}, {{1}, {1}}, true};
    auto plan = plan_lift(kp, *a, *b);
    REQUIRE(plan.pairs.size() == 1);
    CHECK(plan.pairs[0].tag == CaseTag::CF);
    auto h = lift(kp, a, b);
    CHECK(hom_validate(h).ok());
    CHECK(induced_map(h) == kp);
    const Mat& x = h.blocks[0].x;
    CHECK(x.dagger() * *b->pieces[0].v * x == cyclic_shift(F2(), 2));
    // equivariance on all four matrix units, by hand
    for (int s = 0; s < 2; ++s) {
        auto img = evaluate_unit(h, s, 0, 0);
        auto moved = evaluate_unit(h, 1 - s, 0, 0);
        CHECK(apply_action(b->system(), img) == moved);
    }
}

TEST_CASE("lift: the four cases") {
    // FF
    auto m2 = canon(F2(), {fixed_piece(F2(), {0, 1})});
    auto m4 = canon(F2(), {fixed_piece(F2(), {0, 0, 1, 1})});
    KPair ff{{{2}}, {{1, 1}, {1, 1}}, true};
    auto h = lift(ff, m2, m4);
    CHECK(induced_map(h) == ff);
    CHECK(h.blocks[0].slots[0].phases == std::vector<int>{0, 1});
    // FC
    auto m1 = canon(F2(), {fixed_piece(F2(), {0})});
    auto c1 = canon(F2(), {cycle_piece(1)});
    KPair fc{{{1}, {1}}, {{1, 1}}, true};
    CHECK(plan_lift(fc, *m1, *c1).pairs[0].tag == CaseTag::FC);
    CHECK(induced_map(lift(fc, m1, c1)) == fc);
    // CC p=3, k=1, n=2
    auto c31 = canon(F3(), {cycle_piece(1)});
    auto c32 = canon(F3(), {cycle_piece(2)});
    KPair cc{{{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}, {{2}}, true};
    auto hc = lift(cc, c31, c32);
    CHECK(plan_lift(cc, *c31, *c32).pairs[0].tag == CaseTag::CC);
    CHECK(induced_map(hc) == cc);
    // mixed pieces on both sides
    auto s = canon(F3(), {fixed_piece(F3(), {0}), cycle_piece(1)});
    auto t = canon(F3(), {fixed_piece(F3(), {0, 0, 1, 1, 2, 2}), cycle_piece(2)});
    auto ks = ksearch(invariant_of(*s), invariant_of(*t), 2);
    REQUIRE(!ks.empty());
    for (const auto& kp : ks) CHECK(induced_map(lift(kp, s, t)) == kp);
}

TEST_CASE("lift errors") {
    auto m1 = canon(F2(), {fixed_piece(F2(), {0})});
    auto m2 = canon(F2(), {fixed_piece(F2(), {0, 1})});
    KPair bad{{{2}}, {{1, 1}, {0, 2}}, true};
    CHECK(has_code(ErrorCode::CaseShapeViolation, [&] { plan_lift(bad, *m1, *m2); }));
    CHECK(has_code(ErrorCode::PairCheckFailed, [&] { lift(bad, m1, m2); }));
    KPair nonunital{{{1}}, {{1, 0}, {0, 1}}, false};
    CHECK(has_code(ErrorCode::PairCheckFailed, [&] { lift(nonunital, m1, m2); }));
}

TEST_CASE("lift is deterministic") {
    auto a = canon(F3(), {fixed_piece(F3(), {0, 1}), cycle_piece(1)});
    auto b = canon(F3(), {fixed_piece(F3(), {0, 0, 1, 1, 2, 2}), cycle_piece(3)});
    auto ks = ksearch(invariant_of(*a), invariant_of(*b), 2);
    REQUIRE(!ks.empty());
    for (const auto& kp : ks) CHECK(lift(kp, a, b) == lift(kp, a, b));
}

TEST_CASE("ksearch matches brute force on small invariants") {
    auto m1 = canon(F2(), {fixed_piece(F2(), {0})});
    auto m2 = canon(F2(), {fixed_piece(F2(), {0, 1})});
    auto ks = ksearch(invariant_of(*m1), invariant_of(*m2), 3);
    REQUIRE(ks.size() == 1);
    CHECK(ks[0].f == IntMat{{2}});
    CHECK(ks[0].phi == IntMat{{1, 1}, {1, 1}});
    std::vector<grid::CF> sys{m1, m2, canon(F2(), {cycle_piece(1)}), canon(F2(), {fixed_piece(F2(), {0, 0, 1})}),
                              canon(F2(), {fixed_piece(F2(), {0}), cycle_piece(1)})};
    for (const auto& a : sys)
        for (const auto& b : sys) {
            auto ia = invariant_of(*a), ib = invariant_of(*b);
            if (ia.m * ib.m + ia.mc * ib.mc > 8) continue;
            CHECK(ksearch(ia, ib, 2) == brute_pairs(ia, ib, 2));
        }
}

TEST_CASE("ksearch between doubling-tower stages is empty") {
    auto t = naive_tower(F2(), 3);
    for (int i = 0; i + 1 < t.length(); ++i) {
        auto a = invariant_of(*t.systems[static_cast<std::size_t>(i)]);
        auto b = invariant_of(*t.systems[static_cast<std::size_t>(i + 1)]);
        CHECK(ksearch(a, b, 3).empty());
        auto obs = special_obstructions(a, b, 3);
        CHECK_FALSE(obs.empty());
        for (const auto& [kp, rep] : obs) CHECK(rep.violations[0].identity.rfind("(d)", 0) == 0);
    }
}

TEST_CASE("equiv_unitary: FF opposite phase routings, checked against the linear oracle") {
    auto m2 = canon(F2(), {fixed_piece(F2(), {0, 1})});
    auto m4 = canon(F2(), {fixed_piece(F2(), {0, 0, 1, 1})});
    KPair ff{{{2}}, {{1, 1}, {1, 1}}, true};
    auto h1 = lift(ff, m2, m4);
    // second routing: phases (1,0), X matched against V
    Mat model = kron(*m2->pieces[0].v, Mat::p_diag(F2(), {1, 0}));
    Mat x = match_diagonals(*m4->pieces[0].v, model, 2);
    EqHom h2{m2, m4, {{{Slot{0, 2, {1, 0}}}, x}}, true};
    REQUIRE(hom_validate(h2).ok());
    auto res = equiv_unitary(h1, h2);
    CHECK(check_correction(res.w, h1, h2).ok());
    CHECK(is_unitary(res.w[0]));
    CHECK(is_fixed(*m4, res.w));
    CHECK(grid::in_intertwiner_space(h1, h2, res.w));
}

TEST_CASE("equiv_unitary: CC p=3 lifts differing by a target permutation") {
    auto c31 = canon(F3(), {cycle_piece(1)});
    auto c32 = canon(F3(), {cycle_piece(2)});
    KPair cc{{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}, {{2}}, true};
    auto h1 = lift(cc, c31, c32);
    Element w0(3, Mat::permutation(F3(), {1, 0}));
    auto h2 = conjugate_hom(w0, h1);
    auto res = equiv_unitary(h1, h2);
    REQUIRE(res.w.size() == 3);
    CHECK(res.w[0] == res.w[1]);
    CHECK(res.w[1] == res.w[2]);
    CHECK(res.w[0] == Mat::permutation(F3(), {1, 0}));
    CHECK(check_correction(res.w, h1, h2).ok());
}

TEST_CASE("equiv_unitary errors") {
    auto m1 = canon(F2(), {fixed_piece(F2(), {0})});
    auto m2 = canon(F2(), {fixed_piece(F2(), {0, 1})});
    auto m4 = canon(F2(), {fixed_piece(F2(), {0, 0, 1, 1})});
    auto h1 = lift(KPair{{{2}}, {{1, 1}, {1, 1}}, true}, m1, m2);
    auto h2 = lift(KPair{{{2}}, {{1, 1}, {1, 1}}, true}, m2, m4);
    CHECK(has_code(ErrorCode::SystemMismatch, [&] { equiv_unitary(h1, h2); }));
    // same systems, different K-data
    auto a = canon(F2(), {fixed_piece(F2(), {0}), fixed_piece(F2(), {0})});
    auto b = canon(F2(), {fixed_piece(F2(), {0, 1})});
    auto ks = ksearch(invariant_of(*a), invariant_of(*b), 2);
    REQUIRE(ks.size() >= 2);
    auto e = lift(ks[0], a, b), f = lift(ks[1], a, b);
    CHECK(has_code(ErrorCode::KDataMismatch, [&] { equiv_unitary(e, f); }));
}

TEST_CASE("non-monomial commutant changes are absorbed") {
    auto m1 = canon(F2(), {fixed_piece(F2(), {0})});
    auto m4 = canon(F2(), {fixed_piece(F2(), {0, 0, 1, 1})});
    KPair kp{{{4}}, {{2, 2}, {2, 2}}, true};
    auto h1 = lift(kp, m1, m4);
    EqHom h2 = h1;
    Mat z = Mat::identity(F2(), 4);
    z.set_block(1, 1, grid::rotation(F2()));
    h2.blocks[0].x = h1.blocks[0].x * z;
    h2.blocks[0].slots[0].phases.clear();
    auto res = equiv_unitary(h1, h2);
    CHECK(check_correction(res.w, h1, h2).ok());
    CHECK(grid::in_intertwiner_space(h1, h2, res.w));
}

TEST_CASE("small grid: lift round trip and uniqueness with oracle") {
    std::mt19937 rng(7);
    for (const FieldContext* f : {&F2(), &F3()}) {
        auto sys = grid::single_pieces(*f, f->p() == 2 ? 3 : 2);
        int checked = 0;
        for (const auto& in : grid::instances(sys, 2)) {
            auto h = lift(in.kp, in.a, in.b);
            CHECK(induced_map(h) == in.kp);
            auto g = grid::second_lift(h, rng);
            REQUIRE(hom_validate(g).ok());
            auto res = equiv_unitary(h, g);
            CHECK(check_correction(res.w, h, g).ok());
            if (checked++ % 5 == 0) CHECK(grid::in_intertwiner_space(h, g, res.w));
        }
        CHECK(checked > 10);
    }
}

TEST_CASE("towers") {
    auto t = product_tower(F2(), 4);
    CHECK(tower_validate(t).ok());
    CHECK(t.systems[3]->pieces[0].n == 8);
    auto s = sorted_product_tower(F2(), 4);
    CHECK(tower_validate(s).ok());
    CHECK(t.maps[1].blocks[0].x.is_identity());
    CHECK_FALSE(s.maps[1].blocks[0].x.is_identity());
    auto composite = tower_map(t, 0, 3);
    CHECK(composite.blocks[0].slots[0].mult == 8);
    CHECK(hom_validate(composite).ok());
    auto n = naive_tower(F2(), 3);
    auto rep = tower_validate(n);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].identity == "psi(alpha(E)) = beta(psi(E))");
    CHECK(tower_validate(product_tower(F3(), 3)).ok());
}

TEST_CASE("intertwine: product tower with itself, identity pairs") {
    auto t = product_tower(F2(), 4);
    IntertwineOptions opt;
    opt.depth = 3;
    for (int i = 0; i < 3; ++i) opt.pairs.push_back(identity_pair(invariant_of(*t.systems[static_cast<std::size_t>(i)])));
    auto cert = intertwine(t, t, opt);
    CHECK(cert.n == std::vector<int>{0, 1, 2, 3});
    CHECK(cert.m == std::vector<int>{0, 1, 2});
    auto rep = verify(cert);
    CHECK(rep.ok());
    INFO(rep.to_text());
}

TEST_CASE("intertwine: product tower against its sorted variant, auto pairs") {
    auto a = product_tower(F2(), 4), b = sorted_product_tower(F2(), 4);
    IntertwineOptions opt;
    opt.depth = 3;
    auto cert = intertwine(a, b, opt);
    auto rep = verify(cert);
    INFO(rep.to_text());
    CHECK(rep.ok());
    bool nontrivial = false;
    for (const auto& c : cert.corrections)
        for (const auto& w : c.w) nontrivial = nontrivial || !w.is_identity();
    CHECK(nontrivial);

    SUBCASE("corrupted entries are caught") {
        auto bad = cert;
        Mat& x = bad.chi[1].blocks[0].x;
        x.at(0, 0) = x(0, 0) + Scalar(F2(), Rational(1, 2));
        CHECK_FALSE(verify(bad).ok());
        auto bad2 = cert;
        REQUIRE(!bad2.corrections.empty());
        Mat& w = bad2.corrections.back().w[0];
        w.at(1, 0) = w(1, 0) + Scalar(F2(), Rational(1, 2));
        CHECK_FALSE(verify(bad2).ok());
        auto bad3 = cert;
        bad3.chi_pairs[0].phi[0][0] += 1;
        CHECK_FALSE(verify(bad3).ok());
    }
}

TEST_CASE("intertwine: p = 3 product tower") {
    auto a = product_tower(F3(), 4), b = sorted_product_tower(F3(), 4);
    IntertwineOptions opt;
    opt.depth = 3;
    auto cert = intertwine(a, b, opt);
    CHECK(verify(cert).ok());
}

TEST_CASE("intertwine: doubling tower is rejected") {
    auto n = naive_tower(F2(), 4);
    CHECK(has_code(ErrorCode::InvalidTower, [&] { intertwine(n, n, IntertwineOptions{}); }));
}
}

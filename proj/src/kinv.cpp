#include "afzp/kinv.hpp"

#include <sstream>

namespace afzp {

IntMat int_zero(int rows, int cols) { return IntMat(static_cast<std::size_t>(rows), IntVec(static_cast<std::size_t>(cols), 0)); }

IntMat int_identity(int n) {
    IntMat r = int_zero(n, n);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    return r;
}

IntMat int_mul(const IntMat& a, const IntMat& b, int inner) {
    const int rows = static_cast<int>(a.size());
    const int cols = b.empty() ? 0 : static_cast<int>(b[0].size());
    if (static_cast<int>(b.size()) != inner) throw Error(ErrorCode::ShapeMismatch, "integer matrix product");
    IntMat r = int_zero(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(a[static_cast<std::size_t>(i)].size()) != inner) throw Error(ErrorCode::ShapeMismatch, "integer matrix product");
        for (int k = 0; k < inner; ++k) {
            int x = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            if (x == 0) continue;
            for (int j = 0; j < cols; ++j) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += x * b[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        }
    }
    return r;
}

IntVec int_apply(const IntMat& a, const IntVec& v) {
    IntVec r;
    for (const auto& row : a) {
        if (row.size() != v.size()) throw Error(ErrorCode::ShapeMismatch, "integer matrix times vector");
        int s = 0;
        for (std::size_t j = 0; j < v.size(); ++j) s += row[j] * v[j];
        r.push_back(s);
    }
    return r;
}

namespace {

IntMat perm_matrix(const std::vector<int>& sigma) {
    IntMat r = int_zero(static_cast<int>(sigma.size()), static_cast<int>(sigma.size()));
    for (std::size_t i = 0; i < sigma.size(); ++i) r[i][static_cast<std::size_t>(sigma[i])] = 1;
    return r;
}

std::string show(const IntMat& m) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << (i ? ", " : "") << "[";
        for (std::size_t j = 0; j < m[i].size(); ++j) os << (j ? "," : "") << m[i][j];
        os << "]";
    }
    os << "]";
    return os.str();
}

std::string show(const IntVec& v) { return show(IntMat{v}); }

bool shape_is(const IntMat& m, int rows, int cols) {
    if (static_cast<int>(m.size()) != rows) return false;
    for (const auto& r : m)
        if (static_cast<int>(r.size()) != cols) return false;
    return true;
}

}  // namespace

KInvariant invariant_of(const CanonicalForm& c) {
    KInvariant k;
    FdSystem s = c.system();
    k.m = s.block_count();
    k.unit = s.blocks;
    k.act = perm_matrix(s.sigma);
    auto cp = crossed_product(std::make_shared<const CanonicalForm>(c));
    FdSystem d = dual_system(cp);
    k.mc = d.block_count();
    k.dual_act = perm_matrix(d.sigma);
    k.special = cp.special;
    k.iota = cp.iota;
    return k;
}

KPair induced_map(const EqHom& h) {
    KPair kp;
    kp.unital = h.unital;
    auto src = h.source->block_sizes();
    const int mb = h.target->block_count();
    kp.f = int_zero(mb, static_cast<int>(src.size()));
    for (int s = 0; s < static_cast<int>(src.size()); ++s) {
        auto cls = projection_class(evaluate_unit(h, s, 0, 0));
        for (int t = 0; t < mb; ++t) kp.f[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = cls[static_cast<std::size_t>(t)];
    }
    auto cpa = std::make_shared<const CrossedPresentation>(crossed_product(h.source));
    auto cpb = std::make_shared<const CrossedPresentation>(crossed_product(h.target));
    CrossedHom ext(h, cpa, cpb);
    const int mca = static_cast<int>(cpa->target_blocks.size());
    const int mcb = static_cast<int>(cpb->target_blocks.size());
    kp.phi = int_zero(mcb, mca);
    for (int s = 0; s < mca; ++s) {
        Element e;
        for (int n : cpa->target_blocks) e.emplace_back(cpa->ctx(), n, n);
        e[static_cast<std::size_t>(s)].at(0, 0) = Scalar::one(cpa->ctx());
        auto cls = projection_class(ext.apply(e));
        for (int t = 0; t < mcb; ++t) kp.phi[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = cls[static_cast<std::size_t>(t)];
    }
    return kp;
}

Report check_pair(const KPair& kp, const KInvariant& a, const KInvariant& b) {
    Report rep;
    if (!shape_is(kp.f, b.m, a.m)) rep.fail("F", "shape mB x mA", std::to_string(b.m) + "x" + std::to_string(a.m) + " expected");
    if (!shape_is(kp.phi, b.mc, a.mc)) rep.fail("phi", "shape mCB x mCA", std::to_string(b.mc) + "x" + std::to_string(a.mc) + " expected");
    if (!rep.ok()) return rep;
    for (const auto* m : {&kp.f, &kp.phi})
        for (const auto& row : *m)
            for (int x : row)
                if (x < 0) {
                    rep.fail(m == &kp.f ? "F" : "phi", "(a) entries nonnegative", show(*m));
                    goto done_neg;
                }
done_neg:
    {
        auto l = int_mul(kp.f, a.act, a.m), r = int_mul(b.act, kp.f, b.m);
        if (l != r) rep.fail("F", "(b) F act_A = act_B F", show(l) + " vs " + show(r));
    }
    {
        auto l = int_mul(kp.phi, a.dual_act, a.mc), r = int_mul(b.dual_act, kp.phi, b.mc);
        if (l != r) rep.fail("phi", "(c) phi dual_A = dual_B phi", show(l) + " vs " + show(r));
    }
    {
        auto l = int_apply(kp.phi, a.special);
        if (l != b.special) rep.fail("phi", "(d) phi special_A = special_B", show(l) + " vs " + show(b.special));
    }
    {
        auto l = int_mul(kp.phi, a.iota, a.mc), r = int_mul(b.iota, kp.f, b.m);
        if (l != r) rep.fail("square", "(e) phi iota_A = iota_B F", show(l) + " vs " + show(r));
    }
    auto fu = int_apply(kp.f, a.unit);
    if (kp.unital) {
        if (fu != b.unit) rep.fail("F", "(f) F unit_A = unit_B", show(fu) + " vs " + show(b.unit));
    } else {
        for (std::size_t i = 0; i < fu.size(); ++i)
            if (fu[i] > b.unit[i]) rep.fail("F", "F unit_A <= unit_B", show(fu) + " vs " + show(b.unit));
    }
    rep.notes.push_back("phi applied to the crossed unit class: " + show(int_apply(kp.phi, int_apply(a.iota, a.unit))));
    return rep;
}

KPair compose_pairs(const KPair& g, const KPair& h) {
    const int fa = h.f.empty() ? 0 : static_cast<int>(h.f.size());
    const int pa = h.phi.empty() ? 0 : static_cast<int>(h.phi.size());
    return KPair{int_mul(g.f, h.f, fa), int_mul(g.phi, h.phi, pa), g.unital && h.unital};
}

KPair identity_pair(const KInvariant& a) { return KPair{int_identity(a.m), int_identity(a.mc), true}; }

}  // namespace afzp

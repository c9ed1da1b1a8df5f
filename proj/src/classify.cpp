#include "afzp/classify.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace afzp {

std::string to_string(CaseTag t) {
    switch (t) {
        case CaseTag::FF: return "FF";
        case CaseTag::FC: return "FC";
        case CaseTag::CF: return "CF";
        case CaseTag::CC: return "CC";
    }
    return "?";
}

namespace {

int mod(int a, int p) { return ((a % p) + p) % p; }

std::vector<int> crossed_offsets(const CanonicalForm& c) {
    std::vector<int> out;
    int k = 0;
    for (const auto& pc : c.pieces) {
        out.push_back(k);
        k += pc.kind == PieceKind::Fixed ? c.p() : 1;
    }
    return out;
}

std::string range(const char* what, int r0, int r1, int c0, int c1) {
    std::ostringstream os;
    os << what << " rows " << r0 << ".." << r1 << ", cols " << c0 << ".." << c1;
    return os.str();
}

std::vector<int> counts_to_phases(const std::vector<int>& c) {
    std::vector<int> out;
    for (std::size_t d = 0; d < c.size(); ++d)
        for (int k = 0; k < c[d]; ++k) out.push_back(static_cast<int>(d));
    return out;
}

std::vector<int> iota_vec(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// existence

LiftPlan plan_lift(const KPair& kp, const CanonicalForm& src, const CanonicalForm& tgt) {
    const int p = src.p();
    auto sb = src.piece_offsets(), tb = tgt.piece_offsets();
    auto sc = crossed_offsets(src), tc = crossed_offsets(tgt);
    auto F = [&](int r, int c) { return kp.f.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)); };
    auto Phi = [&](int r, int c) { return kp.phi.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)); };
    LiftPlan plan;
    for (std::size_t t = 0; t < tgt.pieces.size(); ++t) {
        const bool tfix = tgt.pieces[t].kind == PieceKind::Fixed;
        for (std::size_t s = 0; s < src.pieces.size(); ++s) {
            const bool sfix = src.pieces[s].kind == PieceKind::Fixed;
            PairPlan pp;
            pp.source_piece = static_cast<int>(s);
            pp.target_piece = static_cast<int>(t);
            const int B = tb[t], A = sb[s], TC = tc[t], SC = sc[s];
            auto violation = [&](const std::string& what, const std::string& shape) {
                throw Error(ErrorCode::CaseShapeViolation,
                            "target piece " + std::to_string(t) + ", source piece " + std::to_string(s) + ": " + what + " is not " + shape);
            };
            if (tfix && sfix) {
                pp.tag = CaseTag::FF;
                for (int d = 0; d < p; ++d) pp.params.push_back(Phi(TC, SC + d));
                for (int i = 0; i < p; ++i)
                    for (int j = 0; j < p; ++j)
                        if (Phi(TC + i, SC + j) != pp.params[static_cast<std::size_t>(mod(j - i, p))])
                            violation(range("phi", TC, TC + p - 1, SC, SC + p - 1), "circulant");
                if (std::accumulate(pp.params.begin(), pp.params.end(), 0) != F(B, A))
                    violation(range("phi", TC, TC + p - 1, SC, SC + p - 1), "summing to F");
                pp.phases = counts_to_phases(pp.params);
            } else if (!tfix && sfix) {
                pp.tag = CaseTag::FC;
                const int f = F(B, A);
                for (int r = 0; r < p; ++r)
                    if (F(B + r, A) != f) violation(range("F", B, B + p - 1, A, A), "constant");
                for (int j = 0; j < p; ++j)
                    if (Phi(TC, SC + j) != f) violation(range("phi", TC, TC, SC, SC + p - 1), "the constant row F");
                pp.params = {f};
            } else if (tfix && !sfix) {
                pp.tag = CaseTag::CF;
                const int f = F(B, A);
                for (int q = 0; q < p; ++q)
                    if (F(B, A + q) != f) violation(range("F", B, B, A, A + p - 1), "constant");
                for (int i = 0; i < p; ++i)
                    if (Phi(TC + i, SC) != f) violation(range("phi", TC, TC + p - 1, SC, SC), "the constant column F");
                pp.params = {f};
            } else {
                pp.tag = CaseTag::CC;
                for (int q = 0; q < p; ++q) pp.params.push_back(F(B, A + q));
                for (int r = 0; r < p; ++r)
                    for (int q = 0; q < p; ++q)
                        if (F(B + r, A + q) != pp.params[static_cast<std::size_t>(mod(q - r, p))])
                            violation(range("F", B, B + p - 1, A, A + p - 1), "circulant");
                if (Phi(TC, SC) != std::accumulate(pp.params.begin(), pp.params.end(), 0))
                    violation(range("phi", TC, TC, SC, SC), "the row sum of F");
            }
            plan.pairs.push_back(std::move(pp));
        }
    }
    return plan;
}

EqHom lift(const KPair& kp, std::shared_ptr<const CanonicalForm> src, std::shared_ptr<const CanonicalForm> tgt) {
    if (src->ctx != tgt->ctx) throw Error(ErrorCode::ContextMismatch, "source and target over different fields");
    const FieldContext& ctx = *src->ctx;
    const int p = ctx.p();
    auto ka = invariant_of(*src), kb = invariant_of(*tgt);
    auto rep = check_pair(kp, ka, kb);
    if (!rep.ok()) throw Error(ErrorCode::PairCheckFailed, rep.to_text());
    if (!kp.unital) throw Error(ErrorCode::PairCheckFailed, "lift needs a unital pair");
    LiftPlan plan = plan_lift(kp, *src, *tgt);
    auto sb = src->piece_offsets(), tb = tgt->piece_offsets();
    auto ssizes = src->block_sizes();

    EqHom h;
    h.source = src;
    h.target = tgt;
    h.unital = true;
    std::vector<std::optional<Arrangement>> blocks(static_cast<std::size_t>(tgt->block_count()));
    for (std::size_t t = 0; t < tgt->pieces.size(); ++t) {
        const auto& tp = tgt->pieces[t];
        const int B = tb[t];
        std::vector<const PairPlan*> row;
        for (const auto& pp : plan.pairs)
            if (pp.target_piece == static_cast<int>(t)) row.push_back(&pp);
        if (tp.kind == PieceKind::Fixed) {
            std::vector<Slot> slots;
            std::vector<Mat> models, diagonalizers;
            for (const auto* pp : row) {
                const auto& sp = src->pieces[static_cast<std::size_t>(pp->source_piece)];
                const int A = sb[static_cast<std::size_t>(pp->source_piece)];
                if (pp->tag == CaseTag::FF) {
                    const int f = static_cast<int>(pp->phases.size());
                    if (f == 0) continue;
                    slots.push_back({A, f, pp->phases});
                    Mat m = kron(*sp.v, Mat::p_diag(ctx, pp->phases));
                    diagonalizers.push_back(Mat::identity(ctx, m.rows()));
                    models.push_back(std::move(m));
                } else {
                    const int f = pp->params[0];
                    if (f == 0) continue;
                    for (int q = 0; q < p; ++q) slots.push_back({A + q, f, {}});
                    const int kf = sp.n * f;
                    // block shift S (x) I, diagonalized by the Fourier matrix
                    models.push_back(kron(cyclic_shift(ctx, p), Mat::identity(ctx, kf)));
                    diagonalizers.push_back(kron(fourier_matrix(ctx), Mat::identity(ctx, kf)));
                }
            }
            if (models.empty()) throw Error(ErrorCode::PackingInfeasible, "target piece " + std::to_string(t) + " receives nothing");
            Mat model = direct_sum(models), fd = direct_sum(diagonalizers);
            if (model.rows() != tp.n)
                throw Error(ErrorCode::PackingInfeasible, "target piece " + std::to_string(t) + ": packed size " +
                                                              std::to_string(model.rows()) + " != " + std::to_string(tp.n));
            Mat d = fd.dagger() * model * fd;
            Mat q(ctx, 1, 1);
            try {
                q = match_diagonals(*tp.v, d, p);
            } catch (const Error& e) {
                throw Error(ErrorCode::PackingInfeasible, "target piece " + std::to_string(t) + ": " + e.what());
            }
            Mat x = q * fd.dagger();
            blocks[static_cast<std::size_t>(B)] = Arrangement{std::move(slots), std::move(x)};
        } else {
            // block t_0 first; block t_j is psi_0 o alpha^{-j}
            std::vector<Slot> slots0;
            std::vector<std::pair<const IrredPiece*, int>> fixed_slot;  // piece, mult (null for Cycle slots)
            for (const auto* pp : row) {
                const auto& sp = src->pieces[static_cast<std::size_t>(pp->source_piece)];
                const int A = sb[static_cast<std::size_t>(pp->source_piece)];
                if (pp->tag == CaseTag::FC) {
                    if (pp->params[0] == 0) continue;
                    slots0.push_back({A, pp->params[0], {}});
                    fixed_slot.push_back({&sp, pp->params[0]});
                } else {
                    for (int q = 0; q < p; ++q) {
                        const int c = pp->params[static_cast<std::size_t>(q)];
                        if (c == 0) continue;
                        slots0.push_back({A + q, c, {}});
                        fixed_slot.push_back({nullptr, c});
                    }
                }
            }
            int used = 0;
            for (const auto& sl : slots0) used += ssizes[static_cast<std::size_t>(sl.source)] * sl.mult;
            if (used != tp.n)
                throw Error(ErrorCode::PackingInfeasible, "target piece " + std::to_string(t) + ": packed size " + std::to_string(used) +
                                                              " != " + std::to_string(tp.n));
            for (int j = 0; j < p; ++j) {
                std::vector<Slot> slots;
                std::vector<Mat> parts;
                for (std::size_t k = 0; k < slots0.size(); ++k) {
                    Slot sl = slots0[k];
                    const auto [piece, mult] = fixed_slot[k];
                    if (piece) {
                        // U diagonal: (U^dagger)^j
                        parts.push_back(kron(piece->v->dagger().pow(j), Mat::identity(ctx, mult)));
                    } else {
                        const int pc = src->block_piece()[static_cast<std::size_t>(sl.source)];
                        const int base = sb[static_cast<std::size_t>(pc)];
                        sl.source = base + mod(sl.source - base + j, p);
                        parts.push_back(Mat::identity(ctx, ssizes[static_cast<std::size_t>(sl.source)] * mult));
                    }
                    slots.push_back(sl);
                }
                blocks[static_cast<std::size_t>(B + j)] = Arrangement{std::move(slots), direct_sum(parts)};
            }
        }
    }
    for (auto& b : blocks) h.blocks.push_back(std::move(*b));
    auto hv = hom_validate(h);
    if (!hv.ok()) throw Error(ErrorCode::LiftFailed, "constructed hom fails validation:\n" + hv.to_text());
    auto got = induced_map(h);
    if (!(got == kp)) throw Error(ErrorCode::LiftFailed, "induced map of the constructed hom differs from the requested pair");
    return h;
}

// ---------------------------------------------------------------------------
// uniqueness

bool is_fixed(const CanonicalForm& c, const Element& w) { return apply_action(c.system(), w) == w; }

Report check_correction(const Element& w, const EqHom& h1, const EqHom& h2) {
    Report rep;
    auto sizes = h1.target->block_sizes();
    if (w.size() != sizes.size()) {
        rep.fail("W", "one component per target block");
        return rep;
    }
    for (std::size_t t = 0; t < w.size(); ++t)
        if (w[t].rows() != sizes[t] || !is_unitary(w[t])) rep.fail("W block " + std::to_string(t), "W^dagger W = I");
    if (!rep.ok()) return rep;
    if (!is_fixed(*h1.target, w)) rep.fail("W", "beta(W) = W");
    if (!same_map(conjugate_hom(w, h2), h1)) rep.fail("W", "Ad W o h2 = h1 on all matrix units");
    return rep;
}

namespace {

struct Normalized {
    std::vector<Slot> slots;  // merged, sorted by source
    Mat x;
};

// Rewrites block t of h with one slot per source block in increasing order.
Normalized normalize_block(const EqHom& h, int t, const std::vector<int>& ssizes, int nt) {
    const FieldContext& ctx = *h.target->ctx;
    const Arrangement& ar = h.blocks[static_cast<std::size_t>(t)];
    std::map<int, std::vector<std::pair<int, int>>> by_source;  // source -> (old offset, mult)
    std::map<int, std::vector<int>> phases;
    std::map<int, bool> all_phased;
    int off = 0;
    for (const auto& sl : ar.slots) {
        by_source[sl.source].push_back({off, sl.mult});
        if (!all_phased.count(sl.source)) all_phased[sl.source] = true;
        all_phased[sl.source] = all_phased[sl.source] && !sl.phases.empty();
        phases[sl.source].insert(phases[sl.source].end(), sl.phases.begin(), sl.phases.end());
        off += ssizes[static_cast<std::size_t>(sl.source)] * sl.mult;
    }
    const int filled = off;
    Normalized out{{}, Mat(ctx, 1, 1)};
    std::vector<int> perm;  // new index -> old index
    for (const auto& [s, parts] : by_source) {
        const int ns = ssizes[static_cast<std::size_t>(s)];
        int total = 0;
        for (const auto& pr : parts) total += pr.second;
        out.slots.push_back({s, total, all_phased[s] ? phases[s] : std::vector<int>{}});
        for (int i = 0; i < ns; ++i)
            for (const auto& [o, m] : parts)
                for (int c = 0; c < m; ++c) perm.push_back(o + i * m + c);
    }
    for (int q = filled; q < nt; ++q) perm.push_back(q);
    bool moved = false;
    for (std::size_t q = 0; q < perm.size(); ++q) moved = moved || perm[q] != static_cast<int>(q);
    out.x = moved ? ar.x * Mat::permutation(ctx, perm) : ar.x;
    return out;
}

// Orthogonal (unnormalized) eigenvectors of an order-p unitary, grouped by eigenvalue.
std::vector<std::vector<Mat>> eigenvectors(const Mat& l, int p) {
    auto sd = spectral(l, p);
    const int n = l.rows();
    std::vector<std::vector<Mat>> out(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k) {
        const Mat& pk = sd.projections[static_cast<std::size_t>(k)];
        auto& vs = out[static_cast<std::size_t>(k)];
        for (int j = 0; j < n && static_cast<int>(vs.size()) < sd.multiplicities[static_cast<std::size_t>(k)]; ++j) {
            Mat v = pk.block(0, j, n, 1);
            for (const auto& u : vs) {
                Scalar uv = (u.dagger() * v)(0, 0);
                if (uv.is_zero()) continue;
                Scalar uu = (u.dagger() * u)(0, 0);
                v = v - u * (uv / uu);
            }
            if (!v.is_zero()) vs.push_back(std::move(v));
        }
    }
    return out;
}

// Unitary z with l1 z = z l2, or nullopt.
std::optional<Mat> intertwining_unitary(const Mat& l1, const Mat& l2, int p, std::string& method) {
    const FieldContext& ctx = l1.context();
    const int m = l1.rows();
    if (l1.is_diagonal() && l2.is_diagonal()) {
        method = "diagonal matching";
        try {
            return match_diagonals(l1, l2, p);
        } catch (const Error&) {
            return std::nullopt;
        }
    }
    // eigenbasis route: z = sum_j b1_j b2_j^dagger / sqrt(|b1_j|^2 |b2_j|^2)
    try {
        auto e1 = eigenvectors(l1, p), e2 = eigenvectors(l2, p);
        Mat z(ctx, m, m);
        bool ok = true;
        for (int k = 0; k < p && ok; ++k) {
            const auto& a = e1[static_cast<std::size_t>(k)];
            const auto& b = e2[static_cast<std::size_t>(k)];
            if (a.size() != b.size()) return std::nullopt;
            for (std::size_t j = 0; j < a.size() && ok; ++j) {
                Scalar na = (a[j].dagger() * a[j])(0, 0), nb = (b[j].dagger() * b[j])(0, 0);
                Scalar prod = na * nb;
                if (!prod.is_rational()) {
                    ok = false;
                    break;
                }
                auto s = norm_root(ctx, prod.rational_part());
                if (!s) {
                    ok = false;
                    break;
                }
                z += a[j] * b[j].dagger() * s->inv();
            }
        }
        if (ok && is_unitary(z) && l1 * z == z * l2) {
            method = "eigenbasis";
            return z;
        }
    } catch (const Error&) {
    }
    // signed permutations inside the intertwiner space
    if (m <= 5) {
        auto perm = iota_vec(m);
        do {
            for (int signs = 0; signs < (1 << m); ++signs) {
                std::vector<Scalar> d;
                for (int i = 0; i < m; ++i) d.push_back((signs >> i) & 1 ? -Scalar::one(ctx) : Scalar::one(ctx));
                Mat z = Mat::permutation(ctx, perm) * Mat::diag(ctx, d);
                if (l1 * z == z * l2) {
                    method = "signed permutation search";
                    return z;
                }
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return std::nullopt;
}

}  // namespace

EquivResult equiv_unitary(const EqHom& h1, const EqHom& h2) {
    if (!h1.source->same_system(*h2.source) || !h1.target->same_system(*h2.target))
        throw Error(ErrorCode::SystemMismatch, "the two homs have different source or target");
    const FieldContext& ctx = *h1.target->ctx;
    const int p = ctx.p();
    auto k1 = induced_map(h1), k2 = induced_map(h2);
    if (!(k1.f == k2.f) || !(k1.phi == k2.phi)) {
        std::ostringstream os;
        auto show = [&](const IntMat& m) {
            std::string s = "[";
            for (const auto& r : m) {
                s += "[";
                for (std::size_t j = 0; j < r.size(); ++j) s += (j ? "," : "") + std::to_string(r[j]);
                s += "]";
            }
            return s + "]";
        };
        os << "F1=" << show(k1.f) << " F2=" << show(k2.f) << " phi1=" << show(k1.phi) << " phi2=" << show(k2.phi);
        throw Error(ErrorCode::KDataMismatch, os.str());
    }
    const CanonicalForm& tgt = *h1.target;
    const CanonicalForm& src = *h1.source;
    auto ssizes = src.block_sizes();
    auto tsizes = tgt.block_sizes();
    auto tb = tgt.piece_offsets();
    auto spiece = src.block_piece();
    auto soff = src.piece_offsets();
    EquivResult res;
    res.w.assign(tsizes.size(), Mat(ctx, 1, 1));
    for (std::size_t t = 0; t < tgt.pieces.size(); ++t) {
        const auto& tp = tgt.pieces[t];
        const int B = tb[t];
        auto n1 = normalize_block(h1, B, ssizes, tp.n), n2 = normalize_block(h2, B, ssizes, tp.n);
        auto shape = [](const std::vector<Slot>& v) {
            std::vector<std::pair<int, int>> r;
            for (const auto& s : v) r.push_back({s.source, s.mult});
            return r;
        };
        if (shape(n1.slots) != shape(n2.slots))
            throw Error(ErrorCode::KDataMismatch, "target block " + std::to_string(B) + ": slot multiplicities differ");
        if (tp.kind == PieceKind::Cycle) {
            Mat w = n1.x * n2.x.dagger();
            for (int j = 0; j < p; ++j) res.w[static_cast<std::size_t>(B + j)] = w;
            res.witness.blocks.push_back({B, "equal components X Y^dagger", {}, {}, Mat::identity(ctx, tp.n), w});
            continue;
        }
        const Mat& v = *tp.v;
        Mat lam1 = n1.x.dagger() * v * n1.x, lam2 = n2.x.dagger() * v * n2.x;
        std::vector<Mat> zparts;
        BlockWitness bw{B, "", {}, {}, Mat(ctx, 1, 1), Mat(ctx, 1, 1)};
        std::vector<std::string> methods;
        int off = 0;
        std::size_t k = 0;
        while (k < n1.slots.size()) {
            const Slot& sl = n1.slots[k];
            const int ns = ssizes[static_cast<std::size_t>(sl.source)];
            const int m = sl.mult;
            const auto& sp = src.pieces[static_cast<std::size_t>(spiece[static_cast<std::size_t>(sl.source)])];
            if (sp.kind == PieceKind::Fixed) {
                const int len = ns * m;
                Mat b1 = lam1.block(off, off, len, len), b2 = lam2.block(off, off, len, len);
                Scalar u00inv = (*sp.v)(0, 0).inv();
                Mat l1 = b1.block(0, 0, m, m) * u00inv, l2 = b2.block(0, 0, m, m) * u00inv;
                if (!(kron(*sp.v, l1) == b1) || !(kron(*sp.v, l2) == b2))
                    throw Error(ErrorCode::NonDiagonalCommutant, "target block " + std::to_string(B) + ", source block " +
                                                                     std::to_string(sl.source) + ": X^dagger V X is not U (x) L on the slot");
                std::string method;
                auto z = intertwining_unitary(l1, l2, p, method);
                if (!z)
                    throw Error(ErrorCode::UnitaryNotFoundInField, "target block " + std::to_string(B) + ", source block " +
                                                                       std::to_string(sl.source) + ": no unitary Z with L1 Z = Z L2 found in the field");
                methods.push_back(method);
                bw.l1.push_back(l1);
                bw.l2.push_back(l2);
                zparts.push_back(kron(Mat::identity(ctx, ns), *z));
                off += len;
                ++k;
            } else {
                // the p blocks of a Cycle source sit consecutively with equal multiplicity
                const int base = soff[static_cast<std::size_t>(spiece[static_cast<std::size_t>(sl.source)])];
                if (sl.source != base || k + static_cast<std::size_t>(p) > n1.slots.size())
                    throw Error(ErrorCode::CorrectionFailed, "target block " + std::to_string(B) + ": incomplete Cycle orbit in the arrangement");
                const int len = ns * m;
                std::vector<Mat> l1s, l2s;
                for (int q = 0; q < p; ++q) {
                    const Slot& sq = n1.slots[k + static_cast<std::size_t>(q)];
                    if (sq.source != base + q || sq.mult != m)
                        throw Error(ErrorCode::CorrectionFailed, "target block " + std::to_string(B) + ": unequal Cycle multiplicities");
                    const int from = off + q * len, to = off + mod(q + 1, p) * len;
                    Mat b1 = lam1.block(to, from, len, len), b2 = lam2.block(to, from, len, len);
                    Mat l1 = b1.block(0, 0, m, m), l2 = b2.block(0, 0, m, m);
                    if (!(kron(Mat::identity(ctx, ns), l1) == b1) || !(kron(Mat::identity(ctx, ns), l2) == b2))
                        throw Error(ErrorCode::NonDiagonalCommutant,
                                    "target block " + std::to_string(B) + ": shift component is not I (x) L");
                    l1s.push_back(l1);
                    l2s.push_back(l2);
                }
                std::vector<Mat> zs{Mat::identity(ctx, m)};
                for (int q = 0; q + 1 < p; ++q)
                    zs.push_back(l1s[static_cast<std::size_t>(q)] * zs.back() * l2s[static_cast<std::size_t>(q)].dagger());
                if (!(l1s.back() * zs.back() * l2s.back().dagger() == zs.front()))
                    throw Error(ErrorCode::CorrectionFailed, "target block " + std::to_string(B) + ": telescoping product does not close");
                for (const auto& z : zs) zparts.push_back(kron(Mat::identity(ctx, ns), z));
                for (auto& l : l1s) bw.l1.push_back(std::move(l));
                for (auto& l : l2s) bw.l2.push_back(std::move(l));
                methods.push_back("telescoping");
                off += p * len;
                k += static_cast<std::size_t>(p);
            }
        }
        if (off < tp.n) {
            Mat l1 = lam1.block(off, off, tp.n - off, tp.n - off), l2 = lam2.block(off, off, tp.n - off, tp.n - off);
            std::string method;
            auto z = intertwining_unitary(l1, l2, p, method);
            if (!z) throw Error(ErrorCode::UnitaryNotFoundInField, "target block " + std::to_string(B) + ": padding");
            zparts.push_back(*z);
            methods.push_back("padding " + method);
        }
        Mat z = direct_sum(zparts);
        if (!(lam1 * z == z * lam2))
            throw Error(ErrorCode::CorrectionFailed, "target block " + std::to_string(B) + ": Z does not intertwine the implementing unitaries");
        Mat w = n1.x * z * n2.x.dagger();
        std::string joined;
        for (const auto& s : methods) joined += (joined.empty() ? "" : ", ") + s;
        bw.method = joined;
        bw.z = z;
        bw.w = w;
        res.w[static_cast<std::size_t>(B)] = w;
        res.witness.blocks.push_back(std::move(bw));
    }
    auto rep = check_correction(res.w, h1, h2);
    if (!rep.ok()) throw Error(ErrorCode::CorrectionFailed, rep.to_text());
    return res;
}

// ---------------------------------------------------------------------------
// ksearch

namespace {

// All x in [0,bound]^n with sum_j x_j coef[e][j] (== or <=) target[e] for every e.
void enumerate_rows(const std::vector<IntVec>& coef, const IntVec& target, int n, int bound, bool equal,
                    std::vector<IntVec>& out) {
    IntVec x(static_cast<std::size_t>(n), 0);
    IntVec acc(target.size(), 0);
    std::function<void(int)> rec = [&](int j) {
        if (j == n) {
            if (equal && acc != target) return;
            out.push_back(x);
            return;
        }
        for (int v = 0; v <= bound; ++v) {
            bool over = false;
            for (std::size_t e = 0; e < coef.size(); ++e) {
                acc[e] += v * coef[e][static_cast<std::size_t>(j)];
                if (acc[e] > target[e]) over = true;
            }
            x[static_cast<std::size_t>(j)] = v;
            if (!over) rec(j + 1);
            for (std::size_t e = 0; e < coef.size(); ++e) acc[e] -= v * coef[e][static_cast<std::size_t>(j)];
            if (over) break;  // larger v only adds more (coefficients are nonnegative)
        }
        x[static_cast<std::size_t>(j)] = 0;
    };
    rec(0);
}

std::vector<int> perm_of(const IntMat& m) {
    std::vector<int> s;
    for (const auto& row : m) s.push_back(static_cast<int>(std::find(row.begin(), row.end(), 1) - row.begin()));
    return s;
}

// Matrices M (rows x cols) with M[sb(t)][s] = M[t][sa^{-1}(s)], each row drawn from rowsols(t).
void enumerate_equivariant(int rows, int cols, const std::vector<int>& sb, const std::vector<int>& sa,
                           const std::function<const std::vector<IntVec>&(int)>& rowsols,
                           const std::function<bool(int, const IntVec&)>& row_ok, const std::function<void(const IntMat&)>& emit) {
    std::vector<int> sa_inv(static_cast<std::size_t>(cols));
    for (int s = 0; s < cols; ++s) sa_inv[static_cast<std::size_t>(sa[static_cast<std::size_t>(s)])] = s;
    IntMat m(static_cast<std::size_t>(rows));
    std::vector<bool> set(static_cast<std::size_t>(rows), false);
    std::function<void(int)> rec = [&](int t) {
        while (t < rows && set[static_cast<std::size_t>(t)]) ++t;
        if (t == rows) {
            emit(m);
            return;
        }
        for (const auto& r : rowsols(t)) {
            // propagate around the orbit of t
            std::vector<int> touched;
            bool ok = true;
            IntVec cur = r;
            int u = t;
            for (;;) {
                m[static_cast<std::size_t>(u)] = cur;
                set[static_cast<std::size_t>(u)] = true;
                touched.push_back(u);
                int nu = sb[static_cast<std::size_t>(u)];
                IntVec next(static_cast<std::size_t>(cols));
                for (int s = 0; s < cols; ++s) next[static_cast<std::size_t>(s)] = cur[static_cast<std::size_t>(sa_inv[static_cast<std::size_t>(s)])];
                if (nu == t) {
                    ok = next == r;
                    break;
                }
                if (!row_ok(nu, next)) {
                    ok = false;
                    break;
                }
                cur = next;
                u = nu;
            }
            if (ok) rec(t + 1);
            for (int x : touched) set[static_cast<std::size_t>(x)] = false;
        }
    };
    rec(0);
}

}  // namespace

namespace {

// use_special = false drops the special-element clause from the row constraints;
// emit sees every candidate that passes the remaining linear conditions.
void ksearch_impl(const KInvariant& a, const KInvariant& b, int bound, bool unital, bool use_special,
                  const std::function<void(KPair)>& emit_pair) {
    if (bound < 1) throw Error(ErrorCode::ParseError, "bound must be >= 1");
    // F rows: sum_s F[t][s] unit_A[s] (=|<=) unit_B[t]
    std::vector<std::vector<IntVec>> frows(static_cast<std::size_t>(b.m));
    for (int t = 0; t < b.m; ++t) enumerate_rows({a.unit}, {b.unit[static_cast<std::size_t>(t)]}, a.m, bound, unital, frows[static_cast<std::size_t>(t)]);
    auto frow_ok = [&](int t, const IntVec& r) {
        int s = 0;
        for (int j = 0; j < a.m; ++j) s += r[static_cast<std::size_t>(j)] * a.unit[static_cast<std::size_t>(j)];
        return unital ? s == b.unit[static_cast<std::size_t>(t)] : s <= b.unit[static_cast<std::size_t>(t)];
    };
    auto sa = perm_of(a.act), sb = perm_of(b.act);
    auto da = perm_of(a.dual_act), db = perm_of(b.dual_act);
    // phi row r: special and the iota square
    std::vector<IntVec> pcoef;
    if (use_special) pcoef.push_back(a.special);
    for (int j = 0; j < a.m; ++j) {
        IntVec c;
        for (int s = 0; s < a.mc; ++s) c.push_back(a.iota[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)]);
        pcoef.push_back(c);
    }
    enumerate_equivariant(
        b.m, a.m, sb, sa, [&](int t) -> const std::vector<IntVec>& { return frows[static_cast<std::size_t>(t)]; }, frow_ok,
        [&](const IntMat& f) {
            IntMat rhs = int_mul(b.iota, f, b.m);  // mCB x mA
            std::vector<std::vector<IntVec>> prow(static_cast<std::size_t>(b.mc));
            std::vector<IntVec> targets(static_cast<std::size_t>(b.mc));
            for (int r = 0; r < b.mc; ++r) {
                IntVec tg;
                if (use_special) tg.push_back(b.special[static_cast<std::size_t>(r)]);
                for (int j = 0; j < a.m; ++j) tg.push_back(rhs[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)]);
                targets[static_cast<std::size_t>(r)] = tg;
                enumerate_rows(pcoef, tg, a.mc, bound, true, prow[static_cast<std::size_t>(r)]);
            }
            auto prow_ok = [&](int r, const IntVec& x) {
                for (std::size_t e = 0; e < pcoef.size(); ++e) {
                    int s = 0;
                    for (int j = 0; j < a.mc; ++j) s += x[static_cast<std::size_t>(j)] * pcoef[e][static_cast<std::size_t>(j)];
                    if (s != targets[static_cast<std::size_t>(r)][e]) return false;
                }
                return true;
            };
            enumerate_equivariant(
                b.mc, a.mc, db, da, [&](int r) -> const std::vector<IntVec>& { return prow[static_cast<std::size_t>(r)]; }, prow_ok,
                [&](const IntMat& phi) { emit_pair(KPair{f, phi, unital}); });
        });
}

bool pair_less(const KPair& x, const KPair& y) { return std::tie(x.f, x.phi) < std::tie(y.f, y.phi); }

}  // namespace

std::vector<KPair> ksearch(const KInvariant& a, const KInvariant& b, int bound, bool unital) {
    std::vector<KPair> out;
    ksearch_impl(a, b, bound, unital, true, [&](KPair kp) {
        if (check_pair(kp, a, b).ok()) out.push_back(std::move(kp));
    });
    std::sort(out.begin(), out.end(), pair_less);
    return out;
}

std::vector<std::pair<KPair, Report>> special_obstructions(const KInvariant& a, const KInvariant& b, int bound, bool unital) {
    std::vector<std::pair<KPair, Report>> out;
    ksearch_impl(a, b, bound, unital, false, [&](KPair kp) {
        auto rep = check_pair(kp, a, b);
        if (rep.ok()) return;
        for (const auto& v : rep.violations)
            if (v.identity.rfind("(d)", 0) != 0) return;
        out.push_back({std::move(kp), std::move(rep)});
    });
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return pair_less(x.first, y.first); });
    return out;
}

// ---------------------------------------------------------------------------
// towers and intertwining

Report tower_validate(const Tower& t) {
    Report rep;
    if (t.systems.empty()) rep.fail("tower", "at least one stage");
    if (t.maps.size() + 1 != t.systems.size()) {
        rep.fail("tower", "one connecting map between consecutive stages");
        return rep;
    }
    for (std::size_t i = 0; i < t.maps.size(); ++i) {
        const auto& h = t.maps[i];
        const std::string where = "map " + std::to_string(i) + "->" + std::to_string(i + 1);
        if (!h.source->same_system(*t.systems[i]) || !h.target->same_system(*t.systems[i + 1])) {
            rep.fail(where, "connects consecutive stages");
            continue;
        }
        if (!h.unital) rep.fail(where, "unital");
        rep.merge(hom_validate(h), where);
    }
    return rep;
}

EqHom tower_map(const Tower& t, int i, int j) {
    if (i < 0 || j <= i || j >= t.length()) throw Error(ErrorCode::InvalidTower, "no connecting map " + std::to_string(i) + "->" + std::to_string(j));
    EqHom h = t.maps[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < j; ++k) h = hom_compose(t.maps[static_cast<std::size_t>(k)], h);
    return h;
}

namespace {

struct KPlan {
    std::vector<int> n, m;
    std::vector<KPair> psi, chi;
};

class TowerK {
public:
    explicit TowerK(const Tower& t) : t_(t) {
        for (const auto& s : t.systems) inv_.push_back(invariant_of(*s));
        for (const auto& h : t.maps) step_.push_back(induced_map(h));
    }
    const KInvariant& inv(int i) const { return inv_[static_cast<std::size_t>(i)]; }
    KPair pair(int i, int j) const {
        KPair k = step_[static_cast<std::size_t>(i)];
        for (int q = i + 1; q < j; ++q) k = compose_pairs(step_[static_cast<std::size_t>(q)], k);
        return k;
    }
    int length() const { return t_.length(); }

private:
    const Tower& t_;
    std::vector<KInvariant> inv_;
    std::vector<KPair> step_;
};

bool same_k(const KPair& x, const KPair& y) { return x.f == y.f && x.phi == y.phi; }

}  // namespace

IntertwiningCertificate intertwine(const Tower& ta, const Tower& tb, const IntertwineOptions& opt) {
    for (const auto* t : {&ta, &tb}) {
        auto rep = tower_validate(*t);
        if (!rep.ok()) throw Error(ErrorCode::InvalidTower, std::string(t == &ta ? "tower A" : "tower B") + ":\n" + rep.to_text());
    }
    if (opt.depth < 1) throw Error(ErrorCode::ReindexFailed, "depth must be >= 1");
    TowerK ka(ta), kb(tb);
    KPlan plan;
    std::string obstruction;
    const bool given = !opt.pairs.empty();
    if (given && static_cast<int>(opt.pairs.size()) < opt.depth)
        throw Error(ErrorCode::ReindexFailed, "need " + std::to_string(opt.depth) + " forward pairs, got " + std::to_string(opt.pairs.size()));

    // depth-first search over stage indices and K-pairs
    std::function<bool(int)> forward, backward;
    auto note = [&](const std::string& s) {
        if (obstruction.empty()) obstruction = s;
    };
    // choose psi_r : A_{n_r} -> B_{m_r}; plan.n has r+1 entries
    forward = [&](int r) -> bool {
        const int nr = plan.n.back();
        const int mprev = r == 0 ? -1 : plan.m.back();
        for (int mr = mprev + 1; mr < kb.length(); ++mr) {
            if (given && mr != r) continue;
            std::vector<KPair> cands;
            if (given) {
                const KPair& kp = opt.pairs[static_cast<std::size_t>(r)];
                auto rep = check_pair(kp, ka.inv(nr), kb.inv(mr));
                if (!rep.ok()) {
                    note("forward pair " + std::to_string(r) + " fails check_pair:\n" + rep.to_text());
                    continue;
                }
                cands.push_back(kp);
            } else {
                cands = ksearch(ka.inv(nr), kb.inv(mr), opt.bound);
            }
            if (r > 0) {
                KPair want = kb.pair(plan.m.back(), mr);
                std::vector<KPair> keep;
                for (auto& c : cands)
                    if (same_k(compose_pairs(c, plan.chi.back()), want)) keep.push_back(std::move(c));
                if (keep.empty())
                    note("no psi_" + std::to_string(r) + ": A_" + std::to_string(nr) + " -> B_" + std::to_string(mr) +
                         " closes the triangle over B_" + std::to_string(plan.m.back()) + " -> B_" + std::to_string(mr));
                cands = std::move(keep);
            } else if (cands.empty()) {
                note("no K-pair A_" + std::to_string(nr) + " -> B_" + std::to_string(mr) + " within bound " + std::to_string(opt.bound));
            }
            for (auto& c : cands) {
                plan.m.push_back(mr);
                plan.psi.push_back(c);
                if (backward(r)) return true;
                plan.m.pop_back();
                plan.psi.pop_back();
            }
        }
        return false;
    };
    // choose chi_r : B_{m_r} -> A_{n_{r+1}}
    backward = [&](int r) -> bool {
        const int mr = plan.m.back();
        const int nr = plan.n.back();
        for (int nn = nr + 1; nn < ka.length(); ++nn) {
            if (given && nn != r + 1) continue;
            KPair want = ka.pair(nr, nn);
            auto cands = ksearch(kb.inv(mr), ka.inv(nn), opt.bound);
            std::vector<KPair> keep;
            for (auto& c : cands)
                if (same_k(compose_pairs(c, plan.psi.back()), want)) keep.push_back(std::move(c));
            if (keep.empty())
                note("no chi_" + std::to_string(r) + ": B_" + std::to_string(mr) + " -> A_" + std::to_string(nn) +
                     " closes the triangle over A_" + std::to_string(nr) + " -> A_" + std::to_string(nn));
            for (auto& c : keep) {
                plan.n.push_back(nn);
                plan.chi.push_back(c);
                if (r + 1 == opt.depth || forward(r + 1)) return true;
                plan.n.pop_back();
                plan.chi.pop_back();
            }
        }
        return false;
    };
    plan.n.push_back(0);
    if (!forward(0))
        throw Error(ErrorCode::ReindexFailed, "no K-level zigzag of depth " + std::to_string(opt.depth) + " within the towers" +
                                                  (obstruction.empty() ? std::string() : "; first obstruction: " + obstruction));

    IntertwiningCertificate cert;
    cert.a = ta;
    cert.b = tb;
    cert.n = plan.n;
    cert.m = plan.m;
    cert.psi_pairs = plan.psi;
    cert.chi_pairs = plan.chi;
    auto lift_at = [&](const KPair& kp, std::shared_ptr<const CanonicalForm> s, std::shared_ptr<const CanonicalForm> t, const std::string& what) {
        try {
            return lift(kp, s, t);
        } catch (const Error& e) {
            throw Error(ErrorCode::LiftFailed, what + ": " + e.what());
        }
    };
    for (int r = 0; r < opt.depth; ++r) {
        const int nr = plan.n[static_cast<std::size_t>(r)], mr = plan.m[static_cast<std::size_t>(r)];
        const int nn = plan.n[static_cast<std::size_t>(r + 1)];
        const std::string psi_name = "psi " + std::to_string(r), chi_name = "chi " + std::to_string(r);
        EqHom psi = lift_at(plan.psi[static_cast<std::size_t>(r)], ta.systems[static_cast<std::size_t>(nr)], tb.systems[static_cast<std::size_t>(mr)], psi_name);
        if (r > 0) {
            const int mp = plan.m[static_cast<std::size_t>(r - 1)];
            EqHom want = tower_map(tb, mp, mr);
            try {
                auto eq = equiv_unitary(want, hom_compose(psi, cert.chi.back()));
                cert.corrections.push_back({psi_name, psi, eq.w});
                psi = conjugate_hom(eq.w, psi);
            } catch (const Error& e) {
                throw Error(ErrorCode::CorrectionFailed, psi_name + ": " + e.what());
            }
        }
        cert.psi.push_back(psi);
        EqHom chi = lift_at(plan.chi[static_cast<std::size_t>(r)], tb.systems[static_cast<std::size_t>(mr)], ta.systems[static_cast<std::size_t>(nn)], chi_name);
        try {
            auto eq = equiv_unitary(tower_map(ta, nr, nn), hom_compose(chi, psi));
            cert.corrections.push_back({chi_name, chi, eq.w});
            chi = conjugate_hom(eq.w, chi);
        } catch (const Error& e) {
            throw Error(ErrorCode::CorrectionFailed, chi_name + ": " + e.what());
        }
        cert.chi.push_back(chi);
    }
    return cert;
}

Report verify(const IntertwiningCertificate& cert) {
    Report rep;
    rep.merge(tower_validate(cert.a), "tower A");
    rep.merge(tower_validate(cert.b), "tower B");
    auto check_form = [&](const CanonicalForm& c, const std::string& where) {
        for (std::size_t k = 0; k < c.pieces.size(); ++k) {
            const auto& pc = c.pieces[k];
            if (pc.kind == PieceKind::Fixed) {
                if (!pc.v || !pc.v->is_diagonal() || !is_unitary(*pc.v) || !pc.v->pow(c.p()).is_identity())
                    rep.fail(where + " piece " + std::to_string(k), "V diagonal unitary with V^p = I");
            }
        }
        for (std::size_t k = 0; k < c.conjugators.size(); ++k)
            if (!is_unitary(c.conjugators[k])) rep.fail(where + " iso block " + std::to_string(k), "conjugator unitary");
    };
    for (std::size_t i = 0; i < cert.a.systems.size(); ++i) check_form(*cert.a.systems[i], "A_" + std::to_string(i));
    for (std::size_t i = 0; i < cert.b.systems.size(); ++i) check_form(*cert.b.systems[i], "B_" + std::to_string(i));
    const std::size_t d = cert.psi.size();
    if (d == 0 || cert.chi.size() != d || cert.psi_pairs.size() != d || cert.chi_pairs.size() != d || cert.n.size() != d + 1 ||
        cert.m.size() != d) {
        rep.fail("certificate", "consistent lengths: d forward maps, d backward maps, d+1 A-stages, d B-stages");
        return rep;
    }
    for (std::size_t r = 0; r < cert.n.size(); ++r)
        if (cert.n[r] < 0 || cert.n[r] >= cert.a.length() || (r > 0 && cert.n[r] <= cert.n[r - 1]))
            rep.fail("index map n", "strictly increasing within tower A");
    for (std::size_t r = 0; r < cert.m.size(); ++r)
        if (cert.m[r] < 0 || cert.m[r] >= cert.b.length() || (r > 0 && cert.m[r] <= cert.m[r - 1]))
            rep.fail("index map m", "strictly increasing within tower B");
    if (!rep.ok()) return rep;
    auto stage_ok = [&](const EqHom& h, const CanonicalForm& s, const CanonicalForm& t, const std::string& where) {
        if (!h.source->same_system(s) || !h.target->same_system(t)) {
            rep.fail(where, "connects the recorded stages");
            return false;
        }
        auto hv = hom_validate(h);
        rep.merge(hv, where);
        return hv.ok();
    };
    bool maps_ok = true;
    for (std::size_t r = 0; r < d; ++r) {
        const auto& A = cert.a.systems;
        const auto& B = cert.b.systems;
        const std::string pn = "psi " + std::to_string(r), cn = "chi " + std::to_string(r);
        bool ok1 = stage_ok(cert.psi[r], *A[static_cast<std::size_t>(cert.n[r])], *B[static_cast<std::size_t>(cert.m[r])], pn);
        bool ok2 = stage_ok(cert.chi[r], *B[static_cast<std::size_t>(cert.m[r])], *A[static_cast<std::size_t>(cert.n[r + 1])], cn);
        maps_ok = maps_ok && ok1 && ok2;
        if (ok1) {
            if (!(induced_map(cert.psi[r]) == cert.psi_pairs[r])) rep.fail(pn, "induced map = recorded K-pair");
            rep.merge(check_pair(cert.psi_pairs[r], invariant_of(*A[static_cast<std::size_t>(cert.n[r])]),
                                 invariant_of(*B[static_cast<std::size_t>(cert.m[r])])),
                      pn + " K-pair");
        }
        if (ok2) {
            if (!(induced_map(cert.chi[r]) == cert.chi_pairs[r])) rep.fail(cn, "induced map = recorded K-pair");
            rep.merge(check_pair(cert.chi_pairs[r], invariant_of(*B[static_cast<std::size_t>(cert.m[r])]),
                                 invariant_of(*A[static_cast<std::size_t>(cert.n[r + 1])])),
                      cn + " K-pair");
        }
    }
    rep.notes.clear();
    if (!rep.ok() || !maps_ok) return rep;
    for (const auto& c : cert.corrections) {
        const EqHom* corrected = nullptr;
        std::istringstream is(c.map);
        std::string kind;
        std::size_t r = 0;
        is >> kind >> r;
        if (kind == "psi" && r < d) corrected = &cert.psi[r];
        if (kind == "chi" && r < d) corrected = &cert.chi[r];
        if (!corrected) {
            rep.fail("correction " + c.map, "names a map of the certificate");
            continue;
        }
        auto hv = hom_validate(c.uncorrected);
        rep.merge(hv, "correction " + c.map + " uncorrected");
        if (!hv.ok()) continue;
        if (c.w.size() != corrected->blocks.size()) {
            rep.fail("correction " + c.map, "W has one component per target block");
            continue;
        }
        bool unit = true;
        for (std::size_t t = 0; t < c.w.size(); ++t)
            if (!is_unitary(c.w[t])) {
                rep.fail("correction " + c.map + " block " + std::to_string(t), "W^dagger W = I");
                unit = false;
            }
        if (!unit) continue;
        if (!is_fixed(*corrected->target, c.w)) rep.fail("correction " + c.map, "beta(W) = W");
        EqHom expect = conjugate_hom(c.w, c.uncorrected);
        bool exact = expect.blocks.size() == corrected->blocks.size();
        for (std::size_t t = 0; exact && t < expect.blocks.size(); ++t)
            exact = expect.blocks[t].slots == corrected->blocks[t].slots && expect.blocks[t].x == corrected->blocks[t].x;
        if (!exact) rep.fail("correction " + c.map, "corrected = Ad W o uncorrected (stored matrices)");
        if (!same_map(expect, *corrected)) rep.fail("correction " + c.map, "corrected = Ad W o uncorrected on matrix units");
    }
    for (std::size_t r = 0; r < d; ++r) {
        const int nr = cert.n[r], nn = cert.n[r + 1];
        EqHom ia = tower_map(cert.a, nr, nn);
        if (!same_map(hom_compose(cert.chi[r], cert.psi[r]), ia))
            rep.fail("triangle A_" + std::to_string(nr) + " -> A_" + std::to_string(nn), "chi_r o psi_r = connecting map on matrix units");
        if (!same_k(compose_pairs(cert.chi_pairs[r], cert.psi_pairs[r]), induced_map(ia)))
            rep.fail("K-triangle A_" + std::to_string(nr) + " -> A_" + std::to_string(nn), "chi_* psi_* = connecting map_*");
        if (r + 1 < d) {
            const int mr = cert.m[r], mn = cert.m[r + 1];
            EqHom ib = tower_map(cert.b, mr, mn);
            if (!same_map(hom_compose(cert.psi[r + 1], cert.chi[r]), ib))
                rep.fail("triangle B_" + std::to_string(mr) + " -> B_" + std::to_string(mn), "psi_{r+1} o chi_r = connecting map on matrix units");
            if (!same_k(compose_pairs(cert.psi_pairs[r + 1], cert.chi_pairs[r]), induced_map(ib)))
                rep.fail("K-triangle B_" + std::to_string(mr) + " -> B_" + std::to_string(mn), "psi_* chi_* = connecting map_*");
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> product_exponents(int p, int n) {
    std::vector<int> e{0};
    for (int k = 0; k < n; ++k) {
        std::vector<int> next;
        for (int x : e)
            for (int dd = 0; dd < p; ++dd) next.push_back((x + dd) % p);
        e = std::move(next);
    }
    return e;
}

}  // namespace

Tower product_tower(const FieldContext& ctx, int stages) {
    const int p = ctx.p();
    Tower t;
    for (int n = 0; n < stages; ++n) t.systems.push_back(std::make_shared<const CanonicalForm>(make_canonical(ctx, {fixed_piece(ctx, product_exponents(p, n))})));
    for (int n = 0; n + 1 < stages; ++n) {
        const int size = t.systems[static_cast<std::size_t>(n + 1)]->pieces[0].n;
        t.maps.push_back(EqHom{t.systems[static_cast<std::size_t>(n)], t.systems[static_cast<std::size_t>(n + 1)],
                               {{{Slot{0, p, iota_vec(p)}}, Mat::identity(ctx, size)}}, true});
    }
    return t;
}

Tower sorted_product_tower(const FieldContext& ctx, int stages) {
    const int p = ctx.p();
    Tower t;
    std::vector<Mat> q;  // Q_n^dagger v_n Q_n = sorted v_n
    for (int n = 0; n < stages; ++n) {
        auto e = product_exponents(p, n);
        auto s = e;
        std::sort(s.begin(), s.end());
        q.push_back(match_diagonals(Mat::p_diag(ctx, e), Mat::p_diag(ctx, s), p));
        t.systems.push_back(std::make_shared<const CanonicalForm>(make_canonical(ctx, {fixed_piece(ctx, s)})));
    }
    for (int n = 0; n + 1 < stages; ++n) {
        Mat x = q[static_cast<std::size_t>(n + 1)].dagger() * kron(q[static_cast<std::size_t>(n)], Mat::identity(ctx, p));
        t.maps.push_back(EqHom{t.systems[static_cast<std::size_t>(n)], t.systems[static_cast<std::size_t>(n + 1)], {{{Slot{0, p, {}}}, x}}, true});
    }
    return t;
}

Tower naive_tower(const FieldContext& ctx, int stages) {
    if (ctx.p() != 2) throw Error(ErrorCode::InvalidTower, "the doubling tower is a p = 2 example");
    Tower t;
    for (int n = 1; n <= stages; ++n) {
        std::vector<int> e(static_cast<std::size_t>(1 << n), 0);
        e.back() = 1;
        t.systems.push_back(std::make_shared<const CanonicalForm>(make_canonical(ctx, {fixed_piece(ctx, e)})));
    }
    for (int n = 1; n < stages; ++n) {
        const int sz = 1 << n;
        // diag(a, a) = shuffle of kron(a, I_2)
        std::vector<int> perm(static_cast<std::size_t>(2 * sz));
        for (int i = 0; i < sz; ++i)
            for (int c = 0; c < 2; ++c) perm[static_cast<std::size_t>(i * 2 + c)] = c * sz + i;
        t.maps.push_back(EqHom{t.systems[static_cast<std::size_t>(n - 1)], t.systems[static_cast<std::size_t>(n)],
                               {{{Slot{0, 2, {}}}, Mat::permutation(ctx, perm)}}, true});
    }
    return t;
}

}  // namespace afzp

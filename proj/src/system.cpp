#include "afzp/system.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace afzp {

namespace {

std::string blk(int i) { return "block " + std::to_string(i); }

int gcd_int(int a, int b) { return std::gcd(a, b); }

// mu with mu^p = lambda, or the documented errors.
Scalar absorb_twist(const Scalar& lambda, int p, const std::string& where) {
    auto ord = lambda.root_order();
    if (!ord)
        throw Error(ErrorCode::TwistNotRootOfUnity, where + ": holonomy scalar " + lambda.to_string() + " is not a root of unity");
    auto mu = root_of_unity_root(lambda, p);
    if (!mu) {
        const int n = lambda.context().order();
        const int need = p * *ord;
        const int lcm = n / gcd_int(n, need) * need;
        throw Error(ErrorCode::TwistRootOutsideField, where + ": a p-th root of the holonomy " + lambda.to_string() +
                                                          " needs Q(zeta_" + std::to_string(lcm) + "); rerun with --order " +
                                                          std::to_string(lcm));
    }
    return *mu;
}

Scalar inner(const Mat& x, int cx, const Mat& y, int cy) {
    Scalar s(x.context());
    for (int i = 0; i < x.rows(); ++i) {
        const Scalar& a = x(i, cx);
        const Scalar& b = y(i, cy);
        if (a.is_zero() || b.is_zero()) continue;
        s += a.conj() * b;
    }
    return s;
}

// Orthonormal eigenbasis of an order-p unitary, eigenvalue index increasing.
// Returns W with W^dagger u W diagonal, or throws.
std::pair<Mat, std::vector<int>> diagonalize(const Mat& u, int p, const std::string& where) {
    const FieldContext& ctx = u.context();
    const int n = u.rows();
    auto sd = spectral(u, p);
    Mat w(ctx, n, n);
    std::vector<int> exps;
    int col = 0;
    for (int k = 0; k < p; ++k) {
        const Mat& pk = sd.projections[static_cast<std::size_t>(k)];
        const int start = col;
        for (int j = 0; j < n && col - start < sd.multiplicities[static_cast<std::size_t>(k)]; ++j) {
            Mat v = pk.block(0, j, n, 1);
            for (int c = start; c < col; ++c) {
                Scalar coef = inner(w, c, v, 0);
                if (coef.is_zero()) continue;
                Mat wc = w.block(0, c, n, 1);
                v = v - wc * coef;  // columns already normalized
            }
            if (v.is_zero()) continue;
            Scalar nrm = inner(v, 0, v, 0);
            if (!nrm.is_rational())
                throw Error(ErrorCode::NonDiagonalizableWithinField,
                            where + ": eigenvector norm is irrational; re-present the input with a diagonal implementing unitary");
            auto s = sqrt_in_field(ctx, nrm.rational_part());
            if (!s)
                throw Error(ErrorCode::NonDiagonalizableWithinField,
                            where + ": normalizing an eigenvector needs sqrt(" + nrm.rational_part().to_string() +
                                ") outside the field; re-present the input with a diagonal implementing unitary");
            w.set_block(0, col, v * s->inv());
            exps.push_back(k);
            ++col;
        }
    }
    if (col != n) throw Error(ErrorCode::NonDiagonalizableWithinField, where + ": eigenbasis incomplete");
    return {w, exps};
}

}  // namespace

// ---------------------------------------------------------------------------

Element zero_element(const FdSystem& s) {
    Element a;
    for (int n : s.blocks) a.emplace_back(*s.ctx, n, n);
    return a;
}

Element unit_element(const FdSystem& s) {
    Element a;
    for (int n : s.blocks) a.push_back(Mat::identity(*s.ctx, n));
    return a;
}

Element apply_action(const FdSystem& s, const Element& a) {
    if (a.size() != s.blocks.size()) throw Error(ErrorCode::ShapeMismatch, "element has wrong block count");
    Element r;
    r.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Mat& src = a[static_cast<std::size_t>(s.sigma[i])];
        if (src.is_zero()) {
            r.emplace_back(*s.ctx, s.blocks[i], s.blocks[i]);
            continue;
        }
        const Mat& u = s.impl[i];
        r.push_back(u.is_identity() ? src : conjugate(u, src));
    }
    return r;
}

Report validate(const FdSystem& s) {
    Report rep;
    if (!s.ctx) {
        rep.fail("system", "field context present");
        return rep;
    }
    const int p = s.p();
    const int m = s.block_count();
    if (m == 0) rep.fail("system", "at least one block");
    if (static_cast<int>(s.sigma.size()) != m) rep.fail("sigma", "length = block count");
    if (static_cast<int>(s.impl.size()) != m) rep.fail("impl", "length = block count");
    if (!rep.ok()) return rep;
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int i = 0; i < m; ++i) {
        int t = s.sigma[static_cast<std::size_t>(i)];
        if (t < 0 || t >= m || seen[static_cast<std::size_t>(t)]) {
            rep.fail("sigma", "is a permutation", "bad image " + std::to_string(t + 1) + " at position " + std::to_string(i + 1));
            return rep;
        }
        seen[static_cast<std::size_t>(t)] = true;
    }
    for (int i = 0; i < m; ++i) {
        const int n = s.blocks[static_cast<std::size_t>(i)];
        if (n <= 0) rep.fail(blk(i), "n_i > 0");
        const Mat& u = s.impl[static_cast<std::size_t>(i)];
        if (&u.context() != s.ctx) rep.fail(blk(i), "impl over the system field");
        if (u.rows() != n || u.cols() != n) {
            rep.fail(blk(i), "impl is n_i x n_i");
            continue;
        }
        if (s.blocks[static_cast<std::size_t>(s.sigma[static_cast<std::size_t>(i)])] != n) rep.fail(blk(i), "n_i = n_sigma(i)");
        if (!is_unitary(u)) rep.fail(blk(i), "impl unitary");
    }
    if (!rep.ok()) return rep;
    for (int i = 0; i < m; ++i) {
        int j = i, len = 0;
        do {
            j = s.sigma[static_cast<std::size_t>(j)];
            ++len;
        } while (j != i && len <= p);
        if (j != i || (len != 1 && len != p)) rep.fail(blk(i), "sigma^p = id", "orbit length " + std::to_string(len));
    }
    if (!rep.ok()) return rep;
    for (int i = 0; i < m; ++i) {
        // alpha^p(a)_i = H_i a_i H_i^dagger with H_i = u_i u_sigma(i) ... u_sigma^{p-1}(i)
        Mat h = s.impl[static_cast<std::size_t>(i)];
        int j = s.sigma[static_cast<std::size_t>(i)];
        for (int k = 1; k < p; ++k) {
            h = h * s.impl[static_cast<std::size_t>(j)];
            j = s.sigma[static_cast<std::size_t>(j)];
        }
        if (!h.as_scalar()) rep.fail(blk(i), "alpha^p = id", "holonomy " + h.to_string() + " is not scalar");
    }
    return rep;
}

// ---------------------------------------------------------------------------

int CanonicalForm::block_count() const {
    int c = 0;
    for (const auto& pc : pieces) c += pc.kind == PieceKind::Fixed ? 1 : p();
    return c;
}

std::vector<int> CanonicalForm::block_sizes() const {
    std::vector<int> out;
    for (const auto& pc : pieces)
        for (int k = 0; k < (pc.kind == PieceKind::Fixed ? 1 : p()); ++k) out.push_back(pc.n);
    return out;
}

std::vector<int> CanonicalForm::piece_offsets() const {
    std::vector<int> out;
    int c = 0;
    for (const auto& pc : pieces) {
        out.push_back(c);
        c += pc.kind == PieceKind::Fixed ? 1 : p();
    }
    return out;
}

std::vector<int> CanonicalForm::block_piece() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for (int k = 0; k < (pieces[i].kind == PieceKind::Fixed ? 1 : p()); ++k) out.push_back(static_cast<int>(i));
    return out;
}

FdSystem CanonicalForm::system() const {
    FdSystem s;
    s.ctx = ctx;
    const int p = this->p();
    for (const auto& pc : pieces) {
        const int o = static_cast<int>(s.blocks.size());
        if (pc.kind == PieceKind::Fixed) {
            s.blocks.push_back(pc.n);
            s.sigma.push_back(o);
            s.impl.push_back(*pc.v);
        } else {
            for (int j = 0; j < p; ++j) {
                s.blocks.push_back(pc.n);
                s.sigma.push_back(o + (j + p - 1) % p);
                s.impl.push_back(Mat::identity(*ctx, pc.n));
            }
        }
    }
    return s;
}

CanonicalForm make_canonical(const FieldContext& ctx, std::vector<IrredPiece> pieces) {
    CanonicalForm c;
    c.ctx = &ctx;
    c.pieces = std::move(pieces);
    auto sizes = c.block_sizes();
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        c.block_map.push_back(static_cast<int>(i));
        c.conjugators.push_back(Mat::identity(ctx, sizes[i]));
    }
    return c;
}

IrredPiece fixed_piece(const FieldContext& ctx, const std::vector<int>& v_exponents) {
    return {PieceKind::Fixed, static_cast<int>(v_exponents.size()), Mat::p_diag(ctx, v_exponents)};
}

IrredPiece cycle_piece(int n) { return {PieceKind::Cycle, n, std::nullopt}; }

CanonicalForm decompose(const FdSystem& s) {
    auto rep = validate(s);
    if (!rep.ok()) {
        for (const auto& v : rep.violations)
            if (v.identity == "alpha^p = id") throw Error(ErrorCode::NonScalarHolonomy, v.where + ": " + v.detail);
        throw Error(ErrorCode::InvalidSystem, rep.to_text());
    }
    const FieldContext& ctx = *s.ctx;
    const int p = s.p();
    const int m = s.block_count();

    struct Found {
        IrredPiece piece;
        std::vector<int> orig;  // original block per canonical block of the piece
        std::vector<Mat> conj;
        std::vector<int> key;   // V exponents for Fixed
        int first;
    };
    std::vector<Found> fixed, cycles;
    std::vector<bool> done(static_cast<std::size_t>(m), false);
    for (int i = 0; i < m; ++i) {
        if (done[static_cast<std::size_t>(i)]) continue;
        const int n = s.blocks[static_cast<std::size_t>(i)];
        if (s.sigma[static_cast<std::size_t>(i)] == i) {
            done[static_cast<std::size_t>(i)] = true;
            const Mat& u = s.impl[static_cast<std::size_t>(i)];
            auto lambda = *u.pow(p).as_scalar();
            Scalar mu = absorb_twist(lambda, p, blk(i));
            Mat un = mu.is_one() ? u : u * mu.inv();
            Found f{{PieceKind::Fixed, n, std::nullopt}, {i}, {}, {}, i};
            if (un.is_diagonal()) {
                f.piece.v = un;
                f.conj.push_back(Mat::identity(ctx, n));
                f.key = p_diagonal_exponents(un);
            } else {
                auto [w, exps] = diagonalize(un, p, blk(i));
                Mat v = Mat::p_diag(ctx, exps);
                if (!is_unitary(w) || !(w.dagger() * un * w == v))
                    throw Error(ErrorCode::NonDiagonalizableWithinField, blk(i) + ": eigenbasis check failed");
                f.piece.v = v;
                f.conj.push_back(w);
                f.key = exps;
            }
            fixed.push_back(std::move(f));
        } else {
            // b_1 = i (smallest unvisited), b_j = sigma^{-1}(b_{j-1})
            std::vector<int> inv_sigma(static_cast<std::size_t>(m));
            for (int k = 0; k < m; ++k) inv_sigma[static_cast<std::size_t>(s.sigma[static_cast<std::size_t>(k)])] = k;
            std::vector<int> b{i};
            for (int j = 1; j < p; ++j) b.push_back(inv_sigma[static_cast<std::size_t>(b.back())]);
            for (int x : b) done[static_cast<std::size_t>(x)] = true;
            Mat h = s.impl[static_cast<std::size_t>(i)];
            for (int j = p - 1; j >= 1; --j) h = h * s.impl[static_cast<std::size_t>(b[static_cast<std::size_t>(j)])];
            auto lambda = h.as_scalar();
            if (!lambda) throw Error(ErrorCode::NonScalarHolonomy, "orbit of " + blk(i));
            Scalar mu = absorb_twist(*lambda, p, "orbit of " + blk(i));
            Scalar mu_inv = mu.inv();
            Found f{cycle_piece(n), b, {}, {}, i};
            Mat prod = Mat::identity(ctx, n);
            Scalar scale = Scalar::one(ctx);
            f.conj.push_back(prod);
            for (int j = 1; j < p; ++j) {
                prod = s.impl[static_cast<std::size_t>(b[static_cast<std::size_t>(j)])] * prod;
                scale = scale * mu_inv;
                f.conj.push_back(scale.is_one() ? prod : prod * scale);
            }
            cycles.push_back(std::move(f));
        }
    }
    std::stable_sort(fixed.begin(), fixed.end(), [](const Found& a, const Found& b) {
        return std::tie(a.piece.n, a.key, a.first) < std::tie(b.piece.n, b.key, b.first);
    });
    std::stable_sort(cycles.begin(), cycles.end(),
                     [](const Found& a, const Found& b) { return std::tie(a.piece.n, a.first) < std::tie(b.piece.n, b.first); });
    CanonicalForm c;
    c.ctx = &ctx;
    for (auto* group : {&fixed, &cycles})
        for (auto& f : *group) {
            c.pieces.push_back(f.piece);
            for (std::size_t k = 0; k < f.orig.size(); ++k) {
                c.block_map.push_back(f.orig[k]);
                c.conjugators.push_back(f.conj[k]);
            }
        }
    return c;
}

Element to_canonical(const CanonicalForm& c, const Element& original) {
    Element r;
    for (std::size_t k = 0; k < c.block_map.size(); ++k) {
        const Mat& a = original.at(static_cast<std::size_t>(c.block_map[k]));
        const Mat& w = c.conjugators[k];
        r.push_back(w.is_identity() ? a : w.dagger() * a * w);
    }
    return r;
}

Report check_iso(const FdSystem& s, const CanonicalForm& c) {
    Report rep;
    FdSystem cs = c.system();
    if (cs.blocks.size() != s.blocks.size()) {
        rep.fail("iso", "block count preserved");
        return rep;
    }
    for (int k = 0; k < cs.block_count(); ++k) {
        const int n = cs.blocks[static_cast<std::size_t>(k)];
        const int o = c.block_map[static_cast<std::size_t>(k)];
        const Mat& w = c.conjugators[static_cast<std::size_t>(k)];
        if (!is_unitary(w)) rep.fail(blk(k), "conjugator unitary");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Element e = zero_element(cs);
                e[static_cast<std::size_t>(k)] = Mat::unit(*s.ctx, n, i, j);
                Element orig = zero_element(s);
                orig[static_cast<std::size_t>(o)] = conjugate(w, e[static_cast<std::size_t>(k)]);
                if (to_canonical(c, apply_action(s, orig)) != apply_action(cs, e))
                    rep.fail(blk(k) + " E_" + std::to_string(i) + std::to_string(j), "iso o alpha = alpha_canonical o iso");
            }
    }
    return rep;
}

// ---------------------------------------------------------------------------

Mat recover_inner_unitary(const FieldContext& ctx, int n, const BlockMap& alpha) {
    const int n2 = n * n;
    Mat sys(ctx, n2 * n2, n2);
    for (int ij = 0; ij < n2; ++ij) {
        Mat e = Mat::unit(ctx, n, ij / n, ij % n);
        Mat ae = alpha(e);
        for (int k = 0; k < n2; ++k) {
            Mat ek = Mat::unit(ctx, n, k / n, k % n);
            sys.set_block(ij * n2, k, vec(ae * ek - ek * e));
        }
    }
    auto ns = null_space(sys);
    if (ns.size() != 1)
        throw Error(ErrorCode::NotAnAutomorphism,
                    "intertwiner space alpha(E_ij) U = U E_ij has dimension " + std::to_string(ns.size()) + ", expected 1");
    Mat u = unvec(ns[0], n, n);
    auto gram = (u.dagger() * u).as_scalar();
    if (!gram) throw Error(ErrorCode::NotAnAutomorphism, "intertwiner is not a multiple of a unitary; map is not a *-automorphism");
    if (!gram->is_rational())
        throw Error(ErrorCode::NormalizationOutsideField, "U^dagger U = " + gram->to_string() + " is not rational");
    auto s = sqrt_in_field(ctx, gram->rational_part());
    if (!s) throw Error(ErrorCode::NormalizationOutsideField, "sqrt(" + gram->to_string() + ") is outside the field");
    u = u * s->inv();
    const int p = ctx.p();
    auto lambda = u.pow(p).as_scalar();
    if (!lambda) throw Error(ErrorCode::NotAnAutomorphism, "U^p is not scalar");
    auto mu = root_of_unity_root(*lambda, p);
    if (!mu) throw Error(ErrorCode::NormalizationOutsideField, "U^p = " + lambda->to_string() + " has no p-th root in the field");
    u = u * mu->inv();
    // remaining freedom: a p-th root of unity; make the first nonzero diagonal entry 1 when possible
    for (int i = 0; i < n; ++i) {
        if (u(i, i).is_zero()) continue;
        if (auto k = u(i, i).p_root_exponent()) u = u * Scalar::p_root(ctx, -*k);
        break;
    }
    for (int ij = 0; ij < n2; ++ij) {
        Mat e = Mat::unit(ctx, n, ij / n, ij % n);
        if (!(alpha(e) == conjugate(u, e))) throw Error(ErrorCode::NotAnAutomorphism, "Ad U does not reproduce the map");
    }
    return u;
}

Mat recover_inner_unitary(const FdSystem& s, int block) {
    if (block < 0 || block >= s.block_count() || s.sigma[static_cast<std::size_t>(block)] != block)
        throw Error(ErrorCode::InvalidSystem, blk(block) + " is not fixed by sigma");
    const Mat& u = s.impl[static_cast<std::size_t>(block)];
    return recover_inner_unitary(*s.ctx, s.blocks[static_cast<std::size_t>(block)], [&u](const Mat& a) { return conjugate(u, a); });
}

// ---------------------------------------------------------------------------

bool EqHom::operator==(const EqHom& o) const {
    return *source == *o.source && *target == *o.target && blocks == o.blocks && unital == o.unital;
}

int filled_size(const EqHom& h, int t) {
    auto sizes = h.source->block_sizes();
    int f = 0;
    for (const auto& sl : h.blocks.at(static_cast<std::size_t>(t)).slots) f += sizes.at(static_cast<std::size_t>(sl.source)) * sl.mult;
    return f;
}

namespace {

Mat evaluate_block(const EqHom& h, const std::vector<int>& src_sizes, int t, int nt, const Element& a) {
    const FieldContext& ctx = *h.target->ctx;
    const Arrangement& ar = h.blocks[static_cast<std::size_t>(t)];
    Mat inner(ctx, nt, nt);
    int off = 0;
    bool any = false;
    for (const auto& sl : ar.slots) {
        const int ns = src_sizes[static_cast<std::size_t>(sl.source)];
        const Mat& as = a[static_cast<std::size_t>(sl.source)];
        if (!as.is_zero()) {
            any = true;
            for (int i = 0; i < ns; ++i)
                for (int j = 0; j < ns; ++j) {
                    const Scalar& x = as(i, j);
                    if (x.is_zero()) continue;
                    for (int c = 0; c < sl.mult; ++c) inner.at(off + i * sl.mult + c, off + j * sl.mult + c) = x;
                }
        }
        off += ns * sl.mult;
    }
    if (!any || ar.x.is_identity()) return inner;
    return conjugate(ar.x, inner);
}

}  // namespace

Element evaluate(const EqHom& h, const Element& a) {
    auto src_sizes = h.source->block_sizes();
    auto tgt_sizes = h.target->block_sizes();
    if (a.size() != src_sizes.size()) throw Error(ErrorCode::ShapeMismatch, "element does not match the source algebra");
    Element r;
    for (std::size_t t = 0; t < tgt_sizes.size(); ++t)
        r.push_back(evaluate_block(h, src_sizes, static_cast<int>(t), tgt_sizes[t], a));
    return r;
}

Element evaluate_unit(const EqHom& h, int s, int i, int j) {
    auto src_sizes = h.source->block_sizes();
    Element a;
    for (int n : src_sizes) a.emplace_back(*h.source->ctx, n, n);
    a[static_cast<std::size_t>(s)].at(i, j) = Scalar::one(*h.source->ctx);
    return evaluate(h, a);
}

Report hom_validate(const EqHom& h) {
    Report rep;
    if (!h.source || !h.target) {
        rep.fail("hom", "source and target present");
        return rep;
    }
    if (h.source->ctx != h.target->ctx) {
        rep.fail("hom", "source and target over the same field");
        return rep;
    }
    const FieldContext& ctx = *h.source->ctx;
    const int p = ctx.p();
    auto src_sizes = h.source->block_sizes();
    auto tgt_sizes = h.target->block_sizes();
    if (h.blocks.size() != tgt_sizes.size()) {
        rep.fail("hom", "one arrangement per target block");
        return rep;
    }
    bool fills = true;
    for (std::size_t t = 0; t < tgt_sizes.size(); ++t) {
        const auto& ar = h.blocks[t];
        const std::string where = "target " + blk(static_cast<int>(t));
        const int nt = tgt_sizes[t];
        if (ar.x.rows() != nt || ar.x.cols() != nt || &ar.x.context() != &ctx) {
            rep.fail(where, "X_t is n_t x n_t over the field");
            continue;
        }
        if (!is_unitary(ar.x)) rep.fail(where, "X_t unitary");
        int used = 0;
        for (const auto& sl : ar.slots) {
            if (sl.source < 0 || sl.source >= static_cast<int>(src_sizes.size()) || sl.mult < 1) {
                rep.fail(where, "slot refers to a source block with multiplicity >= 1");
                used = -1;
                break;
            }
            if (!sl.phases.empty()) {
                bool ok = static_cast<int>(sl.phases.size()) == sl.mult;
                for (int e : sl.phases) ok = ok && e >= 0 && e < p;
                if (!ok) rep.fail(where, "phase vector has one exponent in [0,p) per copy");
            }
            used += src_sizes[static_cast<std::size_t>(sl.source)] * sl.mult;
        }
        if (used < 0) continue;
        if (used > nt) rep.fail(where, "slots fit in the block", std::to_string(used) + " > " + std::to_string(nt));
        if (used != nt) fills = false;
    }
    if (!rep.ok()) return rep;
    if (fills != h.unital)
        rep.fail("hom", "unital flag matches the arrangement", h.unital ? "flagged unital but psi(1) != 1" : "flagged non-unital but psi(1) = 1");
    FdSystem sa = h.source->system(), sb = h.target->system();
    for (int s = 0; s < static_cast<int>(src_sizes.size()); ++s) {
        const int n = src_sizes[static_cast<std::size_t>(s)];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Element e = zero_element(sa);
                e[static_cast<std::size_t>(s)] = Mat::unit(ctx, n, i, j);
                Element lhs = evaluate(h, apply_action(sa, e));
                Element rhs = apply_action(sb, evaluate(h, e));
                for (std::size_t t = 0; t < lhs.size(); ++t)
                    if (!(lhs[t] == rhs[t])) {
                        rep.fail("source " + blk(s) + " E_" + std::to_string(i) + "," + std::to_string(j) + ", target " + blk(static_cast<int>(t)),
                                 "psi(alpha(E)) = beta(psi(E))",
                                 "psi(alpha(E)) = " + lhs[t].to_string() + " but beta(psi(E)) = " + rhs[t].to_string());
                    }
            }
    }
    return rep;
}

EqHom identity_hom(std::shared_ptr<const CanonicalForm> c) {
    EqHom h;
    h.source = c;
    h.target = c;
    auto sizes = c->block_sizes();
    for (std::size_t t = 0; t < sizes.size(); ++t)
        h.blocks.push_back({{Slot{static_cast<int>(t), 1, {}}}, Mat::identity(*c->ctx, sizes[t])});
    h.unital = true;
    return h;
}

EqHom hom_compose(const EqHom& g, const EqHom& h) {
    if (!h.target->same_system(*g.source))
        throw Error(ErrorCode::SystemMismatch, "target of the first hom differs from the source of the second");
    const FieldContext& ctx = *g.source->ctx;
    const int p = ctx.p();
    auto a_sizes = h.source->block_sizes();
    auto b_sizes = h.target->block_sizes();
    auto c_sizes = g.target->block_sizes();
    EqHom r;
    r.source = h.source;
    r.target = g.target;
    r.unital = g.unital && h.unital;
    for (std::size_t t = 0; t < c_sizes.size(); ++t) {
        const int nt = c_sizes[t];
        const Arrangement& ga = g.blocks[t];
        std::vector<Mat> kblocks;
        std::vector<Slot> slots;
        std::vector<int> keep, pad;  // old inner positions
        int off = 0;
        for (const auto& gs : ga.slots) {
            const Arrangement& ha = h.blocks[static_cast<std::size_t>(gs.source)];
            const int nb = b_sizes[static_cast<std::size_t>(gs.source)];
            kblocks.push_back(kron(ha.x, Mat::identity(ctx, gs.mult)));
            int used = 0;
            for (const auto& hs : ha.slots) {
                Slot sl{hs.source, hs.mult * gs.mult, {}};
                if (!hs.phases.empty() && !gs.phases.empty())
                    for (int a : hs.phases)
                        for (int b : gs.phases) sl.phases.push_back((a + b) % p);
                slots.push_back(std::move(sl));
                const int len = a_sizes[static_cast<std::size_t>(hs.source)] * hs.mult * gs.mult;
                for (int q = 0; q < len; ++q) keep.push_back(off + used + q);
                used += len;
            }
            for (int q = used; q < nb * gs.mult; ++q) pad.push_back(off + q);
            off += nb * gs.mult;
        }
        if (off < nt) kblocks.push_back(Mat::identity(ctx, nt - off));
        for (int q = off; q < nt; ++q) pad.push_back(q);
        std::vector<int> perm = keep;
        perm.insert(perm.end(), pad.begin(), pad.end());
        Mat k = kblocks.empty() ? Mat::identity(ctx, nt) : direct_sum(kblocks);
        Mat x = ga.x * k;
        bool moved = false;
        for (std::size_t q = 0; q < perm.size(); ++q) moved = moved || perm[q] != static_cast<int>(q);
        if (moved) x = x * Mat::permutation(ctx, perm);
        r.blocks.push_back({std::move(slots), std::move(x)});
    }
    return r;
}

bool same_map(const EqHom& h1, const EqHom& h2) {
    if (!h1.source->same_system(*h2.source) || !h1.target->same_system(*h2.target)) return false;
    auto sizes = h1.source->block_sizes();
    for (int s = 0; s < static_cast<int>(sizes.size()); ++s)
        for (int i = 0; i < sizes[static_cast<std::size_t>(s)]; ++i)
            for (int j = 0; j < sizes[static_cast<std::size_t>(s)]; ++j)
                if (evaluate_unit(h1, s, i, j) != evaluate_unit(h2, s, i, j)) return false;
    return true;
}

EqHom conjugate_hom(const Element& w, const EqHom& h) {
    if (w.size() != h.blocks.size()) throw Error(ErrorCode::ShapeMismatch, "W does not match the target algebra");
    EqHom r = h;
    for (std::size_t t = 0; t < w.size(); ++t) r.blocks[t].x = w[t] * h.blocks[t].x;
    return r;
}

}  // namespace afzp

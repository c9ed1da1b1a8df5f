#include "afzp/crossed.hpp"

namespace afzp {

namespace {

int mod(int a, int p) { return ((a % p) + p) % p; }

Element add(const Element& a, const Element& b) {
    Element r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

Element mul(const Element& a, const Element& b) {
    Element r;
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(a[i].is_zero() || b[i].is_zero() ? Mat(a[i].context(), a[i].rows(), a[i].cols()) : a[i] * b[i]);
    return r;
}

Element dagger(const Element& a) {
    Element r;
    for (const auto& m : a) r.push_back(m.dagger());
    return r;
}

Element scale(const Element& a, const Scalar& s) {
    Element r;
    for (const auto& m : a) r.push_back(m * s);
    return r;
}

Element action_power(const FdSystem& s, Element a, int k) {
    for (int j = 0; j < k; ++j) a = apply_action(s, a);
    return a;
}

}  // namespace

CrossedPresentation crossed_product(std::shared_ptr<const CanonicalForm> c) {
    CrossedPresentation cp;
    cp.source = c;
    const int p = c->p();
    const int m = c->block_count();
    auto offs = c->piece_offsets();
    for (std::size_t k = 0; k < c->pieces.size(); ++k) {
        const auto& pc = c->pieces[k];
        const int o = offs[k];
        cp.piece_offset.push_back(static_cast<int>(cp.target_blocks.size()));
        if (pc.kind == PieceKind::Fixed) {
            auto counts = exponent_counts(p_diagonal_exponents(*pc.v), p);
            for (int i = 0; i < p; ++i) {
                cp.target_blocks.push_back(pc.n);
                cp.block_piece.push_back(static_cast<int>(k));
                // summand i holds the zeta^{-i} eigenspace of V under q
                cp.special.push_back(counts[static_cast<std::size_t>(mod(-i, p))]);
                std::vector<int> row(static_cast<std::size_t>(m), 0);
                row[static_cast<std::size_t>(o)] = 1;
                cp.iota.push_back(row);
            }
        } else {
            cp.target_blocks.push_back(p * pc.n);
            cp.block_piece.push_back(static_cast<int>(k));
            cp.special.push_back(pc.n);
            std::vector<int> row(static_cast<std::size_t>(m), 0);
            for (int j = 0; j < p; ++j) row[static_cast<std::size_t>(o + j)] = 1;
            cp.iota.push_back(row);
        }
    }
    return cp;
}

Element identify(const CrossedPresentation& cp, const CrossedElement& x) {
    const auto& c = *cp.source;
    const FieldContext& ctx = cp.ctx();
    const int p = cp.p();
    if (static_cast<int>(x.coeff.size()) != p) throw Error(ErrorCode::ShapeMismatch, "crossed element needs p coefficients");
    auto offs = c.piece_offsets();
    Element y;
    for (std::size_t k = 0; k < c.pieces.size(); ++k) {
        const auto& pc = c.pieces[k];
        const int o = offs[k];
        const int n = pc.n;
        if (pc.kind == PieceKind::Fixed) {
            auto e = p_diagonal_exponents(*pc.v);
            for (int i = 0; i < p; ++i) {
                Mat yi(ctx, n, n);
                for (int kk = 0; kk < p; ++kk) {
                    const Mat& a = x.coeff[static_cast<std::size_t>(kk)][static_cast<std::size_t>(o)];
                    if (a.is_zero()) continue;
                    for (int r = 0; r < n; ++r)
                        for (int col = 0; col < n; ++col) {
                            const Scalar& v = a(r, col);
                            if (v.is_zero()) continue;
                            yi.at(r, col) += v * Scalar::p_root(ctx, i * kk + kk * e[static_cast<std::size_t>(col)]);
                        }
                }
                y.push_back(std::move(yi));
            }
        } else {
            Mat big(ctx, p * n, p * n);
            for (int r = 0; r < p; ++r)
                for (int col = 0; col < p; ++col) {
                    const Mat& a = x.coeff[static_cast<std::size_t>(mod(col - r, p))][static_cast<std::size_t>(o + mod(-r, p))];
                    if (!a.is_zero()) big.set_block(r * n, col * n, a);
                }
            y.push_back(std::move(big));
        }
    }
    return y;
}

CrossedElement unidentify(const CrossedPresentation& cp, const Element& y) {
    const auto& c = *cp.source;
    const FieldContext& ctx = cp.ctx();
    const int p = cp.p();
    if (y.size() != cp.target_blocks.size()) throw Error(ErrorCode::ShapeMismatch, "element does not match the crossed blocks");
    CrossedElement x = crossed_zero(cp);
    auto offs = c.piece_offsets();
    const Rational inv_p(1, p);
    for (std::size_t k = 0; k < c.pieces.size(); ++k) {
        const auto& pc = c.pieces[k];
        const int o = offs[k];
        const int t = cp.piece_offset[k];
        const int n = pc.n;
        if (pc.kind == PieceKind::Fixed) {
            auto e = p_diagonal_exponents(*pc.v);
            // a_k = (1/p) sum_i zeta^{-ik} x_i V^{-k}
            for (int kk = 0; kk < p; ++kk) {
                Mat a(ctx, n, n);
                for (int i = 0; i < p; ++i) {
                    const Mat& xi = y[static_cast<std::size_t>(t + i)];
                    for (int r = 0; r < n; ++r)
                        for (int col = 0; col < n; ++col) {
                            const Scalar& v = xi(r, col);
                            if (v.is_zero()) continue;
                            a.at(r, col) += v * Scalar::p_root(ctx, -i * kk - kk * e[static_cast<std::size_t>(col)]);
                        }
                }
                x.coeff[static_cast<std::size_t>(kk)][static_cast<std::size_t>(o)] = a * Scalar(ctx, inv_p);
            }
        } else {
            const Mat& big = y[static_cast<std::size_t>(t)];
            for (int r = 0; r < p; ++r)
                for (int kk = 0; kk < p; ++kk)
                    x.coeff[static_cast<std::size_t>(kk)][static_cast<std::size_t>(o + mod(-r, p))] = big.block(r * n, mod(r + kk, p) * n, n, n);
        }
    }
    return x;
}

Mat identify_matrix(const CrossedPresentation& cp) {
    const FieldContext& ctx = cp.ctx();
    auto src = cp.source->block_sizes();
    int cols = 0, rows = 0;
    for (int n : src) cols += n * n;
    cols *= cp.p();
    for (int n : cp.target_blocks) rows += n * n;
    Mat m(ctx, rows, cols);
    int col = 0;
    for (int j = 0; j < cp.p(); ++j)
        for (std::size_t b = 0; b < src.size(); ++b)
            for (int e = 0; e < src[b] * src[b]; ++e) {
                CrossedElement x = crossed_zero(cp);
                x.coeff[static_cast<std::size_t>(j)][b] = Mat::unit(ctx, src[b], e / src[b], e % src[b]);
                Element y = identify(cp, x);
                int row = 0;
                for (const auto& blk : y) {
                    for (int q = 0; q < blk.rows() * blk.cols(); ++q) m.at(row + q, col) = blk(q / blk.cols(), q % blk.cols());
                    row += blk.rows() * blk.cols();
                }
                ++col;
            }
    return m;
}

CrossedElement crossed_zero(const CrossedPresentation& cp) {
    FdSystem s = cp.source->system();
    return CrossedElement{std::vector<Element>(static_cast<std::size_t>(cp.p()), zero_element(s))};
}

CrossedElement crossed_one(const CrossedPresentation& cp) {
    CrossedElement x = crossed_zero(cp);
    x.coeff[0] = unit_element(cp.source->system());
    return x;
}

CrossedElement canonical_unitary(const CrossedPresentation& cp) {
    CrossedElement x = crossed_zero(cp);
    x.coeff[1 % cp.p()] = unit_element(cp.source->system());
    return x;
}

CrossedElement crossed_mul(const CrossedPresentation& cp, const CrossedElement& x, const CrossedElement& y) {
    // (a U^j)(b U^k) = a alpha^j(b) U^{j+k}
    const int p = cp.p();
    FdSystem s = cp.source->system();
    CrossedElement r = crossed_zero(cp);
    for (int k = 0; k < p; ++k) {
        Element b = y.coeff[static_cast<std::size_t>(k)];
        for (int j = 0; j < p; ++j) {
            const Element& a = x.coeff[static_cast<std::size_t>(j)];
            auto& dst = r.coeff[static_cast<std::size_t>((j + k) % p)];
            dst = add(dst, mul(a, b));
            b = apply_action(s, b);  // now alpha^{j+1}(y_k)
        }
    }
    return r;
}

CrossedElement crossed_adjoint(const CrossedPresentation& cp, const CrossedElement& x) {
    // (a U^j)^dagger = alpha^{-j}(a^dagger) U^{-j}
    const int p = cp.p();
    FdSystem s = cp.source->system();
    CrossedElement r = crossed_zero(cp);
    for (int j = 0; j < p; ++j)
        r.coeff[static_cast<std::size_t>(mod(-j, p))] = action_power(s, dagger(x.coeff[static_cast<std::size_t>(j)]), mod(-j, p));
    return r;
}

CrossedElement embed_iota(const CrossedPresentation& cp, const Element& a) {
    auto sizes = cp.source->block_sizes();
    if (a.size() != sizes.size()) throw Error(ErrorCode::ShapeMismatch, "element does not match the source algebra");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].rows() != sizes[i] || a[i].cols() != sizes[i]) throw Error(ErrorCode::ShapeMismatch, "block " + std::to_string(i) + " has the wrong size");
    CrossedElement x = crossed_zero(cp);
    x.coeff[0] = a;
    return x;
}

CrossedElement averaging_projection(const CrossedPresentation& cp) {
    const int p = cp.p();
    Element one = unit_element(cp.source->system());
    Element c = scale(one, Scalar(cp.ctx(), Rational(1, p)));
    return CrossedElement{std::vector<Element>(static_cast<std::size_t>(p), c)};
}

CrossedElement dual_action(const CrossedPresentation& cp, const CrossedElement& x) {
    CrossedElement r = x;
    for (int k = 1; k < cp.p(); ++k) r.coeff[static_cast<std::size_t>(k)] = scale(x.coeff[static_cast<std::size_t>(k)], Scalar::p_root(cp.ctx(), -k));
    return r;
}

FdSystem dual_system(const CrossedPresentation& cp) {
    const FieldContext& ctx = cp.ctx();
    const int p = cp.p();
    FdSystem s;
    s.ctx = &ctx;
    s.blocks = cp.target_blocks;
    for (std::size_t k = 0; k < cp.source->pieces.size(); ++k) {
        const auto& pc = cp.source->pieces[k];
        const int t = cp.piece_offset[k];
        if (pc.kind == PieceKind::Fixed) {
            for (int i = 0; i < p; ++i) {
                s.sigma.push_back(t + mod(i - 1, p));
                s.impl.push_back(Mat::identity(ctx, pc.n));
            }
        } else {
            std::vector<int> e(static_cast<std::size_t>(p));
            for (int r = 0; r < p; ++r) e[static_cast<std::size_t>(r)] = r;
            s.sigma.push_back(t);
            s.impl.push_back(kron(Mat::p_diag(ctx, e), Mat::identity(ctx, pc.n)));
        }
    }
    return s;
}

std::vector<int> projection_class(const Element& proj) {
    std::vector<int> out;
    for (const auto& m : proj) {
        Scalar tr = m.trace();
        if (!tr.is_rational() || !tr.rational_part().is_integer() || tr.rational_part().sign() < 0)
            throw Error(ErrorCode::NonIntegralMultiplicity, "trace " + tr.to_string() + " is not a rank");
        out.push_back(static_cast<int>(*tr.rational_part().to_int64()));
    }
    return out;
}

CrossedHom::CrossedHom(EqHom h, std::shared_ptr<const CrossedPresentation> a, std::shared_ptr<const CrossedPresentation> b)
    : h_(std::move(h)), a_(std::move(a)), b_(std::move(b)) {
    if (!a_->source->same_system(*h_.source) || !b_->source->same_system(*h_.target))
        throw Error(ErrorCode::SystemMismatch, "crossed products do not match the hom");
}

Element CrossedHom::apply(const Element& y) const {
    CrossedElement x = unidentify(*a_, y);
    CrossedElement z;
    for (const auto& c : x.coeff) z.coeff.push_back(evaluate(h_, c));
    return identify(*b_, z);
}

CrossedHom extend_hom(const EqHom& h, std::shared_ptr<const CrossedPresentation> cpA, std::shared_ptr<const CrossedPresentation> cpB) {
    auto rep = hom_validate(h);
    if (!rep.ok()) throw Error(ErrorCode::NotEquivariant, rep.to_text());
    return CrossedHom(h, std::move(cpA), std::move(cpB));
}

}  // namespace afzp

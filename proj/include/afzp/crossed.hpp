#pragma once

#include <memory>
#include <vector>

#include "afzp/system.hpp"

namespace afzp {

/// sum_j a_j U^j with a_j in the source algebra (canonical coordinates).
struct CrossedElement {
    std::vector<Element> coeff;  // length p

    bool operator==(const CrossedElement&) const = default;
};

/// A x| Z_p for a canonical system, realized as a direct sum of matrix blocks.
///
/// Crossed blocks follow the canonical piece order: a Fixed piece (M_n, V)
/// gives p blocks of size n, summand i receiving a_k U^k -> zeta^{ik} a_k V^k;
/// a Cycle piece gives one block of size pn whose (r,c) sub-block is
/// a^{(c-r) mod p}_{(-r) mod p}.
struct CrossedPresentation {
    std::shared_ptr<const CanonicalForm> source;
    std::vector<int> target_blocks;
    std::vector<int> block_piece;     // piece index of each crossed block
    std::vector<int> piece_offset;    // first crossed block of each piece
    std::vector<int> special;         // [q] over crossed blocks
    std::vector<std::vector<int>> iota;  // mC x m, the K_0 map of the embedding

    int p() const { return source->p(); }
    const FieldContext& ctx() const { return *source->ctx; }
};

CrossedPresentation crossed_product(std::shared_ptr<const CanonicalForm> c);

Element identify(const CrossedPresentation& cp, const CrossedElement& x);
CrossedElement unidentify(const CrossedPresentation& cp, const Element& y);
/// Dense matrix of identify: columns run over (j, source block, entry row-major),
/// rows over (crossed block, entry row-major).
Mat identify_matrix(const CrossedPresentation& cp);

// Abstract crossed-product operations, computed from the covariance relation only.
CrossedElement crossed_zero(const CrossedPresentation& cp);
CrossedElement crossed_one(const CrossedPresentation& cp);
CrossedElement crossed_mul(const CrossedPresentation& cp, const CrossedElement& x, const CrossedElement& y);
CrossedElement crossed_adjoint(const CrossedPresentation& cp, const CrossedElement& x);
/// The canonical unitary U.
CrossedElement canonical_unitary(const CrossedPresentation& cp);

/// iota(a): a_0 = a, other coefficients zero.
CrossedElement embed_iota(const CrossedPresentation& cp, const Element& a);
/// q = (1/p) sum_j U^j.
CrossedElement averaging_projection(const CrossedPresentation& cp);
/// Dual automorphism: coefficient k scaled by zeta_p^{-k}.
CrossedElement dual_action(const CrossedPresentation& cp, const CrossedElement& x);
/// The dual generator as a system on the crossed blocks.
FdSystem dual_system(const CrossedPresentation& cp);

/// Ranks of a projection given in crossed-block coordinates (its K_0 class).
std::vector<int> projection_class(const Element& proj);

/// psi~(sum a_j U^j) = sum psi(a_j) U^j in identified coordinates.
class CrossedHom {
public:
    CrossedHom(EqHom h, std::shared_ptr<const CrossedPresentation> a, std::shared_ptr<const CrossedPresentation> b);
    Element apply(const Element& y) const;
    const EqHom& hom() const { return h_; }
    const CrossedPresentation& source() const { return *a_; }
    const CrossedPresentation& target() const { return *b_; }

private:
    EqHom h_;
    std::shared_ptr<const CrossedPresentation> a_, b_;
};

CrossedHom extend_hom(const EqHom& h, std::shared_ptr<const CrossedPresentation> cpA, std::shared_ptr<const CrossedPresentation> cpB);

}  // namespace afzp

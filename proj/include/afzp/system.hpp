#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "afzp/error.hpp"
#include "afzp/matrix.hpp"

namespace afzp {

/// An element of A = M_{n_0} + ... + M_{n_{m-1}}: one matrix per block.
using Element = std::vector<Mat>;

/// Finite-dimensional algebra with an order-p automorphism
///   alpha(a)_i = impl[i] * a_{sigma[i]} * impl[i]^dagger   (0-based sigma).
struct FdSystem {
    const FieldContext* ctx = nullptr;
    std::vector<int> blocks;
    std::vector<int> sigma;
    std::vector<Mat> impl;

    int p() const { return ctx->p(); }
    int block_count() const { return static_cast<int>(blocks.size()); }
    bool operator==(const FdSystem&) const = default;
};

Report validate(const FdSystem& s);
Element apply_action(const FdSystem& s, const Element& a);
/// Zero element with the block shapes of s.
Element zero_element(const FdSystem& s);
Element unit_element(const FdSystem& s);

enum class PieceKind { Fixed, Cycle };

struct IrredPiece {
    PieceKind kind = PieceKind::Fixed;
    int n = 1;
    std::optional<Mat> v;  // Fixed only: diagonal, V^p = I

    bool operator==(const IrredPiece&) const = default;
};

/// Normal form of a system, plus the isomorphism from the original one.
///
/// Canonical blocks: one per Fixed piece, p consecutive ones per Cycle piece.
/// A Cycle piece acts by (a_0,...,a_{p-1}) -> (a_{p-1}, a_0, ..., a_{p-2}).
/// iso: canonical block c comes from original block block_map[c] through
/// a_c = conjugators[c]^dagger * a_orig * conjugators[c].
struct CanonicalForm {
    const FieldContext* ctx = nullptr;
    std::vector<IrredPiece> pieces;
    std::vector<int> block_map;
    std::vector<Mat> conjugators;

    int p() const { return ctx->p(); }
    int block_count() const;
    std::vector<int> block_sizes() const;
    /// First canonical block of each piece.
    std::vector<int> piece_offsets() const;
    /// Piece index of each canonical block.
    std::vector<int> block_piece() const;
    FdSystem system() const;
    /// Same pieces over the same field, ignoring the recorded iso.
    bool same_system(const CanonicalForm& o) const { return ctx == o.ctx && pieces == o.pieces; }
    bool operator==(const CanonicalForm&) const = default;
};

/// Builds a canonical form with trivial iso from pieces (no sorting).
CanonicalForm make_canonical(const FieldContext& ctx, std::vector<IrredPiece> pieces);
IrredPiece fixed_piece(const FieldContext& ctx, const std::vector<int>& v_exponents);
IrredPiece cycle_piece(int n);

CanonicalForm decompose(const FdSystem& s);
/// Moves an element of the original algebra into canonical coordinates.
Element to_canonical(const CanonicalForm& c, const Element& original);
/// Report on whether the recorded iso carries the original action onto the canonical one.
Report check_iso(const FdSystem& s, const CanonicalForm& c);

/// alpha given as a linear map on one block.
using BlockMap = std::function<Mat(const Mat&)>;
/// Unitary U with alpha = Ad U and U^p = I, found by solving alpha(E_ij) U = U E_ij.
Mat recover_inner_unitary(const FieldContext& ctx, int n, const BlockMap& alpha);
Mat recover_inner_unitary(const FdSystem& s, int block);

/// One run of m copies of a source block inside a target block.
struct Slot {
    int source = 0;
    int mult = 1;
    std::vector<int> phases;  // optional p-exponents, one per copy

    bool operator==(const Slot&) const = default;
};

struct Arrangement {
    std::vector<Slot> slots;
    Mat x;  // conjugator X_t

    bool operator==(const Arrangement&) const = default;
};

/// psi(a)_t = X_t * blockdiag(kron(a_s, I_m) for each slot, zero padding) * X_t^dagger.
struct EqHom {
    std::shared_ptr<const CanonicalForm> source;
    std::shared_ptr<const CanonicalForm> target;
    std::vector<Arrangement> blocks;  // one per canonical target block
    bool unital = true;

    bool operator==(const EqHom& o) const;
};

Element evaluate(const EqHom& h, const Element& a);
/// Image of the matrix unit E_ij of source block s.
Element evaluate_unit(const EqHom& h, int s, int i, int j);
/// Size used by the slots of target block t.
int filled_size(const EqHom& h, int t);

Report hom_validate(const EqHom& h);
/// g o h (h first).
EqHom hom_compose(const EqHom& g, const EqHom& h);
EqHom identity_hom(std::shared_ptr<const CanonicalForm> c);
/// True when h1 and h2 agree on every source matrix unit.
bool same_map(const EqHom& h1, const EqHom& h2);
/// Ad W o h, with W an element of the target algebra.
EqHom conjugate_hom(const Element& w, const EqHom& h);

}  // namespace afzp

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "afzp/kinv.hpp"

namespace afzp {

enum class CaseTag { FF, FC, CF, CC };
std::string to_string(CaseTag t);

/// Parameters read off one (source piece, target piece) sub-block of (F, phi).
struct PairPlan {
    int source_piece = 0;
    int target_piece = 0;
    CaseTag tag = CaseTag::FF;
    std::vector<int> params;  // FF: circulant row c_d; CC: F row of block t_0; FC/CF: the single multiplicity
    std::vector<int> phases;  // FF only: c_d copies of phase d, d increasing
};

struct LiftPlan {
    std::vector<PairPlan> pairs;
};

/// Slices (F, phi) along piece boundaries and checks each sub-block shape.
LiftPlan plan_lift(const KPair& kp, const CanonicalForm& src, const CanonicalForm& tgt);

/// Unital equivariant hom with induced_map = kp.
EqHom lift(const KPair& kp, std::shared_ptr<const CanonicalForm> src, std::shared_ptr<const CanonicalForm> tgt);

struct BlockWitness {
    int block = 0;
    std::string method;     // how Z was found
    std::vector<Mat> l1, l2;  // commutant components per slot group
    Mat z;
    Mat w;
};

struct UniquenessWitness {
    std::vector<BlockWitness> blocks;
};

struct EquivResult {
    Element w;
    UniquenessWitness witness;
};

/// W in the fixed-point algebra of the target with Ad W o h2 = h1.
EquivResult equiv_unitary(const EqHom& h1, const EqHom& h2);
/// The three exact identities asserted by equiv_unitary.
Report check_correction(const Element& w, const EqHom& h1, const EqHom& h2);
/// True when beta(W) = W.
bool is_fixed(const CanonicalForm& c, const Element& w);

/// All pairs with entries in [0, bound] passing check_pair, in lexicographic order of (F, phi).
std::vector<KPair> ksearch(const KInvariant& a, const KInvariant& b, int bound, bool unital = true);
/// Pairs within the bound that fail check_pair only at the special-element clause (d),
/// each with its report. Explains an empty ksearch.
std::vector<std::pair<KPair, Report>> special_obstructions(const KInvariant& a, const KInvariant& b, int bound, bool unital = true);

struct Tower {
    std::vector<std::shared_ptr<const CanonicalForm>> systems;
    std::vector<EqHom> maps;  // maps[i]: systems[i] -> systems[i+1]

    int length() const { return static_cast<int>(systems.size()); }
};

Report tower_validate(const Tower& t);
/// Composite connecting map from stage i to stage j > i.
EqHom tower_map(const Tower& t, int i, int j);

/// One inner correction: corrected = Ad w o uncorrected.
struct Correction {
    std::string map;  // "psi r" or "chi r"
    EqHom uncorrected;
    Element w;
};

/// Zigzag A_{n_r} -> B_{m_r} -> A_{n_{r+1}} with exactly commuting triangles.
struct IntertwiningCertificate {
    Tower a, b;
    std::vector<int> n, m;
    std::vector<KPair> psi_pairs, chi_pairs;
    std::vector<EqHom> psi, chi;  // corrected maps
    std::vector<Correction> corrections;
};

struct IntertwineOptions {
    int depth = 3;
    int bound = 3;
    /// Forward K-pairs psi_r : A_r -> B_r; empty means search.
    std::vector<KPair> pairs;
};

IntertwiningCertificate intertwine(const Tower& a, const Tower& b, const IntertwineOptions& opt);
/// Replays every identity of the certificate from its data alone.
Report verify(const IntertwiningCertificate& cert);

// Towers used by the demos and tests.
/// v_n = diag(1, zeta_p, ..., zeta_p^{p-1})^{(x) n} on M_{p^n}, maps a -> a (x) 1.
Tower product_tower(const FieldContext& ctx, int stages);
/// Same tower with each v_n re-sorted, maps conjugated by the sorting permutations.
Tower sorted_product_tower(const FieldContext& ctx, int stages);
/// alpha_n = Ad diag(1_{2^n - 1}, -1) on M_{2^n} with a -> diag(a, a). Not validated.
Tower naive_tower(const FieldContext& ctx, int stages);

}  // namespace afzp

#pragma once

#include <vector>

#include "afzp/crossed.hpp"

namespace afzp {

using IntMat = std::vector<std::vector<int>>;
using IntVec = std::vector<int>;

IntMat int_identity(int n);
IntMat int_mul(const IntMat& a, const IntMat& b, int inner);
IntVec int_apply(const IntMat& a, const IntVec& v);
/// rows x cols zero matrix
IntMat int_zero(int rows, int cols);

/// K_0 data of a canonical system and its crossed product, in canonical block order.
struct KInvariant {
    int m = 0;
    IntVec unit;
    IntMat act;       // act[i][sigma(i)] = 1
    int mc = 0;
    IntMat dual_act;  // same convention for the dual system
    IntVec special;
    IntMat iota;      // mc x m

    bool operator==(const KInvariant&) const = default;
};

struct KPair {
    IntMat f;    // mB x mA
    IntMat phi;  // mCB x mCA
    bool unital = true;

    bool operator==(const KPair&) const = default;
};

KInvariant invariant_of(const CanonicalForm& c);
/// Multiplicities read from traces of images of minimal projections.
KPair induced_map(const EqHom& h);
Report check_pair(const KPair& kp, const KInvariant& a, const KInvariant& b);
/// kp_g o kp_h (h first), matching hom_compose(g, h).
KPair compose_pairs(const KPair& g, const KPair& h);
KPair identity_pair(const KInvariant& a);

}  // namespace afzp

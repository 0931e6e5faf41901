#pragma once

#include "relcalc/relation.hpp"

#include <optional>

// Contractive domination between relations and the induced order on
// nonnegative selfadjoint relations. The headline equivalence connecting
// the two (form order of the products t*t, domination of the relations,
// domination of their regular parts) is exposed as a three-route
// consistency check.

namespace relcalc {

// A matrix with operator norm <= 1 (up to a 1e-8 slack) that annihilates
// a designated subspace of its input space. The annihilation convention
// is what makes the contraction returned by dominates unique.
struct Contraction {
    Matrix matrix;          // dim K_A x dim K_B
    Subspace annihilated;   // subspace of K_B mapped to zero

    void validate(const Tol& tol = {}) const;
    double norm() const;
};

// U with U^T U the projector onto the initial space and U U^T the
// projector onto the final space.
struct PartialIsometry {
    Matrix matrix;
    Subspace initial;
    Subspace final_space;

    void validate(const Tol& tol = {}) const;
};

// Decides whether a is contractively dominated by b, i.e. whether some
// contraction c satisfies c b inside a. Checks, in order: dom b inside
// dom a, ker b inside ker a, and the form of the regular part of a below
// the form of the regular part of b on dom b. On success returns the
// canonical contraction a_reg pinv(b_reg), which is zero on (ran b)^perp;
// its contractivity and the graph inclusion c b inside a are verified
// before returning (NumericalError if they fail, which would mean the
// decision procedure and the certificate disagree).
std::optional<Contraction> dominates(const LinearRelation& a, const LinearRelation& b,
                                     const Tol& tol = {});

// Form order h1 <= h2: dom h2 inside dom h1 and the operator-part form of
// h1 at most that of h2 on dom h2, up to psd_tol per unit vector.
bool psd_leq(const PsdRelation& h1, const PsdRelation& h2, const Tol& tol = {});

// The three equivalent routes evaluated independently:
//   form:     psd_leq(a* a, b* b)
//   relation: dominates(a, b)
//   regular:  dominates(a_reg, b_reg)
struct BridgeVerdicts {
    bool form = false;
    bool relation = false;
    bool regular = false;
    bool agree() const { return form == relation && relation == regular; }
};
BridgeVerdicts theorem_bridge_check(const LinearRelation& a, const LinearRelation& b,
                                    const Tol& tol = {});

// Connects two operators x, y with equal domains and equal pointwise norms
// (Gram matrices agree on the common domain within compat_tol): returns
// the partial isometry u with u x = y, initial space ran x, final space
// ran y. Throws InputError when the domains or Grams do not match.
PartialIsometry link_partial_isometry(const OperatorRelation& x, const OperatorRelation& y,
                                      const Tol& tol = {}, double compat_tol = 1e-8);

}  // namespace relcalc

#pragma once

#include "relcalc/domination.hpp"
#include "relcalc/limits.hpp"
#include "relcalc/relation.hpp"

#include <string>
#include <vector>

// Named identity batteries shared by the unit tests, the fuzzer and the
// acceptance runner. Every battery returns one result per identity with a
// normalized residual, so callers can rank failures and print uniform
// reports instead of reimplementing the checks three times.

namespace relcalc {

struct InvariantResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;  // empty unless the check failed or was skipped
};

bool all_passed(const std::vector<InvariantResult>& results);
// Index of the largest residual relative to its tolerance, -1 when empty.
int worst_index(const std::vector<InvariantResult>& results);
std::string describe_failures(const std::vector<InvariantResult>& results);

// The nine graph identities every relation satisfies: involution of the
// adjoint, duality of the part subspaces, reconstruction from the regular
// and singular parts, the three multivalued-part equalities of t* t, the
// adjoint pairing, the form identity of the operator part, and the
// square-root identity on the graph. Residuals are normalized (projector
// and graph distances as they stand, pairings divided by the product of
// the vector scales) and compared against residual_tol.
std::vector<InvariantResult> relation_identity_battery(const LinearRelation& t, const Tol& tol = {},
                                                       double residual_tol = 1e-8);

// The identity battery plus the module-level extras: idempotence of the
// regular part and the resolvent round-trip of t* t. The round-trip is
// skipped (reported as passed with a note) when the form spectrum enters
// the snapping window of relation_from_resolvent, where reconstruction
// rounds by design.
std::vector<InvariantResult> relation_module_battery(const LinearRelation& t, const Tol& tol = {});

// Domination consistency for one pair: the three equivalent routes agree,
// and any returned contraction passes its own validation plus the graph
// inclusion residual. With expect_dominated, additionally requires
// dominates(a, b) to succeed.
std::vector<InvariantResult> domination_pair_battery(const LinearRelation& a, const LinearRelation& b,
                                                     const Tol& tol = {}, bool expect_dominated = false);

// Limit-engine consistency for a scaled sequence with a PSD base: runs
// monotone_psd_limit in the direction of the schedule and reports the
// closed-form residual and convergence.
std::vector<InvariantResult> scaled_psd_limit_battery(const SequenceSpec& seq, const Tol& tol = {});

// Limit-engine consistency for a scaled sequence with an operator base:
// the operator engine in the schedule direction, norm convergence on the
// limit domain, and for decaying schedules the descent checks.
std::vector<InvariantResult> scaled_operator_limit_battery(const SequenceSpec& seq, const Tol& tol = {});

// Full pipeline consistency for a nondecreasing relation sequence.
std::vector<InvariantResult> pipeline_battery(const SequenceSpec& seq, const Tol& tol = {});

}  // namespace relcalc

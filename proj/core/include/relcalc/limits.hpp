#pragma once

#include "relcalc/domination.hpp"
#include "relcalc/relation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Monotone limits of operator and relation sequences. Sequences are
// restricted to a structured family (a fixed relation under a scalar
// schedule, an explicit list with stationary tail, and direct sums of
// those) so that evaluation along the doubling schedule n = 1, 2, 4, ...
// is well defined and the finite-sample convergence checks mean what they
// say. Limits are detected through resolvents: monotone forms have
// monotone resolvents, and the resolvent sequence stalls (up to conv_eps)
// exactly when the form sequence has split into convergent and divergent
// directions, which eigenvalue snapping then separates.

namespace relcalc {

// Scalar schedule c(n) applied to a base relation.
struct Schedule {
    enum class Kind { N, SqrtN, InvN, InvSqrtN, Const, Pow };
    Kind kind = Kind::N;
    double c = 1.0;  // Const only
    int p = 1;       // Pow: n^(p/q)
    int q = 1;       // Pow: q > 0

    double factor(std::uint64_t n) const;
    // +1 when c(n) -> infinity, -1 when c(n) -> 0, 0 when constant.
    int asymptote() const;
    void validate() const;
};

// A sequence of relations out of a fixed space, evaluated at integer n >= 1.
class SequenceSpec {
  public:
    struct Scaled {
        Schedule schedule;
        LinearRelation base;
    };
    struct Explicit {
        std::vector<LinearRelation> terms;  // stationary after the last entry
    };
    struct DirectSum {
        std::vector<SequenceSpec> parts;
    };

    explicit SequenceSpec(Scaled s);
    explicit SequenceSpec(Explicit e);
    explicit SequenceSpec(DirectSum d);

    static SequenceSpec scaled(Schedule sched, LinearRelation base);
    static SequenceSpec explicit_terms(std::vector<LinearRelation> terms);
    static SequenceSpec sum_of(std::vector<SequenceSpec> parts);

    int dim_h() const { return dim_h_; }
    int dim_k() const { return dim_k_; }

    LinearRelation at(std::uint64_t n, const Tol& tol = {}) const;

    // Termwise regular parts; scaling and direct sums commute with the
    // regular part, so the structure is preserved.
    SequenceSpec map_regular(const Tol& tol = {}) const;
    // Termwise t* t; a scalar schedule squares.
    SequenceSpec map_product_star(const Tol& tol = {}) const;

    bool is_scaled() const { return std::holds_alternative<Scaled>(node_); }
    const Scaled* as_scaled() const { return std::get_if<Scaled>(&node_); }
    const std::variant<Scaled, Explicit, DirectSum>& node() const { return node_; }

  private:
    std::variant<Scaled, Explicit, DirectSum> node_;
    int dim_h_ = 0;
    int dim_k_ = 0;
};

enum class Direction { Nondecreasing, Nonincreasing };

// Semi-inner product data: gram(i, j) = (phi_i, phi_j)_+ over the columns
// phi_i of generators.
struct GramSpec {
    Matrix generators;  // ambient x m
    Matrix gram;        // m x m, symmetric PSD, consistent on ker(generators)
};

struct RepresentingMap {
    OperatorRelation map;  // canonical realization, codomain R^rank
    Subspace neutral;      // directions of the domain with zero semi-norm
};

// Realizes the semi-inner product as (T phi, T psi): T is the canonical
// representative (descending form eigenvalues, sign normalized), zero
// exactly on the neutral directions. Inconsistent data (a combination
// that vanishes in the space but not in the form) throws InputError.
RepresentingMap representing_map(const GramSpec& spec, const Tol& tol = {});

// Uniqueness up to partial isometry: both maps realize the same form on
// the same domain, so v x = y for a partial isometry v from ran x to ran y.
PartialIsometry connect_maps(const OperatorRelation& x, const OperatorRelation& y,
                             const Tol& tol = {}, double compat_tol = 1e-8);

// For a symmetric 0 <= a <= I, the canonical map with domain ran a^(1/2)
// sending a^(1/2) h to the projection of h onto (ker a^(1/2))^perp. Its
// Gram realizes the range-space inner product of a.
OperatorRelation range_space_map(const Matrix& a, const Tol& tol = {});

struct ConvergenceInfo {
    int doublings = 0;           // doubling index where the loop stopped
    std::uint64_t n_final = 0;   // last n evaluated
    double delta1 = 0.0;         // ||R_n - R_2n||_F at the stop
    double delta2 = 0.0;         // ||R_2n - R_4n||_F at the stop
    bool converged = false;
    bool hit_blowup_cap = false; // some form magnitude exceeded blowup_cap
};

struct PipelineChecks {
    double dom_residual = 0.0;   // projector distance dom S_r vs dom H_inf
    double norm_residual = 0.0;  // worst | ||S_r b|| - ||sqrt b|| | on a domain basis
    double op_residual = 0.0;    // operator parts of s_r* s_r vs H_inf
    double mul_residual = 0.0;   // mul parts of s_r* s_r vs H_inf
    bool passed = false;
};

struct DescentChecks {
    double graph_residual = 0.0;  // graph distance t* t vs K_inf
    double link_residual = 0.0;   // (K_reg)^(1/2) vs U t on the domain
    double back_residual = 0.0;   // t vs U^T (K_reg)^(1/2) on the domain
    bool singular_limit_map = false;
    bool singular_k = false;
    bool passed = false;
};

struct LimitReport {
    std::optional<OperatorRelation> op_limit;
    std::optional<PsdRelation> psd_limit;
    // Secondary object: the representing-map limit S_r for the pipeline,
    // the operator limit for the descent check.
    std::optional<OperatorRelation> representing;
    Subspace dom_limit;
    Subspace blowup_space;
    std::vector<Contraction> witnesses;
    std::optional<PartialIsometry> isometry;
    ConvergenceInfo convergence;
    // Distance to the closed-form limit, for scaled specs only.
    std::optional<double> analytic_residual;
    std::optional<PipelineChecks> pipeline;
    std::optional<DescentChecks> descent;
    std::vector<std::string> notes;
};

// Limit of a nondecreasing sequence of operators (T_m contractively
// dominated by T_n for m <= n, verified on the sampled schedule). The
// stabilized common domain splits into the limit domain, where the Gram
// forms converge, and the blowup directions, where they diverge; the
// limit is the canonical representing map of the limiting Gram. When an
// upper bound S with T_n dominated by S is supplied, the report certifies
// that the limit is dominated by S as well.
LimitReport nondecreasing_operator_limit(const SequenceSpec& seq, const Tol& tol = {},
                                         const OperatorRelation* upper_bound = nullptr);

// Limit of a nonincreasing sequence of operators. Forms are bounded below
// by zero, so there is no blowup part and the limit lives on the full
// stabilized domain.
LimitReport nonincreasing_operator_limit(const SequenceSpec& seq, const Tol& tol = {});

// Limit of a monotone sequence of nonnegative selfadjoint relations in
// the strong resolvent sense: resolvents are iterated along the doubling
// schedule until they stall, then eigenvalue snapping rebuilds the limit
// relation. For scaled specs the report carries the distance to the
// closed-form limit (kernel times its complement for growing schedules,
// domain times mul for decaying ones, the base itself for constant ones).
LimitReport monotone_psd_limit(const SequenceSpec& seq, Direction direction, const Tol& tol = {});

// Full pipeline for a nondecreasing relation sequence: the representing
// limit S_r of the regular parts, the form limit H_inf of t_n* t_n, the
// partial isometry linking S_r to the square root of H_inf, and the
// closing identity s_r* s_r = H_inf. Check outcomes land in
// report.pipeline; the report never silently repairs a failure.
LimitReport relation_sequence_pipeline(const SequenceSpec& seq, const Tol& tol = {});

struct GraphLimitCheck {
    bool approximated = false;
    double worst_distance = 0.0;
    int worst_vector = -1;
    std::vector<double> final_distances;
    ConvergenceInfo convergence;
};

// Strong graph limit test: every basis vector of the candidate graph must
// be approximated by the graphs along the schedule, with the distances
// falling below the admission threshold and staying nonincreasing at the
// tail (up to conv_eps).
GraphLimitCheck strong_graph_limit_check(const SequenceSpec& seq, const LinearRelation& candidate,
                                         const Tol& tol = {});

// Bounded monotone approximation of |T|: spectral truncations of the
// operator part of t* t, square-rooted, carried on the domain of t (zero
// elsewhere). Norms ||T_k phi|| are nondecreasing in k and reach
// || |T| phi || exactly once k clears the top of the spectrum.
std::vector<Matrix> bounded_approximation(const LinearRelation& t, int count, const Tol& tol = {});

// Descent consistency for a nonincreasing operator sequence: the operator
// limit t, the form limit K_inf of t_n* t_n, the identity K_inf = t* t,
// the partial isometry with (K_reg)^(1/2) = U t, and the equivalence of
// singularity between t and K_inf. Outcomes land in report.descent.
LimitReport nonincreasing_relation_check(const SequenceSpec& seq, const Tol& tol = {});

}  // namespace relcalc

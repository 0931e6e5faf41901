#pragma once

#include "relcalc/linalg.hpp"

#include <cstdint>
#include <optional>

// Linear relations between finite dimensional spaces, kept as subspaces of
// the product space H (+) K. A relation may be multivalued; its singular
// (multivalued) directions and its regular operator part are split off by
// the Lebesgue-type decomposition. At finite dimension every relation is
// closed, so closures are the identity and the double adjoint returns the
// relation itself; the API still exposes the operations so formulas read
// like the operator-theoretic originals.

namespace relcalc {

class OperatorRelation;
class PsdRelation;

class LinearRelation {
  public:
    // Graph must be a subspace of R^(dim_h + dim_k).
    LinearRelation(int dim_h, int dim_k, Subspace graph);

    int dim_h() const { return dim_h_; }
    int dim_k() const { return dim_k_; }
    const Subspace& graph() const { return graph_; }
    int graph_dim() const { return graph_.dim(); }

    // Component subspaces. dom/ker live in H, ran/mul in K.
    Subspace dom(const Tol& tol = {}) const;
    Subspace ran(const Tol& tol = {}) const;
    Subspace kernel(const Tol& tol = {}) const;
    Subspace mul(const Tol& tol = {}) const;

    // Inverse relation: {(f', f) : (f, f') in T}.
    LinearRelation inverse(const Tol& tol = {}) const;

    // Closure is the identity at finite dimension; kept for parity with the
    // unbounded theory so pipeline code can mirror the formulas verbatim.
    LinearRelation closure() const { return *this; }

    bool same_spaces(const LinearRelation& other) const {
        return dim_h_ == other.dim_h_ && dim_k_ == other.dim_k_;
    }

  private:
    int dim_h_;
    int dim_k_;
    Subspace graph_;
};

// Span of the given generator columns, each of height dim_h + dim_k, as a
// relation graph.
LinearRelation relation_from_graph(int dim_h, int dim_k, const Matrix& generators, const Tol& tol = {});

// Graph projector comparison, the relation-level equality used throughout.
bool equal_relations(const LinearRelation& a, const LinearRelation& b, const Tol& tol = {});
double relation_distance(const LinearRelation& a, const LinearRelation& b);

// A relation that is single valued (mul = {0}), carried as a domain
// subspace together with an action matrix that annihilates dom^perp.
class OperatorRelation {
  public:
    // Checked: the relation must have trivial mul part.
    explicit OperatorRelation(const LinearRelation& rel, const Tol& tol = {});

    const LinearRelation& relation() const { return rel_; }
    const Subspace& domain() const { return domain_; }
    // dim_k x dim_h, zero on the orthogonal complement of the domain.
    const Matrix& action() const { return action_; }
    int dim_h() const { return rel_.dim_h(); }
    int dim_k() const { return rel_.dim_k(); }

    Vector apply(const Vector& f) const { return action_ * f; }

  private:
    LinearRelation rel_;
    Subspace domain_;
    Matrix action_;
};

// The operator sending domain vectors f to m * f. The graph ignores the
// action of m outside the domain.
OperatorRelation operator_on_domain(const Matrix& m, const Subspace& domain, const Tol& tol = {});
// Same with domain = all of R^cols(m).
OperatorRelation operator_everywhere(const Matrix& m, const Tol& tol = {});

// Zero operator with the given domain inside R^dim_h, codomain R^dim_k.
OperatorRelation zero_operator(int dim_h, int dim_k, const Subspace& domain, const Tol& tol = {});

// Adjoint relation in K (+) H: all pairs (g, g') with (g', f) = (g, f') for
// every (f, f') in t. Computed as the orthogonal complement of the rotated
// graph (f, f') -> (f', -f).
LinearRelation adjoint(const LinearRelation& t, const Tol& tol = {});

// Lebesgue-type decomposition t = reg + sing against the multivalued part:
// reg = (I - P) t and sing = P t for P the projector onto mul t. reg is
// always an operator, sing is a singular relation.
struct LebesgueParts {
    OperatorRelation reg;
    LinearRelation sing;
    Matrix mul_projector;  // dim_k x dim_k
};
LebesgueParts lebesgue_decompose(const LinearRelation& t, const Tol& tol = {});

// {(f, c f') : (f, f') in t} for a matrix c out of K.
LinearRelation compose_matrix(const Matrix& c, const LinearRelation& t, const Tol& tol = {});

// Relational composition t2 o t1 = {(f, g) : (f, h) in t1, (h, g) in t2
// for some h}, via intersection of the two graph cylinders inside
// H (+) K (+) K' followed by projection onto the outer coordinates.
LinearRelation compose_relations(const LinearRelation& t2, const LinearRelation& t1, const Tol& tol = {});

// Componentwise sum {(f, f1' + f2') : (f, f1') in t1, (f, f2') in t2}.
LinearRelation componentwise_sum(const LinearRelation& t1, const LinearRelation& t2, const Tol& tol = {});

// A nonnegative selfadjoint relation in H (+) H, cached in split form:
// dom = mul^perp, a symmetric PSD operator-part matrix expressed in the
// coordinates of the domain basis, and the multivalued part.
class PsdRelation {
  public:
    // Validates selfadjointness (graph equals the adjoint graph) and
    // nonnegativity of the form on the graph. Throws InputError on bad
    // data; use product_star for the always-PSD construction.
    explicit PsdRelation(const LinearRelation& rel, const Tol& tol = {});

    const LinearRelation& relation() const { return rel_; }
    int dim() const { return rel_.dim_h(); }
    const Subspace& domain() const { return domain_; }
    const Subspace& mul_part() const { return mul_; }
    // Operator part in domain coordinates (dim(domain) square, symmetric PSD).
    const Matrix& op_part() const { return op_; }
    // Operator part as a matrix on the ambient space, zero on dom^perp.
    Matrix op_part_ambient() const { return domain_.basis() * op_ * domain_.basis().transpose(); }
    // Operator part as an operator relation on H (no multivalued part).
    OperatorRelation op_part_operator(const Tol& tol = {}) const;
    // (H_reg)^(1/2) as an operator on H with the same domain.
    OperatorRelation sqrt_operator(const Tol& tol = {}) const;
    // Scale by c > 0 (graph {(f, c f')}); exact on the cached split form.
    PsdRelation scaled(double c, const Tol& tol = {}) const;

    Subspace kernel(const Tol& tol = {}) const { return rel_.kernel(tol); }

  private:
    PsdRelation(LinearRelation rel, Subspace domain, Matrix op, Subspace mul);
    LinearRelation rel_;
    Subspace domain_;
    Matrix op_;
    Subspace mul_;
    friend PsdRelation psd_from_parts(const Subspace& domain, const Matrix& op_in_domain,
                                      const Subspace& mul, const Tol& tol);
};

// Assemble a PSD relation from its split form; domain and mul must be
// orthogonal complements of one another.
PsdRelation psd_from_parts(const Subspace& domain, const Matrix& op_in_domain, const Subspace& mul,
                           const Tol& tol = {});

// Graph of a symmetric PSD matrix as an everywhere defined PSD relation.
PsdRelation psd_from_matrix(const Matrix& m, const Tol& tol = {});

// t* t (composition of the adjoint with t), validated nonnegative
// selfadjoint. Validation failure here means tolerance escalation and
// throws NumericalError.
PsdRelation product_star(const LinearRelation& t, const Tol& tol = {});

// Square root relation: same dom and mul, operator part replaced by its
// PSD square root.
PsdRelation psd_sqrt_relation(const PsdRelation& h, const Tol& tol = {});

// Resolvent matrix (h + I)^(-1), a symmetric contraction with
// ker = mul h and eigenvalue 1 exactly on ker h.
Matrix resolvent(const PsdRelation& h, const Tol& tol = {});

// Inverse of the resolvent correspondence. r must be symmetric with
// spectrum in [0, 1] up to psd_tol; eigenvalues within snap_tol of 0 or 1
// are snapped exactly there before the relation is rebuilt.
PsdRelation relation_from_resolvent(const Matrix& r, const Tol& tol = {});

// Spectral truncation of a symmetric PSD matrix: eigenvalues above n are
// dropped, eigenvalues <= n are kept (the boundary stays). Returns the
// input unchanged once n >= lambda_max, so monotone approximation
// terminates exactly. n must be positive.
Matrix spectral_truncation(const Matrix& a, double n, const Tol& tol = {});

// True when the graph is all of dom x ran, i.e. graph_dim == dim dom + dim ran.
bool is_singular_relation(const LinearRelation& t, const Tol& tol = {});

// Direct sum of relations acting on the concatenated spaces.
LinearRelation direct_sum(const LinearRelation& a, const LinearRelation& b, const Tol& tol = {});

}  // namespace relcalc

#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

// Dense subspace arithmetic used by the relation calculus. Everything is
// double precision and desk scale: ambient dimensions stay in the single
// digits, conditioning is expected to be moderate. Subspaces are stored as
// orthonormal bases obtained from an SVD, and all equality talk is in terms
// of orthogonal projectors.

namespace relcalc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Bad arguments from the caller (dimension mismatch, invalid tolerance
// config, malformed input data).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A numerical contract that should hold by theorem failed to verify.
// These indicate tolerance escalation or a genuinely broken input, and are
// not meant to be caught and ignored.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tolerance bundle threaded through every operation.
//
//   rank_rel   relative singular value cutoff for rank decisions
//   psd_tol    eigenvalue floor for nonnegativity and form comparisons
//   sub_eq_tol Frobenius threshold for projector equality of subspaces
//   conv_eps   stopping threshold for resolvent differences in limits
//   snap_tol   eigenvalue snapping radius around 0 and 1 for resolvents
//   blowup_cap magnitudes beyond this count as divergent
struct Tol {
    double rank_rel = 1e-9;
    double psd_tol = 1e-8;
    double sub_eq_tol = 1e-7;
    double conv_eps = 1e-8;
    double snap_tol = 1e-6;
    double blowup_cap = 1e12;
    int n_max_doublings = 40;

    // Throws InputError unless all entries are positive and the layering
    // rank_rel < sub_eq_tol < 1 and snap_tol < 1 < blowup_cap holds.
    void validate() const;
};

// A linear subspace of R^n held as an n x d matrix with orthonormal columns
// (d == 0 encodes the zero subspace).
class Subspace {
  public:
    // Zero subspace of R^0; placeholder so aggregates can default-construct.
    Subspace() : Subspace(0) {}
    // Zero subspace of R^n.
    explicit Subspace(int ambient_dim);
    // Wraps a basis that is already orthonormal; checked.
    Subspace(int ambient_dim, Matrix basis);

    static Subspace zero(int ambient_dim) { return Subspace(ambient_dim); }
    static Subspace full(int ambient_dim);

    int ambient() const { return ambient_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Matrix& basis() const { return basis_; }
    Matrix projector() const { return basis_ * basis_.transpose(); }

  private:
    int ambient_;
    Matrix basis_;  // ambient_ x dim, orthonormal columns
};

// Span of the columns of v as a Subspace. Rank is decided by the relative
// cutoff tol.rank_rel against the largest singular value.
Subspace orthonormalize(const Matrix& v, const Tol& tol = {});

// Same, but the cutoff is anchored at tol.rank_rel * max(sigma_max, scale).
// Use this when v is a block cut out of a larger orthonormal basis: there
// the unit column norm of the parent is the honest scale, and a block made
// of pure roundoff must come out empty, not full rank.
Subspace orthonormalize_anchored(const Matrix& v, double scale, const Tol& tol = {});

// Orthogonal complement within the ambient space.
Subspace complement(const Subspace& s, const Tol& tol = {});

// Sum (span of the union) and intersection of subspaces of one ambient
// space. The intersection goes through complements of the summed
// complements, which keeps every rank decision inside orthonormalize.
Subspace sum(const Subspace& a, const Subspace& b, const Tol& tol = {});
Subspace intersect(const Subspace& a, const Subspace& b, const Tol& tol = {});

// True when every basis vector of inner is within tol.sub_eq_tol of its
// projection onto outer, i.e. inner is contained in outer.
bool contains(const Subspace& outer, const Subspace& inner, const Tol& tol = {});

// Frobenius distance of the two projectors; the equality test used across
// the library is equal_subspaces, i.e. distance < tol.sub_eq_tol.
double projector_distance(const Subspace& a, const Subspace& b);
bool equal_subspaces(const Subspace& a, const Subspace& b, const Tol& tol = {});

// Moore-Penrose pseudoinverse with the same relative rank cutoff as
// orthonormalize.
Matrix pseudoinverse(const Matrix& m, const Tol& tol = {});

// Symmetric PSD square root. Requires m to be symmetric within
// 10 * tol.rank_rel (relative to its norm) and to have spectrum above
// -tol.psd_tol; small negative eigenvalues are clamped to zero.
Matrix psd_sqrt(const Matrix& m, const Tol& tol = {});

// Helpers shared by the relation layer.

// Symmetry defect ||m - m^T||_inf relative to max(1, ||m||_inf).
double symmetry_defect(const Matrix& m);

// max / min eigenvalue of a symmetric matrix (0 for empty input).
double eig_max(const Matrix& sym);
double eig_min(const Matrix& sym);

inline std::string dim_str(long r, long c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace relcalc

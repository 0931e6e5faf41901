#include "relcalc/domination.hpp"

#include <Eigen/SVD>

namespace relcalc {

namespace {

double op_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

// Gram matrix of an operator restricted to the columns of w.
Matrix gram_on(const OperatorRelation& t, const Matrix& w) {
    Matrix tw = t.action() * w;
    return tw.transpose() * tw;
}

}  // namespace

void Contraction::validate(const Tol& tol) const {
    if (matrix.cols() != annihilated.ambient())
        throw InputError("contraction: annihilated subspace ambient mismatch");
    if (op_norm(matrix) > 1.0 + 1e-8)
        throw NumericalError("contraction: operator norm " + std::to_string(op_norm(matrix)) +
                             " exceeds 1");
    if (annihilated.dim() > 0) {
        double residual = (matrix * annihilated.basis()).norm();
        if (residual > tol.sub_eq_tol)
            throw NumericalError("contraction: does not annihilate its convention subspace");
    }
}

double Contraction::norm() const { return op_norm(matrix); }

void PartialIsometry::validate(const Tol& tol) const {
    Matrix utu = matrix.transpose() * matrix;
    Matrix uut = matrix * matrix.transpose();
    if ((utu - initial.projector()).norm() > tol.sub_eq_tol)
        throw NumericalError("partial isometry: U^T U is not the projector onto the initial space");
    if ((uut - final_space.projector()).norm() > tol.sub_eq_tol)
        throw NumericalError("partial isometry: U U^T is not the projector onto the final space");
}

std::optional<Contraction> dominates(const LinearRelation& a, const LinearRelation& b, const Tol& tol) {
    if (a.dim_h() != b.dim_h())
        throw InputError("dominates: relations start from different spaces");
    Subspace dom_b = b.dom(tol);
    if (!contains(a.dom(tol), dom_b, tol)) return std::nullopt;
    if (!contains(a.kernel(tol), b.kernel(tol), tol)) return std::nullopt;

    LebesgueParts pa = lebesgue_decompose(a, tol);
    LebesgueParts pb = lebesgue_decompose(b, tol);
    const Matrix& w = dom_b.basis();
    Matrix ga = gram_on(pa.reg, w);
    Matrix gb = gram_on(pb.reg, w);
    // Same slack policy as psd_leq: far along a growing schedule the form
    // entries dwarf an absolute psd_tol, so compare relative to their size.
    const double form_scale =
        1.0 + (w.cols() > 0 ? std::max(ga.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff()) : 0.0);
    if (eig_max(ga - gb) > tol.psd_tol * form_scale) return std::nullopt;

    // Canonical certificate. pinv of the regular action of b is zero on
    // (ran b_reg)^perp, which contains (ran b)^perp, so the annihilation
    // convention holds by construction.
    Contraction c{pa.reg.action() * pseudoinverse(pb.reg.action(), tol), complement(b.ran(tol), tol)};
    c.validate(tol);
    LinearRelation cb = compose_matrix(c.matrix, b, tol);
    if (!contains(a.graph(), cb.graph(), tol))
        throw NumericalError("dominates: certificate failed graph inclusion");
    return c;
}

bool psd_leq(const PsdRelation& h1, const PsdRelation& h2, const Tol& tol) {
    if (h1.dim() != h2.dim()) throw InputError("psd_leq: relations act on different spaces");
    if (!contains(h1.domain(), h2.domain(), tol)) return false;
    const Matrix& w = h2.domain().basis();
    if (w.cols() == 0) return true;
    Matrix q1 = w.transpose() * h1.op_part_ambient() * w;
    Matrix q2 = w.transpose() * h2.op_part_ambient() * w;
    // The slack scales with the forms being compared: far along a growing
    // schedule the entries reach 1e8 and beyond, where an absolute psd_tol
    // would be below the roundoff already committed in the inputs.
    const double scale = 1.0 + std::max(q1.cwiseAbs().maxCoeff(), q2.cwiseAbs().maxCoeff());
    return eig_max(q1 - q2) <= tol.psd_tol * scale;
}

BridgeVerdicts theorem_bridge_check(const LinearRelation& a, const LinearRelation& b, const Tol& tol) {
    if (a.dim_h() != b.dim_h())
        throw InputError("theorem_bridge_check: relations start from different spaces");
    BridgeVerdicts v;
    v.form = psd_leq(product_star(a, tol), product_star(b, tol), tol);
    v.relation = dominates(a, b, tol).has_value();
    LebesgueParts pa = lebesgue_decompose(a, tol);
    LebesgueParts pb = lebesgue_decompose(b, tol);
    v.regular = dominates(pa.reg.relation(), pb.reg.relation(), tol).has_value();
    return v;
}

PartialIsometry link_partial_isometry(const OperatorRelation& x, const OperatorRelation& y,
                                      const Tol& tol, double compat_tol) {
    if (x.dim_h() != y.dim_h())
        throw InputError("link_partial_isometry: operators start from different spaces");
    if (!equal_subspaces(x.domain(), y.domain(), tol))
        throw InputError("link_partial_isometry: domains differ");
    const Matrix& w = x.domain().basis();
    if (w.cols() == 0)
        return PartialIsometry{Matrix::Zero(y.dim_k(), x.dim_k()), Subspace::zero(x.dim_k()),
                               Subspace::zero(y.dim_k())};
    Matrix gx = gram_on(x, w);
    Matrix gy = gram_on(y, w);
    // Equal Grams mean equal norms on the domain basis and on all sums of
    // basis vectors, which is the isometric compatibility contract.
    double scale = 1.0 + std::max(gx.cwiseAbs().maxCoeff(), gy.cwiseAbs().maxCoeff());
    if (w.cols() > 0 && (gx - gy).cwiseAbs().maxCoeff() > compat_tol * scale)
        throw InputError("link_partial_isometry: pointwise norms differ on the domain");

    PartialIsometry u{y.action() * pseudoinverse(x.action(), tol), x.relation().ran(tol),
                      y.relation().ran(tol)};
    u.validate(tol);
    double link_residual = ((u.matrix * x.action() - y.action()) * w).norm();
    if (link_residual > tol.sub_eq_tol * scale)
        throw NumericalError("link_partial_isometry: U X does not reproduce Y (residual " +
                             std::to_string(link_residual) + ")");
    return u;
}

}  // namespace relcalc

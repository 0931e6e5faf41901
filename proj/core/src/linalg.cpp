#include "relcalc/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace relcalc {

void Tol::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0)) throw InputError(std::string("tolerance ") + name + " must be positive");
    };
    pos(rank_rel, "rank_rel");
    pos(psd_tol, "psd_tol");
    pos(sub_eq_tol, "sub_eq_tol");
    pos(conv_eps, "conv_eps");
    pos(snap_tol, "snap_tol");
    pos(blowup_cap, "blowup_cap");
    if (n_max_doublings <= 0) throw InputError("tolerance n_max_doublings must be positive");
    if (!(rank_rel < sub_eq_tol && sub_eq_tol < 1.0))
        throw InputError("tolerances must satisfy rank_rel < sub_eq_tol < 1");
    if (!(snap_tol < 1.0 && 1.0 < blowup_cap))
        throw InputError("tolerances must satisfy snap_tol < 1 < blowup_cap");
}

Subspace::Subspace(int ambient_dim) : ambient_(ambient_dim), basis_(ambient_dim, 0) {
    if (ambient_dim < 0) throw InputError("ambient dimension must be nonnegative");
}

Subspace::Subspace(int ambient_dim, Matrix basis) : ambient_(ambient_dim), basis_(std::move(basis)) {
    if (ambient_dim < 0) throw InputError("ambient dimension must be nonnegative");
    if (basis_.rows() != ambient_) throw InputError("basis rows do not match ambient dimension");
    if (basis_.cols() > basis_.rows()) throw InputError("basis has more columns than ambient dimension");
    if (basis_.cols() > 0) {
        Matrix gram = basis_.transpose() * basis_;
        double defect = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
        if (defect > 1e-10)
            throw InputError("subspace basis is not orthonormal (defect " + std::to_string(defect) + ")");
    }
}

Subspace Subspace::full(int ambient_dim) {
    return Subspace(ambient_dim, Matrix::Identity(ambient_dim, ambient_dim));
}

Subspace orthonormalize(const Matrix& v, const Tol& tol) {
    return orthonormalize_anchored(v, 0.0, tol);
}

Subspace orthonormalize_anchored(const Matrix& v, double scale, const Tol& tol) {
    if (v.cols() == 0 || v.rows() == 0) return Subspace(static_cast<int>(v.rows()));
    Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double cutoff = tol.rank_rel * std::max(sv(0), scale);
    int rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff && sv(rank) > 0.0) ++rank;
    return Subspace(static_cast<int>(v.rows()), svd.matrixU().leftCols(rank));
}

Subspace complement(const Subspace& s, const Tol& tol) {
    (void)tol;
    int n = s.ambient();
    int d = s.dim();
    if (d == 0) return Subspace::full(n);
    if (d == n) return Subspace::zero(n);
    // The last n-d left singular vectors of the basis span the kernel of
    // basis^T, which is the orthogonal complement.
    Eigen::JacobiSVD<Matrix> svd(s.basis(), Eigen::ComputeFullU);
    return Subspace(n, svd.matrixU().rightCols(n - d));
}

Subspace sum(const Subspace& a, const Subspace& b, const Tol& tol) {
    if (a.ambient() != b.ambient()) throw InputError("subspace sum: ambient dimensions differ");
    Matrix joint(a.ambient(), a.dim() + b.dim());
    joint << a.basis(), b.basis();
    return orthonormalize(joint, tol);
}

Subspace intersect(const Subspace& a, const Subspace& b, const Tol& tol) {
    if (a.ambient() != b.ambient()) throw InputError("subspace intersect: ambient dimensions differ");
    return complement(sum(complement(a, tol), complement(b, tol), tol), tol);
}

bool contains(const Subspace& outer, const Subspace& inner, const Tol& tol) {
    if (outer.ambient() != inner.ambient()) throw InputError("subspace contains: ambient dimensions differ");
    if (inner.dim() == 0) return true;
    Matrix residual = inner.basis() - outer.basis() * (outer.basis().transpose() * inner.basis());
    return residual.colwise().norm().maxCoeff() < tol.sub_eq_tol;
}

double projector_distance(const Subspace& a, const Subspace& b) {
    if (a.ambient() != b.ambient()) throw InputError("projector_distance: ambient dimensions differ");
    return (a.projector() - b.projector()).norm();
}

bool equal_subspaces(const Subspace& a, const Subspace& b, const Tol& tol) {
    return projector_distance(a, b) < tol.sub_eq_tol;
}

Matrix pseudoinverse(const Matrix& m, const Tol& tol) {
    if (m.rows() == 0 || m.cols() == 0) return Matrix::Zero(m.cols(), m.rows());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cutoff = tol.rank_rel * sv(0);
    Vector inv = Vector::Zero(sv.size());
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double symmetry_defect(const Matrix& m) {
    if (m.rows() != m.cols()) return 1.0;
    if (m.rows() == 0) return 0.0;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

Matrix psd_sqrt(const Matrix& m, const Tol& tol) {
    if (m.rows() != m.cols()) throw InputError("psd_sqrt: matrix must be square, got " + dim_str(m.rows(), m.cols()));
    if (m.rows() == 0) return m;
    if (symmetry_defect(m) > 10.0 * tol.rank_rel)
        throw InputError("psd_sqrt: matrix is not symmetric");
    Matrix s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    Vector ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    // The root lifts the noise floor: an eigenvalue at roundoff scale comes
    // back as a sqrt(eps) phantom, far above roundoff. Flush the rank noise
    // band before taking roots.
    double cut = tol.rank_rel * std::max(0.0, ev.maxCoeff());
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol.psd_tol * scale)
            throw InputError("psd_sqrt: matrix is not nonnegative (eigenvalue " + std::to_string(ev(i)) + ")");
        ev(i) = ev(i) > cut ? std::sqrt(ev(i)) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double eig_max(const Matrix& sym) {
    if (sym.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double eig_min(const Matrix& sym) {
    if (sym.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace relcalc

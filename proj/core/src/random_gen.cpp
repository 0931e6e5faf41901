#include "relcalc/random_gen.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>

namespace relcalc {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
    return m;
}

Matrix random_orthogonal(int n, Rng& rng) {
    if (n == 0) return Matrix(0, 0);
    Matrix g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the column signs so the draw is a function of g alone.
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

Subspace random_subspace(int ambient, int dim, Rng& rng) {
    if (dim == 0) return Subspace::zero(ambient);
    return Subspace(ambient, random_orthogonal(ambient, rng).leftCols(dim));
}

LinearRelation random_relation(int dim_h, int dim_k, Rng& rng, const Tol& tol) {
    int g = rng.uniform_int(0, dim_h + dim_k);
    return relation_from_graph(dim_h, dim_k, gaussian_matrix(dim_h + dim_k, g, rng), tol);
}

Matrix random_psd_matrix(int n, int kernel_dim, double lo, double hi, Rng& rng) {
    Matrix q = random_orthogonal(n, rng);
    Vector ev = Vector::Zero(n);
    for (int i = kernel_dim; i < n; ++i) ev(i) = rng.uniform(lo, hi);
    return q * ev.asDiagonal() * q.transpose();
}

OperatorRelation structured_operator(int dim_h, int dim_k, int dom_dim, int rank, double lo, double hi,
                                     Rng& rng, const Tol& tol) {
    if (dom_dim > dim_h || rank > dom_dim || rank > dim_k)
        throw InputError("structured_operator: rank and domain exceed the ambient dimensions");
    Subspace dom = random_subspace(dim_h, dom_dim, rng);
    Matrix u = dim_k > 0 ? Matrix(random_orthogonal(dim_k, rng).leftCols(rank)) : Matrix(0, rank);
    Matrix m = Matrix::Zero(dim_k, dim_h);
    for (int i = 0; i < rank; ++i)
        m += rng.uniform(lo, hi) * u.col(i) * dom.basis().col(i).transpose();
    return operator_on_domain(m, dom, tol);
}

PsdRelation random_psd_relation(int n, int mul_dim, int kernel_dim, double lo, double hi, Rng& rng,
                                const Tol& tol) {
    if (mul_dim > n || kernel_dim > n - mul_dim)
        throw InputError("random_psd_relation: mul and kernel exceed the ambient dimension");
    Matrix q = random_orthogonal(n, rng);
    int d = n - mul_dim;
    Subspace dom = d > 0 ? Subspace(n, q.leftCols(d)) : Subspace::zero(n);
    Subspace mul = mul_dim > 0 ? Subspace(n, q.rightCols(mul_dim)) : Subspace::zero(n);
    return psd_from_parts(dom, random_psd_matrix(d, kernel_dim, lo, hi, rng), mul, tol);
}

LinearRelation structured_relation(int dim_h, int dim_k, int dom_dim, int rank, int mul_dim, double lo,
                                   double hi, Rng& rng, const Tol& tol) {
    if (dom_dim > dim_h || rank > dom_dim || rank + mul_dim > dim_k)
        throw InputError("structured_relation: rank, mul and domain exceed the ambient dimensions");
    Subspace dom = random_subspace(dim_h, dom_dim, rng);
    Matrix qk = random_orthogonal(dim_k, rng);
    Matrix m = Matrix::Zero(dim_k, dim_h);
    for (int i = 0; i < rank; ++i)
        m += rng.uniform(lo, hi) * qk.col(i) * dom.basis().col(i).transpose();
    Matrix gens = Matrix::Zero(dim_h + dim_k, dom_dim + mul_dim);
    gens.block(0, 0, dim_h, dom_dim) = dom.basis();
    gens.block(dim_h, 0, dim_k, dom_dim) = m * dom.basis();
    gens.block(dim_h, dom_dim, dim_k, mul_dim) = qk.middleCols(rank, mul_dim);
    return relation_from_graph(dim_h, dim_k, gens, tol);
}

Matrix random_contraction(int rows, int cols, Rng& rng) {
    if (rows == 0 || cols == 0) return Matrix::Zero(rows, cols);
    Matrix g = gaussian_matrix(rows, cols, rng);
    Eigen::JacobiSVD<Matrix> svd(g);
    double top = svd.singularValues()(0);
    if (top <= 0.0) return Matrix::Zero(rows, cols);
    return g * (rng.uniform(0.2, 1.0) / top);
}

DominatedPair random_dominated_pair(int n, Rng& rng, const Tol& tol) {
    LinearRelation b = random_relation(n, n, rng, tol);
    Matrix c = random_contraction(n, n, rng);
    LinearRelation cb = compose_matrix(c, b, tol);
    int extra = rng.uniform_int(0, 2);
    Matrix gens(2 * n, cb.graph_dim() + extra);
    gens.leftCols(cb.graph_dim()) = cb.graph().basis();
    gens.rightCols(extra) = gaussian_matrix(2 * n, extra, rng);
    return DominatedPair{relation_from_graph(n, n, gens, tol), std::move(b)};
}

std::vector<LinearRelation> staircase_terms(const OperatorRelation& bound, int steps, const Tol& tol) {
    if (steps < 1) throw InputError("staircase_terms: steps must be at least 1");
    std::vector<LinearRelation> out;
    out.reserve(steps);
    double shrink = 0.5;
    for (int k = 1; k <= steps; ++k) {
        Matrix scale = (1.0 - shrink) * Matrix::Identity(bound.dim_k(), bound.dim_k());
        out.push_back(compose_matrix(scale, bound.relation(), tol));
        shrink *= 0.5;
    }
    return out;
}

Schedule random_schedule(int asymptote_sign, Rng& rng, bool strong) {
    const int q = strong ? 1 : rng.uniform_int(1, 2);
    if (asymptote_sign > 0) {
        switch (rng.uniform_int(0, 2)) {
            case 0: return Schedule{Schedule::Kind::N, 1.0, 1, 1};
            case 1:
                if (!strong) return Schedule{Schedule::Kind::SqrtN, 1.0, 1, 1};
                [[fallthrough]];
            default: return Schedule{Schedule::Kind::Pow, 1.0, rng.uniform_int(strong ? q : 1, 3), q};
        }
    }
    if (asymptote_sign < 0) {
        switch (rng.uniform_int(0, 2)) {
            case 0: return Schedule{Schedule::Kind::InvN, 1.0, 1, 1};
            case 1:
                if (!strong) return Schedule{Schedule::Kind::InvSqrtN, 1.0, 1, 1};
                [[fallthrough]];
            default: return Schedule{Schedule::Kind::Pow, 1.0, -rng.uniform_int(strong ? q : 1, 3), q};
        }
    }
    return Schedule{Schedule::Kind::Const, rng.uniform(0.4, 2.0), 1, 1};
}

}  // namespace relcalc

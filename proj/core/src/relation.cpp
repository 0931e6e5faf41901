#include "relcalc/relation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace relcalc {

namespace {

// Graph basis split into the H rows (top) and K rows (bottom).
Matrix top_block(const LinearRelation& t) { return t.graph().basis().topRows(t.dim_h()); }
Matrix bottom_block(const LinearRelation& t) { return t.graph().basis().bottomRows(t.dim_k()); }

Subspace axis_subspace(int total, int offset, int dim) {
    Matrix b = Matrix::Zero(total, dim);
    b.block(offset, 0, dim, dim) = Matrix::Identity(dim, dim);
    return Subspace(total, b);
}

Matrix clamp_psd(const Matrix& sym, const Tol& tol, const char* what) {
    if (sym.rows() == 0) return sym;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()));
    Vector ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol.psd_tol * scale)
            throw InputError(std::string(what) + ": form is not nonnegative (eigenvalue " +
                             std::to_string(ev(i)) + ")");
        if (ev(i) < 0.0) ev(i) = 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

LinearRelation::LinearRelation(int dim_h, int dim_k, Subspace graph)
    : dim_h_(dim_h), dim_k_(dim_k), graph_(std::move(graph)) {
    if (dim_h < 0 || dim_k < 0) throw InputError("relation dimensions must be nonnegative");
    if (graph_.ambient() != dim_h + dim_k)
        throw InputError("relation graph lives in the wrong ambient dimension: expected " +
                         std::to_string(dim_h + dim_k) + ", got " + std::to_string(graph_.ambient()));
}

Subspace LinearRelation::dom(const Tol& tol) const {
    return orthonormalize_anchored(graph_.basis().topRows(dim_h_), 1.0, tol);
}

Subspace LinearRelation::ran(const Tol& tol) const {
    return orthonormalize_anchored(graph_.basis().bottomRows(dim_k_), 1.0, tol);
}

Subspace LinearRelation::kernel(const Tol& tol) const {
    Subspace inter = intersect(graph_, axis_subspace(dim_h_ + dim_k_, 0, dim_h_), tol);
    return orthonormalize_anchored(inter.basis().topRows(dim_h_), 1.0, tol);
}

Subspace LinearRelation::mul(const Tol& tol) const {
    Subspace inter = intersect(graph_, axis_subspace(dim_h_ + dim_k_, dim_h_, dim_k_), tol);
    return orthonormalize_anchored(inter.basis().bottomRows(dim_k_), 1.0, tol);
}

LinearRelation LinearRelation::inverse(const Tol& tol) const {
    (void)tol;
    Matrix flipped(dim_h_ + dim_k_, graph_.dim());
    flipped.topRows(dim_k_) = graph_.basis().bottomRows(dim_k_);
    flipped.bottomRows(dim_h_) = graph_.basis().topRows(dim_h_);
    return LinearRelation(dim_k_, dim_h_, Subspace(dim_h_ + dim_k_, flipped));
}

LinearRelation relation_from_graph(int dim_h, int dim_k, const Matrix& generators, const Tol& tol) {
    if (generators.rows() != dim_h + dim_k)
        throw InputError("relation generators must have dim_h + dim_k = " + std::to_string(dim_h + dim_k) +
                         " rows, got " + std::to_string(generators.rows()));
    return LinearRelation(dim_h, dim_k, orthonormalize(generators, tol));
}

bool equal_relations(const LinearRelation& a, const LinearRelation& b, const Tol& tol) {
    if (!a.same_spaces(b)) return false;
    return equal_subspaces(a.graph(), b.graph(), tol);
}

double relation_distance(const LinearRelation& a, const LinearRelation& b) {
    if (!a.same_spaces(b)) throw InputError("relation_distance: relations live between different spaces");
    return projector_distance(a.graph(), b.graph());
}

OperatorRelation::OperatorRelation(const LinearRelation& rel, const Tol& tol)
    : rel_(rel), domain_(rel.dom(tol)), action_(rel.dim_k(), rel.dim_h()) {
    Subspace m = rel.mul(tol);
    if (m.dim() != 0)
        throw InputError("relation is multivalued (mul dimension " + std::to_string(m.dim()) +
                         "), not an operator");
    // Unique action on the domain: graph columns (f, f') with f of full
    // column rank, so f' = G_bot pinv(G_top) f. The pseudoinverse kills
    // dom^perp, which keeps the action zero there.
    action_ = bottom_block(rel) * pseudoinverse(top_block(rel), tol);
    // The graph basis has unit columns, so action directions below the
    // rank cutoff at unit scale are representation roundoff, not genuinely
    // flat directions. Flush them; otherwise a zero operator extracts as
    // noise whose pseudoinverse turns into order-one junk downstream.
    if (action_.rows() > 0 && action_.cols() > 0) {
        Eigen::JacobiSVD<Matrix> svd(action_, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double cut = tol.rank_rel * std::max(1.0, sv(0));
        int rank = 0;
        while (rank < sv.size() && sv(rank) > cut) ++rank;
        if (rank < sv.size())
            action_ = svd.matrixU().leftCols(rank) * sv.head(rank).asDiagonal() *
                      svd.matrixV().leftCols(rank).transpose();
    }
}

OperatorRelation operator_on_domain(const Matrix& m, const Subspace& domain, const Tol& tol) {
    if (m.cols() != domain.ambient())
        throw InputError("operator_on_domain: matrix has " + std::to_string(m.cols()) +
                         " columns but the domain ambient dimension is " + std::to_string(domain.ambient()));
    int h = static_cast<int>(m.cols());
    int k = static_cast<int>(m.rows());
    Matrix gens(h + k, domain.dim());
    gens.topRows(h) = domain.basis();
    gens.bottomRows(k) = m * domain.basis();
    return OperatorRelation(relation_from_graph(h, k, gens, tol), tol);
}

OperatorRelation operator_everywhere(const Matrix& m, const Tol& tol) {
    return operator_on_domain(m, Subspace::full(static_cast<int>(m.cols())), tol);
}

OperatorRelation zero_operator(int dim_h, int dim_k, const Subspace& domain, const Tol& tol) {
    if (domain.ambient() != dim_h) throw InputError("zero_operator: domain ambient dimension mismatch");
    return operator_on_domain(Matrix::Zero(dim_k, dim_h), domain, tol);
}

LinearRelation adjoint(const LinearRelation& t, const Tol& tol) {
    // (g, g') is in the adjoint iff it is orthogonal to every (f', -f).
    Matrix rotated(t.dim_k() + t.dim_h(), t.graph_dim());
    rotated.topRows(t.dim_k()) = bottom_block(t);
    rotated.bottomRows(t.dim_h()) = -top_block(t);
    Subspace adj_graph = complement(orthonormalize(rotated, tol), tol);
    return LinearRelation(t.dim_k(), t.dim_h(), adj_graph);
}

LebesgueParts lebesgue_decompose(const LinearRelation& t, const Tol& tol) {
    Matrix p = t.mul(tol).projector();
    Matrix ip = Matrix::Identity(t.dim_k(), t.dim_k()) - p;
    LinearRelation reg_rel = compose_matrix(ip, t, tol);
    LinearRelation sing = compose_matrix(p, t, tol);
    return LebesgueParts{OperatorRelation(reg_rel, tol), sing, p};
}

LinearRelation compose_matrix(const Matrix& c, const LinearRelation& t, const Tol& tol) {
    if (c.cols() != t.dim_k())
        throw InputError("compose_matrix: matrix has " + std::to_string(c.cols()) +
                         " columns but the relation maps into dimension " + std::to_string(t.dim_k()));
    if (c.rows() == c.cols() && c == Matrix::Identity(c.rows(), c.cols())) return t;
    Matrix top = top_block(t);
    Matrix bot = c * bottom_block(t);
    // A graph column annihilated by c leaves pure roundoff behind. Keep a
    // column only when its f side survives or its image stays above
    // roundoff at the scale of c itself; renormalizing a dead column would
    // resurrect the direction c just removed.
    const double cscale = c.norm();
    std::vector<int> keep;
    keep.reserve(t.graph_dim());
    for (int i = 0; i < t.graph_dim(); ++i) {
        if (top.col(i).norm() > tol.rank_rel || bot.col(i).norm() > tol.rank_rel * cscale)
            keep.push_back(i);
    }
    Matrix gens(t.dim_h() + c.rows(), static_cast<int>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i) {
        gens.col(static_cast<int>(i)).head(t.dim_h()) = top.col(keep[i]);
        gens.col(static_cast<int>(i)).tail(c.rows()) = bot.col(keep[i]);
    }
    return relation_from_graph(t.dim_h(), static_cast<int>(c.rows()), gens, tol);
}

LinearRelation compose_relations(const LinearRelation& t2, const LinearRelation& t1, const Tol& tol) {
    if (t1.dim_k() != t2.dim_h())
        throw InputError("compose_relations: inner dimensions differ (" + std::to_string(t1.dim_k()) +
                         " vs " + std::to_string(t2.dim_h()) + ")");
    int h = t1.dim_h(), k = t1.dim_k(), kk = t2.dim_k();
    int total = h + k + kk;
    // Cylinder over graph(t1): (f, h, anything).
    Matrix c1 = Matrix::Zero(total, t1.graph_dim() + kk);
    c1.block(0, 0, h + k, t1.graph_dim()) = t1.graph().basis();
    c1.block(h + k, t1.graph_dim(), kk, kk) = Matrix::Identity(kk, kk);
    // Cylinder over graph(t2): (anything, h, g).
    Matrix c2 = Matrix::Zero(total, h + t2.graph_dim());
    c2.block(0, 0, h, h) = Matrix::Identity(h, h);
    c2.block(h, h, k + kk, t2.graph_dim()) = t2.graph().basis();
    Subspace inter = intersect(Subspace(total, c1), Subspace(total, c2), tol);
    // Project out the middle coordinate block. Anchored at the unit columns
    // of the intersection basis: a direction living purely in the middle
    // projects to roundoff and must vanish, not renormalize.
    Matrix gens(h + kk, inter.dim());
    gens.topRows(h) = inter.basis().topRows(h);
    gens.bottomRows(kk) = inter.basis().bottomRows(kk);
    return LinearRelation(h, kk, orthonormalize_anchored(gens, 1.0, tol));
}

LinearRelation componentwise_sum(const LinearRelation& t1, const LinearRelation& t2, const Tol& tol) {
    if (!t1.same_spaces(t2)) throw InputError("componentwise_sum: relations live between different spaces");
    int h = t1.dim_h(), k = t1.dim_k();
    int total = h + k + k;
    // (f, y, z) with (f, y) in t1 ...
    Matrix c1 = Matrix::Zero(total, t1.graph_dim() + k);
    c1.block(0, 0, h + k, t1.graph_dim()) = t1.graph().basis();
    c1.block(h + k, t1.graph_dim(), k, k) = Matrix::Identity(k, k);
    // ... and (f, z) in t2.
    Matrix c2 = Matrix::Zero(total, t2.graph_dim() + k);
    c2.block(0, 0, h, t2.graph_dim()) = t2.graph().basis().topRows(h);
    c2.block(h + k, 0, k, t2.graph_dim()) = t2.graph().basis().bottomRows(k);
    c2.block(h, t2.graph_dim(), k, k) = Matrix::Identity(k, k);
    Subspace inter = intersect(orthonormalize(c1, tol), orthonormalize(c2, tol), tol);
    // Anchored for the same reason as in composition: a pair of opposite
    // summands projects to roundoff and must not renormalize back.
    Matrix gens(h + k, inter.dim());
    gens.topRows(h) = inter.basis().topRows(h);
    gens.bottomRows(k) =
        inter.basis().middleRows(h, k) + inter.basis().bottomRows(k);
    return LinearRelation(h, k, orthonormalize_anchored(gens, 1.0, tol));
}

PsdRelation::PsdRelation(LinearRelation rel, Subspace domain, Matrix op, Subspace mul)
    : rel_(std::move(rel)), domain_(std::move(domain)), op_(std::move(op)), mul_(std::move(mul)) {}

PsdRelation::PsdRelation(const LinearRelation& rel, const Tol& tol)
    : rel_(rel), domain_(rel.dim_h()), op_(0, 0), mul_(rel.dim_k()) {
    if (rel.dim_h() != rel.dim_k())
        throw InputError("PSD relation must act within one space, got " +
                         dim_str(rel.dim_h(), rel.dim_k()));
    LinearRelation adj = adjoint(rel, tol);
    double self_dist = relation_distance(rel, adj);
    if (self_dist >= tol.sub_eq_tol)
        throw InputError("relation is not selfadjoint (graph distance to adjoint " +
                         std::to_string(self_dist) + ")");
    // Nonnegativity of (f', f) over the whole graph: the symmetrized
    // coefficient form must be PSD.
    Matrix f = rel.graph().basis().topRows(rel.dim_h());
    Matrix fp = rel.graph().basis().bottomRows(rel.dim_k());
    Matrix form = 0.5 * (fp.transpose() * f + f.transpose() * fp);
    if (eig_min(form) < -tol.psd_tol)
        throw InputError("relation form is negative (min eigenvalue " +
                         std::to_string(eig_min(form)) + ")");
    mul_ = rel.mul(tol);
    domain_ = complement(mul_, tol);
    if (!equal_subspaces(domain_, rel.dom(tol), tol))
        throw InputError("selfadjoint split failed: dom is not the complement of mul");
    LebesgueParts parts = lebesgue_decompose(rel, tol);
    Matrix s = domain_.basis().transpose() * parts.reg.action() * domain_.basis();
    op_ = clamp_psd(s, tol, "psd operator part");
    // Re-express the graph through the extracted operator part so the
    // relation and its spectral data describe one object. The action
    // recovery flushes singular values in the rank_rel noise band; without
    // this rebuild such a slope would survive in the graph while the
    // operator part and the square root drop it.
    int n = rel.dim_h();
    int d = domain_.dim();
    int m = mul_.dim();
    Matrix gens = Matrix::Zero(2 * n, d + m);
    gens.block(0, 0, n, d) = domain_.basis();
    gens.block(n, 0, n, d) = domain_.basis() * op_;
    gens.block(n, d, n, m) = mul_.basis();
    rel_ = relation_from_graph(n, n, gens, tol);
}

OperatorRelation PsdRelation::op_part_operator(const Tol& tol) const {
    return operator_on_domain(op_part_ambient(), domain_, tol);
}

OperatorRelation PsdRelation::sqrt_operator(const Tol& tol) const {
    Matrix q = psd_sqrt(op_, tol);
    return operator_on_domain(domain_.basis() * q * domain_.basis().transpose(), domain_, tol);
}

PsdRelation PsdRelation::scaled(double c, const Tol& tol) const {
    if (!(c > 0.0)) throw InputError("psd scaling factor must be positive");
    return psd_from_parts(domain_, c * op_, mul_, tol);
}

PsdRelation psd_from_parts(const Subspace& domain, const Matrix& op_in_domain, const Subspace& mul,
                           const Tol& tol) {
    if (domain.ambient() != mul.ambient())
        throw InputError("psd_from_parts: domain and mul ambient dimensions differ");
    if (op_in_domain.rows() != domain.dim() || op_in_domain.cols() != domain.dim())
        throw InputError("psd_from_parts: operator part must be square of the domain dimension");
    if (!equal_subspaces(complement(domain, tol), mul, tol))
        throw InputError("psd_from_parts: mul is not the orthogonal complement of the domain");
    if (symmetry_defect(op_in_domain) > 10.0 * tol.rank_rel)
        throw InputError("psd_from_parts: operator part is not symmetric");
    Matrix s = clamp_psd(op_in_domain, tol, "psd_from_parts");
    int n = domain.ambient();
    int d = domain.dim();
    int m = mul.dim();
    Matrix gens = Matrix::Zero(2 * n, d + m);
    gens.block(0, 0, n, d) = domain.basis();
    gens.block(n, 0, n, d) = domain.basis() * s;
    gens.block(n, d, n, m) = mul.basis();
    LinearRelation rel = relation_from_graph(n, n, gens, tol);
    return PsdRelation(std::move(rel), domain, std::move(s), mul);
}

PsdRelation psd_from_matrix(const Matrix& m, const Tol& tol) {
    if (m.rows() != m.cols())
        throw InputError("psd_from_matrix: matrix must be square, got " + dim_str(m.rows(), m.cols()));
    if (symmetry_defect(m) > 10.0 * tol.rank_rel)
        throw InputError("psd_from_matrix: matrix is not symmetric");
    int n = static_cast<int>(m.rows());
    return psd_from_parts(Subspace::full(n), 0.5 * (m + m.transpose()), Subspace::zero(n), tol);
}

PsdRelation product_star(const LinearRelation& t, const Tol& tol) {
    LinearRelation comp = compose_relations(adjoint(t, tol), t, tol);
    try {
        return PsdRelation(comp, tol);
    } catch (const InputError& e) {
        // t* t is nonnegative selfadjoint by theorem; reaching this means
        // the numerics escalated beyond the configured tolerances.
        throw NumericalError(std::string("product_star: validation failed unexpectedly: ") + e.what());
    }
}

PsdRelation psd_sqrt_relation(const PsdRelation& h, const Tol& tol) {
    return psd_from_parts(h.domain(), psd_sqrt(h.op_part(), tol), h.mul_part(), tol);
}

Matrix resolvent(const PsdRelation& h, const Tol& tol) {
    (void)tol;
    int d = h.domain().dim();
    Matrix shifted = h.op_part() + Matrix::Identity(d, d);
    return h.domain().basis() * shifted.inverse() * h.domain().basis().transpose();
}

PsdRelation relation_from_resolvent(const Matrix& r, const Tol& tol) {
    if (r.rows() != r.cols())
        throw InputError("relation_from_resolvent: matrix must be square, got " + dim_str(r.rows(), r.cols()));
    if (symmetry_defect(r) > 10.0 * tol.rank_rel)
        throw InputError("relation_from_resolvent: matrix is not symmetric");
    int n = static_cast<int>(r.rows());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (r + r.transpose()));
    Vector rho = es.eigenvalues();
    for (int i = 0; i < n; ++i) {
        if (rho(i) < -tol.psd_tol || rho(i) > 1.0 + tol.psd_tol)
            throw InputError("relation_from_resolvent: eigenvalue " + std::to_string(rho(i)) +
                             " outside [0, 1]");
        if (rho(i) < tol.snap_tol) rho(i) = 0.0;
        if (rho(i) > 1.0 - tol.snap_tol) rho(i) = 1.0;
    }
    int d = 0, m = 0;
    for (int i = 0; i < n; ++i) (rho(i) > 0.0 ? d : m)++;
    Matrix dom_basis(n, d), mul_basis(n, m);
    Vector op_eigs(d);
    for (int i = 0, id = 0, im = 0; i < n; ++i) {
        if (rho(i) > 0.0) {
            dom_basis.col(id) = es.eigenvectors().col(i);
            op_eigs(id) = (1.0 - rho(i)) / rho(i);
            ++id;
        } else {
            mul_basis.col(im++) = es.eigenvectors().col(i);
        }
    }
    Matrix op = dom_basis.cols() > 0 ? Matrix(op_eigs.asDiagonal()) : Matrix(0, 0);
    return psd_from_parts(Subspace(n, dom_basis), op, Subspace(n, mul_basis), tol);
}

Matrix spectral_truncation(const Matrix& a, double n, const Tol& tol) {
    if (!(n > 0.0)) throw InputError("spectral_truncation: cutoff must be positive");
    if (a.rows() != a.cols())
        throw InputError("spectral_truncation: matrix must be square, got " + dim_str(a.rows(), a.cols()));
    if (symmetry_defect(a) > 10.0 * tol.rank_rel)
        throw InputError("spectral_truncation: matrix is not symmetric");
    if (a.rows() == 0) return a;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    Vector ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -tol.psd_tol * scale)
        throw InputError("spectral_truncation: matrix is not nonnegative");
    // Truncation is inactive once the whole spectrum sits at or below the
    // cutoff; returning the input unchanged makes the approximation land
    // on the original exactly. Eigenvalues within psd_tol of the cutoff
    // count as below it, so a level placed at an exact eigenvalue keeps
    // that eigenvalue even after roundoff from upstream square roots.
    const double cut = n + tol.psd_tol * scale;
    if (ev.maxCoeff() <= cut) return a;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > cut) ev(i) = 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

bool is_singular_relation(const LinearRelation& t, const Tol& tol) {
    return t.graph_dim() == t.dom(tol).dim() + t.ran(tol).dim();
}

LinearRelation direct_sum(const LinearRelation& a, const LinearRelation& b, const Tol& tol) {
    (void)tol;
    int h = a.dim_h() + b.dim_h();
    int k = a.dim_k() + b.dim_k();
    Matrix gens = Matrix::Zero(h + k, a.graph_dim() + b.graph_dim());
    gens.block(0, 0, a.dim_h(), a.graph_dim()) = a.graph().basis().topRows(a.dim_h());
    gens.block(a.dim_h(), a.graph_dim(), b.dim_h(), b.graph_dim()) = b.graph().basis().topRows(b.dim_h());
    gens.block(h, 0, a.dim_k(), a.graph_dim()) = a.graph().basis().bottomRows(a.dim_k());
    gens.block(h + a.dim_k(), a.graph_dim(), b.dim_k(), b.graph_dim()) =
        b.graph().basis().bottomRows(b.dim_k());
    return LinearRelation(h, k, orthonormalize(gens));
}

}  // namespace relcalc

#include "relcalc/limits.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <utility>

namespace relcalc {

namespace {

// Admission threshold for the strong graph limit test and the pipeline
// agreement checks; pinned rather than derived so reports stay comparable
// across tolerance configs.
constexpr double kAdmitTol = 1e-6;
constexpr double kPipeTol = 1e-6;
constexpr double kPipeOpTol = 1e-7;
constexpr double kSignEps = 1e-8;

Matrix sym_clamp(const Matrix& s, const Tol& tol, const char* what) {
    if (s.rows() == 0) return s;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
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

// Flip the sign of v so the first coordinate of magnitude above kSignEps
// is positive; the canonical representative convention.
void fix_sign(Vector& v) {
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > kSignEps) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

// Canonical operator realizing a diagonalized PSD form: rows are
// sqrt(lambda_i) u_i^T for the kept eigenpairs in descending order.
OperatorRelation canonical_from_eigs(const Subspace& domain, const std::vector<double>& lambdas,
                                     const std::vector<Vector>& dirs, const Tol& tol) {
    int n = domain.ambient();
    int r = 0;
    for (double l : lambdas)
        if (l > 0.0) ++r;
    Matrix action = Matrix::Zero(r, n);
    int row = 0;
    for (size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] <= 0.0) continue;
        Vector u = dirs[i];
        fix_sign(u);
        action.row(row++) = std::sqrt(lambdas[i]) * u.transpose();
    }
    return operator_on_domain(action, domain, tol);
}

std::uint64_t pow2(int j) {
    if (j < 0 || j >= 63) throw NumericalError("doubling index out of range");
    return std::uint64_t{1} << j;
}

struct LoopOutcome {
    Matrix final_r;
    ConvergenceInfo info;
};

// Doubling loop on resolvents: stop at the first j where both
// ||R(2^j) - R(2^{j+1})|| and ||R(2^{j+1}) - R(2^{j+2})|| drop below
// conv_eps; the most converged iterate R(2^{j+2}) is returned.
LoopOutcome resolvent_loop(const std::function<Matrix(int)>& r_at, const Tol& tol) {
    LoopOutcome out;
    Matrix r0 = r_at(0), r1 = r_at(1), r2 = r_at(2);
    for (int j = 0; j <= tol.n_max_doublings; ++j) {
        double d1 = (r0 - r1).norm();
        double d2 = (r1 - r2).norm();
        out.info.doublings = j;
        out.info.n_final = pow2(j + 2);
        out.info.delta1 = d1;
        out.info.delta2 = d2;
        if (d1 <= tol.conv_eps && d2 <= tol.conv_eps) {
            out.info.converged = true;
            out.final_r = r2;
            return out;
        }
        if (j == tol.n_max_doublings) break;
        r0 = std::move(r1);
        r1 = std::move(r2);
        r2 = r_at(j + 3);
    }
    out.final_r = r2;
    return out;
}

std::string no_convergence_note(const ConvergenceInfo& info) {
    return "resolvents did not settle within the doubling cap (deltas " + std::to_string(info.delta1) +
           ", " + std::to_string(info.delta2) + " at n=" + std::to_string(info.n_final) +
           "); limit built from the best iterate";
}

}  // namespace

double Schedule::factor(std::uint64_t n) const {
    double x = static_cast<double>(n);
    switch (kind) {
        case Kind::N: return x;
        case Kind::SqrtN: return std::sqrt(x);
        case Kind::InvN: return 1.0 / x;
        case Kind::InvSqrtN: return 1.0 / std::sqrt(x);
        case Kind::Const: return c;
        case Kind::Pow: return std::pow(x, static_cast<double>(p) / static_cast<double>(q));
    }
    throw InputError("schedule: unknown kind");
}

int Schedule::asymptote() const {
    switch (kind) {
        case Kind::N:
        case Kind::SqrtN: return 1;
        case Kind::InvN:
        case Kind::InvSqrtN: return -1;
        case Kind::Const: return 0;
        case Kind::Pow: return (p > 0) - (p < 0);
    }
    return 0;
}

void Schedule::validate() const {
    if (kind == Kind::Const && !(c > 0.0)) throw InputError("schedule: constant factor must be positive");
    if (kind == Kind::Pow && q <= 0) throw InputError("schedule: pow denominator must be positive");
}

SequenceSpec::SequenceSpec(Scaled s) : node_(std::move(s)) {
    const auto& sc = std::get<Scaled>(node_);
    sc.schedule.validate();
    dim_h_ = sc.base.dim_h();
    dim_k_ = sc.base.dim_k();
}

SequenceSpec::SequenceSpec(Explicit e) : node_(std::move(e)) {
    const auto& ex = std::get<Explicit>(node_);
    if (ex.terms.empty()) throw InputError("explicit sequence needs at least one term");
    dim_h_ = ex.terms.front().dim_h();
    dim_k_ = ex.terms.front().dim_k();
    for (const auto& t : ex.terms)
        if (t.dim_h() != dim_h_ || t.dim_k() != dim_k_)
            throw InputError("explicit sequence terms live between different spaces");
}

SequenceSpec::SequenceSpec(DirectSum d) : node_(std::move(d)) {
    const auto& ds = std::get<DirectSum>(node_);
    if (ds.parts.empty()) throw InputError("direct sum sequence needs at least one part");
    for (const auto& p : ds.parts) {
        dim_h_ += p.dim_h();
        dim_k_ += p.dim_k();
    }
}

SequenceSpec SequenceSpec::scaled(Schedule sched, LinearRelation base) {
    return SequenceSpec(Scaled{sched, std::move(base)});
}
SequenceSpec SequenceSpec::explicit_terms(std::vector<LinearRelation> terms) {
    return SequenceSpec(Explicit{std::move(terms)});
}
SequenceSpec SequenceSpec::sum_of(std::vector<SequenceSpec> parts) {
    return SequenceSpec(DirectSum{std::move(parts)});
}

LinearRelation SequenceSpec::at(std::uint64_t n, const Tol& tol) const {
    if (n == 0) throw InputError("sequence index starts at 1");
    if (const auto* s = std::get_if<Scaled>(&node_)) {
        double c = s->schedule.factor(n);
        return compose_matrix(c * Matrix::Identity(dim_k_, dim_k_), s->base, tol);
    }
    if (const auto* e = std::get_if<Explicit>(&node_)) {
        size_t idx = std::min<std::uint64_t>(n, e->terms.size()) - 1;
        return e->terms[idx];
    }
    const auto& ds = std::get<DirectSum>(node_);
    LinearRelation acc = ds.parts.front().at(n, tol);
    for (size_t i = 1; i < ds.parts.size(); ++i) acc = direct_sum(acc, ds.parts[i].at(n, tol), tol);
    return acc;
}

SequenceSpec SequenceSpec::map_regular(const Tol& tol) const {
    if (const auto* s = std::get_if<Scaled>(&node_))
        return SequenceSpec(Scaled{s->schedule, lebesgue_decompose(s->base, tol).reg.relation()});
    if (const auto* e = std::get_if<Explicit>(&node_)) {
        std::vector<LinearRelation> terms;
        terms.reserve(e->terms.size());
        for (const auto& t : e->terms) terms.push_back(lebesgue_decompose(t, tol).reg.relation());
        return SequenceSpec(Explicit{std::move(terms)});
    }
    std::vector<SequenceSpec> parts;
    for (const auto& p : std::get<DirectSum>(node_).parts) parts.push_back(p.map_regular(tol));
    return SequenceSpec(DirectSum{std::move(parts)});
}

namespace {
Schedule squared_schedule(const Schedule& s) {
    using K = Schedule::Kind;
    switch (s.kind) {
        case K::N: return Schedule{K::Pow, 1.0, 2, 1};
        case K::SqrtN: return Schedule{K::N, 1.0, 1, 1};
        case K::InvN: return Schedule{K::Pow, 1.0, -2, 1};
        case K::InvSqrtN: return Schedule{K::InvN, 1.0, 1, 1};
        case K::Const: return Schedule{K::Const, s.c * s.c, 1, 1};
        case K::Pow: return Schedule{K::Pow, 1.0, 2 * s.p, s.q};
    }
    throw InputError("schedule: unknown kind");
}
}  // namespace

SequenceSpec SequenceSpec::map_product_star(const Tol& tol) const {
    if (const auto* s = std::get_if<Scaled>(&node_))
        return SequenceSpec(Scaled{squared_schedule(s->schedule), product_star(s->base, tol).relation()});
    if (const auto* e = std::get_if<Explicit>(&node_)) {
        std::vector<LinearRelation> terms;
        terms.reserve(e->terms.size());
        for (const auto& t : e->terms) terms.push_back(product_star(t, tol).relation());
        return SequenceSpec(Explicit{std::move(terms)});
    }
    std::vector<SequenceSpec> parts;
    for (const auto& p : std::get<DirectSum>(node_).parts) parts.push_back(p.map_product_star(tol));
    return SequenceSpec(DirectSum{std::move(parts)});
}

RepresentingMap representing_map(const GramSpec& spec, const Tol& tol) {
    const Matrix& phi = spec.generators;
    const Matrix& g = spec.gram;
    if (g.rows() != g.cols() || g.rows() != phi.cols())
        throw InputError("representing_map: gram must be square over the generator count");
    if (symmetry_defect(g) > 10.0 * tol.rank_rel)
        throw InputError("representing_map: gram is not symmetric");
    double gscale = 1.0 + (g.rows() > 0 ? g.norm() : 0.0);
    if (g.rows() > 0 && eig_min(g) < -tol.psd_tol * gscale)
        throw InputError("representing_map: gram is not nonnegative");

    // Well definedness: combinations that vanish among the generators must
    // be neutral for the form, otherwise no map can realize it.
    if (phi.cols() > 0) {
        Eigen::JacobiSVD<Matrix> svd(phi, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        double cutoff = sv.size() > 0 ? tol.rank_rel * sv(0) : 0.0;
        for (int i = 0; i < phi.cols(); ++i) {
            bool in_kernel = i >= sv.size() || sv(i) <= cutoff;
            if (!in_kernel) continue;
            Vector c = svd.matrixV().col(i);
            if ((g * c).norm() > tol.psd_tol * gscale)
                throw InputError("representing_map: form is inconsistent on dependent generators");
        }
    }

    int n = static_cast<int>(phi.rows());
    Subspace dom = orthonormalize(phi, tol);
    Matrix y = dom.basis().transpose() * phi;
    Matrix yp = pseudoinverse(y, tol);
    Matrix s = sym_clamp(yp.transpose() * g * yp, tol, "representing_map");

    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    std::vector<double> kept;
    std::vector<Vector> dirs;
    int d = dom.dim();
    double lmax = d > 0 ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
    double cut = tol.rank_rel * lmax;
    Matrix neutral_basis(n, 0);
    for (int i = d - 1; i >= 0; --i) {  // descending
        double lambda = es.eigenvalues()(i);
        Vector u = dom.basis() * es.eigenvectors().col(i);
        if (lambda > cut && lambda > 0.0) {
            kept.push_back(lambda);
            dirs.push_back(u);
        } else {
            neutral_basis.conservativeResize(n, neutral_basis.cols() + 1);
            neutral_basis.col(neutral_basis.cols() - 1) = u;
        }
    }
    return RepresentingMap{canonical_from_eigs(dom, kept, dirs, tol), Subspace(n, neutral_basis)};
}

PartialIsometry connect_maps(const OperatorRelation& x, const OperatorRelation& y, const Tol& tol,
                             double compat_tol) {
    return link_partial_isometry(x, y, tol, compat_tol);
}

OperatorRelation range_space_map(const Matrix& a, const Tol& tol) {
    if (a.rows() != a.cols())
        throw InputError("range_space_map: matrix must be square, got " + dim_str(a.rows(), a.cols()));
    if (symmetry_defect(a) > 10.0 * tol.rank_rel)
        throw InputError("range_space_map: matrix is not symmetric");
    if (a.rows() > 0) {
        double lo = eig_min(a), hi = eig_max(a);
        if (lo < -tol.psd_tol || hi > 1.0 + tol.psd_tol)
            throw InputError("range_space_map: spectrum must sit inside [0, 1], got [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    Matrix q = psd_sqrt(0.5 * (a + a.transpose()), tol);
    Subspace dom = orthonormalize(q, tol);
    return operator_on_domain(pseudoinverse(q, tol), dom, tol);
}

namespace {

// Memoized term evaluation with monotonicity verification between
// consecutive doubling points.
class OperatorTerms {
  public:
    OperatorTerms(const SequenceSpec& seq, Direction dir, const Tol& tol)
        : seq_(seq), dir_(dir), tol_(tol) {}

    const OperatorRelation& at(int j) {
        auto it = cache_.find(j);
        if (it != cache_.end()) return it->second;
        LinearRelation rel = seq_.at(pow2(j), tol_);
        OperatorRelation op(rel, tol_);
        auto [pos, _] = cache_.emplace(j, std::move(op));
        verify_monotone_around(j);
        return pos->second;
    }

  private:
    void verify_monotone_around(int j) {
        for (int lo : {j - 1, j}) {
            if (!cache_.count(lo) || !cache_.count(lo + 1) || checked_.count(lo)) continue;
            const OperatorRelation& a = cache_.at(lo);
            const OperatorRelation& b = cache_.at(lo + 1);
            bool ok = dir_ == Direction::Nondecreasing
                          ? dominates(a.relation(), b.relation(), tol_).has_value()
                          : dominates(b.relation(), a.relation(), tol_).has_value();
            if (!ok)
                throw InputError("operator sequence is not monotone under contractive domination between n=" +
                                 std::to_string(pow2(lo)) + " and n=" + std::to_string(pow2(lo + 1)));
            checked_.insert(lo);
        }
    }

    const SequenceSpec& seq_;
    Direction dir_;
    const Tol& tol_;
    std::map<int, OperatorRelation> cache_;
    std::set<int> checked_;
};

// First j with three consecutive projector-equal domains.
int stabilize_domains(OperatorTerms& terms, const Tol& tol, Subspace& stable) {
    for (int j = 0; j + 2 <= tol.n_max_doublings; ++j) {
        Subspace d0 = terms.at(j).domain();
        Subspace d1 = terms.at(j + 1).domain();
        Subspace d2 = terms.at(j + 2).domain();
        if (equal_subspaces(d0, d1, tol) && equal_subspaces(d1, d2, tol)) {
            stable = d0;
            return j;
        }
    }
    throw NumericalError("operator limit: domains did not stabilize within the doubling cap");
}

struct SnappedGram {
    std::vector<double> lambdas;   // limit Gram eigenvalues, descending, on kept dirs
    std::vector<Vector> kept;      // ambient directions
    Matrix blowup;                 // ambient basis of divergent directions
};

// Snap the final resolvent of the Gram sequence. In the nondecreasing
// case eigenvalues below snap_tol flag divergence; a nonincreasing
// sequence is bounded by its first term, so everything stays finite.
SnappedGram snap_gram_resolvent(const Matrix& final_r, const Matrix& w, Direction dir, const Tol& tol) {
    SnappedGram out;
    int n = static_cast<int>(w.rows());
    out.blowup = Matrix(n, 0);
    if (final_r.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (final_r + final_r.transpose()));
    for (int i = 0; i < es.eigenvalues().size(); ++i) {  // ascending rho = descending gamma
        double rho = std::clamp(es.eigenvalues()(i), 0.0, 1.0);
        Vector u = w * es.eigenvectors().col(i);
        if (dir == Direction::Nondecreasing && rho < tol.snap_tol) {
            out.blowup.conservativeResize(n, out.blowup.cols() + 1);
            out.blowup.col(out.blowup.cols() - 1) = u;
            continue;
        }
        double gamma = rho > 1.0 - tol.snap_tol ? 0.0 : (1.0 - rho) / rho;
        out.lambdas.push_back(gamma);
        out.kept.push_back(u);
    }
    return out;
}

LimitReport monotone_operator_limit(const SequenceSpec& seq, Direction dir, const Tol& tol,
                                    const OperatorRelation* upper_bound) {
    tol.validate();
    OperatorTerms terms(seq, dir, tol);
    LimitReport report;

    Subspace stable;
    int j_star = stabilize_domains(terms, tol, stable);
    const Matrix w = stable.basis();
    int d = stable.dim();

    Matrix final_r;
    if (d > 0) {
        bool capped = false;
        auto r_at = [&](int j) {
            Matrix mw = terms.at(j_star + j).action() * w;
            Matrix g = mw.transpose() * mw;
            if (eig_max(g) > tol.blowup_cap) capped = true;
            return Matrix((g + Matrix::Identity(d, d)).inverse());
        };
        LoopOutcome loop = resolvent_loop(r_at, tol);
        report.convergence = loop.info;
        report.convergence.hit_blowup_cap = capped;
        if (!loop.info.converged) report.notes.push_back(no_convergence_note(loop.info));
        final_r = loop.final_r;
    } else {
        report.convergence.converged = true;
        report.convergence.n_final = pow2(j_star);
        final_r = Matrix(0, 0);
    }

    SnappedGram snapped = snap_gram_resolvent(final_r, w, dir, tol);
    Matrix dom_basis(seq.dim_h(), static_cast<int>(snapped.kept.size()));
    for (size_t i = 0; i < snapped.kept.size(); ++i) dom_basis.col(static_cast<int>(i)) = snapped.kept[i];
    report.dom_limit = Subspace(seq.dim_h(), dom_basis);
    report.blowup_space = Subspace(seq.dim_h(), snapped.blowup);
    OperatorRelation limit = canonical_from_eigs(report.dom_limit, snapped.lambdas, snapped.kept, tol);
    report.op_limit = limit;

    // Finite-sample certificates against the limit; skipped when the loop
    // did not converge, since the best iterate carries no guarantee.
    int j_stop = d > 0 ? j_star + report.convergence.doublings + 2 : j_star;
    if (report.convergence.converged) {
        for (int j : std::set<int>{0, j_star, j_stop}) {
            const OperatorRelation& tn = terms.at(j);
            auto c = dir == Direction::Nondecreasing ? dominates(tn.relation(), limit.relation(), tol)
                                                     : dominates(limit.relation(), tn.relation(), tol);
            if (!c)
                throw NumericalError(
                    "operator limit: sampled term and limit fail contractive domination at n=" +
                    std::to_string(pow2(j)));
            report.witnesses.push_back(*c);
            if (upper_bound && dir == Direction::Nondecreasing) {
                if (!dominates(tn.relation(), upper_bound->relation(), tol))
                    throw InputError("operator limit: supplied bound does not dominate the sampled terms");
            }
        }
        if (upper_bound && dir == Direction::Nondecreasing) {
            auto c = dominates(limit.relation(), upper_bound->relation(), tol);
            if (!c) throw NumericalError("operator limit: the limit escaped the supplied upper bound");
            report.witnesses.push_back(*c);
            report.notes.push_back("upper bound certified against the limit");
        }
    }

    // Closed-form targets for scaled specs.
    if (const auto* sc = seq.as_scaled()) {
        int asym = sc->schedule.asymptote();
        if (dir == Direction::Nondecreasing && asym > 0) {
            double dist = projector_distance(report.dom_limit, sc->base.kernel(tol));
            report.analytic_residual = std::max(dist, limit.action().norm());
        } else if (dir == Direction::Nonincreasing && asym < 0) {
            double dist = projector_distance(report.dom_limit, sc->base.dom(tol));
            report.analytic_residual = std::max(dist, limit.action().norm());
        } else if (asym == 0) {
            LinearRelation expected =
                compose_matrix(sc->schedule.c * Matrix::Identity(seq.dim_k(), seq.dim_k()), sc->base, tol);
            report.analytic_residual = relation_distance(product_star(limit.relation(), tol).relation(),
                                                         product_star(expected, tol).relation());
        }
    }
    return report;
}

}  // namespace

LimitReport nondecreasing_operator_limit(const SequenceSpec& seq, const Tol& tol,
                                         const OperatorRelation* upper_bound) {
    return monotone_operator_limit(seq, Direction::Nondecreasing, tol, upper_bound);
}

LimitReport nonincreasing_operator_limit(const SequenceSpec& seq, const Tol& tol) {
    return monotone_operator_limit(seq, Direction::Nonincreasing, tol, nullptr);
}

LimitReport monotone_psd_limit(const SequenceSpec& seq, Direction direction, const Tol& tol) {
    tol.validate();
    if (seq.dim_h() != seq.dim_k())
        throw InputError("monotone_psd_limit: sequence must act within one space");
    LimitReport report;
    std::map<int, PsdRelation> cache;
    std::set<int> checked;
    bool capped = false;
    std::optional<PsdRelation> scaled_base;
    std::function<const PsdRelation&(int)> term;
    std::function<Matrix(int)> r_at;

    if (const auto* sc = seq.as_scaled()) {
        scaled_base.emplace(sc->base, tol);
        // A scaled sequence is one fixed form under a monotone factor, so
        // every resolvent shares the eigenbasis of the base and only the
        // eigenvalues move. Working from that diagonalization keeps the
        // kernel of the base exact at every n. Building each term as a
        // matrix instead would re-round the kernel eigenvalue, and a
        // growing factor lifts that roundoff into phantom spectrum which
        // neither converges nor snaps.
        Matrix dirs(seq.dim_h(), 0);
        Vector ev(0);
        if (scaled_base->domain().dim() > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(scaled_base->op_part());
            ev = es.eigenvalues().cwiseMax(0.0);
            const double cut = tol.rank_rel * ev.maxCoeff();
            for (int i = 0; i < ev.size(); ++i)
                if (ev(i) <= cut) ev(i) = 0.0;
            dirs = scaled_base->domain().basis() * es.eigenvectors();
        }
        if (ev.size() > 0 && ev.maxCoeff() > 0.0) {
            int asym = sc->schedule.asymptote();
            bool ok = direction == Direction::Nondecreasing ? asym >= 0 : asym <= 0;
            if (!ok)
                throw InputError(
                    "psd sequence is not monotone in the form order: the factor moves against "
                    "the requested direction");
        }
        const Schedule schedule = sc->schedule;
        r_at = [&capped, &tol, dirs, ev, schedule](int j) {
            const double f = schedule.factor(pow2(j));
            Vector rho(ev.size());
            for (int i = 0; i < ev.size(); ++i) {
                const double g = f * ev(i);
                if (g > tol.blowup_cap) capped = true;
                rho(i) = 1.0 / (1.0 + g);
            }
            return Matrix(dirs * rho.asDiagonal() * dirs.transpose());
        };
    } else {
        term = [&](int j) -> const PsdRelation& {
            auto it = cache.find(j);
            if (it == cache.end()) {
                PsdRelation h(seq.at(pow2(j), tol), tol);
                if (h.domain().dim() > 0 && eig_max(h.op_part()) > tol.blowup_cap) capped = true;
                it = cache.emplace(j, std::move(h)).first;
                for (int lo : {j - 1, j}) {
                    if (!cache.count(lo) || !cache.count(lo + 1) || checked.count(lo)) continue;
                    bool ok = direction == Direction::Nondecreasing
                                  ? psd_leq(cache.at(lo), cache.at(lo + 1), tol)
                                  : psd_leq(cache.at(lo + 1), cache.at(lo), tol);
                    if (!ok)
                        throw InputError("psd sequence is not monotone in the form order between n=" +
                                         std::to_string(pow2(lo)) + " and n=" +
                                         std::to_string(pow2(lo + 1)));
                    checked.insert(lo);
                }
            }
            return it->second;
        };
        r_at = [&](int j) { return resolvent(term(j), tol); };
    }

    LoopOutcome loop = resolvent_loop(r_at, tol);
    report.convergence = loop.info;
    report.convergence.hit_blowup_cap = capped;
    if (!loop.info.converged) report.notes.push_back(no_convergence_note(loop.info));

    PsdRelation limit = relation_from_resolvent(loop.final_r, tol);
    report.dom_limit = limit.domain();
    if (direction == Direction::Nondecreasing) {
        int last = report.convergence.doublings + 2;
        const Subspace& mul_last = scaled_base ? scaled_base->mul_part() : term(last).mul_part();
        report.blowup_space = intersect(limit.mul_part(), complement(mul_last, tol), tol);
    } else {
        report.blowup_space = Subspace::zero(seq.dim_h());
    }

    if (const auto* sc = seq.as_scaled()) {
        int asym = sc->schedule.asymptote();
        int n = seq.dim_h();
        auto product_graph = [&](const Subspace& a, const Subspace& b) {
            Matrix gens = Matrix::Zero(2 * n, a.dim() + b.dim());
            gens.block(0, 0, n, a.dim()) = a.basis();
            gens.block(n, a.dim(), n, b.dim()) = b.basis();
            return LinearRelation(n, n, Subspace(2 * n, gens));
        };
        if (asym > 0) {
            Subspace k = sc->base.kernel(tol);
            report.analytic_residual =
                relation_distance(limit.relation(), product_graph(k, complement(k, tol)));
        } else if (asym < 0) {
            report.analytic_residual = relation_distance(
                limit.relation(), product_graph(sc->base.dom(tol), sc->base.mul(tol)));
        } else {
            LinearRelation expected =
                compose_matrix(sc->schedule.c * Matrix::Identity(n, n), sc->base, tol);
            report.analytic_residual = relation_distance(limit.relation(), expected);
        }
    }
    report.psd_limit = std::move(limit);
    return report;
}

LimitReport relation_sequence_pipeline(const SequenceSpec& seq, const Tol& tol) {
    tol.validate();
    LimitReport rep_limit = nondecreasing_operator_limit(seq.map_regular(tol), tol);
    OperatorRelation s_r = *rep_limit.op_limit;
    LimitReport form_limit = monotone_psd_limit(seq.map_product_star(tol), Direction::Nondecreasing, tol);
    PsdRelation h_inf = *form_limit.psd_limit;

    LimitReport report;
    report.psd_limit = h_inf;
    report.representing = s_r;
    report.dom_limit = h_inf.domain();
    report.blowup_space = form_limit.blowup_space;
    report.convergence = form_limit.convergence;
    report.analytic_residual = form_limit.analytic_residual;
    report.witnesses = rep_limit.witnesses;
    report.notes.push_back("representing limit settled after " +
                           std::to_string(rep_limit.convergence.doublings) + " doublings");

    PipelineChecks checks;
    checks.dom_residual = projector_distance(s_r.domain(), h_inf.domain());
    OperatorRelation sqrt_op = h_inf.sqrt_operator(tol);
    const Matrix& w = h_inf.domain().basis();
    double worst = 0.0;
    for (int i = 0; i < w.cols(); ++i) {
        double ns = (s_r.action() * w.col(i)).norm();
        double nq = (sqrt_op.action() * w.col(i)).norm();
        worst = std::max(worst, std::abs(ns - nq));
    }
    checks.norm_residual = worst;

    PsdRelation closing = product_star(s_r.relation(), tol);
    double scale = 1.0 + h_inf.op_part_ambient().norm();
    checks.op_residual = (closing.op_part_ambient() - h_inf.op_part_ambient()).norm();
    checks.mul_residual = projector_distance(closing.mul_part(), h_inf.mul_part());
    checks.passed = checks.dom_residual <= kPipeTol && checks.norm_residual <= kPipeTol &&
                    checks.op_residual <= kPipeOpTol * scale && checks.mul_residual <= kPipeOpTol;

    if (checks.passed) {
        try {
            report.isometry = link_partial_isometry(s_r, sqrt_op, tol, kPipeTol);
        } catch (const std::exception& e) {
            checks.passed = false;
            report.notes.push_back(std::string("link step failed: ") + e.what());
        }
    } else {
        report.notes.push_back("pipeline agreement checks failed; skipping the link step");
    }
    report.pipeline = checks;
    return report;
}

GraphLimitCheck strong_graph_limit_check(const SequenceSpec& seq, const LinearRelation& candidate,
                                         const Tol& tol) {
    tol.validate();
    if (candidate.dim_h() != seq.dim_h() || candidate.dim_k() != seq.dim_k())
        throw InputError("strong_graph_limit_check: candidate lives between different spaces");
    GraphLimitCheck out;
    const Matrix& v = candidate.graph().basis();
    int m = static_cast<int>(v.cols());
    out.final_distances.assign(m, 0.0);
    if (m == 0) {
        out.approximated = true;
        out.convergence.converged = true;
        return out;
    }
    std::vector<bool> passed(m, false);
    std::vector<double> prev(m, 0.0);
    Matrix p = seq.at(1, tol).graph().projector();
    for (int i = 0; i < m; ++i) prev[i] = (v.col(i) - p * v.col(i)).norm();
    bool all = false;
    int j = 0;
    for (j = 1; j <= tol.n_max_doublings + 1; ++j) {
        Matrix pj = seq.at(pow2(j), tol).graph().projector();
        all = true;
        for (int i = 0; i < m; ++i) {
            double dj = (v.col(i) - pj * v.col(i)).norm();
            // admitted once two consecutive samples are below threshold and
            // the tail is not increasing beyond conv_eps
            if (!passed[i] && prev[i] < kAdmitTol && dj < kAdmitTol && dj <= prev[i] + tol.conv_eps)
                passed[i] = true;
            out.final_distances[i] = dj;
            prev[i] = dj;
            all = all && passed[i];
        }
        if (all) break;
    }
    out.convergence.doublings = std::min(j, tol.n_max_doublings + 1);
    out.convergence.n_final = pow2(out.convergence.doublings);
    out.convergence.converged = all;
    out.approximated = all;
    for (int i = 0; i < m; ++i) {
        if (out.final_distances[i] >= out.worst_distance) {
            out.worst_distance = out.final_distances[i];
            out.worst_vector = i;
        }
    }
    return out;
}

std::vector<Matrix> bounded_approximation(const LinearRelation& t, int count, const Tol& tol) {
    if (count < 1) throw InputError("bounded_approximation: count must be at least 1");
    PsdRelation h = product_star(t, tol);
    const Matrix& w = h.domain().basis();
    std::vector<Matrix> out;
    out.reserve(count);
    for (int k = 1; k <= count; ++k) {
        Matrix truncated = spectral_truncation(h.op_part(), static_cast<double>(k), tol);
        out.push_back(w * psd_sqrt(truncated, tol) * w.transpose());
    }
    return out;
}

LimitReport nonincreasing_relation_check(const SequenceSpec& seq, const Tol& tol) {
    tol.validate();
    LimitReport op_rep = nonincreasing_operator_limit(seq, tol);
    OperatorRelation t = *op_rep.op_limit;
    LimitReport form_rep = monotone_psd_limit(seq.map_product_star(tol), Direction::Nonincreasing, tol);
    PsdRelation k_inf = *form_rep.psd_limit;

    LimitReport report;
    report.psd_limit = k_inf;
    report.representing = t;
    report.dom_limit = op_rep.dom_limit;
    report.blowup_space = Subspace::zero(seq.dim_h());
    report.convergence = form_rep.convergence;
    report.analytic_residual = form_rep.analytic_residual;
    report.witnesses = op_rep.witnesses;

    DescentChecks checks;
    PsdRelation closing = product_star(t.relation(), tol);
    checks.graph_residual = relation_distance(closing.relation(), k_inf.relation());
    OperatorRelation sqrt_op = k_inf.sqrt_operator(tol);
    double scale = 1.0 + sqrt_op.action().norm();
    const Matrix& w = t.domain().basis();
    checks.singular_limit_map = is_singular_relation(t.relation(), tol);
    checks.singular_k = is_singular_relation(k_inf.relation(), tol);
    bool linked = false;
    try {
        PartialIsometry u = link_partial_isometry(t, sqrt_op, tol, kPipeTol);
        checks.link_residual = ((u.matrix * t.action() - sqrt_op.action()) * w).norm();
        checks.back_residual = ((t.action() - u.matrix.transpose() * sqrt_op.action()) * w).norm();
        report.isometry = u;
        linked = true;
    } catch (const std::exception& e) {
        report.notes.push_back(std::string("link step failed: ") + e.what());
    }
    checks.passed = linked && checks.graph_residual <= kAdmitTol &&
                    checks.link_residual <= kPipeOpTol * scale &&
                    checks.back_residual <= kPipeOpTol * scale &&
                    checks.singular_limit_map == checks.singular_k;
    report.descent = checks;
    return report;
}

}  // namespace relcalc

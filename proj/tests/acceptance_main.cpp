// Acceptance batch for the whole library. Each criterion prints exactly
// one PASS/FAIL line; the process exits nonzero when any line fails. All
// tolerances are written out here on purpose so the bar cannot drift with
// the library defaults.

#include "relcalc/invariants.hpp"
#include "relcalc/limits.hpp"
#include "relcalc/random_gen.hpp"
#include "relcalc/scenario.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

using namespace relcalc;

namespace {

struct Outcome {
    bool ok = true;
    double worst = 0.0;
    std::string detail;

    void residual(double r, double bound, const std::string& what) {
        worst = std::max(worst, r);
        if (r > bound && ok) {
            ok = false;
            std::ostringstream os;
            os.precision(3);
            os << what << ": residual " << std::scientific << r << " exceeds " << bound;
            detail = os.str();
        }
    }
    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

LinearRelation product_relation(const Subspace& a, const Subspace& b, const Tol& tol) {
    Matrix gens = Matrix::Zero(a.ambient() + b.ambient(), a.dim() + b.dim());
    gens.topLeftCorner(a.ambient(), a.dim()) = a.basis();
    gens.bottomRightCorner(b.ambient(), b.dim()) = b.basis();
    return relation_from_graph(a.ambient(), b.ambient(), gens, tol);
}

Schedule make(Schedule::Kind kind, double c = 1.0, int p = 1, int q = 1) {
    Schedule s;
    s.kind = kind;
    s.c = c;
    s.p = p;
    s.q = q;
    return s;
}

// 1. Growing PSD operator graphs settle on ker x ker_perp, and the square
// root of the limit lives exactly on the kernel.
Outcome criterion_growing_psd() {
    Outcome out;
    Tol tol;
    Rng rng(101);
    for (int dim = 2; dim <= 6; ++dim) {
        for (int trial = 0; trial < 10; ++trial) {
            int kdim = rng.uniform_int(1, dim - 1);
            Matrix a = random_psd_matrix(dim, kdim, 0.5, 4.0, rng);
            LinearRelation base = operator_everywhere(a, tol).relation();
            SequenceSpec seq = SequenceSpec::scaled(make(Schedule::Kind::N), base);
            LimitReport rep = monotone_psd_limit(seq, Direction::Nondecreasing, tol);
            out.require(rep.convergence.converged, "limit loop did not converge");
            if (!rep.psd_limit) {
                out.require(false, "no psd limit produced");
                return out;
            }
            Subspace ker = base.kernel(tol);
            LinearRelation expected = product_relation(ker, complement(ker, tol), tol);
            out.residual(relation_distance(rep.psd_limit->relation(), expected), 1e-6,
                         "limit graph vs ker x ker_perp");
            out.residual(projector_distance(rep.psd_limit->sqrt_operator(tol).domain(), ker), 1e-6,
                         "sqrt domain vs kernel");
        }
    }
    return out;
}

// 2. Growing operator sequences flatten onto the kernel; the operator
// limit, its product, and the pipeline form limit all tell one story.
Outcome criterion_growing_operators() {
    Outcome out;
    Tol tol;
    Rng rng(102);
    for (int dim = 2; dim <= 6; ++dim) {
        for (int trial = 0; trial < 10; ++trial) {
            int rank = rng.uniform_int(0, dim);
            OperatorRelation r = structured_operator(dim, dim, dim, rank, 0.7, 2.0, rng, tol);
            SequenceSpec seq = SequenceSpec::scaled(make(Schedule::Kind::SqrtN), r.relation());

            LimitReport rep = nondecreasing_operator_limit(seq, tol);
            out.require(rep.convergence.converged, "operator limit did not converge");
            Subspace ker = r.relation().kernel(tol);
            out.residual(projector_distance(rep.op_limit->domain(), ker), 1e-6,
                         "limit domain vs kernel");
            const Matrix& w = rep.op_limit->domain().basis();
            double zero = w.cols() > 0 ? (rep.op_limit->action() * w).norm() : 0.0;
            out.residual(zero, 1e-6, "limit action on its domain");

            LinearRelation expected = product_relation(ker, complement(ker, tol), tol);
            out.residual(
                relation_distance(product_star(rep.op_limit->relation(), tol).relation(), expected),
                1e-6, "product of the limit vs ker x ker_perp");

            LimitReport pipe = relation_sequence_pipeline(seq, tol);
            out.require(pipe.convergence.converged, "pipeline did not converge");
            out.residual(relation_distance(pipe.psd_limit->relation(), expected), 1e-6,
                         "pipeline form limit vs ker x ker_perp");
        }
    }
    return out;
}

// 3. Decaying PSD relations settle on dom x mul, multivalued parts included.
Outcome criterion_decaying_psd() {
    Outcome out;
    Tol tol;
    Rng rng(103);
    for (int trial = 0; trial < 50; ++trial) {
        int dim = 2 + trial % 5;
        int mul = (trial % 2 == 0) ? 0 : rng.uniform_int(1, dim - 1);
        int kernel = rng.uniform_int(0, std::max(0, dim - mul - 1));
        PsdRelation base = random_psd_relation(dim, mul, kernel, 0.5, 4.0, rng, tol);
        SequenceSpec seq = SequenceSpec::scaled(make(Schedule::Kind::InvN), base.relation());
        LimitReport rep = monotone_psd_limit(seq, Direction::Nonincreasing, tol);
        out.require(rep.convergence.converged, "limit loop did not converge");
        LinearRelation expected = product_relation(base.domain(), base.mul_part(), tol);
        out.residual(relation_distance(rep.psd_limit->relation(), expected), 1e-6,
                     "limit graph vs dom x mul");
    }
    return out;
}

// 4. The three-route equivalence agrees on generated dominated pairs and
// on unconstrained pairs, and every certificate is a genuine contraction
// whose image sits inside the dominated relation.
Outcome criterion_bridge() {
    Outcome out;
    Tol tol;
    Rng rng(104);
    for (int dim = 2; dim <= 5; ++dim) {
        for (int trial = 0; trial < 2000; ++trial) {
            bool generated = trial < 1000;
            DominatedPair pair = generated
                                     ? random_dominated_pair(dim, rng, tol)
                                     : DominatedPair{random_relation(dim, dim, rng, tol),
                                                     random_relation(dim, dim, rng, tol)};
            const LinearRelation& a = pair.a;
            const LinearRelation& b = pair.b;

            BridgeVerdicts v = theorem_bridge_check(a, b, tol);
            out.require(v.agree(), "bridge routes disagree at dim " + std::to_string(dim));
            if (generated) out.require(v.relation, "generated dominated pair was rejected");

            auto c = dominates(a, b, tol);
            if (generated) out.require(c.has_value(), "no certificate for a dominated pair");
            if (c) {
                out.residual(std::max(0.0, c->norm() - 1.0), 1e-8, "contraction norm above 1");
                LinearRelation cb = compose_matrix(c->matrix, b, tol);
                const Matrix& gens = cb.graph().basis();
                Matrix p = a.graph().projector();
                double worst = 0.0;
                for (int i = 0; i < gens.cols(); ++i)
                    worst = std::max(worst, (gens.col(i) - p * gens.col(i)).norm());
                out.residual(worst, 1e-8, "certificate image escapes the graph");
            }
        }
    }
    return out;
}

// 5. The nine relation identities hold across every dimension pair.
Outcome criterion_identities() {
    Outcome out;
    Tol tol;
    Rng rng(105);
    for (int h = 1; h <= 6; ++h) {
        for (int k = 1; k <= 6; ++k) {
            for (int trial = 0; trial < 1000; ++trial) {
                LinearRelation t = random_relation(h, k, rng, tol);
                // Products square the spectrum, so a slope above 1e4 pushes
                // t* t past the band where a graph still separates domain
                // from mul directions. Those draws probe the representation
                // boundary, not the identities; redraw them.
                for (int guard = 0; guard < 32; ++guard) {
                    if (lebesgue_decompose(t, tol).reg.action().norm() <= 1e4) break;
                    t = random_relation(h, k, rng, tol);
                }
                auto results = relation_identity_battery(t, tol, 1e-8);
                for (const auto& r : results) {
                    out.worst = std::max(out.worst, r.residual);
                    if (!r.passed) {
                        out.require(false, "identity " + r.name + " failed at " +
                                               std::to_string(h) + "x" + std::to_string(k) + ": " +
                                               r.detail);
                        return out;
                    }
                }
            }
        }
    }
    return out;
}

// 6. The partial isometry linking an operator to the square root of its
// product: U T agrees with the root and U^T U projects onto ran T.
Outcome criterion_link() {
    Outcome out;
    Tol tol;
    Rng rng(106);
    for (int trial = 0; trial < 500; ++trial) {
        int h = rng.uniform_int(2, 6), k = rng.uniform_int(2, 6);
        int dom = rng.uniform_int(0, h);
        int rank = rng.uniform_int(0, std::min(dom, k));
        OperatorRelation t = structured_operator(h, k, dom, rank, 0.6, 2.5, rng, tol);
        PsdRelation hrel = product_star(t.relation(), tol);
        OperatorRelation root = hrel.sqrt_operator(tol);
        PartialIsometry u = link_partial_isometry(t, root, tol);
        const Matrix& w = t.domain().basis();
        double link = w.cols() > 0 ? ((u.matrix * t.action() - root.action()) * w).norm() : 0.0;
        out.residual(link, 1e-8, "U T vs sqrt of the product");
        Matrix ran_proj = t.relation().ran(tol).projector();
        out.residual((u.matrix.transpose() * u.matrix - ran_proj).norm(), 1e-7,
                     "U^T U vs the range projector");
    }
    return out;
}

// 7. Norms along a nondecreasing sequence climb to the limit norm on the
// limit domain, and a supplied upper bound is certified down the run.
Outcome criterion_monotone_norms() {
    Outcome out;
    Tol tol;
    Rng rng(107);
    for (int run = 0; run < 50; ++run) {
        int h = rng.uniform_int(2, 5), k = rng.uniform_int(2, 5);
        SequenceSpec seq = [&] {
            if (run % 2 == 0) {
                int dom = rng.uniform_int(1, h);
                int rank = rng.uniform_int(0, std::min(dom, k));
                OperatorRelation bound = structured_operator(h, k, dom, rank, 0.6, 2.0, rng, tol);
                return SequenceSpec::explicit_terms(
                    staircase_terms(bound, rng.uniform_int(3, 6), tol));
            }
            int rank = rng.uniform_int(0, std::min(h, k));
            OperatorRelation r = structured_operator(h, k, h, rank, 0.7, 2.0, rng, tol);
            return SequenceSpec::scaled(make(Schedule::Kind::SqrtN), r.relation());
        }();
        LimitReport rep = nondecreasing_operator_limit(seq, tol);
        out.require(rep.convergence.converged, "sequence did not converge");
        const Matrix& w = rep.op_limit->domain().basis();
        if (w.cols() == 0) continue;
        for (int sample = 0; sample < 20; ++sample) {
            Vector coeff(w.cols());
            for (int i = 0; i < coeff.size(); ++i) coeff(i) = rng.gaussian();
            if (coeff.norm() == 0.0) coeff(0) = 1.0;
            Vector phi = w * (coeff / coeff.norm());
            double prev = -1.0;
            double last = 0.0;
            for (std::uint64_t n = 1; n <= rep.convergence.n_final; n *= 2) {
                last = OperatorRelation(seq.at(n, tol), tol).apply(phi).norm();
                out.require(last >= prev - 1e-9, "norms along the sequence decreased");
                prev = last;
            }
            out.residual(std::abs(last - rep.op_limit->apply(phi).norm()), 1e-6,
                         "final norm vs limit norm");
        }
    }

    for (int trial = 0; trial < 200; ++trial) {
        int h = rng.uniform_int(2, 5), k = rng.uniform_int(2, 5);
        int dom = rng.uniform_int(1, h);
        int rank = rng.uniform_int(0, std::min(dom, k));
        OperatorRelation bound = structured_operator(h, k, dom, rank, 0.6, 2.0, rng, tol);
        SequenceSpec seq =
            SequenceSpec::explicit_terms(staircase_terms(bound, rng.uniform_int(3, 5), tol));
        LimitReport rep = nondecreasing_operator_limit(seq, tol, &bound);
        out.require(rep.convergence.converged, "bounded sequence did not converge");
        bool certified = false;
        for (const auto& note : rep.notes)
            if (note.find("upper bound certified") != std::string::npos) certified = true;
        out.require(certified, "upper bound was not certified");
        out.require(!rep.witnesses.empty(), "no witness contractions recorded");
    }
    return out;
}

// 8. The full pipeline: the representing limit carries the same norms as
// the square root of the form limit, and its product closes the loop.
Outcome criterion_pipeline() {
    Outcome out;
    Tol tol;
    Rng rng(108);
    for (int trial = 0; trial < 200; ++trial) {
        int dim = 2 + trial % 4;
        int dom = rng.uniform_int(1, dim);
        int rank = rng.uniform_int(0, std::min(dom, dim - 1));
        int mul = rng.uniform_int(0, dim - rank - 1);
        LinearRelation base = structured_relation(dim, dim, dom, rank, mul, 0.7, 2.0, rng, tol);
        Schedule sched = trial % 4 == 3 ? make(Schedule::Kind::Const, rng.uniform(0.5, 2.0))
                                        : random_schedule(1, rng, true);
        SequenceSpec seq = SequenceSpec::scaled(sched, base);
        LimitReport rep = relation_sequence_pipeline(seq, tol);
        out.require(rep.convergence.converged, "pipeline did not converge");
        if (!rep.pipeline) {
            out.require(false, "pipeline produced no checks");
            return out;
        }
        out.residual(rep.pipeline->norm_residual, 1e-6, "representing norms vs sqrt norms");
        out.residual(rep.pipeline->dom_residual, 1e-6, "representing domain vs form domain");
        double scale = 1.0 + rep.psd_limit->op_part_ambient().norm();
        out.residual(rep.pipeline->op_residual / scale, 1e-7, "closing product, operator part");
        out.residual(rep.pipeline->mul_residual, 1e-7, "closing product, multivalued part");
        out.require(rep.isometry.has_value(), "no linking isometry produced");
    }
    return out;
}

// 9. Spectral truncation grows with its cutoff and is exact past the top
// of the spectrum.
Outcome criterion_truncation() {
    Outcome out;
    Tol tol;
    Rng rng(109);
    for (int trial = 0; trial < 200; ++trial) {
        int dim = 2 + trial % 5;
        Matrix a = random_psd_matrix(dim, rng.uniform_int(0, dim - 1), 0.3, 5.0, rng);
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        double top = es.eigenvalues().maxCoeff();

        Vector phi(dim);
        for (int i = 0; i < dim; ++i) phi(i) = rng.gaussian();

        std::vector<double> cuts;
        for (int i = 0; i < dim; ++i)
            if (es.eigenvalues()(i) > 0) cuts.push_back(es.eigenvalues()(i) * 0.999);
        for (int i = 0; i < dim; ++i)
            if (es.eigenvalues()(i) > 0) cuts.push_back(es.eigenvalues()(i) * 1.001);
        cuts.push_back(top + 1.0);
        std::sort(cuts.begin(), cuts.end());

        double prev = -1e300;
        for (double cut : cuts) {
            double form = phi.dot(spectral_truncation(a, cut, tol) * phi);
            out.require(form >= prev - 1e-10, "truncated form decreased with the cutoff");
            prev = form;
        }
        out.residual((spectral_truncation(a, top, tol) - a).norm(), 0.0,
                     "truncation at the top eigenvalue");
        out.residual((spectral_truncation(a, top + 1.0, tol) - a).norm(), 0.0,
                     "truncation above the spectrum");
    }
    return out;
}

// 10. Decaying operator sequences: the form limit is the product of the
// operator limit, the factorization through the partial isometry holds,
// and singularity passes between the two limits in both directions.
Outcome criterion_descent() {
    Outcome out;
    Tol tol;
    Rng rng(110);
    for (int trial = 0; trial < 200; ++trial) {
        int dim = 2 + trial % 4;
        int rank = rng.uniform_int(0, dim);
        OperatorRelation r = structured_operator(dim, dim, dim, rank, 0.7, 2.0, rng, tol);
        SequenceSpec seq = SequenceSpec::scaled(random_schedule(-1, rng, true), r.relation());
        LimitReport rep = nonincreasing_relation_check(seq, tol);
        out.require(rep.convergence.converged, "descent run did not converge");
        if (!rep.descent) {
            out.require(false, "no descent checks produced");
            return out;
        }
        out.residual(rep.descent->graph_residual, 1e-6, "form limit vs product of the limit");
        out.require(rep.descent->passed, "descent checks failed");
    }

    // Constructed singular and non-singular limits: a decaying sequence
    // lands on the zero operator (singular), a constant one keeps its
    // action (not singular); the two limits must agree on the verdict.
    for (int trial = 0; trial < 40; ++trial) {
        bool want_singular = trial < 20;
        int dim = 2 + trial % 3;
        int rank = rng.uniform_int(1, dim);
        OperatorRelation r = structured_operator(dim, dim, dim, rank, 0.7, 2.0, rng, tol);
        SequenceSpec seq = SequenceSpec::scaled(
            want_singular ? make(Schedule::Kind::InvN)
                          : make(Schedule::Kind::Const, rng.uniform(0.4, 1.5)),
            r.relation());
        LimitReport rep = nonincreasing_relation_check(seq, tol);
        out.require(rep.descent && rep.descent->passed, "constructed descent case failed");
        if (!rep.descent) return out;
        out.require(rep.descent->singular_limit_map == rep.descent->singular_k,
                    "singularity verdicts disagree between the limits");
        out.require(rep.descent->singular_limit_map == want_singular,
                    want_singular ? "constructed singular limit was not flagged"
                                  : "constructed regular limit was flagged singular");
    }
    return out;
}

// 11. Fixed-seed fuzzing is byte-for-byte reproducible and the JSON wire
// format loses nothing beyond projector equality.
Outcome criterion_determinism() {
    Outcome out;
    Tol tol;

    FuzzConfig cfg;
    cfg.dim_lo = 2;
    cfg.dim_hi = 5;
    cfg.trials = 40;
    cfg.seed = 2026;
    cfg.suite = "all";
    FuzzResult first = run_fuzz(cfg);
    FuzzResult second = run_fuzz(cfg);
    out.require(first.valid_config, "fuzz config rejected");
    out.require(first.failures == 0, "fuzz found a failure: " + first.first_failure);
    out.require(first.report_json == second.report_json,
                "fuzz reports differ between identical runs");

    Rng rng(111);
    for (int trial = 0; trial < 100; ++trial) {
        int h = rng.uniform_int(1, 6), k = rng.uniform_int(1, 6);
        LinearRelation t = random_relation(h, k, rng, tol);

        nlohmann::json wire;
        const Matrix& basis = t.graph().basis();
        wire["rows"] = basis.rows();
        wire["cols"] = basis.cols();
        for (int i = 0; i < basis.rows(); ++i)
            for (int j = 0; j < basis.cols(); ++j) wire["data"].push_back(basis(i, j));
        std::string text = wire.dump();

        nlohmann::json back = nlohmann::json::parse(text);
        Matrix rebuilt(back["rows"].get<int>(), back["cols"].get<int>());
        int idx = 0;
        for (int i = 0; i < rebuilt.rows(); ++i)
            for (int j = 0; j < rebuilt.cols(); ++j)
                rebuilt(i, j) = back["data"][idx++].get<double>();
        LinearRelation again = relation_from_graph(h, k, rebuilt, tol);
        out.residual(relation_distance(again, t), 1e-9, "relation round trip");
    }
    return out;
}

struct Criterion {
    const char* what;
    Outcome (*run)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"growing psd graphs settle on ker x ker_perp", criterion_growing_psd},
        {"growing operators flatten onto the kernel, pipeline agrees", criterion_growing_operators},
        {"decaying psd relations settle on dom x mul", criterion_decaying_psd},
        {"three-route domination equivalence with honest certificates", criterion_bridge},
        {"nine relation identities across all dimension pairs", criterion_identities},
        {"partial isometry factors operators through their modulus", criterion_link},
        {"norms climb monotonically to the limit, bounds certify", criterion_monotone_norms},
        {"pipeline ties representing limit to the form limit", criterion_pipeline},
        {"spectral truncation is monotone and exact past the top", criterion_truncation},
        {"descent: product identity, factorization, singularity match", criterion_descent},
        {"byte-identical fuzz reruns and lossless round trips", criterion_determinism},
    };

    auto t0 = std::chrono::steady_clock::now();
    bool all_ok = true;
    int idx = 0;
    for (const auto& c : criteria) {
        ++idx;
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("threw: ") + e.what();
        }
        all_ok = all_ok && out.ok;
        std::printf("%s %2d. %s (worst residual %.2e)\n", out.ok ? "PASS" : "FAIL", idx, c.what,
                    out.worst);
        if (!out.ok) std::printf("        %s\n", out.detail.c_str());
    }

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_budget = secs < 60.0;
    all_ok = all_ok && in_budget;
    std::printf("%s     total wall time %.1fs (budget 60s)\n", in_budget ? "PASS" : "FAIL", secs);
    return all_ok ? 0 : 1;
}

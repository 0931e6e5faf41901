#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relcalc/invariants.hpp"
#include "relcalc/limits.hpp"
#include "relcalc/random_gen.hpp"

using namespace relcalc;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
    int i = 0;
    for (const auto& row : rows) {
        int j = 0;
        for (double x : row) m(i, j++) = x;
        ++i;
    }
    return m;
}

LinearRelation rel(int dim_h, int dim_k, std::initializer_list<std::initializer_list<double>> cols) {
    Matrix gens(dim_h + dim_k, static_cast<int>(cols.size()));
    int j = 0;
    for (const auto& col : cols) {
        int i = 0;
        for (double x : col) gens(i++, j) = x;
        ++j;
    }
    return relation_from_graph(dim_h, dim_k, gens);
}

Schedule schedule_of(Schedule::Kind kind, double c = 1.0, int p = 1, int q = 1) {
    Schedule s;
    s.kind = kind;
    s.c = c;
    s.p = p;
    s.q = q;
    return s;
}

}  // namespace

TEST_CASE("schedule factors and asymptotes") {
    CHECK(schedule_of(Schedule::Kind::N).factor(8) == 8.0);
    CHECK(schedule_of(Schedule::Kind::SqrtN).factor(16) == doctest::Approx(4.0));
    CHECK(schedule_of(Schedule::Kind::InvN).factor(4) == doctest::Approx(0.25));
    CHECK(schedule_of(Schedule::Kind::InvSqrtN).factor(4) == doctest::Approx(0.5));
    CHECK(schedule_of(Schedule::Kind::Const, 2.5).factor(1000) == 2.5);
    CHECK(schedule_of(Schedule::Kind::Pow, 1.0, 3, 2).factor(4) == doctest::Approx(8.0));
    CHECK(schedule_of(Schedule::Kind::Pow, 1.0, -1, 2).factor(4) == doctest::Approx(0.5));

    CHECK(schedule_of(Schedule::Kind::N).asymptote() == 1);
    CHECK(schedule_of(Schedule::Kind::InvSqrtN).asymptote() == -1);
    CHECK(schedule_of(Schedule::Kind::Const, 3.0).asymptote() == 0);
    CHECK(schedule_of(Schedule::Kind::Pow, 1.0, -2, 3).asymptote() == -1);

    CHECK_THROWS_AS(schedule_of(Schedule::Kind::Const, -1.0).validate(), InputError);
    CHECK_THROWS_AS(schedule_of(Schedule::Kind::Pow, 1.0, 1, 0).validate(), InputError);
}

TEST_CASE("sequence evaluation and mapped sequences") {
    Matrix r = mat({{1.0, 1.0}, {0.0, 1.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::SqrtN),
                                            operator_everywhere(r).relation());
    CHECK(seq.dim_h() == 2);
    CHECK(seq.dim_k() == 2);

    // at(n) is the scaled graph.
    OperatorRelation t4(seq.at(4));
    CHECK((t4.action() - 2.0 * r).norm() < 1e-10);

    // map_product_star commutes with evaluation; the schedule squares.
    SequenceSpec prod = seq.map_product_star();
    for (std::uint64_t n : {1, 2, 3, 5, 8}) {
        CHECK(relation_distance(prod.at(n), product_star(seq.at(n)).relation()) < 1e-9);
    }

    // map_regular strips the multivalued part termwise.
    LinearRelation mixed = rel(2, 2, {{1.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
    SequenceSpec mseq = SequenceSpec::scaled(schedule_of(Schedule::Kind::N), mixed);
    SequenceSpec reg = mseq.map_regular();
    for (std::uint64_t n : {1, 2, 4}) {
        CHECK(relation_distance(reg.at(n),
                                lebesgue_decompose(mseq.at(n)).reg.relation()) < 1e-9);
    }

    // Dimension mismatch in an explicit list is rejected.
    std::vector<LinearRelation> terms;
    terms.push_back(operator_everywhere(Matrix::Identity(2, 2)).relation());
    terms.push_back(operator_everywhere(Matrix::Identity(3, 3)).relation());
    CHECK_THROWS_AS(SequenceSpec::explicit_terms(terms), InputError);
}

TEST_CASE("growing psd sequence converges to kernel times complement") {
    Matrix a = mat({{0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 2.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::N),
                                            operator_everywhere(a).relation());
    LimitReport rep = monotone_psd_limit(seq, Direction::Nondecreasing);
    CHECK(rep.convergence.converged);
    REQUIRE(rep.psd_limit.has_value());

    LinearRelation expected = rel(3, 3, {{1.0, 0.0, 0.0, 0.0, 0.0, 0.0},
                                         {0.0, 0.0, 0.0, 0.0, 1.0, 0.0},
                                         {0.0, 0.0, 0.0, 0.0, 0.0, 1.0}});
    CHECK(relation_distance(rep.psd_limit->relation(), expected) < 1e-8);
    CHECK(rep.psd_limit->domain().dim() == 1);
    CHECK(std::abs(rep.psd_limit->domain().basis()(0, 0)) == doctest::Approx(1.0));

    // The square root keeps the same (kernel) domain.
    CHECK(equal_subspaces(rep.psd_limit->sqrt_operator().domain(), rep.psd_limit->domain()));
    REQUIRE(rep.analytic_residual.has_value());
    CHECK(*rep.analytic_residual < 1e-8);
}

TEST_CASE("decaying psd sequence converges to dom times mul") {
    Matrix a = mat({{0.0, 0.0}, {0.0, 3.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::InvN),
                                            operator_everywhere(a).relation());
    LimitReport rep = monotone_psd_limit(seq, Direction::Nonincreasing);
    CHECK(rep.convergence.converged);
    // dom x mul of an everywhere defined matrix is the zero operator.
    CHECK(relation_distance(rep.psd_limit->relation(),
                            operator_everywhere(Matrix::Zero(2, 2)).relation()) < 1e-8);

    // A multivalued base is already its own limit.
    LinearRelation prod = rel(2, 2, {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
    SequenceSpec pseq = SequenceSpec::scaled(schedule_of(Schedule::Kind::InvN), prod);
    LimitReport prep = monotone_psd_limit(pseq, Direction::Nonincreasing);
    CHECK(prep.convergence.converged);
    CHECK(relation_distance(prep.psd_limit->relation(), prod) < 1e-8);
}

TEST_CASE("constant psd sequence returns the base") {
    Matrix a = mat({{2.0, 1.0}, {1.0, 2.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::Const, 3.0),
                                            operator_everywhere(a).relation());
    LimitReport rep = monotone_psd_limit(seq, Direction::Nondecreasing);
    CHECK(rep.convergence.converged);
    CHECK(relation_distance(rep.psd_limit->relation(),
                            operator_everywhere(Matrix(3.0 * a)).relation()) < 1e-8);
}

TEST_CASE("monotonicity direction is enforced for scaled psd sequences") {
    Matrix a = mat({{1.0, 0.0}, {0.0, 2.0}});
    SequenceSpec decaying = SequenceSpec::scaled(schedule_of(Schedule::Kind::InvN),
                                                 operator_everywhere(a).relation());
    CHECK_THROWS_AS(monotone_psd_limit(decaying, Direction::Nondecreasing), InputError);
    SequenceSpec growing = SequenceSpec::scaled(schedule_of(Schedule::Kind::N),
                                                operator_everywhere(a).relation());
    CHECK_THROWS_AS(monotone_psd_limit(growing, Direction::Nonincreasing), InputError);
}

TEST_CASE("blowup cap is reported, not thrown") {
    // A steep power schedule pushes the sampled form past the cap while
    // the base itself stays well conditioned.
    Matrix a = mat({{1.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::Pow, 1.0, 14, 1),
                                            operator_everywhere(a).relation());
    LimitReport rep = monotone_psd_limit(seq, Direction::Nondecreasing);
    CHECK(rep.convergence.hit_blowup_cap);
    CHECK(rep.convergence.converged);
    CHECK(rep.psd_limit->domain().dim() == 0);
    CHECK(rep.psd_limit->mul_part().dim() == 1);
}

TEST_CASE("growing operator sequence flattens onto the kernel") {
    Matrix r = mat({{1.0, 0.0, 1.0}, {0.0, 2.0, 0.0}, {1.0, 0.0, 1.0}});
    LinearRelation base = operator_everywhere(r).relation();
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::SqrtN), base);
    LimitReport rep = nondecreasing_operator_limit(seq);
    CHECK(rep.convergence.converged);
    REQUIRE(rep.op_limit.has_value());

    Subspace ker = base.kernel();
    CHECK(ker.dim() == 1);
    CHECK(equal_subspaces(rep.dom_limit, ker));
    CHECK(equal_subspaces(rep.op_limit->domain(), ker));
    CHECK(rep.op_limit->action().norm() < 1e-8);
    // The divergent directions are the blowup part.
    CHECK(equal_subspaces(rep.blowup_space, complement(ker)));
    CHECK(!rep.witnesses.empty());

    // t* t of the limit is ker x ker^perp.
    PsdRelation h = product_star(rep.op_limit->relation());
    CHECK(equal_subspaces(h.domain(), ker));
    CHECK(equal_subspaces(h.mul_part(), complement(ker)));
}

TEST_CASE("staircase sequence stops at its top step") {
    OperatorRelation bound = operator_everywhere(mat({{1.0, 0.0}, {0.0, 2.0}}));
    SequenceSpec seq = SequenceSpec::explicit_terms(staircase_terms(bound, 4));
    LimitReport rep = nondecreasing_operator_limit(seq);
    CHECK(rep.convergence.converged);
    CHECK(rep.dom_limit.dim() == 2);

    // Norms of the limit match the top step (15/16 of the bound).
    const double top = 1.0 - std::pow(2.0, -4);
    for (int i = 0; i < 2; ++i) {
        Vector e = Vector::Zero(2);
        e(i) = 1.0;
        CHECK((rep.op_limit->apply(e)).norm() ==
              doctest::Approx(top * bound.apply(e).norm()).epsilon(1e-9));
    }
}

TEST_CASE("upper bound is certified when supplied") {
    OperatorRelation bound = operator_everywhere(mat({{1.0, 1.0}, {0.0, 1.0}}));
    SequenceSpec seq = SequenceSpec::explicit_terms(staircase_terms(bound, 3));
    LimitReport rep = nondecreasing_operator_limit(seq, Tol{}, &bound);
    CHECK(rep.convergence.converged);
    bool certified = false;
    for (const auto& note : rep.notes)
        if (note.find("upper bound certified") != std::string::npos) certified = true;
    CHECK(certified);
    REQUIRE(!rep.witnesses.empty());
    rep.witnesses.back().validate();

    // A bound that the terms escape is rejected.
    OperatorRelation small = operator_everywhere(Matrix(0.1 * mat({{1.0, 1.0}, {0.0, 1.0}})));
    CHECK_THROWS_AS(nondecreasing_operator_limit(seq, Tol{}, &small), InputError);
}

TEST_CASE("decaying operator sequence yields the zero operator") {
    Matrix r = mat({{1.0, 2.0}, {0.0, 1.0}, {1.0, 1.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::InvN),
                                            operator_everywhere(r).relation());
    LimitReport rep = nonincreasing_operator_limit(seq);
    CHECK(rep.convergence.converged);
    CHECK(rep.dom_limit.dim() == 2);
    CHECK(rep.blowup_space.dim() == 0);
    const Matrix& w = rep.op_limit->domain().basis();
    CHECK((rep.op_limit->action() * w).norm() < 1e-4);
}

TEST_CASE("nonincreasing relation check ties the two limits together") {
    // Decaying sequence: the operator limit is the zero operator, which is
    // singular, and so is its product limit.
    Matrix r = mat({{1.0, 1.0}, {1.0, 1.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::InvN),
                                            operator_everywhere(r).relation());
    LimitReport rep = nonincreasing_relation_check(seq);
    CHECK(rep.convergence.converged);
    REQUIRE(rep.descent.has_value());
    CHECK(rep.descent->passed);
    CHECK(rep.descent->singular_limit_map);
    CHECK(rep.descent->singular_k);
    CHECK(rep.descent->graph_residual < 1e-6);

    // Constant sequence: the limit keeps its action and nothing is singular.
    SequenceSpec cseq = SequenceSpec::scaled(schedule_of(Schedule::Kind::Const, 0.5),
                                             operator_everywhere(mat({{1.0, 0.0}, {0.0, 2.0}})).relation());
    LimitReport crep = nonincreasing_relation_check(cseq);
    CHECK(crep.convergence.converged);
    REQUIRE(crep.descent.has_value());
    CHECK(crep.descent->passed);
    CHECK(!crep.descent->singular_limit_map);
    CHECK(!crep.descent->singular_k);
}

TEST_CASE("pipeline on a relation with a multivalued part") {
    LinearRelation base = rel(3, 3, {{1.0, 0.0, 0.0, 1.0, 0.0, 0.0},
                                     {0.0, 0.0, 0.0, 0.0, 1.0, 0.0}});
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::N), base);
    LimitReport rep = relation_sequence_pipeline(seq);
    CHECK(rep.convergence.converged);
    REQUIRE(rep.pipeline.has_value());
    CHECK(rep.pipeline->passed);
    CHECK(rep.pipeline->dom_residual < 1e-6);
    CHECK(rep.pipeline->norm_residual < 1e-6);
    CHECK(rep.isometry.has_value());
}

TEST_CASE("strong graph limit accepts the true limit and rejects others") {
    Matrix r = mat({{1.0, 0.0}, {0.0, 0.0}});
    LinearRelation base = operator_everywhere(r).relation();
    SequenceSpec seq = SequenceSpec::scaled(schedule_of(Schedule::Kind::N), base);

    Subspace ker = base.kernel();
    GraphLimitCheck good = strong_graph_limit_check(seq, zero_operator(2, 2, ker).relation());
    CHECK(good.approximated);
    CHECK(good.worst_distance < 1e-6);

    GraphLimitCheck bad =
        strong_graph_limit_check(seq, operator_everywhere(Matrix::Identity(2, 2)).relation());
    CHECK(!bad.approximated);
}

TEST_CASE("bounded approximation climbs to the modulus") {
    LinearRelation t = operator_everywhere(mat({{1.0, 0.0}, {0.0, 2.0}})).relation();
    std::vector<Matrix> steps = bounded_approximation(t, 5);
    REQUIRE(steps.size() == 5);
    CHECK((steps[0] - mat({{1.0, 0.0}, {0.0, 0.0}})).norm() < 1e-10);
    CHECK((steps[4] - mat({{1.0, 0.0}, {0.0, 2.0}})).norm() < 1e-10);

    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        Vector phi(2);
        phi << rng.gaussian(), rng.gaussian();
        double prev = 0.0;
        for (const Matrix& s : steps) {
            double now = (s * phi).norm();
            CHECK(now >= prev - 1e-10);
            prev = now;
        }
        // The last step realizes the modulus exactly.
        CHECK(prev == doctest::Approx((mat({{1.0, 0.0}, {0.0, 2.0}}) * phi).norm()));
    }
}

TEST_CASE("representing map realizes a gram form") {
    GramSpec spec;
    spec.generators = Matrix::Identity(2, 2);
    spec.gram = mat({{4.0, 0.0}, {0.0, 0.0}});
    RepresentingMap rm = representing_map(spec);

    CHECK(rm.neutral.dim() == 1);
    CHECK(std::abs(rm.neutral.basis()(1, 0)) == doctest::Approx(1.0));
    // Canonical codomain has one coordinate per positive form eigenvalue.
    CHECK(rm.map.action().rows() == 1);
    Matrix realized = (rm.map.action() * spec.generators).transpose() *
                      (rm.map.action() * spec.generators);
    CHECK((realized - spec.gram).norm() < 1e-10);

    // A combination that vanishes in the space but not in the form is
    // inconsistent data.
    GramSpec broken;
    broken.generators = mat({{1.0, 1.0}, {0.0, 0.0}});
    broken.gram = mat({{1.0, 0.0}, {0.0, 4.0}});
    CHECK_THROWS_AS(representing_map(broken), InputError);
}

TEST_CASE("connect maps produces the linking isometry") {
    Matrix x = mat({{1.0, 0.0}, {0.0, 2.0}});
    Matrix q = mat({{0.0, -1.0}, {1.0, 0.0}});
    OperatorRelation ox = operator_everywhere(x);
    OperatorRelation oy = operator_everywhere(Matrix(q * x));
    PartialIsometry v = connect_maps(ox, oy);
    CHECK(((v.matrix * x) - q * x).norm() < 1e-9);
    v.validate();
}

TEST_CASE("range space map inverts the square root on its range") {
    Matrix a = mat({{1.0, 0.0}, {0.0, 0.25}});
    OperatorRelation m = range_space_map(a);
    CHECK(m.domain().dim() == 2);
    CHECK((m.action() - mat({{1.0, 0.0}, {0.0, 2.0}})).norm() < 1e-9);

    Matrix rank1 = mat({{1.0, 0.0}, {0.0, 0.0}});
    OperatorRelation m1 = range_space_map(rank1);
    CHECK(m1.domain().dim() == 1);
    CHECK((m1.action() - rank1).norm() < 1e-9);

    // Inputs above the unit bound are rejected.
    CHECK_THROWS_AS(range_space_map(mat({{2.0, 0.0}, {0.0, 0.0}})), InputError);
}

TEST_CASE("limit batteries pass on conditioned random draws") {
    Rng rng(43);
    for (int trial = 0; trial < 8; ++trial) {
        int n = rng.uniform_int(2, 4);
        PsdRelation base = random_psd_relation(n, rng.uniform_int(0, 1), rng.uniform_int(0, 1),
                                               0.5, 3.0, rng);
        int sign = trial % 2 == 0 ? 1 : -1;
        SequenceSpec seq = SequenceSpec::scaled(random_schedule(sign, rng, true), base.relation());
        auto results = scaled_psd_limit_battery(seq, Tol{});
        if (!all_passed(results)) {
            FAIL_CHECK("psd battery failed at trial " << trial << ": "
                                                      << describe_failures(results));
        }
    }
    for (int trial = 0; trial < 6; ++trial) {
        int h = rng.uniform_int(2, 4), k = rng.uniform_int(2, 4);
        int dom = rng.uniform_int(1, h);
        int rank = rng.uniform_int(0, std::min(dom, k));
        OperatorRelation base = structured_operator(h, k, dom, rank, 0.7, 2.0, rng);
        int sign = trial % 2 == 0 ? 1 : -1;
        SequenceSpec seq =
            SequenceSpec::scaled(random_schedule(sign, rng, true), base.relation());
        auto results = scaled_operator_limit_battery(seq, Tol{});
        if (!all_passed(results)) {
            FAIL_CHECK("operator battery failed at trial " << trial << ": "
                                                           << describe_failures(results));
        }
    }
}

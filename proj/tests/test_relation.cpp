#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relcalc/invariants.hpp"
#include "relcalc/random_gen.hpp"
#include "relcalc/relation.hpp"

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

// Columns are stacked (f, f') pairs.
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

}  // namespace

TEST_CASE("component subspaces of hand relations") {
    // Everywhere defined matrix with a kernel.
    OperatorRelation t = operator_everywhere(mat({{1.0, 0.0}, {0.0, 0.0}}));
    CHECK(t.relation().dom().dim() == 2);
    CHECK(t.relation().ran().dim() == 1);
    CHECK(t.relation().kernel().dim() == 1);
    CHECK(t.relation().mul().dim() == 0);
    CHECK(std::abs(t.relation().kernel().basis()(1, 0)) == doctest::Approx(1.0));

    // Multivalued: e1 -> 0 together with the vertical direction (0, e2).
    LinearRelation m = rel(2, 2, {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
    CHECK(m.dom().dim() == 1);
    CHECK(m.kernel().dim() == 1);
    CHECK(m.mul().dim() == 1);
    CHECK(m.ran().dim() == 1);
    CHECK(std::abs(m.mul().basis()(1, 0)) == doctest::Approx(1.0));

    // Full product relation: every component is everything.
    LinearRelation full = relation_from_graph(2, 2, Matrix::Identity(4, 4));
    CHECK(full.dom().dim() == 2);
    CHECK(full.ran().dim() == 2);
    CHECK(full.kernel().dim() == 2);
    CHECK(full.mul().dim() == 2);
}

TEST_CASE("graph dimension bookkeeping") {
    Rng rng(3);
    for (int trial = 0; trial < 80; ++trial) {
        int h = rng.uniform_int(1, 5), k = rng.uniform_int(1, 5);
        LinearRelation t = random_relation(h, k, rng);
        // dom and mul decompose the graph, dually for the inverse.
        CHECK(t.graph_dim() == t.dom().dim() + t.mul().dim());
        CHECK(t.graph_dim() == t.ran().dim() + t.kernel().dim());
        LinearRelation star = adjoint(t);
        CHECK(star.graph_dim() == h + k - t.graph_dim());
    }
}

TEST_CASE("adjoint of a matrix is its transpose") {
    Matrix a = mat({{1.0, 2.0}, {0.0, 1.0}, {3.0, -1.0}});
    LinearRelation t = operator_everywhere(a).relation();
    LinearRelation star = adjoint(t);
    OperatorRelation sop(star);
    CHECK(sop.domain().dim() == 3);
    CHECK((sop.action() - a.transpose()).norm() < 1e-12);
}

TEST_CASE("adjoint of a product relation") {
    // T = span{(e1, 0), (0, e2)}: the adjoint is span(e1) x span(e2).
    LinearRelation t = rel(2, 2, {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
    LinearRelation star = adjoint(t);
    CHECK(star.dom().dim() == 1);
    CHECK(std::abs(star.dom().basis()(0, 0)) == doctest::Approx(1.0));
    CHECK(star.mul().dim() == 1);
    CHECK(std::abs(star.mul().basis()(1, 0)) == doctest::Approx(1.0));
    CHECK(is_singular_relation(star));

    // Involution and the duality mul t* = (dom t)^perp on the same example.
    CHECK(equal_relations(adjoint(star), t));
    CHECK(equal_subspaces(star.mul(), complement(t.dom())));
    CHECK(equal_subspaces(star.kernel(), complement(t.ran())));
}

TEST_CASE("lebesgue decomposition splits operator and singular parts") {
    // e1 -> e1 plus the multivalued direction (0, e2).
    LinearRelation t = rel(2, 2, {{1.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
    LebesgueParts parts = lebesgue_decompose(t);

    CHECK(parts.reg.domain().dim() == 1);
    CHECK((parts.reg.action() - mat({{1.0, 0.0}, {0.0, 0.0}})).norm() < 1e-10);

    CHECK(is_singular_relation(parts.sing));
    CHECK(parts.sing.dom().dim() == 1);
    CHECK(parts.sing.mul().dim() == 1);

    CHECK((parts.mul_projector - mat({{0.0, 0.0}, {0.0, 1.0}})).norm() < 1e-12);
    CHECK(equal_relations(componentwise_sum(parts.reg.relation(), parts.sing), t));

    // An operator decomposes into itself plus the zero relation on its
    // domain.
    LinearRelation op = operator_everywhere(mat({{1.0, 2.0}, {3.0, 4.0}})).relation();
    LebesgueParts pop = lebesgue_decompose(op);
    CHECK(equal_relations(pop.reg.relation(), op));
    CHECK(pop.sing.mul().dim() == 0);
    CHECK(pop.sing.ran().dim() == 0);
    CHECK(pop.sing.dom().dim() == 2);
}

TEST_CASE("compose_matrix filters directions the matrix kills") {
    // Projecting away the only image direction of a purely multivalued
    // relation must yield the zero relation, not a renormalized ghost.
    LinearRelation vertical = rel(2, 2, {{0.0, 0.0, 0.0, 1.0}});
    Matrix away = mat({{1.0, 0.0}, {0.0, 0.0}});
    LinearRelation gone = compose_matrix(away, vertical);
    CHECK(gone.graph_dim() == 0);
    CHECK(gone.dom().dim() == 0);
    CHECK(gone.mul().dim() == 0);

    // A matrix that keeps the direction passes it through.
    LinearRelation kept = compose_matrix(Matrix::Identity(2, 2), vertical);
    CHECK(equal_relations(kept, vertical));

    // Tiny but genuine scaling is not filtering: eps * I keeps the graph.
    LinearRelation shrunk = compose_matrix(1e-8 * Matrix::Identity(2, 2), vertical);
    CHECK(shrunk.mul().dim() == 1);
}

TEST_CASE("relational composition matches matrix products") {
    Matrix a = mat({{1.0, 2.0}, {0.0, 1.0}});
    Matrix b = mat({{0.0, 1.0}, {1.0, 1.0}});
    LinearRelation ab = compose_relations(operator_everywhere(a).relation(),
                                          operator_everywhere(b).relation());
    CHECK(equal_relations(ab, operator_everywhere(a * b).relation()));

    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        Matrix x = gaussian_matrix(3, 3, rng);
        Matrix y = gaussian_matrix(3, 3, rng);
        CHECK(relation_distance(compose_relations(operator_everywhere(x).relation(),
                                                  operator_everywhere(y).relation()),
                                operator_everywhere(x * y).relation()) < 1e-9);
    }
}

TEST_CASE("componentwise sum of matrices adds actions") {
    Matrix a = mat({{1.0, 0.0}, {2.0, 1.0}});
    Matrix b = mat({{0.0, 3.0}, {1.0, 1.0}});
    LinearRelation s = componentwise_sum(operator_everywhere(a).relation(),
                                         operator_everywhere(b).relation());
    OperatorRelation sop(s);
    CHECK((sop.action() - (a + b)).norm() < 1e-10);

    // Opposite summands cancel to the zero operator, not to noise.
    LinearRelation z = componentwise_sum(operator_everywhere(a).relation(),
                                         operator_everywhere(Matrix(-a)).relation());
    OperatorRelation zop(z);
    CHECK(zop.domain().dim() == 2);
    CHECK(zop.action().norm() == 0.0);
}

TEST_CASE("operator extraction flushes representation noise") {
    // A graph column carrying only roundoff in the image must extract as
    // the exact zero operator.
    Matrix gens(4, 2);
    gens << 1.0, 0.0, 0.0, 1.0, 1e-17, 0.0, 0.0, -1e-17;
    OperatorRelation t(relation_from_graph(2, 2, gens));
    CHECK(t.action().norm() == 0.0);
    CHECK(t.domain().dim() == 2);
}

TEST_CASE("product star of a matrix is the gram matrix") {
    Matrix a = mat({{1.0, 2.0}, {0.0, 1.0}, {1.0, -1.0}});
    PsdRelation h = product_star(operator_everywhere(a).relation());
    CHECK(h.domain().dim() == 2);
    CHECK(h.mul_part().dim() == 0);
    CHECK((h.op_part_ambient() - a.transpose() * a).norm() < 1e-10);
}

TEST_CASE("psd relation split form") {
    PsdRelation h = psd_from_matrix(mat({{2.0, 1.0}, {1.0, 2.0}}));
    CHECK(h.domain().dim() == 2);
    Matrix q = h.sqrt_operator().action();
    CHECK((q * q - h.op_part_ambient()).norm() < 1e-10);

    PsdRelation doubled = h.scaled(2.0);
    CHECK((doubled.op_part_ambient() - 2.0 * h.op_part_ambient()).norm() < 1e-10);

    // Non-selfadjoint and non-PSD graphs are rejected.
    CHECK_THROWS_AS(PsdRelation(operator_everywhere(mat({{0.0, 1.0}, {0.0, 0.0}})).relation()),
                    InputError);
    CHECK_THROWS_AS(psd_from_matrix(mat({{-1.0, 0.0}, {0.0, 1.0}})), InputError);
}

TEST_CASE("resolvent of a product relation") {
    // H = span(e1) x span(e2): (H + I)^(-1) maps e1 + mul to dom, so the
    // resolvent is the projector onto span(e1).
    LinearRelation h = rel(2, 2, {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}});
    Matrix r = resolvent(PsdRelation(h));
    CHECK((r - mat({{1.0, 0.0}, {0.0, 0.0}})).norm() < 1e-12);

    PsdRelation back = relation_from_resolvent(r);
    CHECK(equal_relations(back.relation(), h));
}

TEST_CASE("resolvent round trip on matrices") {
    Rng rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        int n = rng.uniform_int(1, 5);
        // Spectrum well away from the snapping window.
        Matrix a = random_psd_matrix(n, rng.uniform_int(0, n - 1), 0.1, 5.0, rng);
        PsdRelation h = psd_from_matrix(a);
        PsdRelation back = relation_from_resolvent(resolvent(h));
        CHECK(relation_distance(back.relation(), h.relation()) < 1e-7);
    }
}

TEST_CASE("spectral truncation keeps the lower spectrum") {
    Matrix a = mat({{1.0, 0.0, 0.0}, {0.0, 3.0, 0.0}, {0.0, 0.0, 5.0}});
    Matrix t4 = spectral_truncation(a, 4.0);
    CHECK((t4 - mat({{1.0, 0.0, 0.0}, {0.0, 3.0, 0.0}, {0.0, 0.0, 0.0}})).norm() < 1e-12);

    // The boundary eigenvalue stays, and clearing the top returns the
    // input bit for bit.
    Matrix t3 = spectral_truncation(a, 3.0);
    CHECK(t3(1, 1) == doctest::Approx(3.0));
    CHECK((spectral_truncation(a, 5.0) - a).norm() == 0.0);
    CHECK((spectral_truncation(a, 100.0) - a).norm() == 0.0);

    CHECK_THROWS_AS(spectral_truncation(a, 0.0), InputError);
}

TEST_CASE("singular relation detection") {
    CHECK(is_singular_relation(rel(2, 2, {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}})));
    CHECK(is_singular_relation(zero_operator(2, 2, Subspace::full(2)).relation()));
    CHECK(!is_singular_relation(operator_everywhere(Matrix::Identity(2, 2)).relation()));
}

TEST_CASE("direct sum concatenates blocks") {
    LinearRelation a = operator_everywhere(mat({{2.0}})).relation();
    LinearRelation b = rel(1, 1, {{0.0, 1.0}});
    LinearRelation s = direct_sum(a, b);
    CHECK(s.dim_h() == 2);
    CHECK(s.dim_k() == 2);
    CHECK(s.dom().dim() == 1);
    CHECK(s.mul().dim() == 1);
    CHECK(s.graph_dim() == 2);
}

TEST_CASE("inverse relation swaps components") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        LinearRelation t = random_relation(rng.uniform_int(1, 4), rng.uniform_int(1, 4), rng);
        LinearRelation inv = t.inverse();
        CHECK(equal_subspaces(inv.dom(), t.ran()));
        CHECK(equal_subspaces(inv.mul(), t.kernel()));
        CHECK(equal_relations(inv.inverse(), t));
    }
}

TEST_CASE("identity battery on random relations") {
    Rng rng(5);
    for (int trial = 0; trial < 150; ++trial) {
        int h = rng.uniform_int(1, 5), k = rng.uniform_int(1, 5);
        LinearRelation t = random_relation(h, k, rng);
        auto results = relation_identity_battery(t, Tol{}, 1e-8);
        CHECK(results.size() == 9);
        if (!all_passed(results)) {
            FAIL_CHECK("battery failed at trial " << trial << ": " << describe_failures(results));
        }
    }
}

TEST_CASE("module battery on random relations") {
    Rng rng(6);
    for (int trial = 0; trial < 60; ++trial) {
        int h = rng.uniform_int(1, 4), k = rng.uniform_int(1, 4);
        LinearRelation t = random_relation(h, k, rng);
        auto results = relation_module_battery(t, Tol{});
        if (!all_passed(results)) {
            FAIL_CHECK("battery failed at trial " << trial << ": " << describe_failures(results));
        }
    }
}

TEST_CASE("operator relation rejects multivalued input") {
    LinearRelation m = rel(2, 2, {{0.0, 0.0, 0.0, 1.0}});
    CHECK_THROWS_AS(OperatorRelation{m}, InputError);
}

TEST_CASE("operator on a partial domain ignores the rest") {
    Matrix a = mat({{1.0, 5.0}, {0.0, 2.0}});
    Subspace e1 = orthonormalize(mat({{1.0}, {0.0}}));
    OperatorRelation t = operator_on_domain(a, e1);
    CHECK(t.domain().dim() == 1);
    Vector f(2);
    f << 1.0, 0.0;
    CHECK((t.apply(f) - a.col(0)).norm() < 1e-12);
    // Action annihilates the complement of the domain.
    Vector g(2);
    g << 0.0, 1.0;
    CHECK(t.apply(g).norm() < 1e-12);
}

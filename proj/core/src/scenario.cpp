#include "relcalc/scenario.hpp"

#include "relcalc/domination.hpp"
#include "relcalc/invariants.hpp"
#include "relcalc/limits.hpp"
#include "relcalc/random_gen.hpp"
#include "relcalc/relation.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace relcalc {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kDefaultEps = 1e-6;

// Schema and input problems share one exit path (code 2); the path prefix
// pins down where in the file the problem sits.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

const ojson& member(const ojson& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, "missing field \"" + key + "\"");
    return *it;
}

const ojson* opt_member(const ojson& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

std::string as_string(const ojson& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double as_number(const ojson& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const ojson& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
    return j.get<int>();
}

bool as_bool(const ojson& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

ojson matrix_json(const Matrix& m) {
    ojson j;
    j["rows"] = static_cast<int>(m.rows());
    j["cols"] = static_cast<int>(m.cols());
    ojson data = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = std::move(data);
    return j;
}

Matrix matrix_from_json(const ojson& j, const std::string& path) {
    int rows = as_int(member(j, path, "rows"), path + ".rows");
    int cols = as_int(member(j, path, "cols"), path + ".cols");
    if (rows < 0 || cols < 0) fail(path, "matrix dimensions must be nonnegative");
    const ojson& data = member(j, path, "data");
    if (!data.is_array()) fail(path + ".data", "expected an array");
    if (static_cast<long long>(data.size()) != static_cast<long long>(rows) * cols)
        fail(path + ".data", "expected " + std::to_string(static_cast<long long>(rows) * cols) +
                                 " entries, got " + std::to_string(data.size()));
    Matrix m(rows, cols);
    int i = 0;
    for (const auto& v : data) {
        if (!v.is_number()) fail(path + ".data[" + std::to_string(i) + "]", "expected a number");
        m(i / cols, i % cols) = v.get<double>();
        ++i;
    }
    return m;
}

ojson subspace_json(const Subspace& s) {
    ojson j;
    j["ambient"] = s.ambient();
    j["basis"] = matrix_json(s.basis());
    return j;
}

using Value = std::variant<Matrix, Subspace, LinearRelation, OperatorRelation, PsdRelation>;

ojson value_json(const Value& v) {
    ojson j;
    if (const auto* m = std::get_if<Matrix>(&v)) {
        j["type"] = "matrix";
        j["matrix"] = matrix_json(*m);
    } else if (const auto* s = std::get_if<Subspace>(&v)) {
        j["type"] = "subspace";
        j["ambient"] = s->ambient();
        j["basis"] = matrix_json(s->basis());
    } else if (const auto* r = std::get_if<LinearRelation>(&v)) {
        j["type"] = "relation";
        j["dim_h"] = r->dim_h();
        j["dim_k"] = r->dim_k();
        j["graph"] = matrix_json(r->graph().basis());
    } else if (const auto* o = std::get_if<OperatorRelation>(&v)) {
        j["type"] = "operator";
        j["dim_h"] = o->dim_h();
        j["dim_k"] = o->dim_k();
        j["domain"] = matrix_json(o->domain().basis());
        j["action"] = matrix_json(o->action());
        j["graph"] = matrix_json(o->relation().graph().basis());
    } else if (const auto* p = std::get_if<PsdRelation>(&v)) {
        j["type"] = "psd";
        j["dim"] = p->dim();
        j["graph"] = matrix_json(p->relation().graph().basis());
        j["op_part"] = matrix_json(p->op_part_ambient());
        j["mul"] = matrix_json(p->mul_part().basis());
    }
    return j;
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::string compact_matrix(const Matrix& m) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        os << (r ? ", [" : "[");
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? ", " : "") << fmt_num(m(r, c));
        os << "]";
    }
    os << "]";
    return os.str();
}

std::string compact_value(const Value& v) {
    std::ostringstream os;
    if (const auto* m = std::get_if<Matrix>(&v)) {
        os << "matrix " << m->rows() << "x" << m->cols() << " " << compact_matrix(*m);
    } else if (const auto* s = std::get_if<Subspace>(&v)) {
        os << "subspace of R^" << s->ambient() << ", dim " << s->dim() << ", basis "
           << compact_matrix(s->basis());
    } else if (const auto* r = std::get_if<LinearRelation>(&v)) {
        os << "relation R^" << r->dim_h() << " -> R^" << r->dim_k() << ", graph dim "
           << r->graph_dim() << ", basis " << compact_matrix(r->graph().basis());
    } else if (const auto* o = std::get_if<OperatorRelation>(&v)) {
        os << "operator R^" << o->dim_h() << " -> R^" << o->dim_k() << " on domain dim "
           << o->domain().dim() << ", action " << compact_matrix(o->action());
    } else if (const auto* p = std::get_if<PsdRelation>(&v)) {
        os << "psd relation on R^" << p->dim() << ", mul dim " << p->mul_part().dim()
           << ", operator part " << compact_matrix(p->op_part_ambient());
    }
    return os.str();
}

struct Context {
    Tol tol;
    double eps = kDefaultEps;
    std::map<std::string, int> spaces;
    std::map<std::string, Value> values;
    std::map<std::string, SequenceSpec> sequences;

    bool taken(const std::string& name) const {
        return spaces.count(name) || values.count(name) || sequences.count(name);
    }
    const Value& lookup(const std::string& name, const std::string& path) const {
        auto it = values.find(name);
        if (it == values.end()) fail(path, "undefined object \"" + name + "\"");
        return it->second;
    }
    const SequenceSpec& lookup_seq(const std::string& name, const std::string& path) const {
        auto it = sequences.find(name);
        if (it == sequences.end()) fail(path, "undefined sequence \"" + name + "\"");
        return it->second;
    }
};

LinearRelation to_relation(const Value& v, const Context& ctx, const std::string& path) {
    if (const auto* m = std::get_if<Matrix>(&v)) return operator_everywhere(*m, ctx.tol).relation();
    if (const auto* r = std::get_if<LinearRelation>(&v)) return *r;
    if (const auto* o = std::get_if<OperatorRelation>(&v)) return o->relation();
    if (const auto* p = std::get_if<PsdRelation>(&v)) return p->relation();
    fail(path, "expected a relation-valued name, got a subspace");
}

PsdRelation to_psd(const Value& v, const Context& ctx, const std::string& path) {
    if (const auto* m = std::get_if<Matrix>(&v)) return psd_from_matrix(*m, ctx.tol);
    if (const auto* p = std::get_if<PsdRelation>(&v)) return *p;
    if (const auto* r = std::get_if<LinearRelation>(&v)) return PsdRelation(*r, ctx.tol);
    if (const auto* o = std::get_if<OperatorRelation>(&v)) return PsdRelation(o->relation(), ctx.tol);
    fail(path, "expected a nonnegative selfadjoint value");
}

OperatorRelation to_operator(const Value& v, const Context& ctx, const std::string& path) {
    if (const auto* m = std::get_if<Matrix>(&v)) return operator_everywhere(*m, ctx.tol);
    if (const auto* o = std::get_if<OperatorRelation>(&v)) return *o;
    if (const auto* r = std::get_if<LinearRelation>(&v)) return OperatorRelation(*r, ctx.tol);
    if (const auto* p = std::get_if<PsdRelation>(&v)) return OperatorRelation(p->relation(), ctx.tol);
    fail(path, "expected an operator-valued name");
}

Matrix to_matrix(const Value& v, const std::string& path) {
    if (const auto* m = std::get_if<Matrix>(&v)) return *m;
    fail(path, "expected a matrix");
}

Subspace to_subspace(const Value& v, const Context& ctx, const std::string& path) {
    if (const auto* s = std::get_if<Subspace>(&v)) return *s;
    if (const auto* m = std::get_if<Matrix>(&v)) return orthonormalize(*m, ctx.tol);
    fail(path, "expected a subspace or a basis matrix");
}

double compare_values(const Value& a, const Value& b, const Context& ctx, const std::string& path) {
    if (std::holds_alternative<Subspace>(a) || std::holds_alternative<Subspace>(b)) {
        Subspace x = to_subspace(a, ctx, path);
        Subspace y = to_subspace(b, ctx, path);
        if (x.ambient() != y.ambient()) fail(path, "subspaces live in different ambient spaces");
        return projector_distance(x, y);
    }
    if (std::holds_alternative<Matrix>(a) && std::holds_alternative<Matrix>(b)) {
        const Matrix& x = std::get<Matrix>(a);
        const Matrix& y = std::get<Matrix>(b);
        if (x.rows() != y.rows() || x.cols() != y.cols()) fail(path, "matrix dimensions differ");
        return x.size() == 0 ? 0.0 : (x - y).cwiseAbs().maxCoeff();
    }
    LinearRelation x = to_relation(a, ctx, path);
    LinearRelation y = to_relation(b, ctx, path);
    if (!x.same_spaces(y)) fail(path, "relations live between different spaces");
    return relation_distance(x, y);
}

Tol tolerance_from(const ojson& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    Tol tol;
    for (const auto& [key, val] : j.items()) {
        const std::string p = path + "." + key;
        if (key == "rank_rel") tol.rank_rel = as_number(val, p);
        else if (key == "psd_tol") tol.psd_tol = as_number(val, p);
        else if (key == "sub_eq_tol") tol.sub_eq_tol = as_number(val, p);
        else if (key == "conv_eps") tol.conv_eps = as_number(val, p);
        else if (key == "snap_tol") tol.snap_tol = as_number(val, p);
        else if (key == "blowup_cap") tol.blowup_cap = as_number(val, p);
        else if (key == "n_max_doublings") tol.n_max_doublings = as_int(val, p);
        else fail(p, "unknown tolerance field");
    }
    if (!(tol.rank_rel > 0) || !(tol.psd_tol > 0) || !(tol.sub_eq_tol > 0) || !(tol.conv_eps > 0) ||
        !(tol.snap_tol > 0) || !(tol.blowup_cap > 1))
        fail(path, "tolerances must be positive");
    if (tol.n_max_doublings < 1 || tol.n_max_doublings > 60)
        fail(path + ".n_max_doublings", "expected a value in 1..60");
    return tol;
}

int dim_from(const ojson& j, const Context& ctx, const std::string& path) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        auto it = ctx.spaces.find(name);
        if (it == ctx.spaces.end()) fail(path, "undefined space \"" + name + "\"");
        return it->second;
    }
    int d = as_int(j, path);
    if (d < 0) fail(path, "dimension must be nonnegative");
    return d;
}

// A matrix argument is either the name of a defined matrix object or an
// inline rows/cols/data record.
Matrix matrix_ref(const ojson& j, const Context& ctx, const std::string& path) {
    if (j.is_string())
        return to_matrix(ctx.lookup(j.get<std::string>(), path), path);
    return matrix_from_json(j, path);
}

void parse_spaces(const ojson& j, Context& ctx) {
    if (!j.is_object()) fail("spaces", "expected an object mapping names to dimensions");
    for (const auto& [key, val] : j.items()) {
        if (key.empty()) fail("spaces", "empty space name");
        if (ctx.taken(key)) fail("spaces." + key, "duplicate name");
        int d = as_int(val, "spaces." + key);
        if (d < 0) fail("spaces." + key, "dimension must be nonnegative");
        ctx.spaces[key] = d;
    }
}

void define_object(const ojson& def, Context& ctx, const std::string& path) {
    const std::string name = as_string(member(def, path, "name"), path + ".name");
    if (name.empty()) fail(path + ".name", "empty name");
    if (ctx.taken(name)) fail(path + ".name", "duplicate name \"" + name + "\"");
    const std::string kind = as_string(member(def, path, "kind"), path + ".kind");
    try {
        if (kind == "matrix") {
            ctx.values.emplace(name, matrix_from_json(def, path));
        } else if (kind == "relation") {
            int dh = dim_from(member(def, path, "dim_h"), ctx, path + ".dim_h");
            int dk = dim_from(member(def, path, "dim_k"), ctx, path + ".dim_k");
            Matrix g = matrix_ref(member(def, path, "generators"), ctx, path + ".generators");
            if (g.rows() != dh + dk)
                fail(path + ".generators",
                     "expected " + std::to_string(dh + dk) + " rows, got " + std::to_string(g.rows()));
            ctx.values.emplace(name, relation_from_graph(dh, dk, g, ctx.tol));
        } else if (kind == "operator_on_domain") {
            Matrix m = matrix_ref(member(def, path, "matrix"), ctx, path + ".matrix");
            if (const ojson* d = opt_member(def, "domain")) {
                Matrix basis = matrix_ref(*d, ctx, path + ".domain");
                if (basis.rows() != m.cols())
                    fail(path + ".domain", "domain vectors must have " + std::to_string(m.cols()) +
                                               " entries");
                ctx.values.emplace(name,
                                   operator_on_domain(m, orthonormalize(basis, ctx.tol), ctx.tol));
            } else {
                ctx.values.emplace(name, operator_everywhere(m, ctx.tol));
            }
        } else if (kind == "psd") {
            Matrix m = matrix_ref(member(def, path, "matrix"), ctx, path + ".matrix");
            ctx.values.emplace(name, psd_from_matrix(m, ctx.tol));
        } else {
            fail(path + ".kind", "unknown kind \"" + kind +
                                     "\" (expected matrix, relation, operator_on_domain or psd)");
        }
    } catch (const InputError& e) {
        fail(path, e.what());
    } catch (const NumericalError& e) {
        fail(path, e.what());
    }
}

std::string schedule_name(Schedule::Kind k) {
    switch (k) {
        case Schedule::Kind::N: return "n";
        case Schedule::Kind::SqrtN: return "sqrt_n";
        case Schedule::Kind::InvN: return "inv_n";
        case Schedule::Kind::InvSqrtN: return "inv_sqrt_n";
        case Schedule::Kind::Const: return "const";
        case Schedule::Kind::Pow: return "pow";
    }
    return "?";
}

ojson schedule_json(const Schedule& s) {
    ojson j;
    j["kind"] = schedule_name(s.kind);
    if (s.kind == Schedule::Kind::Const) j["c"] = s.c;
    if (s.kind == Schedule::Kind::Pow) {
        j["p"] = s.p;
        j["q"] = s.q;
    }
    return j;
}

Schedule schedule_from(const ojson& j, const std::string& path) {
    const std::string kind = as_string(member(j, path, "kind"), path + ".kind");
    Schedule s;
    if (kind == "n") s.kind = Schedule::Kind::N;
    else if (kind == "sqrt_n") s.kind = Schedule::Kind::SqrtN;
    else if (kind == "inv_n") s.kind = Schedule::Kind::InvN;
    else if (kind == "inv_sqrt_n") s.kind = Schedule::Kind::InvSqrtN;
    else if (kind == "const") {
        s.kind = Schedule::Kind::Const;
        s.c = as_number(member(j, path, "c"), path + ".c");
    } else if (kind == "pow") {
        s.kind = Schedule::Kind::Pow;
        s.p = as_int(member(j, path, "p"), path + ".p");
        s.q = as_int(member(j, path, "q"), path + ".q");
    } else {
        fail(path + ".kind", "unknown schedule \"" + kind + "\"");
    }
    try {
        s.validate();
    } catch (const InputError& e) {
        fail(path, e.what());
    }
    return s;
}

void define_sequence(const ojson& def, Context& ctx, const std::string& path) {
    const std::string name = as_string(member(def, path, "name"), path + ".name");
    if (name.empty()) fail(path + ".name", "empty name");
    if (ctx.taken(name)) fail(path + ".name", "duplicate name \"" + name + "\"");
    const std::string kind = as_string(member(def, path, "kind"), path + ".kind");
    try {
        if (kind == "scaled") {
            Schedule sched = schedule_from(member(def, path, "schedule"), path + ".schedule");
            const std::string bp = path + ".base";
            const std::string base = as_string(member(def, path, "base"), bp);
            ctx.sequences.emplace(name,
                                  SequenceSpec::scaled(sched, to_relation(ctx.lookup(base, bp), ctx, bp)));
        } else if (kind == "explicit") {
            const ojson& tj = member(def, path, "terms");
            if (!tj.is_array() || tj.empty()) fail(path + ".terms", "expected a nonempty array");
            std::vector<LinearRelation> terms;
            int i = 0;
            for (const auto& t : tj) {
                const std::string p = path + ".terms[" + std::to_string(i++) + "]";
                terms.push_back(to_relation(ctx.lookup(as_string(t, p), p), ctx, p));
            }
            ctx.sequences.emplace(name, SequenceSpec::explicit_terms(std::move(terms)));
        } else if (kind == "direct_sum") {
            const ojson& pj = member(def, path, "parts");
            if (!pj.is_array() || pj.empty()) fail(path + ".parts", "expected a nonempty array");
            std::vector<SequenceSpec> parts;
            int i = 0;
            for (const auto& t : pj) {
                const std::string p = path + ".parts[" + std::to_string(i++) + "]";
                parts.push_back(ctx.lookup_seq(as_string(t, p), p));
            }
            ctx.sequences.emplace(name, SequenceSpec::sum_of(std::move(parts)));
        } else {
            fail(path + ".kind",
                 "unknown sequence kind \"" + kind + "\" (expected scaled, explicit or direct_sum)");
        }
    } catch (const InputError& e) {
        fail(path, e.what());
    }
}

// Graph of the set product s1 x s2 inside H + K.
LinearRelation product_graph(const Subspace& s1, const Subspace& s2, const Tol& tol) {
    Matrix g = Matrix::Zero(s1.ambient() + s2.ambient(), s1.dim() + s2.dim());
    g.block(0, 0, s1.ambient(), s1.dim()) = s1.basis();
    g.block(s1.ambient(), s1.dim(), s2.ambient(), s2.dim()) = s2.basis();
    return relation_from_graph(s1.ambient(), s2.ambient(), g, tol);
}

struct TaskRun {
    std::optional<Value> result;
    std::optional<Value> result_map;
    std::optional<double> residual;
    std::optional<bool> ok;
    std::string message;
    ojson computed = ojson::object();
};

LinearRelation rel_arg(const ojson& task, const Context& ctx, const std::string& path,
                       const std::string& key) {
    const std::string p = path + "." + key;
    return to_relation(ctx.lookup(as_string(member(task, path, key), p), p), ctx, p);
}

PsdRelation psd_arg(const ojson& task, const Context& ctx, const std::string& path,
                    const std::string& key) {
    const std::string p = path + "." + key;
    return to_psd(ctx.lookup(as_string(member(task, path, key), p), p), ctx, p);
}

OperatorRelation op_arg(const ojson& task, const Context& ctx, const std::string& path,
                        const std::string& key) {
    const std::string p = path + "." + key;
    return to_operator(ctx.lookup(as_string(member(task, path, key), p), p), ctx, p);
}

Matrix matrix_arg(const ojson& task, const Context& ctx, const std::string& path,
                  const std::string& key) {
    return matrix_ref(member(task, path, key), ctx, path + "." + key);
}

const SequenceSpec& seq_arg(const ojson& task, const Context& ctx, const std::string& path) {
    const std::string p = path + ".sequence";
    return ctx.lookup_seq(as_string(member(task, path, "sequence"), p), p);
}

ojson convergence_json(const ConvergenceInfo& c) {
    ojson j;
    j["converged"] = c.converged;
    j["doublings"] = c.doublings;
    j["n_final"] = c.n_final;
    j["delta1"] = c.delta1;
    j["delta2"] = c.delta2;
    j["hit_blowup_cap"] = c.hit_blowup_cap;
    return j;
}

ojson limit_json(const LimitReport& rep) {
    ojson j = convergence_json(rep.convergence);
    j["dom_limit"] = subspace_json(rep.dom_limit);
    j["blowup"] = subspace_json(rep.blowup_space);
    if (rep.analytic_residual) j["closed_form_residual"] = *rep.analytic_residual;
    if (!rep.witnesses.empty()) j["witnesses"] = static_cast<int>(rep.witnesses.size());
    if (rep.pipeline) {
        ojson p;
        p["dom_residual"] = rep.pipeline->dom_residual;
        p["norm_residual"] = rep.pipeline->norm_residual;
        p["op_residual"] = rep.pipeline->op_residual;
        p["mul_residual"] = rep.pipeline->mul_residual;
        p["passed"] = rep.pipeline->passed;
        j["pipeline"] = std::move(p);
    }
    if (rep.descent) {
        ojson d;
        d["graph_residual"] = rep.descent->graph_residual;
        d["link_residual"] = rep.descent->link_residual;
        d["back_residual"] = rep.descent->back_residual;
        d["singular_limit_map"] = rep.descent->singular_limit_map;
        d["singular_k"] = rep.descent->singular_k;
        d["passed"] = rep.descent->passed;
        j["descent"] = std::move(d);
    }
    if (!rep.notes.empty()) j["notes"] = rep.notes;
    return j;
}

ojson invariant_json(const std::vector<InvariantResult>& results) {
    ojson arr = ojson::array();
    for (const auto& r : results) {
        ojson e;
        e["name"] = r.name;
        e["residual"] = r.residual;
        e["tolerance"] = r.tolerance;
        e["passed"] = r.passed;
        if (!r.detail.empty()) e["detail"] = r.detail;
        arr.push_back(std::move(e));
    }
    return arr;
}

Direction direction_arg(const ojson& task, const std::string& path) {
    const std::string p = path + ".direction";
    const std::string d = as_string(member(task, path, "direction"), p);
    if (d == "nondecreasing") return Direction::Nondecreasing;
    if (d == "nonincreasing") return Direction::Nonincreasing;
    fail(p, "expected \"nondecreasing\" or \"nonincreasing\"");
}

TaskRun exec_task(const std::string& op, const ojson& task, Context& ctx, const std::string& path) {
    TaskRun run;
    if (op == "adjoint") {
        run.result = Value(adjoint(rel_arg(task, ctx, path, "of"), ctx.tol));
    } else if (op == "closure") {
        run.result = Value(rel_arg(task, ctx, path, "of").closure());
    } else if (op == "inverse") {
        run.result = Value(rel_arg(task, ctx, path, "of").inverse(ctx.tol));
    } else if (op == "regular_part") {
        run.result = Value(lebesgue_decompose(rel_arg(task, ctx, path, "of"), ctx.tol).reg);
    } else if (op == "singular_part") {
        run.result = Value(lebesgue_decompose(rel_arg(task, ctx, path, "of"), ctx.tol).sing);
    } else if (op == "product_star") {
        run.result = Value(product_star(rel_arg(task, ctx, path, "of"), ctx.tol));
    } else if (op == "sqrt_relation") {
        run.result = Value(psd_sqrt_relation(psd_arg(task, ctx, path, "of"), ctx.tol));
    } else if (op == "sqrt_operator") {
        run.result = Value(psd_arg(task, ctx, path, "of").sqrt_operator(ctx.tol));
    } else if (op == "compose") {
        run.result = Value(compose_relations(rel_arg(task, ctx, path, "outer"),
                                             rel_arg(task, ctx, path, "inner"), ctx.tol));
    } else if (op == "compose_matrix") {
        run.result = Value(compose_matrix(matrix_arg(task, ctx, path, "matrix"),
                                          rel_arg(task, ctx, path, "of"), ctx.tol));
    } else if (op == "componentwise_sum") {
        run.result = Value(componentwise_sum(rel_arg(task, ctx, path, "a"),
                                             rel_arg(task, ctx, path, "b"), ctx.tol));
    } else if (op == "direct_sum") {
        run.result =
            Value(direct_sum(rel_arg(task, ctx, path, "a"), rel_arg(task, ctx, path, "b"), ctx.tol));
    } else if (op == "dom_space") {
        run.result = Value(rel_arg(task, ctx, path, "of").dom(ctx.tol));
    } else if (op == "ran_space") {
        run.result = Value(rel_arg(task, ctx, path, "of").ran(ctx.tol));
    } else if (op == "kernel_space") {
        run.result = Value(rel_arg(task, ctx, path, "of").kernel(ctx.tol));
    } else if (op == "mul_space") {
        run.result = Value(rel_arg(task, ctx, path, "of").mul(ctx.tol));
    } else if (op == "kernel_range_product") {
        LinearRelation t = rel_arg(task, ctx, path, "of");
        if (t.dim_h() != t.dim_k())
            throw InputError("kernel_range_product: relation must live on a single space");
        Subspace ker = t.kernel(ctx.tol);
        run.result = Value(product_graph(ker, complement(ker, ctx.tol), ctx.tol));
    } else if (op == "dom_mul_product") {
        LinearRelation t = rel_arg(task, ctx, path, "of");
        run.result = Value(product_graph(t.dom(ctx.tol), t.mul(ctx.tol), ctx.tol));
    } else if (op == "resolvent") {
        run.result = Value(resolvent(psd_arg(task, ctx, path, "of"), ctx.tol));
    } else if (op == "relation_from_resolvent") {
        run.result = Value(relation_from_resolvent(matrix_arg(task, ctx, path, "matrix"), ctx.tol));
    } else if (op == "spectral_truncation") {
        double level = as_number(member(task, path, "level"), path + ".level");
        run.result = Value(spectral_truncation(matrix_arg(task, ctx, path, "matrix"), level, ctx.tol));
    } else if (op == "bounded_approximation") {
        LinearRelation t = rel_arg(task, ctx, path, "of");
        int count = as_int(member(task, path, "count"), path + ".count");
        if (count < 1) fail(path + ".count", "expected a positive count");
        std::vector<Matrix> steps = bounded_approximation(t, count, ctx.tol);
        Matrix w = t.dom(ctx.tol).basis();
        double defect = 0.0;
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (std::size_t k = 0; k + 1 < steps.size(); ++k)
                defect = std::max(defect,
                                  (steps[k] * w.col(c)).norm() - (steps[k + 1] * w.col(c)).norm());
        run.residual = std::max(0.0, defect);
        run.ok = defect <= 1e-10;
        if (!*run.ok) run.message = "norms decreased along the approximation";
        run.result = Value(steps.back());
        ojson arr = ojson::array();
        for (const auto& s : steps) arr.push_back(matrix_json(s));
        run.computed["steps"] = std::move(arr);
    } else if (op == "sequence_at") {
        const SequenceSpec& seq = seq_arg(task, ctx, path);
        int n = as_int(member(task, path, "n"), path + ".n");
        if (n < 1) fail(path + ".n", "expected a positive index");
        run.result = Value(seq.at(static_cast<std::uint64_t>(n), ctx.tol));
    } else if (op == "dominates") {
        std::optional<Contraction> c =
            dominates(rel_arg(task, ctx, path, "a"), rel_arg(task, ctx, path, "b"), ctx.tol);
        run.ok = c.has_value();
        if (c) {
            run.computed["contraction"] = matrix_json(c->matrix);
            run.computed["norm"] = c->norm();
            run.result = Value(c->matrix);
        } else {
            run.message = "not dominated";
        }
    } else if (op == "psd_leq") {
        run.ok = psd_leq(psd_arg(task, ctx, path, "a"), psd_arg(task, ctx, path, "b"), ctx.tol);
        if (!*run.ok) run.message = "form order does not hold";
    } else if (op == "theorem_bridge") {
        BridgeVerdicts v =
            theorem_bridge_check(rel_arg(task, ctx, path, "a"), rel_arg(task, ctx, path, "b"), ctx.tol);
        run.ok = v.agree();
        run.computed["form"] = v.form;
        run.computed["relation"] = v.relation;
        run.computed["regular"] = v.regular;
        run.computed["agree"] = v.agree();
        if (!v.agree()) run.message = "the three domination routes disagree";
    } else if (op == "link") {
        double compat = 1e-8;
        if (const ojson* c = opt_member(task, "compat_eps"))
            compat = as_number(*c, path + ".compat_eps");
        PartialIsometry u = link_partial_isometry(op_arg(task, ctx, path, "x"),
                                                  op_arg(task, ctx, path, "y"), ctx.tol, compat);
        run.result = Value(u.matrix);
        run.computed["initial"] = subspace_json(u.initial);
        run.computed["final"] = subspace_json(u.final_space);
    } else if (op == "representing_map") {
        GramSpec spec;
        spec.generators = matrix_arg(task, ctx, path, "generators");
        spec.gram = matrix_arg(task, ctx, path, "gram");
        RepresentingMap rm = representing_map(spec, ctx.tol);
        run.result = Value(rm.map);
        run.computed["neutral"] = subspace_json(rm.neutral);
    } else if (op == "range_space_map") {
        run.result = Value(range_space_map(matrix_arg(task, ctx, path, "matrix"), ctx.tol));
    } else if (op == "monotone_psd_limit") {
        LimitReport rep = monotone_psd_limit(seq_arg(task, ctx, path), direction_arg(task, path), ctx.tol);
        run.computed["limit"] = limit_json(rep);
        run.ok = rep.convergence.converged;
        if (!*run.ok) run.message = "did not converge within the doubling cap";
        if (rep.psd_limit) run.result = Value(*rep.psd_limit);
        if (rep.analytic_residual) run.residual = *rep.analytic_residual;
    } else if (op == "nondecreasing_operator_limit") {
        std::optional<OperatorRelation> bound;
        if (opt_member(task, "bound")) bound = op_arg(task, ctx, path, "bound");
        LimitReport rep =
            nondecreasing_operator_limit(seq_arg(task, ctx, path), ctx.tol, bound ? &*bound : nullptr);
        run.computed["limit"] = limit_json(rep);
        run.ok = rep.convergence.converged;
        if (!*run.ok) run.message = "did not converge within the doubling cap";
        if (rep.op_limit) run.result = Value(*rep.op_limit);
        if (rep.analytic_residual) run.residual = *rep.analytic_residual;
    } else if (op == "nonincreasing_operator_limit") {
        LimitReport rep = nonincreasing_operator_limit(seq_arg(task, ctx, path), ctx.tol);
        run.computed["limit"] = limit_json(rep);
        run.ok = rep.convergence.converged;
        if (!*run.ok) run.message = "did not converge within the doubling cap";
        if (rep.op_limit) run.result = Value(*rep.op_limit);
        if (rep.analytic_residual) run.residual = *rep.analytic_residual;
    } else if (op == "pipeline") {
        LimitReport rep = relation_sequence_pipeline(seq_arg(task, ctx, path), ctx.tol);
        run.computed["limit"] = limit_json(rep);
        run.ok = rep.convergence.converged && rep.pipeline && rep.pipeline->passed;
        if (!*run.ok) run.message = "pipeline checks failed";
        if (rep.psd_limit) run.result = Value(*rep.psd_limit);
        if (rep.representing) run.result_map = Value(*rep.representing);
    } else if (op == "descent_check") {
        LimitReport rep = nonincreasing_relation_check(seq_arg(task, ctx, path), ctx.tol);
        run.computed["limit"] = limit_json(rep);
        run.ok = rep.convergence.converged && rep.descent && rep.descent->passed;
        if (!*run.ok) run.message = "descent checks failed";
        if (rep.psd_limit) run.result = Value(*rep.psd_limit);
        if (rep.representing) run.result_map = Value(*rep.representing);
    } else if (op == "strong_graph_check") {
        GraphLimitCheck chk = strong_graph_limit_check(seq_arg(task, ctx, path),
                                                       rel_arg(task, ctx, path, "candidate"), ctx.tol);
        run.ok = chk.approximated;
        run.residual = chk.worst_distance;
        run.computed["worst_vector"] = chk.worst_vector;
        run.computed["final_distances"] = chk.final_distances;
        if (!chk.approximated) run.message = "candidate graph vector not approximated";
    } else if (op == "invariant") {
        const std::string battery = as_string(member(task, path, "battery"), path + ".battery");
        std::vector<InvariantResult> results;
        if (battery == "identity") {
            double rtol = 1e-8;
            if (const ojson* r = opt_member(task, "residual_tol"))
                rtol = as_number(*r, path + ".residual_tol");
            results = relation_identity_battery(rel_arg(task, ctx, path, "of"), ctx.tol, rtol);
        } else if (battery == "module") {
            results = relation_module_battery(rel_arg(task, ctx, path, "of"), ctx.tol);
        } else if (battery == "domination") {
            bool expect_dom = false;
            if (const ojson* e = opt_member(task, "expect_dominated"))
                expect_dom = as_bool(*e, path + ".expect_dominated");
            results = domination_pair_battery(rel_arg(task, ctx, path, "a"),
                                              rel_arg(task, ctx, path, "b"), ctx.tol, expect_dom);
        } else if (battery == "psd_limit") {
            results = scaled_psd_limit_battery(seq_arg(task, ctx, path), ctx.tol);
        } else if (battery == "operator_limit") {
            results = scaled_operator_limit_battery(seq_arg(task, ctx, path), ctx.tol);
        } else if (battery == "pipeline") {
            results = pipeline_battery(seq_arg(task, ctx, path), ctx.tol);
        } else {
            fail(path + ".battery", "unknown battery \"" + battery + "\"");
        }
        run.ok = all_passed(results);
        run.computed["identities"] = invariant_json(results);
        if (!*run.ok) run.message = describe_failures(results);
    } else if (op == "assert_equal") {
        const std::string pa = path + ".a";
        const std::string pb = path + ".b";
        const Value& a = ctx.lookup(as_string(member(task, path, "a"), pa), pa);
        const Value& b = ctx.lookup(as_string(member(task, path, "b"), pb), pb);
        run.residual = compare_values(a, b, ctx, path);
    } else {
        fail(path + ".op", "unknown operation \"" + op + "\"");
    }
    return run;
}

struct ExecResult {
    std::vector<TaskOutcome> outcomes;
    ojson report_tasks = ojson::array();
    std::string text;
    bool all_pass = true;
};

ExecResult exec_tasks(const ojson& tasks, Context& ctx) {
    ExecResult out;
    std::ostringstream text;
    bool stop = false;
    int stopped_at = -1;
    int idx = 0;
    for (const auto& task : tasks) {
        const std::string path = "tasks[" + std::to_string(idx) + "]";
        TaskOutcome oc;
        oc.index = idx;
        oc.op = as_string(member(task, path, "op"), path + ".op");
        ojson rj;
        rj["index"] = idx;
        rj["op"] = oc.op;
        if (stop) {
            oc.status = "error";
            oc.message = "not run: task " + std::to_string(stopped_at) + " raised an error";
            rj["status"] = oc.status;
            rj["message"] = oc.message;
            out.report_tasks.push_back(std::move(rj));
            out.outcomes.push_back(oc);
            out.all_pass = false;
            text << "  [" << idx << "] " << oc.op << ": error (" << oc.message << ")\n";
            ++idx;
            continue;
        }
        double eps = ctx.eps;
        if (const ojson* e = opt_member(task, "eps")) {
            eps = as_number(*e, path + ".eps");
            if (!(eps > 0)) fail(path + ".eps", "expected a positive tolerance");
        }
        std::string result_line;
        try {
            TaskRun run = exec_task(oc.op, task, ctx, path);
            bool pass = true;
            std::string msg = run.message;
            if (const ojson* e = opt_member(task, "expect")) {
                if (e->is_boolean()) {
                    if (!run.ok) fail(path + ".expect", "task has no boolean outcome to compare");
                    bool want = e->get<bool>();
                    pass = (*run.ok == want);
                    msg = pass ? "" : std::string("expected ") + (want ? "true" : "false") +
                                          ", got " + (*run.ok ? "true" : "false");
                } else {
                    const std::string pe = path + ".expect";
                    if (!run.result) fail(pe, "task produced no result to compare");
                    double r = compare_values(*run.result,
                                              ctx.lookup(as_string(*e, pe), pe), ctx, pe);
                    run.residual = r;
                    pass = r <= eps;
                    if (!pass) msg = "residual " + fmt_num(r) + " exceeds eps " + fmt_num(eps);
                }
            } else if (oc.op == "assert_equal") {
                pass = run.residual && *run.residual <= eps;
                if (!pass)
                    msg = "residual " + (run.residual ? fmt_num(*run.residual) : "?") +
                          " exceeds eps " + fmt_num(eps);
            } else if (run.ok) {
                pass = *run.ok;
                if (!pass && msg.empty()) msg = "check failed";
            }
            if (const ojson* r = opt_member(task, "result")) {
                const std::string pr = path + ".result";
                const std::string name = as_string(*r, pr);
                if (name.empty() || ctx.taken(name)) fail(pr, "result name empty or already taken");
                if (!run.result) fail(pr, "task produced no storable result");
                ctx.values.emplace(name, *run.result);
                result_line = "      " + name + " = " + compact_value(*run.result);
            } else if (run.result) {
                result_line = "      result = " + compact_value(*run.result);
            }
            if (const ojson* r = opt_member(task, "result_map")) {
                const std::string pr = path + ".result_map";
                const std::string name = as_string(*r, pr);
                if (name.empty() || ctx.taken(name)) fail(pr, "result name empty or already taken");
                if (!run.result_map) fail(pr, "task produced no secondary result");
                ctx.values.emplace(name, *run.result_map);
                result_line += (result_line.empty() ? "      " : "\n      ") + name + " = " +
                               compact_value(*run.result_map);
            }
            oc.status = pass ? "pass" : "fail";
            oc.message = msg;
            if (run.residual) oc.residual = *run.residual;
            rj["status"] = oc.status;
            if (run.residual) rj["residual"] = *run.residual;
            if (!msg.empty()) rj["message"] = msg;
            if (run.result) rj["computed"] = value_json(*run.result);
            if (run.result_map) rj["computed_map"] = value_json(*run.result_map);
            if (!run.computed.empty()) rj["diagnostics"] = run.computed;
        } catch (const InputError& e) {
            oc.status = "error";
            oc.message = e.what();
            rj["status"] = oc.status;
            rj["message"] = oc.message;
            stop = true;
            stopped_at = idx;
        } catch (const NumericalError& e) {
            oc.status = "error";
            oc.message = e.what();
            rj["status"] = oc.status;
            rj["message"] = oc.message;
            stop = true;
            stopped_at = idx;
        }
        if (oc.status != "pass") out.all_pass = false;
        text << "  [" << idx << "] " << oc.op << ": " << oc.status;
        if (oc.residual >= 0) text << " (residual " << fmt_num(oc.residual) << ", eps " << fmt_num(eps) << ")";
        if (!oc.message.empty()) text << " " << oc.message;
        text << "\n";
        if (!result_line.empty()) text << result_line << "\n";
        out.report_tasks.push_back(std::move(rj));
        out.outcomes.push_back(std::move(oc));
        ++idx;
    }
    out.text = text.str();
    return out;
}

ScenarioResult run_scenario_json(const ojson& root, double default_eps) {
    ScenarioResult out;
    Context ctx;
    if (default_eps > 0) ctx.eps = default_eps;
    try {
        if (!root.is_object()) fail("$", "expected a top-level object");
        for (const auto& [key, val] : root.items()) {
            (void)val;
            if (key != "name" && key != "tolerance" && key != "spaces" && key != "objects" &&
                key != "sequences" && key != "tasks")
                fail(key, "unknown top-level field");
        }
        if (const ojson* n = opt_member(root, "name")) out.name = as_string(*n, "name");
        if (const ojson* t = opt_member(root, "tolerance")) ctx.tol = tolerance_from(*t, "tolerance");
        if (const ojson* s = opt_member(root, "spaces")) parse_spaces(*s, ctx);
        if (const ojson* objs = opt_member(root, "objects")) {
            if (!objs->is_array()) fail("objects", "expected an array");
            int i = 0;
            for (const auto& def : *objs) define_object(def, ctx, "objects[" + std::to_string(i++) + "]");
        }
        if (const ojson* seqs = opt_member(root, "sequences")) {
            if (!seqs->is_array()) fail("sequences", "expected an array");
            int i = 0;
            for (const auto& def : *seqs)
                define_sequence(def, ctx, "sequences[" + std::to_string(i++) + "]");
        }
        const ojson* tasks = opt_member(root, "tasks");
        if (tasks && !tasks->is_array()) fail("tasks", "expected an array");

        ExecResult ex = tasks ? exec_tasks(*tasks, ctx) : ExecResult{};
        out.parsed = true;
        out.tasks = std::move(ex.outcomes);
        out.passed = ex.all_pass;

        ojson report;
        report["scenario"] = out.name;
        report["tasks"] = std::move(ex.report_tasks);
        report["verdict"] = out.passed ? "pass" : "fail";
        out.report_json = report.dump(2);

        std::ostringstream text;
        text << "scenario " << (out.name.empty() ? "(unnamed)" : out.name) << "\n";
        text << ex.text;
        text << "verdict " << (out.passed ? "pass" : "fail") << "\n";
        out.text = text.str();
    } catch (const SchemaError& e) {
        out.parsed = false;
        out.passed = false;
        out.error = e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fuzzing.

struct Trial {
    std::string label;
    ojson objects = ojson::array();
    ojson sequences = ojson::array();
    ojson task = ojson::object();
    std::function<std::vector<InvariantResult>()> run;
};

ojson relation_object(const std::string& name, const LinearRelation& r) {
    ojson o;
    o["name"] = name;
    o["kind"] = "relation";
    o["dim_h"] = r.dim_h();
    o["dim_k"] = r.dim_k();
    o["generators"] = matrix_json(r.graph().basis());
    return o;
}

ojson sequence_object(const std::string& name, const Schedule& sched, const std::string& base) {
    ojson s;
    s["name"] = name;
    s["kind"] = "scaled";
    s["schedule"] = schedule_json(sched);
    s["base"] = base;
    return s;
}

Trial relation_trial(const FuzzConfig& cfg, Rng& rng, const Tol& tol, bool appendix) {
    Trial t;
    int h = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
    int k = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
    LinearRelation r = random_relation(h, k, rng, tol);
    t.label = (appendix ? std::string("identity battery ") : std::string("module battery ")) +
              std::to_string(h) + "x" + std::to_string(k) + " graph dim " +
              std::to_string(r.graph_dim());
    t.objects.push_back(relation_object("t", r));
    t.task["op"] = "invariant";
    t.task["battery"] = appendix ? "identity" : "module";
    t.task["of"] = "t";
    t.run = [r, tol, appendix]() {
        return appendix ? relation_identity_battery(r, tol) : relation_module_battery(r, tol);
    };
    return t;
}

Trial domination_trial(const FuzzConfig& cfg, Rng& rng, const Tol& tol) {
    Trial t;
    int n = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
    bool generative = rng.uniform_int(0, 1) == 0;
    LinearRelation a = LinearRelation(n, n, Subspace::zero(2 * n));
    LinearRelation b = a;
    if (generative) {
        DominatedPair p = random_dominated_pair(n, rng, tol);
        a = p.a;
        b = p.b;
    } else {
        a = random_relation(n, n, rng, tol);
        b = random_relation(n, n, rng, tol);
    }
    t.label = std::string(generative ? "dominated pair " : "unconstrained pair ") +
              std::to_string(n) + "x" + std::to_string(n);
    t.objects.push_back(relation_object("a", a));
    t.objects.push_back(relation_object("b", b));
    t.task["op"] = "invariant";
    t.task["battery"] = "domination";
    t.task["a"] = "a";
    t.task["b"] = "b";
    t.task["expect_dominated"] = generative;
    t.run = [a, b, tol, generative]() { return domination_pair_battery(a, b, tol, generative); };
    return t;
}

Trial limits_trial(const FuzzConfig& cfg, Rng& rng, const Tol& tol) {
    Trial t;
    int flavor = rng.uniform_int(0, 2);
    if (flavor == 0) {
        int n = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
        int mul_dim = rng.uniform_int(0, n / 2);
        int kern = rng.uniform_int(0, (n - mul_dim) / 2);
        PsdRelation base = random_psd_relation(n, mul_dim, kern, 0.25, 4.0, rng, tol);
        Schedule sched = random_schedule(rng.uniform_int(-1, 1), rng, true);
        SequenceSpec seq = SequenceSpec::scaled(sched, base.relation());
        t.label = "psd limit " + schedule_name(sched.kind) + " dim " + std::to_string(n);
        t.objects.push_back(relation_object("base", base.relation()));
        t.sequences.push_back(sequence_object("seq", sched, "base"));
        t.task["op"] = "invariant";
        t.task["battery"] = "psd_limit";
        t.task["sequence"] = "seq";
        t.run = [seq, tol]() { return scaled_psd_limit_battery(seq, tol); };
    } else if (flavor == 1) {
        int h = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
        int k = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
        int dom_dim = rng.uniform_int(0, h);
        int rank = rng.uniform_int(0, std::min(dom_dim, k));
        OperatorRelation base = structured_operator(h, k, dom_dim, rank, 0.5, 2.0, rng, tol);
        Schedule sched = random_schedule(rng.uniform_int(-1, 1), rng);
        SequenceSpec seq = SequenceSpec::scaled(sched, base.relation());
        t.label = "operator limit " + schedule_name(sched.kind) + " " + std::to_string(h) + "x" +
                  std::to_string(k);
        t.objects.push_back(relation_object("base", base.relation()));
        t.sequences.push_back(sequence_object("seq", sched, "base"));
        t.task["op"] = "invariant";
        t.task["battery"] = "operator_limit";
        t.task["sequence"] = "seq";
        t.run = [seq, tol]() { return scaled_operator_limit_battery(seq, tol); };
    } else {
        int h = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
        int k = rng.uniform_int(cfg.dim_lo, cfg.dim_hi);
        int dom_dim = rng.uniform_int(0, h);
        int mul_dim = rng.uniform_int(0, k / 2);
        int rank = rng.uniform_int(0, std::min(dom_dim, k - mul_dim));
        LinearRelation base = structured_relation(h, k, dom_dim, rank, mul_dim, 0.5, 2.0, rng, tol);
        Schedule sched = random_schedule(rng.uniform_int(0, 1), rng);
        SequenceSpec seq = SequenceSpec::scaled(sched, base);
        t.label = "pipeline " + schedule_name(sched.kind) + " " + std::to_string(h) + "x" +
                  std::to_string(k);
        t.objects.push_back(relation_object("base", base));
        t.sequences.push_back(sequence_object("seq", sched, "base"));
        t.task["op"] = "invariant";
        t.task["battery"] = "pipeline";
        t.task["sequence"] = "seq";
        t.run = [seq, tol]() { return pipeline_battery(seq, tol); };
    }
    return t;
}

Trial make_trial(const std::string& suite, const FuzzConfig& cfg, Rng& rng, const Tol& tol) {
    if (suite == "relation") return relation_trial(cfg, rng, tol, false);
    if (suite == "appendix") return relation_trial(cfg, rng, tol, true);
    if (suite == "domination") return domination_trial(cfg, rng, tol);
    return limits_trial(cfg, rng, tol);
}

}  // namespace

ScenarioResult run_scenario_text(const std::string& json_text, double default_eps) {
    try {
        return run_scenario_json(ojson::parse(json_text), default_eps);
    } catch (const nlohmann::json::parse_error& e) {
        ScenarioResult out;
        out.parsed = false;
        out.error = e.what();
        return out;
    }
}

ScenarioResult run_scenario_file(const std::string& path, double default_eps) {
    std::ifstream in(path);
    if (!in) {
        ScenarioResult out;
        out.parsed = false;
        out.error = "cannot open file: " + path;
        return out;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return run_scenario_text(buf.str(), default_eps);
}

FuzzResult run_fuzz(const FuzzConfig& config) {
    FuzzResult out;
    static const std::array<const char*, 4> kRotation{"relation", "domination", "limits", "appendix"};
    const bool known_suite =
        config.suite == "all" || config.suite == "relation" || config.suite == "domination" ||
        config.suite == "limits" || config.suite == "appendix";
    if (!known_suite) {
        out.error = "unknown suite \"" + config.suite +
                    "\" (expected all, relation, domination, limits or appendix)";
        return out;
    }
    if (config.dim_lo < 1 || config.dim_hi < config.dim_lo) {
        out.error = "dims must satisfy 1 <= lo <= hi";
        return out;
    }
    out.valid_config = true;

    Tol tol;
    std::uint64_t checks = 0;
    ojson bundle;
    for (std::uint64_t trial = 0; trial < config.trials; ++trial) {
        const std::string suite =
            config.suite == "all" ? kRotation[static_cast<std::size_t>(trial % 4)] : config.suite;
        Rng rng(config.seed ^ (0x9e3779b97f4a7c15ull * (trial + 1)));
        std::string crash;
        Trial tr;
        std::vector<InvariantResult> results;
        try {
            tr = make_trial(suite, config, rng, tol);
            results = tr.run();
        } catch (const std::exception& e) {
            crash = e.what();
        }
        checks += results.size();
        const bool failed = !crash.empty() || !all_passed(results);
        ++out.trials_run;
        if (!failed) continue;
        ++out.failures;
        if (out.first_failure.empty()) {
            out.first_failure = "trial " + std::to_string(trial) + " (" +
                                (tr.label.empty() ? suite : tr.label) + "): " +
                                (crash.empty() ? describe_failures(results) : "threw: " + crash);
            if (!tr.objects.empty()) {
                bundle["name"] = "counterexample " + suite + " trial " + std::to_string(trial);
                bundle["objects"] = tr.objects;
                if (!tr.sequences.empty()) bundle["sequences"] = tr.sequences;
                bundle["tasks"] = ojson::array({tr.task});
                out.counterexample_json = bundle.dump(2);
            }
        }
    }

    ojson rep;
    rep["suite"] = config.suite;
    rep["seed"] = config.seed;
    rep["dims"] = ojson::array({config.dim_lo, config.dim_hi});
    rep["trials"] = config.trials;
    rep["checks"] = checks;
    rep["failures"] = out.failures;
    rep["first_failure"] = out.first_failure.empty() ? ojson() : ojson(out.first_failure);
    rep["counterexample"] = bundle.empty() ? ojson() : bundle;
    out.report_json = rep.dump(2);

    std::ostringstream text;
    text << "fuzz suite=" << config.suite << " dims=" << config.dim_lo << ".." << config.dim_hi
         << " trials=" << config.trials << " seed=" << config.seed << "\n";
    text << checks << " checks across " << out.trials_run << " trials, " << out.failures
         << " failing trials\n";
    if (!out.first_failure.empty()) text << "first failure: " << out.first_failure << "\n";
    out.text = text.str();
    return out;
}

namespace {

const char* kScalingUp = R"json({
  "name": "scaling-up",
  "spaces": {"H": 3},
  "objects": [
    {"name": "R", "kind": "matrix", "rows": 3, "cols": 3,
     "data": [1, 2, 0, 0, 1, 1, 1, 3, 1]}
  ],
  "sequences": [
    {"name": "seq", "kind": "scaled", "schedule": {"kind": "sqrt_n"}, "base": "R"}
  ],
  "tasks": [
    {"op": "nondecreasing_operator_limit", "sequence": "seq", "result": "T"},
    {"op": "dom_space", "of": "T", "result": "dom_T"},
    {"op": "kernel_space", "of": "R", "result": "ker_R"},
    {"op": "assert_equal", "a": "dom_T", "b": "ker_R"},
    {"op": "product_star", "of": "T", "result": "TstarT"},
    {"op": "kernel_range_product", "of": "R", "result": "closed_form"},
    {"op": "assert_equal", "a": "TstarT", "b": "closed_form"},
    {"op": "pipeline", "sequence": "seq", "result": "H_inf", "result_map": "S_r"},
    {"op": "assert_equal", "a": "H_inf", "b": "closed_form"}
  ]
})json";

const char* kScalingDown = R"json({
  "name": "scaling-down",
  "objects": [
    {"name": "A", "kind": "psd", "matrix": {"rows": 3, "cols": 3,
     "data": [2, 1, 0, 1, 2, 1, 0, 1, 2]}},
    {"name": "zero3", "kind": "matrix", "rows": 3, "cols": 3,
     "data": [0, 0, 0, 0, 0, 0, 0, 0, 0]}
  ],
  "sequences": [
    {"name": "seq", "kind": "scaled", "schedule": {"kind": "inv_n"}, "base": "A"}
  ],
  "tasks": [
    {"op": "monotone_psd_limit", "sequence": "seq", "direction": "nonincreasing", "result": "K_inf"},
    {"op": "dom_mul_product", "of": "A", "result": "closed_form"},
    {"op": "assert_equal", "a": "K_inf", "b": "closed_form"},
    {"op": "assert_equal", "a": "K_inf", "b": "zero3"}
  ]
})json";

const char* kTruncation = R"json({
  "name": "truncation",
  "objects": [
    {"name": "A", "kind": "psd", "matrix": {"rows": 3, "cols": 3,
     "data": [1, 0, 0, 0, 3, 0, 0, 0, 0]}},
    {"name": "step_one", "kind": "matrix", "rows": 3, "cols": 3,
     "data": [1, 0, 0, 0, 0, 0, 0, 0, 0]},
    {"name": "step_two", "kind": "matrix", "rows": 3, "cols": 3,
     "data": [1, 0, 0, 0, 0, 0, 0, 0, 0]},
    {"name": "step_three", "kind": "matrix", "rows": 3, "cols": 3,
     "data": [1, 0, 0, 0, 1.7320508075688772, 0, 0, 0, 0]}
  ],
  "tasks": [
    {"op": "sqrt_operator", "of": "A", "result": "abs_t"},
    {"op": "bounded_approximation", "of": "abs_t", "count": 1, "result": "t1"},
    {"op": "assert_equal", "a": "t1", "b": "step_one"},
    {"op": "bounded_approximation", "of": "abs_t", "count": 2, "result": "t2"},
    {"op": "assert_equal", "a": "t2", "b": "step_two"},
    {"op": "bounded_approximation", "of": "abs_t", "count": 3, "result": "t3"},
    {"op": "assert_equal", "a": "t3", "b": "step_three"}
  ]
})json";

const char* kPipeline = R"json({
  "name": "pipeline",
  "objects": [
    {"name": "T", "kind": "relation", "dim_h": 3, "dim_k": 3,
     "generators": {"rows": 6, "cols": 3,
      "data": [1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1]}},
    {"name": "e2", "kind": "matrix", "rows": 3, "cols": 1, "data": [0, 1, 0]},
    {"name": "H_expected", "kind": "relation", "dim_h": 3, "dim_k": 3,
     "generators": {"rows": 6, "cols": 3,
      "data": [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1]}}
  ],
  "sequences": [
    {"name": "seq", "kind": "scaled", "schedule": {"kind": "sqrt_n"}, "base": "T"}
  ],
  "tasks": [
    {"op": "pipeline", "sequence": "seq", "result": "H_inf", "result_map": "S_r"},
    {"op": "dom_space", "of": "S_r", "result": "dom_Sr"},
    {"op": "assert_equal", "a": "dom_Sr", "b": "e2"},
    {"op": "assert_equal", "a": "H_inf", "b": "H_expected"}
  ]
})json";

}  // namespace

std::vector<std::string> demo_names() {
    return {"scaling-up", "scaling-down", "truncation", "pipeline"};
}

std::string demo_scenario_text(const std::string& name) {
    if (name == "scaling-up") return kScalingUp;
    if (name == "scaling-down") return kScalingDown;
    if (name == "truncation") return kTruncation;
    if (name == "pipeline") return kPipeline;
    return "";
}

}  // namespace relcalc

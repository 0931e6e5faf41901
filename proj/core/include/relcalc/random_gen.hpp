#pragma once

#include "relcalc/limits.hpp"
#include "relcalc/relation.hpp"

#include <cstdint>
#include <random>
#include <vector>

// Seeded generators for the fuzzer and the randomized test suites. Two
// families on purpose: unconstrained Gaussian draws that hit every
// stratum (operators, multivalued, singular, rank-deficient), and
// spectrum-controlled draws whose forms stay well away from the snapping
// and blowup thresholds, for the limit engines where a near-threshold
// eigenvalue would turn a convergence statement into a coin flip.

namespace relcalc {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double gaussian() { return normal_(engine_); }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return std::uniform_int_distribution<int>(lo, hi)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

Matrix gaussian_matrix(int rows, int cols, Rng& rng);
Matrix random_orthogonal(int n, Rng& rng);
Subspace random_subspace(int ambient, int dim, Rng& rng);

// The reference fuzz draw: graph dimension uniform in 0..dim_h+dim_k,
// generators with independent standard normal entries.
LinearRelation random_relation(int dim_h, int dim_k, Rng& rng, const Tol& tol = {});

// Symmetric PSD with kernel_dim exact zeros and the rest of the spectrum
// uniform in [lo, hi].
Matrix random_psd_matrix(int n, int kernel_dim, double lo, double hi, Rng& rng);

// Operator on a random dom_dim-dimensional domain whose Gram form on that
// domain has rank nonzero eigenvalues exactly in [lo^2, hi^2] and
// dom_dim - rank exact zeros.
OperatorRelation structured_operator(int dim_h, int dim_k, int dom_dim, int rank, double lo, double hi,
                                     Rng& rng, const Tol& tol = {});

// PSD relation with a mul_dim-dimensional multivalued part and an
// operator part drawn like random_psd_matrix on the domain.
PsdRelation random_psd_relation(int n, int mul_dim, int kernel_dim, double lo, double hi, Rng& rng,
                                const Tol& tol = {});

// Relation whose regular part is a structured_operator draw and whose
// multivalued part is orthogonal to its range, so the regular Gram keeps
// the controlled spectrum exactly. Requires rank + mul_dim <= dim_k.
LinearRelation structured_relation(int dim_h, int dim_k, int dom_dim, int rank, int mul_dim, double lo,
                                   double hi, Rng& rng, const Tol& tol = {});

// Gaussian matrix rescaled to operator norm uniform in (0, 1].
Matrix random_contraction(int rows, int cols, Rng& rng);

struct DominatedPair {
    LinearRelation a;
    LinearRelation b;
};

// b random, c a random contraction, a spanned by the graph of c b plus a
// few extra Gaussian generators; a is contractively dominated by b by
// construction.
DominatedPair random_dominated_pair(int n, Rng& rng, const Tol& tol = {});

// Nondecreasing staircase (1 - 2^-k) * bound for k = 1..steps, each term
// dominated by the bound; stationary after the last term.
std::vector<LinearRelation> staircase_terms(const OperatorRelation& bound, int steps,
                                            const Tol& tol = {});

// Schedule with the requested asymptote sign (+1 growing, -1 decaying,
// 0 constant), drawn across the schedule kinds. With strong set, only
// exponents of magnitude >= 1 are drawn; sequences scaled by slower
// schedules (sqrt and friends) move too little per doubling for the
// resolvent loop to reach conv_eps within the cap, so engines that
// consume the schedule unsquared get the strong family.
Schedule random_schedule(int asymptote_sign, Rng& rng, bool strong = false);

}  // namespace relcalc

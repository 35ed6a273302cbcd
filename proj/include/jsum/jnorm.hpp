#pragma once

#include <vector>

#include "jsum/chain.hpp"

namespace jsum {

/// A nonempty strictly increasing index set S = {p_0 < ... < p_k} in {0..N},
/// the argument of sigma/rho and the certificate of a norm evaluation.
struct SubsetS {
    std::vector<int> indices;

    SubsetS() = default;
    explicit SubsetS(std::vector<int> idx);

    int min() const { return indices.front(); }
    int max() const { return indices.back(); }
    std::size_t size() const { return indices.size(); }

    /// Lexicographic order on the sorted index lists.
    bool lex_less(const SubsetS& other) const;
};

struct NormCertificate {
    double value = 0.0;       // the J-norm, 2^{-1/q} * rho_value
    SubsetS witness;          // subset attaining the sup
    double rho_value = 0.0;   // rho(x, witness)
};

/// A coordinate-wise functional f = (f_1..f_N) acting as
/// <f, y> = sum_n <f_n, y_n>, with a certified bound on its dual norm.
struct DualFunctional {
    ChainPtr chain;
    std::vector<Eigen::VectorXd> coords;    // coords[i] pairs with y_{i+1}
    SubsetS witness;                        // subset used in the construction
    double norm_bound = 1.0;                // certified |f|_{J*} <= norm_bound

    double apply(const JVector& y) const;
};

/// sigma(x, S) = (sum_i |phi_{p_{i-1}}^{p_i}(x_{p_{i-1}}) - x_{p_i}|^q)^{1/q};
/// zero when S is a singleton.
double sigma(const JVector& x, const SubsetS& S);

/// rho(x, S): sigma with the final term |x_{p_k}|^q added inside the root.
double rho(const JVector& x, const SubsetS& S);

/// Exact J-norm by exhaustive enumeration of all nonempty S in {0..N}.
/// Ties broken by lexicographically smallest witness. Refuses N beyond
/// `oracle_limit`.
NormCertificate jnorm_oracle(const JVector& x, int oracle_limit = 16);

/// J-norm by a longest-path dynamic program over the node set {0..N} with
/// edge weight |phi_p^r(x_p) - x_r|^q and terminal bonus |x_r|^q. O(N^2)
/// edge evaluations; witness recovered by backpointers.
NormCertificate jnorm(const JVector& x);

/// Supporting functional at a nonzero x: 2^{-1/q} times a subgradient of
/// rho(., S*) at x for the maximizing S* of the norm certificate. Satisfies
/// <f, x> = |x|_J; at q = 2 also |<f, y>| <= |y|_J for all y.
DualFunctional norming_functional(const JVector& x);

}  // namespace jsum

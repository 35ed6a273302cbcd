#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jsum/chain.hpp"
#include "jsum/estimates.hpp"

namespace jsum {

/// An ordered block decomposition of a host space l_p^D: disjoint
/// coordinate index sets covering {1..D}, with the suppression constant K
/// and the lower-2-estimate constant M. For built-in l_p with p <= 2 both
/// constants are 1.
struct DecompositionSpec {
    int D = 1;
    double p = 2.0;
    std::vector<std::vector<int>> blocks;   // 1-based host coordinate indices
    double K = 1.0;
    double M = 1.0;

    nlohmann::json to_json() const;
    static DecompositionSpec from_json(const nlohmann::json& j);
};

/// Chain with X_n spanned by blocks 1..n under the host norm and
/// inclusion matrices as connecting maps.
ChainPtr build_dense(const DecompositionSpec& spec);

struct LimitResult {
    Eigen::VectorXd value;  // host coordinates (natural 1..D order)
    bool kernel = false;    // true when the input had a zero tail
};

/// Truncated limit operator: the last block embedded in the host space.
/// Zero-tail inputs map to 0 and are flagged as kernel elements.
LimitResult limit_operator(const DecompositionSpec& spec, const JVector& x);

/// T(z) = (T_n(z))_n, the coordinate restrictions to blocks 1..n, as an
/// eventually-constant JVector on the dense chain.
JVector embed_T(const DecompositionSpec& spec, const ChainPtr& chain,
                const Eigen::VectorXd& z);

/// rho(T(z), S*)^2 <= (M+1) K^2 |z|^2 at the DP-maximizing S*. Refused
/// (throws) when p > 2: no lower 2-estimate backs the constant there.
CheckReport certify_embedding(const DecompositionSpec& spec, const ChainPtr& chain,
                              const Eigen::VectorXd& z);

/// Splitting identities on random samples: limit o embed = identity,
/// embed o limit idempotent, and embed o limit annihilates zero-tail
/// vectors with x_N = 0. With `with_certificate`, also the (M+1) K^2
/// bound per sample (refused for p > 2 via a failing report entry).
std::vector<CheckReport> check_splitting(const DecompositionSpec& spec, int samples,
                                         std::uint64_t seed,
                                         bool with_certificate = true);

}  // namespace jsum

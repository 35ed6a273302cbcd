#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jsum/chain.hpp"
#include "jsum/jnorm.hpp"

namespace jsum {

/// Finite-dimensional stand-in for a subspace M: a linearly independent
/// list of spanning vectors on a common chain.
struct SubspaceM {
    ChainPtr chain;
    std::vector<JVector> basis;
};

SubspaceM make_subspace(ChainPtr chain, std::vector<JVector> basis);

/// One extracted block: the selected index pair, the unit carrier from M,
/// the block z_k = T_k(x_k), its functional, and the measured margins.
struct BlockRecord {
    int n_k = 0;
    int n_next = 0;
    JVector carrier;            // x_k, unit J-norm, in M
    JVector block;              // z_k = T_k(x_k)
    std::optional<DualFunctional> functional;   // x*_k, <x*_k, z_k> = 1
    double q_norm = 0.0;        // |Q_{n_k}(x_k)|_J
    double prefix_defect = 0.0; // |P_{n_next - 1}(x_k) - x_k|_J
    double carrier_distance = 0.0;  // |z_k - x_k|_J
    double block_norm = 0.0;        // |z_k|_J
    double functional_bound = 0.0;  // certified |x*_k|
};

struct BlockSystem {
    ChainPtr chain;
    std::vector<BlockRecord> records;

    int count() const { return static_cast<int>(records.size()); }
    nlohmann::json to_json() const;
};

/// Raised when the greedy selection cannot meet a threshold; carries the
/// step, the best ratio achieved and the threshold that failed.
class extraction_error : public std::runtime_error {
public:
    extraction_error(int k, double achieved, double threshold, std::string which);
    int step() const { return k_; }
    double achieved() const { return achieved_; }
    double threshold() const { return threshold_; }

private:
    int k_;
    double achieved_, threshold_;
};

/// Heuristic search for a unit J-norm x in M with small |Q_n(x)|_J.
/// Initializes from the smallest singular direction of Q_n restricted to M
/// in Euclidean coordinates (compacting the support when an exact kernel
/// direction exists), then refines locally via the subgradient
/// linearization of both J-norms. No optimality claim.
std::pair<JVector, double> min_q_direction(const SubspaceM& M, int n);

struct ExtractionOptions {
    int k_max = 6;
    int n_start = 1;
    /// Threshold for step k; defaults to 2^{-k}/6.
    double eps(int k) const { return eps_scale * std::pow(2.0, -k); }
    double eps_scale = 1.0 / 6.0;
};

/// Greedy selection of indices n_1 < n_2 < ... and unit carriers x_k in M
/// with |Q_{n_k}(x_k)| and |P_{n_{k+1}-1}(x_k) - x_k| below the schedule,
/// with n_{k+1} > n_k + 1. Blocks z_k = T_k(x_k) are attached; functionals
/// are not. Throws extraction_error when a threshold is unreachable.
BlockSystem select_sequence(const SubspaceM& M, const ExtractionOptions& opts = {});

/// Attaches x*_k = norming_functional(z_k) / |z_k| so that <x*_k, z_k> = 1;
/// requires |z_k| > 5/6 for the 6/5 bound on |x*_k|.
void attach_functionals(BlockSystem& B);

/// Analysis coefficients (<x*_k, T_k(x)>)_k.
std::vector<double> analysis_operator(const BlockSystem& B, const JVector& x);

/// Synthesis sum alpha_k z_k; coefficient list may be shorter than the
/// block count but not longer.
JVector synthesis_operator(const BlockSystem& B, const std::vector<double>& alpha);

/// R = synthesis o analysis: the projection onto span{z_k}.
JVector projection_onto_Z(const BlockSystem& B, const JVector& x);

/// Perturbation operator K(x) = sum_k <u*_k, A_k(x)> (v_k - u_k), where
/// A_k is T_k in the block variant and the identity otherwise, together
/// with U = I + K and the smallness certificate.
struct PerturbationOperator {
    std::vector<JVector> u, v;
    std::vector<DualFunctional> functionals;
    /// T_k index pairs when the block variant is active.
    std::vector<std::pair<int, int>> block_spans;
    double smallness_sum = 0.0;     // sum |u*_k| (|T_k|) |u_k - v_k|

    JVector apply_K(const JVector& x) const;
    JVector apply_U(const JVector& x) const;   // x + K(x)
};

/// Theorem variant: pairs (z_k, x_k) from a complete block system, with
/// the factor |T_k| <= 2 included in the smallness sum. Throws when the
/// sum reaches 1.
PerturbationOperator small_perturbation(const BlockSystem& B);

/// General variant from explicit pairs (u_k, v_k) and biorthogonal
/// functionals u*_k; no T_k composition. Throws when the sum reaches 1.
PerturbationOperator small_perturbation(const std::vector<JVector>& u,
                                        const std::vector<JVector>& v,
                                        const std::vector<DualFunctional>& ustar);

}  // namespace jsum

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jsum/chain.hpp"
#include "jsum/jnorm.hpp"
#include "jsum/projections.hpp"

namespace jsum {

/// Deterministic random source shared by all randomized checks. The name
/// is recorded in report headers so results can be reproduced.
class Rng {
public:
    static constexpr const char* kName = "jsum-mt19937_64-boxmuller-v1";

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    double uniform();                 // [0, 1)
    double normal();                  // standard normal, Box-Muller
    int uniform_int(int lo, int hi);  // inclusive

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Gaussian JVector with independent standard normal coordinates.
JVector random_jvector(const ChainPtr& chain, Rng& rng);

struct CheckReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;   // rhs - lhs; pass iff margin >= -tol
    bool pass = true;
    std::string instance;  // seed / chain / parameter descriptor

    static CheckReport oriented(std::string name, double lhs, double rhs,
                                std::string instance = {});
};

struct SuiteReport {
    std::vector<CheckReport> checks;

    int total() const { return static_cast<int>(checks.size()); }
    int failures() const;
    std::map<std::string, double> worst_margins() const;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// rho(x, S) <= rho(x, {m} u (S n I)) for x supported in I and m < min I.
CheckReport check_interval_reduction(const JVector& x, const IntervalI& I, int m,
                                     const SubsetS& S);

/// Upper 2-estimate |sum x_j|^2 <= 3 sum |x_j|^2 for disjoint interval
/// supports. Requires q = 2.
CheckReport check_upper(const std::vector<JVector>& blocks,
                        const std::vector<IntervalI>& supports);

/// Lower 2-estimate 2 |sum x_j|^2 >= sum |x_j|^2 for skipped supports
/// (gap >= 2). Requires q = 2.
CheckReport check_lower(const std::vector<JVector>& blocks,
                        const std::vector<IntervalI>& supports);

/// rho(Q_alpha(x), S) <= rho(x, {alpha_p : p in S}).
CheckReport check_stepping(const JVector& x, const StepSequence& alpha,
                           const SubsetS& S);

/// 2 |sum x^i|^2 >= sum |x^i|^2 for x^k in R((I - P_{m_{k-1}}) Q_{m_k}),
/// m_0 = 0. Membership is verified by applying the projections.
CheckReport check_skipped_block_lemma(const std::vector<int>& m_seq,
                                      const std::vector<JVector>& xs);

/// Runs every check above plus the jnorm/projection invariants on seeded
/// random data. Failures are recorded, never thrown.
SuiteReport run_suite(const ChainPtr& chain, int trials, std::uint64_t seed);

}  // namespace jsum

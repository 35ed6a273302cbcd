#pragma once

#include <optional>
#include <vector>

#include "jsum/chain.hpp"

namespace jsum {

/// Closed interval of indices, possibly empty.
struct IntervalI {
    bool is_empty = true;
    int lo = 0, hi = -1;

    static IntervalI empty() { return IntervalI{}; }
    static IntervalI closed(int lo, int hi);
    bool contains(int n) const { return !is_empty && lo <= n && n <= hi; }
};

/// A Lambda-sequence alpha_0..alpha_N: nondecreasing with alpha_n <= n.
struct StepSequence {
    std::vector<int> alpha;     // alpha[n] for n in 0..N

    explicit StepSequence(std::vector<int> a);
    int at(int n) const { return alpha.at(static_cast<std::size_t>(n)); }
    int top() const { return alpha.back(); }
};

/// A subset A of {1..N}, inducing the step sequence
/// alpha_n = max(({0} u A) n [0, n]).
struct IndexSetA {
    std::vector<int> indices;   // sorted, distinct, in 1..N

    IndexSetA() = default;
    explicit IndexSetA(std::vector<int> idx, int N);
    StepSequence step_sequence(int N) const;
};

/// A <<< B: min B - max A >= 2.
bool skipped(const IntervalI& a, const IntervalI& b);

/// Interval projection: coordinates inside I preserved, others zeroed.
/// The tail is forced to zero whenever hi < N.
JVector p_interval(const JVector& x, const IntervalI& I);

/// P_n = P_{1..n}.
JVector p_prefix(const JVector& x, int n);

/// Stepping projection: output block n is phi_{alpha_n}^n(x_{alpha_n}).
JVector q_alpha(const JVector& x, const StepSequence& alpha);

/// Q_A = Q_{alpha_A}.
JVector q_set(const JVector& x, const IndexSetA& A);

/// Q_n = Q_{1..n}.
JVector q_prefix(const JVector& x, int n);

/// Skipped-block projection T_k for the index pair (n_k, n_next):
/// block m is x_m - phi_{n_k}^m(x_{n_k}) for n_k < m < n_next, zero
/// otherwise. Requires n_k < n_next - 1.
JVector t_block(const JVector& x, int n_k, int n_next);

}  // namespace jsum

#include "jsum/projections.hpp"

#include <algorithm>

namespace jsum {

IntervalI IntervalI::closed(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("interval with lo > hi");
    if (lo < 0) throw std::invalid_argument("interval with negative lo");
    IntervalI I;
    I.is_empty = false;
    I.lo = lo;
    I.hi = hi;
    return I;
}

StepSequence::StepSequence(std::vector<int> a) : alpha(std::move(a)) {
    if (alpha.empty()) throw std::invalid_argument("empty step sequence");
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        if (alpha[n] < 0 || alpha[n] > static_cast<int>(n))
            throw std::invalid_argument("step sequence violates alpha_n <= n");
        if (n > 0 && alpha[n] < alpha[n - 1])
            throw std::invalid_argument("step sequence must be nondecreasing");
    }
}

IndexSetA::IndexSetA(std::vector<int> idx, int N) : indices(std::move(idx)) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    for (int i : indices)
        if (i < 1 || i > N) throw std::out_of_range("index set element outside 1..N");
}

StepSequence IndexSetA::step_sequence(int N) const {
    std::vector<int> a(static_cast<std::size_t>(N) + 1, 0);
    std::size_t at = 0;
    int cur = 0;
    for (int n = 0; n <= N; ++n) {
        while (at < indices.size() && indices[at] <= n) cur = indices[at++];
        a[static_cast<std::size_t>(n)] = cur;
    }
    return StepSequence(std::move(a));
}

bool skipped(const IntervalI& a, const IntervalI& b) {
    if (a.is_empty || b.is_empty) return true;
    return b.lo - a.hi >= 2;
}

JVector p_interval(const JVector& x, const IntervalI& I) {
    const int N = x.chain->length();
    JVector y = zero_vector(x.chain, Tail::zero);
    for (int n = 1; n <= N; ++n)
        if (I.contains(n)) y.block(n) = x.block(n);
    if (!I.is_empty && I.hi >= N) y.tail = x.tail;
    return y;
}

JVector p_prefix(const JVector& x, int n) {
    if (n < 0 || n > x.chain->length())
        throw std::out_of_range("prefix index out of range");
    if (n == 0) return zero_vector(x.chain);
    return p_interval(x, IntervalI::closed(1, n));
}

JVector q_alpha(const JVector& x, const StepSequence& alpha) {
    const Chain& c = *x.chain;
    const int N = c.length();
    if (static_cast<int>(alpha.alpha.size()) != N + 1)
        throw std::invalid_argument("step sequence length must be N + 1");
    JVector y = zero_vector(x.chain, Tail::zero);
    for (int n = 1; n <= N; ++n) {
        const int a = alpha.at(n);
        if (a == 0) continue;
        y.block(n) = c.composite_apply(a, n, x.block(a));
    }
    // Beyond the truncation alpha stays at alpha_N, so the continuation
    // pushes one block forward; the result is eventually constant unless
    // alpha_N = N, in which case the input tail is preserved.
    y.tail = alpha.top() == N ? x.tail : Tail::eventually_constant;
    return y;
}

JVector q_set(const JVector& x, const IndexSetA& A) {
    return q_alpha(x, A.step_sequence(x.chain->length()));
}

JVector q_prefix(const JVector& x, int n) {
    const int N = x.chain->length();
    if (n < 0 || n > N) throw std::out_of_range("prefix index out of range");
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) idx[static_cast<std::size_t>(i - 1)] = i;
    return q_set(x, IndexSetA(std::move(idx), N));
}

JVector t_block(const JVector& x, int n_k, int n_next) {
    const Chain& c = *x.chain;
    const int N = c.length();
    if (n_k < 0 || n_next > N + 1 || n_k >= n_next - 1)
        throw std::invalid_argument("t_block requires 0 <= n_k < n_next - 1 <= N");
    JVector y = zero_vector(x.chain, Tail::zero);
    for (int m = n_k + 1; m < n_next && m <= N; ++m) {
        if (n_k == 0)
            y.block(m) = x.block(m);
        else
            y.block(m) = x.block(m) - c.composite_apply(n_k, m, x.block(n_k));
    }
    return y;
}

}  // namespace jsum

#include "jsum/jnorm.hpp"

#include <algorithm>
#include <cmath>

namespace jsum {

SubsetS::SubsetS(std::vector<int> idx) : indices(std::move(idx)) {
    if (indices.empty()) throw std::invalid_argument("subset must be nonempty");
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (indices[i] <= indices[i - 1])
            throw std::invalid_argument("subset indices must be strictly increasing");
    if (indices.front() < 0) throw std::invalid_argument("negative index in subset");
}

bool SubsetS::lex_less(const SubsetS& other) const {
    return std::lexicographical_compare(indices.begin(), indices.end(),
                                        other.indices.begin(), other.indices.end());
}

namespace {

void check_range(const JVector& x, const SubsetS& S) {
    if (S.indices.empty()) throw std::invalid_argument("empty subset");
    if (S.max() > x.chain->length())
        throw std::out_of_range("subset index beyond truncation");
}

/// |phi_p^r(x_p) - x_r| in the norm of X_r.
double increment_norm(const JVector& x, int p, int r) {
    const Chain& c = *x.chain;
    if (p == 0) return c.block_norm(r, x.block(r));
    return c.block_norm(r, c.composite_apply(p, r, x.block(p)) - x.block(r));
}

double block_norm_at(const JVector& x, int n) {
    return n == 0 ? 0.0 : x.chain->block_norm(n, x.block(n));
}

}  // namespace

double sigma(const JVector& x, const SubsetS& S) {
    check_range(x, S);
    const double q = x.chain->outer_exponent();
    double acc = 0.0;
    for (std::size_t i = 1; i < S.indices.size(); ++i)
        acc += std::pow(increment_norm(x, S.indices[i - 1], S.indices[i]), q);
    return std::pow(acc, 1.0 / q);
}

double rho(const JVector& x, const SubsetS& S) {
    check_range(x, S);
    const double q = x.chain->outer_exponent();
    double acc = std::pow(block_norm_at(x, S.max()), q);
    for (std::size_t i = 1; i < S.indices.size(); ++i)
        acc += std::pow(increment_norm(x, S.indices[i - 1], S.indices[i]), q);
    return std::pow(acc, 1.0 / q);
}

NormCertificate jnorm_oracle(const JVector& x, int oracle_limit) {
    const int N = x.chain->length();
    if (N > oracle_limit)
        throw std::invalid_argument("chain length " + std::to_string(N) +
                                    " beyond oracle limit " +
                                    std::to_string(oracle_limit));
    const double q = x.chain->outer_exponent();
    double best = -1.0;
    SubsetS best_S;
    const std::uint64_t total = (1ull << (N + 1));
    for (std::uint64_t mask = 1; mask < total; ++mask) {
        std::vector<int> idx;
        for (int i = 0; i <= N; ++i)
            if (mask & (1ull << i)) idx.push_back(i);
        SubsetS S(std::move(idx));
        const double r = rho(x, S);
        if (r > best + 1e-12) {
            best = r;
            best_S = S;
        } else if (r > best - 1e-12 && S.lex_less(best_S)) {
            best_S = S;
        }
    }
    NormCertificate cert;
    cert.rho_value = best;
    cert.witness = best_S;
    cert.value = std::pow(2.0, -1.0 / q) * best;
    return cert;
}

NormCertificate jnorm(const JVector& x) {
    const Chain& c = *x.chain;
    const int N = c.length();
    const double q = c.outer_exponent();

    // Edge weights w(p, r) = |phi_p^r(x_p) - x_r|^q, computed by pushing
    // each x_p forward incrementally along the maps.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(N + 1, N + 1);
    for (int r = 1; r <= N; ++r)
        w(0, r) = std::pow(c.block_norm(r, x.block(r)), q);
    for (int p = 1; p <= N - 1; ++p) {
        Eigen::VectorXd cur = x.block(p);
        for (int r = p + 1; r <= N; ++r) {
            cur = c.map(r - 1) * cur;
            w(p, r) = std::pow(c.block_norm(r, cur - x.block(r)), q);
        }
    }

    // Longest increasing path: best[r] = max(0, max_{p<r} best[p] + w(p, r)).
    std::vector<double> best(N + 1, 0.0);
    std::vector<int> back(N + 1, -1);
    for (int r = 1; r <= N; ++r) {
        for (int p = 0; p < r; ++p) {
            const double cand = best[p] + w(p, r);
            if (cand > best[r]) {
                best[r] = cand;
                back[r] = p;
            }
        }
    }
    double top = 0.0;
    int top_r = 0;
    for (int r = 0; r <= N; ++r) {
        const double val = best[r] + std::pow(block_norm_at(x, r), q);
        if (val > top) {
            top = val;
            top_r = r;
        }
    }
    std::vector<int> path;
    for (int r = top_r; r != -1; r = back[r]) path.push_back(r);
    std::reverse(path.begin(), path.end());

    NormCertificate cert;
    cert.rho_value = std::pow(top, 1.0 / q);
    cert.witness = SubsetS(std::move(path));
    cert.value = std::pow(2.0, -1.0 / q) * cert.rho_value;
    return cert;
}

double DualFunctional::apply(const JVector& y) const {
    if (coords.size() != y.blocks.size())
        throw std::invalid_argument("block count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < coords.size(); ++i)
        acc += coords[i].dot(y.blocks[i]);
    return acc;
}

DualFunctional norming_functional(const JVector& x) {
    const Chain& c = *x.chain;
    const double q = c.outer_exponent();
    NormCertificate cert = jnorm(x);
    if (cert.value <= 0.0)
        throw std::invalid_argument("norming functional of the zero vector");

    DualFunctional f;
    f.chain = x.chain;
    f.witness = cert.witness;
    f.norm_bound = 1.0;
    for (int n = 1; n <= c.length(); ++n)
        f.coords.push_back(Eigen::VectorXd::Zero(c.dim(n)));

    const double rho_val = cert.rho_value;
    const auto& S = cert.witness.indices;
    // Subgradient of rho(., S) at x, term by term. Each term contributes
    // through its lp norming vector weighted by (t / rho)^{q-1}.
    for (std::size_t i = 1; i < S.size(); ++i) {
        const int p = S[i - 1], r = S[i];
        const Eigen::VectorXd d =
            p == 0 ? Eigen::VectorXd(-x.block(r))
                   : Eigen::VectorXd(c.composite_apply(p, r, x.block(p)) - x.block(r));
        const double t = c.block_norm(r, d);
        if (t == 0.0) continue;
        const double coef = std::pow(t / rho_val, q - 1.0);
        const Eigen::VectorXd g = lp_norming_vector(d, c.space(r).p);
        f.coords[r - 1] -= coef * g;
        if (p >= 1) f.coords[p - 1] += coef * (c.composite_matrix(p, r).transpose() * g);
    }
    const int last = S.back();
    if (last >= 1) {
        const double t = c.block_norm(last, x.block(last));
        if (t > 0.0) {
            const double coef = std::pow(t / rho_val, q - 1.0);
            f.coords[last - 1] += coef * lp_norming_vector(x.block(last), c.space(last).p);
        }
    }
    const double scale = std::pow(2.0, -1.0 / q);
    for (auto& v : f.coords) v *= scale;
    return f;
}

}  // namespace jsum

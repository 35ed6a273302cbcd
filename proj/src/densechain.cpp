#include "jsum/densechain.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "jsum/jnorm.hpp"

namespace jsum {

namespace {

/// Host coordinates in block-concatenated order; position i holds the
/// 1-based host index.
std::vector<int> block_order(const DecompositionSpec& spec) {
    std::vector<int> order;
    std::vector<bool> seen(static_cast<std::size_t>(spec.D) + 1, false);
    for (const auto& blk : spec.blocks) {
        if (blk.empty()) throw std::invalid_argument("empty block in decomposition");
        for (int i : blk) {
            if (i < 1 || i > spec.D)
                throw std::invalid_argument("block index outside 1..D");
            if (seen[static_cast<std::size_t>(i)])
                throw std::invalid_argument("blocks overlap at coordinate " +
                                            std::to_string(i));
            seen[static_cast<std::size_t>(i)] = true;
            order.push_back(i);
        }
    }
    if (static_cast<int>(order.size()) != spec.D)
        throw std::invalid_argument("blocks do not cover {1..D}");
    return order;
}

void validate(const DecompositionSpec& spec) {
    if (spec.D < 1) throw std::invalid_argument("host dimension must be >= 1");
    if (!(spec.p >= 1.0) && !std::isinf(spec.p))
        throw std::invalid_argument("host exponent must be >= 1 or infinity");
    if (spec.K < 1.0 || spec.M < 1.0)
        throw std::invalid_argument("suppression and estimate constants must be >= 1");
    block_order(spec);
}

}  // namespace

nlohmann::json DecompositionSpec::to_json() const {
    return nlohmann::json{{"D", D}, {"p", p}, {"blocks", blocks}, {"K", K}, {"M", M}};
}

DecompositionSpec DecompositionSpec::from_json(const nlohmann::json& j) {
    DecompositionSpec s;
    s.D = j.at("D").get<int>();
    s.p = j.at("p").get<double>();
    s.blocks = j.at("blocks").get<std::vector<std::vector<int>>>();
    s.K = j.value("K", 1.0);
    s.M = j.value("M", 1.0);
    validate(s);
    return s;
}

ChainPtr build_dense(const DecompositionSpec& spec) {
    validate(spec);
    const int m = static_cast<int>(spec.blocks.size());
    std::vector<CoordinateSpace> spaces;
    std::vector<Eigen::MatrixXd> maps;
    int dim = 0;
    for (int n = 0; n < m; ++n) {
        const int prev = dim;
        dim += static_cast<int>(spec.blocks[static_cast<std::size_t>(n)].size());
        spaces.push_back(CoordinateSpace{dim, spec.p});
        if (n > 0) {
            Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(dim, prev);
            inc.topLeftCorner(prev, prev).setIdentity();
            maps.push_back(inc);
        }
    }
    return std::make_shared<Chain>(std::move(spaces), std::move(maps), 2.0,
                                   ValidationMode::asserted);
}

LimitResult limit_operator(const DecompositionSpec& spec, const JVector& x) {
    LimitResult res;
    res.value = Eigen::VectorXd::Zero(spec.D);
    if (x.tail == Tail::zero) {
        res.kernel = true;
        return res;
    }
    const auto order = block_order(spec);
    const int N = x.chain->length();
    const Eigen::VectorXd& last = x.block(N);
    if (last.size() != spec.D)
        throw std::invalid_argument("vector does not live on the full dense chain");
    for (int i = 0; i < spec.D; ++i)
        res.value(order[static_cast<std::size_t>(i)] - 1) = last(i);
    return res;
}

JVector embed_T(const DecompositionSpec& spec, const ChainPtr& chain,
                const Eigen::VectorXd& z) {
    if (z.size() != spec.D) throw std::invalid_argument("host vector has wrong size");
    const auto order = block_order(spec);
    JVector x = zero_vector(chain, Tail::eventually_constant);
    for (int n = 1; n <= chain->length(); ++n)
        for (int i = 0; i < chain->dim(n); ++i)
            x.block(n)(i) = z(order[static_cast<std::size_t>(i)] - 1);
    return x;
}

CheckReport certify_embedding(const DecompositionSpec& spec, const ChainPtr& chain,
                              const Eigen::VectorXd& z) {
    if (spec.p > 2.0)
        throw std::invalid_argument(
            "embedding certificate refused: host exponent above 2 admits no "
            "lower 2-estimate");
    const JVector tz = embed_T(spec, chain, z);
    const auto cert = jnorm(tz);
    const double lhs = cert.rho_value * cert.rho_value;
    const double rhs =
        (spec.M + 1.0) * spec.K * spec.K * std::pow(lp_norm(z, spec.p), 2.0);
    return CheckReport::oriented("embed_certificate", lhs, rhs);
}

std::vector<CheckReport> check_splitting(const DecompositionSpec& spec, int samples,
                                         std::uint64_t seed, bool with_certificate) {
    validate(spec);
    std::vector<CheckReport> out;
    const ChainPtr chain = build_dense(spec);
    const int N = chain->length();
    Rng rng(seed);

    const bool certify = with_certificate && spec.p <= 2.0;
    if (with_certificate && spec.p > 2.0) {
        CheckReport r;
        r.name = "embed_certificate";
        r.pass = false;
        r.margin = -1.0;
        r.instance = "refused: host exponent above 2 admits no lower 2-estimate";
        out.push_back(r);
    }

    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXd z(spec.D);
        for (int i = 0; i < spec.D; ++i) z(i) = rng.normal();
        const std::string tag = "seed=" + std::to_string(seed) +
                                ";sample=" + std::to_string(s);

        // limit o embed = identity on the host.
        const JVector tz = embed_T(spec, chain, z);
        const auto back = limit_operator(spec, tz);
        out.push_back(CheckReport::oriented(
            "limit_embed_identity", (back.value - z).cwiseAbs().maxCoeff(), 0.0, tag));

        // embed o limit is idempotent on eventually-constant vectors.
        JVector y = random_jvector(chain, rng);
        y.tail = Tail::eventually_constant;
        const JVector ts1 = embed_T(spec, chain, limit_operator(spec, y).value);
        const JVector ts2 = embed_T(spec, chain, limit_operator(spec, ts1).value);
        out.push_back(CheckReport::oriented(
            "embed_limit_idempotent",
            (to_coords(ts2) - to_coords(ts1)).cwiseAbs().maxCoeff(), 0.0, tag));

        // Zero-tail vectors are annihilated.
        JVector zt = random_jvector(chain, rng);
        zt.block(N).setZero();
        zt.tail = Tail::zero;
        const auto lim = limit_operator(spec, zt);
        out.push_back(CheckReport::oriented(
            "kernel_annihilation",
            lim.kernel ? lim.value.cwiseAbs().maxCoeff() : 1.0, 0.0, tag));

        if (certify) {
            out.push_back(certify_embedding(spec, chain, z));
            out.back().instance = tag;
        }
    }
    return out;
}

}  // namespace jsum

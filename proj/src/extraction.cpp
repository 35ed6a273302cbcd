#include "jsum/extraction.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jsum/projections.hpp"

namespace jsum {

namespace {

Eigen::MatrixXd coords_matrix(const std::vector<JVector>& vs) {
    if (vs.empty()) throw std::invalid_argument("empty vector list");
    const Eigen::Index total = to_coords(vs[0]).size();
    Eigen::MatrixXd B(total, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j) B.col(j) = to_coords(vs[j]);
    return B;
}

nlohmann::json jvector_json(const JVector& x) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : x.blocks) {
        nlohmann::json arr = nlohmann::json::array();
        for (Eigen::Index i = 0; i < b.size(); ++i) arr.push_back(b(i));
        blocks.push_back(arr);
    }
    return blocks;
}

}  // namespace

SubspaceM make_subspace(ChainPtr chain, std::vector<JVector> basis) {
    if (basis.empty()) throw std::invalid_argument("subspace needs a basis");
    const Eigen::MatrixXd B = coords_matrix(basis);
    const auto svd = B.jacobiSvd();
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) <= 1e-10 * std::max(1.0, s(0)))
        throw std::invalid_argument("subspace basis is not linearly independent");
    return SubspaceM{std::move(chain), std::move(basis)};
}

extraction_error::extraction_error(int k, double achieved, double threshold,
                                   std::string which)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "extraction failed at k=" << k << ": " << which << " "
             << achieved << " >= threshold " << threshold;
          return os.str();
      }()),
      k_(k), achieved_(achieved), threshold_(threshold) {}

std::pair<JVector, double> min_q_direction(const SubspaceM& M, int n) {
    if (M.basis.empty()) throw std::invalid_argument("trivial subspace");
    const ChainPtr chain = M.chain;
    const int N = chain->length();
    if (n < 0 || n > N) throw std::out_of_range("projection index out of range");
    const std::size_t r = M.basis.size();

    const Eigen::MatrixXd B = coords_matrix(M.basis);
    std::vector<JVector> qbasis;
    for (const auto& b : M.basis) qbasis.push_back(q_prefix(b, n));
    const Eigen::MatrixXd A = coords_matrix(qbasis);

    const auto svdB = B.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sB = svdB.singularValues();
    // Euclidean proxy: minimize |A c| over |B c| = 1 via c = V S^{-1} u.
    Eigen::MatrixXd G = A * svdB.matrixV();
    for (std::size_t j = 0; j < r; ++j) G.col(j) /= sB(static_cast<Eigen::Index>(j));
    const auto svdG = G.jacobiSvd(Eigen::ComputeThinV);
    const Eigen::VectorXd sG = svdG.singularValues();
    const double kernel_tol = 1e-10 * std::max(1.0, sG(0));

    Eigen::VectorXd coeff;  // basis coefficients of the candidate
    auto coeff_from_u = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd c = u;
        for (std::size_t j = 0; j < r; ++j) c(static_cast<Eigen::Index>(j)) /= sB(static_cast<Eigen::Index>(j));
        return Eigen::VectorXd(svdB.matrixV() * c);
    };

    int kernel_dim = 0;
    for (Eigen::Index i = 0; i < sG.size(); ++i)
        if (sG(i) <= kernel_tol) ++kernel_dim;

    if (kernel_dim > 0) {
        // Exact kernel directions exist. Among them, pick a combination with
        // the earliest possible support so that the prefix-tail threshold of
        // the selection loop can be met with a small n_next.
        Eigen::MatrixXd Ku(static_cast<Eigen::Index>(r), kernel_dim);
        for (int i = 0; i < kernel_dim; ++i)
            Ku.col(i) = svdG.matrixV().col(sG.size() - 1 - i);
        // x-coordinates of the kernel span; columns orthonormal.
        Eigen::MatrixXd Kx = svdB.matrixU() * Ku;

        Eigen::Index prefix = 0;
        Eigen::VectorXd chosen = Ku.col(0);
        for (int m = 1; m <= N; ++m) {
            prefix += chain->dim(m);
            const Eigen::Index tail_rows = Kx.rows() - prefix;
            if (tail_rows == 0) break;
            const Eigen::MatrixXd tail = Kx.bottomRows(tail_rows);
            const auto svdT = tail.jacobiSvd(Eigen::ComputeThinV);
            const Eigen::VectorXd sT = svdT.singularValues();
            if (sT(sT.size() - 1) <= 1e-10) {
                chosen = Ku * svdT.matrixV().col(sT.size() - 1);
                break;
            }
        }
        coeff = coeff_from_u(chosen);
    } else {
        coeff = coeff_from_u(svdG.matrixV().col(sG.size() - 1));
    }

    auto assemble = [&](const Eigen::VectorXd& c) {
        JVector x = from_coords(chain, B * c);
        const double nx = jnorm(x).value;
        if (nx > 0) x *= 1.0 / nx;
        return x;
    };
    auto ratio_of = [&](const JVector& x) { return jnorm(q_prefix(x, n)).value; };

    JVector x = assemble(coeff);
    double ratio = ratio_of(x);

    // Local refinement by subgradient linearization of both J-norms.
    if (ratio > 1e-12) {
        double step = 0.5;
        for (int it = 0; it < 60 && ratio > 1e-12 && step > 1e-8; ++it) {
            const auto qx = q_prefix(x, n);
            DualFunctional f_num = norming_functional(qx);
            DualFunctional f_den = norming_functional(x);
            Eigen::VectorXd grad(static_cast<Eigen::Index>(r));
            for (std::size_t j = 0; j < r; ++j)
                grad(static_cast<Eigen::Index>(j)) =
                    f_num.apply(qbasis[j]) - ratio * f_den.apply(M.basis[j]);
            const double gn = grad.norm();
            if (gn <= 1e-14) break;
            const Eigen::VectorXd trial = coeff - (step / gn) * grad;
            const JVector xt = assemble(trial);
            const double rt = ratio_of(xt);
            if (rt < ratio - 1e-15) {
                coeff = trial;
                x = xt;
                ratio = rt;
            } else {
                step *= 0.5;
            }
        }
    }
    return {x, ratio};
}

BlockSystem select_sequence(const SubspaceM& M, const ExtractionOptions& opts) {
    BlockSystem B;
    B.chain = M.chain;
    const int N = M.chain->length();
    int n_k = opts.n_start;
    for (int k = 1; k <= opts.k_max; ++k) {
        const double eps = opts.eps(k);
        if (n_k > N) throw extraction_error(k, 1.0, eps, "chain exhausted at n_k");
        auto [x, ratio] = min_q_direction(M, n_k);
        if (!(ratio < eps)) throw extraction_error(k, ratio, eps, "|Q_{n_k}(x_k)|");

        // Smallest n_{k+1} > n_k + 1 whose prefix captures x_k within eps.
        int n_next = -1;
        double defect = 0.0, best_defect = std::numeric_limits<double>::infinity();
        for (int cand = n_k + 2; cand <= N + 1; ++cand) {
            defect = jnorm(p_prefix(x, cand - 1) - x).value;
            best_defect = std::min(best_defect, defect);
            if (defect < eps) {
                n_next = cand;
                break;
            }
        }
        if (n_next < 0)
            throw extraction_error(k, best_defect, eps, "|P_{n_{k+1}-1}(x_k) - x_k|");

        BlockRecord rec;
        rec.n_k = n_k;
        rec.n_next = n_next;
        rec.carrier = x;
        rec.block = t_block(x, n_k, n_next);
        rec.q_norm = ratio;
        rec.prefix_defect = defect;
        rec.carrier_distance = jnorm(rec.block - x).value;
        rec.block_norm = jnorm(rec.block).value;
        B.records.push_back(std::move(rec));
        n_k = n_next;
    }
    return B;
}

void attach_functionals(BlockSystem& B) {
    for (auto& rec : B.records) {
        if (!(rec.block_norm > 5.0 / 6.0))
            throw std::invalid_argument("block norm " +
                                        std::to_string(rec.block_norm) +
                                        " not above 5/6; functional bound fails");
        DualFunctional f = norming_functional(rec.block);
        const double scale = 1.0 / f.apply(rec.block);
        for (auto& c : f.coords) c *= scale;
        f.norm_bound = (1.0 + 1e-9) / rec.block_norm;
        rec.functional_bound = f.norm_bound;
        rec.functional = std::move(f);
    }
}

std::vector<double> analysis_operator(const BlockSystem& B, const JVector& x) {
    std::vector<double> out;
    for (const auto& rec : B.records) {
        if (!rec.functional)
            throw std::invalid_argument("block system has no functionals attached");
        out.push_back(rec.functional->apply(t_block(x, rec.n_k, rec.n_next)));
    }
    return out;
}

JVector synthesis_operator(const BlockSystem& B, const std::vector<double>& alpha) {
    if (alpha.size() > B.records.size())
        throw std::invalid_argument("coefficient list longer than block count");
    JVector out = zero_vector(B.chain);
    for (std::size_t k = 0; k < alpha.size(); ++k)
        out += alpha[k] * JVector(B.records[k].block);
    return out;
}

JVector projection_onto_Z(const BlockSystem& B, const JVector& x) {
    return synthesis_operator(B, analysis_operator(B, x));
}

JVector PerturbationOperator::apply_K(const JVector& x) const {
    JVector out = zero_vector(x.chain);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const JVector arg = block_spans.empty()
                                ? x
                                : t_block(x, block_spans[k].first,
                                          block_spans[k].second);
        out += functionals[k].apply(arg) * (JVector(v[k]) - u[k]);
    }
    return out;
}

JVector PerturbationOperator::apply_U(const JVector& x) const {
    return JVector(x) + apply_K(x);
}

namespace {

PerturbationOperator build_perturbation(std::vector<JVector> u, std::vector<JVector> v,
                                        std::vector<DualFunctional> ustar,
                                        std::vector<std::pair<int, int>> spans,
                                        double block_factor) {
    if (u.size() != v.size() || u.size() != ustar.size())
        throw std::invalid_argument("pair/functional count mismatch");
    PerturbationOperator P;
    P.smallness_sum = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
        P.smallness_sum +=
            ustar[k].norm_bound * block_factor * jnorm(JVector(u[k]) - v[k]).value;
    if (!(P.smallness_sum < 1.0)) {
        std::ostringstream os;
        os << "smallness condition fails: sum " << P.smallness_sum << " >= 1";
        throw std::invalid_argument(os.str());
    }
    P.u = std::move(u);
    P.v = std::move(v);
    P.functionals = std::move(ustar);
    P.block_spans = std::move(spans);
    return P;
}

}  // namespace

PerturbationOperator small_perturbation(const BlockSystem& B) {
    std::vector<JVector> u, v;
    std::vector<DualFunctional> ustar;
    std::vector<std::pair<int, int>> spans;
    for (const auto& rec : B.records) {
        if (!rec.functional)
            throw std::invalid_argument("block system has no functionals attached");
        u.push_back(rec.block);
        v.push_back(rec.carrier);
        ustar.push_back(*rec.functional);
        spans.push_back({rec.n_k, rec.n_next});
    }
    // |T_k| <= 2 enters the smallness sum in the block variant.
    return build_perturbation(std::move(u), std::move(v), std::move(ustar),
                              std::move(spans), 2.0);
}

PerturbationOperator small_perturbation(const std::vector<JVector>& u,
                                        const std::vector<JVector>& v,
                                        const std::vector<DualFunctional>& ustar) {
    return build_perturbation(u, v, ustar, {}, 1.0);
}

nlohmann::json BlockSystem::to_json() const {
    nlohmann::json j;
    j["chain_hash"] = chain->hash();
    j["blocks"] = nlohmann::json::array();
    for (const auto& rec : records) {
        nlohmann::json r;
        r["n_k"] = rec.n_k;
        r["n_next"] = rec.n_next;
        r["carrier"] = jvector_json(rec.carrier);
        r["block"] = jvector_json(rec.block);
        r["margins"] = {{"q_norm", rec.q_norm},
                        {"prefix_defect", rec.prefix_defect},
                        {"carrier_distance", rec.carrier_distance},
                        {"block_norm", rec.block_norm},
                        {"functional_bound", rec.functional_bound}};
        j["blocks"].push_back(r);
    }
    return j;
}

}  // namespace jsum

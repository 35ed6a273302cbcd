#include "jsum/chain.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace jsum {

double lp_norm(const Eigen::VectorXd& v, double p) {
    if (v.size() == 0) return 0.0;
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

Eigen::VectorXd lp_norming_vector(const Eigen::VectorXd& v, double p) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
    const double nv = lp_norm(v, p);
    if (nv == 0.0) return g;
    if (std::isinf(p)) {
        Eigen::Index i0 = 0;
        v.cwiseAbs().maxCoeff(&i0);
        g(i0) = v(i0) > 0 ? 1.0 : -1.0;
        return g;
    }
    if (p == 1.0) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            g(i) = v(i) > 0 ? 1.0 : (v(i) < 0 ? -1.0 : 0.0);
        return g;
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) == 0.0) continue;
        g(i) = (v(i) > 0 ? 1.0 : -1.0) * std::pow(std::abs(v(i)) / nv, p - 1.0);
    }
    return g;
}

namespace {

void validate_space(const CoordinateSpace& s, int index) {
    if (s.dim < 1)
        throw std::invalid_argument("space " + std::to_string(index) +
                                    ": dim must be >= 1");
    if (!(s.p >= 1.0) && !std::isinf(s.p))
        throw std::invalid_argument("space " + std::to_string(index) +
                                    ": exponent must be >= 1 or infinity");
}

}  // namespace

Chain::Chain(std::vector<CoordinateSpace> spaces, std::vector<Eigen::MatrixXd> maps,
             double outer_exponent, ValidationMode mode)
    : spaces_(std::move(spaces)), maps_(std::move(maps)), q_(outer_exponent), mode_(mode) {
    const int N = length();
    if (N < 1) throw std::invalid_argument("chain needs at least one space");
    if (static_cast<int>(maps_.size()) != N - 1)
        throw std::invalid_argument("expected N-1 connecting maps");
    if (!(q_ > 1.0) || std::isinf(q_))
        throw std::invalid_argument("outer exponent must lie in (1, inf)");
    for (int i = 0; i < N; ++i) validate_space(spaces_[i], i + 1);
    for (int n = 1; n <= N - 1; ++n) {
        const Eigen::MatrixXd& m = maps_[n - 1];
        if (m.rows() != spaces_[n].dim || m.cols() != spaces_[n - 1].dim) {
            std::ostringstream os;
            os << "map " << n << " has shape " << m.rows() << "x" << m.cols()
               << ", expected " << spaces_[n].dim << "x" << spaces_[n - 1].dim;
            throw std::invalid_argument(os.str());
        }
        if (mode_ == ValidationMode::spectral) {
            if (spaces_[n - 1].p != 2.0 || spaces_[n].p != 2.0)
                throw std::invalid_argument(
                    "spectral validation requires Euclidean endpoints at map " +
                    std::to_string(n));
            const double s = m.jacobiSvd().singularValues().size() > 0
                                 ? m.jacobiSvd().singularValues()(0)
                                 : 0.0;
            if (s > 1.0 + 1e-12) {
                std::ostringstream os;
                os << "map " << n << " is not a contraction: operator norm " << s;
                throw std::invalid_argument(os.str());
            }
        }
    }
}

int Chain::dim(int n) const {
    if (n < 0 || n > length()) throw std::out_of_range("space index out of range");
    return n == 0 ? 0 : spaces_[n - 1].dim;
}

const CoordinateSpace& Chain::space(int n) const {
    if (n < 1 || n > length()) throw std::out_of_range("space index out of range");
    return spaces_[n - 1];
}

const Eigen::MatrixXd& Chain::map(int n) const {
    if (n < 1 || n > length() - 1) throw std::out_of_range("map index out of range");
    return maps_[n - 1];
}

Eigen::VectorXd Chain::composite_apply(int n, int m, const Eigen::VectorXd& v) const {
    if (n < 0 || m < n || m > length())
        throw std::out_of_range("composite indices out of range");
    if (n == 0) return Eigen::VectorXd::Zero(dim(m));
    if (v.size() != dim(n)) throw std::invalid_argument("dimension mismatch");
    Eigen::VectorXd cur = v;
    for (int i = n; i < m; ++i) cur = map(i) * cur;
    return cur;
}

Eigen::MatrixXd Chain::composite_matrix(int n, int m) const {
    if (n < 1 || m < n || m > length())
        throw std::out_of_range("composite indices out of range");
    Eigen::MatrixXd cur = Eigen::MatrixXd::Identity(dim(n), dim(n));
    for (int i = n; i < m; ++i) cur = map(i) * cur;
    return cur;
}

double Chain::block_norm(int n, const Eigen::VectorXd& v) const {
    if (n == 0) return 0.0;
    if (v.size() != dim(n)) throw std::invalid_argument("dimension mismatch");
    return lp_norm(v, space(n).p);
}

nlohmann::json Chain::to_json() const {
    nlohmann::json j;
    j["N"] = length();
    j["spaces"] = nlohmann::json::array();
    for (const auto& s : spaces_) {
        nlohmann::json js;
        js["dim"] = s.dim;
        if (std::isinf(s.p))
            js["p"] = "inf";
        else
            js["p"] = s.p;
        j["spaces"].push_back(js);
    }
    j["maps"] = nlohmann::json::array();
    for (const auto& m : maps_) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            rows.push_back(row);
        }
        j["maps"].push_back(rows);
    }
    j["q"] = q_;
    j["validation"] = mode_ == ValidationMode::spectral ? "spectral" : "asserted";
    return j;
}

ChainPtr Chain::from_json(const nlohmann::json& j) {
    ChainSpec spec;
    spec.N = j.at("N").get<int>();
    for (const auto& js : j.at("spaces")) {
        CoordinateSpace s;
        s.dim = js.at("dim").get<int>();
        const auto& jp = js.at("p");
        s.p = jp.is_string() ? std::numeric_limits<double>::infinity()
                             : jp.get<double>();
        spec.spaces.push_back(s);
    }
    if (j.contains("maps")) {
        for (const auto& jm : j.at("maps")) {
            const int rows = static_cast<int>(jm.size());
            const int cols = rows > 0 ? static_cast<int>(jm.at(0).size()) : 0;
            Eigen::MatrixXd m(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) m(r, c) = jm.at(r).at(c).get<double>();
            spec.maps.push_back(m);
        }
    }
    spec.q = j.value("q", 2.0);
    spec.validation = j.value("validation", std::string("spectral")) == "asserted"
                          ? ValidationMode::asserted
                          : ValidationMode::spectral;
    return build_chain(spec);
}

std::uint64_t Chain::hash() const {
    const std::string s = to_json().dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

JVector& JVector::operator+=(const JVector& other) {
    if (blocks.size() != other.blocks.size())
        throw std::invalid_argument("block count mismatch");
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += other.blocks[i];
    if (other.tail == Tail::eventually_constant) tail = Tail::eventually_constant;
    return *this;
}

JVector& JVector::operator-=(const JVector& other) {
    if (blocks.size() != other.blocks.size())
        throw std::invalid_argument("block count mismatch");
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= other.blocks[i];
    if (other.tail == Tail::eventually_constant) tail = Tail::eventually_constant;
    return *this;
}

JVector& JVector::operator*=(double s) {
    for (auto& b : blocks) b *= s;
    return *this;
}

JVector zero_vector(const ChainPtr& chain, Tail tail) {
    JVector x;
    x.chain = chain;
    x.tail = tail;
    for (int n = 1; n <= chain->length(); ++n)
        x.blocks.push_back(Eigen::VectorXd::Zero(chain->dim(n)));
    return x;
}

JVector coordinate_embed(const ChainPtr& chain, int m, const Eigen::VectorXd& v) {
    JVector x = zero_vector(chain);
    if (v.size() != chain->dim(m)) throw std::invalid_argument("dimension mismatch");
    x.block(m) = v;
    return x;
}

JVector make_jvector(const ChainPtr& chain, std::vector<Eigen::VectorXd> blocks,
                     Tail tail) {
    if (static_cast<int>(blocks.size()) != chain->length())
        throw std::invalid_argument("expected one block per space");
    for (int n = 1; n <= chain->length(); ++n)
        if (blocks[n - 1].size() != chain->dim(n))
            throw std::invalid_argument("block " + std::to_string(n) +
                                        " has wrong dimension");
    JVector x;
    x.chain = chain;
    x.blocks = std::move(blocks);
    x.tail = tail;
    return x;
}

Eigen::VectorXd to_coords(const JVector& x) {
    Eigen::Index total = 0;
    for (const auto& b : x.blocks) total += b.size();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& b : x.blocks) {
        out.segment(at, b.size()) = b;
        at += b.size();
    }
    return out;
}

JVector from_coords(const ChainPtr& chain, const Eigen::VectorXd& coords, Tail tail) {
    JVector x = zero_vector(chain, tail);
    Eigen::Index at = 0;
    for (auto& b : x.blocks) {
        if (at + b.size() > coords.size())
            throw std::invalid_argument("coordinate vector too short");
        b = coords.segment(at, b.size());
        at += b.size();
    }
    if (at != coords.size())
        throw std::invalid_argument("coordinate vector length mismatch");
    return x;
}

ChainPtr build_chain(const ChainSpec& spec) {
    if (static_cast<int>(spec.spaces.size()) != spec.N)
        throw std::invalid_argument("N does not match number of spaces");
    return std::make_shared<Chain>(spec.spaces, spec.maps, spec.q, spec.validation);
}

ChainPtr james_chain(int N, double q) {
    std::vector<CoordinateSpace> spaces(static_cast<std::size_t>(N),
                                        CoordinateSpace{1, 2.0});
    std::vector<Eigen::MatrixXd> maps(static_cast<std::size_t>(N > 0 ? N - 1 : 0),
                                      Eigen::MatrixXd::Identity(1, 1));
    return std::make_shared<Chain>(std::move(spaces), std::move(maps), q,
                                   ValidationMode::spectral);
}

ChainPtr lpn_chain(const std::vector<double>& ps, int dims, double q) {
    if (ps.empty()) throw std::invalid_argument("empty exponent sequence");
    if (dims < 1) throw std::invalid_argument("dims must be >= 1");
    for (std::size_t i = 1; i < ps.size(); ++i)
        if (ps[i] < ps[i - 1])
            throw std::invalid_argument("exponent sequence must be nondecreasing");
    std::vector<CoordinateSpace> spaces;
    for (double p : ps) spaces.push_back(CoordinateSpace{dims, p});
    // Formal identity l_{p_n} -> l_{p_{n+1}}; contractive since p_{n+1} >= p_n.
    std::vector<Eigen::MatrixXd> maps(ps.size() - 1,
                                      Eigen::MatrixXd::Identity(dims, dims));
    return std::make_shared<Chain>(std::move(spaces), std::move(maps), q,
                                   ValidationMode::asserted);
}

ChainPtr random_chain(std::uint64_t seed, int N, int max_dim, double q) {
    if (N < 1 || max_dim < 1) throw std::invalid_argument("invalid random chain size");
    std::mt19937_64 eng(seed);
    auto uniform_int = [&](int lo, int hi) {
        return lo + static_cast<int>(eng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    auto normal = [&]() {
        // Box-Muller from raw 64-bit draws; deterministic across platforms.
        const double u1 =
            (static_cast<double>(eng() >> 11) + 0.5) / 9007199254740992.0;
        const double u2 = static_cast<double>(eng() >> 11) / 9007199254740992.0;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    std::vector<CoordinateSpace> spaces;
    for (int n = 0; n < N; ++n)
        spaces.push_back(CoordinateSpace{uniform_int(1, max_dim), 2.0});
    std::vector<Eigen::MatrixXd> maps;
    for (int n = 0; n + 1 < N; ++n) {
        Eigen::MatrixXd m(spaces[n + 1].dim, spaces[n].dim);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = normal();
        const double s = m.jacobiSvd().singularValues()(0);
        if (s > 0) m /= s * 1.01;
        maps.push_back(m);
    }
    return std::make_shared<Chain>(std::move(spaces), std::move(maps), q,
                                   ValidationMode::spectral);
}

double omega_seminorm(const JVector& x) {
    if (x.tail != Tail::eventually_constant)
        throw std::invalid_argument("omega seminorm requires an eventually-constant tail");
    const int N = x.chain->length();
    return x.chain->block_norm(N, x.block(N));
}

std::pair<ChainPtr, JVector> extend_chain(const JVector& x, int extra) {
    if (extra < 0) throw std::invalid_argument("extra must be >= 0");
    const Chain& c = *x.chain;
    const int N = c.length();
    std::vector<CoordinateSpace> spaces;
    std::vector<Eigen::MatrixXd> maps;
    for (int n = 1; n <= N; ++n) spaces.push_back(c.space(n));
    for (int n = 1; n <= N - 1; ++n) maps.push_back(c.map(n));
    for (int i = 0; i < extra; ++i) {
        spaces.push_back(c.space(N));
        maps.push_back(Eigen::MatrixXd::Identity(c.dim(N), c.dim(N)));
    }
    auto ext = std::make_shared<Chain>(std::move(spaces), std::move(maps),
                                       c.outer_exponent(), ValidationMode::asserted);
    JVector y = zero_vector(ext, x.tail);
    for (int n = 1; n <= N; ++n) y.block(n) = x.block(n);
    for (int n = N + 1; n <= N + extra; ++n) y.block(n) = x.block(N);
    return {ext, y};
}

}  // namespace jsum

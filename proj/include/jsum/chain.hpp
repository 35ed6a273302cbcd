#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace jsum {

/// lp norm of a coordinate vector; p may be infinity.
double lp_norm(const Eigen::VectorXd& v, double p);

/// Norming functional of v under the lp norm: a dual vector g with
/// <g, v> = |v|_p and dual norm 1. Deterministic selection at the
/// non-smooth exponents: sign vector for p = 1 (zero on zero coordinates),
/// unit mass on the first maximal coordinate for p = infinity.
/// Returns the zero vector when v = 0.
Eigen::VectorXd lp_norming_vector(const Eigen::VectorXd& v, double p);

struct CoordinateSpace {
    int dim = 1;        // >= 1
    double p = 2.0;     // norm exponent, >= 1 or infinity
};

enum class ValidationMode { spectral, asserted };
enum class Tail { zero, eventually_constant };

/// A finite truncated system (X_1..X_N, phi_1..phi_{N-1}) of coordinate
/// spaces and contractive connecting maps. X_0 is the trivial space of
/// dimension 0 and is represented implicitly. Immutable after construction.
class Chain {
public:
    Chain(std::vector<CoordinateSpace> spaces,
          std::vector<Eigen::MatrixXd> maps,
          double outer_exponent = 2.0,
          ValidationMode mode = ValidationMode::spectral);

    int length() const { return static_cast<int>(spaces_.size()); }

    /// dim(X_n) for n in 0..N; dim(X_0) = 0.
    int dim(int n) const;

    /// X_n for n in 1..N.
    const CoordinateSpace& space(int n) const;

    /// phi_n : X_n -> X_{n+1}, for n in 1..N-1.
    const Eigen::MatrixXd& map(int n) const;

    double outer_exponent() const { return q_; }
    ValidationMode validation_mode() const { return mode_; }

    /// phi_n^m(v) for 0 <= n <= m <= N; identity when n = m, zero when n = 0.
    Eigen::VectorXd composite_apply(int n, int m, const Eigen::VectorXd& v) const;

    /// Dense matrix of phi_n^m, shape dim(X_m) x dim(X_n). Requires n >= 1.
    Eigen::MatrixXd composite_matrix(int n, int m) const;

    /// |v| in the norm of X_n.
    double block_norm(int n, const Eigen::VectorXd& v) const;

    nlohmann::json to_json() const;
    static std::shared_ptr<const Chain> from_json(const nlohmann::json& j);

    /// FNV-1a hash of the serialized chain, for report headers.
    std::uint64_t hash() const;

private:
    std::vector<CoordinateSpace> spaces_;   // spaces_[i] = X_{i+1}
    std::vector<Eigen::MatrixXd> maps_;     // maps_[i] = phi_{i+1}
    double q_;
    ValidationMode mode_;
};

using ChainPtr = std::shared_ptr<const Chain>;

/// An element of the truncated product: blocks x_1..x_N plus a tail
/// convention. Zero tail models finitely supported elements; the
/// eventually-constant tail models sequences generated beyond N by
/// pushing x_N forward along the maps.
struct JVector {
    ChainPtr chain;
    std::vector<Eigen::VectorXd> blocks;    // blocks[i] = x_{i+1}
    Tail tail = Tail::zero;

    const Eigen::VectorXd& block(int n) const { return blocks.at(n - 1); }
    Eigen::VectorXd& block(int n) { return blocks.at(n - 1); }

    JVector& operator+=(const JVector& other);
    JVector& operator-=(const JVector& other);
    JVector& operator*=(double s);
    friend JVector operator+(JVector a, const JVector& b) { return a += b; }
    friend JVector operator-(JVector a, const JVector& b) { return a -= b; }
    friend JVector operator*(double s, JVector a) { return a *= s; }
};

/// Zero vector on the chain.
JVector zero_vector(const ChainPtr& chain, Tail tail = Tail::zero);

/// v placed in block m, zero elsewhere.
JVector coordinate_embed(const ChainPtr& chain, int m, const Eigen::VectorXd& v);

JVector make_jvector(const ChainPtr& chain, std::vector<Eigen::VectorXd> blocks,
                     Tail tail = Tail::zero);

/// Flatten the blocks into a single coordinate vector of length
/// dim(X_1)+...+dim(X_N), and back.
Eigen::VectorXd to_coords(const JVector& x);
JVector from_coords(const ChainPtr& chain, const Eigen::VectorXd& coords,
                    Tail tail = Tail::zero);

struct ChainSpec {
    int N = 1;
    std::vector<CoordinateSpace> spaces;
    std::vector<Eigen::MatrixXd> maps;
    double q = 2.0;
    ValidationMode validation = ValidationMode::spectral;
};

ChainPtr build_chain(const ChainSpec& spec);

/// Scalar chain of length N with identity maps (the classical James space
/// at truncation).
ChainPtr james_chain(int N, double q = 2.0);

/// X_n = l_{p_n}^{dims} with the formal identity as connecting map;
/// requires a nondecreasing exponent sequence.
ChainPtr lpn_chain(const std::vector<double>& ps, int dims, double q = 2.0);

/// Deterministic random chain: Euclidean blocks of dimension 1..max_dim,
/// Gaussian maps rescaled below operator norm 1.
ChainPtr random_chain(std::uint64_t seed, int N, int max_dim, double q = 2.0);

/// Omega-seminorm representative at truncation: |x_N|_N. Requires an
/// eventually-constant tail; the reported value is the N-th term of a
/// nonincreasing sequence, not a certified limit.
double omega_seminorm(const JVector& x);

/// Append `extra` copies of the last space with identity maps and extend
/// an eventually-constant vector by pushing x_N forward. Used by the
/// truncation-stability checks.
std::pair<ChainPtr, JVector> extend_chain(const JVector& x, int extra);

}  // namespace jsum

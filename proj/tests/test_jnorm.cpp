#include "doctest.h"

#include <cmath>
#include <random>

#include "jsum/jnorm.hpp"
#include "jsum/projections.hpp"

using namespace jsum;

namespace {

Eigen::VectorXd scalar(double v) {
    Eigen::VectorXd x(1);
    x(0) = v;
    return x;
}

JVector scalar_vec(const ChainPtr& c, const std::vector<double>& vals,
                   Tail tail = Tail::zero) {
    std::vector<Eigen::VectorXd> blocks;
    for (double v : vals) blocks.push_back(scalar(v));
    return make_jvector(c, std::move(blocks), tail);
}

JVector random_jvector(const ChainPtr& c, std::mt19937_64& eng) {
    JVector x = zero_vector(c);
    for (auto& b : x.blocks)
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b(i) = static_cast<double>(eng() % 20001) / 10000.0 - 1.0;
    return x;
}

}  // namespace

TEST_CASE("sigma basics") {
    auto james = james_chain(2);
    auto x = scalar_vec(james, {1.0, -1.0});

    CHECK(sigma(x, SubsetS({1})) == 0.0);
    CHECK(sigma(zero_vector(james), SubsetS({0, 1, 2})) == 0.0);
    // Increments 1 and 2 along {0,1,2}.
    CHECK(sigma(x, SubsetS({0, 1, 2})) == doctest::Approx(std::sqrt(5.0)));
    // rho^2 = sigma^2 + |x_2|^2.
    CHECK(rho(x, SubsetS({0, 1, 2})) == doctest::Approx(std::sqrt(6.0)));
}

TEST_CASE("rho basics") {
    auto james = james_chain(2);
    auto e1 = coordinate_embed(james, 1, scalar(1.0));
    CHECK(rho(e1, SubsetS({0, 1})) == doctest::Approx(std::sqrt(2.0)));

    auto x = scalar_vec(james, {1.0, -1.0});
    CHECK(rho(x, SubsetS({2})) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rho(x, SubsetS({0, 3})), std::out_of_range);
}

TEST_CASE("oracle on hand-checked james vectors") {
    auto j2 = james_chain(2);
    auto e1 = coordinate_embed(j2, 1, scalar(1.0));
    auto cert = jnorm_oracle(e1);
    CHECK(cert.value == doctest::Approx(1.0));
    CHECK(cert.witness.indices == std::vector<int>{0, 1});

    auto j3 = james_chain(3);
    CHECK(jnorm_oracle(scalar_vec(j3, {1, 1, 0})).value == doctest::Approx(1.0));
    auto c2 = jnorm_oracle(scalar_vec(j3, {1, 0, 1}));
    CHECK(c2.value == doctest::Approx(std::sqrt(2.0)));
    CHECK(c2.witness.indices == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("oracle refuses long chains") {
    auto j = james_chain(20);
    CHECK_THROWS_AS(jnorm_oracle(zero_vector(j)), std::invalid_argument);
}

TEST_CASE("dynamic program matches hand values") {
    auto j2 = james_chain(2);
    auto cert = jnorm(scalar_vec(j2, {1.0, -1.0}));
    CHECK(cert.value == doctest::Approx(std::sqrt(3.0)));
    CHECK(cert.witness.indices == std::vector<int>{0, 1, 2});
    CHECK(rho(scalar_vec(j2, {1.0, -1.0}), cert.witness) ==
          doctest::Approx(cert.rho_value));

    CHECK(jnorm(zero_vector(j2)).value == 0.0);
}

TEST_CASE("dynamic program agrees with the oracle on random instances") {
    std::mt19937_64 eng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const int N = 2 + static_cast<int>(eng() % 6);
        auto c = random_chain(eng(), N, 3);
        auto x = random_jvector(c, eng);
        const auto dp = jnorm(x);
        const auto oracle = jnorm_oracle(x);
        CHECK(std::abs(dp.value - oracle.value) <=
              1e-9 * std::max(1.0, oracle.value));
    }
}

TEST_CASE("single-block vectors embed isometrically") {
    std::mt19937_64 eng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int N = 2 + static_cast<int>(eng() % 5);
        auto c = random_chain(eng(), N, 3);
        const int m = 1 + static_cast<int>(eng() % N);
        Eigen::VectorXd v(c->dim(m));
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v(i) = static_cast<double>(eng() % 2001) / 1000.0 - 1.0;
        auto x = coordinate_embed(c, m, v);
        CHECK(jnorm(x).value == doctest::Approx(v.norm()).epsilon(1e-12));
    }
}

TEST_CASE("prefix norms are nondecreasing and reach the full norm") {
    std::mt19937_64 eng(13);
    for (int trial = 0; trial < 20; ++trial) {
        auto c = random_chain(eng(), 6, 3);
        auto x = random_jvector(c, eng);
        double prev = 0.0;
        for (int n = 1; n <= 6; ++n) {
            const double cur = jnorm(p_prefix(x, n)).value;
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
        CHECK(prev == doctest::Approx(jnorm(x).value).epsilon(1e-12));
    }
}

TEST_CASE("truncation stability for eventually-constant tails") {
    std::mt19937_64 eng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto c = random_chain(eng(), 5, 3);
        auto x = random_jvector(c, eng);
        x.tail = Tail::eventually_constant;
        auto [ext, y] = extend_chain(x, 5);
        CHECK(std::abs(jnorm(y).value - jnorm(x).value) <= 1e-12);
    }
}

TEST_CASE("sigma additivity across touching and ordered subsets") {
    std::mt19937_64 eng(31);
    auto c = random_chain(3, 5, 2);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_jvector(c, eng);
        // All split points of subsets of {0..5}: exhaustive over pairs.
        for (std::uint32_t mask = 1; mask < (1u << 6); ++mask) {
            std::vector<int> idx;
            for (int i = 0; i < 6; ++i)
                if (mask & (1u << i)) idx.push_back(i);
            if (idx.size() < 3) continue;
            // Split at an interior element: max S = min T.
            const std::size_t cut = idx.size() / 2;
            SubsetS whole(idx);
            SubsetS S(std::vector<int>(idx.begin(), idx.begin() + cut + 1));
            SubsetS T(std::vector<int>(idx.begin() + cut, idx.end()));
            const double lhs = sigma(x, whole) * sigma(x, whole);
            const double rhs = sigma(x, S) * sigma(x, S) + sigma(x, T) * sigma(x, T);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            CHECK(sigma(x, whole) <= rho(x, whole));
        }
    }
}

TEST_CASE("sigma superadditivity for separated subsets") {
    std::mt19937_64 eng(37);
    auto c = random_chain(5, 6, 2);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = random_jvector(c, eng);
        SubsetS S({0, 1, 2});
        SubsetS T({4, 5, 6});
        SubsetS both({0, 1, 2, 4, 5, 6});
        CHECK(sigma(x, both) * sigma(x, both) + 1e-12 >=
              sigma(x, S) * sigma(x, S) + sigma(x, T) * sigma(x, T));
    }
}

TEST_CASE("norming functional on hand-checked vectors") {
    auto j2 = james_chain(2);
    auto e1 = coordinate_embed(j2, 1, scalar(1.0));
    auto f = norming_functional(e1);
    CHECK(f.apply(e1) == doctest::Approx(1.0));
    CHECK(f.coords[0](0) == doctest::Approx(1.0));

    auto x = scalar_vec(j2, {1.0, -1.0});
    auto g = norming_functional(x);
    CHECK(g.apply(x) == doctest::Approx(std::sqrt(3.0)));
    CHECK(g.coords[0](0) == doctest::Approx(std::sqrt(3.0) / 2.0));
    CHECK(g.coords[1](0) == doctest::Approx(-std::sqrt(3.0) / 2.0));

    CHECK_THROWS_AS(norming_functional(zero_vector(j2)), std::invalid_argument);
}

TEST_CASE("norming functional is homogeneous in its argument") {
    auto j3 = james_chain(3);
    auto x = scalar_vec(j3, {1.0, -0.5, 2.0});
    auto f1 = norming_functional(x);
    auto f2 = norming_functional(2.0 * x);
    std::mt19937_64 eng(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto y = random_jvector(j3, eng);
        CHECK(f1.apply(y) == doctest::Approx(f2.apply(y)).epsilon(1e-12));
    }
}

TEST_CASE("norming functional attains the norm and respects the dual bound") {
    std::mt19937_64 eng(47);
    for (int trial = 0; trial < 20; ++trial) {
        auto c = random_chain(eng(), 5, 3);
        auto x = random_jvector(c, eng);
        const double nx = jnorm(x).value;
        if (nx < 1e-9) continue;
        auto f = norming_functional(x);
        CHECK(f.apply(x) == doctest::Approx(nx).epsilon(1e-9));
        for (int s = 0; s < 1000 / 20; ++s) {
            auto y = random_jvector(c, eng);
            CHECK(std::abs(f.apply(y)) <= (1.0 + 1e-9) * jnorm(y).value + 1e-12);
        }
    }
}

TEST_CASE("general outer exponent keeps oracle/DP agreement") {
    std::mt19937_64 eng(53);
    for (double q : {1.5, 3.0}) {
        for (int trial = 0; trial < 30; ++trial) {
            auto c = random_chain(eng(), 4, 2, q);
            auto x = random_jvector(c, eng);
            const auto dp = jnorm(x);
            const auto oracle = jnorm_oracle(x);
            CHECK(std::abs(dp.value - oracle.value) <=
                  1e-9 * std::max(1.0, oracle.value));
            if (jnorm(x).value > 1e-6) {
                auto f = norming_functional(x);
                CHECK(f.apply(x) == doctest::Approx(dp.value).epsilon(1e-9));
            }
        }
    }
}

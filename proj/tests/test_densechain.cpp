#include "doctest.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "jsum/densechain.hpp"
#include "jsum/jnorm.hpp"

using namespace jsum;

namespace {

DecompositionSpec spec_d6(double p) {
    DecompositionSpec s;
    s.D = 6;
    s.p = p;
    s.blocks = {{1, 2}, {3, 4}, {5, 6}};
    return s;
}

}  // namespace

TEST_CASE("build_dense produces inclusion chains") {
    DecompositionSpec s;
    s.D = 2;
    s.p = 2.0;
    s.blocks = {{1}, {2}};
    auto c = build_dense(s);
    CHECK(c->length() == 2);
    CHECK(c->dim(1) == 1);
    CHECK(c->dim(2) == 2);

    auto c6 = build_dense(spec_d6(1.5));
    CHECK(c6->dim(1) == 2);
    CHECK(c6->dim(2) == 4);
    CHECK(c6->dim(3) == 6);

    DecompositionSpec bad = spec_d6(2.0);
    bad.blocks = {{1, 2}, {2, 3}, {4, 5, 6}};
    CHECK_THROWS_WITH_AS(build_dense(bad), doctest::Contains("overlap"),
                         std::invalid_argument);
}

TEST_CASE("inclusion maps are isometries onto their ranges") {
    auto c = build_dense(spec_d6(1.5));
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        const int n = rng.uniform_int(1, 2);
        Eigen::VectorXd v(c->dim(n));
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
        CHECK(c->block_norm(n + 1, c->map(n) * v) ==
              doctest::Approx(c->block_norm(n, v)).epsilon(1e-15));
    }
}

TEST_CASE("lower 2-estimate of lp decompositions with p <= 2") {
    Rng rng(21);
    for (double p : {1.0, 1.5, 2.0}) {
        for (int t = 0; t < 50; ++t) {
            // Disjoint blocks z_i in l_p^6.
            Eigen::VectorXd z1 = Eigen::VectorXd::Zero(6), z2 = z1, z3 = z1;
            for (int i = 0; i < 2; ++i) z1(i) = rng.normal();
            for (int i = 2; i < 4; ++i) z2(i) = rng.normal();
            for (int i = 4; i < 6; ++i) z3(i) = rng.normal();
            const double sum2 = std::pow(lp_norm(z1, p), 2) +
                                std::pow(lp_norm(z2, p), 2) +
                                std::pow(lp_norm(z3, p), 2);
            const double whole = std::pow(lp_norm(z1 + z2 + z3, p), 2);
            CHECK(sum2 <= whole * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("embed and limit on the D=2 example") {
    DecompositionSpec s;
    s.D = 2;
    s.p = 2.0;
    s.blocks = {{1}, {2}};
    auto c = build_dense(s);
    Eigen::Vector2d z(0.8, -0.6);

    auto tz = embed_T(s, c, z);
    CHECK(tz.block(1)(0) == doctest::Approx(0.8));
    CHECK(tz.block(2)(0) == doctest::Approx(0.8));
    CHECK(tz.block(2)(1) == doctest::Approx(-0.6));
    CHECK(tz.tail == Tail::eventually_constant);

    // |T(z)|_J = |z| on this example (max rho^2 = 2 |z|^2, attained).
    CHECK(jnorm(tz).value == doctest::Approx(z.norm()).epsilon(1e-9));
    CHECK(jnorm_oracle(tz).value == doctest::Approx(z.norm()).epsilon(1e-9));

    auto lim = limit_operator(s, tz);
    CHECK_FALSE(lim.kernel);
    CHECK((lim.value - Eigen::VectorXd(z)).norm() <= 1e-15);

    CHECK(to_coords(embed_T(s, c, Eigen::Vector2d::Zero())).isZero());

    auto zt = zero_vector(c, Tail::zero);
    auto lz = limit_operator(s, zt);
    CHECK(lz.kernel);
    CHECK(lz.value.isZero());
}

TEST_CASE("embedding norm bound with M = K = 1") {
    Rng rng(33);
    for (double p : {1.0, 1.5, 2.0}) {
        auto s = spec_d6(p);
        auto c = build_dense(s);
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd z(6);
            for (int i = 0; i < 6; ++i) z(i) = rng.normal();
            const auto tz = embed_T(s, c, z);
            CHECK(jnorm(tz).value <= lp_norm(z, p) * (1.0 + 1e-9));
            auto cert = certify_embedding(s, c, z);
            CHECK(cert.pass);
            // Cross-check the certified rho against the oracle.
            CHECK(jnorm_oracle(tz).rho_value ==
                  doctest::Approx(jnorm(tz).rho_value).epsilon(1e-9));
        }
    }
}

TEST_CASE("certificate refused above p = 2") {
    auto s = spec_d6(3.0);
    auto c = build_dense(s);
    CHECK_THROWS_WITH_AS(certify_embedding(s, c, Eigen::VectorXd::Ones(6)),
                         doctest::Contains("refused"), std::invalid_argument);
    auto reports = check_splitting(s, 5, 1, true);
    bool refused = false;
    for (const auto& r : reports)
        if (r.name == "embed_certificate" && !r.pass) refused = true;
    CHECK(refused);
}

TEST_CASE("splitting identities hold on samples") {
    for (double p : {1.0, 1.5, 2.0}) {
        auto reports = check_splitting(spec_d6(p), 100, 7, true);
        for (const auto& r : reports) CHECK(r.pass);
    }
}

TEST_CASE("decomposition spec JSON round trip") {
    auto s = spec_d6(1.5);
    auto back = DecompositionSpec::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
}

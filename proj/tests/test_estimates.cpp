#include "doctest.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "jsum/estimates.hpp"

using namespace jsum;

namespace {

Eigen::VectorXd scalar(double v) {
    Eigen::VectorXd x(1);
    x(0) = v;
    return x;
}

}  // namespace

TEST_CASE("interval reduction on hand examples") {
    auto j3 = james_chain(3);
    auto e2 = coordinate_embed(j3, 2, scalar(1.0));

    auto r = check_interval_reduction(e2, IntervalI::closed(2, 2), 0, SubsetS({1, 3}));
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(0.0));

    auto r2 = check_interval_reduction(e2, IntervalI::closed(2, 2), 0, SubsetS({2}));
    CHECK(r2.pass);
    CHECK(r2.lhs == doctest::Approx(1.0));
    CHECK(r2.rhs == doctest::Approx(std::sqrt(2.0)));

    auto zero = zero_vector(j3);
    auto r3 = check_interval_reduction(zero, IntervalI::closed(2, 3), 1, SubsetS({2}));
    CHECK(r3.pass);
    CHECK(r3.lhs == 0.0);

    // Support violation.
    auto e1 = coordinate_embed(j3, 1, scalar(1.0));
    CHECK_THROWS_AS(
        check_interval_reduction(e1, IntervalI::closed(2, 3), 1, SubsetS({2})),
        std::invalid_argument);
}

TEST_CASE("upper 2-estimate on hand examples") {
    auto j3 = james_chain(3);
    auto e1 = coordinate_embed(j3, 1, scalar(1.0));
    auto e2 = coordinate_embed(j3, 2, scalar(1.0));
    auto e3 = coordinate_embed(j3, 3, scalar(1.0));

    // |e_1 + e_3|_J = sqrt(2) by brute force, so lhs 2 <= rhs 6.
    auto r = check_upper({e1, e3}, {IntervalI::closed(1, 1), IntervalI::closed(3, 3)});
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(2.0));
    CHECK(r.rhs == doctest::Approx(6.0));

    auto single = check_upper({e2}, {IntervalI::closed(2, 2)});
    CHECK(single.pass);

    // Adjacent blocks: |(1,1,0)|_J = 1.
    auto adj = check_upper({e1, e2}, {IntervalI::closed(1, 1), IntervalI::closed(2, 2)});
    CHECK(adj.pass);
    CHECK(adj.lhs == doctest::Approx(1.0));

    CHECK_THROWS_AS(
        check_upper({e1, e2}, {IntervalI::closed(1, 2), IntervalI::closed(2, 2)}),
        std::invalid_argument);
}

TEST_CASE("lower 2-estimate on hand examples and random skipped systems") {
    auto j3 = james_chain(3);
    auto e1 = coordinate_embed(j3, 1, scalar(1.0));
    auto e3 = coordinate_embed(j3, 3, scalar(1.0));

    auto r = check_lower({e1, e3}, {IntervalI::closed(1, 1), IntervalI::closed(3, 3)});
    CHECK(r.pass);
    CHECK(r.lhs == doctest::Approx(2.0));
    CHECK(r.rhs == doctest::Approx(4.0));

    auto single = check_lower({e1}, {IntervalI::closed(1, 1)});
    CHECK(single.pass);

    // Adjacent supports violate the skip condition.
    auto e2 = coordinate_embed(j3, 2, scalar(1.0));
    CHECK_THROWS_WITH_AS(
        check_lower({e1, e2}, {IntervalI::closed(1, 1), IntervalI::closed(2, 2)}),
        doctest::Contains("gap >= 2"), std::invalid_argument);
}

TEST_CASE("stepping lemma degenerate cases") {
    auto j3 = james_chain(3);
    Rng rng(5);
    auto x = random_jvector(j3, rng);

    auto identity = check_stepping(x, StepSequence({0, 1, 2, 3}), SubsetS({0, 2, 3}));
    CHECK(identity.pass);
    CHECK(identity.lhs == doctest::Approx(identity.rhs));

    auto zero = check_stepping(x, StepSequence({0, 0, 0, 0}), SubsetS({1, 3}));
    CHECK(zero.pass);
    CHECK(zero.lhs == 0.0);
}

TEST_CASE("skipped block lemma membership gate") {
    auto j4 = james_chain(4);
    Rng rng(7);
    auto raw = random_jvector(j4, rng);
    CHECK_THROWS_WITH_AS(check_skipped_block_lemma({0, 2}, {raw}),
                         doctest::Contains("projection range"),
                         std::invalid_argument);
}

TEST_CASE("full suite passes on builtin chains") {
    auto rep = run_suite(james_chain(6), 100, 1);
    CHECK(rep.failures() == 0);
    CHECK(rep.total() > 0);

    auto rep2 = run_suite(random_chain(3, 5, 3), 100, 1);
    CHECK(rep2.failures() == 0);

    auto empty = run_suite(james_chain(6), 0, 1);
    CHECK(empty.total() == 0);
}

TEST_CASE("suite is deterministic given the seed") {
    auto a = run_suite(random_chain(9, 5, 2), 25, 77);
    auto b = run_suite(random_chain(9, 5, 2), 25, 77);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.to_csv() == b.to_csv());
}

TEST_CASE("q != 2 records empirical ratios without failing") {
    auto rep = run_suite(james_chain(5, 3.0), 20, 4);
    CHECK(rep.failures() == 0);
    bool saw_ratio = false;
    for (const auto& c : rep.checks)
        if (c.name == "empirical_lower_ratio") saw_ratio = true;
    CHECK(saw_ratio);
}

TEST_CASE("corrupted chain produces recorded failures") {
    // One map scaled to operator norm 1.2, asserted past validation.
    std::vector<CoordinateSpace> spaces(6, CoordinateSpace{1, 2.0});
    std::vector<Eigen::MatrixXd> maps(5, Eigen::MatrixXd::Identity(1, 1));
    maps[2](0, 0) = 1.2;
    auto bad = std::make_shared<Chain>(spaces, maps, 2.0, ValidationMode::asserted);
    auto rep = run_suite(bad, 100, 1);
    CHECK(rep.failures() > 0);
}

#include <doctest.h>

#include <vector>

#include "gen.hpp"
#include "kinrl/games.hpp"

using namespace kinrl;

namespace {

constexpr Action C = Action::cooperate, D = Action::defect;

// Row action `a` strictly beats the other against every partner action.
bool strictly_dominant(const PayoffMatrix& m, Action a) {
    const Action other = a == C ? D : C;
    for (Action partner : all_actions)
        if (!(m[index_of(a)][index_of(partner)] > m[index_of(other)][index_of(partner)])) return false;
    return true;
}

}  // namespace

TEST_CASE("pd payoffs") {
    const DilemmaParams p(3, 1);
    CHECK(pd_payoffs(D, D, p).self == 0);
    CHECK(pd_payoffs(D, D, p).other == 0);
    CHECK(pd_payoffs(C, C, p).self == 2);
    CHECK(pd_payoffs(C, C, p).other == 2);
    CHECK(pd_payoffs(C, D, p).self == -1);
    CHECK(pd_payoffs(C, D, p).other == 3);
    CHECK(pd_payoffs(D, C, p).self == 3);
    CHECK_THROWS(DilemmaParams(1, 1));
    CHECK_THROWS(DilemmaParams(2, 0));
    CHECK_THROWS(DilemmaParams(1, 2));
}

TEST_CASE("pd ordering holds for random parameters") {
    Rng rng(2);
    for (int t = 0; t < 1000; ++t) {
        const double c = testgen::in_range(rng, 0.01, 5);
        const DilemmaParams p(c + testgen::in_range(rng, 0.01, 20), c);
        const double T = pd_payoffs(D, C, p).self, R = pd_payoffs(C, C, p).self, P = pd_payoffs(D, D, p).self,
                     S = pd_payoffs(C, D, p).self;
        CHECK(T > R);
        CHECK(R > P);
        CHECK(P > S);
        CHECK(P == 0);
    }
}

TEST_CASE("inclusive pairwise reward") {
    CHECK(inclusive_pairwise_reward({2, 2}, 0.75) == 3.5);
    CHECK(inclusive_pairwise_reward({-1, 3}, 0.0) == -1);
    CHECK(inclusive_pairwise_reward({-1, 3}, 1.0) == 2);
    CHECK_THROWS(inclusive_pairwise_reward({1, 1}, 1.5));
    CHECK_THROWS(inclusive_pairwise_reward({1, 1}, -0.5));
}

TEST_CASE("inclusive reward vector") {
    CHECK(inclusive_reward_vector(std::vector<double>{2, 2}, std::vector<double>{1, 0.75}, 0) == 3.5);
    CHECK(inclusive_reward_vector(std::vector<double>{5}, std::vector<double>{1}, 0) == 5);
    CHECK(inclusive_reward_vector(std::vector<double>{1, 1, 1}, std::vector<double>{1, 0, 0}, 0) == 1);
    CHECK_THROWS(inclusive_reward_vector(std::vector<double>{1, 1}, std::vector<double>{1}, 0));
    CHECK_THROWS(inclusive_reward_vector(std::vector<double>{1, 1}, std::vector<double>{1, 0}, 2));
    CHECK_THROWS(inclusive_reward_vector(std::vector<double>{1, 1}, std::vector<double>{0.5, 0}, 0));

    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + rng.below(10), self = rng.below(n);
        std::vector<double> pay(n), sims(n, 0.0);
        for (double& x : pay) x = testgen::in_range(rng, -5, 5);
        sims[self] = 1.0;
        CHECK(inclusive_reward_vector(pay, sims, self) == pay[self]);
    }
}

TEST_CASE("transformed matrix") {
    const auto m = transformed_matrix(DilemmaParams(3, 1), 0.75);
    CHECK(m[0][0] == 3.5);
    CHECK(m[0][1] == 1.25);
    CHECK(m[1][0] == 2.25);
    CHECK(m[1][1] == 0);
    CHECK(strictly_dominant(m, C));

    const auto weak = transformed_matrix(DilemmaParams(3, 1), 0.2);
    CHECK(weak[0][1] == doctest::Approx(-0.4));
    CHECK_FALSE(strictly_dominant(weak, C));

    Rng rng(8);
    for (int t = 0; t < 300; ++t) {
        const DilemmaParams p(1 + testgen::in_range(rng, 0.1, 10), 1);
        const auto z = transformed_matrix(p, 0.0);
        for (Action a : all_actions)
            for (Action b : all_actions) CHECK(z[index_of(a)][index_of(b)] == pd_payoffs(a, b, p).self);
    }
}

TEST_CASE("hamilton's rule") {
    CHECK(cooperation_favored(DilemmaParams(4, 1), 0.75));
    CHECK_FALSE(cooperation_favored(DilemmaParams(2, 1), 0.5));
    CHECK_FALSE(cooperation_favored(DilemmaParams(3, 1), 0.2));
}

TEST_CASE("hamilton's rule agrees with brute-force dominance on the grid") {
    int points = 0;
    for (int twice_b = 3; twice_b <= 40; ++twice_b) {
        const DilemmaParams p(twice_b / 2.0, 1);
        for (int k = 0; k <= 6; ++k) {
            const double h = k / 6.0;
            CHECK(cooperation_favored(p, h) == strictly_dominant(transformed_matrix(p, h), C));
            ++points;
        }
    }
    CHECK(points == 38 * 7);
}

#include <doctest.h>

#include <cmath>
#include <map>

#include "clustinfo/error.hpp"
#include "clustinfo/evaluate.hpp"
#include "clustinfo/random.hpp"
#include "support/oracles.hpp"

using namespace clustinfo;
using Table = std::vector<std::vector<std::size_t>>;

TEST_SUITE("evaluate") {

TEST_CASE("contingency examples") {
    const auto t = contingency({0, 0, 1, 1}, {"A", "A", "B", "B"});
    CHECK(t.counts == Table{{2, 0}, {0, 2}});
    CHECK(t.classes == std::vector<std::string>{"A", "B"});
    CHECK(t.clusters == std::vector<int>{0, 1});
    CHECK(t.total == 4);

    const auto single = contingency({0, 0}, {"A", "B"});
    CHECK(single.counts == Table{{1}, {1}});
}

TEST_CASE("unlabeled documents are excluded and counted") {
    const auto t = contingency({2, 0, 1, 0}, {"B", std::nullopt, "A", "A"});
    CHECK(t.unlabeled == 1);
    CHECK(t.total == 3);
    CHECK(t.clusters == std::vector<int>{0, 1, 2});
    CHECK(t.counts == Table{{1, 1, 0}, {0, 0, 1}});
    CHECK(t.class_sizes() == std::vector<std::size_t>{2, 1});
    CHECK(t.cluster_sizes() == std::vector<std::size_t>{1, 1, 1});

    CHECK_THROWS_AS(contingency({0, 1}, {std::nullopt, std::nullopt}), NoLabeledDocuments);
    CHECK_THROWS_AS(contingency({0}, {"A", "B"}), PreconditionError);
}

TEST_CASE("contingency cells match a brute-force tally") {
    Rng rng(3);
    std::vector<int> clusters;
    std::vector<std::optional<std::string>> labels;
    std::map<std::pair<std::string, int>, std::size_t> tally;
    for (int i = 0; i < 100; ++i) {
        const int k = static_cast<int>(rng.below(5));
        const std::string l(1, static_cast<char>('A' + rng.below(4)));
        clusters.push_back(k);
        labels.push_back(l);
        ++tally[{l, k}];
    }
    const auto t = contingency(clusters, labels);
    std::size_t sum = 0;
    for (std::size_t r = 0; r < t.classes.size(); ++r) {
        for (std::size_t c = 0; c < t.clusters.size(); ++c) {
            CHECK(t.counts[r][c] == tally[{t.classes[r], t.clusters[c]}]);
            sum += t.counts[r][c];
        }
    }
    CHECK(sum == 100);
}

TEST_CASE("metric examples") {
    const auto perfect = metrics(Table{{5, 0}, {0, 5}});
    CHECK(perfect.homogeneity == 1.0);
    CHECK(perfect.completeness == 1.0);
    CHECK(perfect.v_measure == 1.0);

    const auto lumped = metrics(Table{{5}, {5}});
    CHECK(lumped.homogeneity == 0.0);
    CHECK(lumped.completeness == 1.0);
    CHECK(lumped.v_measure == 0.0);

    const auto sym = metrics(Table{{3, 1}, {1, 3}});
    CHECK(std::abs(sym.homogeneity - 0.18872) < 1e-5);
    CHECK(std::abs(sym.completeness - 0.18872) < 1e-5);
    CHECK(std::abs(sym.v_measure - 0.18872) < 1e-5);
    const auto oracle = testing::brute_force_metrics(Table{{3, 1}, {1, 3}});
    CHECK(std::abs(sym.v_measure - oracle.v) < 1e-12);
}

TEST_CASE("single class and singleton clusters") {
    const auto one_class = metrics(Table{{2, 3, 1}});
    CHECK(one_class.homogeneity == 1.0);
    CHECK(one_class.completeness == doctest::Approx(0.0));

    const auto split = metrics(Table{{1, 1, 0, 0}, {0, 0, 1, 1}});
    CHECK(split.homogeneity == 1.0);
    CHECK(split.completeness < 1.0);
    CHECK(split.v_measure < 1.0);
}

TEST_CASE("entropies are reported in nats") {
    const auto m = metrics(Table{{2, 0}, {0, 2}});
    CHECK(m.class_entropy == doctest::Approx(std::log(2.0)));
    CHECK(m.cluster_entropy == doctest::Approx(std::log(2.0)));
    CHECK(m.class_given_cluster == 0.0);
}

TEST_CASE("agreement with the brute-force oracle on random tables") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        const auto t = testing::random_table(rng, 6, 6, 12);
        const auto m = metrics(t);
        const auto o = testing::brute_force_metrics(t);
        CHECK(std::abs(m.homogeneity - o.h) <= 1e-9);
        CHECK(std::abs(m.completeness - o.c) <= 1e-9);
        CHECK(std::abs(m.v_measure - o.v) <= 1e-9);
    }
}

TEST_CASE("metric properties on random tables") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const auto t = testing::random_table(rng, 5, 5, 9);
        const auto m = metrics(t);
        CHECK(m.homogeneity >= 0.0);
        CHECK(m.homogeneity <= 1.0 + 1e-12);
        CHECK(m.completeness >= 0.0);
        CHECK(m.completeness <= 1.0 + 1e-12);
        CHECK(m.v_measure >= 0.0);
        CHECK(m.v_measure <= (m.homogeneity + m.completeness) / 2 + 1e-12);

        // Column and row permutations leave every score unchanged.
        Table cols = t;
        for (auto& row : cols) std::reverse(row.begin(), row.end());
        Table rows(t.rbegin(), t.rend());
        for (const auto& p : {metrics(cols), metrics(rows)}) {
            CHECK(std::abs(p.homogeneity - m.homogeneity) < 1e-12);
            CHECK(std::abs(p.completeness - m.completeness) < 1e-12);
            CHECK(std::abs(p.v_measure - m.v_measure) < 1e-12);
        }

        // Transposing swaps homogeneity and completeness.
        Table tr(t[0].size(), std::vector<std::size_t>(t.size()));
        for (std::size_t r = 0; r < t.size(); ++r)
            for (std::size_t c = 0; c < t[0].size(); ++c) tr[c][r] = t[r][c];
        const auto mt = metrics(tr);
        CHECK(std::abs(mt.homogeneity - m.completeness) < 1e-9);
        CHECK(std::abs(mt.completeness - m.homogeneity) < 1e-9);
    }
}

TEST_CASE("splitting a pure cluster never lowers homogeneity or raises completeness") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t classes = 2 + rng.below(4);
        Table t(classes, std::vector<std::size_t>(classes + 1, 0));
        for (std::size_t r = 0; r < classes; ++r) t[r][r] = 2 + rng.below(8);
        for (std::size_t r = 0; r < classes; ++r) t[r][classes] = rng.below(3);
        const auto before = metrics(t);
        // Column 0 holds only class 0; split it into two pure parts.
        Table split = t;
        for (auto& row : split) row.push_back(0);
        const std::size_t moved = 1 + rng.below(t[0][0] - 1);
        split[0][0] -= moved;
        split[0].back() = moved;
        const auto after = metrics(split);
        CHECK(after.homogeneity >= before.homogeneity - 1e-12);
        CHECK(after.completeness <= before.completeness + 1e-12);
    }
}

TEST_CASE("v is 1 exactly for perfect agreement") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const auto t = testing::random_table(rng, 4, 4, 5);
        const auto m = metrics(t);
        CHECK((m.v_measure == doctest::Approx(1.0)) == (m.homogeneity == doctest::Approx(1.0) && m.completeness == doctest::Approx(1.0)));
    }
}

}

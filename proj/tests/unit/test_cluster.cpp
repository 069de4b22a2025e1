#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "clustinfo/cluster.hpp"
#include "clustinfo/error.hpp"
#include "support/synthetic.hpp"

using namespace clustinfo;
using Eigen::MatrixXd;

namespace {

/// True when the two labelings induce the same partition.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, int> fwd, back;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [f, fnew] = fwd.emplace(a[i], b[i]);
        auto [r, rnew] = back.emplace(b[i], a[i]);
        if (f->second != b[i] || r->second != a[i]) return false;
    }
    return true;
}

void check_contract(const MatrixXd& points, const Clustering& c) {
    REQUIRE(c.assignments.size() == static_cast<std::size_t>(points.rows()));
    for (std::size_t i = 1; i < c.trace.size(); ++i) CHECK(c.trace[i] <= c.trace[i - 1] * (1 + 1e-12) + 1e-12);
    for (int a : c.assignments) CHECK((a >= 0 && a < c.k));

    double sum = 0.0;
    for (double v : c.variabilities) sum += v;
    CHECK(std::abs(sum - c.dissimilarity) <= 1e-9 * std::max(1.0, c.dissimilarity));

    for (int k = 0; k < c.k; ++k) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
        int n = 0;
        for (std::size_t i = 0; i < c.assignments.size(); ++i) {
            if (c.assignments[i] != k) continue;
            mean += points.row(static_cast<Eigen::Index>(i));
            ++n;
        }
        REQUIRE(n > 0);
        mean /= n;
        CHECK((mean - c.centroids.row(k)).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("variability examples") {
    MatrixXd one(1, 3);
    one << 1, 2, 3;
    CHECK(variability(one) == 0.0);
    MatrixXd two(2, 1);
    two << 0, 2;
    CHECK(variability(two) == 2.0);
    CHECK_THROWS_AS(variability(MatrixXd(0, 2)), EmptyCluster);
}

TEST_CASE("variability matches a double-loop oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const MatrixXd pts = testing::gaussian_matrix(seed, 20, 3);
        double m[3] = {0, 0, 0};
        for (int i = 0; i < 20; ++i)
            for (int d = 0; d < 3; ++d) m[d] += pts(i, d) / 20.0;
        double expected = 0.0;
        for (int i = 0; i < 20; ++i)
            for (int d = 0; d < 3; ++d) expected += (pts(i, d) - m[d]) * (pts(i, d) - m[d]);
        CHECK(std::abs(variability(pts) - expected) <= 1e-9);
    }
}

TEST_CASE("k equal to the number of points gives zero dissimilarity") {
    const MatrixXd pts = testing::gaussian_matrix(4, 12, 2);
    const auto c = kmeans(pts, 12);
    CHECK(c.dissimilarity == 0.0);
    CHECK(std::set<int>(c.assignments.begin(), c.assignments.end()).size() == 12);
    check_contract(pts, c);
}

TEST_CASE("duplicate points with k = n still fill every cluster") {
    MatrixXd pts = MatrixXd::Zero(6, 2);
    pts.row(5) << 1, 1;
    const auto c = kmeans(pts, 6);
    CHECK(std::set<int>(c.assignments.begin(), c.assignments.end()).size() == 6);
    CHECK(c.dissimilarity == 0.0);
}

TEST_CASE("two separated blobs are recovered") {
    auto [pts, truth] = testing::blobs(21, 2, 50, 2, 1.0);
    const auto c = kmeans(pts, 2);
    CHECK(same_partition(c.assignments, truth));
    CHECK(c.converged);
    check_contract(pts, c);
}

TEST_CASE("five blobs in four dimensions") {
    auto [pts, truth] = testing::blobs(5, 5, 40, 4, 0.5);
    const auto c = kmeans(pts, 5);
    CHECK(same_partition(c.assignments, truth));
    check_contract(pts, c);
}

TEST_CASE("objective trace is non-increasing on random data") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MatrixXd pts = testing::gaussian_matrix(seed, 150, 4);
        for (int k : {2, 5, 11}) {
            KMeansOptions o;
            o.seed = seed;
            o.restarts = 3;
            const auto c = kmeans(pts, k, o);
            CHECK_FALSE(c.trace.empty());
            CHECK(c.trace.back() == doctest::Approx(c.dissimilarity).epsilon(1e-12));
            check_contract(pts, c);
        }
    }
}

TEST_CASE("permuting the points relabels the clusters only") {
    auto [pts, truth] = testing::blobs(8, 4, 30, 3, 0.3);
    const auto base = kmeans(pts, 4);
    std::vector<int> perm(pts.rows());
    for (int i = 0; i < static_cast<int>(perm.size()); ++i) perm[i] = (i * 53 + 7) % static_cast<int>(perm.size());
    MatrixXd shuffled(pts.rows(), pts.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) shuffled.row(static_cast<Eigen::Index>(i)) = pts.row(perm[i]);
    const auto moved = kmeans(shuffled, 4);
    std::vector<int> mapped(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) mapped[i] = base.assignments[static_cast<std::size_t>(perm[i])];
    CHECK(same_partition(moved.assignments, mapped));
    CHECK(moved.dissimilarity == doctest::Approx(base.dissimilarity).epsilon(1e-9));
}

TEST_CASE("more restarts never increase the dissimilarity") {
    const MatrixXd pts = testing::gaussian_matrix(17, 200, 3);
    double previous = std::numeric_limits<double>::infinity();
    for (int r = 1; r <= 8; ++r) {
        KMeansOptions o;
        o.seed = 5;
        o.restarts = r;
        const auto c = kmeans(pts, 6, o);
        CHECK(c.restarts_used == r);
        CHECK(c.best_restart < r);
        CHECK(c.dissimilarity <= previous);
        previous = c.dissimilarity;
    }
}

TEST_CASE("results are deterministic and independent of the thread count") {
    const MatrixXd pts = testing::gaussian_matrix(2, 300, 5);
    KMeansOptions serial;
    serial.seed = 77;
    KMeansOptions parallel = serial;
    parallel.threads = 4;
    const auto a = kmeans(pts, 7, serial);
    const auto b = kmeans(pts, 7, serial);
    const auto c = kmeans(pts, 7, parallel);
    CHECK(a.assignments == b.assignments);
    CHECK(a.assignments == c.assignments);
    CHECK(a.centroids == c.centroids);
    CHECK(a.trace == c.trace);
    CHECK(a.best_restart == c.best_restart);
}

TEST_CASE("errors") {
    const MatrixXd pts = testing::gaussian_matrix(1, 5, 2);
    CHECK_THROWS_AS(kmeans(pts, 6), KTooLarge);
    CHECK_THROWS_AS(kmeans(pts, 0), PreconditionError);
    KMeansOptions o;
    o.restarts = 0;
    CHECK_THROWS_AS(kmeans(pts, 2, o), PreconditionError);
}

TEST_CASE("assignment dump") {
    MatrixXd pts(3, 1);
    pts << 0, 0.1, 10;
    const auto c = kmeans(pts, 2);
    std::ostringstream out;
    write_assignments(out, {"a", "b", "c"}, c);
    const auto s = out.str();
    CHECK(s.rfind("a\t", 0) == 0);
    CHECK(c.assignments[0] == c.assignments[1]);
    CHECK(c.assignments[0] != c.assignments[2]);
    CHECK(c.cluster_sizes().size() == 2);
}

}

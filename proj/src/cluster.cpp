#include "clustinfo/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "clustinfo/error.hpp"
#include "clustinfo/random.hpp"

namespace clustinfo {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

double squared_distance(const MatrixXd& points, Index i, const MatrixXd& centroids, Index c) {
    return (points.row(i) - centroids.row(c)).squaredNorm();
}

std::vector<Index> kmeanspp_seeds(const MatrixXd& points, int k, Rng& rng) {
    const Index n = points.rows();
    std::vector<Index> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    std::vector<double> mindist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

    auto take = [&](Index i) {
        chosen.push_back(i);
        taken[static_cast<std::size_t>(i)] = 1;
        for (Index j = 0; j < n; ++j) {
            const double d = (points.row(j) - points.row(i)).squaredNorm();
            mindist[static_cast<std::size_t>(j)] = std::min(mindist[static_cast<std::size_t>(j)], d);
        }
    };

    take(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    while (static_cast<int>(chosen.size()) < k) {
        double total = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (!taken[static_cast<std::size_t>(j)]) total += mindist[static_cast<std::size_t>(j)];
        }
        Index pick = -1;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (Index j = 0; j < n; ++j) {
                if (taken[static_cast<std::size_t>(j)]) continue;
                const double w = mindist[static_cast<std::size_t>(j)];
                if (w <= 0.0) continue;
                pick = j;
                if (target < w) break;
                target -= w;
            }
        } else {
            // Every remaining point coincides with a chosen center.
            auto remaining = static_cast<std::uint64_t>(n) - chosen.size();
            auto skip = rng.below(remaining);
            for (Index j = 0; j < n; ++j) {
                if (taken[static_cast<std::size_t>(j)]) continue;
                if (skip == 0) {
                    pick = j;
                    break;
                }
                --skip;
            }
        }
        take(pick);
    }
    return chosen;
}

void recompute_means(const MatrixXd& points, const std::vector<int>& assign, MatrixXd& centroids,
                     std::vector<std::size_t>& sizes) {
    centroids.setZero();
    std::fill(sizes.begin(), sizes.end(), 0);
    for (Index i = 0; i < points.rows(); ++i) {
        const int c = assign[static_cast<std::size_t>(i)];
        centroids.row(c) += points.row(i);
        ++sizes[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < centroids.rows(); ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) centroids.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    }
}

/// Moves the point farthest from the largest cluster's mean into each empty
/// cluster. Returns the number of points moved.
int repair_empty_clusters(const MatrixXd& points, std::vector<int>& assign, MatrixXd& centroids,
                          std::vector<std::size_t>& sizes) {
    int moved = 0;
    for (Index c = 0; c < centroids.rows(); ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;
        const auto largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        Index farthest = -1;
        double best = -1.0;
        for (Index i = 0; i < points.rows(); ++i) {
            if (assign[static_cast<std::size_t>(i)] != largest) continue;
            const double d = squared_distance(points, i, centroids, largest);
            if (d > best) {
                best = d;
                farthest = i;
            }
        }
        assign[static_cast<std::size_t>(farthest)] = static_cast<int>(c);
        recompute_means(points, assign, centroids, sizes);
        ++moved;
    }
    return moved;
}

Clustering lloyd(const MatrixXd& points, int k, std::uint64_t seed, int max_iterations) {
    const Index n = points.rows();
    Rng rng(seed);
    const auto seeds = kmeanspp_seeds(points, k, rng);

    MatrixXd centroids(k, points.cols());
    for (int c = 0; c < k; ++c) centroids.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);

    Clustering out;
    out.k = k;
    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);

    for (int it = 1; it <= max_iterations; ++it) {
        int changes = 0;
        for (Index i = 0; i < n; ++i) {
            auto& a = assign[static_cast<std::size_t>(i)];
            int best = a;
            double best_d = a >= 0 ? squared_distance(points, i, centroids, a) : std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = squared_distance(points, i, centroids, c);
                // Strict comparison keeps the current cluster on ties.
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (best != a) {
                a = best;
                ++changes;
            }
        }
        recompute_means(points, assign, centroids, sizes);
        changes += repair_empty_clusters(points, assign, centroids, sizes);

        double objective = 0.0;
        for (Index i = 0; i < n; ++i) objective += squared_distance(points, i, centroids, assign[static_cast<std::size_t>(i)]);
        out.trace.push_back(objective);
        out.iterations = it;
        if (changes == 0) {
            out.converged = true;
            break;
        }
    }

    out.assignments = std::move(assign);
    out.centroids = std::move(centroids);
    out.variabilities.assign(static_cast<std::size_t>(k), 0.0);
    for (Index i = 0; i < n; ++i) {
        const int c = out.assignments[static_cast<std::size_t>(i)];
        out.variabilities[static_cast<std::size_t>(c)] += squared_distance(points, i, out.centroids, c);
    }
    out.dissimilarity = 0.0;
    for (double v : out.variabilities) out.dissimilarity += v;
    return out;
}

}  // namespace

std::vector<std::size_t> Clustering::cluster_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
    return sizes;
}

double variability(const Eigen::MatrixXd& points) {
    if (points.rows() == 0) throw EmptyCluster("variability of an empty cluster is undefined");
    const Eigen::RowVectorXd mean = points.colwise().mean();
    return (points.rowwise() - mean).rowwise().squaredNorm().sum();
}

Clustering kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts) {
    if (k < 1) throw PreconditionError(fmt::format("k={} must be positive", k));
    if (opts.restarts < 1) throw PreconditionError(fmt::format("restarts={} must be positive", opts.restarts));
    if (static_cast<Index>(k) > points.rows()) {
        throw KTooLarge(fmt::format("k={} exceeds the number of documents ({})", k, points.rows()));
    }

    std::vector<Clustering> runs(static_cast<std::size_t>(opts.restarts));
    auto run_one = [&](int r) {
        runs[static_cast<std::size_t>(r)] = lloyd(points, k, derive_seed(opts.seed, static_cast<std::uint64_t>(r)), opts.max_iterations);
    };

    const int threads = std::clamp(opts.threads, 1, opts.restarts);
    if (threads == 1) {
        for (int r = 0; r < opts.restarts; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int r = next++; r < opts.restarts; r = next++) run_one(r);
            });
        }
    }

    int best = 0;
    for (int r = 1; r < opts.restarts; ++r) {
        if (runs[static_cast<std::size_t>(r)].dissimilarity < runs[static_cast<std::size_t>(best)].dissimilarity) best = r;
    }
    Clustering out = std::move(runs[static_cast<std::size_t>(best)]);
    out.restarts_used = opts.restarts;
    out.best_restart = best;
    return out;
}

Clustering kmeans(const EmbeddingMatrix& emb, int k, const KMeansOptions& opts) {
    return kmeans(emb.vectors, k, opts);
}

void write_assignments(std::ostream& out, const std::vector<std::string>& docs, const Clustering& c) {
    for (std::size_t i = 0; i < docs.size(); ++i) out << docs[i] << '\t' << c.assignments[i] << '\n';
}

}  // namespace clustinfo

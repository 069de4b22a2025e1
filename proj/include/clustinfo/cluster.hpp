#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clustinfo/lsa.hpp"

namespace clustinfo {

struct KMeansOptions {
    std::uint64_t seed = 0;
    int restarts = 10;
    int max_iterations = 300;
    int threads = 1;  // restarts evaluated concurrently; results do not depend on this
};

struct Clustering {
    int k = 0;
    std::vector<int> assignments;      // per document, in [0, k)
    Eigen::MatrixXd centroids;         // k x dims
    std::vector<double> variabilities; // per cluster
    double dissimilarity = 0.0;        // sum of variabilities
    int iterations = 0;
    int restarts_used = 0;
    int best_restart = 0;
    bool converged = false;
    std::vector<double> trace;         // objective after every iteration of the returned run

    std::vector<std::size_t> cluster_sizes() const;
};

/// Sum of squared Euclidean distances of the rows of `points` to their mean.
/// Throws EmptyCluster when `points` has no rows.
double variability(const Eigen::MatrixXd& points);

/// Lloyd's algorithm with k-means++ seeding. Each restart r is seeded from
/// derive_seed(opts.seed, r); the restart with the smallest dissimilarity
/// wins, ties going to the lower restart index.
Clustering kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts = {});
Clustering kmeans(const EmbeddingMatrix& emb, int k, const KMeansOptions& opts = {});

/// TSV: doc_id, cluster index.
void write_assignments(std::ostream& out, const std::vector<std::string>& docs, const Clustering& c);

}  // namespace clustinfo

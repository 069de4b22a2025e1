#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "clustinfo/vectorize.hpp"

namespace clustinfo {

enum class SvdSolver { Dense, Randomized };

struct SvdOptions {
    std::uint64_t seed = 0;
    int oversampling = 8;
    int power_iterations = 4;        // minimum before convergence is tested
    double tolerance = 1e-8;         // max relative change of the kept singular values
    int max_iterations = 200;
    std::size_t dense_threshold = 64;  // exact SVD when min(#terms, #docs) <= this
};

/// Documents embedded as rows of V * Sigma, where W = U Sigma V^T is the
/// truncated SVD of the term x document matrix.
struct EmbeddingMatrix {
    std::vector<std::string> docs;
    Eigen::MatrixXd vectors;        // docs x dims
    Eigen::VectorXd singular_values;  // non-increasing, >= 0
    Eigen::MatrixXd right_vectors;  // docs x dims, orthonormal columns
    SvdSolver solver = SvdSolver::Dense;
    int iterations = 0;

    int dims() const noexcept { return static_cast<int>(singular_values.size()); }
    std::size_t num_docs() const noexcept { return docs.size(); }
};

Eigen::SparseMatrix<double> to_sparse(const WeightedMatrix& w);

/// Truncated SVD embedding. Throws DimsTooLarge when n_dims exceeds
/// min(#terms, #docs) and ConvergenceFailure when the randomized solver hits
/// its iteration cap.
EmbeddingMatrix reduce(const WeightedMatrix& w, int n_dims, const SvdOptions& opts = {});
EmbeddingMatrix reduce(const Eigen::SparseMatrix<double>& a, std::vector<std::string> docs, int n_dims,
                       const SvdOptions& opts = {});

/// ||A - A V V^T||_F for the embedding's right singular vectors.
double reconstruction_error(const Eigen::SparseMatrix<double>& a, const EmbeddingMatrix& emb);

/// doc_id followed by one column per dimension, 9 significant digits.
void write_embedding_tsv(std::ostream& out, const EmbeddingMatrix& emb);

}  // namespace clustinfo

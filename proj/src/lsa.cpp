#include "clustinfo/lsa.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "clustinfo/error.hpp"
#include "clustinfo/random.hpp"

namespace clustinfo {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd orthonormal_basis(const MatrixXd& y) {
    Eigen::HouseholderQR<MatrixXd> qr(y);
    return qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
}

/// Flips each column so that its largest-magnitude entry is positive.
void fix_signs(MatrixXd& v) {
    for (Index j = 0; j < v.cols(); ++j) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index i = 0; i < v.rows(); ++i) {
            const double a = std::abs(v(i, j));
            if (a > best_abs) {
                best_abs = a;
                best = i;
            }
        }
        if (v(best, j) < 0.0) v.col(j) *= -1.0;
    }
}

struct Factors {
    VectorXd sigma;
    MatrixXd v;  // docs x dims
    int iterations = 0;
};

Factors dense_svd(const Eigen::SparseMatrix<double>& a, int k) {
    const MatrixXd dense(a);
    Eigen::BDCSVD<MatrixXd> svd(dense, Eigen::ComputeThinV);
    return {svd.singularValues().head(k), svd.matrixV().leftCols(k), 0};
}

/// Randomized subspace iteration with a Rayleigh-Ritz step per sweep. Each
/// row of the starting test matrix is drawn from a stream keyed by its
/// document id, so reordering the documents permutes the result.
Factors randomized_svd(const Eigen::SparseMatrix<double>& a, const std::vector<std::string>& docs, int k,
                       const SvdOptions& opts) {
    const Index n_docs = a.cols();
    const Index limit = std::min(a.rows(), a.cols());
    const Index width = std::min<Index>(k + std::max(0, opts.oversampling), limit);

    MatrixXd omega(n_docs, width);
    for (Index i = 0; i < n_docs; ++i) {
        Rng rng(derive_seed(opts.seed, docs[static_cast<std::size_t>(i)]));
        for (Index j = 0; j < width; ++j) omega(i, j) = rng.normal();
    }

    MatrixXd q = orthonormal_basis(a * omega);
    VectorXd previous;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        // Z = A^T Q; the right singular vectors of Q^T A are the left ones of Z.
        const MatrixXd z = a.transpose() * q;
        Eigen::BDCSVD<MatrixXd> small(z, Eigen::ComputeThinU);
        const VectorXd sigma = small.singularValues().head(k);

        if (it > opts.power_iterations && previous.size() == sigma.size()) {
            const double scale = std::max(sigma(0), 1e-300);
            double change = 0.0;
            for (Index i = 0; i < sigma.size(); ++i) {
                const double denom = std::max(sigma(i), scale * 1e-12);
                change = std::max(change, std::abs(sigma(i) - previous(i)) / denom);
            }
            if (change < opts.tolerance) return {sigma, small.matrixU().leftCols(k), it};
        }
        previous = sigma;
        q = orthonormal_basis(a * small.matrixU());
    }
    throw ConvergenceFailure(fmt::format("randomized SVD did not reach tolerance {} within {} iterations",
                                         opts.tolerance, opts.max_iterations));
}

}  // namespace

Eigen::SparseMatrix<double> to_sparse(const WeightedMatrix& w) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(w.nnz());
    for (std::size_t d = 0; d < w.num_docs(); ++d) {
        for (const auto& e : w.columns[d]) triplets.emplace_back(static_cast<int>(e.term), static_cast<int>(d), e.value);
    }
    Eigen::SparseMatrix<double> a(static_cast<Index>(w.num_terms()), static_cast<Index>(w.num_docs()));
    a.setFromTriplets(triplets.begin(), triplets.end());
    return a;
}

EmbeddingMatrix reduce(const WeightedMatrix& w, int n_dims, const SvdOptions& opts) {
    return reduce(to_sparse(w), w.docs, n_dims, opts);
}

EmbeddingMatrix reduce(const Eigen::SparseMatrix<double>& a, std::vector<std::string> docs, int n_dims,
                       const SvdOptions& opts) {
    if (n_dims < 1) throw PreconditionError(fmt::format("number of dimensions {} must be positive", n_dims));
    const auto limit = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
    if (static_cast<std::size_t>(n_dims) > limit) {
        throw DimsTooLarge(fmt::format("{} dimensions requested but the matrix is {} x {}", n_dims, a.rows(), a.cols()));
    }
    if (docs.size() != static_cast<std::size_t>(a.cols())) {
        throw PreconditionError("document list does not match matrix columns");
    }

    EmbeddingMatrix emb;
    emb.docs = std::move(docs);
    Factors f;
    if (limit <= opts.dense_threshold) {
        f = dense_svd(a, n_dims);
        emb.solver = SvdSolver::Dense;
    } else {
        f = randomized_svd(a, emb.docs, n_dims, opts);
        emb.solver = SvdSolver::Randomized;
    }
    fix_signs(f.v);
    emb.singular_values = f.sigma.cwiseMax(0.0);
    emb.right_vectors = std::move(f.v);
    emb.vectors = emb.right_vectors * emb.singular_values.asDiagonal();
    emb.iterations = f.iterations;
    return emb;
}

double reconstruction_error(const Eigen::SparseMatrix<double>& a, const EmbeddingMatrix& emb) {
    const MatrixXd dense(a);
    const MatrixXd& v = emb.right_vectors;
    return (dense - (dense * v) * v.transpose()).norm();
}

void write_embedding_tsv(std::ostream& out, const EmbeddingMatrix& emb) {
    for (std::size_t d = 0; d < emb.num_docs(); ++d) {
        out << emb.docs[d];
        for (Index j = 0; j < emb.vectors.cols(); ++j) out << '\t' << fmt::format("{:.9g}", emb.vectors(static_cast<Index>(d), j));
        out << '\n';
    }
}

}  // namespace clustinfo

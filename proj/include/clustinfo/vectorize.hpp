#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clustinfo/corpus.hpp"

namespace clustinfo {

template <typename T>
struct SparseEntry {
    std::uint32_t term;
    T value;

    bool operator==(const SparseEntry&) const = default;
};

/// Which feature-selection steps produced a matrix.
struct Provenance {
    bool singletons_ablated = false;
    std::optional<double> df_percent;   // D
    std::optional<int> rank_cutoff;     // R
    bool l2_normalized = false;

    bool operator==(const Provenance&) const = default;
};

/// Sparse term x document counts, stored column-wise (one column per
/// document, entries sorted by term index). Zero counts are never stored.
struct TermDocMatrix {
    std::vector<std::string> terms;  // sorted
    std::vector<std::string> docs;
    std::vector<std::vector<SparseEntry<std::uint32_t>>> columns;
    std::vector<std::uint32_t> doc_freq;  // n_t, per term
    Provenance provenance;

    std::size_t num_terms() const noexcept { return terms.size(); }
    std::size_t num_docs() const noexcept { return docs.size(); }
    std::size_t nnz() const;
    /// Indices of documents whose column is empty.
    std::vector<std::size_t> empty_documents() const;

    bool operator==(const TermDocMatrix&) const = default;
};

/// Sparse nonnegative term weights, column-wise like TermDocMatrix. All
/// stored weights are strictly positive.
struct WeightedMatrix {
    std::vector<std::string> terms;
    std::vector<std::string> docs;
    std::vector<std::vector<SparseEntry<double>>> columns;
    Provenance provenance;

    std::size_t num_terms() const noexcept { return terms.size(); }
    std::size_t num_docs() const noexcept { return docs.size(); }
    std::size_t nnz() const;
    std::vector<std::size_t> empty_documents() const;

    bool operator==(const WeightedMatrix&) const = default;
};

TermDocMatrix count_matrix(const Corpus& corpus);
TermDocMatrix count_matrix(const std::vector<TokenStream>& streams);

/// Drops every term with n_t = 1. Throws AllTermsRemoved if nothing is left.
TermDocMatrix ablate_singletons(const TermDocMatrix& m);

/// Minimum document frequency implied by D percent of `num_docs`:
/// max(2, ceil(D/100 * num_docs)).
std::uint32_t min_doc_freq(double d_percent, std::size_t num_docs);

/// Keeps terms with n_t >= min_doc_freq(D, N_docs). D must lie in
/// [0.1, 1.0] unless `allow_out_of_bounds`.
TermDocMatrix apply_df_threshold(const TermDocMatrix& m, double d_percent, bool allow_out_of_bounds = false);

/// weight = t_c * ln(N_docs / n_t). Terms present in every document have
/// weight 0 and are removed from the vocabulary.
WeightedMatrix tfidf(const TermDocMatrix& m);

/// Per document, keeps the R highest weights. Ties go to the
/// lexicographically smaller term. Terms left with no entries are dropped
/// from the vocabulary.
WeightedMatrix apply_rank_cutoff(const WeightedMatrix& w, int r);

/// Scales each nonempty document column to unit Euclidean norm.
WeightedMatrix l2_normalize(const WeightedMatrix& w);

struct FeatureParams {
    double d_percent = 0.5;
    int rank_cutoff = 5;
    bool normalize = true;
    bool allow_out_of_bounds = false;
};

/// apply_df_threshold -> tfidf -> apply_rank_cutoff -> l2_normalize, on a
/// matrix that has already been through ablate_singletons.
WeightedMatrix build_features(const TermDocMatrix& ablated, const FeatureParams& params);

/// MatrixMarket coordinate dumps (1-based, term rows, document columns).
void write_matrix_market(std::ostream& out, const TermDocMatrix& m);
void write_matrix_market(std::ostream& out, const WeightedMatrix& w);

/// Two-column TSV: term, zero-based row index.
void write_vocabulary(std::ostream& out, const std::vector<std::string>& terms);

}  // namespace clustinfo

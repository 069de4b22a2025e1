#include "clustinfo/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "clustinfo/error.hpp"

namespace clustinfo {

namespace {

template <typename Column>
std::size_t total_nnz(const std::vector<Column>& columns) {
    std::size_t n = 0;
    for (const auto& c : columns) n += c.size();
    return n;
}

template <typename Column>
std::vector<std::size_t> empty_columns(const std::vector<Column>& columns) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i].empty()) out.push_back(i);
    }
    return out;
}

/// Keeps rows flagged in `keep`, renumbering term indices.
template <typename T>
std::vector<std::vector<SparseEntry<T>>> select_rows(const std::vector<std::vector<SparseEntry<T>>>& columns,
                                                     const std::vector<std::int64_t>& remap) {
    std::vector<std::vector<SparseEntry<T>>> out(columns.size());
    for (std::size_t d = 0; d < columns.size(); ++d) {
        for (const auto& e : columns[d]) {
            const auto to = remap[e.term];
            if (to >= 0) out[d].push_back({static_cast<std::uint32_t>(to), e.value});
        }
    }
    return out;
}

TermDocMatrix filter_terms(const TermDocMatrix& m, std::uint32_t min_df) {
    std::vector<std::int64_t> remap(m.num_terms(), -1);
    TermDocMatrix out;
    out.docs = m.docs;
    out.provenance = m.provenance;
    for (std::size_t t = 0; t < m.num_terms(); ++t) {
        if (m.doc_freq[t] >= min_df) {
            remap[t] = static_cast<std::int64_t>(out.terms.size());
            out.terms.push_back(m.terms[t]);
            out.doc_freq.push_back(m.doc_freq[t]);
        }
    }
    out.columns = select_rows(m.columns, remap);
    return out;
}

/// Drops vocabulary rows with no stored entries.
WeightedMatrix compact(WeightedMatrix w) {
    std::vector<char> used(w.num_terms(), 0);
    for (const auto& col : w.columns) {
        for (const auto& e : col) used[e.term] = 1;
    }
    std::vector<std::int64_t> remap(w.num_terms(), -1);
    std::vector<std::string> terms;
    for (std::size_t t = 0; t < w.num_terms(); ++t) {
        if (used[t]) {
            remap[t] = static_cast<std::int64_t>(terms.size());
            terms.push_back(std::move(w.terms[t]));
        }
    }
    w.columns = select_rows(w.columns, remap);
    w.terms = std::move(terms);
    return w;
}

}  // namespace

std::size_t TermDocMatrix::nnz() const { return total_nnz(columns); }
std::vector<std::size_t> TermDocMatrix::empty_documents() const { return empty_columns(columns); }
std::size_t WeightedMatrix::nnz() const { return total_nnz(columns); }
std::vector<std::size_t> WeightedMatrix::empty_documents() const { return empty_columns(columns); }

TermDocMatrix count_matrix(const Corpus& corpus) {
    if (corpus.size() == 0) throw EmptyCorpus("cannot build a term-document matrix from an empty corpus");
    std::vector<TokenStream> streams;
    streams.reserve(corpus.size());
    for (const auto& doc : corpus.documents()) streams.push_back(tokenize(doc));
    return count_matrix(streams);
}

TermDocMatrix count_matrix(const std::vector<TokenStream>& streams) {
    if (streams.empty()) throw EmptyCorpus("cannot build a term-document matrix from an empty corpus");

    std::vector<std::map<std::string, std::uint32_t>> per_doc(streams.size());
    std::map<std::string, std::uint32_t> vocab;
    for (std::size_t d = 0; d < streams.size(); ++d) {
        for (const auto& tok : streams[d].tokens) {
            ++per_doc[d][tok];
            vocab.emplace(tok, 0);
        }
    }
    TermDocMatrix m;
    m.terms.reserve(vocab.size());
    for (auto& [term, index] : vocab) {
        index = static_cast<std::uint32_t>(m.terms.size());
        m.terms.push_back(term);
    }
    m.doc_freq.assign(m.terms.size(), 0);
    m.columns.resize(streams.size());
    for (std::size_t d = 0; d < streams.size(); ++d) {
        m.docs.push_back(streams[d].doc_id);
        auto& col = m.columns[d];
        col.reserve(per_doc[d].size());
        // std::map iteration is lexicographic, so term indices come out sorted.
        for (const auto& [term, count] : per_doc[d]) {
            const auto t = vocab.at(term);
            col.push_back({t, count});
            ++m.doc_freq[t];
        }
    }
    return m;
}

TermDocMatrix ablate_singletons(const TermDocMatrix& m) {
    auto out = filter_terms(m, 2);
    if (out.terms.empty()) throw AllTermsRemoved("every term occurs in only one document");
    out.provenance.singletons_ablated = true;
    return out;
}

std::uint32_t min_doc_freq(double d_percent, std::size_t num_docs) {
    // The small slack absorbs binary rounding in D/100 * N (e.g. 0.5% of 1000).
    const double scaled = d_percent / 100.0 * static_cast<double>(num_docs);
    const auto floor_from_d = static_cast<std::uint32_t>(std::max(0.0, std::ceil(scaled - 1e-9)));
    return std::max<std::uint32_t>(2, floor_from_d);
}

TermDocMatrix apply_df_threshold(const TermDocMatrix& m, double d_percent, bool allow_out_of_bounds) {
    if (!std::isfinite(d_percent) || d_percent < 0.0) {
        throw PreconditionError(fmt::format("document frequency threshold D={} is not a valid percentage", d_percent));
    }
    if (!allow_out_of_bounds && (d_percent < 0.1 - 1e-12 || d_percent > 1.0 + 1e-12)) {
        throw PreconditionError(fmt::format("document frequency threshold D={} outside [0.1, 1.0]", d_percent));
    }
    auto out = filter_terms(m, min_doc_freq(d_percent, m.num_docs()));
    if (out.terms.empty()) {
        throw AllTermsRemoved(fmt::format("no term reaches the D={}% document frequency floor", d_percent));
    }
    out.provenance.df_percent = d_percent;
    return out;
}

WeightedMatrix tfidf(const TermDocMatrix& m) {
    const auto n_docs = static_cast<double>(m.num_docs());
    std::vector<std::int64_t> remap(m.num_terms(), -1);
    std::vector<double> idf(m.num_terms(), 0.0);
    WeightedMatrix w;
    w.docs = m.docs;
    w.provenance = m.provenance;
    for (std::size_t t = 0; t < m.num_terms(); ++t) {
        if (m.doc_freq[t] == 0 || m.doc_freq[t] >= m.num_docs()) continue;
        remap[t] = static_cast<std::int64_t>(w.terms.size());
        w.terms.push_back(m.terms[t]);
        idf[t] = std::log(n_docs / static_cast<double>(m.doc_freq[t]));
    }
    w.columns.resize(m.num_docs());
    for (std::size_t d = 0; d < m.num_docs(); ++d) {
        for (const auto& e : m.columns[d]) {
            if (remap[e.term] < 0) continue;
            w.columns[d].push_back({static_cast<std::uint32_t>(remap[e.term]), static_cast<double>(e.value) * idf[e.term]});
        }
    }
    return w;
}

WeightedMatrix apply_rank_cutoff(const WeightedMatrix& w, int r) {
    if (r < 1) throw PreconditionError(fmt::format("rank cutoff R={} must be positive", r));
    WeightedMatrix out = w;
    for (auto& col : out.columns) {
        if (col.size() <= static_cast<std::size_t>(r)) continue;
        std::stable_sort(col.begin(), col.end(), [](const auto& a, const auto& b) {
            if (a.value != b.value) return a.value > b.value;
            return a.term < b.term;
        });
        col.resize(static_cast<std::size_t>(r));
        std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.term < b.term; });
    }
    out.provenance.rank_cutoff = r;
    return compact(std::move(out));
}

WeightedMatrix l2_normalize(const WeightedMatrix& w) {
    WeightedMatrix out = w;
    for (auto& col : out.columns) {
        double sq = 0.0;
        for (const auto& e : col) sq += e.value * e.value;
        if (sq <= 0.0) continue;
        const double norm = std::sqrt(sq);
        for (auto& e : col) e.value /= norm;
    }
    out.provenance.l2_normalized = true;
    return out;
}

WeightedMatrix build_features(const TermDocMatrix& ablated, const FeatureParams& params) {
    auto filtered = apply_df_threshold(ablated, params.d_percent, params.allow_out_of_bounds);
    auto weighted = apply_rank_cutoff(tfidf(filtered), params.rank_cutoff);
    if (weighted.terms.empty()) {
        throw AllTermsRemoved(fmt::format("no term keeps a positive tf-idf weight at D={}%", params.d_percent));
    }
    return params.normalize ? l2_normalize(weighted) : weighted;
}

void write_matrix_market(std::ostream& out, const TermDocMatrix& m) {
    out << "%%MatrixMarket matrix coordinate integer general\n";
    out << m.num_terms() << ' ' << m.num_docs() << ' ' << m.nnz() << '\n';
    for (std::size_t d = 0; d < m.num_docs(); ++d) {
        for (const auto& e : m.columns[d]) out << e.term + 1 << ' ' << d + 1 << ' ' << e.value << '\n';
    }
}

void write_matrix_market(std::ostream& out, const WeightedMatrix& w) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << w.num_terms() << ' ' << w.num_docs() << ' ' << w.nnz() << '\n';
    for (std::size_t d = 0; d < w.num_docs(); ++d) {
        for (const auto& e : w.columns[d]) out << fmt::format("{} {} {:.17g}\n", e.term + 1, d + 1, e.value);
    }
}

void write_vocabulary(std::ostream& out, const std::vector<std::string>& terms) {
    for (std::size_t i = 0; i < terms.size(); ++i) out << terms[i] << '\t' << i << '\n';
}

}  // namespace clustinfo

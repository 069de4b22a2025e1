#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clustinfo/cluster.hpp"
#include "clustinfo/corpus.hpp"
#include "clustinfo/evaluate.hpp"
#include "clustinfo/lsa.hpp"
#include "clustinfo/vectorize.hpp"

namespace clustinfo {

/// One point of the (D, R, N, K) parameter space plus the run controls.
struct PipelineParams {
    double d_percent = 0.5;
    int rank_cutoff = 5;
    int n_dims = 15;
    int k = 4;
    std::uint64_t seed = 0;
    int restarts = 10;
    bool allow_out_of_bounds = false;

    /// "paper-default": D=0.5, R=5, N=15 with K=4.
    static PipelineParams preset(std::string_view name);
};

/// Per-stage seeds, fanned out from the single top-level seed. They do not
/// depend on (D, R, N, K), so a staged run and a sweep cell agree.
std::uint64_t lsa_seed(std::uint64_t seed);
std::uint64_t kmeans_seed(std::uint64_t seed);

SvdOptions svd_options(std::uint64_t seed);
KMeansOptions kmeans_options(std::uint64_t seed, int restarts, int threads = 1);

std::vector<std::optional<std::string>> labels_of(const Corpus& corpus);

struct PipelineResult {
    TermDocMatrix counts;
    TermDocMatrix ablated;
    WeightedMatrix weights;
    EmbeddingMatrix embedding;
    Clustering clustering;
    std::optional<ContingencyTable> table;  // absent when the corpus carries no labels
    std::optional<MetricsReport> metrics;
};

/// counts -> ablate_singletons -> apply_df_threshold -> tfidf ->
/// apply_rank_cutoff -> l2_normalize -> reduce -> kmeans -> evaluate.
PipelineResult run_pipeline(const Corpus& corpus, const PipelineParams& params);

}  // namespace clustinfo

#include "clustinfo/pipeline.hpp"

#include "clustinfo/error.hpp"
#include "clustinfo/random.hpp"

namespace clustinfo {

PipelineParams PipelineParams::preset(std::string_view name) {
    if (name == "paper-default") return PipelineParams{};
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::uint64_t lsa_seed(std::uint64_t seed) { return derive_seed(seed, "lsa"); }
std::uint64_t kmeans_seed(std::uint64_t seed) { return derive_seed(seed, "kmeans"); }

SvdOptions svd_options(std::uint64_t seed) {
    SvdOptions opts;
    opts.seed = lsa_seed(seed);
    return opts;
}

KMeansOptions kmeans_options(std::uint64_t seed, int restarts, int threads) {
    KMeansOptions opts;
    opts.seed = kmeans_seed(seed);
    opts.restarts = restarts;
    opts.threads = threads;
    return opts;
}

std::vector<std::optional<std::string>> labels_of(const Corpus& corpus) {
    std::vector<std::optional<std::string>> labels;
    labels.reserve(corpus.size());
    for (const auto& d : corpus.documents()) labels.push_back(d.label);
    return labels;
}

PipelineResult run_pipeline(const Corpus& corpus, const PipelineParams& params) {
    PipelineResult out;
    out.counts = count_matrix(corpus);
    out.ablated = ablate_singletons(out.counts);
    FeatureParams features;
    features.d_percent = params.d_percent;
    features.rank_cutoff = params.rank_cutoff;
    features.allow_out_of_bounds = params.allow_out_of_bounds;
    out.weights = build_features(out.ablated, features);
    out.embedding = reduce(out.weights, params.n_dims, svd_options(params.seed));
    out.clustering = kmeans(out.embedding, params.k, kmeans_options(params.seed, params.restarts));
    if (!corpus.label_set().empty()) {
        out.table = contingency(out.clustering.assignments, labels_of(corpus));
        out.metrics = metrics(*out.table);
    }
    return out;
}

}  // namespace clustinfo

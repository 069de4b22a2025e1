#include "clustinfo/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "clustinfo/error.hpp"

namespace clustinfo {

namespace {

double xlogx_ratio(double num, double den) {
    // 0 log 0 = 0
    return num > 0.0 ? num * std::log(num / den) : 0.0;
}

}  // namespace

std::vector<std::size_t> ContingencyTable::class_sizes() const {
    std::vector<std::size_t> out(classes.size(), 0);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        for (auto v : counts[c]) out[c] += v;
    }
    return out;
}

std::vector<std::size_t> ContingencyTable::cluster_sizes() const {
    std::vector<std::size_t> out(clusters.size(), 0);
    for (const auto& row : counts) {
        for (std::size_t k = 0; k < row.size(); ++k) out[k] += row[k];
    }
    return out;
}

ContingencyTable contingency(const std::vector<int>& assignments, const std::vector<std::optional<std::string>>& labels) {
    if (assignments.size() != labels.size()) throw PreconditionError("assignments and labels differ in length");

    ContingencyTable t;
    std::set<std::string> classes;
    std::set<int> clusters;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) {
            ++t.unlabeled;
            continue;
        }
        classes.insert(*labels[i]);
        clusters.insert(assignments[i]);
    }
    if (classes.empty()) throw NoLabeledDocuments("no labeled documents to score");

    t.classes.assign(classes.begin(), classes.end());
    t.clusters.assign(clusters.begin(), clusters.end());
    std::map<std::string, std::size_t> class_index;
    std::map<int, std::size_t> cluster_index;
    for (std::size_t i = 0; i < t.classes.size(); ++i) class_index[t.classes[i]] = i;
    for (std::size_t i = 0; i < t.clusters.size(); ++i) cluster_index[t.clusters[i]] = i;

    t.counts.assign(t.classes.size(), std::vector<std::size_t>(t.clusters.size(), 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i]) continue;
        ++t.counts[class_index[*labels[i]]][cluster_index[assignments[i]]];
        ++t.total;
    }
    return t;
}

MetricsReport metrics(const std::vector<std::vector<std::size_t>>& counts) {
    const std::size_t n_classes = counts.size();
    const std::size_t n_clusters = n_classes ? counts.front().size() : 0;
    std::vector<double> class_sum(n_classes, 0.0), cluster_sum(n_clusters, 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (counts[c].size() != n_clusters) throw PreconditionError("ragged contingency table");
        for (std::size_t k = 0; k < n_clusters; ++k) {
            const auto v = static_cast<double>(counts[c][k]);
            class_sum[c] += v;
            cluster_sum[k] += v;
            total += v;
        }
    }
    if (total <= 0.0) throw PreconditionError("contingency table is empty");

    MetricsReport r;
    for (double s : class_sum) r.class_entropy -= xlogx_ratio(s, total) / total;
    for (double s : cluster_sum) r.cluster_entropy -= xlogx_ratio(s, total) / total;
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t k = 0; k < n_clusters; ++k) {
            const auto v = static_cast<double>(counts[c][k]);
            r.class_given_cluster -= xlogx_ratio(v, cluster_sum[k]) / total;
            r.cluster_given_class -= xlogx_ratio(v, class_sum[c]) / total;
        }
    }
    // Clamp tiny negative round-off in the conditional entropies.
    r.class_given_cluster = std::max(0.0, r.class_given_cluster);
    r.cluster_given_class = std::max(0.0, r.cluster_given_class);

    r.homogeneity = r.class_entropy > 0.0 ? 1.0 - r.class_given_cluster / r.class_entropy : 1.0;
    r.completeness = r.cluster_entropy > 0.0 ? 1.0 - r.cluster_given_class / r.cluster_entropy : 1.0;
    r.homogeneity = std::clamp(r.homogeneity, 0.0, 1.0);
    r.completeness = std::clamp(r.completeness, 0.0, 1.0);
    const double sum = r.homogeneity + r.completeness;
    r.v_measure = sum > 0.0 ? 2.0 * r.homogeneity * r.completeness / sum : 0.0;
    return r;
}

MetricsReport metrics(const ContingencyTable& t) { return metrics(t.counts); }

}  // namespace clustinfo

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace clustinfo {

/// Class x cluster counts. Classes sorted, clusters ascending.
struct ContingencyTable {
    std::vector<std::string> classes;
    std::vector<int> clusters;
    std::vector<std::vector<std::size_t>> counts;  // [class][cluster]
    std::size_t total = 0;
    std::size_t unlabeled = 0;  // documents excluded for lack of a label

    std::vector<std::size_t> class_sizes() const;
    std::vector<std::size_t> cluster_sizes() const;
};

struct MetricsReport {
    double homogeneity = 0.0;
    double completeness = 0.0;
    double v_measure = 0.0;
    // Raw entropies in nats, kept for debug output.
    double class_entropy = 0.0;
    double cluster_entropy = 0.0;
    double class_given_cluster = 0.0;
    double cluster_given_class = 0.0;
};

/// Throws PreconditionError on length mismatch and NoLabeledDocuments when
/// every label is missing.
ContingencyTable contingency(const std::vector<int>& assignments, const std::vector<std::optional<std::string>>& labels);

/// Homogeneity, completeness and their harmonic mean. h = 1 when there is a
/// single class, c = 1 when there is a single cluster.
MetricsReport metrics(const ContingencyTable& t);

/// Row-major counts convenience overload: counts[class][cluster].
MetricsReport metrics(const std::vector<std::vector<std::size_t>>& counts);

}  // namespace clustinfo

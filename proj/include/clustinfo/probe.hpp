#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clustinfo/cluster.hpp"
#include "clustinfo/corpus.hpp"

namespace clustinfo {

struct GeneEntry {
    std::string symbol;
    std::vector<std::string> aliases;
    std::string description;

    bool operator==(const GeneEntry&) const = default;
};

/// Gene lexicon with unique symbols and non-overlapping aliases. Match keys
/// are lowercase single tokens; aliases under three characters never match.
class GeneDictionary {
public:
    /// Deduplicates: a repeated symbol drops the later entry, an alias that
    /// collides with an earlier entry's symbol or alias is dropped from the
    /// later entry. Each drop is recorded in warnings(). Throws
    /// EmptyDictionary when no entries remain.
    static GeneDictionary from_entries(std::vector<GeneEntry> entries);

    const std::vector<GeneEntry>& entries() const noexcept { return entries_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Lowercase token keys matched for entry i (symbol first).
    const std::vector<std::string>& match_keys(std::size_t i) const { return keys_[i]; }

private:
    std::vector<GeneEntry> entries_;
    std::vector<std::vector<std::string>> keys_;
    std::vector<std::string> warnings_;
};

/// JSON array of {"symbol", "aliases", "description"}.
GeneDictionary load_dictionary(const std::filesystem::path& path);
GeneDictionary parse_dictionary(std::string_view json_text);
nlohmann::json dictionary_to_json(const GeneDictionary& dict);

enum class ProbeMode { Gene, Molecular };
ProbeMode parse_probe_mode(std::string_view name);
std::string_view to_string(ProbeMode mode);

/// Document to cluster mapping, as read from an assignments TSV.
struct ClusterAssignment {
    std::vector<std::string> doc_ids;
    std::vector<int> clusters;
    int k = 0;

    static ClusterAssignment from_clustering(const std::vector<std::string>& docs, const Clustering& c);
};

ClusterAssignment read_assignments(std::istream& in);

/// Raw tallies: entity counts per cluster (G_k or M_k), their totals and the
/// per-cluster document counts D_k.
struct ProbeCounts {
    ProbeMode mode = ProbeMode::Gene;
    std::vector<std::string> entities;  // match identity: symbol, or normalized description
    std::vector<std::string> labels;    // display text
    std::vector<std::vector<std::int64_t>> counts;  // [entity][cluster]
    std::vector<std::int64_t> global;               // [entity]
    std::vector<std::int64_t> docs_per_cluster;     // D_k
    std::int64_t total_docs = 0;                    // D_total
};

/// Gene mode counts every token equal to a symbol or alias key. Molecular
/// mode counts documents whose normalized text contains the normalized
/// description, at most once per document.
ProbeCounts count_occurrences(const Corpus& corpus, const ClusterAssignment& assignment, const GeneDictionary& dict,
                              ProbeMode mode, int threads = 1);

struct EntityWeight {
    std::string entity;
    std::string label;
    std::int64_t count = 0;
    double relative_weight = 0.0;
};

struct ProbeReport {
    ProbeMode mode = ProbeMode::Gene;
    std::vector<std::vector<EntityWeight>> clusters;  // sorted by weight desc, entity asc
    std::vector<std::pair<std::string, std::int64_t>> globals;
    std::vector<std::int64_t> docs_per_cluster;
    std::int64_t total_docs = 0;
};

/// count_k - global * D_k / D_total for every entity with a nonzero total.
ProbeReport relative_weights(const ProbeCounts& counts);
nlohmann::json report_to_json(const ProbeReport& report);

struct NetworkNode {
    std::string id;
    std::string kind;  // "cluster" or "entity"
    std::string label;
};

struct NetworkEdge {
    std::string source;
    std::string target;
    double weight = 0.0;
};

struct Network {
    std::vector<NetworkNode> nodes;
    std::vector<NetworkEdge> edges;
    /// Clusters whose top_n had to include non-positive weights.
    std::vector<int> underfilled_clusters;

    std::size_t degree(std::string_view node_id) const;
};

/// Top `top_n` entities per cluster by relative weight (ties by entity).
/// Positive weights rank first; a cluster with fewer positive entities is
/// filled with its best non-positive ones and flagged as underfilled.
Network build_network(const ProbeReport& report, std::size_t top_n = 5);

enum class NetworkFormat { GraphML, Dot, Json };
NetworkFormat parse_network_format(std::string_view name);
std::string_view extension(NetworkFormat format);

std::string export_network(const Network& net, NetworkFormat format);

}  // namespace clustinfo

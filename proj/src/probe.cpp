#include "clustinfo/probe.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <istream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "clustinfo/error.hpp"

namespace clustinfo {

namespace {

std::string normalize_key(std::string_view s) { return to_lower(normalize_whitespace(s)); }

std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

/// True when `key` survives tokenization unchanged as a single token.
bool is_single_token(const std::string& key) {
    const auto toks = tokenize(key);
    return toks.size() == 1 && toks.front() == key;
}

/// Multi-pattern substring search over bytes.
class AhoCorasick {
public:
    explicit AhoCorasick(const std::vector<std::string>& patterns) {
        nodes_.emplace_back();
        for (std::size_t p = 0; p < patterns.size(); ++p) {
            if (patterns[p].empty()) continue;
            int cur = 0;
            for (unsigned char c : patterns[p]) {
                auto it = nodes_[cur].next.find(c);
                if (it == nodes_[cur].next.end()) {
                    nodes_[cur].next.emplace(c, static_cast<int>(nodes_.size()));
                    cur = static_cast<int>(nodes_.size());
                    nodes_.emplace_back();
                } else {
                    cur = it->second;
                }
            }
            nodes_[cur].out.push_back(p);
        }
        // Breadth-first failure links; `dict` points at the nearest suffix with output.
        std::queue<int> todo;
        for (const auto& [c, child] : nodes_[0].next) {
            nodes_[child].fail = 0;
            todo.push(child);
        }
        while (!todo.empty()) {
            const int u = todo.front();
            todo.pop();
            for (const auto& [c, v] : nodes_[u].next) {
                int f = nodes_[u].fail;
                while (f != 0 && !nodes_[f].next.count(c)) f = nodes_[f].fail;
                auto it = nodes_[f].next.find(c);
                nodes_[v].fail = (it != nodes_[f].next.end() && it->second != v) ? it->second : 0;
                const int fv = nodes_[v].fail;
                nodes_[v].dict = nodes_[fv].out.empty() ? nodes_[fv].dict : fv;
                todo.push(v);
            }
        }
    }

    /// Calls hit(pattern_index) for every occurrence in `text`.
    template <typename Hit>
    void scan(std::string_view text, Hit&& hit) const {
        int cur = 0;
        for (unsigned char c : text) {
            while (cur != 0 && !nodes_[cur].next.count(c)) cur = nodes_[cur].fail;
            auto it = nodes_[cur].next.find(c);
            cur = it == nodes_[cur].next.end() ? 0 : it->second;
            for (int n = cur; n > 0; n = nodes_[n].dict) {
                for (auto p : nodes_[n].out) hit(p);
            }
        }
    }

private:
    struct Node {
        std::map<unsigned char, int> next;
        std::vector<std::size_t> out;
        int fail = 0;
        int dict = 0;
    };
    std::vector<Node> nodes_;
};

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out;
}

std::string format_weight(double w) { return fmt::format("{}", w); }

std::string cluster_node_id(std::size_t k) { return fmt::format("cluster:{}", k); }

}  // namespace

// ---------------------------------------------------------------------------
// Dictionary

GeneDictionary GeneDictionary::from_entries(std::vector<GeneEntry> entries) {
    GeneDictionary dict;
    std::map<std::string, std::string> owner;  // normalized name -> symbol that claimed it
    for (auto& e : entries) {
        const auto sym_key = normalize_key(e.symbol);
        if (sym_key.empty()) {
            dict.warnings_.push_back("entry with empty symbol dropped");
            continue;
        }
        if (auto it = owner.find(sym_key); it != owner.end()) {
            dict.warnings_.push_back(fmt::format("symbol '{}' already claimed by '{}'; entry dropped", e.symbol, it->second));
            continue;
        }
        GeneEntry kept{e.symbol, {}, normalize_whitespace(e.description)};
        std::set<std::string> own{sym_key};
        for (const auto& alias : e.aliases) {
            const auto key = normalize_key(alias);
            if (key.empty() || own.count(key)) continue;
            if (auto it = owner.find(key); it != owner.end()) {
                dict.warnings_.push_back(
                    fmt::format("alias '{}' of '{}' already claimed by '{}'; alias dropped", alias, e.symbol, it->second));
                continue;
            }
            own.insert(key);
            kept.aliases.push_back(normalize_whitespace(alias));
        }
        for (const auto& key : own) owner.emplace(key, e.symbol);

        std::vector<std::string> keys;
        if (is_single_token(sym_key)) {
            keys.push_back(sym_key);
        } else {
            dict.warnings_.push_back(fmt::format("symbol '{}' is not a single token and cannot be matched", e.symbol));
        }
        for (const auto& alias : kept.aliases) {
            const auto key = normalize_key(alias);
            if (code_points(key) < 3 || !is_single_token(key)) continue;
            keys.push_back(key);
        }
        dict.entries_.push_back(std::move(kept));
        dict.keys_.push_back(std::move(keys));
    }
    if (dict.entries_.empty()) throw EmptyDictionary("gene dictionary has no usable entries");
    return dict;
}

GeneDictionary parse_dictionary(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("dictionary: ") + e.what());
    }
    if (!j.is_array()) throw ParseError("dictionary: expected a JSON array of entries");
    std::vector<GeneEntry> entries;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& rec = j[i];
        try {
            GeneEntry e;
            e.symbol = rec.at("symbol").get<std::string>();
            if (rec.contains("aliases") && !rec.at("aliases").is_null()) e.aliases = rec.at("aliases").get<std::vector<std::string>>();
            if (rec.contains("description") && !rec.at("description").is_null()) e.description = rec.at("description").get<std::string>();
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(fmt::format("dictionary entry {}: {}", i, e.what()));
        }
    }
    return GeneDictionary::from_entries(std::move(entries));
}

GeneDictionary load_dictionary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open dictionary " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dictionary(buf.str());
}

nlohmann::json dictionary_to_json(const GeneDictionary& dict) {
    auto out = nlohmann::json::array();
    for (const auto& e : dict.entries()) {
        out.push_back({{"symbol", e.symbol}, {"aliases", e.aliases}, {"description", e.description}});
    }
    return out;
}

ProbeMode parse_probe_mode(std::string_view name) {
    if (name == "gene") return ProbeMode::Gene;
    if (name == "molecular") return ProbeMode::Molecular;
    throw ConfigError("unknown probe mode '" + std::string(name) + "'");
}

std::string_view to_string(ProbeMode mode) { return mode == ProbeMode::Gene ? "gene" : "molecular"; }

// ---------------------------------------------------------------------------
// Counting

ClusterAssignment ClusterAssignment::from_clustering(const std::vector<std::string>& docs, const Clustering& c) {
    return {docs, c.assignments, c.k};
}

ClusterAssignment read_assignments(std::istream& in) {
    ClusterAssignment a;
    std::string line;
    std::size_t line_no = 0;
    int max_cluster = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(fmt::format("assignments line {}: expected doc_id<TAB>cluster", line_no));
        int cluster;
        try {
            std::size_t used = 0;
            cluster = std::stoi(line.substr(tab + 1), &used);
            if (used != line.size() - tab - 1 || cluster < 0) throw std::invalid_argument("cluster");
        } catch (const std::exception&) {
            throw ParseError(fmt::format("assignments line {}: invalid cluster index", line_no));
        }
        a.doc_ids.push_back(line.substr(0, tab));
        a.clusters.push_back(cluster);
        max_cluster = std::max(max_cluster, cluster);
    }
    a.k = max_cluster + 1;
    return a;
}

ProbeCounts count_occurrences(const Corpus& corpus, const ClusterAssignment& assignment, const GeneDictionary& dict,
                              ProbeMode mode, int threads) {
    std::unordered_map<std::string, int> cluster_of;
    for (std::size_t i = 0; i < assignment.doc_ids.size(); ++i) {
        const int c = assignment.clusters[i];
        if (c < 0 || c >= assignment.k) throw PreconditionError(fmt::format("cluster index {} outside [0, {})", c, assignment.k));
        cluster_of[assignment.doc_ids[i]] = c;
    }
    std::vector<int> doc_cluster(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        auto it = cluster_of.find(corpus[d].id);
        if (it == cluster_of.end()) throw PreconditionError("document '" + corpus[d].id + "' has no cluster assignment");
        doc_cluster[d] = it->second;
    }

    ProbeCounts out;
    out.mode = mode;
    const auto k = static_cast<std::size_t>(assignment.k);
    out.docs_per_cluster.assign(k, 0);
    for (int c : doc_cluster) ++out.docs_per_cluster[static_cast<std::size_t>(c)];
    out.total_docs = static_cast<std::int64_t>(corpus.size());

    // Per-document hits, merged in document order afterwards.
    std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> hits(corpus.size());

    if (mode == ProbeMode::Gene) {
        std::unordered_map<std::string, std::size_t> key_to_entity;
        for (std::size_t e = 0; e < dict.size(); ++e) {
            out.entities.push_back(dict.entries()[e].symbol);
            out.labels.push_back(dict.entries()[e].symbol);
            for (const auto& key : dict.match_keys(e)) key_to_entity.emplace(key, e);
        }
        parallel_for(corpus.size(), threads, [&](std::size_t d) {
            std::map<std::size_t, std::int64_t> local;
            for (const auto& tok : tokenize(corpus[d].text)) {
                if (auto it = key_to_entity.find(tok); it != key_to_entity.end()) ++local[it->second];
            }
            hits[d].assign(local.begin(), local.end());
        });
    } else {
        std::map<std::string, std::size_t> phrase_index;
        for (const auto& e : dict.entries()) {
            const auto phrase = normalize_key(e.description);
            if (phrase.empty() || phrase_index.count(phrase)) continue;
            phrase_index.emplace(phrase, out.entities.size());
            out.entities.push_back(phrase);
            out.labels.push_back(e.description);
        }
        const AhoCorasick matcher(out.entities);
        parallel_for(corpus.size(), threads, [&](std::size_t d) {
            std::set<std::size_t> seen;
            matcher.scan(normalize_key(corpus[d].text), [&](std::size_t p) { seen.insert(p); });
            for (auto p : seen) hits[d].emplace_back(p, 1);
        });
    }

    out.counts.assign(out.entities.size(), std::vector<std::int64_t>(k, 0));
    out.global.assign(out.entities.size(), 0);
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (const auto& [e, n] : hits[d]) {
            out.counts[e][static_cast<std::size_t>(doc_cluster[d])] += n;
            out.global[e] += n;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Weights and network

ProbeReport relative_weights(const ProbeCounts& counts) {
    if (counts.total_docs <= 0) throw PreconditionError("relative weights need at least one document");
    ProbeReport r;
    r.mode = counts.mode;
    r.docs_per_cluster = counts.docs_per_cluster;
    r.total_docs = counts.total_docs;
    r.clusters.resize(counts.docs_per_cluster.size());
    const auto total = static_cast<double>(counts.total_docs);
    for (std::size_t e = 0; e < counts.entities.size(); ++e) {
        if (counts.global[e] == 0) continue;
        r.globals.emplace_back(counts.entities[e], counts.global[e]);
        const auto global = static_cast<double>(counts.global[e]);
        for (std::size_t c = 0; c < r.clusters.size(); ++c) {
            const double expected = global * static_cast<double>(counts.docs_per_cluster[c]) / total;
            r.clusters[c].push_back({counts.entities[e], counts.labels[e], counts.counts[e][c],
                                     static_cast<double>(counts.counts[e][c]) - expected});
        }
    }
    for (auto& list : r.clusters) {
        std::sort(list.begin(), list.end(), [](const EntityWeight& a, const EntityWeight& b) {
            if (a.relative_weight != b.relative_weight) return a.relative_weight > b.relative_weight;
            return a.entity < b.entity;
        });
    }
    std::sort(r.globals.begin(), r.globals.end());
    return r;
}

nlohmann::json report_to_json(const ProbeReport& report) {
    nlohmann::json j;
    j["mode"] = std::string(to_string(report.mode));
    j["total_docs"] = report.total_docs;
    j["docs_per_cluster"] = report.docs_per_cluster;
    auto globals = nlohmann::json::object();
    for (const auto& [entity, n] : report.globals) globals[entity] = n;
    j["globals"] = globals;
    auto clusters = nlohmann::json::array();
    for (std::size_t c = 0; c < report.clusters.size(); ++c) {
        auto items = nlohmann::json::array();
        for (const auto& w : report.clusters[c]) {
            items.push_back({{"entity", w.entity}, {"label", w.label}, {"count", w.count}, {"relative_weight", w.relative_weight}});
        }
        clusters.push_back({{"cluster", c}, {"entities", items}});
    }
    j["clusters"] = clusters;
    return j;
}

std::size_t Network::degree(std::string_view node_id) const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [&](const NetworkEdge& e) {
        return e.source == node_id || e.target == node_id;
    }));
}

Network build_network(const ProbeReport& report, std::size_t top_n) {
    Network net;
    std::map<std::string, std::string> entity_nodes;  // id -> label, sorted by id
    for (std::size_t c = 0; c < report.clusters.size(); ++c) {
        net.nodes.push_back({cluster_node_id(c), "cluster", fmt::format("Cluster {}", c)});
        const auto& ranked = report.clusters[c];
        const std::size_t n = std::min(top_n, ranked.size());
        bool underfilled = false;
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = "entity:" + ranked[i].entity;
            entity_nodes.emplace(id, ranked[i].label);
            net.edges.push_back({cluster_node_id(c), id, ranked[i].relative_weight});
            underfilled = underfilled || ranked[i].relative_weight <= 0.0;
        }
        if (underfilled || n < top_n) net.underfilled_clusters.push_back(static_cast<int>(c));
    }
    for (const auto& [id, label] : entity_nodes) net.nodes.push_back({id, "entity", label});
    return net;
}

NetworkFormat parse_network_format(std::string_view name) {
    if (name == "graphml") return NetworkFormat::GraphML;
    if (name == "dot") return NetworkFormat::Dot;
    if (name == "json") return NetworkFormat::Json;
    throw ConfigError("unknown network format '" + std::string(name) + "'");
}

std::string_view extension(NetworkFormat format) {
    switch (format) {
        case NetworkFormat::GraphML: return "graphml";
        case NetworkFormat::Dot: return "dot";
        case NetworkFormat::Json: return "json";
    }
    return "";
}

std::string export_network(const Network& net, NetworkFormat format) {
    std::string out;
    switch (format) {
        case NetworkFormat::GraphML:
            out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
            out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
            out += "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n";
            out += "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n";
            out += "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
            out += "  <graph id=\"network\" edgedefault=\"undirected\">\n";
            for (const auto& n : net.nodes) {
                out += fmt::format("    <node id=\"{}\"><data key=\"kind\">{}</data><data key=\"label\">{}</data></node>\n",
                                   xml_escape(n.id), xml_escape(n.kind), xml_escape(n.label));
            }
            for (const auto& e : net.edges) {
                out += fmt::format("    <edge source=\"{}\" target=\"{}\"><data key=\"weight\">{}</data></edge>\n",
                                   xml_escape(e.source), xml_escape(e.target), format_weight(e.weight));
            }
            out += "  </graph>\n</graphml>\n";
            break;
        case NetworkFormat::Dot:
            out += "graph network {\n";
            for (const auto& n : net.nodes) {
                out += fmt::format("  \"{}\" [kind=\"{}\", label=\"{}\"];\n", dot_escape(n.id), dot_escape(n.kind),
                                   dot_escape(n.label));
            }
            for (const auto& e : net.edges) {
                out += fmt::format("  \"{}\" -- \"{}\" [weight={}];\n", dot_escape(e.source), dot_escape(e.target),
                                   format_weight(e.weight));
            }
            out += "}\n";
            break;
        case NetworkFormat::Json: {
            nlohmann::ordered_json j;
            j["directed"] = false;
            j["multigraph"] = false;
            j["nodes"] = nlohmann::ordered_json::array();
            for (const auto& n : net.nodes) j["nodes"].push_back({{"id", n.id}, {"kind", n.kind}, {"label", n.label}});
            j["links"] = nlohmann::ordered_json::array();
            for (const auto& e : net.edges) {
                j["links"].push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
            }
            out = j.dump(2) + "\n";
            break;
        }
    }
    return out;
}

}  // namespace clustinfo

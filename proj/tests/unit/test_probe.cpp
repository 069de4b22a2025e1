#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "clustinfo/error.hpp"
#include "clustinfo/probe.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace clustinfo;

namespace {

GeneDictionary small_dictionary() {
    return GeneDictionary::from_entries({
        {"BRCA1", {"brca-1", "BR"}, "DNA repair associated"},
        {"TP53", {"p53"}, "tumor protein p53"},
        {"ERBB2", {"HER2", "HER-2/neu"}, "receptor tyrosine kinase"},
    });
}

/// Three clusters with hand-placed mentions; tallies are written out below.
struct HandFixture {
    Corpus corpus;
    ClusterAssignment assignment;
};

HandFixture hand_fixture() {
    HandFixture f;
    f.corpus = Corpus::from_documents({
        {"d1", "BRCA1 and brca1 with BRCA-1 loss. DNA repair associated, dna  Repair associated.", std::nullopt},
        {"d2", "p53 signaling, TP53 status; br", std::nullopt},
        {"d3", "HER2 amplified, ERBB2 high. Receptor Tyrosine Kinase", std::nullopt},
        {"d4", "nothing here", std::nullopt},
        {"d5", "her2 HER2 p53", std::nullopt},
    });
    f.assignment = {{"d1", "d2", "d3", "d4", "d5"}, {0, 0, 1, 2, 2}, 3};
    return f;
}

ProbeReport report_from(std::vector<std::string> entities, std::vector<std::vector<std::int64_t>> counts,
                        std::vector<std::int64_t> docs_per_cluster) {
    ProbeCounts c;
    c.entities = entities;
    c.labels = entities;
    c.counts = counts;
    c.docs_per_cluster = docs_per_cluster;
    for (const auto& row : counts) {
        std::int64_t g = 0;
        for (auto v : row) g += v;
        c.global.push_back(g);
    }
    for (auto d : docs_per_cluster) c.total_docs += d;
    return relative_weights(c);
}

std::set<std::string> node_ids(const Network& n) {
    std::set<std::string> out;
    for (const auto& node : n.nodes) out.insert(node.id);
    return out;
}

std::set<std::tuple<std::string, std::string, double>> edge_set(const Network& n) {
    std::set<std::tuple<std::string, std::string, double>> out;
    for (const auto& e : n.edges) out.emplace(e.source, e.target, std::round(e.weight * 1e9) / 1e9);
    return out;
}

Network two_node_network() {
    Network n;
    n.nodes = {{"cluster:0", "cluster", "Cluster 0"}, {"entity:TP53", "entity", "TP53"}};
    n.edges = {{"cluster:0", "entity:TP53", 2.5}};
    return n;
}

}  // namespace

TEST_SUITE("probe") {

TEST_CASE("dictionary match keys") {
    const auto d = GeneDictionary::from_entries({{"BRCA1", {"brca-1"}, "DNA repair"}});
    REQUIRE(d.size() == 1);
    CHECK(d.match_keys(0) == std::vector<std::string>{"brca1", "brca-1"});
    CHECK(d.warnings().empty());
}

TEST_CASE("dictionary deduplication keeps the first claim") {
    const auto d = GeneDictionary::from_entries({
        {"TP53", {"p53", "LFS1"}, "tumor protein p53"},
        {"TP63", {"p53", "KET"}, "tumor protein p63"},
        {"tp53", {}, "duplicate symbol"},
        {"XYZ", {"TP63"}, "alias equal to another symbol"},
    });
    REQUIRE(d.size() == 3);
    CHECK(d.entries()[1].symbol == "TP63");
    CHECK(d.entries()[1].aliases == std::vector<std::string>{"KET"});
    CHECK(d.entries()[2].aliases.empty());
    CHECK(d.warnings().size() == 3);
    CHECK(d.match_keys(1) == std::vector<std::string>{"tp63", "ket"});
}

TEST_CASE("short and multi-token aliases never match") {
    const auto d = small_dictionary();
    CHECK(d.match_keys(0) == std::vector<std::string>{"brca1", "brca-1"});
    CHECK(d.match_keys(2) == std::vector<std::string>{"erbb2", "her2"});
    CHECK(d.entries()[0].aliases == std::vector<std::string>{"brca-1", "BR"});
}

TEST_CASE("dictionary json parsing and errors") {
    const auto d = parse_dictionary(R"([{"symbol":"ESR1","aliases":["NR3A1"],"description":"estrogen receptor 1"},
                                        {"symbol":"PGR"}])");
    CHECK(d.size() == 2);
    CHECK(d.entries()[1].description.empty());
    CHECK(dictionary_to_json(d)[0]["aliases"][0] == "NR3A1");
    CHECK_THROWS_AS(parse_dictionary("{}"), ParseError);
    CHECK_THROWS_AS(parse_dictionary("[{\"aliases\":[]}]"), ParseError);
    CHECK_THROWS_AS(parse_dictionary("[oops"), ParseError);
    CHECK_THROWS_AS(parse_dictionary("[]"), EmptyDictionary);
    CHECK_THROWS_AS(parse_dictionary(R"([{"symbol":"  "}])"), EmptyDictionary);
    CHECK_THROWS_AS(load_dictionary("/nonexistent/dict.json"), ConfigError);
}

TEST_CASE("gene counts match the hand tally") {
    const auto f = hand_fixture();
    const auto c = count_occurrences(f.corpus, f.assignment, small_dictionary(), ProbeMode::Gene);
    CHECK(c.entities == std::vector<std::string>{"BRCA1", "TP53", "ERBB2"});
    CHECK(c.counts[0] == std::vector<std::int64_t>{3, 0, 0});
    CHECK(c.counts[1] == std::vector<std::int64_t>{2, 0, 1});
    CHECK(c.counts[2] == std::vector<std::int64_t>{0, 2, 2});
    CHECK(c.global == std::vector<std::int64_t>{3, 3, 4});
    CHECK(c.docs_per_cluster == std::vector<std::int64_t>{2, 1, 2});
    CHECK(c.total_docs == 5);
}

TEST_CASE("molecular counts are per document") {
    const auto f = hand_fixture();
    const auto c = count_occurrences(f.corpus, f.assignment, small_dictionary(), ProbeMode::Molecular);
    CHECK(c.entities == std::vector<std::string>{"dna repair associated", "tumor protein p53", "receptor tyrosine kinase"});
    CHECK(c.counts[0] == std::vector<std::int64_t>{1, 0, 0});
    CHECK(c.counts[1] == std::vector<std::int64_t>{0, 0, 0});
    CHECK(c.counts[2] == std::vector<std::int64_t>{0, 1, 0});

    const auto r = relative_weights(c);
    CHECK(r.globals.size() == 2);
    for (const auto& list : r.clusters) CHECK(list.size() == 2);
}

TEST_CASE("absent genes count zero and are omitted from the report") {
    const auto f = hand_fixture();
    const auto dict = GeneDictionary::from_entries({{"MYC", {}, "absent"}, {"TP53", {}, ""}});
    const auto c = count_occurrences(f.corpus, f.assignment, dict, ProbeMode::Gene);
    CHECK(c.global[0] == 0);
    CHECK(c.counts[0] == std::vector<std::int64_t>{0, 0, 0});
    const auto r = relative_weights(c);
    REQUIRE(r.globals.size() == 1);
    CHECK(r.globals[0].first == "TP53");
}

TEST_CASE("counting does not depend on assignment order or threads") {
    const auto corpus = testing::planted_corpus(3);
    const auto dict = GeneDictionary::from_entries(testing::planted_dictionary_entries());
    ClusterAssignment a;
    a.k = 4;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        a.doc_ids.push_back(corpus[i].id);
        a.clusters.push_back(static_cast<int>(i % 4));
    }
    ClusterAssignment reversed = a;
    std::reverse(reversed.doc_ids.begin(), reversed.doc_ids.end());
    std::reverse(reversed.clusters.begin(), reversed.clusters.end());
    for (auto mode : {ProbeMode::Gene, ProbeMode::Molecular}) {
        const auto base = count_occurrences(corpus, a, dict, mode, 1);
        const auto rev = count_occurrences(corpus, reversed, dict, mode, 1);
        const auto par = count_occurrences(corpus, a, dict, mode, 4);
        CHECK(base.counts == rev.counts);
        CHECK(base.counts == par.counts);
        CHECK(base.global == par.global);
    }
}

TEST_CASE("assignment errors") {
    const auto f = hand_fixture();
    auto missing = f.assignment;
    missing.doc_ids.pop_back();
    missing.clusters.pop_back();
    CHECK_THROWS_AS(count_occurrences(f.corpus, missing, small_dictionary(), ProbeMode::Gene), PreconditionError);

    std::istringstream good("d1\t0\nd2\t2\n\n");
    const auto a = read_assignments(good);
    CHECK(a.k == 3);
    CHECK(a.doc_ids == std::vector<std::string>{"d1", "d2"});
    std::istringstream bad("d1 0\n");
    CHECK_THROWS_AS(read_assignments(bad), ParseError);
    std::istringstream negative("d1\t-1\n");
    CHECK_THROWS_AS(read_assignments(negative), ParseError);
    std::istringstream junk("d1\t1x\n");
    CHECK_THROWS_AS(read_assignments(junk), ParseError);
}

TEST_CASE("relative weight formula") {
    const auto proportional = report_from({"g"}, {{10, 10}}, {50, 50});
    CHECK(proportional.clusters[0][0].relative_weight == 0.0);

    const auto skewed = report_from({"g"}, {{15, 5}}, {50, 50});
    CHECK(skewed.clusters[0][0].relative_weight == 5.0);
    CHECK(skewed.clusters[1][0].relative_weight == -5.0);
    CHECK(skewed.globals == std::vector<std::pair<std::string, std::int64_t>>{{"g", 20}});
}

TEST_CASE("zero-sum identity on random counts") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + rng.below(8);
        const std::size_t n = 1 + rng.below(20);
        std::vector<std::int64_t> docs(k);
        for (auto& d : docs) d = static_cast<std::int64_t>(1 + rng.below(300));
        std::vector<std::string> names;
        std::vector<std::vector<std::int64_t>> counts(n, std::vector<std::int64_t>(k));
        for (std::size_t e = 0; e < n; ++e) {
            names.push_back(fmt::format("e{}", e));
            for (auto& v : counts[e]) v = static_cast<std::int64_t>(rng.below(1000));
        }
        const auto r = report_from(names, counts, docs);
        std::map<std::string, double> sums;
        for (const auto& list : r.clusters)
            for (const auto& w : list) sums[w.entity] += w.relative_weight;
        for (const auto& [e, s] : sums) CHECK(std::abs(s) <= 1e-9);
    }
}

TEST_CASE("report lists are ranked by weight then entity") {
    const auto r = report_from({"b", "a", "c"}, {{2, 0}, {2, 0}, {3, 1}}, {1, 1});
    const auto& c0 = r.clusters[0];
    CHECK(c0[0].entity == "a");
    CHECK(c0[1].entity == "b");
    CHECK(c0[2].entity == "c");
    const auto j = report_to_json(r);
    CHECK(j["clusters"][0]["entities"][0]["entity"] == "a");
    CHECK(j["globals"]["c"] == 4);
}

TEST_CASE("network from a hand-built report") {
    const auto r = report_from({"A", "B", "C", "D"}, {{5, 1}, {0, 4}, {3, 2}, {0, 0}}, {6, 4});
    const auto top1 = build_network(r, 1);
    CHECK(node_ids(top1) == std::set<std::string>{"cluster:0", "cluster:1", "entity:A", "entity:B"});
    CHECK(edge_set(top1) == std::set<std::tuple<std::string, std::string, double>>{{"cluster:0", "entity:A", 1.4},
                                                                                   {"cluster:1", "entity:B", 2.4}});
    CHECK(top1.underfilled_clusters.empty());
    CHECK(top1.nodes[0].kind == "cluster");

    const auto top2 = build_network(r, 2);
    CHECK(node_ids(top2) == std::set<std::string>{"cluster:0", "cluster:1", "entity:A", "entity:B", "entity:C"});
    CHECK(top2.degree("entity:C") == 2);
    CHECK(top2.underfilled_clusters == std::vector<int>{0, 1});
}

TEST_CASE("one cluster with seven entities keeps the top five") {
    std::vector<std::string> names;
    std::vector<std::vector<std::int64_t>> counts;
    for (int i = 0; i < 7; ++i) {
        names.push_back(fmt::format("g{}", i));
        counts.push_back({i + 1});
    }
    const auto net = build_network(report_from(names, counts, {4}), 5);
    CHECK(net.nodes.size() == 6);
    CHECK(net.edges.size() == 5);
    CHECK(net.degree("cluster:0") == 5);
    CHECK(net.degree("entity:g0") == 1);
    CHECK(net.degree("entity:g5") == 0);
    // A single cluster has nothing to contrast with, so every weight is 0.
    CHECK(net.underfilled_clusters == std::vector<int>{0});
}

TEST_CASE("top five has five edges when five positive entities exist") {
    std::vector<std::string> names;
    std::vector<std::vector<std::int64_t>> counts;
    for (int i = 0; i < 7; ++i) {
        names.push_back(fmt::format("g{}", i));
        counts.push_back({i + 1, 0});
    }
    const auto net = build_network(report_from(names, counts, {1, 1}), 5);
    std::size_t cluster0 = 0;
    for (const auto& e : net.edges) {
        if (e.source != "cluster:0") continue;
        ++cluster0;
        CHECK(e.weight > 0.0);
    }
    CHECK(cluster0 == 5);
    CHECK(net.degree("entity:g6") == 1);
    CHECK(net.degree("entity:g2") == 2);
    CHECK(net.underfilled_clusters == std::vector<int>{1});
}

TEST_CASE("shared top entity has degree two") {
    const auto net = build_network(report_from({"tp53", "x", "y"}, {{5, 5, 0}, {3, 0, 0}, {0, 3, 0}}, {1, 1, 10}), 1);
    CHECK(net.degree("entity:tp53") == 2);
    std::size_t entity_nodes = 0;
    for (const auto& n : net.nodes) entity_nodes += n.kind == "entity";
    // Cluster 2 has no positive entity; its fill pick is x (tie with y, broken by name).
    CHECK(entity_nodes == 2);
    CHECK(net.degree("entity:x") == 1);
    CHECK(net.underfilled_clusters == std::vector<int>{2});
}

TEST_CASE("network is idempotent and exports are stable") {
    const auto r = report_from({"A", "B", "C"}, {{5, 1}, {0, 4}, {3, 2}}, {6, 4});
    const auto a = build_network(r, 2);
    const auto b = build_network(r, 2);
    for (auto f : {NetworkFormat::GraphML, NetworkFormat::Dot, NetworkFormat::Json})
        CHECK(export_network(a, f) == export_network(b, f));
}

TEST_CASE("two node network matches the golden files") {
    const auto net = two_node_network();
    CHECK(export_network(net, NetworkFormat::GraphML) == testing::slurp(CLUSTINFO_GOLDEN "/network_2node.graphml"));
    CHECK(export_network(net, NetworkFormat::Dot) == testing::slurp(CLUSTINFO_GOLDEN "/network_2node.dot"));
    CHECK(export_network(net, NetworkFormat::Json) == testing::slurp(CLUSTINFO_GOLDEN "/network_2node.json"));
}

TEST_CASE("graphml is well formed, including the empty network") {
    Network tricky = two_node_network();
    tricky.nodes[1].label = "A&B <\"x\">";
    for (const auto& net : {Network{}, tricky}) {
        std::istringstream in(export_network(net, NetworkFormat::GraphML));
        boost::property_tree::ptree tree;
        CHECK_NOTHROW(boost::property_tree::read_xml(in, tree));
        CHECK(tree.get_child_optional("graphml.graph").has_value());
    }
    std::istringstream in(export_network(tricky, NetworkFormat::GraphML));
    boost::property_tree::ptree tree;
    boost::property_tree::read_xml(in, tree);
    std::vector<std::string> labels;
    for (const auto& [key, node] : tree.get_child("graphml.graph")) {
        if (key != "node") continue;
        for (const auto& [dk, data] : node)
            if (dk == "data" && data.get<std::string>("<xmlattr>.key") == "label") labels.push_back(data.data());
    }
    CHECK(labels == std::vector<std::string>{"Cluster 0", "A&B <\"x\">"});

    const auto empty_json = nlohmann::json::parse(export_network(Network{}, NetworkFormat::Json));
    CHECK(empty_json["nodes"].empty());
    CHECK(export_network(Network{}, NetworkFormat::Dot) == "graph network {\n}\n");
}

TEST_CASE("format and mode names") {
    CHECK(parse_network_format("graphml") == NetworkFormat::GraphML);
    CHECK(extension(parse_network_format("dot")) == "dot");
    CHECK_THROWS_AS(parse_network_format("gexf"), ConfigError);
    CHECK(parse_probe_mode("molecular") == ProbeMode::Molecular);
    CHECK(to_string(ProbeMode::Gene) == "gene");
    CHECK_THROWS_AS(parse_probe_mode("protein"), ConfigError);
}

}

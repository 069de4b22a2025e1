#include "clustinfo/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "clustinfo/cluster.hpp"
#include "clustinfo/corpus.hpp"
#include "clustinfo/error.hpp"
#include "clustinfo/evaluate.hpp"
#include "clustinfo/lsa.hpp"
#include "clustinfo/ncbi.hpp"
#include "clustinfo/pipeline.hpp"
#include "clustinfo/probe.hpp"
#include "clustinfo/random.hpp"
#include "clustinfo/sweep.hpp"
#include "clustinfo/vectorize.hpp"

namespace clustinfo {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
    std::string corpus;
    std::string format;
    std::vector<std::string> class_priority;
    std::string preset;
    double d = 0.5;
    int r = 5;
    int n_dims = 15;
    int k = 4;
    std::uint64_t seed = 0;
    int restarts = 10;
    int threads = 1;
    bool allow_out_of_bounds = false;
    std::string out = "out";
    bool json_output = false;

    // sweep
    std::string spec;
    std::optional<std::size_t> budget;
    std::size_t top = 5;
    std::string title;
    bool no_cache = false;
    bool resume = false;

    // probe
    std::string dict;
    std::string mode = "gene";
    std::string network_format = "graphml";
    std::string assignments;

    // fetch
    std::string query;
    std::string db = "pubmed";
    int max_records = 100;
    std::string endpoint{kNcbiEndpoint};
    std::string cache_dir;
    double rate = 3.0;
};

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string hash_of(std::string_view data) { return hex64(fnv1a64(data)); }

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

/// Outputs of one subcommand. Nothing touches the output directory until
/// every artifact has been computed.
class Artifacts {
public:
    void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
    void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
    const std::map<std::string, std::string>& files() const { return files_; }

    json commit(const fs::path& out_dir, const std::string& command, const json& config) const {
        fs::create_directories(out_dir);
        json artifacts = json::object();
        for (const auto& [name, content] : files_) {
            std::ofstream f(out_dir / name, std::ios::binary | std::ios::trunc);
            f.write(content.data(), static_cast<std::streamsize>(content.size()));
            if (!f) throw ConfigError("cannot write " + (out_dir / name).string());
            artifacts[name] = hash_of(content);
        }

        json manifest;
        const auto manifest_path = out_dir / "manifest.json";
        if (fs::exists(manifest_path)) {
            try {
                manifest = json::parse(read_text(manifest_path));
            } catch (const json::exception&) {
                manifest = json::object();
            }
        }
        if (!manifest.is_object()) manifest = json::object();
        manifest["tool"] = "clustinfo";
        manifest["version"] = kVersion;
        json stage;
        stage["config"] = config;
        stage["config_hash"] = hash_of(config.dump());
        stage["seed"] = config.value("seed", std::uint64_t{0});
        stage["artifacts"] = artifacts;
        manifest["stages"][command] = stage;
        std::ofstream f(manifest_path, std::ios::binary | std::ios::trunc);
        f << manifest.dump(2) << '\n';
        return stage;
    }

private:
    std::map<std::string, std::string> files_;
};

class Driver {
public:
    Driver(PipelineConfig cfg, std::ostream& out) : cfg_(std::move(cfg)), out_(out) {}

    void run(const std::string& command) {
        Artifacts a;
        json summary;
        if (command == "ingest") {
            summary = ingest(a);
        } else if (command == "vectorize") {
            summary = vectorize(a);
        } else if (command == "embed") {
            summary = embed(a);
        } else if (command == "cluster") {
            summary = cluster(a);
        } else if (command == "evaluate") {
            summary = evaluate(a);
        } else if (command == "sweep") {
            summary = sweep(a);
        } else if (command == "probe") {
            summary = probe(a);
        } else if (command == "export") {
            summary = export_all(a);
        } else if (command == "fetch") {
            summary = fetch(a);
        } else {
            throw ConfigError("unknown command " + command);
        }
        const auto stage = a.commit(cfg_.out, command, config_json(command));
        summary["config_hash"] = stage["config_hash"];
        if (cfg_.json_output) {
            out_ << summary.dump() << '\n';
        } else {
            print_summary(command, summary);
        }
    }

private:
    // -- configuration -------------------------------------------------------

    PipelineParams params() const {
        PipelineParams p;
        p.d_percent = cfg_.d;
        p.rank_cutoff = cfg_.r;
        p.n_dims = cfg_.n_dims;
        p.k = cfg_.k;
        p.seed = cfg_.seed;
        p.restarts = cfg_.restarts;
        p.allow_out_of_bounds = cfg_.allow_out_of_bounds;
        return p;
    }

    /// Inputs are identified by content hash so manifests do not depend on
    /// where files live.
    json config_json(const std::string& command) const {
        json c;
        c["command"] = command;
        c["seed"] = cfg_.seed;
        if (command == "fetch") {
            c["query"] = cfg_.query;
            c["db"] = cfg_.db;
            c["max_records"] = cfg_.max_records;
            return c;
        }
        c["corpus_hash"] = corpus_hash_;
        c["format"] = corpus_format();
        c["class_priority"] = cfg_.class_priority;
        c["d"] = cfg_.d;
        c["r"] = cfg_.r;
        c["n_dims"] = cfg_.n_dims;
        c["k"] = cfg_.k;
        c["restarts"] = cfg_.restarts;
        c["allow_out_of_bounds"] = cfg_.allow_out_of_bounds;
        if (command == "sweep") c["sweep_spec"] = sweep_spec().to_json();
        if (command == "probe" || command == "export") {
            c["dictionary_hash"] = dict_hash_;
            c["mode"] = cfg_.mode;
            c["top"] = cfg_.top;
            c["network_format"] = cfg_.network_format;
        }
        if (!cfg_.assignments.empty()) c["assignments_hash"] = assignments_hash_;
        return c;
    }

    std::string corpus_format() const {
        if (!cfg_.format.empty()) return cfg_.format;
        return fs::path(cfg_.corpus).extension() == ".xml" ? "pubmed_xml" : "jsonl";
    }

    SweepSpec sweep_spec() const {
        SweepSpec spec = SweepSpec::defaults();
        if (!cfg_.spec.empty()) {
            try {
                spec = SweepSpec::from_json(json::parse(read_text(cfg_.spec)));
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("sweep spec: ") + e.what());
            }
        }
        spec.seed = cfg_.seed;
        if (cfg_.budget) spec.budget = cfg_.budget;
        if (cfg_.allow_out_of_bounds) spec.allow_out_of_bounds = true;
        return spec;
    }

    // -- shared stages -------------------------------------------------------

    const Corpus& corpus() {
        if (!corpus_) {
            if (cfg_.corpus.empty()) throw ConfigError("--corpus is required");
            if (!fs::is_regular_file(cfg_.corpus)) throw ConfigError("corpus file not found: " + cfg_.corpus);
            corpus_hash_ = hash_of(read_text(cfg_.corpus));
            PubmedOptions opts;
            opts.class_priority = cfg_.class_priority;
            corpus_ = load_corpus(cfg_.corpus, parse_corpus_format(corpus_format()), opts);
        }
        return *corpus_;
    }

    struct Features {
        TermDocMatrix counts;
        TermDocMatrix ablated;
        WeightedMatrix weights;
    };

    const Features& features() {
        if (!features_) {
            Features f;
            f.counts = count_matrix(corpus());
            f.ablated = ablate_singletons(f.counts);
            FeatureParams fp;
            fp.d_percent = cfg_.d;
            fp.rank_cutoff = cfg_.r;
            fp.allow_out_of_bounds = cfg_.allow_out_of_bounds;
            f.weights = build_features(f.ablated, fp);
            features_ = std::move(f);
        }
        return *features_;
    }

    const EmbeddingMatrix& embedding() {
        if (!embedding_) embedding_ = reduce(features().weights, cfg_.n_dims, svd_options(cfg_.seed));
        return *embedding_;
    }

    const Clustering& clustering() {
        if (!clustering_) clustering_ = kmeans(embedding(), cfg_.k, kmeans_options(cfg_.seed, cfg_.restarts, cfg_.threads));
        return *clustering_;
    }

    ClusterAssignment assignment() {
        if (cfg_.assignments.empty()) return ClusterAssignment::from_clustering(embedding().docs, clustering());
        if (!fs::is_regular_file(cfg_.assignments)) throw ConfigError("assignments file not found: " + cfg_.assignments);
        const auto text = read_text(cfg_.assignments);
        assignments_hash_ = hash_of(text);
        std::istringstream in(text);
        return read_assignments(in);
    }

    const GeneDictionary& dictionary() {
        if (!dict_) {
            if (cfg_.dict.empty()) throw ConfigError("--dict is required");
            if (!fs::is_regular_file(cfg_.dict)) throw ConfigError("dictionary file not found: " + cfg_.dict);
            const auto text = read_text(cfg_.dict);
            dict_hash_ = hash_of(text);
            dict_ = parse_dictionary(text);
        }
        return *dict_;
    }

    // -- subcommands ---------------------------------------------------------

    json ingest(Artifacts& a) {
        const auto& c = corpus();
        a.add("corpus.jsonl", render([&](std::ostream& os) { write_jsonl(os, c); }));
        std::map<std::string, std::size_t> per_label;
        std::size_t unlabeled = 0;
        for (const auto& d : c.documents()) {
            if (d.label) {
                ++per_label[*d.label];
            } else {
                ++unlabeled;
            }
        }
        std::size_t empty_streams = 0;
        for (const auto& d : c.documents()) empty_streams += tokenize(d).empty();
        json j;
        j["documents"] = c.size();
        j["skipped"] = c.skipped_records();
        j["labels"] = per_label;
        j["unlabeled"] = unlabeled;
        j["empty_token_streams"] = empty_streams;
        a.add_json("ingest.json", j);
        return j;
    }

    json vectorize(Artifacts& a) {
        const auto& f = features();
        a.add("counts.mtx", render([&](std::ostream& os) { write_matrix_market(os, f.counts); }));
        a.add("counts_vocab.tsv", render([&](std::ostream& os) { write_vocabulary(os, f.counts.terms); }));
        a.add("weights.mtx", render([&](std::ostream& os) { write_matrix_market(os, f.weights); }));
        a.add("weights_vocab.tsv", render([&](std::ostream& os) { write_vocabulary(os, f.weights.terms); }));
        a.add("docs.tsv", render([&](std::ostream& os) {
                  for (std::size_t i = 0; i < f.weights.docs.size(); ++i) os << f.weights.docs[i] << '\t' << i << '\n';
              }));
        json j;
        j["documents"] = f.counts.num_docs();
        j["terms"] = f.counts.num_terms();
        j["terms_after_ablation"] = f.ablated.num_terms();
        j["min_doc_freq"] = min_doc_freq(cfg_.d, f.counts.num_docs());
        j["terms_weighted"] = f.weights.num_terms();
        j["weighted_nnz"] = f.weights.nnz();
        j["empty_documents"] = f.weights.empty_documents().size();
        a.add_json("vectorize.json", j);
        return j;
    }

    json embed(Artifacts& a) {
        const auto& e = embedding();
        a.add("embedding.tsv", render([&](std::ostream& os) { write_embedding_tsv(os, e); }));
        json j;
        j["dims"] = e.dims();
        j["documents"] = e.num_docs();
        j["singular_values"] = std::vector<double>(e.singular_values.data(), e.singular_values.data() + e.singular_values.size());
        j["solver"] = e.solver == SvdSolver::Dense ? "dense" : "randomized";
        j["iterations"] = e.iterations;
        a.add_json("embed.json", j);
        return j;
    }

    json cluster(Artifacts& a) {
        const auto& c = clustering();
        a.add("assignments.tsv", render([&](std::ostream& os) { write_assignments(os, embedding().docs, c); }));
        json j;
        j["k"] = c.k;
        j["seed"] = cfg_.seed;
        j["restarts"] = c.restarts_used;
        j["best_restart"] = c.best_restart;
        j["dissimilarity"] = c.dissimilarity;
        j["variabilities"] = c.variabilities;
        j["iterations"] = c.iterations;
        j["converged"] = c.converged;
        j["cluster_sizes"] = c.cluster_sizes();
        a.add_json("cluster.json", j);
        return j;
    }

    json evaluate(Artifacts& a) {
        const auto& c = corpus();
        const auto assign = assignment();
        std::map<std::string, int> cluster_of;
        for (std::size_t i = 0; i < assign.doc_ids.size(); ++i) cluster_of[assign.doc_ids[i]] = assign.clusters[i];
        std::vector<int> clusters;
        std::vector<std::optional<std::string>> labels;
        for (const auto& d : c.documents()) {
            auto it = cluster_of.find(d.id);
            if (it == cluster_of.end()) throw PreconditionError("document '" + d.id + "' has no cluster assignment");
            clusters.push_back(it->second);
            labels.push_back(d.label);
        }
        const auto table = contingency(clusters, labels);
        const auto m = metrics(table);
        json j;
        j["homogeneity"] = m.homogeneity;
        j["completeness"] = m.completeness;
        j["v_measure"] = m.v_measure;
        a.add_json("metrics.json", j);
        a.add("contingency.tsv", render([&](std::ostream& os) {
                  os << "class";
                  for (int k : table.clusters) os << '\t' << k;
                  os << '\n';
                  for (std::size_t r = 0; r < table.classes.size(); ++r) {
                      os << table.classes[r];
                      for (auto v : table.counts[r]) os << '\t' << v;
                      os << '\n';
                  }
              }));
        json debug = j;
        debug["labeled_documents"] = table.total;
        debug["unlabeled_documents"] = table.unlabeled;
        debug["entropy_nats"] = {{"class", m.class_entropy},
                                 {"cluster", m.cluster_entropy},
                                 {"class_given_cluster", m.class_given_cluster},
                                 {"cluster_given_class", m.cluster_given_class}};
        return debug;
    }

    json sweep(Artifacts& a) {
        const auto spec = sweep_spec();
        const auto& c = corpus();
        SweepOptions opts;
        opts.threads = cfg_.threads;
        opts.restarts = cfg_.restarts;
        opts.cache = !cfg_.no_cache;
        fs::create_directories(cfg_.out);
        const auto checkpoint = fs::path(cfg_.out) / "checkpoint.jsonl";
        if (!cfg_.resume) fs::remove(checkpoint);
        opts.checkpoint = checkpoint;
        const auto rows = run_sweep(c, spec, opts);

        std::size_t scored = 0;
        for (const auto& r : rows) scored += r.ok();
        if (scored == 0) throw EmptyResult("every sweep combination was skipped");

        a.add("rows.jsonl", render([&](std::ostream& os) { write_rows_jsonl(os, rows); }));
        a.add("report.md", report(rows, cfg_.top, cfg_.title));

        auto base = PipelineParams::preset("paper-default");
        base.seed = cfg_.seed;
        base.restarts = cfg_.restarts;
        base.allow_out_of_bounds = spec.allow_out_of_bounds;
        a.add("vk_curve.tsv", render([&](std::ostream& os) { write_vk_curve(os, vk_curve(c, base, spec.k_values)); }));

        const auto best = rank_rows(rows).front();
        json j;
        j["enumerated"] = rows.size();
        j["scored"] = scored;
        j["skipped"] = rows.size() - scored;
        j["best"] = row_to_json(best, false);
        return j;
    }

    json probe_into(Artifacts& a, ProbeMode mode, const std::vector<NetworkFormat>& formats) {
        const auto counts = count_occurrences(corpus(), assignment(), dictionary(), mode, cfg_.threads);
        const auto rep = relative_weights(counts);
        const auto net = build_network(rep, cfg_.top);
        const std::string tag(to_string(mode));
        a.add_json("probe_" + tag + ".json", report_to_json(rep));
        for (auto f : formats) a.add(fmt::format("network_{}.{}", tag, extension(f)), export_network(net, f));
        json j;
        j["mode"] = tag;
        j["entities_found"] = rep.globals.size();
        j["nodes"] = net.nodes.size();
        j["edges"] = net.edges.size();
        j["underfilled_clusters"] = net.underfilled_clusters;
        return j;
    }

    json probe(Artifacts& a) {
        auto j = probe_into(a, parse_probe_mode(cfg_.mode), {parse_network_format(cfg_.network_format)});
        j["dictionary_warnings"] = dictionary().warnings();
        return j;
    }

    json export_all(Artifacts& a) {
        json j;
        j["ingest"] = ingest(a);
        j["vectorize"] = vectorize(a);
        j["embed"] = embed(a);
        j["cluster"] = cluster(a);
        if (!corpus().label_set().empty()) j["evaluate"] = evaluate(a);
        if (!cfg_.dict.empty()) {
            const std::vector<NetworkFormat> all{NetworkFormat::GraphML, NetworkFormat::Dot, NetworkFormat::Json};
            j["probe"] = {probe_into(a, ProbeMode::Gene, all), probe_into(a, ProbeMode::Molecular, all)};
        }
        return j;
    }

    json fetch(Artifacts& a) {
        if (cfg_.query.empty()) throw ConfigError("--query is required");
        NcbiOptions opts;
        opts.endpoint = cfg_.endpoint;
        opts.max_requests_per_second = cfg_.rate;
        if (const char* key = std::getenv("NCBI_API_KEY"); key && *key) opts.api_key = key;
        if (!cfg_.cache_dir.empty()) opts.cache_dir = cfg_.cache_dir;
        const auto db = parse_ncbi_db(cfg_.db);
        NcbiClient client(opts);
        const auto res = client.fetch(cfg_.query, db, cfg_.max_records);
        a.add("esearch.json", res.search_payload);
        json j;
        j["ids"] = res.ids.size();
        j["from_cache"] = res.from_cache;
        if (db == NcbiDb::Gene) {
            a.add("esummary.json", res.records_payload);
            const auto dict = GeneDictionary::from_entries(parse_gene_summary(res.records_payload));
            a.add_json("dictionary.json", dictionary_to_json(dict));
            j["dictionary_entries"] = dict.size();
        } else {
            a.add("efetch.xml", res.records_payload);
            if (db == NcbiDb::PubMed) {
                PubmedOptions popts;
                popts.class_priority = cfg_.class_priority;
                const auto c = parse_pubmed_xml(res.records_payload, popts);
                a.add("corpus.jsonl", render([&](std::ostream& os) { write_jsonl(os, c); }));
                j["documents"] = c.size();
                j["skipped"] = c.skipped_records();
            }
        }
        return j;
    }

    void print_summary(const std::string& command, const json& summary) {
        if (command == "evaluate") {
            out_ << fmt::format("homogeneity  {:.3f}\ncompleteness {:.3f}\nv-measure    {:.3f}\n", summary["homogeneity"].get<double>(),
                                summary["completeness"].get<double>(), summary["v_measure"].get<double>());
            return;
        }
        out_ << command << ": " << summary.dump() << '\n';
    }

    PipelineConfig cfg_;
    std::ostream& out_;
    std::optional<Corpus> corpus_;
    std::optional<Features> features_;
    std::optional<EmbeddingMatrix> embedding_;
    std::optional<Clustering> clustering_;
    std::optional<GeneDictionary> dict_;
    std::string corpus_hash_;
    std::string dict_hash_;
    std::string assignments_hash_;
};

int exit_code(ErrorClass cls) {
    switch (cls) {
        case ErrorClass::Config: return kExitConfig;
        case ErrorClass::Data: return kExitData;
        case ErrorClass::Compute: return kExitCompute;
    }
    return kExitCompute;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    PipelineConfig cfg;
    CLI::App app{"Cluster labeled document corpora and measure cluster informativeness", "clustinfo"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Key-value config file (TOML/INI); flags win over file values");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--corpus", cfg.corpus, "Corpus file");
    app.add_option("--corpus-format", cfg.format, "Corpus format (default: from the file extension)")
        ->check(CLI::IsMember({"jsonl", "pubmed_xml"}));
    app.add_option("--class-priority", cfg.class_priority, "Preferred labels for multi-heading PubMed records, ';'-separated")
        ->delimiter(';');
    auto* preset = app.add_option("--preset", cfg.preset, "Named parameter preset")->check(CLI::IsMember({"paper-default"}));
    auto* opt_d = app.add_option("-D,--df-threshold", cfg.d, "Minimum document frequency, percent of documents");
    auto* opt_r = app.add_option("-R,--rank-cutoff", cfg.r, "tf-idf terms kept per document");
    auto* opt_n = app.add_option("-N,--dims", cfg.n_dims, "Embedding dimensions");
    auto* opt_k = app.add_option("-K,--clusters", cfg.k, "Number of clusters");
    app.add_option("--seed", cfg.seed, "Top-level random seed");
    app.add_option("--restarts", cfg.restarts, "k-means restarts")->check(CLI::PositiveNumber);
    app.add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--allow-out-of-bounds", cfg.allow_out_of_bounds, "Accept parameters outside the standard grid bounds");
    app.add_option("--out", cfg.out, "Output directory")->envname("CLUSTINFO_OUT");
    app.add_flag("--json", cfg.json_output, "Machine-readable summary on stdout");
    app.add_option("--assignments", cfg.assignments, "Existing doc_id<TAB>cluster file");

    app.add_subcommand("ingest", "Load and normalize a corpus");
    app.add_subcommand("vectorize", "Build count and tf-idf matrices");
    app.add_subcommand("embed", "Truncated SVD document embedding");
    app.add_subcommand("cluster", "k-means over the embedding");
    app.add_subcommand("evaluate", "Homogeneity, completeness and v-measure against labels");

    auto* sweep = app.add_subcommand("sweep", "Randomized sweep over the (D, R, N, K) grid");
    sweep->add_option("--spec", cfg.spec, "Sweep spec JSON");
    sweep->add_option("--budget", cfg.budget, "Maximum combinations to run");
    sweep->add_option("--top", cfg.top, "Rows in report.md");
    sweep->add_option("--title", cfg.title, "Heading for report.md");
    sweep->add_flag("--no-cache", cfg.no_cache, "Recompute every pipeline stage per combination");
    sweep->add_flag("--resume", cfg.resume, "Reuse rows from an existing checkpoint.jsonl");

    auto* probe = app.add_subcommand("probe", "Score dictionary entities per cluster and export the network");
    probe->add_option("--dict", cfg.dict, "Gene dictionary JSON");
    probe->add_option("--mode", cfg.mode, "gene or molecular")->check(CLI::IsMember({"gene", "molecular"}));
    probe->add_option("--top", cfg.top, "Entities per cluster");
    probe->add_option("--format", cfg.network_format, "Network format")->check(CLI::IsMember({"graphml", "dot", "json"}));

    auto* exp = app.add_subcommand("export", "Run the full pipeline and write every artifact");
    exp->add_option("--dict", cfg.dict, "Gene dictionary JSON");
    exp->add_option("--top", cfg.top, "Entities per cluster");

    auto* fetch = app.add_subcommand("fetch", "Query NCBI E-utilities");
    fetch->add_option("--query", cfg.query, "Search term");
    fetch->add_option("--db", cfg.db, "Database")->check(CLI::IsMember({"pubmed", "pmc", "gene"}));
    fetch->add_option("--max", cfg.max_records, "Maximum records");
    fetch->add_option("--endpoint", cfg.endpoint, "E-utilities base URL")->envname("CLUSTINFO_NCBI_ENDPOINT");
    fetch->add_option("--cache-dir", cfg.cache_dir, "Response cache directory")->envname("CLUSTINFO_CACHE_DIR");
    fetch->add_option("--rate", cfg.rate, "Maximum requests per second");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (!cfg.preset.empty()) {
        const auto p = PipelineParams::preset(cfg.preset);
        if (opt_d->count() == 0) cfg.d = p.d_percent;
        if (opt_r->count() == 0) cfg.r = p.rank_cutoff;
        if (opt_n->count() == 0) cfg.n_dims = p.n_dims;
        if (opt_k->count() == 0) cfg.k = p.k;
    }
    (void)preset;

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Driver(cfg, out).run(command);
    } catch (const Error& e) {
        err << "error [" << e.kind() << "]: " << e.what() << '\n';
        return exit_code(e.error_class());
    } catch (const fs::filesystem_error& e) {
        err << "error [filesystem]: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace clustinfo

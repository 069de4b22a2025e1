#include "clustinfo/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "clustinfo/error.hpp"
#include "clustinfo/random.hpp"

namespace clustinfo {

namespace {

/// Computes each value at most once per key, across threads. Failures are
/// cached too and rethrown to every caller.
template <typename Key, typename Value>
class OnceCache {
public:
    template <typename Make>
    std::shared_ptr<const Value> get(const Key& key, Make&& make) {
        std::promise<std::shared_ptr<const Value>> promise;
        std::shared_future<std::shared_ptr<const Value>> future;
        bool owner = false;
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(key);
            if (it == entries_.end()) {
                future = promise.get_future().share();
                entries_.emplace(key, future);
                owner = true;
            } else {
                future = it->second;
            }
        }
        if (owner) {
            try {
                promise.set_value(std::make_shared<const Value>(make()));
            } catch (...) {
                promise.set_exception(std::current_exception());
            }
        }
        return future.get();
    }

private:
    std::mutex mutex_;
    std::map<Key, std::shared_future<std::shared_ptr<const Value>>> entries_;
};

bool is_skippable(const Error& e) {
    return dynamic_cast<const AllTermsRemoved*>(&e) || dynamic_cast<const DimsTooLarge*>(&e) ||
           dynamic_cast<const KTooLarge*>(&e) || dynamic_cast<const ConvergenceFailure*>(&e) ||
           dynamic_cast<const EmptyCluster*>(&e);
}

template <typename T>
void check_range(const std::vector<T>& values, T lo, T hi, const char* name) {
    for (T v : values) {
        if (v < lo - 1e-9 || v > hi + 1e-9) {
            throw PreconditionError(fmt::format("{} value {} outside [{}, {}]", name, v, lo, hi));
        }
    }
}

template <typename T>
std::vector<T> int_range(T lo, T hi) {
    std::vector<T> out;
    for (T v = lo; v <= hi; ++v) out.push_back(v);
    return out;
}

/// Shared pipeline stages for one sweep.
class StageCache {
public:
    StageCache(const Corpus& corpus, const SweepSpec& spec, bool enabled)
        : spec_(spec), enabled_(enabled), ablated_(ablate_singletons(count_matrix(corpus))) {}

    std::shared_ptr<const WeightedMatrix> features(double d, int r) {
        auto make = [&] {
            auto filtered = filtered_matrix(d);
            auto weighted = apply_rank_cutoff(tfidf(*filtered), r);
            if (weighted.terms.empty()) {
                throw AllTermsRemoved(fmt::format("no term keeps a positive tf-idf weight at D={}%", d));
            }
            return l2_normalize(weighted);
        };
        if (!enabled_) return std::make_shared<const WeightedMatrix>(make());
        return features_.get({d, r}, make);
    }

    std::shared_ptr<const EmbeddingMatrix> embedding(double d, int r, int n) {
        auto make = [&] { return reduce(*features(d, r), n, svd_options(spec_.seed)); };
        if (!enabled_) return std::make_shared<const EmbeddingMatrix>(make());
        return embeddings_.get({d, r, n}, make);
    }

private:
    std::shared_ptr<const TermDocMatrix> filtered_matrix(double d) {
        auto make = [&] { return apply_df_threshold(ablated_, d, spec_.allow_out_of_bounds); };
        if (!enabled_) return std::make_shared<const TermDocMatrix>(make());
        return filtered_.get(d, make);
    }

    const SweepSpec& spec_;
    bool enabled_;
    TermDocMatrix ablated_;
    OnceCache<double, TermDocMatrix> filtered_;
    OnceCache<std::pair<double, int>, WeightedMatrix> features_;
    OnceCache<std::tuple<double, int, int>, EmbeddingMatrix> embeddings_;
};

std::map<Combination, SweepRow> read_checkpoint(const std::filesystem::path& path) {
    std::map<Combination, SweepRow> done;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto row = row_from_json(nlohmann::json::parse(line));
            done[row.combo] = std::move(row);
        } catch (const nlohmann::json::exception&) {
            // A torn final line from an interrupted run; recomputed below.
        }
    }
    return done;
}

std::string format_d(double d) { return fmt::format("{}", d); }

}  // namespace

// ---------------------------------------------------------------------------

SweepSpec SweepSpec::defaults() {
    SweepSpec s;
    for (int i = 1; i <= 10; ++i) s.d_values.push_back(i / 10.0);
    s.r_values = int_range(5, 14);
    s.n_values = int_range(1, 20);
    s.k_values = int_range(2, 20);
    return s;
}

void SweepSpec::validate() const {
    if (d_values.empty() || r_values.empty() || n_values.empty() || k_values.empty()) {
        throw EmptySpec("every parameter list of the sweep needs at least one value");
    }
    if (budget && *budget == 0) throw EmptySpec("sweep budget must be at least 1");
    for (double d : d_values) {
        if (!std::isfinite(d) || d < 0.0) throw PreconditionError(fmt::format("D value {} is not a percentage", d));
    }
    for (int r : r_values) {
        if (r < 1) throw PreconditionError(fmt::format("R value {} must be positive", r));
    }
    for (int n : n_values) {
        if (n < 1) throw PreconditionError(fmt::format("N value {} must be positive", n));
    }
    for (int k : k_values) {
        if (k < 1) throw PreconditionError(fmt::format("K value {} must be positive", k));
    }
    if (allow_out_of_bounds) return;
    check_range(d_values, 0.1, 1.0, "D");
    check_range(r_values, 5, 14, "R");
    check_range(n_values, 1, 20, "N");
    check_range(k_values, 2, 20, "K");
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
    SweepSpec s = defaults();
    try {
        if (j.contains("d_values")) s.d_values = j.at("d_values").get<std::vector<double>>();
        if (j.contains("r_values")) s.r_values = j.at("r_values").get<std::vector<int>>();
        if (j.contains("n_values")) s.n_values = j.at("n_values").get<std::vector<int>>();
        if (j.contains("k_values")) s.k_values = j.at("k_values").get<std::vector<int>>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("budget") && !j.at("budget").is_null()) s.budget = j.at("budget").get<std::size_t>();
        if (j.contains("allow_out_of_bounds")) s.allow_out_of_bounds = j.at("allow_out_of_bounds").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid sweep spec: ") + e.what());
    }
    return s;
}

nlohmann::json SweepSpec::to_json() const {
    nlohmann::json j;
    j["d_values"] = d_values;
    j["r_values"] = r_values;
    j["n_values"] = n_values;
    j["k_values"] = k_values;
    j["seed"] = seed;
    j["budget"] = budget ? nlohmann::json(*budget) : nlohmann::json(nullptr);
    j["allow_out_of_bounds"] = allow_out_of_bounds;
    return j;
}

std::vector<Combination> enumerate_grid(const SweepSpec& spec) {
    spec.validate();
    std::vector<Combination> grid;
    grid.reserve(spec.d_values.size() * spec.r_values.size() * spec.n_values.size() * spec.k_values.size());
    for (double d : spec.d_values) {
        for (int r : spec.r_values) {
            for (int n : spec.n_values) {
                for (int k : spec.k_values) grid.push_back({d, r, n, k});
            }
        }
    }
    Rng rng(derive_seed(spec.seed, "grid"));
    for (std::size_t i = grid.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(grid[i - 1], grid[j]);
    }
    if (spec.budget && *spec.budget < grid.size()) grid.resize(*spec.budget);
    return grid;
}

std::vector<SweepRow> run_sweep(const Corpus& corpus, const SweepSpec& spec, const SweepOptions& opts) {
    const auto grid = enumerate_grid(spec);
    if (corpus.label_set().empty()) throw NoLabeledDocuments("a sweep needs gold-standard labels");
    const auto labels = labels_of(corpus);

    // Corpus-level failures (empty corpus, nothing survives ablation) abort here.
    StageCache stages(corpus, spec, opts.cache);

    std::map<Combination, SweepRow> resumed;
    std::ofstream checkpoint;
    if (opts.checkpoint) {
        if (std::filesystem::exists(*opts.checkpoint)) resumed = read_checkpoint(*opts.checkpoint);
        checkpoint.open(*opts.checkpoint, std::ios::app);
        if (!checkpoint) throw ConfigError("cannot open checkpoint " + opts.checkpoint->string());
    }
    std::mutex checkpoint_mutex;

    std::vector<SweepRow> rows(grid.size());
    auto run_one = [&](std::size_t i) {
        const auto& combo = grid[i];
        if (auto it = resumed.find(combo); it != resumed.end()) {
            rows[i] = it->second;
            return;
        }
        SweepRow row;
        row.combo = combo;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto emb = stages.embedding(combo.d, combo.r, combo.n);
            const auto clustering = kmeans(*emb, combo.k, kmeans_options(spec.seed, opts.restarts));
            const auto m = metrics(contingency(clustering.assignments, labels));
            row.completeness = m.completeness;
            row.homogeneity = m.homogeneity;
            row.v_measure = m.v_measure;
        } catch (const Error& e) {
            if (!is_skippable(e)) throw;
            row.skipped = fmt::format("{}: {}", e.kind(), e.what());
        }
        row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        if (checkpoint.is_open()) {
            std::lock_guard lock(checkpoint_mutex);
            checkpoint << row_to_json(row, true).dump() << '\n' << std::flush;
        }
        rows[i] = std::move(row);
    };

    const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(grid.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            for (int t = 0; t < threads; ++t) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < grid.size(); i = next++) {
                        try {
                            run_one(i);
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                            next = grid.size();
                        }
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    return rows;
}

std::vector<SweepRow> rank_rows(std::vector<SweepRow> rows) {
    std::erase_if(rows, [](const SweepRow& r) { return !r.ok(); });
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.v_measure != b.v_measure) return a.v_measure > b.v_measure;
        if (a.completeness != b.completeness) return a.completeness > b.completeness;
        return a.combo < b.combo;
    });
    return rows;
}

std::string report(const std::vector<SweepRow>& rows, std::size_t top_n, const std::string& title) {
    const auto ranked = rank_rows(rows);
    if (ranked.empty()) throw PreconditionError("no scored rows to report");
    std::string out;
    if (!title.empty()) out += fmt::format("### {}\n\n", title);
    out += "| D | R | N | K | Completeness | Homogeneity | V-Measure |\n";
    out += "|---|---|---|---|--------------|-------------|-----------|\n";
    const std::size_t n = std::min(top_n, ranked.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = ranked[i];
        out += fmt::format("| {} | {} | {} | {} | {:.3f} | {:.3f} | {:.3f} |\n", format_d(r.combo.d), r.combo.r, r.combo.n,
                           r.combo.k, r.completeness, r.homogeneity, r.v_measure);
    }
    return out;
}

nlohmann::json row_to_json(const SweepRow& row, bool with_runtime) {
    nlohmann::json j;
    j["d"] = row.combo.d;
    j["r"] = row.combo.r;
    j["n"] = row.combo.n;
    j["k"] = row.combo.k;
    if (row.skipped) {
        j["skipped"] = *row.skipped;
    } else {
        j["completeness"] = row.completeness;
        j["homogeneity"] = row.homogeneity;
        j["v_measure"] = row.v_measure;
    }
    if (with_runtime) j["runtime_ms"] = row.runtime_ms;
    return j;
}

SweepRow row_from_json(const nlohmann::json& j) {
    SweepRow row;
    row.combo = {j.at("d").get<double>(), j.at("r").get<int>(), j.at("n").get<int>(), j.at("k").get<int>()};
    if (j.contains("skipped")) {
        row.skipped = j.at("skipped").get<std::string>();
    } else {
        row.completeness = j.at("completeness").get<double>();
        row.homogeneity = j.at("homogeneity").get<double>();
        row.v_measure = j.at("v_measure").get<double>();
    }
    row.runtime_ms = j.value("runtime_ms", std::int64_t{0});
    return row;
}

void write_rows_jsonl(std::ostream& out, const std::vector<SweepRow>& rows) {
    for (const auto& r : rows) out << row_to_json(r, false).dump() << '\n';
}

std::vector<CurvePoint> vk_curve(const Corpus& corpus, const PipelineParams& base, const std::vector<int>& k_values) {
    const auto labels = labels_of(corpus);
    FeatureParams fp;
    fp.d_percent = base.d_percent;
    fp.rank_cutoff = base.rank_cutoff;
    fp.allow_out_of_bounds = base.allow_out_of_bounds;
    const auto weights = build_features(ablate_singletons(count_matrix(corpus)), fp);
    const auto emb = reduce(weights, base.n_dims, svd_options(base.seed));

    std::vector<CurvePoint> curve;
    for (int k : k_values) {
        CurvePoint p;
        p.k = k;
        try {
            const auto c = kmeans(emb, k, kmeans_options(base.seed, base.restarts));
            p.metrics = metrics(contingency(c.assignments, labels));
        } catch (const Error& e) {
            if (!is_skippable(e)) throw;
            p.skipped = fmt::format("{}: {}", e.kind(), e.what());
        }
        curve.push_back(std::move(p));
    }
    return curve;
}

void write_vk_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "k\tv_measure\thomogeneity\tcompleteness\n";
    for (const auto& p : curve) {
        if (p.metrics) {
            out << fmt::format("{}\t{:.9g}\t{:.9g}\t{:.9g}\n", p.k, p.metrics->v_measure, p.metrics->homogeneity,
                               p.metrics->completeness);
        } else {
            out << p.k << "\tNA\tNA\tNA\n";
        }
    }
}

}  // namespace clustinfo

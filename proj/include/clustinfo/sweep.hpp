#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clustinfo/corpus.hpp"
#include "clustinfo/evaluate.hpp"
#include "clustinfo/pipeline.hpp"

namespace clustinfo {

/// Parameter grid. Defaults span D 0.1..1.0 (step 0.1), R 5..14, N 1..20
/// and K 2..20.
struct SweepSpec {
    std::vector<double> d_values;
    std::vector<int> r_values;
    std::vector<int> n_values;
    std::vector<int> k_values;
    std::uint64_t seed = 0;
    std::optional<std::size_t> budget;
    bool allow_out_of_bounds = false;

    static SweepSpec defaults();
    /// Throws EmptySpec for empty lists or a zero budget and
    /// PreconditionError for values outside the grid bounds.
    void validate() const;

    static SweepSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct Combination {
    double d = 0.0;
    int r = 0;
    int n = 0;
    int k = 0;

    auto operator<=>(const Combination&) const = default;
};

struct SweepRow {
    Combination combo;
    double completeness = 0.0;
    double homogeneity = 0.0;
    double v_measure = 0.0;
    std::int64_t runtime_ms = 0;
    std::optional<std::string> skipped;  // reason, when the combination could not run

    bool ok() const noexcept { return !skipped.has_value(); }
};

/// Full Cartesian product, shuffled by the spec seed, truncated to budget.
std::vector<Combination> enumerate_grid(const SweepSpec& spec);

struct SweepOptions {
    int threads = 1;
    int restarts = 10;
    bool cache = true;  // share filtered/weighted/embedded matrices between combinations
    std::optional<std::filesystem::path> checkpoint;  // append-only JSONL, resumed if present
};

/// Runs every enumerated combination. Rows come back in enumeration order;
/// combinations that cannot run (AllTermsRemoved, DimsTooLarge, KTooLarge,
/// ConvergenceFailure) are returned as skipped rows.
std::vector<SweepRow> run_sweep(const Corpus& corpus, const SweepSpec& spec, const SweepOptions& opts = {});

/// Orders rows by v-measure desc, completeness desc, then D, R, N, K asc.
std::vector<SweepRow> rank_rows(std::vector<SweepRow> rows);

/// Markdown table of the top `top_n` scored rows, metrics at 3 decimals.
std::string report(const std::vector<SweepRow>& rows, std::size_t top_n, const std::string& title = "");

nlohmann::json row_to_json(const SweepRow& row, bool with_runtime);
SweepRow row_from_json(const nlohmann::json& j);

/// rows.jsonl content; runtime is omitted so reruns are byte-identical.
void write_rows_jsonl(std::ostream& out, const std::vector<SweepRow>& rows);

struct CurvePoint {
    int k = 0;
    std::optional<MetricsReport> metrics;
    std::optional<std::string> skipped;
};

/// V-measure as a function of K with D, R, N fixed at `base`.
std::vector<CurvePoint> vk_curve(const Corpus& corpus, const PipelineParams& base, const std::vector<int>& k_values);
void write_vk_curve(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace clustinfo

#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clustinfo/probe.hpp"

namespace clustinfo {

enum class NcbiDb { PubMed, Pmc, Gene };

NcbiDb parse_ncbi_db(std::string_view name);
std::string_view to_string(NcbiDb db);

inline constexpr std::string_view kNcbiEndpoint = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils";

struct NcbiOptions {
    std::string endpoint{kNcbiEndpoint};  // base URL; point at a fixture server for replay
    std::optional<std::string> api_key;
    double max_requests_per_second = 3.0;
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{30};
    std::optional<std::filesystem::path> cache_dir;
    bool refresh = false;  // ignore cached payloads
};

/// Minimum spacing between requests, shared by every caller of one client.
class RateLimiter {
public:
    explicit RateLimiter(double per_second);
    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_{};
};

struct FetchResult {
    std::vector<std::string> ids;
    std::string search_payload;   // esearch JSON
    std::string records_payload;  // efetch XML (pubmed, pmc) or esummary JSON (gene)
    bool from_cache = false;
};

/// esearch followed by a record fetch. Responses are cached on disk keyed
/// by (db, query, max_records) when a cache directory is configured.
class NcbiClient {
public:
    explicit NcbiClient(NcbiOptions opts);

    FetchResult fetch(const std::string& query, NcbiDb db, int max_records);

    /// Number of HTTP requests issued so far, retries included.
    int requests_made() const noexcept { return requests_; }

private:
    std::string get(const std::string& tool, const std::vector<std::pair<std::string, std::string>>& params);

    NcbiOptions opts_;
    RateLimiter limiter_;
    std::string origin_;     // scheme://host[:port]
    std::string base_path_;  // path prefix below the origin
    int requests_ = 0;
};

FetchResult fetch_ncbi(const std::string& query, NcbiDb db, int max_records, const std::string& endpoint);

/// Gene esummary JSON -> dictionary entries (symbol, aliases, description).
std::vector<GeneEntry> parse_gene_summary(std::string_view json_text);

}  // namespace clustinfo

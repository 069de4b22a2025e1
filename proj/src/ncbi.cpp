#include "clustinfo/ncbi.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "clustinfo/error.hpp"
#include "clustinfo/random.hpp"

namespace clustinfo {

namespace {

std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw NetworkError("cannot write cache file " + p.string());
}

std::vector<std::string> parse_id_list(std::string_view payload) {
    try {
        const auto j = nlohmann::json::parse(payload);
        return j.at("esearchresult").at("idlist").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("esearch response: ") + e.what());
    }
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

}  // namespace

NcbiDb parse_ncbi_db(std::string_view name) {
    if (name == "pubmed") return NcbiDb::PubMed;
    if (name == "pmc") return NcbiDb::Pmc;
    if (name == "gene") return NcbiDb::Gene;
    throw ConfigError("unknown NCBI database '" + std::string(name) + "'");
}

std::string_view to_string(NcbiDb db) {
    switch (db) {
        case NcbiDb::PubMed: return "pubmed";
        case NcbiDb::Pmc: return "pmc";
        case NcbiDb::Gene: return "gene";
    }
    return "";
}

RateLimiter::RateLimiter(double per_second)
    : interval_(per_second > 0.0 ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(1.0 / per_second))
                                 : std::chrono::steady_clock::duration::zero()) {}

void RateLimiter::acquire() {
    std::unique_lock lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    const auto slot = std::max(now, next_);
    next_ = slot + interval_;
    lock.unlock();
    std::this_thread::sleep_until(slot);
}

NcbiClient::NcbiClient(NcbiOptions opts) : opts_(std::move(opts)), limiter_(opts_.max_requests_per_second) {
    const auto scheme_end = opts_.endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("NCBI endpoint must be an absolute URL: " + opts_.endpoint);
    const auto path_start = opts_.endpoint.find('/', scheme_end + 3);
    origin_ = opts_.endpoint.substr(0, path_start);
    base_path_ = path_start == std::string::npos ? "" : opts_.endpoint.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

std::string NcbiClient::get(const std::string& tool, const std::vector<std::pair<std::string, std::string>>& params) {
    httplib::Client client(origin_);
    client.set_connection_timeout(opts_.timeout);
    client.set_read_timeout(opts_.timeout);
    client.set_follow_location(true);

    httplib::Params query;
    for (const auto& [k, v] : params) query.emplace(k, v);
    if (opts_.api_key) query.emplace("api_key", *opts_.api_key);
    const std::string path = base_path_ + "/" + tool;

    auto backoff = opts_.initial_backoff;
    std::string last_error;
    bool rate_limited = false;
    for (int attempt = 1; attempt <= std::max(1, opts_.max_attempts); ++attempt) {
        limiter_.acquire();
        ++requests_;
        auto res = client.Get(path, query, httplib::Headers{});
        if (res && res->status == 200) return res->body;
        if (!res) {
            rate_limited = false;
            last_error = httplib::to_string(res.error());
        } else if (res->status == 429) {
            rate_limited = true;
            last_error = "HTTP 429";
        } else if (res->status >= 500) {
            rate_limited = false;
            last_error = fmt::format("HTTP {}", res->status);
        } else {
            throw NetworkError(fmt::format("{} returned HTTP {}", tool, res->status));
        }
        if (attempt < opts_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    if (rate_limited) throw RateLimited(fmt::format("{} still rate limited after {} attempts", tool, opts_.max_attempts));
    throw NetworkError(fmt::format("{} failed after {} attempts: {}", tool, opts_.max_attempts, last_error));
}

FetchResult NcbiClient::fetch(const std::string& query, NcbiDb db, int max_records) {
    if (max_records < 1) throw PreconditionError(fmt::format("max_records={} must be at least 1", max_records));
    const std::string db_name(to_string(db));
    const bool summary = db == NcbiDb::Gene;

    std::optional<std::filesystem::path> cache;
    if (opts_.cache_dir) {
        const auto key = fnv1a64(fmt::format("{}\n{}\n{}", db_name, max_records, query));
        cache = *opts_.cache_dir / fmt::format("{}-{:016x}", db_name, key);
        if (!opts_.refresh) {
            auto search = read_file(*cache / "esearch.json");
            auto records = read_file(*cache / (summary ? "esummary.json" : "efetch.xml"));
            if (search && records) {
                FetchResult hit{parse_id_list(*search), std::move(*search), std::move(*records), true};
                return hit;
            }
        }
    }

    FetchResult out;
    out.search_payload = get("esearch.fcgi", {{"db", db_name},
                                               {"term", query},
                                               {"retmax", std::to_string(max_records)},
                                               {"retmode", "json"}});
    out.ids = parse_id_list(out.search_payload);
    if (out.ids.empty()) throw EmptyResult("NCBI search returned no records for '" + query + "'");
    if (summary) {
        out.records_payload = get("esummary.fcgi", {{"db", db_name}, {"id", join(out.ids, ',')}, {"retmode", "json"}});
    } else {
        out.records_payload = get("efetch.fcgi", {{"db", db_name},
                                                  {"id", join(out.ids, ',')},
                                                  {"rettype", "abstract"},
                                                  {"retmode", "xml"}});
    }

    if (cache) {
        std::filesystem::create_directories(*cache);
        write_file(*cache / "esearch.json", out.search_payload);
        write_file(*cache / (summary ? "esummary.json" : "efetch.xml"), out.records_payload);
        write_file(*cache / "query.txt", query + "\n");
    }
    return out;
}

FetchResult fetch_ncbi(const std::string& query, NcbiDb db, int max_records, const std::string& endpoint) {
    NcbiOptions opts;
    opts.endpoint = endpoint;
    if (const char* key = std::getenv("NCBI_API_KEY"); key && *key) opts.api_key = key;
    return NcbiClient(std::move(opts)).fetch(query, db, max_records);
}

std::vector<GeneEntry> parse_gene_summary(std::string_view json_text) {
    std::vector<GeneEntry> entries;
    try {
        const auto j = nlohmann::json::parse(json_text);
        const auto& result = j.at("result");
        for (const auto& uid : result.at("uids")) {
            const auto& rec = result.at(uid.get<std::string>());
            if (rec.contains("error")) continue;
            GeneEntry e;
            e.symbol = rec.at("name").get<std::string>();
            e.description = rec.value("description", "");
            std::string aliases = rec.value("otheraliases", "");
            std::stringstream ss(aliases);
            std::string alias;
            while (std::getline(ss, alias, ',')) {
                alias = normalize_whitespace(alias);
                if (!alias.empty()) e.aliases.push_back(alias);
            }
            entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("gene esummary: ") + e.what());
    }
    return entries;
}

}  // namespace clustinfo

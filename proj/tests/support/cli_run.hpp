#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clustinfo/cli.hpp"
#include "clustinfo/corpus.hpp"
#include "clustinfo/probe.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

namespace clustinfo::testing {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

/// Invokes the command-line driver in-process.
inline CliResult run_tool(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"clustinfo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct PlantedFiles {
    std::filesystem::path corpus;
    std::filesystem::path dictionary;
};

/// Planted corpus as JSONL plus its gene dictionary, written under `dir`.
inline PlantedFiles write_planted_files(const std::filesystem::path& dir, std::uint64_t seed = 1) {
    PlantedFiles f{dir / "planted.jsonl", dir / "genes.json"};
    std::ostringstream corpus;
    write_jsonl(corpus, planted_corpus(seed));
    spit(f.corpus, corpus.str());
    spit(f.dictionary, dictionary_to_json(GeneDictionary::from_entries(planted_dictionary_entries())).dump(2));
    return f;
}

inline nlohmann::json read_json(const std::filesystem::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace clustinfo::testing

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clustinfo {

struct Document {
    std::string id;
    std::string text;
    std::optional<std::string> label;

    bool operator==(const Document&) const = default;
};

/// Immutable, id-sorted document collection.
class Corpus {
public:
    Corpus() = default;

    /// Sorts by id and validates. Throws DuplicateId on repeated ids and
    /// EmptyCorpus when no documents remain. `skipped` is carried through
    /// for reporting only.
    static Corpus from_documents(std::vector<Document> docs, std::size_t skipped = 0);

    const std::vector<Document>& documents() const noexcept { return docs_; }
    const std::vector<std::string>& label_set() const noexcept { return labels_; }
    std::size_t size() const noexcept { return docs_.size(); }
    std::size_t skipped_records() const noexcept { return skipped_; }
    const Document& operator[](std::size_t i) const { return docs_[i]; }

    bool operator==(const Corpus& other) const { return docs_ == other.docs_; }

private:
    std::vector<Document> docs_;
    std::vector<std::string> labels_;
    std::size_t skipped_ = 0;
};

struct TokenStream {
    std::string doc_id;
    std::vector<std::string> tokens;

    bool empty() const noexcept { return tokens.empty(); }
};

enum class CorpusFormat { Jsonl, PubmedXml };

CorpusFormat parse_corpus_format(std::string_view name);

struct PubmedOptions {
    // Label preference when a record carries several major descriptors;
    // matched case-insensitively. Empty means the first major descriptor
    // in record order wins.
    std::vector<std::string> class_priority;
};

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const PubmedOptions& pubmed = {});

/// One JSON object per line: {"id", "text", "label"}. Blank lines are
/// ignored; records without usable text are counted as skipped.
Corpus parse_jsonl(std::istream& in);

/// efetch rettype=abstract XML. Label is the major MeSH descriptor.
Corpus parse_pubmed_xml(std::string_view xml, const PubmedOptions& opts = {});

void write_jsonl(std::ostream& out, const Corpus& corpus);

// ---------------------------------------------------------------------------
// Text handling

/// Unicode simple lowercase of UTF-8 text. Invalid bytes become U+FFFD.
std::string to_lower(std::string_view text);

/// Collapses runs of Unicode whitespace to a single space and trims.
std::string normalize_whitespace(std::string_view text);

/// Lowercased tokens: maximal runs of letters, digits and '-', keeping
/// runs of at least two code points.
std::vector<std::string> tokenize(std::string_view text);

TokenStream tokenize(const Document& doc);

}  // namespace clustinfo

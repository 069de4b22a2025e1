#include "clustinfo/corpus.hpp"

#include <algorithm>
#include <clocale>
#include <cwctype>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>
#include <locale.h>

#include "clustinfo/error.hpp"

namespace clustinfo {

namespace {

// ---------------------------------------------------------------------------
// UTF-8 and character classes

constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one code point starting at `pos`, advancing it.
char32_t decode_utf8(std::string_view s, std::size_t& pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    int len;
    char32_t cp;
    if (b0 < 0x80) {
        ++pos;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++pos;
        return kReplacement;
    }
    if (pos + len > s.size()) {
        ++pos;
        return kReplacement;
    }
    for (int i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            ++pos;
            return kReplacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    pos += len;
    // Overlong forms, surrogates and out-of-range values.
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return kReplacement;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

/// Unicode character tables come from glibc's C.UTF-8 locale. Without it,
/// classification degrades to ASCII with every other code point treated as
/// a caseless letter.
class CharClasses {
public:
    CharClasses() {
        for (const char* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
            loc_ = newlocale(LC_CTYPE_MASK, name, static_cast<locale_t>(0));
            if (loc_ != static_cast<locale_t>(0)) break;
        }
    }
    ~CharClasses() {
        if (loc_ != static_cast<locale_t>(0)) freelocale(loc_);
    }
    CharClasses(const CharClasses&) = delete;
    CharClasses& operator=(const CharClasses&) = delete;

    bool is_word(char32_t cp) const {
        if (cp == U'-') return true;
        if (cp < 0x80) return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9');
        if (cp == kReplacement) return false;
        if (!has_locale()) return true;
        return iswalnum_l(static_cast<wint_t>(cp), loc_) != 0;
    }

    bool is_space(char32_t cp) const {
        if (cp < 0x80) return cp == U' ' || (cp >= U'\t' && cp <= U'\r');
        if (!has_locale()) return cp == 0x85 || cp == 0xA0;
        return iswspace_l(static_cast<wint_t>(cp), loc_) != 0 || cp == 0xA0;
    }

    char32_t lower(char32_t cp) const {
        if (cp < 0x80) return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
        if (!has_locale()) return cp;
        return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc_));
    }

private:
    bool has_locale() const { return loc_ != static_cast<locale_t>(0); }
    locale_t loc_ = static_cast<locale_t>(0);
};

const CharClasses& char_classes() {
    static const CharClasses classes;
    return classes;
}

std::string trim_copy(std::string_view s) {
    return normalize_whitespace(s);
}

// ---------------------------------------------------------------------------
// PubMed XML

namespace pt = boost::property_tree;

/// Concatenates all text below `node` in document order.
void collect_text(const pt::ptree& node, std::string& out) {
    for (const auto& [key, child] : node) {
        if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
        if (key == "<xmltext>") {
            out += child.data();
        } else {
            collect_text(child, out);
        }
    }
}

std::string text_of(const pt::ptree& node) {
    std::string out = node.data();
    collect_text(node, out);
    return out;
}

std::string attr_of(const pt::ptree& node, const std::string& name) {
    return node.get<std::string>("<xmlattr>." + name, "");
}

std::optional<std::string> pick_label(const std::vector<std::string>& majors, const PubmedOptions& opts) {
    if (majors.empty()) return std::nullopt;
    for (const auto& preferred : opts.class_priority) {
        const auto key = to_lower(preferred);
        for (const auto& m : majors) {
            if (to_lower(m) == key) return m;
        }
    }
    if (!opts.class_priority.empty()) return std::nullopt;
    return majors.front();
}

Document parse_pubmed_article(const pt::ptree& article, const PubmedOptions& opts) {
    Document doc;
    const auto& citation = article.get_child("MedlineCitation", pt::ptree{});
    doc.id = trim_copy(text_of(citation.get_child("PMID", pt::ptree{})));
    if (doc.id.empty()) throw ParseError("PubmedArticle without PMID");

    const auto& art = citation.get_child("Article", pt::ptree{});
    std::string text = text_of(art.get_child("ArticleTitle", pt::ptree{}));
    std::string abstract;
    if (auto abs = art.get_child_optional("Abstract")) {
        for (const auto& [key, child] : *abs) {
            if (key != "AbstractText") continue;
            if (!abstract.empty()) abstract += ' ';
            abstract += text_of(child);
        }
    }
    if (normalize_whitespace(abstract).empty()) {
        doc.text.clear();
    } else {
        doc.text = normalize_whitespace(text + " " + abstract);
    }

    std::vector<std::string> majors;
    if (auto mesh = citation.get_child_optional("MeshHeadingList")) {
        for (const auto& [key, heading] : *mesh) {
            if (key != "MeshHeading") continue;
            for (const auto& [hkey, part] : heading) {
                if (hkey == "DescriptorName" && attr_of(part, "MajorTopicYN") == "Y") {
                    majors.push_back(trim_copy(text_of(part)));
                }
            }
        }
    }
    doc.label = pick_label(majors, opts);
    return doc;
}

}  // namespace

// ---------------------------------------------------------------------------

Corpus Corpus::from_documents(std::vector<Document> docs, std::size_t skipped) {
    if (docs.empty()) throw EmptyCorpus("corpus contains no documents with text");
    std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].id == docs[i - 1].id) throw DuplicateId("duplicate document id '" + docs[i].id + "'");
    }
    std::set<std::string> labels;
    for (const auto& d : docs) {
        if (d.id.empty()) throw ParseError("document with empty id");
        if (d.label) labels.insert(*d.label);
    }
    Corpus c;
    c.docs_ = std::move(docs);
    c.labels_.assign(labels.begin(), labels.end());
    c.skipped_ = skipped;
    return c;
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::Jsonl;
    if (name == "pubmed_xml" || name == "pubmed-xml" || name == "xml") return CorpusFormat::PubmedXml;
    throw ConfigError("unknown corpus format '" + std::string(name) + "'");
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, const PubmedOptions& pubmed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open corpus file " + path.string());
    if (format == CorpusFormat::Jsonl) return parse_jsonl(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pubmed_xml(buf.str(), pubmed);
}

Corpus parse_jsonl(std::istream& in) {
    std::vector<Document> docs;
    std::size_t skipped = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_whitespace(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object()) throw ParseError("line " + std::to_string(line_no) + ": expected a JSON object");
        const auto id = rec.find("id");
        if (id == rec.end() || !(id->is_string() || id->is_number_integer())) {
            throw ParseError("line " + std::to_string(line_no) + ": missing or invalid \"id\"");
        }
        Document doc;
        doc.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
        if (doc.id.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty \"id\"");

        const auto text = rec.find("text");
        if (text == rec.end() || !text->is_string() || normalize_whitespace(text->get_ref<const std::string&>()).empty()) {
            ++skipped;
            continue;
        }
        doc.text = normalize_whitespace(text->get_ref<const std::string&>());

        const auto label = rec.find("label");
        if (label != rec.end() && !label->is_null()) {
            if (!label->is_string()) throw ParseError("line " + std::to_string(line_no) + ": \"label\" must be a string");
            if (!label->get_ref<const std::string&>().empty()) doc.label = label->get<std::string>();
        }
        docs.push_back(std::move(doc));
    }
    return Corpus::from_documents(std::move(docs), skipped);
}

Corpus parse_pubmed_xml(std::string_view xml, const PubmedOptions& opts) {
    pt::ptree tree;
    std::istringstream in{std::string(xml)};
    try {
        pt::read_xml(in, tree, pt::xml_parser::no_concat_text);
    } catch (const pt::xml_parser_error& e) {
        throw ParseError("PubMed XML, line " + std::to_string(e.line()) + ": " + e.message());
    }
    const auto set = tree.get_child_optional("PubmedArticleSet");
    if (!set) throw ParseError("PubMed XML: missing PubmedArticleSet root");

    std::vector<Document> docs;
    std::size_t skipped = 0;
    for (const auto& [key, article] : *set) {
        if (key != "PubmedArticle") continue;
        Document doc = parse_pubmed_article(article, opts);
        if (doc.text.empty()) {
            ++skipped;
            continue;
        }
        docs.push_back(std::move(doc));
    }
    return Corpus::from_documents(std::move(docs), skipped);
}

void write_jsonl(std::ostream& out, const Corpus& corpus) {
    for (const auto& d : corpus.documents()) {
        nlohmann::json rec;
        rec["id"] = d.id;
        rec["text"] = d.text;
        rec["label"] = d.label ? nlohmann::json(*d.label) : nlohmann::json(nullptr);
        out << rec.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------

std::string to_lower(std::string_view text) {
    const auto& cc = char_classes();
    std::string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) encode_utf8(cc.lower(decode_utf8(text, pos)), out);
    return out;
}

std::string normalize_whitespace(std::string_view text) {
    const auto& cc = char_classes();
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t pos = 0; pos < text.size();) {
        const std::size_t start = pos;
        const char32_t cp = decode_utf8(text, pos);
        if (cc.is_space(cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        if (cp == kReplacement) {
            encode_utf8(cp, out);
        } else {
            out.append(text.substr(start, pos - start));
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    const auto& cc = char_classes();
    std::vector<std::string> tokens;
    std::string current;
    std::size_t current_len = 0;
    auto flush = [&] {
        if (current_len >= 2) tokens.push_back(current);
        current.clear();
        current_len = 0;
    };
    for (std::size_t pos = 0; pos < text.size();) {
        const char32_t cp = decode_utf8(text, pos);
        if (cc.is_word(cp)) {
            encode_utf8(cc.lower(cp), current);
            ++current_len;
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

TokenStream tokenize(const Document& doc) { return {doc.id, tokenize(doc.text)}; }

}  // namespace clustinfo

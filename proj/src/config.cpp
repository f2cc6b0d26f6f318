#include "feg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "feg/error.hpp"

namespace feg {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

int to_int(std::string_view key, std::string_view text) {
    std::string t = trim(text);
    int v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw UsageError("option '" + std::string(key) + "' expects an integer, got '" + t + "'");
    return v;
}

bool to_bool(std::string_view key, std::string_view text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw UsageError("option '" + std::string(key) + "' expects a boolean, got '" + t + "'");
}

std::vector<std::string> to_list(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            if (auto t = trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (auto t = trim(cur); !t.empty()) out.push_back(t);
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k{
        "corpus",  "concepts",  "embeddings",   "out",          "report",          "window",
        "min-citations", "min-refs", "years",   "mode",         "group-by",        "threads",
        "analyses", "words",    "dedup-tokens", "abstract",     "domain-depth",    "corpus-end-year",
        "regress-split"};
    return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const std::string v = trim(value);
    if (key == "corpus") {
        corpus = v;
    } else if (key == "concepts") {
        concepts = v;
    } else if (key == "embeddings") {
        embeddings = v;
    } else if (key == "out") {
        out = v;
    } else if (key == "report") {
        report = v;
    } else if (key == "window") {
        cohort.window_years = to_int(key, v);
    } else if (key == "min-citations") {
        cohort.min_citations = to_int(key, v);
    } else if (key == "min-refs") {
        cohort.min_refs = to_int(key, v);
    } else if (key == "years") {
        auto colon = v.find(':');
        if (colon == std::string::npos) throw UsageError("option 'years' expects A:B, got '" + v + "'");
        cohort.year_min = to_int(key, std::string_view(v).substr(0, colon));
        cohort.year_max = to_int(key, std::string_view(v).substr(colon + 1));
    } else if (key == "mode") {
        mode = parse_mode(v);
    } else if (key == "group-by") {
        if (v == "none")
            group_by = GroupBy::none;
        else if (v == "top_domain")
            group_by = GroupBy::top_domain;
        else
            throw UsageError("option 'group-by' expects none|top_domain, got '" + v + "'");
    } else if (key == "threads") {
        int t = to_int(key, v);
        if (t < 1) throw UsageError("option 'threads' must be >= 1");
        threads = static_cast<unsigned>(t);
    } else if (key == "analyses") {
        analyses = to_list(v);
    } else if (key == "words") {
        words = to_list(v);
    } else if (key == "dedup-tokens") {
        dedup_tokens = to_bool(key, v);
    } else if (key == "abstract") {
        use_abstract = to_bool(key, v);
    } else if (key == "domain-depth") {
        domain_depth = to_int(key, v);
    } else if (key == "corpus-end-year") {
        corpus_end_year = to_int(key, v);
    } else if (key == "regress-split") {
        regress_split = to_int(key, v);
    } else {
        throw UsageError("unknown option '" + std::string(key) + "'");
    }
}

std::string RunConfig::get(std::string_view key) const {
    if (key == "corpus") return corpus;
    if (key == "concepts") return concepts;
    if (key == "embeddings") return embeddings;
    if (key == "out") return out;
    if (key == "report") return report;
    if (key == "window") return std::to_string(cohort.window_years);
    if (key == "min-citations") return std::to_string(cohort.min_citations);
    if (key == "min-refs") return std::to_string(cohort.min_refs);
    if (key == "years") return std::to_string(cohort.year_min) + ":" + std::to_string(cohort.year_max);
    if (key == "mode") return std::string(to_string(mode));
    if (key == "group-by") return group_by == GroupBy::none ? "none" : "top_domain";
    if (key == "threads") return std::to_string(threads);
    if (key == "analyses") return join(analyses);
    if (key == "words") return join(words);
    if (key == "dedup-tokens") return dedup_tokens ? "true" : "false";
    if (key == "abstract") return use_abstract ? "true" : "false";
    if (key == "domain-depth") return std::to_string(domain_depth);
    if (key == "corpus-end-year") return corpus_end_year ? std::to_string(*corpus_end_year) : "";
    if (key == "regress-split") return regress_split ? std::to_string(*regress_split) : "";
    throw UsageError("unknown option '" + std::string(key) + "'");
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        set(trim(std::string_view(t).substr(0, eq)), std::string_view(t).substr(eq + 1));
    }
}

std::string env_name(std::string_view prefix, std::string_view key) {
    std::string name(prefix);
    for (char c : key) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return name;
}

void RunConfig::apply_env(std::string_view prefix) {
    for (const auto& key : keys())
        if (const char* value = std::getenv(env_name(prefix, key).c_str())) set(key, value);
}

void RunConfig::validate() const {
    if (corpus.empty()) throw UsageError("no corpus given");
    for (const auto* path : {&corpus, &concepts, &embeddings})
        if (!path->empty() && !std::filesystem::exists(*path))
            throw UsageError("no such file or directory: '" + *path + "'");
    validate_settings();
}

void RunConfig::validate_settings() const {
    cohort.validate();
    if (analyses.empty()) throw UsageError("no analyses selected");
    if (domain_depth < 0) throw UsageError("domain-depth must be >= 0");
}

}  // namespace feg

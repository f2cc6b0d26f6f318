#include "feg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "json.hpp"

#include "feg/error.hpp"

namespace feg::synth {

namespace {

// Thin wrapper over mt19937_64 with explicit mappings, so the numbers do not
// depend on a standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }

    bool chance(double p) { return uniform() < p; }

    double normal() {
        if (spare_) {
            double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        return r * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

enum class Archetype { extensional, foundational, generalizational };

struct Mix {
    double extensional;
    double foundational;
};

Mix mix_for(const Params& p, int target_year) {
    if (p.kind == Kind::archetype) return {0.52, 0.25};
    const double span = std::max(p.era_boundary - p.year_first, p.year_last - p.era_boundary);
    const double closeness = span > 0 ? 1.0 - std::abs(target_year - p.era_boundary) / span : 1.0;
    return {0.35 + 0.45 * closeness, 0.05};
}

Archetype draw(Rng& rng, const Mix& mix) {
    const double u = rng.uniform();
    if (u < mix.extensional) return Archetype::extensional;
    if (u < mix.extensional + mix.foundational) return Archetype::foundational;
    return Archetype::generalizational;
}

std::string paper_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "W%06zu", i + 1);
    return buf;
}

void pick_some(Rng& rng, const std::vector<std::size_t>& pool, std::size_t count, std::vector<std::size_t>& out) {
    if (pool.empty()) return;
    if (pool.size() <= count) {
        out.insert(out.end(), pool.begin(), pool.end());
        return;
    }
    std::vector<std::size_t> tmp(pool);
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + rng.below(tmp.size() - i);
        std::swap(tmp[i], tmp[j]);
        out.push_back(tmp[i]);
    }
}

std::string format_vector(const std::string& id, const std::vector<double>& v) {
    std::string line = id;
    char buf[32];
    for (double x : v) {
        std::snprintf(buf, sizeof buf, " %.6g", x);
        line += buf;
    }
    line += '\n';
    return line;
}

std::vector<double> noisy_axis(Rng& rng, std::size_t dim, int axis, double noise) {
    std::vector<double> v(dim);
    for (auto& x : v) x = noise * rng.normal();
    if (axis >= 0) v[static_cast<std::size_t>(axis) % dim] += 1.0;
    return v;
}

constexpr int kSubconcepts = 3;
constexpr int kVenuesPerDomain = 4;
constexpr int kWordsPerDomain = 40;
constexpr int kDanglingPerDomain = 30;

const std::vector<std::string>& general_words() {
    static const std::vector<std::string> words{
        "software", "tool",   "device",  "review",  "guideline", "tutorial", "new",      "novel",   "innovative",
        "theory",   "metric", "hypothesis", "analysis", "study",   "method",  "model",    "approach", "results"};
    return words;
}

std::string domain_word(int d, int k) { return "d" + std::to_string(d) + "w" + std::to_string(k); }

}  // namespace

std::string_view to_string(Kind kind) { return kind == Kind::archetype ? "archetype" : "two_era"; }

Kind parse_kind(std::string_view text) {
    if (text == "archetype") return Kind::archetype;
    if (text == "two_era" || text == "two-era") return Kind::two_era;
    throw UsageError("unknown synthetic corpus kind '" + std::string(text) + "' (archetype|two_era)");
}

void Params::validate() const {
    if (papers < 10) throw UsageError("synthetic corpus needs at least 10 papers");
    if (year_last <= year_first) throw UsageError("synthetic year range must span at least two years");
    if (domains < 2) throw UsageError("synthetic corpus needs at least two domains");
    if (dim < static_cast<std::size_t>(domains)) throw UsageError("embedding dimension must be at least the domain count");
    if (kind == Kind::two_era && (era_boundary <= year_first || era_boundary >= year_last))
        throw UsageError("era boundary must lie strictly inside the year range");
}

Corpus generate(const Params& p) {
    p.validate();
    Rng rng(p.seed);
    const int n_years = p.year_last - p.year_first + 1;
    const std::size_t n = p.papers;

    std::vector<int> year(n), domain(n);
    for (std::size_t i = 0; i < n; ++i) {
        year[i] = p.year_first + static_cast<int>(i * static_cast<std::size_t>(n_years) / n);
        domain[i] = static_cast<int>(rng.below(static_cast<std::size_t>(p.domains)));
    }
    // by_slot[(year - first) * domains + domain] -> papers
    std::vector<std::vector<std::size_t>> by_slot(static_cast<std::size_t>(n_years * p.domains));
    for (std::size_t i = 0; i < n; ++i)
        by_slot[static_cast<std::size_t>((year[i] - p.year_first) * p.domains + domain[i])].push_back(i);

    // lineage[t]: references t took on through extensional anchors
    std::vector<std::vector<std::size_t>> refs(n), citers(n), lineage(n);
    std::vector<std::vector<std::string>> dangling(n);

    // Draws (target, archetype) for one anchor of `citing`. Extensional and
    // foundational anchors look back 1-4 years; generalizational anchors,
    // which treat older work as an established tool, look back up to 8.
    // Rejecting on the offset keeps each target year's generalizational
    // share monotone in the mix for that year.
    struct Anchor {
        std::size_t target;
        Archetype kind;
    };
    auto pick_anchor = [&](std::size_t citing) -> std::optional<Anchor> {
        for (int attempt = 0; attempt < 32; ++attempt) {
            const int offset = rng.between(1, 8);
            const int y = year[citing] - offset;
            if (y < p.year_first) continue;
            const auto& pool = by_slot[static_cast<std::size_t>((y - p.year_first) * p.domains + domain[citing])];
            if (pool.empty()) continue;
            const Archetype kind = draw(rng, mix_for(p, y));
            if (kind != Archetype::generalizational && offset > 4) continue;
            return Anchor{pool[rng.below(pool.size())], kind};
        }
        return std::nullopt;
    };

    std::size_t year_begin = 0;
    while (year_begin < n) {
        std::size_t year_end = year_begin;
        while (year_end < n && year[year_end] == year[year_begin]) ++year_end;
        for (std::size_t i = year_begin; i < year_end; ++i) {
            if (year[i] == p.year_first) {
                const int count = rng.between(2, 4);
                for (int c = 0; c < count; ++c)
                    dangling[i].push_back("R" + std::to_string(domain[i]) + "_" +
                                          std::to_string(rng.below(kDanglingPerDomain)));
                continue;
            }
            const int anchors = rng.between(3, 4);
            for (int a = 0; a < anchors; ++a) {
                auto anchor = pick_anchor(i);
                if (!anchor) continue;
                std::optional<std::size_t> target = anchor->target;
                const Archetype kind = anchor->kind;
                if (kind == Archetype::generalizational && rng.chance(0.8)) {
                    int other = static_cast<int>(rng.below(static_cast<std::size_t>(p.domains - 1)));
                    if (other >= domain[i]) ++other;
                    const auto& pool =
                        by_slot[static_cast<std::size_t>((year[*target] - p.year_first) * p.domains + other)];
                    if (!pool.empty()) target = pool[rng.below(pool.size())];
                }
                const std::size_t t = *target;
                refs[i].push_back(t);
                std::vector<std::size_t> extra;
                if (kind == Archetype::extensional) {
                    std::vector<std::size_t> pool = lineage[t];
                    if (pool.empty())
                        for (std::size_t r : refs[t])
                            if (domain[r] == domain[t]) pool.push_back(r);
                    if (pool.empty()) pool = refs[t];
                    pick_some(rng, pool, static_cast<std::size_t>(rng.between(1, 2)), extra);
                    lineage[i].push_back(t);
                    lineage[i].insert(lineage[i].end(), extra.begin(), extra.end());
                } else if (kind == Archetype::foundational) {
                    std::vector<std::size_t> pool;
                    for (std::size_t c : citers[t])
                        if (year[c] < year[i]) pool.push_back(c);
                    pick_some(rng, pool, static_cast<std::size_t>(rng.between(1, 2)), extra);
                }
                refs[i].insert(refs[i].end(), extra.begin(), extra.end());
            }
            std::sort(refs[i].begin(), refs[i].end());
            refs[i].erase(std::unique(refs[i].begin(), refs[i].end()), refs[i].end());
            std::sort(lineage[i].begin(), lineage[i].end());
            lineage[i].erase(std::unique(lineage[i].begin(), lineage[i].end()), lineage[i].end());
        }
        // citers become visible once the whole year has been generated
        for (std::size_t i = year_begin; i < year_end; ++i)
            for (std::size_t r : refs[i]) citers[r].push_back(i);
        year_begin = year_end;
    }

    Corpus out;
    const auto& words = general_words();
    std::vector<int> venue(n);
    for (std::size_t i = 0; i < n; ++i) {
        venue[i] = static_cast<int>(rng.below(kVenuesPerDomain));
        nlohmann::json rec;
        rec["id"] = paper_id(i);
        rec["year"] = year[i];
        std::vector<std::string> ref_ids = dangling[i];
        for (std::size_t r : refs[i]) ref_ids.push_back(paper_id(r));
        rec["refs"] = ref_ids;
        const std::string root = "C" + std::to_string(domain[i]);
        const std::string sub = root + "." + std::to_string(rng.below(kSubconcepts));
        nlohmann::json concepts = nlohmann::json::array();
        concepts.push_back({{"id", root}, {"level", 0}, {"score", 0.6 + 0.3 * rng.uniform()}});
        concepts.push_back({{"id", sub}, {"level", 1}, {"score", 0.3 + 0.4 * rng.uniform()}, {"parents", {root}}});
        if (rng.chance(0.2)) {
            int other = static_cast<int>(rng.below(static_cast<std::size_t>(p.domains - 1)));
            if (other >= domain[i]) ++other;
            concepts.push_back({{"id", "C" + std::to_string(other)}, {"level", 0}, {"score", 0.2 * rng.uniform()}});
        }
        rec["concepts"] = concepts;
        std::vector<std::string> title;
        const int n_tokens = rng.between(5, 9);
        for (int k = 0; k < n_tokens; ++k) {
            if (rng.chance(0.25))
                title.push_back(words[rng.below(words.size())]);
            else
                title.push_back(domain_word(domain[i], static_cast<int>(rng.below(kWordsPerDomain))));
        }
        rec["title_tokens"] = title;
        rec["venue"] = "V" + std::to_string(domain[i]) + "_" + std::to_string(venue[i]);
        out.records += rec.dump() + "\n";
    }

    for (int d = 0; d < p.domains; ++d) {
        const std::string root = "C" + std::to_string(d);
        out.concepts += nlohmann::json{{"id", root}, {"level", 0}}.dump() + "\n";
        for (int k = 0; k < kSubconcepts; ++k)
            out.concepts += nlohmann::json{{"id", root + "." + std::to_string(k)}, {"level", 1}, {"parents", {root}}}.dump() + "\n";
    }

    if (p.embeddings) {
        std::string paper_vec = std::to_string(n) + " " + std::to_string(p.dim) + "\n";
        for (std::size_t i = 0; i < n; ++i) paper_vec += format_vector(paper_id(i), noisy_axis(rng, p.dim, domain[i], 0.3));
        out.embedding_files["paper.vec"] = std::move(paper_vec);

        const std::size_t n_venues = static_cast<std::size_t>(p.domains * kVenuesPerDomain);
        std::string venue_vec = std::to_string(n_venues) + " " + std::to_string(p.dim) + "\n";
        for (int d = 0; d < p.domains; ++d)
            for (int v = 0; v < kVenuesPerDomain; ++v)
                venue_vec += format_vector("V" + std::to_string(d) + "_" + std::to_string(v), noisy_axis(rng, p.dim, d, 0.3));
        out.embedding_files["venue.vec"] = std::move(venue_vec);

        const std::size_t n_words = words.size() + static_cast<std::size_t>(p.domains * kWordsPerDomain);
        std::string token_vec = std::to_string(n_words) + " " + std::to_string(p.dim) + "\n";
        for (const auto& w : words) token_vec += format_vector(w, noisy_axis(rng, p.dim, -1, 0.5));
        for (int d = 0; d < p.domains; ++d)
            for (int k = 0; k < kWordsPerDomain; ++k)
                token_vec += format_vector(domain_word(d, k), noisy_axis(rng, p.dim, d, 0.4));
        out.embedding_files["title_token.vec"] = std::move(token_vec);
    }
    return out;
}

void write(const Corpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create '" + dir.string() + "': " + ec.message());
    auto put = [](const std::filesystem::path& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary);
        if (!f || !f.write(content.data(), static_cast<std::streamsize>(content.size())))
            throw UsageError("cannot write '" + path.string() + "'");
    };
    put(dir / "corpus.jsonl", corpus.records);
    put(dir / "concepts.jsonl", corpus.concepts);
    if (!corpus.embedding_files.empty()) {
        std::filesystem::create_directories(dir / "embeddings", ec);
        if (ec) throw UsageError("cannot create embedding directory: " + ec.message());
        for (const auto& [name, content] : corpus.embedding_files) put(dir / "embeddings" / name, content);
    }
}

}  // namespace feg::synth

#include "feg/domains.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "json.hpp"

#include "feg/error.hpp"

namespace feg {

using nlohmann::json;

ConceptTree ConceptTree::load(std::istream& in) {
    ConceptTree tree;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        auto fail = [&](const std::string& what) { return DataError("concepts line " + std::to_string(line) + ": " + what); };
        json obj;
        try {
            obj = json::parse(text);
        } catch (const json::parse_error& e) {
            throw fail(std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) throw fail("missing string 'id'");
        if (!obj.contains("level") || !obj["level"].is_number_integer()) throw fail("missing integer 'level'");
        std::vector<std::string> parents;
        if (obj.contains("parents") && !obj["parents"].is_null()) {
            if (!obj["parents"].is_array()) throw fail("'parents' must be an array");
            for (const auto& p : obj["parents"]) {
                if (!p.is_string()) throw fail("'parents' must hold strings");
                parents.push_back(p.get<std::string>());
            }
        }
        const std::string id = obj["id"].get<std::string>();
        if (tree.contains(id)) throw fail("duplicate concept id '" + id + "'");
        tree.add(id, obj["level"].get<int>(), std::move(parents));
    }
    return tree;
}

ConceptTree ConceptTree::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open concept file '" + path + "'");
    return load(in);
}

void ConceptTree::add(const std::string& id, int level, std::vector<std::string> parents) {
    if (nodes_.count(id)) return;
    Node n;
    n.level = level;
    n.parents = std::move(parents);
    std::sort(n.parents.begin(), n.parents.end());
    n.parents.erase(std::unique(n.parents.begin(), n.parents.end()), n.parents.end());
    nodes_.emplace(id, std::move(n));
    finalized_ = false;
}

void ConceptTree::merge_inline(const CorpusStore& store) {
    for (PaperIndex p : store.papers())
        for (const auto& c : store.record(p).concepts) add(c.concept_id, c.level, c.parents);
}

void ConceptTree::finalize() {
    for (auto& [id, n] : nodes_) n.children.clear();
    for (auto& [id, n] : nodes_) {
        if (n.level < 0) throw DataError("concept '" + id + "' has negative level");
        if (n.level == 0 && !n.parents.empty()) throw DataError("level-0 concept '" + id + "' has parents");
        if (n.level > 0 && n.parents.empty()) throw DataError("concept '" + id + "' at level " + std::to_string(n.level) + " has no parent");
        for (const auto& p : n.parents) {
            auto it = nodes_.find(p);
            if (it == nodes_.end()) throw DataError("concept '" + id + "' names unknown parent '" + p + "'");
            if (it->second.level + 1 != n.level)
                throw DataError("concept '" + id + "' (level " + std::to_string(n.level) + ") has parent '" + p +
                                "' at level " + std::to_string(it->second.level));
            it->second.children.push_back(id);
        }
    }
    for (auto& [id, n] : nodes_) std::sort(n.children.begin(), n.children.end());

    // Levels strictly decrease towards the roots, so memoised recursion
    // terminates.
    roots_.clear();
    std::function<const std::vector<std::string>&(const std::string&)> resolve =
        [&](const std::string& id) -> const std::vector<std::string>& {
        if (auto it = roots_.find(id); it != roots_.end()) return it->second;
        const Node& n = nodes_.at(id);
        std::vector<std::string> out;
        if (n.level == 0) {
            out.push_back(id);
        } else {
            for (const auto& p : n.parents) {
                const auto& up = resolve(p);
                out.insert(out.end(), up.begin(), up.end());
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
        }
        return roots_.emplace(id, std::move(out)).first->second;
    };
    for (const auto& [id, n] : nodes_) resolve(id);
    finalized_ = true;
}

bool ConceptTree::contains(std::string_view id) const { return nodes_.count(std::string(id)) > 0; }

const ConceptTree::Node& ConceptTree::node(std::string_view id) const {
    auto it = nodes_.find(std::string(id));
    if (it == nodes_.end()) throw NotFoundError("unknown concept '" + std::string(id) + "'");
    return it->second;
}

std::span<const std::string> ConceptTree::top_ancestors(std::string_view id) const {
    if (!finalized_) throw InvariantError("concept tree used before finalize()");
    auto it = roots_.find(std::string(id));
    if (it == roots_.end()) return {};
    return it->second;
}

namespace {

int level_of(const ConceptTree& tree, const ConceptAssignment& a) {
    return tree.contains(a.concept_id) ? tree.node(a.concept_id).level : a.level;
}

// Keeps the candidates not strictly below the maximum. Ties are judged with a
// relative tolerance so the outcome does not depend on the score scale.
void remove_low_scores(std::map<std::string, double>& scores) {
    double best = 0.0;
    for (const auto& [id, s] : scores) best = std::max(best, s);
    const double floor = best - 1e-12 * best;
    std::erase_if(scores, [&](const auto& kv) { return kv.second < floor; });
}

}  // namespace

DomainSet original_domains(const ConceptTree& tree, std::span<const ConceptAssignment> assignments) {
    DomainSet out;
    for (const auto& a : assignments)
        if (level_of(tree, a) == 0) out.push_back(a.concept_id);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

DomainSet top_domains(const ConceptTree& tree, std::span<const ConceptAssignment> assignments, int depth) {
    std::map<std::string, double> candidates;
    for (const auto& a : assignments)
        if (level_of(tree, a) == 0) candidates[a.concept_id] += a.score;
    if (candidates.empty()) return {};
    remove_low_scores(candidates);

    for (int level = 1; level <= depth && candidates.size() > 1; ++level) {
        for (auto& [id, s] : candidates) s = 0.0;
        for (const auto& a : assignments) {
            if (level_of(tree, a) != level) continue;
            for (const auto& root : tree.top_ancestors(a.concept_id))
                if (auto it = candidates.find(root); it != candidates.end()) it->second += a.score;
        }
        remove_low_scores(candidates);
    }

    DomainSet out;
    out.reserve(candidates.size());
    for (const auto& [id, s] : candidates) out.push_back(id);
    return out;
}

std::optional<bool> is_cross_domain(const DomainSet& citing, const DomainSet& cited) {
    if (citing.empty() || cited.empty()) return std::nullopt;
    auto a = citing.begin();
    auto b = cited.begin();
    while (a != citing.end() && b != cited.end()) {
        if (*a < *b)
            ++a;
        else if (*b < *a)
            ++b;
        else
            return false;
    }
    return true;
}

double relative_delta(double group_mean, double rest_mean) {
    if (!(rest_mean > 0.0) || !std::isfinite(rest_mean))
        throw UndefinedError("relative delta needs a positive complement mean");
    return (group_mean - rest_mean) / rest_mean;
}

}  // namespace feg

#pragma once
// Concept hierarchy, top-domain resolution and cross-domain classification.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "feg/corpus.hpp"

namespace feg {

// Sorted, duplicate-free set of level-0 concept ids.
using DomainSet = std::vector<std::string>;

class ConceptTree {
public:
    struct Node {
        int level = 0;
        std::vector<std::string> parents;
        std::vector<std::string> children;
    };

    // Newline-delimited {"id", "level", "parents"} records.
    static ConceptTree load(std::istream& in);
    static ConceptTree load_file(const std::string& path);

    // Adds a node. Existing nodes are left untouched.
    void add(const std::string& id, int level, std::vector<std::string> parents);

    // Adds every concept carried inline on corpus records that is not yet
    // known to the tree.
    void merge_inline(const CorpusStore& store);

    // Builds children lists and level-0 ancestor sets; validates that every
    // parent exists, each edge descends exactly one level and level-0 nodes
    // have no parents. Throws DataError otherwise.
    void finalize();

    bool contains(std::string_view id) const;
    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::string_view id) const;

    // Level-0 concepts reachable through parent links (the concept itself
    // for a level-0 node). Empty for unknown ids.
    std::span<const std::string> top_ancestors(std::string_view id) const;

private:
    std::unordered_map<std::string, Node> nodes_;
    std::unordered_map<std::string, std::vector<std::string>> roots_;
    bool finalized_ = false;
};

// All assigned level-0 concepts.
DomainSet original_domains(const ConceptTree& tree, std::span<const ConceptAssignment> assignments);

// Score-elimination over levels 0..depth. Empty when the paper carries no
// level-0 assignment.
DomainSet top_domains(const ConceptTree& tree, std::span<const ConceptAssignment> assignments, int depth = 5);

// nullopt when either side is empty (excluded from rates).
std::optional<bool> is_cross_domain(const DomainSet& citing, const DomainSet& cited);

// (M - M_rest) / M_rest; throws UndefinedError unless M_rest > 0.
double relative_delta(double group_mean, double rest_mean);

}  // namespace feg

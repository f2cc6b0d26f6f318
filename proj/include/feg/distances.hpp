#pragma once
// Cosine distances over externally trained embeddings.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <absl/container/flat_hash_map.h>

namespace feg {

enum class EmbeddingNamespace { title_token, abstract_token, paper, venue };

std::string_view to_string(EmbeddingNamespace ns);
std::optional<EmbeddingNamespace> parse_namespace(std::string_view text);

class EmbeddingStore {
public:
    EmbeddingStore() = default;
    EmbeddingStore(EmbeddingNamespace ns, std::size_t dim, std::optional<int> vintage = std::nullopt);

    // "<count> <dim>" header, then "<id> <v1> ... <vdim>" per line.
    static EmbeddingStore load(std::istream& in, EmbeddingNamespace ns, std::optional<int> vintage = std::nullopt);
    static EmbeddingStore load_file(const std::filesystem::path& path, EmbeddingNamespace ns,
                                    std::optional<int> vintage = std::nullopt);

    void add(const std::string& id, std::span<const double> vec);

    EmbeddingNamespace ns() const { return ns_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return index_.size(); }
    std::optional<int> vintage() const { return vintage_; }

    // nullptr when the id has no vector.
    const double* find(std::string_view id) const;

private:
    EmbeddingNamespace ns_ = EmbeddingNamespace::paper;
    std::size_t dim_ = 0;
    std::optional<int> vintage_;
    absl::flat_hash_map<std::string, std::size_t> index_;
    std::vector<double> data_;
};

// Every store found in a directory, keyed by namespace and vintage. Files
// are named "<namespace>.vec" (static) or "<namespace>.<year>.vec".
class EmbeddingSet {
public:
    static EmbeddingSet load_dir(const std::filesystem::path& dir);

    void insert(EmbeddingStore store);
    bool has(EmbeddingNamespace ns) const;

    // For a paper published in `year`, the latest vintage trained through
    // year - 1; the static store when no vintages exist. nullptr if none fit.
    const EmbeddingStore* select(EmbeddingNamespace ns, int year) const;

private:
    struct Slot {
        std::optional<EmbeddingStore> fixed;
        std::map<int, EmbeddingStore> vintages;
    };
    std::map<EmbeddingNamespace, Slot> slots_;
};

struct DistanceResult {
    std::optional<double> value;
    std::size_t n_items = 0;
    std::size_t n_missing = 0;
};

// Component-wise mean; throws UsageError on an empty list.
std::vector<double> centroid(std::span<const std::span<const double>> vectors);

// nullopt when either vector has zero norm.
std::optional<double> cosine_distance(std::span<const double> a, std::span<const double> b);

// Mean of 1 - cos(item, centroid) over the items that have vectors; needs at
// least two such items and a nonzero centroid.
DistanceResult within_paper_distance(const EmbeddingStore& store, std::span<const std::string> ids, bool dedup = false);

// Centroid of the vectors found for `ids` (zero vectors count as missing);
// nullopt when none are found.
std::optional<std::vector<double>> centroid_of(const EmbeddingStore& store, std::span<const std::string> ids,
                                               bool dedup = false);

// 1 - cos between the two centroids.
DistanceResult cross_paper_distance(const EmbeddingStore& store, std::span<const std::string> ids_a,
                                    std::span<const std::string> ids_b, bool dedup = false);

}  // namespace feg

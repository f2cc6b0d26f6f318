#include "feg/distances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "feg/error.hpp"

namespace feg {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

bool is_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Resolves ids to vectors, skipping ids without vectors (and zero vectors,
// which carry no direction).
std::vector<std::span<const double>> lookup(const EmbeddingStore& store, std::span<const std::string> ids, bool dedup,
                                            std::size_t& missing) {
    std::vector<std::string_view> keys(ids.begin(), ids.end());
    if (dedup) {
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    }
    std::vector<std::span<const double>> out;
    out.reserve(keys.size());
    for (auto key : keys) {
        const double* v = store.find(key);
        std::span<const double> vec;
        if (v) vec = {v, store.dim()};
        if (v && !is_zero(vec))
            out.push_back(vec);
        else
            ++missing;
    }
    return out;
}

}  // namespace

std::string_view to_string(EmbeddingNamespace ns) {
    switch (ns) {
        case EmbeddingNamespace::title_token: return "title_token";
        case EmbeddingNamespace::abstract_token: return "abstract_token";
        case EmbeddingNamespace::paper: return "paper";
        case EmbeddingNamespace::venue: return "venue";
    }
    return "?";
}

std::optional<EmbeddingNamespace> parse_namespace(std::string_view text) {
    for (auto ns : {EmbeddingNamespace::title_token, EmbeddingNamespace::abstract_token, EmbeddingNamespace::paper,
                    EmbeddingNamespace::venue})
        if (to_string(ns) == text) return ns;
    return std::nullopt;
}

EmbeddingStore::EmbeddingStore(EmbeddingNamespace ns, std::size_t dim, std::optional<int> vintage)
    : ns_(ns), dim_(dim), vintage_(vintage) {
    if (dim == 0) throw DataError("embedding dimension must be positive");
}

void EmbeddingStore::add(const std::string& id, std::span<const double> vec) {
    if (vec.size() != dim_) throw DataError("embedding '" + id + "' has dimension " + std::to_string(vec.size()) +
                                            ", expected " + std::to_string(dim_));
    for (double x : vec)
        if (!std::isfinite(x)) throw DataError("embedding '" + id + "' has a non-finite component");
    if (!index_.emplace(id, data_.size() / dim_).second) throw DataError("duplicate embedding id '" + id + "'");
    data_.insert(data_.end(), vec.begin(), vec.end());
}

const double* EmbeddingStore::find(std::string_view id) const {
    auto it = index_.find(absl::string_view(id.data(), id.size()));
    if (it == index_.end()) return nullptr;
    return data_.data() + it->second * dim_;
}

EmbeddingStore EmbeddingStore::load(std::istream& in, EmbeddingNamespace ns, std::optional<int> vintage) {
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) { return DataError("embeddings line " + std::to_string(lineno) + ": " + what); };
    if (!std::getline(in, line)) throw DataError("embedding file is empty");
    ++lineno;
    std::size_t count = 0;
    std::size_t dim = 0;
    {
        std::istringstream header(line);
        if (!(header >> count >> dim) || dim == 0) throw fail("header must be '<count> <dim>'");
    }
    EmbeddingStore store(ns, dim, vintage);
    store.index_.reserve(count);
    store.data_.reserve(count * dim);
    std::vector<double> vec(dim);
    while (std::getline(in, line)) {
        ++lineno;
        const char* p = line.data();
        const char* end = p + line.size();
        auto skip_ws = [&] {
            while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
        };
        skip_ws();
        if (p == end) continue;
        const char* id_begin = p;
        while (p < end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
        std::string id(id_begin, p);
        for (std::size_t d = 0; d < dim; ++d) {
            skip_ws();
            auto res = std::from_chars(p, end, vec[d]);
            if (res.ec != std::errc()) throw fail("expected " + std::to_string(dim) + " numeric components");
            p = res.ptr;
        }
        skip_ws();
        if (p != end) throw fail("more than " + std::to_string(dim) + " components");
        try {
            store.add(id, vec);
        } catch (const DataError& e) {
            throw fail(e.what());
        }
    }
    if (store.size() != count)
        throw DataError("embedding header declares " + std::to_string(count) + " vectors, found " +
                        std::to_string(store.size()));
    return store;
}

EmbeddingStore EmbeddingStore::load_file(const std::filesystem::path& path, EmbeddingNamespace ns,
                                         std::optional<int> vintage) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open embedding file '" + path.string() + "'");
    return load(in, ns, vintage);
}

EmbeddingSet EmbeddingSet::load_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw UsageError("embedding directory '" + dir.string() + "' not found");
    EmbeddingSet set;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".vec") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        // stem is "<namespace>" or "<namespace>.<year>"
        std::string stem = path.stem().string();
        std::optional<int> vintage;
        if (auto dot = stem.find('.'); dot != std::string::npos) {
            int year = 0;
            auto tail = std::string_view(stem).substr(dot + 1);
            auto res = std::from_chars(tail.data(), tail.data() + tail.size(), year);
            if (res.ec != std::errc() || res.ptr != tail.data() + tail.size())
                throw DataError("embedding file '" + path.filename().string() + "' has a non-year vintage");
            vintage = year;
            stem.resize(dot);
        }
        auto ns = parse_namespace(stem);
        if (!ns) continue;
        set.insert(EmbeddingStore::load_file(path, *ns, vintage));
    }
    return set;
}

void EmbeddingSet::insert(EmbeddingStore store) {
    Slot& slot = slots_[store.ns()];
    if (auto v = store.vintage()) {
        slot.vintages[*v] = std::move(store);
    } else {
        slot.fixed = std::move(store);
    }
}

bool EmbeddingSet::has(EmbeddingNamespace ns) const { return slots_.count(ns) > 0; }

const EmbeddingStore* EmbeddingSet::select(EmbeddingNamespace ns, int year) const {
    auto it = slots_.find(ns);
    if (it == slots_.end()) return nullptr;
    const Slot& slot = it->second;
    if (slot.vintages.empty()) return slot.fixed ? &*slot.fixed : nullptr;
    auto v = slot.vintages.upper_bound(year - 1);
    if (v == slot.vintages.begin()) return nullptr;
    return &std::prev(v)->second;
}

std::vector<double> centroid(std::span<const std::span<const double>> vectors) {
    if (vectors.empty()) throw UsageError("centroid of an empty list");
    const std::size_t dim = vectors.front().size();
    std::vector<double> c(dim, 0.0);
    for (auto v : vectors) {
        if (v.size() != dim) throw UsageError("centroid over vectors of different dimension");
        for (std::size_t d = 0; d < dim; ++d) c[d] += v[d];
    }
    const double n = static_cast<double>(vectors.size());
    for (double& x : c) x /= n;
    return c;
}

std::optional<double> cosine_distance(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return std::nullopt;
    double dot = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
    const double cos = std::clamp(dot / (na * nb), -1.0, 1.0);
    return 1.0 - cos;
}

DistanceResult within_paper_distance(const EmbeddingStore& store, std::span<const std::string> ids, bool dedup) {
    DistanceResult r;
    auto vecs = lookup(store, ids, dedup, r.n_missing);
    r.n_items = vecs.size();
    if (vecs.size() < 2) return r;
    const auto c = centroid(vecs);
    if (norm(c) == 0.0) return r;
    double sum = 0.0;
    for (auto v : vecs) sum += *cosine_distance(v, c);
    r.value = sum / static_cast<double>(vecs.size());
    return r;
}

std::optional<std::vector<double>> centroid_of(const EmbeddingStore& store, std::span<const std::string> ids,
                                               bool dedup) {
    std::size_t missing = 0;
    auto vecs = lookup(store, ids, dedup, missing);
    if (vecs.empty()) return std::nullopt;
    return centroid(vecs);
}

DistanceResult cross_paper_distance(const EmbeddingStore& store, std::span<const std::string> ids_a,
                                    std::span<const std::string> ids_b, bool dedup) {
    DistanceResult r;
    auto va = lookup(store, ids_a, dedup, r.n_missing);
    auto vb = lookup(store, ids_b, dedup, r.n_missing);
    r.n_items = va.size() + vb.size();
    if (va.empty() || vb.empty()) return r;
    r.value = cosine_distance(centroid(va), centroid(vb));
    return r;
}

}  // namespace feg

#include "feg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>

#include "json.hpp"

#include "feg/error.hpp"

namespace feg {

using nlohmann::json;

namespace {

struct RawRecord {
    PaperRecord record;
    std::vector<std::string> refs;
};

std::string line_error(std::size_t line, const std::string& what) {
    return "line " + std::to_string(line) + ": " + what;
}

using Value = rapidjson::Value;

const Value* member(const Value& obj, const char* key) {
    auto it = obj.FindMember(key);
    if (it == obj.MemberEnd() || it->value.IsNull()) return nullptr;
    return &it->value;
}

std::vector<std::string> string_array(const Value& obj, const char* key, std::size_t line, bool required) {
    std::vector<std::string> out;
    const Value* v = member(obj, key);
    if (!v) {
        if (required) throw DataError(line_error(line, std::string("missing field '") + key + "'"));
        return out;
    }
    if (!v->IsArray()) throw DataError(line_error(line, std::string("field '") + key + "' must be an array"));
    out.reserve(v->Size());
    for (const auto& item : v->GetArray()) {
        if (!item.IsString()) throw DataError(line_error(line, std::string("field '") + key + "' must hold strings"));
        out.emplace_back(item.GetString(), item.GetStringLength());
    }
    return out;
}

// Parses in place; `text` is clobbered.
RawRecord parse_record(std::string& text, std::size_t line) {
    if (text.find('\0') != std::string::npos) throw DataError(line_error(line, "NUL byte in record"));
    thread_local std::vector<char> pool(1 << 16);
    rapidjson::MemoryPoolAllocator<> alloc(pool.data(), pool.size());
    rapidjson::Document obj(&alloc);
    obj.ParseInsitu<rapidjson::kParseFullPrecisionFlag>(text.data());
    if (obj.HasParseError())
        throw DataError(line_error(line, std::string("malformed JSON: ") + rapidjson::GetParseError_En(obj.GetParseError()) +
                                             " at offset " + std::to_string(obj.GetErrorOffset())));
    if (!obj.IsObject()) throw DataError(line_error(line, "record must be a JSON object"));

    RawRecord raw;
    const Value* id = member(obj, "id");
    if (!id || !id->IsString()) throw DataError(line_error(line, "missing or non-string 'id'"));
    raw.record.paper_id.assign(id->GetString(), id->GetStringLength());
    if (raw.record.paper_id.empty()) throw DataError(line_error(line, "empty 'id'"));

    const Value* year = member(obj, "year");
    if (!year || !year->IsInt()) throw DataError(line_error(line, "missing or non-integer 'year'"));
    raw.record.pub_year = year->GetInt();

    raw.refs = string_array(obj, "refs", line, true);
    raw.record.title_tokens = string_array(obj, "title_tokens", line, false);
    if (member(obj, "abstract_tokens")) raw.record.abstract_tokens = string_array(obj, "abstract_tokens", line, false);
    if (const Value* venue = member(obj, "venue")) {
        if (!venue->IsString()) throw DataError(line_error(line, "'venue' must be a string"));
        raw.record.venue_id = std::string(venue->GetString(), venue->GetStringLength());
    }

    if (const Value* concepts = member(obj, "concepts")) {
        if (!concepts->IsArray()) throw DataError(line_error(line, "'concepts' must be an array"));
        for (const auto& c : concepts->GetArray()) {
            if (!c.IsObject()) throw DataError(line_error(line, "concept entries must be objects"));
            ConceptAssignment a;
            const Value* cid = member(c, "id");
            if (!cid || !cid->IsString()) throw DataError(line_error(line, "concept without string 'id'"));
            a.concept_id.assign(cid->GetString(), cid->GetStringLength());
            if (const Value* lvl = member(c, "level")) {
                if (!lvl->IsInt()) throw DataError(line_error(line, "concept 'level' must be an integer"));
                a.level = lvl->GetInt();
            }
            const Value* score = member(c, "score");
            if (!score || !score->IsNumber()) throw DataError(line_error(line, "concept without numeric 'score'"));
            a.score = score->GetDouble();
            if (!(a.score >= 0.0) || a.score == std::numeric_limits<double>::infinity())
                throw DataError(line_error(line, "concept score must be finite and nonnegative"));
            a.parents = string_array(c, "parents", line, false);
            raw.record.concepts.push_back(std::move(a));
        }
    }
    return raw;
}

}  // namespace

std::string IngestReport::to_json() const {
    json j = {
        {"records", records},
        {"edges", edges},
        {"self_refs_dropped", self_refs_dropped},
        {"duplicate_refs_dropped", duplicate_refs_dropped},
        {"dangling", dangling},
        {"dangling_ids", dangling_ids},
        {"min_year", min_year},
        {"max_year", max_year},
    };
    return j.dump();
}

void CohortParams::validate() const {
    if (min_refs < 0) throw UsageError("min_refs must be >= 0");
    if (min_citations < 0) throw UsageError("min_citations must be >= 0");
    if (window_years < 1) throw UsageError("window must be >= 1");
    if (year_min > year_max) throw UsageError("year_min must not exceed year_max");
}

CorpusStore CorpusStore::ingest(std::istream& in) {
    // Provisional ids: records in file order, then dangling ids as first met.
    std::vector<RawRecord> raws;
    absl::flat_hash_map<std::string, PaperIndex> index;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        RawRecord raw = parse_record(text, line);
        if (!index.emplace(raw.record.paper_id, static_cast<PaperIndex>(raws.size())).second)
            throw DataError(line_error(line, "duplicate paper id '" + raw.record.paper_id + "'"));
        raws.push_back(std::move(raw));
    }

    CorpusStore store;
    IngestReport& rep = store.report_;
    rep.records = raws.size();

    std::vector<std::pair<std::string, PaperIndex>> named;
    named.reserve(raws.size());
    for (std::size_t r = 0; r < raws.size(); ++r) named.emplace_back(raws[r].record.paper_id, static_cast<PaperIndex>(r));
    std::vector<std::vector<PaperIndex>> prov_refs(raws.size());
    for (std::size_t r = 0; r < raws.size(); ++r) {
        prov_refs[r].reserve(raws[r].refs.size());
        for (auto& ref : raws[r].refs) {
            auto [it, inserted] = index.try_emplace(ref, static_cast<PaperIndex>(named.size()));
            if (inserted) named.emplace_back(std::move(ref), it->second);
            prov_refs[r].push_back(it->second);
        }
        raws[r].refs = {};
    }
    rep.dangling_ids = named.size() - raws.size();

    const std::size_t n = named.size();
    if (n >= std::numeric_limits<PaperIndex>::max()) throw DataError("corpus too large for 32-bit paper indices");
    std::sort(named.begin(), named.end());
    std::vector<PaperIndex> final_of(n);
    store.ids_.reserve(n);
    for (PaperIndex i = 0; i < n; ++i) {
        final_of[named[i].second] = i;
        store.ids_.push_back(std::move(named[i].first));
    }
    named = {};
    for (auto& [id, p] : index) p = final_of[p];
    store.index_ = std::move(index);
    store.years_.assign(n, std::numeric_limits<int>::min());
    store.record_slot_.assign(n, -1);

    // Records are stored in id order so record(p) follows dense order as well.
    std::vector<std::pair<PaperIndex, std::size_t>> order;
    order.reserve(raws.size());
    for (std::size_t r = 0; r < raws.size(); ++r) order.emplace_back(final_of[r], r);
    std::sort(order.begin(), order.end());

    store.records_.reserve(raws.size());
    store.papers_.reserve(raws.size());
    rep.min_year = std::numeric_limits<int>::max();
    rep.max_year = std::numeric_limits<int>::min();
    std::vector<char> is_dangling(n, 1);
    for (const auto& [p, r] : order) is_dangling[p] = 0;
    std::size_t total_refs = 0;
    for (const auto& refs : prov_refs) total_refs += refs.size();
    store.ref_offsets_.assign(n + 1, 0);
    store.ref_targets_.reserve(total_refs);
    PaperIndex next = 0;
    for (const auto& [p, r] : order) {
        // Dangling ids between records get empty lists.
        for (; next <= p; ++next) store.ref_offsets_[next] = store.ref_targets_.size();
        const auto begin = store.ref_targets_.size();
        for (PaperIndex prov : prov_refs[r]) {
            const PaperIndex q = final_of[prov];
            if (q == p) {
                ++rep.self_refs_dropped;
                continue;
            }
            store.ref_targets_.push_back(q);
        }
        const auto first = store.ref_targets_.begin() + static_cast<std::ptrdiff_t>(begin);
        std::sort(first, store.ref_targets_.end());
        auto last = std::unique(first, store.ref_targets_.end());
        rep.duplicate_refs_dropped += static_cast<std::size_t>(store.ref_targets_.end() - last);
        store.ref_targets_.erase(last, store.ref_targets_.end());
        for (auto it = first; it != store.ref_targets_.end(); ++it) rep.dangling += is_dangling[*it];
        rep.edges += store.ref_targets_.size() - begin;

        RawRecord& raw = raws[r];
        store.years_[p] = raw.record.pub_year;
        store.record_slot_[p] = static_cast<std::int32_t>(store.records_.size());
        rep.min_year = std::min(rep.min_year, raw.record.pub_year);
        rep.max_year = std::max(rep.max_year, raw.record.pub_year);
        store.records_.push_back(std::move(raw.record));
        store.papers_.push_back(p);
    }
    for (; next <= n; ++next) store.ref_offsets_[next] = store.ref_targets_.size();
    if (raws.empty()) rep.min_year = rep.max_year = 0;

    // Transpose. Iterating sources in index order keeps every list sorted.
    std::vector<std::uint64_t> counts(n + 1, 0);
    for (PaperIndex p = 0; p < n; ++p)
        for (PaperIndex q : store.refs(p)) ++counts[q + 1];
    for (std::size_t p = 0; p < n; ++p) counts[p + 1] += counts[p];
    store.citer_offsets_ = counts;
    store.citer_sources_.resize(counts[n]);
    std::vector<std::uint64_t> cursor(counts.begin(), counts.end() - 1);
    for (PaperIndex p = 0; p < n; ++p)
        for (PaperIndex q : store.refs(p)) store.citer_sources_[cursor[q]++] = p;
    return store;
}

CorpusStore CorpusStore::ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open corpus file '" + path + "'");
    return ingest(in);
}

CorpusStore CorpusStore::ingest_string(std::string_view ndjson) {
    std::istringstream in{std::string(ndjson)};
    return ingest(in);
}

std::optional<PaperIndex> CorpusStore::find(std::string_view id) const {
    auto it = index_.find(absl::string_view(id.data(), id.size()));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

PaperIndex CorpusStore::paper_index(std::string_view id) const {
    auto p = find(id);
    if (!p || !is_known(*p)) throw NotFoundError("unknown paper id '" + std::string(id) + "'");
    return *p;
}

const PaperRecord& CorpusStore::record(PaperIndex p) const {
    if (record_slot_[p] < 0) throw NotFoundError("no record for dangling id '" + ids_[p] + "'");
    return records_[static_cast<std::size_t>(record_slot_[p])];
}

bool CorpusStore::cites(PaperIndex citing, PaperIndex cited) const {
    auto r = refs(citing);
    return std::binary_search(r.begin(), r.end(), cited);
}

std::vector<PaperIndex> CorpusStore::citations_in_window(PaperIndex p, int window) const {
    if (!is_known(p)) throw NotFoundError("unknown paper id '" + ids_[p] + "'");
    std::vector<PaperIndex> out;
    const int lo = years_[p];
    const int hi = lo + window;
    for (PaperIndex q : citers(p))
        if (years_[q] >= lo && years_[q] <= hi) out.push_back(q);
    return out;
}

std::size_t CorpusStore::count_citations_in_window(PaperIndex p, int window) const {
    const int lo = years_[p];
    const int hi = lo + window;
    std::size_t n = 0;
    for (PaperIndex q : citers(p))
        if (years_[q] >= lo && years_[q] <= hi) ++n;
    return n;
}

std::vector<PaperIndex> CorpusStore::select_cohort(const CohortParams& params) const {
    params.validate();
    std::vector<PaperIndex> out;
    for (PaperIndex p : papers_) {
        if (years_[p] < params.year_min || years_[p] > params.year_max) continue;
        if (refs(p).size() < static_cast<std::size_t>(params.min_refs)) continue;
        if (count_citations_in_window(p, params.window_years) < static_cast<std::size_t>(params.min_citations))
            continue;
        out.push_back(p);
    }
    return out;
}

std::string CorpusStore::serialize() const {
    std::string out;
    for (PaperIndex p : papers_) {
        json refs_json = json::array();
        for (PaperIndex q : refs(p)) refs_json.push_back(ids_[q]);
        json citers_json = json::array();
        for (PaperIndex q : citers(p)) citers_json.push_back(ids_[q]);
        const PaperRecord& rec = record(p);
        json concepts = json::array();
        for (const auto& c : rec.concepts)
            concepts.push_back({{"id", c.concept_id}, {"level", c.level}, {"score", c.score}, {"parents", c.parents}});
        json obj = {
            {"id", ids_[p]},
            {"year", years_[p]},
            {"refs", std::move(refs_json)},
            {"citers", std::move(citers_json)},
            {"concepts", std::move(concepts)},
            {"title_tokens", rec.title_tokens},
        };
        if (rec.abstract_tokens) obj["abstract_tokens"] = *rec.abstract_tokens;
        if (rec.venue_id) obj["venue"] = *rec.venue_id;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace feg

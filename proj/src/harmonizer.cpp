#include "taxoforge/harmonizer.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace taxoforge {

const FacetAssignment* UnifiedRecord::facet(std::string_view dimension) const {
    for (const auto& f : facets)
        if (f.dimension == dimension) return &f;
    return nullptr;
}

namespace {

struct DimensionEvidence {
    std::vector<std::vector<std::string>> paths;
    bool targeted = false;                 // a label mapped to the dimension itself
    std::vector<std::string> unspecified;  // U characteristics
    std::vector<std::string> irrelevant;
};

bool is_prefix(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

template <class F>
void sort_by_position(std::vector<std::string>& ids, F pos) {
    std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) { return pos(a) < pos(b); });
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

}  // namespace

UnifiedRecord harmonize_record(const NormalizedRecord& r, const MappingSet& m, const Taxonomy& t) {
    if (r.dataset_id != m.dataset_id)
        throw Error(errc::dataset_mismatch,
                    "record " + r.record_id + " is from " + r.dataset_id + ", mapping is for " + m.dataset_id, r.record_id);
    std::set<std::string_view> known(m.labels.begin(), m.labels.end());
    for (const auto& [label, _] : r.bits)
        if (!known.count(label))
            throw Error(errc::unknown_label, "record " + r.record_id + ": label " + label + " is not in " + m.dataset_id,
                        label);

    auto pos = [&](const std::string& id) { return t.position(id); };
    UnifiedRecord out;
    out.record_id = r.record_id;
    out.dataset_id = r.dataset_id;

    std::vector<std::string> cats;
    std::map<std::string, DimensionEvidence> dims;
    for (const auto& a : m.associations) {
        auto b = r.bits.find(a.label);
        if (b == r.bits.end() || b->second != Bit::One) continue;
        const TaxonNode& n = t.node(a.class_id);
        if (n.kind == NodeKind::Category) {
            cats.push_back(n.id);
        } else if (n.kind == NodeKind::Dimension) {
            if (n.dimension_kind == DimensionKind::Basic) dims[n.id].targeted = true;
        } else if (auto dim = t.dimension_of(n.id)) {
            auto& e = dims[*dim];
            if (n.special == Special::Unspecified)
                e.unspecified.push_back(n.id);
            else if (n.special == Special::Irrelevant)
                e.irrelevant.push_back(n.id);
            else
                e.paths.push_back(t.characteristic_path(n.id));
        }
    }

    sort_by_position(cats, pos);
    for (const auto& c : cats)
        if (std::none_of(cats.begin(), cats.end(), [&](const std::string& o) { return t.is_ancestor(c, o); }))
            out.categories.push_back(c);
    if (out.categories.size() > 1) out.conflicts.push_back({std::nullopt, out.categories});

    std::vector<std::string> dim_order;
    for (const auto& [d, _] : dims) dim_order.push_back(d);
    sort_by_position(dim_order, pos);
    for (const auto& d : dim_order) {
        auto& e = dims.at(d);
        std::vector<const std::vector<std::string>*> maximal;
        for (const auto& p : e.paths) {
            bool covered = std::any_of(e.paths.begin(), e.paths.end(),
                                       [&](const auto& q) { return q.size() > p.size() && is_prefix(p, q); });
            bool dup = std::any_of(maximal.begin(), maximal.end(), [&](const auto* q) { return *q == p; });
            if (!covered && !dup) maximal.push_back(&p);
        }
        std::vector<std::string> leaves;
        for (const auto* p : maximal) leaves.push_back(p->back());
        if (maximal.size() > 1) {
            sort_by_position(leaves, pos);
            out.conflicts.push_back({d, leaves});
        } else if (!e.irrelevant.empty() && (!maximal.empty() || !e.unspecified.empty())) {
            // Sibling evidence only; the dimension itself yields to anything deeper.
            std::vector<std::string> nodes = e.irrelevant;
            nodes.insert(nodes.end(), e.unspecified.begin(), e.unspecified.end());
            nodes.insert(nodes.end(), leaves.begin(), leaves.end());
            sort_by_position(nodes, pos);
            out.conflicts.push_back({d, nodes});
        } else if (maximal.size() == 1) {
            out.facets.push_back({d, *maximal.front(), std::nullopt});
        } else if (!e.irrelevant.empty()) {
            out.facets.push_back({d, {}, Special::Irrelevant});
        } else {
            out.facets.push_back({d, {}, Special::Unspecified});
        }
    }
    return out;
}

UnifiedRecord densify(UnifiedRecord r, const Taxonomy& t) {
    std::set<std::string> wanted;
    for (const auto& id : t.roots())
        if (t.node(id).kind == NodeKind::Dimension && t.node(id).dimension_kind == DimensionKind::Basic) wanted.insert(id);
    for (const auto& c : r.categories)
        for (const auto& d : t.descendants(c)) {
            const TaxonNode& n = t.node(d);
            if (n.kind == NodeKind::Dimension && n.dimension_kind == DimensionKind::Basic) wanted.insert(d);
        }
    for (const auto& f : r.facets) wanted.erase(f.dimension);
    for (const auto& c : r.conflicts)
        if (c.dimension) wanted.erase(*c.dimension);
    for (const auto& d : wanted) r.facets.push_back({d, {}, Special::Unspecified});
    std::sort(r.facets.begin(), r.facets.end(),
              [&](const FacetAssignment& a, const FacetAssignment& b) { return t.position(a.dimension) < t.position(b.dimension); });
    return r;
}

HarmonizedCorpus harmonize(const std::vector<NormalizedRecord>& records, const MappingSet& m, const Taxonomy& t,
                           bool dense) {
    HarmonizedCorpus c;
    c.taxonomy_version = t.version();
    c.records.reserve(records.size());
    for (const auto& r : records) {
        auto u = harmonize_record(r, m, t);
        c.records.push_back(dense ? densify(std::move(u), t) : std::move(u));
    }
    return c;
}

Json unified_to_json(const UnifiedRecord& r, const std::string& taxonomy_version) {
    Json j;
    j["record_id"] = r.record_id;
    j["dataset_id"] = r.dataset_id;
    j["taxonomy_version"] = taxonomy_version;
    j["categories"] = r.categories;
    Json facets = Json::object();
    for (const auto& f : r.facets) facets[f.dimension] = f.sentinel ? Json(to_string(*f.sentinel)) : Json(f.path);
    j["facets"] = std::move(facets);
    j["conflicts"] = Json::array();
    for (const auto& c : r.conflicts)
        j["conflicts"].push_back(Json{{"dimension", c.dimension ? Json(*c.dimension) : Json(nullptr)}, {"nodes", c.nodes}});
    return j;
}

UnifiedRecord unified_from_json(const Json& j) {
    UnifiedRecord r;
    r.record_id = require_string(j, "record_id", "harmonized record");
    const std::string what = "harmonized record " + r.record_id;
    r.dataset_id = require_string(j, "dataset_id", what);
    auto strings = [&](const Json& a, const char* field) {
        if (!a.is_array()) throw Error(errc::format, what + ": " + field + " must be an array");
        std::vector<std::string> v;
        for (const auto& x : a) {
            if (!x.is_string()) throw Error(errc::format, what + ": " + field + " must hold strings");
            v.push_back(x.get<std::string>());
        }
        return v;
    };
    r.categories = strings(require(j, "categories", what), "categories");
    const Json& facets = require(j, "facets", what);
    if (!facets.is_object()) throw Error(errc::format, what + ": facets must be an object");
    for (const auto& [d, v] : facets.items()) {
        FacetAssignment f{d, {}, std::nullopt};
        if (v == "unspecified")
            f.sentinel = Special::Unspecified;
        else if (v == "irrelevant")
            f.sentinel = Special::Irrelevant;
        else
            f.path = strings(v, "facet path");
        if (!f.sentinel && f.path.empty()) throw Error(errc::format, what + ": empty path for " + d);
        r.facets.push_back(std::move(f));
    }
    const Json& conflicts = require(j, "conflicts", what);
    if (!conflicts.is_array()) throw Error(errc::format, what + ": conflicts must be an array");
    for (const auto& c : conflicts) {
        Conflict x;
        const Json& d = require(c, "dimension", what);
        if (d.is_string())
            x.dimension = d.get<std::string>();
        else if (!d.is_null())
            throw Error(errc::format, what + ": conflict dimension must be a string or null");
        x.nodes = strings(require(c, "nodes", what), "conflict nodes");
        r.conflicts.push_back(std::move(x));
    }
    return r;
}

std::string serialize_corpus(const HarmonizedCorpus& c) {
    std::string out;
    for (const auto& r : c.records) out += dump_line(unified_to_json(r, c.taxonomy_version)) + "\n";
    return out;
}

HarmonizedCorpus parse_corpus(std::string_view jsonl) {
    HarmonizedCorpus c;
    std::size_t start = 0, line = 0;
    bool first = true;
    while (start < jsonl.size()) {
        auto nl = jsonl.find('\n', start);
        if (nl == std::string_view::npos) nl = jsonl.size();
        ++line;
        std::string_view s = jsonl.substr(start, nl - start);
        start = nl + 1;
        if (s.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        Json j = parse_json(s, "line " + std::to_string(line));
        std::string v = require_string(j, "taxonomy_version", "line " + std::to_string(line));
        if (first) {
            c.taxonomy_version = v;
            first = false;
        } else if (v != c.taxonomy_version) {
            throw Error(errc::version_mismatch, "line " + std::to_string(line) + ": taxonomy version " + v +
                                                    " differs from " + c.taxonomy_version);
        }
        c.records.push_back(unified_from_json(j));
    }
    return c;
}

std::string to_string(MergePolicy p) { return p == MergePolicy::DropConflicts ? "drop_conflicts" : "keep_flagged"; }

MergePolicy parse_merge_policy(std::string_view s) {
    if (s == "drop_conflicts" || s == "drop") return MergePolicy::DropConflicts;
    if (s == "keep_flagged" || s == "keep") return MergePolicy::KeepFlagged;
    throw Error(errc::invalid_payload, "unknown merge policy \"" + std::string(s) + "\"");
}

MergeResult merge(const std::vector<HarmonizedCorpus>& corpora, MergePolicy policy) {
    MergeResult res;
    MergeReport& rep = res.report;
    rep.policy = policy;
    bool first = true;
    for (const auto& c : corpora) {
        if (c.records.empty()) continue;
        if (first) {
            rep.taxonomy_version = c.taxonomy_version;
            first = false;
        } else if (c.taxonomy_version != rep.taxonomy_version) {
            throw Error(errc::version_mismatch,
                        "corpus taxonomy version " + c.taxonomy_version + " differs from " + rep.taxonomy_version);
        }
    }
    res.corpus.taxonomy_version = rep.taxonomy_version;
    for (const auto& c : corpora)
        for (const auto& r : c.records) {
            ++rep.input_records;
            if (std::find(rep.datasets.begin(), rep.datasets.end(), r.dataset_id) == rep.datasets.end())
                rep.datasets.push_back(r.dataset_id);
            rep.records_per_dataset[r.dataset_id];
            if (!r.conflicts.empty()) {
                ++rep.conflicted;
                if (policy == MergePolicy::DropConflicts) {
                    ++rep.dropped;
                    ++rep.dropped_per_dataset[r.dataset_id];
                    continue;
                }
            }
            ++rep.records_per_dataset[r.dataset_id];
            auto& cov = rep.coverage[r.dataset_id];
            for (const auto& f : r.facets)
                if (!f.sentinel) ++cov[f.dimension];
            res.corpus.records.push_back(r);
        }
    rep.output_records = res.corpus.records.size();
    return res;
}

Json merge_report_to_json(const MergeReport& r) {
    Json j;
    j["policy"] = to_string(r.policy);
    j["taxonomy_version"] = r.taxonomy_version;
    j["input_records"] = r.input_records;
    j["output_records"] = r.output_records;
    j["conflicted"] = r.conflicted;
    j["dropped"] = r.dropped;
    j["datasets"] = Json::array();
    for (const auto& d : r.datasets) {
        Json x;
        x["dataset_id"] = d;
        x["records"] = r.records_per_dataset.at(d);
        auto dr = r.dropped_per_dataset.find(d);
        x["dropped"] = dr == r.dropped_per_dataset.end() ? 0 : dr->second;
        Json cov = Json::object();
        if (auto it = r.coverage.find(d); it != r.coverage.end())
            for (const auto& [dim, n] : it->second) cov[dim] = n;
        x["coverage"] = std::move(cov);
        j["datasets"].push_back(std::move(x));
    }
    return j;
}

std::string merge_report_to_text(const MergeReport& r) {
    std::ostringstream o;
    o << "policy " << to_string(r.policy) << ", input " << r.input_records << ", output " << r.output_records
      << ", conflicted " << r.conflicted << ", dropped " << r.dropped << "\n";
    std::set<std::string> dims;
    for (const auto& [_, cov] : r.coverage)
        for (const auto& [d, __] : cov) dims.insert(d);
    std::size_t w = 8;
    for (const auto& d : r.datasets) w = std::max(w, d.size() + 2);
    o << "\n" << std::left << std::setw(static_cast<int>(w)) << "dataset" << std::setw(9) << "records" << std::setw(9)
      << "dropped";
    for (const auto& d : dims) o << std::setw(static_cast<int>(d.size() + 2)) << d;
    o << "\n";
    for (const auto& ds : r.datasets) {
        auto dr = r.dropped_per_dataset.find(ds);
        o << std::setw(static_cast<int>(w)) << ds << std::setw(9) << r.records_per_dataset.at(ds) << std::setw(9)
          << (dr == r.dropped_per_dataset.end() ? 0 : dr->second);
        auto it = r.coverage.find(ds);
        for (const auto& d : dims) {
            std::size_t n = 0;
            if (it != r.coverage.end())
                if (auto f = it->second.find(d); f != it->second.end()) n = f->second;
            o << std::setw(static_cast<int>(d.size() + 2)) << n;
        }
        o << "\n";
    }
    return o.str();
}

}  // namespace taxoforge

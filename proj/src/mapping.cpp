#include "taxoforge/mapping.hpp"

#include <algorithm>

namespace taxoforge {

std::string to_string(AssociationKind k) { return k == AssociationKind::Explicit ? "explicit" : "inferred"; }

std::string to_string(Presence p) {
    switch (p) {
        case Presence::Explicit: return "explicit";
        case Presence::Inferred: return "inferred";
        default: return "absent";
    }
}

std::vector<Association> infer_context(const DatasetDescriptor& d, const Taxonomy& t) {
    if (!d.default_context) return {};
    const std::string& c = *d.default_context;
    const TaxonNode* n = t.find(c);
    if (!n) throw Error(errc::unknown_node, d.dataset_id + ": default context " + c + " is not in the taxonomy", c);
    auto dim = n->kind == NodeKind::Characteristic ? t.dimension_of(c) : std::nullopt;
    if (!dim || t.node(*dim).parent)
        throw Error(errc::context, d.dataset_id + ": default context " + c + " is not a characteristic of a context dimension",
                    c);
    return {Association{d.dataset_id, std::string(kContextLabel), c, AssociationKind::Inferred, "metadata: source of data",
                        ""}};
}

MappingSet make_mapping(const Taxonomy& t, const DatasetDescriptor& d, std::vector<Association> associations,
                        std::vector<UnmappedLabel> unmapped) {
    Pipeline p(d);
    MappingSet m;
    m.dataset_id = d.dataset_id;
    m.taxonomy_version = t.version();
    m.labels = p.labels();
    m.common_labels = p.common_labels();
    m.declared_label_count = d.labels.size();
    const std::string what = "mapping " + d.dataset_id;
    std::set<std::string> known(m.labels.begin(), m.labels.end());
    std::set<std::pair<std::string, std::string>> pairs;
    std::set<std::string> mapped;
    for (auto& a : associations) {
        if (a.dataset_id.empty()) a.dataset_id = d.dataset_id;
        if (a.dataset_id != d.dataset_id)
            throw Error(errc::dataset_mismatch, what + ": association for dataset " + a.dataset_id, a.label);
        if (!known.count(a.label)) throw Error(errc::unknown_label, what + ": unknown label " + a.label, a.label);
        if (!t.contains(a.class_id))
            throw Error(errc::unknown_node, what + ": unknown class " + a.class_id + " for label " + a.label, a.class_id);
        if (!pairs.emplace(a.label, a.class_id).second)
            throw Error(errc::duplicate_pair, what + ": duplicate pair (" + a.label + ", " + a.class_id + ")", a.label);
        if (a.label == kContextLabel && (!d.default_context || a.class_id != *d.default_context))
            throw Error(errc::context, what + ": " + std::string(kContextLabel) + " must map to the default context",
                        a.class_id);
        mapped.insert(a.label);
    }
    std::set<std::string> unmapped_names;
    for (const auto& u : unmapped) {
        if (!known.count(u.label)) throw Error(errc::unknown_label, what + ": unknown label " + u.label, u.label);
        if (mapped.count(u.label))
            throw Error(errc::duplicate_pair, what + ": label " + u.label + " is both mapped and unmapped", u.label);
        if (!unmapped_names.insert(u.label).second)
            throw Error(errc::duplicate_label, what + ": label " + u.label + " listed unmapped twice", u.label);
    }
    if (mapped.count(std::string(kContextLabel))) infer_context(d, t);
    m.associations = std::move(associations);
    m.unmapped = std::move(unmapped);
    m.complete = std::all_of(m.labels.begin(), m.labels.end(),
                             [&](const std::string& l) { return mapped.count(l) || unmapped_names.count(l); });
    return m;
}

MappingSet mapping_from_json(const Json& j, const Taxonomy& t, const DatasetDescriptor& d) {
    std::string id = require_string(j, "dataset_id", "mapping");
    if (id != d.dataset_id)
        throw Error(errc::dataset_mismatch, "mapping for " + id + " does not match descriptor " + d.dataset_id, id);
    const std::string what = "mapping " + id;
    if (auto v = optional_string(j, "taxonomy_version", what); !v.empty() && v != t.version())
        throw Error(errc::version_mismatch, what + ": taxonomy version " + v + ", expected " + t.version());
    std::vector<Association> assoc;
    std::vector<UnmappedLabel> unmapped;
    const Json& arr = require(j, "associations", what);
    if (!arr.is_array()) throw Error(errc::format, what + ": associations must be an array");
    for (const auto& a : arr) {
        std::string label = require_string(a, "label", what);
        auto c = a.find("class");
        if (c == a.end() || c->is_null()) {
            std::string reason = optional_string(a, "note", what);
            unmapped.push_back({label, reason.empty() ? "no matching class" : reason});
            continue;
        }
        if (!c->is_string()) throw Error(errc::format, what + ": class must be a string", label);
        Association x{id, label, c->get<std::string>(), AssociationKind::Explicit, optional_string(a, "basis", what),
                      optional_string(a, "note", what)};
        if (auto k = optional_string(a, "kind", what); k == "inferred")
            x.kind = AssociationKind::Inferred;
        else if (!k.empty() && k != "explicit")
            throw Error(errc::format, what + ": unknown association kind \"" + k + "\"", label);
        assoc.push_back(std::move(x));
    }
    if (auto u = j.find("unmapped"); u != j.end()) {
        if (!u->is_array()) throw Error(errc::format, what + ": unmapped must be an array");
        for (const auto& x : *u) unmapped.push_back({require_string(x, "label", what), optional_string(x, "reason", what)});
    }
    return make_mapping(t, d, std::move(assoc), std::move(unmapped));
}

MappingSet parse_mapping(std::string_view text, const Taxonomy& t, const DatasetDescriptor& d) {
    return mapping_from_json(parse_json(text, "mapping"), t, d);
}

Json mapping_to_json(const MappingSet& m) {
    Json j;
    j["dataset_id"] = m.dataset_id;
    j["taxonomy_version"] = m.taxonomy_version;
    j["associations"] = Json::array();
    for (const auto& a : m.associations)
        j["associations"].push_back(Json{{"label", a.label},
                                         {"class", a.class_id},
                                         {"kind", to_string(a.kind)},
                                         {"basis", a.basis},
                                         {"note", a.note}});
    j["unmapped"] = Json::array();
    for (const auto& u : m.unmapped) j["unmapped"].push_back(Json{{"label", u.label}, {"reason", u.reason}});
    return j;
}

std::map<std::string, Presence> infer_presence(const MappingSet& m, const Taxonomy& t) {
    std::map<std::string, Presence> out;
    auto raise = [&](const std::string& c, Presence p) {
        auto& cur = out[c];
        if (p > cur) cur = p;
    };
    for (const auto& a : m.associations) {
        raise(a.class_id, a.kind == AssociationKind::Explicit ? Presence::Explicit : Presence::Inferred);
        for (const auto& anc : t.ancestors(a.class_id)) raise(anc, Presence::Inferred);
    }
    return out;
}

void check_crosswalk(const Crosswalk& x, const Taxonomy& t) {
    if (x.taxonomy_version != t.version())
        throw Error(errc::version_mismatch,
                    "crosswalk is for taxonomy version " + x.taxonomy_version + ", loaded " + t.version());
    if (x.descriptors.size() != x.mapping_sets.size())
        throw Error(errc::format, "crosswalk descriptors and mapping sets differ in number");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < x.mapping_sets.size(); ++i) {
        const auto& m = x.mapping_sets[i];
        if (m.dataset_id != x.descriptors[i].dataset_id)
            throw Error(errc::dataset_mismatch, "mapping " + m.dataset_id + " paired with descriptor " +
                                                    x.descriptors[i].dataset_id);
        if (m.taxonomy_version != t.version())
            throw Error(errc::version_mismatch, "mapping " + m.dataset_id + " is for taxonomy version " + m.taxonomy_version);
        if (!ids.insert(m.dataset_id).second)
            throw Error(errc::dataset_mismatch, "dataset " + m.dataset_id + " appears twice", m.dataset_id);
    }
}

std::map<std::string, std::map<std::string, Presence>> class_presence(const Crosswalk& x, const Taxonomy& t) {
    std::map<std::string, std::map<std::string, Presence>> out;
    for (const auto& m : x.mapping_sets)
        for (const auto& [c, p] : infer_presence(m, t)) out[c][m.dataset_id] = p;
    return out;
}

Json crosswalk_to_json(const Crosswalk& x, const Taxonomy& t) {
    Json j;
    j["taxonomy_version"] = x.taxonomy_version;
    j["datasets"] = Json::array();
    for (std::size_t i = 0; i < x.mapping_sets.size(); ++i) {
        const auto& m = x.mapping_sets[i];
        Json d = mapping_to_json(m);
        d["name"] = x.descriptors[i].name;
        d["year"] = x.descriptors[i].year;
        d["labels"] = m.labels;
        d["complete"] = m.complete;
        j["datasets"].push_back(std::move(d));
    }
    auto presence = class_presence(x, t);
    Json cp = Json::object();
    for (const auto& n : t.nodes()) {
        Json row = Json::object();
        if (auto it = presence.find(n.id); it != presence.end())
            for (const auto& m : x.mapping_sets)
                if (auto p = it->second.find(m.dataset_id); p != it->second.end()) row[m.dataset_id] = to_string(p->second);
        cp[n.id] = std::move(row);
    }
    j["class_presence"] = std::move(cp);
    Json it = Json::object();
    for (const auto& n : t.nodes())
        if (auto f = x.iterations.find(n.id); f != x.iterations.end()) it[n.id] = f->second;
    j["iterations"] = std::move(it);
    return j;
}

}  // namespace taxoforge

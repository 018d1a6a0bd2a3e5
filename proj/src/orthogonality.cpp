#include <algorithm>
#include <set>

#include "taxoforge/metrics.hpp"

namespace taxoforge {

std::string to_string(Evidence e) {
    switch (e) {
        case Evidence::HierarchyAncestry: return "ancestry";
        case Evidence::ExtensionSubset: return "subset";
        case Evidence::ExtensionEqual: return "equal";
        default: return "none";
    }
}

namespace {

using Pair = std::pair<std::string, std::string>;

template <class Covered>
OrthogonalityMatrix build(const Taxonomy& t, const std::map<std::string, std::set<Pair>>& ext, Covered covered,
                          const OrthogonalityMatrix* previous) {
    OrthogonalityMatrix m;
    for (const auto& n : t.nodes()) m.classes.push_back(n.id);
    const std::size_t n = m.classes.size();
    m.cells.assign(n, std::vector<Evidence>(n, Evidence::None));
    static const std::set<Pair> none;
    auto ext_of = [&](const std::string& c) -> const std::set<Pair>& {
        auto it = ext.find(c);
        return it == ext.end() ? none : it->second;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = m.classes[i];
        const auto& ea = ext_of(a);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& b = m.classes[j];
            Evidence& e = m.cells[i][j];
            if (i == j) {
                e = Evidence::ExtensionEqual;
            } else if (t.is_ancestor(b, a)) {
                e = Evidence::HierarchyAncestry;
            } else if (!ea.empty()) {
                const auto& eb = ext_of(b);
                if (covered(ea, eb)) e = covered(eb, ea) ? Evidence::ExtensionEqual : Evidence::ExtensionSubset;
            }
        }
    }
    if (previous)
        for (const auto& [k, v] : previous->adjudications)
            if (t.contains(k.first) && t.contains(k.second)) m.adjudications[k] = v;
    return m;
}

}  // namespace

Evidence OrthogonalityMatrix::at(std::string_view a, std::string_view b) const {
    auto ia = std::find(classes.begin(), classes.end(), a);
    auto ib = std::find(classes.begin(), classes.end(), b);
    if (ia == classes.end()) throw Error(errc::unknown_node, "unknown class " + std::string(a), std::string(a));
    if (ib == classes.end()) throw Error(errc::unknown_node, "unknown class " + std::string(b), std::string(b));
    return cells[static_cast<std::size_t>(ia - classes.begin())][static_cast<std::size_t>(ib - classes.begin())];
}

std::vector<std::pair<std::string, std::string>> OrthogonalityMatrix::flagged(const Taxonomy& t) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = 0; j < classes.size(); ++j) {
            if (i == j) continue;
            Evidence e = cells[i][j];
            if (e != Evidence::ExtensionSubset && e != Evidence::ExtensionEqual) continue;
            if (t.is_ancestor(classes[i], classes[j]) || t.is_ancestor(classes[j], classes[i])) continue;
            out.emplace_back(classes[i], classes[j]);
        }
    return out;
}

OrthogonalityMatrix orthogonality(const Crosswalk& x, const Taxonomy& t, AssociationScope scope,
                                  const OrthogonalityMatrix* previous) {
    std::map<std::string, std::set<Pair>> ext;
    std::map<std::string, std::set<std::string>> constant;
    for (const auto& m : x.mapping_sets) {
        constant[m.dataset_id] = m.common_labels;
        for (const auto& a : m.associations) {
            if (scope == AssociationScope::ExplicitOnly && a.kind != AssociationKind::Explicit) continue;
            if (!t.contains(a.class_id)) continue;
            Pair p{m.dataset_id, a.label};
            ext[a.class_id].insert(p);
            for (const auto& anc : t.ancestors(a.class_id)) ext[anc].insert(p);
        }
    }
    auto covered = [&](const std::set<Pair>& ea, const std::set<Pair>& eb) {
        for (const auto& p : ea) {
            if (eb.count(p)) continue;
            const auto& ks = constant[p.first];
            if (std::any_of(ks.begin(), ks.end(), [&](const std::string& k) { return eb.count({p.first, k}) != 0; }))
                continue;
            return false;
        }
        return true;
    };
    return build(t, ext, covered, previous);
}

OrthogonalityMatrix orthogonality_from_assignments(const std::map<std::string, std::vector<std::string>>& assigned,
                                                   const Taxonomy& t, const OrthogonalityMatrix* previous) {
    std::map<std::string, std::set<Pair>> ext;
    for (const auto& [rec, classes] : assigned)
        for (const auto& c : classes) {
            if (!t.contains(c)) throw Error(errc::unknown_node, "record " + rec + " carries unknown class " + c, c);
            ext[c].insert({rec, ""});
            for (const auto& anc : t.ancestors(c)) ext[anc].insert({rec, ""});
        }
    auto covered = [](const std::set<Pair>& ea, const std::set<Pair>& eb) {
        return std::includes(eb.begin(), eb.end(), ea.begin(), ea.end());
    };
    return build(t, ext, covered, previous);
}

void adjudicate(OrthogonalityMatrix& m, const std::string& a, const std::string& b, Adjudication adj) {
    m.at(a, b);
    if (adj.verdict != "orthogonal" && adj.verdict != "dependent")
        throw Error(errc::invalid_payload, "adjudication verdict must be \"orthogonal\" or \"dependent\"");
    m.adjudications[{a, b}] = std::move(adj);
}

Json orthogonality_to_json(const OrthogonalityMatrix& m, const Taxonomy& t) {
    Json j;
    j["classes"] = m.classes;
    Json names = Json::array();
    for (const auto& c : m.classes) names.push_back(t.node(c).name);
    j["names"] = std::move(names);
    Json cells = Json::array();
    for (const auto& row : m.cells) {
        Json r = Json::array();
        for (auto e : row) r.push_back(to_string(e));
        cells.push_back(std::move(r));
    }
    j["cells"] = std::move(cells);
    auto adj_json = [](const Adjudication& a) { return Json{{"verdict", a.verdict}, {"by", a.by}, {"note", a.note}}; };
    j["flagged"] = Json::array();
    for (const auto& [a, b] : m.flagged(t)) {
        Json f{{"a", a}, {"b", b}, {"a_name", t.node(a).name}, {"b_name", t.node(b).name}, {"evidence", to_string(m.at(a, b))}};
        auto it = m.adjudications.find({a, b});
        f["adjudication"] = it == m.adjudications.end() ? Json(nullptr) : adj_json(it->second);
        j["flagged"].push_back(std::move(f));
    }
    j["adjudications"] = Json::array();
    for (const auto& [k, v] : m.adjudications) {
        Json a = adj_json(v);
        a["a"] = k.first;
        a["b"] = k.second;
        j["adjudications"].push_back(std::move(a));
    }
    return j;
}

std::string orthogonality_to_csv(const OrthogonalityMatrix& m) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string out = "class";
    for (const auto& c : m.classes) out += "," + quote(c);
    out += "\n";
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        out += quote(m.classes[i]);
        for (auto e : m.cells[i]) out += "," + std::to_string(static_cast<int>(e));
        out += "\n";
    }
    return out;
}

}  // namespace taxoforge

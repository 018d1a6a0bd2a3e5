#include "taxoforge/taxonomy.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "taxoforge/error.hpp"

namespace taxoforge {

namespace {

const std::vector<std::string> kNoChildren;

NodeKind parse_kind(const std::string& s, const std::string& id) {
    if (s == "category") return NodeKind::Category;
    if (s == "dimension") return NodeKind::Dimension;
    if (s == "characteristic") return NodeKind::Characteristic;
    throw Error(errc::format, "node " + id + ": unknown kind \"" + s + "\"", id);
}

DimensionKind parse_dimension_kind(const std::string& s, const std::string& id) {
    if (s == "meta") return DimensionKind::Meta;
    if (s == "basic") return DimensionKind::Basic;
    throw Error(errc::format, "node " + id + ": unknown dimension_kind \"" + s + "\"", id);
}

Special parse_special(const std::string& s, const std::string& id) {
    if (s == "unspecified") return Special::Unspecified;
    if (s == "irrelevant") return Special::Irrelevant;
    throw Error(errc::format, "node " + id + ": unknown special flag \"" + s + "\"", id);
}

}  // namespace

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Category: return "category";
        case NodeKind::Dimension: return "dimension";
        case NodeKind::Characteristic: return "characteristic";
    }
    return {};
}

std::string to_string(DimensionKind k) { return k == DimensionKind::Meta ? "meta" : "basic"; }

std::string to_string(Special s) { return s == Special::Unspecified ? "unspecified" : "irrelevant"; }

std::string to_string(ValidationStatus s) {
    switch (s) {
        case ValidationStatus::Valid: return "valid";
        case ValidationStatus::DraftOnly: return "draft-only";
        case ValidationStatus::Invalid: return "invalid";
    }
    return {};
}

Taxonomy::Taxonomy(std::string name, std::string version, std::vector<TaxonNode> nodes)
    : name_(std::move(name)), version_(std::move(version)), nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const TaxonNode& n = nodes_[i];
        if (n.id.empty()) throw Error(errc::format, "node with empty id");
        if (!index_.emplace(n.id, i).second) throw Error(errc::duplicate_id, "duplicate node id " + n.id, n.id);
        if (n.kind == NodeKind::Dimension && !n.dimension_kind)
            throw Error(errc::illegal_fields, "dimension " + n.id + " lacks dimension_kind", n.id);
        if (n.kind != NodeKind::Dimension && n.dimension_kind)
            throw Error(errc::illegal_fields, "dimension_kind on non-dimension " + n.id, n.id);
        if (n.kind != NodeKind::Characteristic && n.special)
            throw Error(errc::illegal_fields, "special flag on non-characteristic " + n.id, n.id);
        if (n.parent && *n.parent == n.id) throw Error(errc::cycle, "node " + n.id + " is its own parent", n.id);
    }
    children_.assign(nodes_.size(), {});
    for (const TaxonNode& n : nodes_) {
        if (!n.parent) {
            roots_.push_back(n.id);
            continue;
        }
        auto it = index_.find(*n.parent);
        if (it == index_.end())
            throw Error(errc::unknown_parent, "node " + n.id + " has unknown parent " + *n.parent, n.id);
        children_[it->second].push_back(n.id);
    }
    // Every node must reach a root; anything left over sits on a cycle.
    std::vector<char> reach(nodes_.size(), 0);
    std::vector<std::size_t> stack;
    for (const auto& r : roots_) stack.push_back(index_.at(r));
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        reach[i] = 1;
        for (const auto& c : children_[i]) stack.push_back(index_.at(c));
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (!reach[i]) throw Error(errc::cycle, "parent cycle through node " + nodes_[i].id, nodes_[i].id);
}

const TaxonNode* Taxonomy::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

const TaxonNode& Taxonomy::node(std::string_view id) const {
    const TaxonNode* n = find(id);
    if (!n) throw Error(errc::unknown_node, "unknown node " + std::string(id), std::string(id));
    return *n;
}

std::size_t Taxonomy::position(std::string_view id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(errc::unknown_node, "unknown node " + std::string(id), std::string(id));
    return it->second;
}

const std::vector<std::string>& Taxonomy::children(std::string_view id) const {
    return children_[position(id)];
}

std::vector<std::string> Taxonomy::ancestors(std::string_view id) const {
    std::vector<std::string> out;
    const TaxonNode* n = &node(id);
    while (n->parent) {
        out.push_back(*n->parent);
        n = &node(*n->parent);
    }
    return out;
}

std::vector<std::string> Taxonomy::descendants(std::string_view id) const {
    std::vector<std::string> out;
    std::vector<std::string> stack(children(id).rbegin(), children(id).rend());
    while (!stack.empty()) {
        std::string c = std::move(stack.back());
        stack.pop_back();
        const auto& ch = children(c);
        stack.insert(stack.end(), ch.rbegin(), ch.rend());
        out.push_back(std::move(c));
    }
    return out;
}

bool Taxonomy::is_ancestor(std::string_view ancestor, std::string_view id) const {
    const TaxonNode* n = &node(id);
    while (n->parent) {
        if (*n->parent == ancestor) return true;
        n = &node(*n->parent);
    }
    return false;
}

std::optional<std::string> Taxonomy::dimension_of(std::string_view id) const {
    for (const auto& a : ancestors(id))
        if (node(a).kind == NodeKind::Dimension) return a;
    return std::nullopt;
}

std::vector<std::string> Taxonomy::characteristic_path(std::string_view id) const {
    std::vector<std::string> path{std::string(id)};
    for (const auto& a : ancestors(id)) {
        if (node(a).kind != NodeKind::Characteristic) break;
        path.push_back(a);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::size_t Taxonomy::depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes_) d = std::max(d, ancestors(n.id).size() + 1);
    return d;
}

std::size_t Taxonomy::count(NodeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const TaxonNode& n) { return n.kind == kind; }));
}

Taxonomy Taxonomy::with_nodes(const std::vector<TaxonNode>& added) const {
    std::vector<TaxonNode> all = nodes_;
    all.insert(all.end(), added.begin(), added.end());
    return Taxonomy(name_, version_, std::move(all));
}

TaxonNode node_from_json(const Json& j) {
    if (!j.is_object()) throw Error(errc::format, "taxonomy node must be an object");
    TaxonNode n;
    n.id = require_string(j, "id", "taxonomy node");
    const std::string what = "node " + n.id;
    n.name = require_string(j, "name", what);
    n.kind = parse_kind(require_string(j, "kind", what), n.id);
    if (auto dk = optional_string(j, "dimension_kind", what); !dk.empty())
        n.dimension_kind = parse_dimension_kind(dk, n.id);
    if (auto p = optional_string(j, "parent", what); !p.empty()) n.parent = p;
    if (auto s = optional_string(j, "special", what); !s.empty()) n.special = parse_special(s, n.id);
    if (auto it = j.find("aliases"); it != j.end()) {
        if (!it->is_array()) throw Error(errc::format, what + ": aliases must be an array", n.id);
        for (const auto& a : *it) {
            if (!a.is_string()) throw Error(errc::format, what + ": aliases must be strings", n.id);
            n.aliases.push_back(a.get<std::string>());
        }
    }
    n.notes = optional_string(j, "notes", what);
    for (const auto& [k, v] : j.items()) {
        static const std::set<std::string> known{"id", "name", "kind", "dimension_kind", "parent",
                                                 "special", "aliases", "notes"};
        if (!known.count(k)) throw Error(errc::illegal_fields, what + ": unknown field \"" + k + "\"", n.id);
    }
    return n;
}

Json node_to_json(const TaxonNode& n) {
    Json j;
    j["id"] = n.id;
    j["name"] = n.name;
    j["kind"] = to_string(n.kind);
    if (n.dimension_kind) j["dimension_kind"] = to_string(*n.dimension_kind);
    if (n.parent) j["parent"] = *n.parent;
    if (n.special) j["special"] = to_string(*n.special);
    if (!n.aliases.empty()) j["aliases"] = n.aliases;
    if (!n.notes.empty()) j["notes"] = n.notes;
    return j;
}

Taxonomy taxonomy_from_json(const Json& doc) {
    std::string name = require_string(doc, "name", "taxonomy");
    std::string version = require_string(doc, "version", "taxonomy");
    const Json& nodes = require(doc, "nodes", "taxonomy");
    if (!nodes.is_array()) throw Error(errc::format, "taxonomy: nodes must be an array");
    std::vector<TaxonNode> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(node_from_json(n));
    return Taxonomy(std::move(name), std::move(version), std::move(out));
}

Taxonomy parse_taxonomy(std::string_view document) {
    return taxonomy_from_json(parse_json(document, "taxonomy"));
}

Json taxonomy_to_json(const Taxonomy& t) {
    Json j;
    j["name"] = t.name();
    j["version"] = t.version();
    j["nodes"] = Json::array();
    for (const auto& n : t.nodes()) j["nodes"].push_back(node_to_json(n));
    return j;
}

std::string serialize_taxonomy(const Taxonomy& t) { return dump(taxonomy_to_json(t)); }

ValidationReport validate(const Taxonomy& t, ValidationMode mode) {
    ValidationReport rep;
    rep.mode = mode;
    auto add = [&](const std::string& id, const char* r, std::string msg) {
        rep.violations.push_back({id, r, std::move(msg)});
    };

    for (const auto& n : t.nodes()) {
        const TaxonNode* p = n.parent ? &t.node(*n.parent) : nullptr;
        switch (n.kind) {
            case NodeKind::Category:
                if (p && p->kind != NodeKind::Category)
                    add(n.id, rule::kind_compat, "category under " + to_string(p->kind) + " " + p->id);
                break;
            case NodeKind::Dimension:
                if (p && !(p->kind == NodeKind::Category ||
                           (p->kind == NodeKind::Dimension && p->dimension_kind == DimensionKind::Meta)))
                    add(n.id, rule::kind_compat, "dimension under non-category, non-meta node " + p->id);
                break;
            case NodeKind::Characteristic:
                if (!p)
                    add(n.id, rule::kind_compat, "characteristic without a dimension");
                else if (p->kind == NodeKind::Category ||
                         (p->kind == NodeKind::Dimension && p->dimension_kind == DimensionKind::Meta))
                    add(n.id, rule::kind_compat,
                        "characteristic under " +
                            (p->kind == NodeKind::Category ? std::string("category ") : std::string("meta dimension ")) +
                            p->id);
                break;
        }
    }

    if (mode == ValidationMode::Strict) {
        for (const auto& n : t.nodes()) {
            const auto& ch = t.children(n.id);
            if (n.kind == NodeKind::Dimension && n.dimension_kind == DimensionKind::Basic) {
                auto k = std::count_if(ch.begin(), ch.end(),
                                       [&](const std::string& c) { return t.node(c).kind == NodeKind::Characteristic; });
                if (k < 2)
                    add(n.id, rule::min_characteristics,
                        "basic dimension has " + std::to_string(k) + " top-level characteristic(s), needs at least 2");
            }
            if (n.kind == NodeKind::Dimension && n.dimension_kind == DimensionKind::Meta && ch.size() < 2)
                add(n.id, rule::min_subdimensions,
                    "meta dimension has " + std::to_string(ch.size()) + " sub-dimension(s), needs at least 2");
            if (n.kind == NodeKind::Characteristic && ch.size() == 1)
                add(n.id, rule::min_children, "characteristic has a single child, needs 0 or at least 2");
        }
        auto check_siblings = [&](const std::vector<std::string>& ids) {
            std::map<std::string, std::string> seen;
            for (const auto& c : ids) {
                auto [it, fresh] = seen.emplace(t.node(c).name, c);
                if (!fresh) add(c, rule::sibling_name, "name \"" + t.node(c).name + "\" repeats sibling " + it->second);
            }
        };
        check_siblings(t.roots());
        for (const auto& n : t.nodes()) check_siblings(t.children(n.id));
    }

    std::sort(rep.violations.begin(), rep.violations.end(), [](const Violation& a, const Violation& b) {
        if (a.node != b.node) return a.node < b.node;
        return a.rule < b.rule;
    });
    if (rep.violations.empty()) {
        rep.status = ValidationStatus::Valid;
    } else {
        bool structural = std::any_of(rep.violations.begin(), rep.violations.end(),
                                      [](const Violation& v) { return v.rule == rule::kind_compat; });
        rep.status = structural ? ValidationStatus::Invalid : ValidationStatus::DraftOnly;
    }
    return rep;
}

Json report_to_json(const ValidationReport& r) {
    Json j;
    j["mode"] = r.mode == ValidationMode::Strict ? "strict" : "draft";
    j["status"] = to_string(r.status);
    j["violations"] = Json::array();
    for (const auto& v : r.violations) {
        Json e;
        e["node"] = v.node ? Json(*v.node) : Json(nullptr);
        e["rule"] = v.rule;
        e["message"] = v.message;
        j["violations"].push_back(std::move(e));
    }
    return j;
}

std::string report_to_text(const ValidationReport& r) {
    std::ostringstream out;
    out << "status: " << to_string(r.status) << " (" << (r.mode == ValidationMode::Strict ? "strict" : "draft")
        << ", " << r.violations.size() << " violation(s))\n";
    for (const auto& v : r.violations)
        out << "  " << (v.node ? *v.node : "-") << "  [" << v.rule << "]  " << v.message << "\n";
    return out.str();
}

std::vector<std::string> class_set(const Taxonomy& t, ClassScope scope) {
    std::vector<std::string> out;
    for (const auto& n : t.nodes())
        if (scope == ClassScope::All || n.kind != NodeKind::Dimension) out.push_back(n.id);
    return out;
}

}  // namespace taxoforge

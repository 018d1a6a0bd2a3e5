#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/json_io.hpp"

namespace taxoforge {

enum class NodeKind { Category, Dimension, Characteristic };
enum class DimensionKind { Meta, Basic };
enum class Special { Unspecified, Irrelevant };

struct TaxonNode {
    std::string id;
    std::string name;
    NodeKind kind = NodeKind::Category;
    std::optional<DimensionKind> dimension_kind;  // iff kind == Dimension
    std::optional<std::string> parent;
    std::optional<Special> special;  // Characteristics only
    std::vector<std::string> aliases;
    std::string notes;

    bool operator==(const TaxonNode&) const = default;
};

// Immutable forest of nodes. Construction enforces identity and shape
// (unique ids, known parents, no cycles, legal field combinations); the
// structural rules are checked separately by validate().
class Taxonomy {
public:
    Taxonomy() = default;
    Taxonomy(std::string name, std::string version, std::vector<TaxonNode> nodes);

    const std::string& name() const { return name_; }
    const std::string& version() const { return version_; }
    const std::vector<TaxonNode>& nodes() const { return nodes_; }
    const std::vector<std::string>& roots() const { return roots_; }
    bool empty() const { return nodes_.empty(); }

    bool contains(std::string_view id) const { return index_.count(id) != 0; }
    const TaxonNode* find(std::string_view id) const;
    const TaxonNode& node(std::string_view id) const;  // throws unknown_node
    std::size_t position(std::string_view id) const;    // document order

    const std::vector<std::string>& children(std::string_view id) const;
    // Nearest first, excluding id itself.
    std::vector<std::string> ancestors(std::string_view id) const;
    // Pre-order, excluding id itself.
    std::vector<std::string> descendants(std::string_view id) const;
    bool is_ancestor(std::string_view ancestor, std::string_view id) const;
    // Nearest Dimension ancestor of a Characteristic.
    std::optional<std::string> dimension_of(std::string_view id) const;
    // Characteristic chain from the dimension's top level down to id.
    std::vector<std::string> characteristic_path(std::string_view id) const;
    std::size_t depth() const;
    std::size_t count(NodeKind kind) const;

    // New taxonomy with nodes appended in the given order.
    Taxonomy with_nodes(const std::vector<TaxonNode>& added) const;

    bool operator==(const Taxonomy& o) const {
        return name_ == o.name_ && version_ == o.version_ && nodes_ == o.nodes_;
    }

private:
    std::string name_;
    std::string version_;
    std::vector<TaxonNode> nodes_;
    std::vector<std::string> roots_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::string>> children_;
};

std::string to_string(NodeKind k);
std::string to_string(DimensionKind k);
std::string to_string(Special s);

Taxonomy parse_taxonomy(std::string_view document);
Json taxonomy_to_json(const Taxonomy& t);
Taxonomy taxonomy_from_json(const Json& doc);
TaxonNode node_from_json(const Json& j);
Json node_to_json(const TaxonNode& n);
std::string serialize_taxonomy(const Taxonomy& t);

enum class ValidationMode { Strict, Draft };
enum class ValidationStatus { Valid, DraftOnly, Invalid };

struct Violation {
    std::optional<std::string> node;
    std::string rule;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    ValidationMode mode = ValidationMode::Strict;
    std::vector<Violation> violations;
    ValidationStatus status = ValidationStatus::Valid;
};

// Rule codes. Draft mode checks only kind-compat.
namespace rule {
inline constexpr const char* kind_compat = "kind-compat";
inline constexpr const char* min_characteristics = "min-characteristics";
inline constexpr const char* min_children = "min-children";
inline constexpr const char* min_subdimensions = "min-subdimensions";
inline constexpr const char* sibling_name = "sibling-name";
}  // namespace rule

ValidationReport validate(const Taxonomy& t, ValidationMode mode);
std::string to_string(ValidationStatus s);
Json report_to_json(const ValidationReport& r);
std::string report_to_text(const ValidationReport& r);

enum class ClassScope { All, CategoriesAndCharacteristics };

// Document order.
std::vector<std::string> class_set(const Taxonomy& t, ClassScope scope);

}  // namespace taxoforge

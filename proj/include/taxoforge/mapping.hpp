#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/json_io.hpp"
#include "taxoforge/scheme.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

enum class AssociationKind { Explicit, Inferred };

struct Association {
    std::string dataset_id;
    std::string label;
    std::string class_id;
    AssociationKind kind = AssociationKind::Explicit;
    std::string basis;
    std::string note;

    bool operator==(const Association&) const = default;
};

struct UnmappedLabel {
    std::string label;
    std::string reason;

    bool operator==(const UnmappedLabel&) const = default;
};

struct MappingSet {
    std::string dataset_id;
    std::string taxonomy_version;
    std::vector<std::string> labels;       // L_d, post-pipeline
    std::set<std::string> common_labels;   // constant 1 on every record
    std::size_t declared_label_count = 0;  // labels declared before preprocessing
    std::vector<Association> associations;
    std::vector<UnmappedLabel> unmapped;
    // Every label of L_d is either associated or listed as unmapped.
    bool complete = false;

    bool operator==(const MappingSet&) const = default;
};

// Document form: {"dataset_id", "taxonomy_version", "associations", "unmapped"}.
// An association entry with a null or missing class is recorded as unmapped.
MappingSet parse_mapping(std::string_view text, const Taxonomy& t, const DatasetDescriptor& d);
MappingSet mapping_from_json(const Json& j, const Taxonomy& t, const DatasetDescriptor& d);
Json mapping_to_json(const MappingSet& m);

// Builds and checks a MappingSet from parts (used by sessions and tests).
MappingSet make_mapping(const Taxonomy& t, const DatasetDescriptor& d, std::vector<Association> associations,
                        std::vector<UnmappedLabel> unmapped);

// One Inferred association binding "@context" to the default context, or
// nothing when the descriptor has none.
std::vector<Association> infer_context(const DatasetDescriptor& d, const Taxonomy& t);

enum class Presence { Absent, Inferred, Explicit };
std::string to_string(Presence p);

// Mapped classes and all of their ancestors for one dataset.
std::map<std::string, Presence> infer_presence(const MappingSet& m, const Taxonomy& t);

struct Crosswalk {
    std::string taxonomy_version;
    std::vector<DatasetDescriptor> descriptors;  // parallel to mapping_sets
    std::vector<MappingSet> mapping_sets;
    std::map<std::string, int> iterations;  // class -> iteration that introduced it, when known
};

// Rejects version mismatches and repeated dataset ids.
void check_crosswalk(const Crosswalk& x, const Taxonomy& t);

// class -> dataset -> presence, Absent entries omitted.
std::map<std::string, std::map<std::string, Presence>> class_presence(const Crosswalk& x, const Taxonomy& t);

Json crosswalk_to_json(const Crosswalk& x, const Taxonomy& t);

std::string to_string(AssociationKind k);

}  // namespace taxoforge

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/json_io.hpp"
#include "taxoforge/mapping.hpp"
#include "taxoforge/scheme.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

// Either a characteristic path (top level first) or a sentinel.
struct FacetAssignment {
    std::string dimension;
    std::vector<std::string> path;
    std::optional<Special> sentinel;

    bool operator==(const FacetAssignment&) const = default;
};

// dimension is empty for a clash between category memberships.
struct Conflict {
    std::optional<std::string> dimension;
    std::vector<std::string> nodes;

    bool operator==(const Conflict&) const = default;
};

struct UnifiedRecord {
    std::string record_id;
    std::string dataset_id;
    std::vector<std::string> categories;
    std::vector<FacetAssignment> facets;  // one per dimension at most
    std::vector<Conflict> conflicts;

    const FacetAssignment* facet(std::string_view dimension) const;
    bool operator==(const UnifiedRecord&) const = default;
};

// Bit-1 labels contribute their associated classes. Categories keep the
// deepest memberships; characteristics give paths; a dimension target or a
// U characteristic gives Unspecified, which yields to a concrete path. A
// dimension target also yields to an Irrelevant characteristic below it. An
// Irrelevant characteristic together with a U characteristic or a path is a
// conflict, as are two paths where neither is a prefix of the other. Meta
// dimensions contribute nothing.
UnifiedRecord harmonize_record(const NormalizedRecord& r, const MappingSet& m, const Taxonomy& t);

// Adds Unspecified for every root dimension and every dimension under the
// record's categories that has neither an assignment nor a conflict.
UnifiedRecord densify(UnifiedRecord r, const Taxonomy& t);

struct HarmonizedCorpus {
    std::string taxonomy_version;
    std::vector<UnifiedRecord> records;

    bool operator==(const HarmonizedCorpus&) const = default;
};

HarmonizedCorpus harmonize(const std::vector<NormalizedRecord>& records, const MappingSet& m, const Taxonomy& t,
                           bool dense = false);

Json unified_to_json(const UnifiedRecord& r, const std::string& taxonomy_version);
UnifiedRecord unified_from_json(const Json& j);
// One JSON object per line, each carrying "taxonomy_version".
std::string serialize_corpus(const HarmonizedCorpus& c);
HarmonizedCorpus parse_corpus(std::string_view jsonl);

enum class MergePolicy { DropConflicts, KeepFlagged };
std::string to_string(MergePolicy p);
MergePolicy parse_merge_policy(std::string_view s);

struct MergeReport {
    MergePolicy policy = MergePolicy::DropConflicts;
    std::string taxonomy_version;
    std::size_t input_records = 0;
    std::size_t output_records = 0;
    std::size_t conflicted = 0;
    std::size_t dropped = 0;
    std::vector<std::string> datasets;  // first-seen order
    std::map<std::string, std::size_t> records_per_dataset;  // in the output
    std::map<std::string, std::size_t> dropped_per_dataset;
    // dataset -> dimension -> output records with a concrete path there
    std::map<std::string, std::map<std::string, std::size_t>> coverage;
};

struct MergeResult {
    HarmonizedCorpus corpus;
    MergeReport report;
};

MergeResult merge(const std::vector<HarmonizedCorpus>& corpora, MergePolicy policy);
Json merge_report_to_json(const MergeReport& r);
std::string merge_report_to_text(const MergeReport& r);

}  // namespace taxoforge

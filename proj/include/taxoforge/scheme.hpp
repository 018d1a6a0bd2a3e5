#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "taxoforge/error.hpp"
#include "taxoforge/json_io.hpp"
#include "taxoforge/rational.hpp"

namespace taxoforge {

struct BinaryType {
    bool operator==(const BinaryType&) const = default;
};
struct CategoricalType {
    std::vector<std::string> categories;
    bool operator==(const CategoricalType&) const = default;
};
struct NumericType {
    Rational lo, hi;
    bool operator==(const NumericType&) const = default;
};
using ValueType = std::variant<BinaryType, CategoricalType, NumericType>;

struct LabelDef {
    std::string name;
    ValueType type;
    bool per_annotator = false;
    std::vector<std::string> aliases;  // alternative column names

    bool operator==(const LabelDef&) const = default;
};

// Qualified references "<label>.<category>" address a category of a
// categorical label before it is expanded.
struct MergeAliases {
    std::string canonical;              // "<label>.<category>"
    std::vector<std::string> variants;  // raw spellings rewritten to canonical
    bool operator==(const MergeAliases&) const = default;
};
struct MajorityVote {
    std::string label;
    bool operator==(const MajorityVote&) const = default;
};
struct Decompose {
    std::string compound;  // binary label, or "<label>.<category>"
    std::vector<std::string> parts;
    bool operator==(const Decompose&) const = default;
};
struct Flatten {
    std::vector<std::string> group;  // binary labels, or categories of one label
    std::string unified;
    bool operator==(const Flatten&) const = default;
};
struct Binarize {
    std::string label;
    bool operator==(const Binarize&) const = default;
};
struct InjectCommon {
    std::string label;
    int value = 1;
    bool operator==(const InjectCommon&) const = default;
};
using Directive = std::variant<MergeAliases, MajorityVote, Decompose, Flatten, Binarize, InjectCommon>;

struct ExcludedLabel {
    std::string name;
    std::string reason;
    bool operator==(const ExcludedLabel&) const = default;
};

struct DatasetDescriptor {
    std::string dataset_id;
    std::string name;
    int year = 0;
    std::string source;
    std::optional<std::string> default_context;
    std::vector<LabelDef> labels;
    std::vector<Directive> directives;
    std::vector<ExcludedLabel> excluded_labels;
    std::string notes;

    bool operator==(const DatasetDescriptor&) const = default;
};

// Name of the constant label that carries a dataset's default context.
inline constexpr std::string_view kContextLabel = "@context";

DatasetDescriptor parse_descriptor(std::string_view text);
DatasetDescriptor descriptor_from_json(const Json& j);
Json descriptor_to_json(const DatasetDescriptor& d);
std::string describe(const Directive& d);

enum class Bit : std::uint8_t { Zero, One, Unresolved };

// Strictly most frequent value; nullopt when the maximum is tied.
template <class T>
std::optional<T> majority_vote(const std::vector<T>& votes) {
    if (votes.empty()) throw Error(errc::empty_votes, "majority vote over an empty vote list");
    std::map<T, std::size_t> counts;
    for (const auto& v : votes) ++counts[v];
    const T* best = nullptr;
    std::size_t best_n = 0;
    bool tied = false;
    for (const auto& [v, n] : counts) {
        if (n > best_n) {
            best = &v;
            best_n = n;
            tied = false;
        } else if (n == best_n) {
            tied = true;
        }
    }
    if (tied) return std::nullopt;
    return *best;
}

// 1 iff value > (lo+hi)/2.
int binarize_numeric(const Rational& value, const Rational& lo, const Rational& hi);

// One-hot over categories.
std::vector<int> expand_categorical(std::string_view value, const std::vector<std::string>& categories);

using BitMap = std::map<std::string, Bit>;

// Merges the present group members into `unified` (logical or, with
// Unresolved below One) and removes them.
BitMap flatten(BitMap bits, const Flatten& f);

struct NormalizedRecord {
    std::string record_id;
    std::string dataset_id;
    BitMap bits;

    bool operator==(const NormalizedRecord&) const = default;
};

Json record_to_json(const NormalizedRecord& r);
NormalizedRecord record_from_json(const Json& j);
std::string serialize_records(const std::vector<NormalizedRecord>& rs);
std::vector<NormalizedRecord> parse_normalized_records(std::string_view jsonl);

// A raw row: one or more values per column (several for per-annotator votes).
struct RawRecord {
    std::string record_id;
    std::map<std::string, std::vector<std::string>> cells;
};

// Delimited text with a header (comma or tab, detected from the header) or
// JSON lines, detected from the first non-blank character.
std::vector<RawRecord> parse_raw_records(std::string_view text);

struct DirectiveCount {
    std::string directive;
    std::size_t applied = 0;
};

struct PipelineReport {
    std::string dataset_id;
    std::size_t records = 0;
    std::size_t declared_labels = 0;
    std::size_t final_labels = 0;
    std::size_t unresolved_ties = 0;
    std::vector<DirectiveCount> directives;
    std::vector<std::string> excluded;
};

Json pipeline_report_to_json(const PipelineReport& r);

// Compiled form of a descriptor's directives.
class Pipeline {
public:
    explicit Pipeline(DatasetDescriptor d);

    const DatasetDescriptor& descriptor() const { return d_; }
    // L_d in production order.
    const std::vector<std::string>& labels() const { return labels_; }
    // Labels whose bit is 1 on every record.
    const std::set<std::string>& common_labels() const { return common_; }

    NormalizedRecord apply(const RawRecord& r, PipelineReport& report) const;
    PipelineReport empty_report() const;

private:
    struct Routed {
        std::string target;
        std::size_t directive = kNone;
    };
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    DatasetDescriptor d_;
    std::vector<std::string> labels_;
    std::set<std::string> common_;
    std::set<std::string> excluded_;
    // per declared label
    std::map<std::string, std::vector<std::string>> columns_;           // label -> accepted column names
    std::map<std::string, std::map<std::string, Routed>> aliases_;      // label -> raw spelling -> category
    std::map<std::string, std::size_t> votes_;                          // label -> directive
    std::map<std::string, std::size_t> binarize_;                       // label -> directive
    std::map<std::string, std::pair<std::vector<std::string>, std::size_t>> decompose_;  // name or "L.c"
    std::map<std::string, Routed> flatten_;                             // name or "L.c"
    std::map<std::string, std::vector<std::string>> final_categories_;  // categorical label -> categories
    std::vector<std::pair<InjectCommon, std::size_t>> injects_;
};

struct PipelineResult {
    std::vector<std::string> labels;
    std::vector<NormalizedRecord> records;
    PipelineReport report;
};

PipelineResult apply_pipeline(const DatasetDescriptor& d, const std::vector<RawRecord>& records);
std::vector<std::string> label_set(const DatasetDescriptor& d);

struct AliasSuggestion {
    std::string scope;  // label name, or "labels"
    std::string a, b;
    std::size_t distance = 0;
};

// Advisory only: near-identical label or category names (edit distance <= 2).
std::vector<AliasSuggestion> suggest_aliases(const DatasetDescriptor& d);

}  // namespace taxoforge

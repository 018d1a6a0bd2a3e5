#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "taxoforge/json_io.hpp"
#include "taxoforge/mapping.hpp"
#include "taxoforge/scheme.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

enum class ExcludeReason { NotRelevantToMetaCharacteristic, OutOfScope, Overlapping };
std::string to_string(ExcludeReason r);
ExcludeReason parse_exclude_reason(std::string_view s);

struct MapToExisting {
    std::string class_id;
    bool operator==(const MapToExisting&) const = default;
};
struct Extend {
    std::vector<TaxonNode> nodes;  // appended in order
    std::string class_id;          // the label's class, existing or new
    bool operator==(const Extend&) const = default;
};
struct Exclude {
    ExcludeReason reason = ExcludeReason::OutOfScope;
    bool operator==(const Exclude&) const = default;
};
using Verdict = std::variant<MapToExisting, Extend, Exclude>;

struct Decision {
    std::string dataset_id;
    std::string label;
    Verdict verdict;
    std::string evidence;
    std::string timestamp;
    bool operator==(const Decision&) const = default;
};

enum class Attestation { Pending, Affirmed, Denied };
std::string to_string(Attestation a);

inline constexpr std::array<const char*, 5> kSubjectiveConditions = {"concise", "robust", "comprehensive", "extendable",
                                                                    "explanatory"};

struct Attest {
    std::string condition;
    Attestation verdict = Attestation::Affirmed;
    std::string by;
    std::string note;
    std::string timestamp;
    bool operator==(const Attest&) const = default;
};

struct LogEntry {
    std::size_t seq = 0;
    std::variant<Decision, Attest> body;
    std::vector<std::string> advisories;  // lint findings, never blocking
    bool operator==(const LogEntry&) const = default;
};

struct Cursor {
    std::size_t dataset = 0;
    std::size_t label = 0;
    bool operator==(const Cursor&) const = default;
};

struct ElementAddition {
    int iteration = 0;
    std::string node_id;
    bool operator==(const ElementAddition&) const = default;
};

struct SubjectiveState {
    Attestation verdict = Attestation::Pending;
    std::string by;
    std::string note;
    bool operator==(const SubjectiveState&) const = default;
};

enum class QueueOrder { ReverseChronological, AsGiven };

struct Session {
    std::string session_id;
    std::string meta_characteristic;
    Taxonomy initial_taxonomy;
    Taxonomy taxonomy;
    std::vector<DatasetDescriptor> queue;
    std::vector<Pipeline> pipelines;  // parallel to queue
    Cursor cursor;
    std::vector<LogEntry> log;
    std::vector<ElementAddition> element_additions;
    std::map<std::string, SubjectiveState> subjective;
    std::vector<std::vector<Association>> associations;  // parallel to queue
    std::vector<std::vector<UnmappedLabel>> unmapped;    // parallel to queue
    std::size_t revision = 0;

    bool done() const { return cursor.dataset >= queue.size(); }
    // One iteration per dataset, counted from 1; stays at the last after Done.
    int iteration() const;
};

Session start_session(const Taxonomy& t0, std::vector<DatasetDescriptor> descriptors, QueueOrder order,
                      std::string session_id = "session", std::string meta_characteristic = "");

struct LabelPrompt {
    std::string dataset_id;
    std::string dataset_name;
    int year = 0;
    std::string source;
    std::string label;
    std::size_t label_index = 0;
    std::size_t label_count = 0;
    int iteration = 0;
    bool constant = false;  // the label is 1 on every record of the dataset
    std::optional<std::string> default_context;
};

// nullopt once every label has been decided.
std::optional<LabelPrompt> next_label(const Session& s);

Session decide(Session s, const Decision& d);
Session attest(Session s, const Attest& a);
// Drops the last log entry and rebuilds the state from the initial taxonomy.
Session undo(Session s);

struct EndingStatus {
    std::vector<std::pair<std::string, bool>> objective;
    std::map<std::string, SubjectiveState> subjective;
    bool met = false;
};

EndingStatus check_ending(const Session& s);

// Advisories for nodes about to be appended to `t`.
std::vector<std::string> lint_extension(const Taxonomy& t, const std::vector<TaxonNode>& added);

// The session's growing mappings as a crosswalk over its queue.
Crosswalk session_crosswalk(const Session& s);
std::vector<MappingSet> session_mappings(const Session& s);

Json decision_to_json(const Decision& d);
Decision decision_from_json(const Json& j);
Json attest_to_json(const Attest& a);
Attest attest_from_json(const Json& j);
Json log_entry_to_json(const LogEntry& e);
std::string serialize_log(const std::vector<LogEntry>& log);
// Entries as JSON objects, one per non-blank line.
std::vector<Json> parse_log_lines(std::string_view jsonl);

// Applies decision and attestation entries in order; seq must run 1, 2, ...
Session replay(Session s, const std::vector<Json>& entries);

Json prompt_to_json(const std::optional<LabelPrompt>& p);
Json ending_to_json(const EndingStatus& e);
Json session_summary(const Session& s);
Json snapshot_to_json(const Session& s);
Session snapshot_from_json(const Json& j);

// taxonomy.json, descriptors/, mappings/, manifest.json, session.jsonl,
// snapshot.json. The directory loads as a crosswalk.
void export_files(const Session& s, const std::filesystem::path& dir);

}  // namespace taxoforge

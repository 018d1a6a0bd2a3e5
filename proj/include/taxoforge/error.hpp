#pragma once

#include <stdexcept>
#include <string>

namespace taxoforge {

// Every failure carries a stable machine code (see error_codes()) and,
// where it makes sense, the offending node id or label.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string ref = {})
        : std::runtime_error(message), code_(std::move(code)), ref_(std::move(ref)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& ref() const noexcept { return ref_; }

private:
    std::string code_;
    std::string ref_;
};

namespace errc {
inline constexpr const char* io = "io";
inline constexpr const char* syntax = "syntax";
inline constexpr const char* format = "format";
inline constexpr const char* duplicate_id = "duplicate_id";
inline constexpr const char* unknown_parent = "unknown_parent";
inline constexpr const char* cycle = "cycle";
inline constexpr const char* illegal_fields = "illegal_fields";
inline constexpr const char* unknown_node = "unknown_node";
inline constexpr const char* duplicate_label = "duplicate_label";
inline constexpr const char* unknown_label = "unknown_label";
inline constexpr const char* directive = "directive";
inline constexpr const char* missing_column = "missing_column";
inline constexpr const char* bad_value = "bad_value";
inline constexpr const char* out_of_range = "out_of_range";
inline constexpr const char* unknown_category = "unknown_category";
inline constexpr const char* empty_votes = "empty_votes";
inline constexpr const char* duplicate_pair = "duplicate_pair";
inline constexpr const char* context = "context";
inline constexpr const char* dataset_mismatch = "dataset_mismatch";
inline constexpr const char* version_mismatch = "version_mismatch";
inline constexpr const char* checksum = "checksum";
inline constexpr const char* empty_labels = "empty_label_universe";
inline constexpr const char* empty_classes = "empty_class_set";
inline constexpr const char* empty_queue = "empty_queue";
inline constexpr const char* wrong_cursor = "wrong_cursor";
inline constexpr const char* session_done = "session_done";
inline constexpr const char* draft_violation = "draft_violation";
inline constexpr const char* unknown_condition = "unknown_condition";
inline constexpr const char* nothing_to_undo = "nothing_to_undo";
inline constexpr const char* unknown_session = "unknown_session";
inline constexpr const char* stale_revision = "stale_revision";
inline constexpr const char* invalid_payload = "invalid_payload";
inline constexpr const char* not_found = "not_found";
}  // namespace errc

}  // namespace taxoforge

#include "taxoforge/bundle.hpp"
#include "taxoforge/devloop.hpp"

namespace taxoforge {

Json decision_to_json(const Decision& d) {
    Json j;
    j["type"] = "decision";
    j["dataset_id"] = d.dataset_id;
    j["label"] = d.label;
    Json v;
    if (auto* m = std::get_if<MapToExisting>(&d.verdict)) {
        v["kind"] = "map";
        v["class"] = m->class_id;
    } else if (auto* x = std::get_if<Extend>(&d.verdict)) {
        v["kind"] = "extend";
        v["nodes"] = Json::array();
        for (const auto& n : x->nodes) v["nodes"].push_back(node_to_json(n));
        v["class"] = x->class_id;
    } else {
        v["kind"] = "exclude";
        v["reason"] = to_string(std::get<Exclude>(d.verdict).reason);
    }
    j["verdict"] = std::move(v);
    j["evidence"] = d.evidence;
    j["timestamp"] = d.timestamp;
    return j;
}

Decision decision_from_json(const Json& j) {
    Decision d;
    d.dataset_id = require_string(j, "dataset_id", "decision");
    d.label = require_string(j, "label", "decision");
    const Json& v = require(j, "verdict", "decision");
    std::string kind = require_string(v, "kind", "verdict");
    if (kind == "map") {
        d.verdict = MapToExisting{require_string(v, "class", "verdict")};
    } else if (kind == "extend") {
        Extend x;
        const Json& nodes = require(v, "nodes", "verdict");
        if (!nodes.is_array()) throw Error(errc::format, "verdict: nodes must be an array");
        for (const auto& n : nodes) x.nodes.push_back(node_from_json(n));
        x.class_id = require_string(v, "class", "verdict");
        d.verdict = std::move(x);
    } else if (kind == "exclude") {
        d.verdict = Exclude{parse_exclude_reason(require_string(v, "reason", "verdict"))};
    } else {
        throw Error(errc::format, "unknown verdict kind \"" + kind + "\"");
    }
    d.evidence = optional_string(j, "evidence", "decision");
    d.timestamp = optional_string(j, "timestamp", "decision");
    return d;
}

Json attest_to_json(const Attest& a) {
    Json j;
    j["type"] = "attestation";
    j["condition"] = a.condition;
    j["verdict"] = to_string(a.verdict);
    j["by"] = a.by;
    j["note"] = a.note;
    j["timestamp"] = a.timestamp;
    return j;
}

Attest attest_from_json(const Json& j) {
    Attest a;
    a.condition = require_string(j, "condition", "attestation");
    std::string v = require_string(j, "verdict", "attestation");
    if (v == "affirmed")
        a.verdict = Attestation::Affirmed;
    else if (v == "denied")
        a.verdict = Attestation::Denied;
    else
        throw Error(errc::invalid_payload, "attestation verdict must be \"affirmed\" or \"denied\"");
    a.by = optional_string(j, "by", "attestation");
    a.note = optional_string(j, "note", "attestation");
    a.timestamp = optional_string(j, "timestamp", "attestation");
    return a;
}

Json log_entry_to_json(const LogEntry& e) {
    Json j;
    j["seq"] = e.seq;
    Json body = std::holds_alternative<Decision>(e.body) ? decision_to_json(std::get<Decision>(e.body))
                                                         : attest_to_json(std::get<Attest>(e.body));
    for (const auto& [k, v] : body.items()) j[k] = v;
    if (!e.advisories.empty()) j["advisories"] = e.advisories;
    return j;
}

std::string serialize_log(const std::vector<LogEntry>& log) {
    std::string out;
    for (const auto& e : log) out += dump_line(log_entry_to_json(e)) + "\n";
    return out;
}

std::vector<Json> parse_log_lines(std::string_view jsonl) {
    std::vector<Json> out;
    std::size_t start = 0, line = 0;
    while (start < jsonl.size()) {
        auto nl = jsonl.find('\n', start);
        if (nl == std::string_view::npos) nl = jsonl.size();
        ++line;
        std::string_view s = jsonl.substr(start, nl - start);
        start = nl + 1;
        if (s.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        out.push_back(parse_json(s, "log line " + std::to_string(line)));
    }
    return out;
}

Session replay(Session s, const std::vector<Json>& entries) {
    for (const auto& e : entries) {
        const Json& seq = require(e, "seq", "log entry");
        std::size_t expected = s.log.empty() ? 1 : s.log.back().seq + 1;
        if (!seq.is_number_unsigned() || seq.get<std::size_t>() != expected)
            throw Error(errc::format, "log entry seq " + seq.dump() + ", expected " + std::to_string(expected));
        std::string type = require_string(e, "type", "log entry");
        if (type == "decision")
            s = decide(std::move(s), decision_from_json(e));
        else if (type == "attestation")
            s = attest(std::move(s), attest_from_json(e));
        else
            throw Error(errc::format, "unknown log entry type \"" + type + "\"");
    }
    return s;
}

Json prompt_to_json(const std::optional<LabelPrompt>& p) {
    if (!p) return Json{{"done", true}};
    Json j;
    j["done"] = false;
    j["dataset_id"] = p->dataset_id;
    j["dataset_name"] = p->dataset_name;
    j["year"] = p->year;
    j["source"] = p->source;
    j["label"] = p->label;
    j["label_index"] = p->label_index;
    j["label_count"] = p->label_count;
    j["iteration"] = p->iteration;
    j["constant"] = p->constant;
    j["default_context"] = p->default_context ? Json(*p->default_context) : Json(nullptr);
    return j;
}

Json ending_to_json(const EndingStatus& e) {
    Json j;
    Json obj = Json::object();
    for (const auto& [k, v] : e.objective) obj[k] = v;
    j["objective"] = std::move(obj);
    Json sub = Json::object();
    for (const char* c : kSubjectiveConditions) {
        const auto& st = e.subjective.at(c);
        sub[c] = Json{{"verdict", to_string(st.verdict)}, {"by", st.by}, {"note", st.note}};
    }
    j["subjective"] = std::move(sub);
    j["met"] = e.met;
    return j;
}

namespace {

Json cursor_to_json(const Session& s) {
    Json c{{"dataset", s.cursor.dataset}, {"label", s.cursor.label}};
    if (auto p = next_label(s)) {
        c["dataset_id"] = p->dataset_id;
        c["label_name"] = p->label;
    }
    return c;
}

}  // namespace

Json session_summary(const Session& s) {
    Json j;
    j["session_id"] = s.session_id;
    j["revision"] = s.revision;
    j["meta_characteristic"] = s.meta_characteristic;
    j["iteration"] = s.iteration();
    j["done"] = s.done();
    j["cursor"] = cursor_to_json(s);
    j["datasets"] = Json::array();
    for (std::size_t i = 0; i < s.queue.size(); ++i)
        j["datasets"].push_back(Json{{"dataset_id", s.queue[i].dataset_id},
                                     {"year", s.queue[i].year},
                                     {"labels", s.pipelines[i].labels().size()}});
    j["taxonomy_version"] = s.taxonomy.version();
    j["counts"] = Json{{"categories", s.taxonomy.count(NodeKind::Category)},
                       {"dimensions", s.taxonomy.count(NodeKind::Dimension)},
                       {"characteristics", s.taxonomy.count(NodeKind::Characteristic)}};
    j["log_length"] = s.log.size();
    j["element_additions"] = s.element_additions.size();
    j["next"] = prompt_to_json(next_label(s));
    return j;
}

Json snapshot_to_json(const Session& s) {
    Json j;
    j["session_id"] = s.session_id;
    j["meta_characteristic"] = s.meta_characteristic;
    j["initial_taxonomy"] = taxonomy_to_json(s.initial_taxonomy);
    j["descriptors"] = Json::array();
    for (const auto& d : s.queue) j["descriptors"].push_back(descriptor_to_json(d));
    j["log"] = Json::array();
    for (const auto& e : s.log) j["log"].push_back(log_entry_to_json(e));
    // Derived from the above; kept for readers that do not replay.
    j["taxonomy"] = taxonomy_to_json(s.taxonomy);
    j["cursor"] = cursor_to_json(s);
    j["iteration"] = s.iteration();
    j["done"] = s.done();
    j["element_additions"] = Json::array();
    for (const auto& a : s.element_additions)
        j["element_additions"].push_back(Json{{"iteration", a.iteration}, {"node", a.node_id}});
    j["mappings"] = Json::array();
    for (const auto& m : session_mappings(s)) {
        Json mj = mapping_to_json(m);
        mj["complete"] = m.complete;
        j["mappings"].push_back(std::move(mj));
    }
    j["ending"] = ending_to_json(check_ending(s));
    return j;
}

Session snapshot_from_json(const Json& j) {
    if (!j.is_object()) throw Error(errc::format, "snapshot: expected an object");
    Taxonomy t0 = taxonomy_from_json(require(j, "initial_taxonomy", "snapshot"));
    const Json& ds = require(j, "descriptors", "snapshot");
    if (!ds.is_array()) throw Error(errc::format, "snapshot: descriptors must be an array");
    std::vector<DatasetDescriptor> descriptors;
    for (const auto& d : ds) descriptors.push_back(descriptor_from_json(d));
    Session s = start_session(t0, std::move(descriptors), QueueOrder::AsGiven, optional_string(j, "session_id", "snapshot"),
                              optional_string(j, "meta_characteristic", "snapshot"));
    const Json& log = require(j, "log", "snapshot");
    if (!log.is_array()) throw Error(errc::format, "snapshot: log must be an array");
    s = replay(std::move(s), std::vector<Json>(log.begin(), log.end()));
    if (auto it = j.find("taxonomy"); it != j.end() && !(taxonomy_from_json(*it) == s.taxonomy))
        throw Error(errc::format, "snapshot: taxonomy disagrees with its log");
    return s;
}

void export_files(const Session& s, const std::filesystem::path& dir) {
    Crosswalk x = session_crosswalk(s);
    bool complete = true;
    for (const auto& m : x.mapping_sets) complete = complete && m.complete;
    Json extra{{"session_id", s.session_id},
               {"meta_characteristic", s.meta_characteristic},
               {"complete", complete},
               {"session_log", "session.jsonl"}};
    write_crosswalk(dir, s.taxonomy, x, extra);
    write_file(dir / "session.jsonl", serialize_log(s.log));
    write_file(dir / "snapshot.json", dump(snapshot_to_json(s)));
}

}  // namespace taxoforge

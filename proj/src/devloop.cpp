#include "taxoforge/devloop.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace taxoforge {

std::string to_string(ExcludeReason r) {
    switch (r) {
        case ExcludeReason::NotRelevantToMetaCharacteristic: return "not_relevant_to_meta_characteristic";
        case ExcludeReason::Overlapping: return "overlapping";
        default: return "out_of_scope";
    }
}

ExcludeReason parse_exclude_reason(std::string_view s) {
    if (s == "not_relevant_to_meta_characteristic") return ExcludeReason::NotRelevantToMetaCharacteristic;
    if (s == "out_of_scope") return ExcludeReason::OutOfScope;
    if (s == "overlapping") return ExcludeReason::Overlapping;
    throw Error(errc::invalid_payload, "unknown exclude reason \"" + std::string(s) + "\"");
}

std::string to_string(Attestation a) {
    switch (a) {
        case Attestation::Affirmed: return "affirmed";
        case Attestation::Denied: return "denied";
        default: return "pending";
    }
}

int Session::iteration() const {
    if (queue.empty()) return 0;
    return static_cast<int>(std::min(cursor.dataset, queue.size() - 1)) + 1;
}

namespace {

void settle(Session& s) {
    while (s.cursor.dataset < s.queue.size() && s.cursor.label >= s.pipelines[s.cursor.dataset].labels().size()) {
        ++s.cursor.dataset;
        s.cursor.label = 0;
    }
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Demonyms and occupations that name a specific nationality or profession.
const std::set<std::string>& flagged_words() {
    static const std::set<std::string> words = {
        "american", "british",  "english",  "chinese",    "indian",    "mexican",  "german",    "french",
        "russian",  "italian",  "spanish",  "japanese",   "korean",    "african",  "turkish",   "polish",
        "irish",    "scottish", "canadian", "australian", "pakistani", "iranian",  "iraqi",     "syrian",
        "somali",   "nigerian", "brazilian", "filipino",  "vietnamese", "ukrainian", "romanian", "albanian",
        "police",   "cops",     "doctors",  "nurses",     "teachers",  "journalists", "politicians", "lawyers",
        "soldiers", "farmers",  "bankers",  "scientists", "athletes",  "celebrities"};
    return words;
}

// Ethnic group names that contain a demonym.
const std::vector<std::string>& exempt_phrases() {
    static const std::vector<std::string> phrases = {"native american", "african american", "american indian"};
    return phrases;
}

bool names_flagged_word(const std::string& name) {
    std::string l = lower(name);
    for (const auto& p : exempt_phrases())
        for (auto at = l.find(p); at != std::string::npos; at = l.find(p)) l.replace(at, p.size(), " ");
    std::string word;
    for (char c : l + " ") {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word += c;
        } else {
            if (flagged_words().count(word)) return true;
            word.clear();
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> lint_extension(const Taxonomy& t, const std::vector<TaxonNode>& added) {
    std::vector<std::string> out;
    Taxonomy next = t.with_nodes(added);
    std::set<std::string> parents;
    for (const auto& n : added) {
        if (n.parent) parents.insert(*n.parent);
        if (n.kind != NodeKind::Characteristic) continue;
        bool under_meta = false;
        for (const auto& a : next.ancestors(n.id))
            if (next.node(a).dimension_kind == DimensionKind::Meta) under_meta = true;
        if (under_meta && names_flagged_word(n.name))
            out.push_back("characteristic \"" + n.name + "\" names a specific nationality or profession");
    }
    for (const auto& n : added)
        if (n.kind == NodeKind::Dimension) parents.insert(n.id);
    for (const auto& p : parents) {
        const TaxonNode& pn = next.node(p);
        if (pn.kind == NodeKind::Dimension && next.children(p).size() == 1)
            out.push_back("dimension \"" + pn.name + "\" has a single child");
    }
    return out;
}

Session start_session(const Taxonomy& t0, std::vector<DatasetDescriptor> descriptors, QueueOrder order,
                      std::string session_id, std::string meta_characteristic) {
    if (descriptors.empty()) throw Error(errc::empty_queue, "a session needs at least one dataset descriptor");
    if (validate(t0, ValidationMode::Draft).status == ValidationStatus::Invalid)
        throw Error(errc::draft_violation, "the starting taxonomy fails draft validation");
    if (order == QueueOrder::ReverseChronological)
        std::stable_sort(descriptors.begin(), descriptors.end(),
                         [](const DatasetDescriptor& a, const DatasetDescriptor& b) { return a.year > b.year; });
    std::set<std::string> ids;
    for (const auto& d : descriptors)
        if (!ids.insert(d.dataset_id).second)
            throw Error(errc::dataset_mismatch, "dataset " + d.dataset_id + " queued twice", d.dataset_id);
    Session s;
    s.session_id = std::move(session_id);
    s.meta_characteristic = std::move(meta_characteristic);
    s.initial_taxonomy = t0;
    s.taxonomy = t0;
    s.queue = std::move(descriptors);
    for (const auto& d : s.queue) s.pipelines.emplace_back(d);
    s.associations.resize(s.queue.size());
    s.unmapped.resize(s.queue.size());
    for (const char* c : kSubjectiveConditions) s.subjective[c] = {};
    settle(s);
    return s;
}

std::optional<LabelPrompt> next_label(const Session& s) {
    if (s.done()) return std::nullopt;
    const auto& d = s.queue[s.cursor.dataset];
    const auto& p = s.pipelines[s.cursor.dataset];
    LabelPrompt lp;
    lp.dataset_id = d.dataset_id;
    lp.dataset_name = d.name;
    lp.year = d.year;
    lp.source = d.source;
    lp.label = p.labels()[s.cursor.label];
    lp.label_index = s.cursor.label;
    lp.label_count = p.labels().size();
    lp.iteration = s.iteration();
    lp.constant = p.common_labels().count(lp.label) != 0;
    lp.default_context = d.default_context;
    return lp;
}

Session decide(Session s, const Decision& d) {
    if (s.done()) throw Error(errc::session_done, "every label has been decided");
    const std::size_t di = s.cursor.dataset;
    const auto& p = s.pipelines[di];
    const std::string& expected = p.labels()[s.cursor.label];
    if (d.dataset_id != s.queue[di].dataset_id || d.label != expected)
        throw Error(errc::wrong_cursor,
                    "decision for " + d.dataset_id + ": " + d.label + ", cursor is at " + s.queue[di].dataset_id + ": " +
                        expected,
                    d.label);

    LogEntry e;
    e.seq = s.log.empty() ? 1 : s.log.back().seq + 1;
    e.body = d;
    auto associate = [&](const std::string& class_id) {
        Association a{s.queue[di].dataset_id, d.label, class_id,
                      p.common_labels().count(d.label) ? AssociationKind::Inferred : AssociationKind::Explicit, d.evidence,
                      ""};
        s.associations[di].push_back(std::move(a));
    };
    if (auto* m = std::get_if<MapToExisting>(&d.verdict)) {
        if (!s.taxonomy.contains(m->class_id))
            throw Error(errc::unknown_node, "unknown class " + m->class_id, m->class_id);
        associate(m->class_id);
    } else if (auto* x = std::get_if<Extend>(&d.verdict)) {
        if (x->nodes.empty()) throw Error(errc::invalid_payload, "extend without nodes");
        Taxonomy next = s.taxonomy.with_nodes(x->nodes);
        auto report = validate(next, ValidationMode::Draft);
        if (report.status == ValidationStatus::Invalid) {
            const auto& v = report.violations.front();
            throw Error(errc::draft_violation, "extension breaks draft validation: " + v.message, v.node.value_or(""));
        }
        if (!next.contains(x->class_id))
            throw Error(errc::unknown_node, "unknown class " + x->class_id, x->class_id);
        e.advisories = lint_extension(s.taxonomy, x->nodes);
        for (const auto& n : x->nodes) s.element_additions.push_back({s.iteration(), n.id});
        s.taxonomy = std::move(next);
        associate(x->class_id);
    } else {
        const auto& ex = std::get<Exclude>(d.verdict);
        s.unmapped[di].push_back({d.label, d.evidence.empty() ? to_string(ex.reason) : d.evidence});
    }
    s.log.push_back(std::move(e));
    ++s.cursor.label;
    settle(s);
    ++s.revision;
    return s;
}

Session attest(Session s, const Attest& a) {
    if (!s.subjective.count(a.condition))
        throw Error(errc::unknown_condition, "unknown subjective condition \"" + a.condition + "\"", a.condition);
    if (a.verdict == Attestation::Pending) throw Error(errc::invalid_payload, "an attestation must affirm or deny");
    s.subjective[a.condition] = {a.verdict, a.by, a.note};
    LogEntry e;
    e.seq = s.log.empty() ? 1 : s.log.back().seq + 1;
    e.body = a;
    s.log.push_back(std::move(e));
    ++s.revision;
    return s;
}

Session undo(Session s) {
    if (s.log.empty()) throw Error(errc::nothing_to_undo, "the session log is empty");
    Session r = start_session(s.initial_taxonomy, s.queue, QueueOrder::AsGiven, s.session_id, s.meta_characteristic);
    for (std::size_t i = 0; i + 1 < s.log.size(); ++i) {
        const auto& body = s.log[i].body;
        if (auto* d = std::get_if<Decision>(&body))
            r = decide(std::move(r), *d);
        else
            r = attest(std::move(r), std::get<Attest>(body));
    }
    r.revision = s.revision + 1;
    return r;
}

EndingStatus check_ending(const Session& s) {
    EndingStatus st;
    std::optional<int> last_iteration;
    for (auto it = s.log.rbegin(); it != s.log.rend(); ++it)
        if (auto* d = std::get_if<Decision>(&it->body)) {
            for (std::size_t i = 0; i < s.queue.size(); ++i)
                if (s.queue[i].dataset_id == d->dataset_id) last_iteration = static_cast<int>(i) + 1;
            break;
        }
    bool no_new_last = last_iteration.has_value() &&
                       std::none_of(s.element_additions.begin(), s.element_additions.end(),
                                    [&](const ElementAddition& a) { return a.iteration == *last_iteration; });

    bool no_new_after_last_year = false;
    if (!s.queue.empty()) {
        const int year = s.queue.back().year;
        no_new_after_last_year = true;
        for (std::size_t i = 0; i < s.queue.size(); ++i) {
            if (s.queue[i].year != year) continue;
            bool examined = s.cursor.dataset > i;
            bool added = std::any_of(s.element_additions.begin(), s.element_additions.end(),
                                     [&](const ElementAddition& a) { return a.iteration == static_cast<int>(i) + 1; });
            if (!examined || added) no_new_after_last_year = false;
        }
    }
    st.objective = {{"no_new_element_last_iteration", no_new_last},
                    {"no_new_element_after_last_year", no_new_after_last_year},
                    {"all_labels_examined", s.done()},
                    {"taxonomy_strict_valid", validate(s.taxonomy, ValidationMode::Strict).status == ValidationStatus::Valid}};
    st.subjective = s.subjective;
    st.met = std::all_of(st.objective.begin(), st.objective.end(), [](const auto& p) { return p.second; }) &&
             std::all_of(st.subjective.begin(), st.subjective.end(),
                         [](const auto& p) { return p.second.verdict == Attestation::Affirmed; });
    return st;
}

std::vector<MappingSet> session_mappings(const Session& s) {
    std::vector<MappingSet> out;
    for (std::size_t i = 0; i < s.queue.size(); ++i)
        out.push_back(make_mapping(s.taxonomy, s.queue[i], s.associations[i], s.unmapped[i]));
    return out;
}

Crosswalk session_crosswalk(const Session& s) {
    Crosswalk x;
    x.taxonomy_version = s.taxonomy.version();
    x.descriptors = s.queue;
    x.mapping_sets = session_mappings(s);
    for (const auto& a : s.element_additions) x.iterations.emplace(a.node_id, a.iteration);
    return x;
}

}  // namespace taxoforge

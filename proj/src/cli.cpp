#include "taxoforge/cli.hpp"

#include <algorithm>
#include <ctime>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "taxoforge/bundle.hpp"
#include "taxoforge/devloop.hpp"
#include "taxoforge/harmonizer.hpp"
#include "taxoforge/mapping.hpp"
#include "taxoforge/metrics.hpp"
#include "taxoforge/service.hpp"

namespace taxoforge {

namespace {

bool is_bundle(const std::string& p) { return p.empty() || p == "bundle"; }

Taxonomy load_taxonomy(const std::string& p) { return is_bundle(p) ? load_bundled() : parse_taxonomy(read_file(p)); }

void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        out << text;
    else
        write_file(path, text);
}

struct Inputs {
    Taxonomy taxonomy;
    Crosswalk crosswalk;
};

// --session wins over --crosswalk; --taxonomy overrides the crosswalk's own.
Inputs load_inputs(const std::string& taxonomy, const std::string& crosswalk, const std::string& session) {
    Inputs in;
    if (!session.empty()) {
        Session s = snapshot_from_json(parse_json(read_file(session), session));
        in.taxonomy = s.taxonomy;
        in.crosswalk = session_crosswalk(s);
        return in;
    }
    std::optional<Taxonomy> t;
    if (!taxonomy.empty()) t = load_taxonomy(taxonomy);
    if (is_bundle(crosswalk)) {
        in.taxonomy = t ? *t : load_bundled();
        in.crosswalk = load_bundled_crosswalk(in.taxonomy);
    } else {
        auto files = load_crosswalk(crosswalk, t ? &*t : nullptr);
        in.taxonomy = std::move(files.taxonomy);
        in.crosswalk = std::move(files.crosswalk);
    }
    return in;
}

// Normalized records carry "record_id", "dataset_id" and a "labels" object.
bool looks_normalized(const std::string& text) {
    auto start = text.find_first_not_of(" \t\r\n");
    if (start == std::string::npos || text[start] != '{') return false;
    auto nl = text.find('\n', start);
    try {
        Json j = parse_json(std::string_view(text).substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        return j.is_object() && j.contains("dataset_id") && j.contains("labels") && j["labels"].is_object();
    } catch (const Error&) {
        return false;
    }
}

std::string rest_of(std::istringstream& ss) {
    std::string r;
    std::getline(ss, r);
    auto b = r.find_first_not_of(" \t");
    return b == std::string::npos ? "" : r.substr(b);
}

void print_prompt(std::ostream& out, const Session& s) {
    auto p = next_label(s);
    if (!p) {
        out << "done: every label has been decided\n";
        return;
    }
    out << "[iteration " << p->iteration << "] " << p->dataset_id << " (" << p->year << "): \"" << p->label << "\" ("
        << p->label_index + 1 << "/" << p->label_count << ")" << (p->constant ? " constant" : "") << "\n";
}

const char* kSessionHelp =
    "commands:\n"
    "  next                              show the label at the cursor\n"
    "  map CLASS [EVIDENCE...]           map the label to an existing class\n"
    "  extend CLASS NODES_JSON           add nodes (JSON array) and map the label to CLASS\n"
    "  exclude REASON [EVIDENCE...]      not_relevant_to_meta_characteristic | out_of_scope | overlapping\n"
    "  attest CONDITION VERDICT [BY] [NOTE...]\n"
    "  undo | ending | status | metrics | save PATH | export DIR | help | quit\n";

int session_loop(Session s, std::istream& in, std::ostream& out, const std::string& timestamp, const std::string& save) {
    print_prompt(out, s);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string cmd;
        ss >> cmd;
        if (cmd.empty() || cmd[0] == '#') continue;
        try {
            // Commands take copies so a rejected one leaves the session as it was.
            auto p = next_label(s);
            auto decision = [&](Verdict v, std::string evidence) {
                if (!p) throw Error(errc::session_done, "every label has been decided");
                return Decision{p->dataset_id, p->label, std::move(v), std::move(evidence), timestamp};
            };
            if (cmd == "quit" || cmd == "exit") {
                break;
            } else if (cmd == "help") {
                out << kSessionHelp;
            } else if (cmd == "next") {
                print_prompt(out, s);
            } else if (cmd == "map") {
                std::string c;
                ss >> c;
                s = decide(s, decision(MapToExisting{c}, rest_of(ss)));
                print_prompt(out, s);
            } else if (cmd == "extend") {
                std::string c;
                ss >> c;
                Json nodes = parse_json(rest_of(ss), "nodes");
                if (!nodes.is_array()) throw Error(errc::format, "extend expects a JSON array of nodes");
                Extend x;
                for (const auto& n : nodes) x.nodes.push_back(node_from_json(n));
                x.class_id = c;
                s = decide(s, decision(x, ""));
                for (const auto& a : s.log.back().advisories) out << "advisory: " << a << "\n";
                print_prompt(out, s);
            } else if (cmd == "exclude") {
                std::string r;
                ss >> r;
                s = decide(s, decision(Exclude{parse_exclude_reason(r)}, rest_of(ss)));
                print_prompt(out, s);
            } else if (cmd == "attest") {
                std::string c, v, by;
                ss >> c >> v >> by;
                Attest a{c, Attestation::Pending, by, rest_of(ss), timestamp};
                if (v == "affirmed")
                    a.verdict = Attestation::Affirmed;
                else if (v == "denied")
                    a.verdict = Attestation::Denied;
                else
                    throw Error(errc::invalid_payload, "verdict must be affirmed or denied");
                s = attest(s, a);
                out << "recorded " << c << " " << v << "\n";
            } else if (cmd == "undo") {
                s = undo(s);
                print_prompt(out, s);
            } else if (cmd == "ending") {
                out << dump(ending_to_json(check_ending(s)));
            } else if (cmd == "status") {
                out << dump(session_summary(s));
            } else if (cmd == "metrics") {
                out << metrics_to_text(report(session_crosswalk(s), s.taxonomy));
            } else if (cmd == "save") {
                write_file(rest_of(ss), dump(snapshot_to_json(s)));
            } else if (cmd == "export") {
                export_files(s, rest_of(ss));
            } else {
                out << "unknown command \"" << cmd << "\"; try help\n";
            }
        } catch (const Error& e) {
            out << "error: " << e.code() << ": " << e.what() << "\n";
        }
    }
    if (!save.empty()) write_file(save, dump(snapshot_to_json(s)));
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
    CLI::App app{"Faceted taxonomy toolkit: validation, crosswalk metrics, harmonization and guided development"};
    app.name("taxoforge");
    app.require_subcommand(1);
    std::string format = "text";
    bool strict = false;

    // validate
    auto* v = app.add_subcommand("validate", "Check a taxonomy document");
    std::string v_path = "bundle";
    v->add_option("taxonomy", v_path, "Taxonomy document, or \"bundle\"");
    v->add_flag("--strict", strict, "Strict rules; exit 1 when violations are found");
    v->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    // metrics
    auto* m = app.add_subcommand("metrics", "Suitability metrics of a crosswalk");
    std::string m_tax, m_cross = "bundle", m_session, m_scope = "explicit_and_inferred", m_class_scope = "all", m_csv;
    int m_precision = 2;
    m->add_option("--taxonomy", m_tax, "Taxonomy document or \"bundle\" (default: the crosswalk's own)");
    m->add_option("--crosswalk", m_cross, "Crosswalk directory, manifest, or \"bundle\"");
    m->add_option("--session", m_session, "Session snapshot; metrics over its mappings");
    m->add_option("--scope", m_scope)->check(CLI::IsMember({"explicit_only", "explicit_and_inferred"}));
    m->add_option("--class-scope", m_class_scope)->check(CLI::IsMember({"all", "categories_and_characteristics"}));
    m->add_option("--precision", m_precision)->check(CLI::Range(0, 12));
    m->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    m->add_option("--orthogonality-csv", m_csv, "Also write the orthogonality matrix as CSV");
    m->add_flag("--strict", strict, "Exit 1 when any metric is below 1");

    // preprocess
    auto* p = app.add_subcommand("preprocess", "Normalize raw records with a descriptor");
    std::string p_desc, p_records, p_out, p_report;
    bool p_suggest = false;
    p->add_option("--descriptor", p_desc)->required();
    p->add_option("--records", p_records, "CSV, TSV or JSON lines")->required();
    p->add_option("--out", p_out, "Normalized JSON lines (default stdout)");
    p->add_option("--report", p_report, "Pipeline report JSON (default stderr summary)");
    p->add_flag("--suggest-aliases", p_suggest, "List near-identical label and category names");

    // map-check
    auto* mc = app.add_subcommand("map-check", "Validate a mapping document");
    std::string mc_desc, mc_map, mc_tax = "bundle";
    mc->add_option("--descriptor", mc_desc)->required();
    mc->add_option("--mapping", mc_map)->required();
    mc->add_option("--taxonomy", mc_tax);
    mc->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    mc->add_flag("--strict", strict, "Exit 1 when some label is neither mapped nor listed unmapped");

    // harmonize
    auto* h = app.add_subcommand("harmonize", "Unified facet records from a dataset");
    std::string h_desc, h_map, h_records, h_tax = "bundle", h_out;
    bool h_dense = false;
    h->add_option("--descriptor", h_desc)->required();
    h->add_option("--mapping", h_map)->required();
    h->add_option("--records", h_records, "Raw or normalized records")->required();
    h->add_option("--taxonomy", h_tax);
    h->add_option("--out", h_out);
    h->add_flag("--dense", h_dense, "Fill Unspecified for dimensions without evidence");
    h->add_flag("--strict", strict, "Exit 1 when some record has a conflict");

    // merge
    auto* mg = app.add_subcommand("merge", "Merge harmonized corpora");
    std::vector<std::string> mg_inputs;
    std::string mg_policy = "drop_conflicts", mg_out, mg_report;
    mg->add_option("corpora", mg_inputs)->required();
    mg->add_option("--policy", mg_policy)->check(CLI::IsMember({"drop_conflicts", "keep_flagged"}));
    mg->add_option("--out", mg_out);
    mg->add_option("--report", mg_report, "Merge report path (default stderr)");
    mg->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
    mg->add_flag("--strict", strict, "Exit 1 when any record is conflicted");

    // session
    auto* s = app.add_subcommand("session", "Interactive development loop on stdin");
    std::string s_snapshot, s_cross = "bundle", s_tax, s_order = "reverse_chronological", s_time, s_save, s_meta;
    s->add_option("--snapshot", s_snapshot, "Resume from a snapshot");
    s->add_option("--crosswalk", s_cross, "Descriptors to walk (crosswalk directory or \"bundle\")");
    s->add_option("--initial-taxonomy", s_tax, "Starting taxonomy (default: empty)");
    s->add_option("--order", s_order)->check(CLI::IsMember({"reverse_chronological", "as_given"}));
    s->add_option("--timestamp", s_time, "Fixed timestamp for log entries (default: now)");
    s->add_option("--save", s_save, "Write the snapshot here at end of input");
    s->add_option("--meta-characteristic", s_meta);

    // serve
    auto* sv = app.add_subcommand("serve", "HTTP API");
    std::string sv_host = "127.0.0.1", sv_static;
    int sv_port = 8080;
    sv->add_option("--host", sv_host);
    sv->add_option("--port", sv_port)->check(CLI::Range(1, 65535));
    sv->add_option("--static", sv_static, "Directory served at /ui");

    // bundle-info
    auto* bi = app.add_subcommand("bundle-info", "Describe the bundled data");
    bi->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (v->parsed()) {
            Taxonomy t = load_taxonomy(v_path);
            auto r = validate(t, strict ? ValidationMode::Strict : ValidationMode::Draft);
            out << (format == "json" ? dump(report_to_json(r)) : report_to_text(r));
            return strict && !r.violations.empty() ? kExitFindings : kExitOk;
        }
        if (m->parsed()) {
            Inputs inp = load_inputs(m_tax, m_cross, m_session);
            MetricsOptions o{parse_association_scope(m_scope), parse_class_scope(m_class_scope), m_precision};
            MetricsReport r = report(inp.crosswalk, inp.taxonomy, o);
            out << (format == "json" ? dump(metrics_to_json(r)) : metrics_to_text(r));
            if (!m_csv.empty()) write_file(m_csv, orthogonality_to_csv(orthogonality(inp.crosswalk, inp.taxonomy, o.scope)));
            const auto& pm = r.primary();
            bool below = pm.laconicity < 1 || pm.lucidity < 1 || pm.completeness < 1 || pm.soundness < 1;
            return strict && below ? kExitFindings : kExitOk;
        }
        if (p->parsed()) {
            DatasetDescriptor d = parse_descriptor(read_file(p_desc));
            auto res = apply_pipeline(d, parse_raw_records(read_file(p_records)));
            emit(out, p_out, serialize_records(res.records));
            if (!p_report.empty())
                write_file(p_report, dump(pipeline_report_to_json(res.report)));
            else
                err << d.dataset_id << ": " << res.report.records << " records, " << res.labels.size() << " labels, "
                    << res.report.unresolved_ties << " unresolved ties\n";
            if (p_suggest)
                for (const auto& a : suggest_aliases(d))
                    err << "possible alias in " << a.scope << ": \"" << a.a << "\" / \"" << a.b << "\" (distance "
                        << a.distance << ")\n";
            return kExitOk;
        }
        if (mc->parsed()) {
            Taxonomy t = load_taxonomy(mc_tax);
            DatasetDescriptor d = parse_descriptor(read_file(mc_desc));
            MappingSet ms = parse_mapping(read_file(mc_map), t, d);
            std::size_t mapped = 0;
            {
                std::set<std::string> labels;
                for (const auto& a : ms.associations) labels.insert(a.label);
                mapped = labels.size();
            }
            std::vector<std::string> missing;
            for (const auto& l : ms.labels) {
                bool seen = std::any_of(ms.associations.begin(), ms.associations.end(),
                                        [&](const Association& a) { return a.label == l; }) ||
                            std::any_of(ms.unmapped.begin(), ms.unmapped.end(),
                                        [&](const UnmappedLabel& u) { return u.label == l; });
                if (!seen) missing.push_back(l);
            }
            if (format == "json") {
                Json j{{"dataset_id", ms.dataset_id},
                       {"labels", ms.labels.size()},
                       {"mapped_labels", mapped},
                       {"unmapped_labels", ms.unmapped.size()},
                       {"associations", ms.associations.size()},
                       {"complete", ms.complete},
                       {"undecided", missing}};
                out << dump(j);
            } else {
                out << ms.dataset_id << ": " << ms.labels.size() << " labels, " << mapped << " mapped, "
                    << ms.unmapped.size() << " unmapped, " << ms.associations.size() << " associations\n";
                for (const auto& l : missing) out << "  undecided: " << l << "\n";
            }
            return strict && !ms.complete ? kExitFindings : kExitOk;
        }
        if (h->parsed()) {
            Taxonomy t = load_taxonomy(h_tax);
            DatasetDescriptor d = parse_descriptor(read_file(h_desc));
            MappingSet ms = parse_mapping(read_file(h_map), t, d);
            std::string text = read_file(h_records);
            std::vector<NormalizedRecord> recs =
                looks_normalized(text) ? parse_normalized_records(text) : apply_pipeline(d, parse_raw_records(text)).records;
            HarmonizedCorpus c = harmonize(recs, ms, t, h_dense);
            emit(out, h_out, serialize_corpus(c));
            std::size_t conflicted = 0;
            for (const auto& r : c.records) conflicted += !r.conflicts.empty();
            err << d.dataset_id << ": " << c.records.size() << " records, " << conflicted << " with conflicts\n";
            return strict && conflicted ? kExitFindings : kExitOk;
        }
        if (mg->parsed()) {
            std::vector<HarmonizedCorpus> corpora;
            for (const auto& f : mg_inputs) corpora.push_back(parse_corpus(read_file(f)));
            MergeResult r = merge(corpora, parse_merge_policy(mg_policy));
            emit(out, mg_out, serialize_corpus(r.corpus));
            std::string rep = format == "json" ? dump(merge_report_to_json(r.report)) : merge_report_to_text(r.report);
            if (mg_report.empty())
                err << rep;
            else
                write_file(mg_report, rep);
            return strict && r.report.conflicted ? kExitFindings : kExitOk;
        }
        if (s->parsed()) {
            Session sess;
            if (!s_snapshot.empty()) {
                sess = snapshot_from_json(parse_json(read_file(s_snapshot), s_snapshot));
            } else {
                Inputs inp = load_inputs("", s_cross, "");
                if (s_meta.empty()) s_meta = bundle_info().value("meta_characteristic", "");
                Taxonomy t0 = s_tax.empty() ? Taxonomy(inp.taxonomy.name(), inp.taxonomy.version(), {}) : load_taxonomy(s_tax);
                sess = start_session(t0, inp.crosswalk.descriptors,
                                     s_order == "as_given" ? QueueOrder::AsGiven : QueueOrder::ReverseChronological,
                                     "cli", s_meta);
            }
            if (s_time.empty()) {
                std::time_t now = std::time(nullptr);
                char buf[32];
                std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
                s_time = buf;
            }
            return session_loop(std::move(sess), in, out, s_time, s_save);
        }
        if (sv->parsed()) {
            Taxonomy t = load_bundled();
            Service service(t, load_bundled_crosswalk(t));
            err << "listening on http://" << sv_host << ":" << sv_port << "\n";
            service.serve(sv_host, sv_port, sv_static);
            return kExitOk;
        }
        if (bi->parsed()) {
            Json j = bundle_info();
            if (format == "json") {
                out << dump(j);
            } else {
                for (const auto& [k, val] : j.items())
                    out << k << ": " << (val.is_string() ? val.get<std::string>() : val.dump()) << "\n";
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.code() << ": " << e.what() << "\n";
        return e.code() == errc::invalid_payload ? kExitUsage : kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace taxoforge

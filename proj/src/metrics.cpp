#include "taxoforge/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

namespace taxoforge {

std::string to_string(AssociationScope s) {
    return s == AssociationScope::ExplicitOnly ? "explicit_only" : "explicit_and_inferred";
}

std::string to_string(ClassScope s) { return s == ClassScope::All ? "all" : "categories_and_characteristics"; }

AssociationScope parse_association_scope(std::string_view s) {
    if (s == "explicit_only" || s == "explicit") return AssociationScope::ExplicitOnly;
    if (s == "explicit_and_inferred" || s == "all") return AssociationScope::ExplicitAndInferred;
    throw Error(errc::invalid_payload, "unknown association scope \"" + std::string(s) + "\"");
}

ClassScope parse_class_scope(std::string_view s) {
    if (s == "all") return ClassScope::All;
    if (s == "categories_and_characteristics") return ClassScope::CategoriesAndCharacteristics;
    throw Error(errc::invalid_payload, "unknown class scope \"" + std::string(s) + "\"");
}

std::vector<Association> effective_associations(const MappingSet& m, AssociationScope scope,
                                                const std::vector<std::string>& classes) {
    std::set<std::string_view> in(classes.begin(), classes.end());
    std::vector<Association> out;
    for (const auto& a : m.associations) {
        if (scope == AssociationScope::ExplicitOnly && a.kind != AssociationKind::Explicit) continue;
        if (!in.count(a.class_id)) continue;
        out.push_back(a);
    }
    return out;
}

namespace {

// Label-side metrics do not depend on the class scope beyond filtering, so
// the plain forms use every class the mappings mention.
std::vector<std::string> mentioned_classes(const Crosswalk& x) {
    std::set<std::string> s;
    for (const auto& m : x.mapping_sets)
        for (const auto& a : m.associations) s.insert(a.class_id);
    return {s.begin(), s.end()};
}

}  // namespace

bool laconic(const MappingSet& m, std::string_view label, AssociationScope scope) {
    if (std::find(m.labels.begin(), m.labels.end(), label) == m.labels.end())
        throw Error(errc::unknown_label, "label " + std::string(label) + " is not in " + m.dataset_id, std::string(label));
    std::size_t n = 0;
    for (const auto& a : m.associations)
        if (a.label == label && (scope == AssociationScope::ExplicitAndInferred || a.kind == AssociationKind::Explicit)) ++n;
    return n <= 1;
}

ScopeMetrics compute_scope(const Crosswalk& x, const Taxonomy& t, AssociationScope scope, ClassScope class_scope) {
    std::vector<std::string> classes = class_set(t, class_scope);
    std::size_t labels = 0;
    for (const auto& m : x.mapping_sets) labels += m.labels.size();
    if (labels == 0) throw Error(errc::empty_labels, "empty label universe");
    if (classes.empty()) throw Error(errc::empty_classes, "empty class set");

    ScopeMetrics s;
    s.scope = scope;
    s.label_total = labels;
    s.class_total = classes.size();
    std::map<std::string, ClassDetail> per_class;
    for (const auto& c : classes) per_class[c].class_id = c;

    std::size_t n_laconic = 0, n_complete = 0;
    for (const auto& m : x.mapping_sets) {
        auto eff = effective_associations(m, scope, classes);
        std::map<std::string, std::size_t> per_label;
        std::map<std::string, std::size_t> labels_of_class;
        for (const auto& a : eff) {
            ++per_label[a.label];
            ++labels_of_class[a.class_id];
        }
        for (const auto& l : m.labels) {
            LabelDetail d{m.dataset_id, l, per_label[l], per_label[l] <= 1, per_label[l] >= 1};
            n_laconic += d.laconic;
            n_complete += d.complete;
            s.per_label.push_back(std::move(d));
        }
        for (const auto& [c, n] : labels_of_class) {
            auto& cd = per_class[c];
            cd.max_labels_in_a_dataset = std::max(cd.max_labels_in_a_dataset, n);
            if (n > 1) cd.lucid_min = false;
            if (n >= 1) {
                cd.sound_max = true;
                cd.witnessing_datasets.push_back(m.dataset_id);
            }
        }
    }
    std::size_t n_lucid = 0, n_sound = 0;
    for (const auto& c : classes) {
        auto& cd = per_class[c];
        n_lucid += cd.lucid_min;
        n_sound += cd.sound_max;
        s.per_class.push_back(std::move(cd));
    }
    s.laconicity = Rational(static_cast<std::int64_t>(n_laconic), static_cast<std::int64_t>(labels));
    s.completeness = Rational(static_cast<std::int64_t>(n_complete), static_cast<std::int64_t>(labels));
    s.lucidity = Rational(static_cast<std::int64_t>(n_lucid), static_cast<std::int64_t>(classes.size()));
    s.soundness = Rational(static_cast<std::int64_t>(n_sound), static_cast<std::int64_t>(classes.size()));
    return s;
}

Rational laconicity(const Crosswalk& x, AssociationScope scope) {
    std::size_t labels = 0, n = 0;
    for (const auto& m : x.mapping_sets) {
        labels += m.labels.size();
        for (const auto& l : m.labels) n += laconic(m, l, scope);
    }
    if (labels == 0) throw Error(errc::empty_labels, "empty label universe");
    return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(labels));
}

Rational completeness(const Crosswalk& x, AssociationScope scope) {
    auto classes = mentioned_classes(x);
    std::size_t labels = 0, n = 0;
    for (const auto& m : x.mapping_sets) {
        labels += m.labels.size();
        std::set<std::string> mapped;
        for (const auto& a : effective_associations(m, scope, classes)) mapped.insert(a.label);
        for (const auto& l : m.labels) n += mapped.count(l);
    }
    if (labels == 0) throw Error(errc::empty_labels, "empty label universe");
    return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(labels));
}

Rational lucidity(const Crosswalk& x, const Taxonomy& t, AssociationScope scope, ClassScope class_scope) {
    return compute_scope(x, t, scope, class_scope).lucidity;
}

Rational soundness(const Crosswalk& x, const Taxonomy& t, AssociationScope scope, ClassScope class_scope) {
    return compute_scope(x, t, scope, class_scope).soundness;
}

MetricsReport report(const Crosswalk& x, const Taxonomy& t, const MetricsOptions& options) {
    if (options.precision < 0 || options.precision > 12)
        throw Error(errc::invalid_payload, "precision must lie in [0, 12]");
    MetricsReport r;
    r.options = options;
    r.explicit_only = compute_scope(x, t, AssociationScope::ExplicitOnly, options.class_scope);
    r.explicit_and_inferred = compute_scope(x, t, AssociationScope::ExplicitAndInferred, options.class_scope);

    const ScopeMetrics& p = r.primary();
    std::size_t covered = 0;
    for (const auto& l : p.per_label) covered += l.complete;
    r.completeness_bases.push_back({"final_labels", covered, p.label_total, p.completeness,
                                    "labels after preprocessing, each counted once per dataset"});
    std::size_t declared = 0, unmapped = 0;
    for (const auto& m : x.mapping_sets) {
        declared += m.declared_label_count;
        unmapped += m.unmapped.size();
    }
    if (declared > 0) {
        std::size_t c = declared >= unmapped ? declared - unmapped : 0;
        r.completeness_bases.push_back(
            {"declared_labels", c, declared,
             Rational(static_cast<std::int64_t>(c), static_cast<std::int64_t>(declared)),
             "labels as declared before preprocessing, minus labels recorded as unmapped"});
    }
    return r;
}

Json rational_to_json(const Rational& r, int precision) {
    return Json{{"value", to_string(r)}, {"decimal", to_decimal(r, precision)}};
}

namespace {

Json scope_to_json(const ScopeMetrics& s, int precision) {
    Json j;
    j["laconicity"] = rational_to_json(s.laconicity, precision);
    j["lucidity"] = rational_to_json(s.lucidity, precision);
    j["completeness"] = rational_to_json(s.completeness, precision);
    j["soundness"] = rational_to_json(s.soundness, precision);
    j["denominators"] = Json{{"labels", s.label_total}, {"classes", s.class_total}};
    j["per_label"] = Json::array();
    for (const auto& l : s.per_label)
        j["per_label"].push_back(Json{{"dataset_id", l.dataset_id},
                                      {"label", l.label},
                                      {"classes", l.classes},
                                      {"laconic", l.laconic},
                                      {"complete", l.complete}});
    j["per_class"] = Json::array();
    for (const auto& c : s.per_class)
        j["per_class"].push_back(Json{{"class", c.class_id},
                                      {"max_labels_in_a_dataset", c.max_labels_in_a_dataset},
                                      {"lucid_min", c.lucid_min},
                                      {"sound_max", c.sound_max},
                                      {"witnessing_datasets", c.witnessing_datasets}});
    return j;
}

}  // namespace

Json metrics_to_json(const MetricsReport& r) {
    const int prec = r.options.precision;
    const ScopeMetrics& p = r.primary();
    Json j;
    j["association_scope"] = to_string(r.options.scope);
    j["class_scope"] = to_string(r.options.class_scope);
    j["precision"] = prec;
    j["laconicity"] = rational_to_json(p.laconicity, prec);
    j["lucidity"] = rational_to_json(p.lucidity, prec);
    j["completeness"] = rational_to_json(p.completeness, prec);
    j["soundness"] = rational_to_json(p.soundness, prec);
    j["denominators"] = Json{{"labels", p.label_total}, {"classes", p.class_total}};
    j["completeness_bases"] = Json::array();
    for (const auto& b : r.completeness_bases)
        j["completeness_bases"].push_back(Json{{"basis", b.basis},
                                               {"covered", b.covered},
                                               {"total", b.total},
                                               {"value", to_string(b.value)},
                                               {"decimal", to_decimal(b.value, prec)},
                                               {"note", b.note}});
    j["scopes"] = Json{{"explicit_only", scope_to_json(r.explicit_only, prec)},
                       {"explicit_and_inferred", scope_to_json(r.explicit_and_inferred, prec)}};
    return j;
}

std::string metrics_to_text(const MetricsReport& r) {
    const int prec = r.options.precision;
    std::ostringstream o;
    o << "association scope: " << to_string(r.options.scope) << "\n";
    o << "class scope:       " << to_string(r.options.class_scope) << "\n\n";
    auto cell = [&](const Rational& v) { return to_decimal(v, prec) + " (" + to_string(v) + ")"; };
    o << std::left << std::setw(14) << "metric" << std::setw(24) << "explicit_only"
      << "explicit_and_inferred\n";
    const std::pair<const char*, Rational ScopeMetrics::*> rows[] = {{"laconicity", &ScopeMetrics::laconicity},
                                                                     {"lucidity", &ScopeMetrics::lucidity},
                                                                     {"completeness", &ScopeMetrics::completeness},
                                                                     {"soundness", &ScopeMetrics::soundness}};
    for (const auto& [name, field] : rows)
        o << std::setw(14) << name << std::setw(24) << cell(r.explicit_only.*field) << cell(r.explicit_and_inferred.*field)
          << "\n";
    const ScopeMetrics& p = r.primary();
    o << "\nlabels " << p.label_total << ", classes " << p.class_total << "\n";
    o << "\ncompleteness by basis:\n";
    for (const auto& b : r.completeness_bases)
        o << "  " << std::setw(16) << b.basis << b.covered << "/" << b.total << " = " << to_decimal(b.value, prec) << "  "
          << b.note << "\n";

    std::vector<std::string> non_laconic, incomplete, non_lucid, unsound;
    for (const auto& l : p.per_label) {
        if (!l.laconic) non_laconic.push_back(l.dataset_id + ": " + l.label);
        if (!l.complete) incomplete.push_back(l.dataset_id + ": " + l.label);
    }
    for (const auto& c : p.per_class) {
        if (!c.lucid_min) non_lucid.push_back(c.class_id);
        if (!c.sound_max) unsound.push_back(c.class_id);
    }
    auto list = [&](const char* title, const std::vector<std::string>& v) {
        o << "\n" << title << " (" << v.size() << ")\n";
        for (const auto& s : v) o << "  " << s << "\n";
    };
    list("non-laconic labels", non_laconic);
    list("unmapped labels", incomplete);
    list("non-lucid classes", non_lucid);
    list("unsound classes", unsound);
    return o.str();
}

}  // namespace taxoforge

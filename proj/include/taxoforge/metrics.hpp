#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taxoforge/json_io.hpp"
#include "taxoforge/mapping.hpp"
#include "taxoforge/rational.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

enum class AssociationScope { ExplicitOnly, ExplicitAndInferred };

std::string to_string(AssociationScope s);
std::string to_string(ClassScope s);
AssociationScope parse_association_scope(std::string_view s);
ClassScope parse_class_scope(std::string_view s);

struct MetricsOptions {
    AssociationScope scope = AssociationScope::ExplicitAndInferred;
    ClassScope class_scope = ClassScope::All;
    int precision = 2;
};

// Associations that count under the scopes: kind admitted by `scope` and
// class inside the class set.
std::vector<Association> effective_associations(const MappingSet& m, AssociationScope scope,
                                                const std::vector<std::string>& classes);

bool laconic(const MappingSet& m, std::string_view label, AssociationScope scope = AssociationScope::ExplicitAndInferred);

Rational laconicity(const Crosswalk& x, AssociationScope scope = AssociationScope::ExplicitAndInferred);
Rational completeness(const Crosswalk& x, AssociationScope scope = AssociationScope::ExplicitAndInferred);
Rational lucidity(const Crosswalk& x, const Taxonomy& t, AssociationScope scope = AssociationScope::ExplicitAndInferred,
                  ClassScope class_scope = ClassScope::All);
Rational soundness(const Crosswalk& x, const Taxonomy& t, AssociationScope scope = AssociationScope::ExplicitAndInferred,
                   ClassScope class_scope = ClassScope::All);

struct LabelDetail {
    std::string dataset_id;
    std::string label;
    std::size_t classes = 0;
    bool laconic = true;
    bool complete = false;
};

struct ClassDetail {
    std::string class_id;
    std::size_t max_labels_in_a_dataset = 0;
    bool lucid_min = true;
    bool sound_max = false;
    std::vector<std::string> witnessing_datasets;
};

struct ScopeMetrics {
    AssociationScope scope = AssociationScope::ExplicitAndInferred;
    Rational laconicity, lucidity, completeness, soundness;
    std::size_t label_total = 0;
    std::size_t class_total = 0;
    std::vector<LabelDetail> per_label;
    std::vector<ClassDetail> per_class;
};

ScopeMetrics compute_scope(const Crosswalk& x, const Taxonomy& t, AssociationScope scope, ClassScope class_scope);

// Another reading of the completeness denominator.
struct CompletenessBasis {
    std::string basis;
    std::size_t covered = 0;
    std::size_t total = 0;
    Rational value;
    std::string note;
};

struct MetricsReport {
    MetricsOptions options;
    ScopeMetrics explicit_only;
    ScopeMetrics explicit_and_inferred;
    std::vector<CompletenessBasis> completeness_bases;

    const ScopeMetrics& primary() const {
        return options.scope == AssociationScope::ExplicitOnly ? explicit_only : explicit_and_inferred;
    }
};

MetricsReport report(const Crosswalk& x, const Taxonomy& t, const MetricsOptions& options = {});
Json rational_to_json(const Rational& r, int precision);
Json metrics_to_json(const MetricsReport& r);
std::string metrics_to_text(const MetricsReport& r);

enum class Evidence { None, HierarchyAncestry, ExtensionSubset, ExtensionEqual };
std::string to_string(Evidence e);

struct Adjudication {
    std::string verdict;  // "orthogonal" or "dependent"
    std::string by;
    std::string note;

    bool operator==(const Adjudication&) const = default;
};

struct OrthogonalityMatrix {
    std::vector<std::string> classes;
    std::vector<std::vector<Evidence>> cells;  // cells[i][j] for the pair (classes[i], classes[j])
    std::map<std::pair<std::string, std::string>, Adjudication> adjudications;

    Evidence at(std::string_view a, std::string_view b) const;
    // Subset or equal extensions with no ancestry either way.
    std::vector<std::pair<std::string, std::string>> flagged(const Taxonomy& t) const;
};

// Scheme-level: extension(c) = (dataset, label) pairs associated with c or a
// descendant. A pair (d, l) counts as covered by b when b's extension holds
// it or holds a constant label of d. Adjudications of `previous` carry over.
OrthogonalityMatrix orthogonality(const Crosswalk& x, const Taxonomy& t,
                                  AssociationScope scope = AssociationScope::ExplicitAndInferred,
                                  const OrthogonalityMatrix* previous = nullptr);

// Instance-level: extension(c) = ids of records assigned c or a descendant.
// `assigned` maps a record key to the class ids it carries.
OrthogonalityMatrix orthogonality_from_assignments(const std::map<std::string, std::vector<std::string>>& assigned,
                                                   const Taxonomy& t, const OrthogonalityMatrix* previous = nullptr);

void adjudicate(OrthogonalityMatrix& m, const std::string& a, const std::string& b, Adjudication adj);

Json orthogonality_to_json(const OrthogonalityMatrix& m, const Taxonomy& t);
// Header row of class ids; cells 0 none, 1 ancestry, 2 subset, 3 equal.
std::string orthogonality_to_csv(const OrthogonalityMatrix& m);

}  // namespace taxoforge

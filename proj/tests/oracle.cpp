#include "oracle.hpp"

#include <string>
#include <vector>

namespace oracle {

using namespace taxoforge;

namespace {

bool holds(const MappingSet& m, const std::string& label, const std::string& cls, AssociationScope scope) {
    for (const auto& a : m.associations)
        if (a.label == label && a.class_id == cls &&
            (scope == AssociationScope::ExplicitAndInferred || a.kind == AssociationKind::Explicit))
            return true;
    return false;
}

}  // namespace

Metrics brute_force(const Crosswalk& x, const Taxonomy& t, AssociationScope scope, ClassScope class_scope) {
    std::vector<std::string> classes;
    for (const auto& n : t.nodes())
        if (class_scope == ClassScope::All || n.kind != NodeKind::Dimension) classes.push_back(n.id);

    Metrics r;
    for (const auto& m : x.mapping_sets) {
        for (const auto& l : m.labels) {
            std::size_t hits = 0;
            for (const auto& c : classes) hits += holds(m, l, c, scope);
            ++r.laconicity.den;
            ++r.completeness.den;
            if (hits <= 1) ++r.laconicity.num;
            if (hits >= 1) ++r.completeness.num;
        }
    }
    for (const auto& c : classes) {
        bool lucid = true, sound = false;
        for (const auto& m : x.mapping_sets) {
            std::size_t hits = 0;
            for (const auto& l : m.labels) hits += holds(m, l, c, scope);
            if (hits > 1) lucid = false;
            if (hits > 0) sound = true;
        }
        ++r.lucidity.den;
        ++r.soundness.den;
        r.lucidity.num += lucid;
        r.soundness.num += sound;
    }
    return r;
}

bool equals(const Ratio& r, const Rational& q) {
    return static_cast<std::int64_t>(r.num) * q.denominator() == q.numerator() * static_cast<std::int64_t>(r.den);
}

}  // namespace oracle

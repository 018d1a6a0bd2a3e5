#pragma once

#include <cstddef>

#include "taxoforge/mapping.hpp"
#include "taxoforge/metrics.hpp"
#include "taxoforge/taxonomy.hpp"

namespace oracle {

// A count over a denominator, kept unreduced.
struct Ratio {
    std::size_t num = 0;
    std::size_t den = 0;
};

struct Metrics {
    Ratio laconicity, lucidity, completeness, soundness;
};

// Brute force over every (dataset, label, class) triple. Shares no code with
// the library beyond the data types.
Metrics brute_force(const taxoforge::Crosswalk& x, const taxoforge::Taxonomy& t, taxoforge::AssociationScope scope,
                    taxoforge::ClassScope class_scope);

bool equals(const Ratio& r, const taxoforge::Rational& q);

}  // namespace oracle

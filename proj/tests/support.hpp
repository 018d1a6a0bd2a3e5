#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "taxoforge/mapping.hpp"
#include "taxoforge/scheme.hpp"
#include "taxoforge/taxonomy.hpp"

namespace support {

struct RandomCrosswalk {
    taxoforge::Taxonomy taxonomy;
    taxoforge::Crosswalk crosswalk;
};

// At most max_classes nodes, max_datasets datasets and max_labels binary
// labels per dataset. Each label maps to zero to three distinct classes of
// random kind.
RandomCrosswalk random_crosswalk(std::mt19937_64& rng, int max_classes = 10, int max_datasets = 3, int max_labels = 8);

// Records of a crosswalk's dataset with independent random bits.
std::vector<taxoforge::NormalizedRecord> random_records(std::mt19937_64& rng, const taxoforge::MappingSet& m,
                                                        std::size_t n);

// A fresh empty directory under the system temp directory.
std::filesystem::path temp_dir(const std::string& tag);

std::filesystem::path test_data(const std::string& name);

// Id of the first node carrying `name`, skipping characteristics under a
// meta dimension.
std::string class_by_name(const taxoforge::Taxonomy& t, const std::string& name);

}  // namespace support

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "taxoforge/json_io.hpp"
#include "taxoforge/mapping.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

// TAXOFORGE_BUNDLE_DIR when set, else the directory baked in at build time.
std::filesystem::path bundle_dir();

std::string sha256_hex(std::string_view bytes);

// The bundled taxonomy, checked against the manifest checksum and counts.
Taxonomy load_bundled();
Crosswalk load_bundled_crosswalk(const Taxonomy& t);
// Reconstruction log entries of the bundle, in order.
std::vector<Json> load_bundled_log();

// A crosswalk directory: manifest.json, the taxonomy document it names, and
// one descriptor plus one mapping per dataset. Checksums present in the
// manifest are verified.
struct CrosswalkFiles {
    Taxonomy taxonomy;
    Crosswalk crosswalk;
    Json manifest;
};

// `where` is a directory holding manifest.json or the manifest file itself.
// With `taxonomy` given, the manifest's own taxonomy is ignored and the
// mappings are validated against it.
CrosswalkFiles load_crosswalk(const std::filesystem::path& where, const Taxonomy* taxonomy = nullptr);

// Writes taxonomy.json, descriptors/, mappings/ and manifest.json with
// fresh checksums. `extra` fields are appended to the manifest.
void write_crosswalk(const std::filesystem::path& dir, const Taxonomy& t, const Crosswalk& x,
                     const Json& extra = Json::object());

Json bundle_info();

}  // namespace taxoforge

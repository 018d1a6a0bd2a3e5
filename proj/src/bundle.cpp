#include "taxoforge/bundle.hpp"

#include <cstdlib>

#include <openssl/evp.h>

#ifndef TAXOFORGE_DEFAULT_BUNDLE_DIR
#define TAXOFORGE_DEFAULT_BUNDLE_DIR "data/bundle"
#endif

namespace taxoforge {

namespace fs = std::filesystem;

std::filesystem::path bundle_dir() {
    if (const char* env = std::getenv("TAXOFORGE_BUNDLE_DIR"); env && *env) return env;
    return TAXOFORGE_DEFAULT_BUNDLE_DIR;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &n, EVP_sha256(), nullptr))
        throw Error(errc::io, "sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < n; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

std::string checked_read(const fs::path& base, const Json& manifest, std::string_view file_key,
                         std::string_view sha_key, const Json* entry = nullptr) {
    const Json& src = entry ? *entry : manifest;
    std::string rel = require_string(src, file_key, "manifest");
    std::string bytes = read_file(base / rel);
    if (auto it = src.find(sha_key); it != src.end()) {
        if (!it->is_string()) throw Error(errc::format, "manifest: " + std::string(sha_key) + " must be a string");
        if (sha256_hex(bytes) != it->get<std::string>())
            throw Error(errc::checksum, "checksum mismatch for " + rel, rel);
    }
    return bytes;
}

void check_counts(const Taxonomy& t, const Json& manifest) {
    auto it = manifest.find("counts");
    if (it == manifest.end()) return;
    const std::pair<const char*, NodeKind> kinds[] = {
        {"categories", NodeKind::Category}, {"dimensions", NodeKind::Dimension}, {"characteristics", NodeKind::Characteristic}};
    for (const auto& [key, kind] : kinds) {
        if (!it->contains(key)) continue;
        if ((*it)[key].get<std::size_t>() != t.count(kind))
            throw Error(errc::checksum, std::string("manifest count of ") + key + " is " + (*it)[key].dump() +
                                            ", taxonomy has " + std::to_string(t.count(kind)));
    }
}

}  // namespace

CrosswalkFiles load_crosswalk(const fs::path& where, const Taxonomy* taxonomy) {
    fs::path manifest_path = fs::is_directory(where) ? where / "manifest.json" : where;
    fs::path base = manifest_path.parent_path();
    CrosswalkFiles out;
    out.manifest = parse_json(read_file(manifest_path), manifest_path.string());
    const Json& m = out.manifest;
    if (!m.is_object()) throw Error(errc::format, manifest_path.string() + ": expected an object");
    if (taxonomy) {
        out.taxonomy = *taxonomy;
    } else {
        out.taxonomy = parse_taxonomy(checked_read(base, m, "taxonomy", "taxonomy_sha256"));
        check_counts(out.taxonomy, m);
    }
    const Taxonomy& t = out.taxonomy;
    if (auto v = optional_string(m, "taxonomy_version", "manifest"); !v.empty() && v != t.version())
        throw Error(errc::version_mismatch, "manifest expects taxonomy version " + v + ", loaded " + t.version());
    out.crosswalk.taxonomy_version = t.version();
    const Json& ds = require(m, "datasets", "manifest");
    if (!ds.is_array()) throw Error(errc::format, "manifest: datasets must be an array");
    for (const auto& e : ds) {
        DatasetDescriptor d = parse_descriptor(checked_read(base, m, "descriptor", "descriptor_sha256", &e));
        if (auto id = optional_string(e, "dataset_id", "manifest"); !id.empty() && id != d.dataset_id)
            throw Error(errc::dataset_mismatch, "manifest entry " + id + " names descriptor " + d.dataset_id, id);
        MappingSet ms = parse_mapping(checked_read(base, m, "mapping", "mapping_sha256", &e), t, d);
        out.crosswalk.descriptors.push_back(std::move(d));
        out.crosswalk.mapping_sets.push_back(std::move(ms));
    }
    check_crosswalk(out.crosswalk, t);
    if (auto it = m.find("explicit_associations"); it != m.end()) {
        std::size_t n = 0;
        for (const auto& ms : out.crosswalk.mapping_sets)
            for (const auto& a : ms.associations) n += a.kind == AssociationKind::Explicit;
        if (n != it->get<std::size_t>())
            throw Error(errc::checksum, "manifest records " + it->dump() + " explicit associations, found " +
                                            std::to_string(n));
    }
    if (auto it = m.find("iterations"); it != m.end()) {
        for (const auto& [k, v] : it->items()) {
            if (!t.contains(k)) throw Error(errc::unknown_node, "manifest iterations name unknown class " + k, k);
            out.crosswalk.iterations[k] = v.get<int>();
        }
    }
    return out;
}

Taxonomy load_bundled() {
    fs::path dir = bundle_dir();
    Json m = parse_json(read_file(dir / "manifest.json"), "bundle manifest");
    Taxonomy t = parse_taxonomy(checked_read(dir, m, "taxonomy", "taxonomy_sha256"));
    check_counts(t, m);
    if (auto v = optional_string(m, "taxonomy_version", "manifest"); !v.empty() && v != t.version())
        throw Error(errc::version_mismatch, "bundle manifest expects taxonomy version " + v + ", found " + t.version());
    return t;
}

Crosswalk load_bundled_crosswalk(const Taxonomy& t) { return load_crosswalk(bundle_dir(), &t).crosswalk; }

std::vector<Json> load_bundled_log() {
    fs::path dir = bundle_dir();
    Json m = parse_json(read_file(dir / "manifest.json"), "bundle manifest");
    std::string text = checked_read(dir, m, "reconstruction_log", "reconstruction_log_sha256");
    std::vector<Json> out;
    std::size_t start = 0, line = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        ++line;
        std::string_view s(text.data() + start, nl - start);
        if (s.find_first_not_of(" \t\r") != std::string_view::npos)
            out.push_back(parse_json(s, "reconstruction log line " + std::to_string(line)));
        start = nl + 1;
    }
    return out;
}

void write_crosswalk(const fs::path& dir, const Taxonomy& t, const Crosswalk& x, const Json& extra) {
    check_crosswalk(x, t);
    std::string tax = serialize_taxonomy(t);
    write_file(dir / "taxonomy.json", tax);
    Json m;
    m["name"] = t.name();
    m["taxonomy"] = "taxonomy.json";
    m["taxonomy_version"] = t.version();
    m["taxonomy_sha256"] = sha256_hex(tax);
    m["counts"] = Json{{"categories", t.count(NodeKind::Category)},
                       {"dimensions", t.count(NodeKind::Dimension)},
                       {"characteristics", t.count(NodeKind::Characteristic)}};
    m["datasets"] = Json::array();
    for (std::size_t i = 0; i < x.descriptors.size(); ++i) {
        const auto& id = x.descriptors[i].dataset_id;
        std::string dp = "descriptors/" + id + ".json", mp = "mappings/" + id + ".json";
        std::string dtext = dump(descriptor_to_json(x.descriptors[i]));
        std::string mtext = dump(mapping_to_json(x.mapping_sets[i]));
        write_file(dir / dp, dtext);
        write_file(dir / mp, mtext);
        m["datasets"].push_back(Json{{"dataset_id", id},
                                     {"descriptor", dp},
                                     {"descriptor_sha256", sha256_hex(dtext)},
                                     {"mapping", mp},
                                     {"mapping_sha256", sha256_hex(mtext)}});
    }
    if (!x.iterations.empty()) {
        Json it = Json::object();
        for (const auto& n : t.nodes())
            if (auto f = x.iterations.find(n.id); f != x.iterations.end()) it[n.id] = f->second;
        m["iterations"] = std::move(it);
    }
    for (const auto& [k, v] : extra.items()) m[k] = v;
    write_file(dir / "manifest.json", dump(m));
}

Json bundle_info() {
    fs::path dir = bundle_dir();
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    Json m = parse_json(read_file(dir / "manifest.json"), "bundle manifest");
    Json j;
    j["bundle_dir"] = dir.string();
    j["name"] = m.value("name", "");
    j["taxonomy"] = t.name();
    j["taxonomy_version"] = t.version();
    j["taxonomy_sha256"] = m.value("taxonomy_sha256", "");
    j["counts"] = Json{{"categories", t.count(NodeKind::Category)},
                       {"dimensions", t.count(NodeKind::Dimension)},
                       {"characteristics", t.count(NodeKind::Characteristic)}};
    std::size_t labels = 0, declared = 0, explicit_n = 0, inferred_n = 0, unmapped = 0;
    for (const auto& ms : x.mapping_sets) {
        labels += ms.labels.size();
        declared += ms.declared_label_count;
        unmapped += ms.unmapped.size();
        for (const auto& a : ms.associations) (a.kind == AssociationKind::Explicit ? explicit_n : inferred_n)++;
    }
    j["datasets"] = x.mapping_sets.size();
    j["declared_labels"] = declared;
    j["labels"] = labels;
    j["explicit_associations"] = explicit_n;
    j["inferred_associations"] = inferred_n;
    j["unmapped_labels"] = unmapped;
    j["meta_characteristic"] = m.value("meta_characteristic", "");
    j["validation"] = to_string(validate(t, ValidationMode::Strict).status);
    return j;
}

}  // namespace taxoforge

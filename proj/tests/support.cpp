#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <set>

#include <unistd.h>

#include "taxoforge/error.hpp"

namespace support {

using namespace taxoforge;

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

RandomCrosswalk random_crosswalk(std::mt19937_64& rng, int max_classes, int max_datasets, int max_labels) {
    int n = uniform(rng, 1, max_classes);
    std::vector<TaxonNode> nodes;
    for (int i = 0; i < n; ++i) {
        TaxonNode node;
        node.id = "c" + std::to_string(i);
        node.name = "Class " + std::to_string(i);
        std::vector<std::size_t> cats, dims, chars;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (nodes[j].kind == NodeKind::Category) cats.push_back(j);
            if (nodes[j].kind == NodeKind::Dimension) dims.push_back(j);
            if (nodes[j].kind == NodeKind::Characteristic) chars.push_back(j);
        }
        int k = uniform(rng, 0, 2);
        if (k == 2 && dims.empty()) k = 1;
        auto pick = [&](const std::vector<std::size_t>& from) { return from[uniform(rng, 0, int(from.size()) - 1)]; };
        if (k == 0) {
            node.kind = NodeKind::Category;
            if (!cats.empty() && uniform(rng, 0, 1)) node.parent = nodes[pick(cats)].id;
        } else if (k == 1) {
            node.kind = NodeKind::Dimension;
            node.dimension_kind = DimensionKind::Basic;
            if (!cats.empty() && uniform(rng, 0, 1)) node.parent = nodes[pick(cats)].id;
        } else {
            node.kind = NodeKind::Characteristic;
            std::vector<std::size_t> parents = dims;
            parents.insert(parents.end(), chars.begin(), chars.end());
            node.parent = nodes[pick(parents)].id;
        }
        nodes.push_back(std::move(node));
    }
    RandomCrosswalk r;
    r.taxonomy = Taxonomy("random", "0.1.0", nodes);
    r.crosswalk.taxonomy_version = "0.1.0";
    int datasets = uniform(rng, 1, max_datasets);
    for (int d = 0; d < datasets; ++d) {
        DatasetDescriptor desc;
        desc.dataset_id = "d" + std::to_string(d);
        desc.name = "Dataset " + std::to_string(d);
        desc.year = 2000 + d;
        int labels = uniform(rng, 1, max_labels);
        MappingSet m;
        m.dataset_id = desc.dataset_id;
        m.taxonomy_version = "0.1.0";
        for (int l = 0; l < labels; ++l) {
            std::string name = "l" + std::to_string(l);
            desc.labels.push_back(LabelDef{name, BinaryType{}, false, {}});
            m.labels.push_back(name);
            std::set<int> chosen;
            int k = uniform(rng, 0, 3);
            for (int i = 0; i < k; ++i) chosen.insert(uniform(rng, 0, n - 1));
            for (int c : chosen)
                m.associations.push_back(Association{desc.dataset_id, name, nodes[c].id,
                                                     uniform(rng, 0, 3) == 0 ? AssociationKind::Inferred
                                                                             : AssociationKind::Explicit,
                                                     "random", ""});
            if (chosen.empty()) m.unmapped.push_back(UnmappedLabel{name, "random"});
        }
        m.declared_label_count = m.labels.size();
        m.complete = true;
        r.crosswalk.descriptors.push_back(std::move(desc));
        r.crosswalk.mapping_sets.push_back(std::move(m));
    }
    return r;
}

std::vector<NormalizedRecord> random_records(std::mt19937_64& rng, const MappingSet& m, std::size_t n) {
    std::vector<NormalizedRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        NormalizedRecord r{std::to_string(i + 1), m.dataset_id, {}};
        for (const auto& l : m.labels) r.bits[l] = uniform(rng, 0, 1) ? Bit::One : Bit::Zero;
        out.push_back(std::move(r));
    }
    return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::temp_directory_path() /
             ("taxoforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::filesystem::path test_data(const std::string& name) { return std::filesystem::path(TAXOFORGE_TEST_DATA) / name; }

std::string class_by_name(const Taxonomy& t, const std::string& name) {
    for (const auto& n : t.nodes()) {
        if (n.name != name) continue;
        if (n.kind == NodeKind::Characteristic) {
            bool under_meta = false;
            for (const auto& a : t.ancestors(n.id))
                if (t.node(a).kind == NodeKind::Dimension && t.node(a).dimension_kind == DimensionKind::Meta)
                    under_meta = true;
            if (under_meta) continue;
        }
        return n.id;
    }
    throw Error(errc::unknown_node, "no class named " + name, name);
}

}  // namespace support

#include <doctest.h>

#include "support.hpp"
#include "taxoforge/bundle.hpp"
#include "taxoforge/json_io.hpp"
#include "taxoforge/rational.hpp"
#include "taxoforge/taxonomy.hpp"

using namespace taxoforge;

namespace {

std::string error_code(const auto& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

TaxonNode node(std::string id, NodeKind k, std::optional<std::string> parent = std::nullopt) {
    TaxonNode n;
    n.id = id;
    n.name = id;
    n.kind = k;
    n.parent = std::move(parent);
    if (k == NodeKind::Dimension) n.dimension_kind = DimensionKind::Basic;
    return n;
}

}  // namespace

TEST_CASE("bundled taxonomy is strict-valid with the expected counts") {
    Taxonomy t = load_bundled();
    auto r = validate(t, ValidationMode::Strict);
    CHECK(r.status == ValidationStatus::Valid);
    CHECK(r.violations.empty());
    CHECK(t.count(NodeKind::Category) == 5);
    CHECK(t.count(NodeKind::Dimension) == 17);
    CHECK(t.count(NodeKind::Characteristic) == 100);
    CHECK(t.version() == "1.0.0");
}

TEST_CASE("hierarchy queries") {
    Taxonomy t = load_bundled();
    CHECK(t.ancestors("target.individual.to_the_author") ==
          std::vector<std::string>{"target.individual", "target", "abusive"});
    CHECK(t.is_ancestor("abusive", "target.group"));
    CHECK_FALSE(t.is_ancestor("target.group", "abusive"));
    CHECK_FALSE(t.is_ancestor("target", "target"));
    CHECK(t.dimension_of("intensity.threat.glorification") == std::optional<std::string>("intensity"));
    CHECK(t.characteristic_path("intensity.threat.glorification") ==
          std::vector<std::string>{"intensity.threat", "intensity.threat.glorification"});
    auto d = t.descendants("context");
    CHECK(d.size() == 5);
    CHECK(d.front() == "context.original");
    CHECK(t.roots() == std::vector<std::string>{"context", "abusive", "non_abusive"});
}

TEST_CASE("serialization round trips byte for byte") {
    Taxonomy t = load_bundled();
    std::string once = serialize_taxonomy(t);
    CHECK(serialize_taxonomy(parse_taxonomy(once)) == once);
    CHECK(once == read_file(bundle_dir() / "taxonomy.json"));
}

TEST_CASE("construction rejects broken identity and shape") {
    CHECK(error_code([] { Taxonomy("x", "1", {node("a", NodeKind::Category), node("a", NodeKind::Category)}); }) ==
          errc::duplicate_id);
    CHECK(error_code([] { Taxonomy("x", "1", {node("a", NodeKind::Category, "zzz")}); }) == errc::unknown_parent);
    CHECK(error_code([] { parse_taxonomy(read_file(support::test_data("cyclic_taxonomy.json"))); }) == errc::cycle);
    CHECK(error_code([] {
              auto n = node("a", NodeKind::Category);
              n.dimension_kind = DimensionKind::Meta;
              Taxonomy("x", "1", {n});
          }) == errc::illegal_fields);
    CHECK(error_code([] { parse_taxonomy("{not json"); }) == errc::syntax);
}

TEST_CASE("strict and draft validation") {
    Taxonomy bad = parse_taxonomy(read_file(support::test_data("bad_taxonomy.json")));
    auto strict = validate(bad, ValidationMode::Strict);
    CHECK(strict.status == ValidationStatus::Invalid);
    bool kind = false, minc = false;
    for (const auto& v : strict.violations) {
        kind = kind || (v.rule == rule::kind_compat && v.node == std::optional<std::string>("c.x"));
        minc = minc || (v.rule == rule::min_characteristics && v.node == std::optional<std::string>("d"));
    }
    CHECK(kind);
    CHECK(minc);

    // Fixing the kind error leaves only strict-only violations.
    std::vector<TaxonNode> nodes;
    for (const auto& n : bad.nodes())
        if (n.id != "c.x") nodes.push_back(n);
    Taxonomy draft("Draft", "0", nodes);
    CHECK(validate(draft, ValidationMode::Draft).violations.empty());
    CHECK(validate(draft, ValidationMode::Strict).status == ValidationStatus::DraftOnly);
}

TEST_CASE("sibling names must differ") {
    Taxonomy t("x", "1",
               {node("d", NodeKind::Dimension), node("d.a", NodeKind::Characteristic, "d"),
                node("d.b", NodeKind::Characteristic, "d")});
    std::vector<TaxonNode> nodes = t.nodes();
    nodes[2].name = "d.a";
    auto r = validate(Taxonomy("x", "1", nodes), ValidationMode::Strict);
    bool sibling = false;
    for (const auto& v : r.violations) sibling = sibling || v.rule == rule::sibling_name;
    CHECK(sibling);
}

TEST_CASE("class scopes") {
    Taxonomy t = load_bundled();
    CHECK(class_set(t, ClassScope::All).size() == 122);
    CHECK(class_set(t, ClassScope::CategoriesAndCharacteristics).size() == 105);
}

TEST_CASE("rationals parse and render exactly") {
    CHECK(to_string(parse_rational("2.5")) == "5/2");
    CHECK(to_string(parse_rational("-8")) == "-8");
    CHECK(to_string(parse_rational("14/4")) == "7/2");
    CHECK(to_decimal(Rational(104, 122), 2) == "0.85");
    CHECK(to_decimal(Rational(1, 8), 2) == "0.13");
    CHECK(to_decimal(Rational(-1, 8), 2) == "-0.13");
    CHECK(to_decimal(Rational(2, 3), 0) == "1");
    CHECK_THROWS_AS(parse_rational("1/0"), Error);
    CHECK_THROWS_AS(parse_rational("abc"), Error);
}

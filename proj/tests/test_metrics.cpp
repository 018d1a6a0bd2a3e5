#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "support.hpp"
#include "taxoforge/bundle.hpp"
#include "taxoforge/metrics.hpp"

using namespace taxoforge;

TEST_CASE("bundled crosswalk metrics") {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto r = report(x, t);
    const auto& p = r.primary();
    CHECK(p.laconicity == Rational(1));
    CHECK(p.lucidity == Rational(104, 122));
    CHECK(p.soundness == Rational(117, 122));
    CHECK(p.completeness == Rational(289, 291));
    Json j = metrics_to_json(r);
    CHECK(j["laconicity"]["decimal"] == "1.00");
    CHECK(j["lucidity"]["decimal"] == "0.85");
    CHECK(j["soundness"]["decimal"] == "0.96");
    CHECK(j["completeness"]["decimal"] == "0.99");
    REQUIRE(r.completeness_bases.size() == 2);
    CHECK(r.completeness_bases[1].covered == 117);
    CHECK(r.completeness_bases[1].total == 119);
}

TEST_CASE("metrics agree with the brute-force oracle on small random crosswalks") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        auto rc = support::random_crosswalk(rng);
        for (auto scope : {AssociationScope::ExplicitOnly, AssociationScope::ExplicitAndInferred}) {
            for (auto cs : {ClassScope::All, ClassScope::CategoriesAndCharacteristics}) {
                auto want = oracle::brute_force(rc.crosswalk, rc.taxonomy, scope, cs);
                if (want.lucidity.den == 0) {
                    CHECK_THROWS_AS(compute_scope(rc.crosswalk, rc.taxonomy, scope, cs), Error);
                    continue;
                }
                auto got = compute_scope(rc.crosswalk, rc.taxonomy, scope, cs);
                CHECK(oracle::equals(want.laconicity, got.laconicity));
                CHECK(oracle::equals(want.lucidity, got.lucidity));
                CHECK(oracle::equals(want.completeness, got.completeness));
                CHECK(oracle::equals(want.soundness, got.soundness));
                CHECK(oracle::equals(want.lucidity, lucidity(rc.crosswalk, rc.taxonomy, scope, cs)));
                CHECK(oracle::equals(want.soundness, soundness(rc.crosswalk, rc.taxonomy, scope, cs)));
            }
            auto all = oracle::brute_force(rc.crosswalk, rc.taxonomy, scope, ClassScope::All);
            CHECK(oracle::equals(all.laconicity, laconicity(rc.crosswalk, scope)));
            CHECK(oracle::equals(all.completeness, completeness(rc.crosswalk, scope)));
        }
    }
}

TEST_CASE("empty universes are errors") {
    Taxonomy t = load_bundled();
    Crosswalk empty;
    CHECK_THROWS_AS(report(empty, t), Error);
    Crosswalk x = load_bundled_crosswalk(t);
    CHECK_THROWS_AS(report(x, t, MetricsOptions{AssociationScope::ExplicitAndInferred, ClassScope::All, 13}), Error);
}

TEST_CASE("explicit-only scope drops inferred context associations") {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto r = report(x, t, MetricsOptions{AssociationScope::ExplicitOnly, ClassScope::All, 4});
    CHECK(r.explicit_only.completeness < r.explicit_and_inferred.completeness);
    CHECK(metrics_to_json(r)["association_scope"] == "explicit_only");
    CHECK(metrics_to_json(r)["lucidity"]["decimal"].get<std::string>().size() == 6);
}

TEST_CASE("orthogonality flags only the reaction and author overlap") {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto m = orthogonality(x, t);
    std::set<std::string> watched;
    for (const auto& root : {"context", "target"}) {
        watched.insert(root);
        for (const auto& d : t.descendants(root)) watched.insert(d);
    }
    std::vector<std::pair<std::string, std::string>> hits;
    for (const auto& [a, b] : m.flagged(t))
        if (watched.count(a) && watched.count(b) && a != "context" && b != "context") hits.emplace_back(a, b);
    REQUIRE(hits.size() == 1);
    std::set<std::string> pair{hits[0].first, hits[0].second};
    CHECK(pair == std::set<std::string>{"context.reaction", "target.individual.to_the_author"});
    CHECK(m.at("target.group", "target") == Evidence::HierarchyAncestry);
    CHECK(m.at("target", "target.group") == Evidence::None);
}

TEST_CASE("orthogonality CSV uses numeric codes and adjudications carry over") {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto m = orthogonality(x, t);
    std::string csv = orthogonality_to_csv(m);
    CHECK(csv.rfind("class,context,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 123);
    adjudicate(m, "context.reaction", "target.individual.to_the_author", {"orthogonal", "tester", "different axes"});
    auto again = orthogonality(x, t, AssociationScope::ExplicitAndInferred, &m);
    CHECK(again.adjudications.size() == 1);
    CHECK_THROWS_AS(adjudicate(m, "context", "abusive", {"maybe", "", ""}), Error);
    Json j = orthogonality_to_json(again, t);
    CHECK(j["adjudications"].size() == 1);
}

TEST_CASE("instance-level orthogonality") {
    Taxonomy t = load_bundled();
    std::map<std::string, std::vector<std::string>> assigned{
        {"r1", {"directness.explicit", "intensity.verbal"}},
        {"r2", {"directness.explicit", "intensity.verbal.derogation"}},
        {"r3", {"directness.implicit"}}};
    auto m = orthogonality_from_assignments(assigned, t);
    CHECK(m.at("intensity.verbal", "directness.explicit") == Evidence::ExtensionEqual);
    CHECK(m.at("intensity.verbal.derogation", "directness.explicit") == Evidence::ExtensionSubset);
    CHECK(m.at("directness.implicit", "intensity.verbal") == Evidence::None);
}

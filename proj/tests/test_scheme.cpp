#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "taxoforge/bundle.hpp"
#include "taxoforge/scheme.hpp"

using namespace taxoforge;

namespace {

DatasetDescriptor bundled_descriptor(const std::string& id) {
    return parse_descriptor(read_file(bundle_dir() / "descriptors" / (id + ".json")));
}

}  // namespace

TEST_CASE("majority vote needs a strict maximum") {
    CHECK(majority_vote<int>({1, 1, 0}) == std::optional<int>(1));
    CHECK(majority_vote<int>({1, 0}) == std::nullopt);
    CHECK(majority_vote<int>({2}) == std::optional<int>(2));
    CHECK(majority_vote<std::string>({"a", "b", "b", "c", "a"}) == std::nullopt);
    CHECK_THROWS_AS(majority_vote<int>({}), Error);
}

TEST_CASE("binarize splits at the midpoint") {
    Rational lo(0), hi(1);
    CHECK(binarize_numeric(Rational(1, 2), lo, hi) == 0);
    CHECK(binarize_numeric(Rational(51, 100), lo, hi) == 1);
    CHECK(binarize_numeric(lo, lo, hi) == 0);
    CHECK(binarize_numeric(hi, lo, hi) == 1);
    CHECK(binarize_numeric(Rational(0), Rational(-4), Rational(4)) == 0);
}

TEST_CASE("categorical expansion is one-hot") {
    std::vector<std::string> cats{"a", "b", "c"};
    CHECK(expand_categorical("b", cats) == std::vector<int>{0, 1, 0});
    CHECK_THROWS_AS(expand_categorical("z", cats), Error);
}

TEST_CASE("flatten merges with or and is idempotent") {
    Flatten f{{"x", "y"}, "u"};
    BitMap once = flatten({{"x", Bit::Zero}, {"y", Bit::One}, {"z", Bit::Zero}}, f);
    CHECK(once == BitMap{{"u", Bit::One}, {"z", Bit::Zero}});
    CHECK(flatten(once, f) == once);
    CHECK(flatten({{"x", Bit::Zero}, {"y", Bit::Unresolved}}, f) == BitMap{{"u", Bit::Unresolved}});
    CHECK(flatten({{"x", Bit::One}, {"y", Bit::Unresolved}}, f) == BitMap{{"u", Bit::One}});
}

TEST_CASE("per-annotator votes resolve by majority; ties stay unresolved") {
    auto d = bundled_descriptor("semeval");
    auto r = apply_pipeline(d, parse_raw_records(read_file(support::test_data("semeval_sample.csv"))));
    REQUIRE(r.records.size() == 3);
    CHECK(r.records[0].record_id == "s1");
    CHECK(r.records[0].bits.at("toxic") == Bit::One);
    CHECK(r.records[0].bits.at("identity_attack") == Bit::Zero);
    CHECK(r.records[1].bits.at("toxic") == Bit::Unresolved);
    CHECK(r.records[1].bits.at("identity_attack") == Bit::One);
    CHECK(r.records[2].bits.at("identity_attack") == Bit::One);
    CHECK(r.records[0].bits.at(std::string(kContextLabel)) == Bit::One);
    CHECK(r.report.unresolved_ties == 1);
    CHECK(r.report.records == 3);
}

TEST_CASE("numeric labels binarize from TSV input") {
    auto d = bundled_descriptor("ethos");
    auto r = apply_pipeline(d, parse_raw_records(read_file(support::test_data("ethos_sample.tsv"))));
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].bits.at("violence") == Bit::Zero);
    CHECK(r.records[1].bits.at("violence") == Bit::One);
    CHECK(r.records[1].bits.at("sexual_orientation") == Bit::One);
    CHECK(r.records[0].bits.at("directed_vs_generalized") == Bit::One);
}

TEST_CASE("JSON lines input and normalized round trip") {
    auto d = bundled_descriptor("semeval");
    std::string jsonl =
        "{\"record_id\":\"a\",\"toxic\":[1,1,0],\"identity_attack\":[0,0,1]}\n"
        "{\"record_id\":\"b\",\"toxic\":[0],\"identity_attack\":[1]}\n";
    auto r = apply_pipeline(d, parse_raw_records(jsonl));
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].bits.at("toxic") == Bit::One);
    CHECK(r.records[1].bits.at("identity_attack") == Bit::One);
    std::string text = serialize_records(r.records);
    CHECK(parse_normalized_records(text) == r.records);
    CHECK(serialize_records(parse_normalized_records(text)) == text);
}

TEST_CASE("pipeline errors carry codes") {
    auto d = bundled_descriptor("ethos");
    auto code = [&](const std::string& text) {
        try {
            apply_pipeline(d, parse_raw_records(text));
        } catch (const Error& e) {
            return e.code();
        }
        return std::string();
    };
    CHECK(code("record_id\tviolence\nx\t0.5\n") == errc::missing_column);
    std::string header = "violence,directed_vs_generalized,gender,race,national_origin,disability,religion,sexual_orientation\n";
    CHECK(code(header + "2,0,0,0,0,0,0,0\n") == errc::out_of_range);
    CHECK(code(header + "high,0,0,0,0,0,0,0\n") == errc::bad_value);
}

TEST_CASE("every bundled descriptor compiles and keeps its declared label order") {
    for (const auto& e : std::filesystem::directory_iterator(bundle_dir() / "descriptors")) {
        auto d = parse_descriptor(read_file(e.path()));
        auto labels = label_set(d);
        CHECK_FALSE(labels.empty());
        CHECK(descriptor_from_json(descriptor_to_json(d)) == d);
        std::set<std::string> unique(labels.begin(), labels.end());
        CHECK(unique.size() == labels.size());
    }
}

TEST_CASE("decompose and flatten act on categories before expansion") {
    auto d = bundled_descriptor("dynabench");
    auto labels = label_set(d);
    auto has = [&](const std::string& l) { return std::find(labels.begin(), labels.end(), l) != labels.end(); };
    CHECK_FALSE(has("target.asi.wom"));
    CHECK(has("target.asi.east"));
    CHECK(has("target.not given (race)"));
    CHECK_FALSE(has("target.nazis"));
}

TEST_CASE("alias suggestions are advisory") {
    DatasetDescriptor d;
    d.dataset_id = "x";
    d.labels.push_back(LabelDef{"colour", CategoricalType{{"women", "womem", "men"}}, false, {}});
    auto s = suggest_aliases(d);
    bool found = std::any_of(s.begin(), s.end(), [](const AliasSuggestion& a) {
        return (a.a == "women" && a.b == "womem") || (a.a == "womem" && a.b == "women");
    });
    CHECK(found);
}

#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "taxoforge/bundle.hpp"
#include "taxoforge/cli.hpp"
#include "taxoforge/devloop.hpp"
#include "taxoforge/harmonizer.hpp"
#include "taxoforge/metrics.hpp"

using namespace taxoforge;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args, const std::string& input = "") {
    std::ostringstream out, err;
    std::istringstream in(input);
    int code = run(args, out, err, in);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& f) { return support::test_data(f).string(); }
std::string bundled(const std::string& f) { return (bundle_dir() / f).string(); }

}  // namespace

TEST_CASE("validate exit codes") {
    CHECK(cli({"validate"}).code == kExitOk);
    CHECK(cli({"validate", "bundle", "--strict"}).code == kExitOk);
    auto bad = cli({"validate", data("bad_taxonomy.json"), "--strict", "--format", "json"});
    CHECK(bad.code == kExitFindings);
    CHECK(parse_json(bad.out)["status"] == "invalid");
    CHECK(cli({"validate", data("bad_taxonomy.json")}).code == kExitOk);
    CHECK(cli({"validate", data("missing.json")}).code == kExitIo);
    CHECK(cli({"validate", data("cyclic_taxonomy.json")}).code == kExitIo);
}

TEST_CASE("usage errors exit 2") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"metrics", "--scope", "sometimes"}).code == kExitUsage);
    CHECK(cli({"metrics", "--precision", "40"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("metrics JSON equals the library rendering") {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto r = cli({"metrics", "--format", "json"});
    CHECK(r.code == kExitOk);
    CHECK(r.out == dump(metrics_to_json(report(x, t))));
    auto text = cli({"metrics"});
    CHECK(text.out.find("0.85") != std::string::npos);
    CHECK(cli({"metrics", "--strict"}).code == kExitFindings);
    auto e = cli({"metrics", "--format", "json", "--scope", "explicit_only", "--precision", "3"});
    CHECK(e.out == dump(metrics_to_json(
                       report(x, t, MetricsOptions{AssociationScope::ExplicitOnly, ClassScope::All, 3}))));
}

TEST_CASE("metrics over a manifest and an orthogonality CSV") {
    auto dir = support::temp_dir("cli-metrics");
    auto csv = (dir / "orth.csv").string();
    auto r = cli({"metrics", "--crosswalk", bundled("manifest.json"), "--orthogonality-csv", csv, "--format", "json"});
    CHECK(r.code == kExitOk);
    CHECK(read_file(csv).rfind("class,context,", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("preprocess, harmonize and merge") {
    auto dir = support::temp_dir("cli-pipe");
    auto norm = (dir / "gabhc.jsonl").string();
    auto rep = (dir / "report.json").string();
    auto p = cli({"preprocess", "--descriptor", bundled("descriptors/gabhc.json"), "--records", data("gabhc_sample.csv"),
                  "--out", norm, "--report", rep});
    REQUIRE(p.code == kExitOk);
    CHECK(parse_normalized_records(read_file(norm)).size() == 4);
    CHECK(parse_json(read_file(rep))["records"] == 4);

    auto h1 = (dir / "h1.jsonl").string();
    auto h2 = (dir / "h2.jsonl").string();
    CHECK(cli({"harmonize", "--descriptor", bundled("descriptors/gabhc.json"), "--mapping", bundled("mappings/gabhc.json"),
               "--records", norm, "--out", h1})
              .code == kExitOk);
    // Raw input is preprocessed on the fly and gives the same corpus.
    auto raw = cli({"harmonize", "--descriptor", bundled("descriptors/gabhc.json"), "--mapping",
                    bundled("mappings/gabhc.json"), "--records", data("gabhc_sample.csv")});
    CHECK(raw.out == read_file(h1));
    CHECK(cli({"harmonize", "--descriptor", bundled("descriptors/gabhc.json"), "--mapping", bundled("mappings/gabhc.json"),
               "--records", norm, "--strict"})
              .code == kExitFindings);
    CHECK(cli({"harmonize", "--descriptor", bundled("descriptors/semeval.json"), "--mapping",
               bundled("mappings/semeval.json"), "--records", data("semeval_sample.csv"), "--out", h2, "--dense"})
              .code == kExitOk);

    auto merged = (dir / "merged.jsonl").string();
    auto m = cli({"merge", h1, h2, "--out", merged, "--format", "json"});
    CHECK(m.code == kExitOk);
    CHECK(parse_corpus(read_file(merged)).records.size() == 6);
    CHECK(parse_json(m.err)["dropped"] == 1);
    CHECK(cli({"merge", h1, h2, "--policy", "keep_flagged", "--out", merged}).code == kExitOk);
    CHECK(parse_corpus(read_file(merged)).records.size() == 7);
    std::filesystem::remove_all(dir);
}

TEST_CASE("map-check") {
    auto r = cli({"map-check", "--descriptor", bundled("descriptors/cad.json"), "--mapping", bundled("mappings/cad.json"),
                  "--format", "json", "--strict"});
    CHECK(r.code == kExitOk);
    CHECK(parse_json(r.out)["complete"] == true);
    CHECK(cli({"map-check", "--descriptor", bundled("descriptors/semeval.json"), "--mapping",
               bundled("mappings/cad.json")})
              .code == kExitIo);
}

TEST_CASE("interactive session over stdin") {
    auto dir = support::temp_dir("cli-session");
    auto snap = (dir / "snap.json").string();
    std::string script =
        "next\n"
        "extend abusive [{\"id\":\"abusive\",\"name\":\"Abusive\",\"kind\":\"category\"}]\n"
        "map nowhere\n"
        "map abusive\n"
        "undo\n"
        "exclude out_of_scope not useful here\n"
        "attest concise affirmed tester fine\n"
        "attest concise maybe\n"
        "status\n"
        "bogus\n"
        "quit\n";
    auto r = cli({"session", "--timestamp", "2024-05-01T00:00:00Z", "--save", snap}, script);
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"Hateful reply\"") != std::string::npos);
    CHECK(r.out.find("error: unknown_node") != std::string::npos);
    CHECK(r.out.find("error: invalid_payload") != std::string::npos);
    CHECK(r.out.find("unknown command") != std::string::npos);
    Session s = snapshot_from_json(parse_json(read_file(snap)));
    REQUIRE(s.log.size() == 3);
    CHECK(std::get<Decision>(s.log[1].body).label == "Neutral reply");
    CHECK(std::get<Decision>(s.log[1].body).timestamp == "2024-05-01T00:00:00Z");
    CHECK(s.unmapped[0].size() == 1);
    CHECK(s.subjective.at("concise").verdict == Attestation::Affirmed);

    auto resumed = cli({"session", "--snapshot", snap, "--save", snap}, "exclude overlapping\n");
    CHECK(resumed.code == kExitOk);
    CHECK(snapshot_from_json(parse_json(read_file(snap))).log.size() == 4);
    auto m = cli({"metrics", "--session", snap, "--format", "json"});
    CHECK(m.code == kExitOk);
    std::filesystem::remove_all(dir);
}

TEST_CASE("bundle-info") {
    auto r = cli({"bundle-info", "--format", "json"});
    CHECK(r.code == kExitOk);
    CHECK(parse_json(r.out)["counts"]["characteristics"] == 100);
}

// One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.
#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracle.hpp"
#include "support.hpp"
#include "taxoforge/bundle.hpp"
#include "taxoforge/cli.hpp"
#include "taxoforge/devloop.hpp"
#include "taxoforge/harmonizer.hpp"
#include "taxoforge/metrics.hpp"
#include "taxoforge/service.hpp"

using namespace taxoforge;

namespace {

struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
};

int failed = 0;

void criterion(int n, const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && s >= budget_s) c.failures.push_back("took " + std::to_string(s) + " s");
    bool ok = c.failures.empty();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " [" << n << "] " << name << " (" << static_cast<long>(s * 1000) << " ms)";
    for (std::size_t i = 0; i < c.failures.size() && i < 5; ++i) std::cout << (i ? "; " : ": ") << c.failures[i];
    if (c.failures.size() > 5) std::cout << "; +" << c.failures.size() - 5 << " more";
    std::cout << std::endl;
}

const MappingSet& mapping_of(const Crosswalk& x, const std::string& id) {
    for (const auto& m : x.mapping_sets)
        if (m.dataset_id == id) return m;
    throw Error(errc::not_found, id);
}

const DatasetDescriptor& descriptor_of(const Crosswalk& x, const std::string& id) {
    for (const auto& d : x.descriptors)
        if (d.dataset_id == id) return d;
    throw Error(errc::not_found, id);
}

// Iteration that introduced each class in the original development, by name.
const std::vector<std::pair<std::string, int>> kIterationRow = {
    {"Original post", 4},
    {"Reaction", 1},
    {"To abusive", 5},
    {"To non-abusive", 5},
    {"To counter hate", 1},
    {"Abusive", 1},
    {"Individual", 2},
    {"To the author", 8},
    {"About a person", 8},
    {"Group", 2},
    {"Threat of physical violence", 4},
    {"Threatening", 6},
    {"Glorification", 8},
    {"Verbal abuse", 4},
    {"Dehumanization", 6},
    {"Animosity", 6},
    {"Derogation", 6},
    {"Explicit", 7},
    {"Implicit", 7},
    {"Religion", 2},
    {"Race", 2},
    {"National origin", 2},
    {"Immigration status", 2},
    {"Gender", 2},
    {"Sexuality", 2},
    {"Age", 2},
    {"Disability", 2},
    {"Appearance", 2},
    {"Profession/affiliation", 2},
    {"Political inclination", 2},
    {"Socio-economic", 8},
    {"Non-hateful slur", 6},
    {"Neutral", 1},
    {"Supportive", 5},
};

void bundle_integrity(Check& c) {
    Taxonomy t = load_bundled();
    auto r = validate(t, ValidationMode::Strict);
    c.expect(r.status == ValidationStatus::Valid, "strict validation: " + to_string(r.status));
    c.expect(t.count(NodeKind::Category) == 5, "categories " + std::to_string(t.count(NodeKind::Category)));
    c.expect(t.count(NodeKind::Dimension) == 17, "dimensions " + std::to_string(t.count(NodeKind::Dimension)));
    c.expect(t.count(NodeKind::Characteristic) == 100,
             "characteristics " + std::to_string(t.count(NodeKind::Characteristic)));
}

void bundled_metrics(Check& c) {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto r = report(x, t, MetricsOptions{AssociationScope::ExplicitAndInferred, ClassScope::All, 2});
    const auto& p = r.primary();
    auto dec = [](const Rational& q) { return to_decimal(q, 2); };
    c.expect(dec(p.laconicity) == "1.00", "laconicity " + dec(p.laconicity));
    c.expect(dec(p.lucidity) == "0.85", "lucidity " + dec(p.lucidity));
    c.expect(dec(p.soundness) == "0.96", "soundness " + dec(p.soundness));
    Rational diff = p.completeness - Rational(99, 100);
    c.expect(diff <= Rational(1, 100) && diff >= Rational(-1, 100), "completeness " + to_string(p.completeness));
    bool declared = std::any_of(r.completeness_bases.begin(), r.completeness_bases.end(), [](const CompletenessBasis& b) {
        return b.basis == "declared_labels" && b.covered == 117 && b.total == 119;
    });
    c.expect(declared, "117/119 declared-label basis not reported");
    std::string text = metrics_to_text(r);
    c.expect(text.find("117/119") != std::string::npos, "text report omits 117/119");
}

void oracle_agreement(Check& c) {
    std::mt19937_64 rng(20240501);
    for (int i = 0; i < 1000; ++i) {
        auto rc = support::random_crosswalk(rng, 10, 3, 8);
        for (auto scope : {AssociationScope::ExplicitOnly, AssociationScope::ExplicitAndInferred})
            for (auto cs : {ClassScope::All, ClassScope::CategoriesAndCharacteristics}) {
                auto want = oracle::brute_force(rc.crosswalk, rc.taxonomy, scope, cs);
                std::string tag = "case " + std::to_string(i) + " " + to_string(scope) + "/" + to_string(cs);
                if (want.lucidity.den == 0) {
                    bool threw = false;
                    try {
                        compute_scope(rc.crosswalk, rc.taxonomy, scope, cs);
                    } catch (const Error& e) {
                        threw = e.code() == errc::empty_classes;
                    }
                    c.expect(threw, tag + ": empty class set accepted");
                    continue;
                }
                auto got = compute_scope(rc.crosswalk, rc.taxonomy, scope, cs);
                c.expect(oracle::equals(want.laconicity, got.laconicity), tag + " laconicity");
                c.expect(oracle::equals(want.lucidity, got.lucidity), tag + " lucidity");
                c.expect(oracle::equals(want.completeness, got.completeness), tag + " completeness");
                c.expect(oracle::equals(want.soundness, got.soundness), tag + " soundness");
            }
    }
}

void preprocessing(Check& c) {
    // Majority vote, exhaustively over {0,1,2}^n for n <= 5.
    for (int n = 1; n <= 5; ++n) {
        int total = 1;
        for (int i = 0; i < n; ++i) total *= 3;
        for (int code = 0; code < total; ++code) {
            std::vector<int> votes;
            for (int k = 0, v = code; k < n; ++k, v /= 3) votes.push_back(v % 3);
            int counts[3] = {0, 0, 0};
            for (int v : votes) ++counts[v];
            std::optional<int> want;
            for (int v = 0; v < 3; ++v)
                if (counts[v] > counts[(v + 1) % 3] && counts[v] > counts[(v + 2) % 3]) want = v;
            auto got = majority_vote(votes);
            c.expect(got == want, "majority of code " + std::to_string(code));
            std::vector<int> perm = votes;
            std::sort(perm.begin(), perm.end());
            do {
                c.expect(majority_vote(perm) == got, "majority not permutation invariant");
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    }

    // Binarize: monotone over a grid, midpoint to 0.
    const std::vector<std::pair<Rational, Rational>> ranges = {
        {Rational(0), Rational(1)}, {Rational(-4), Rational(4)}, {Rational(1), Rational(5)}, {Rational(-3, 2), Rational(7, 3)}};
    for (const auto& [lo, hi] : ranges) {
        c.expect(binarize_numeric((lo + hi) / 2, lo, hi) == 0, "midpoint of [" + to_string(lo) + "," + to_string(hi) + "]");
        int prev = 0;
        for (int k = 0; k <= 240; ++k) {
            Rational v = lo + (hi - lo) * Rational(k, 240);
            int b = binarize_numeric(v, lo, hi);
            c.expect(b >= prev, "binarize not monotone at " + to_string(v));
            prev = b;
        }
    }

    // One-hot over every categorical label of the bundle.
    for (const auto& e : std::filesystem::directory_iterator(bundle_dir() / "descriptors")) {
        auto d = parse_descriptor(read_file(e.path()));
        for (const auto& l : d.labels)
            if (auto* cat = std::get_if<CategoricalType>(&l.type))
                for (const auto& v : cat->categories) {
                    auto hot = expand_categorical(v, cat->categories);
                    int sum = 0;
                    for (int h : hot) sum += h;
                    c.expect(sum == 1 && hot.size() == cat->categories.size(), d.dataset_id + "." + l.name + "." + v);
                }
    }

    // Flatten is idempotent on random bit maps.
    std::mt19937_64 rng(5);
    const std::vector<std::string> names{"a", "b", "c", "d", "e"};
    for (int i = 0; i < 2000; ++i) {
        BitMap bits;
        for (const auto& n : names)
            if (rng() % 4) bits[n] = static_cast<Bit>(rng() % 3);
        Flatten f{{}, rng() % 2 ? "u" : "a"};
        for (const auto& n : names)
            if (rng() % 2) f.group.push_back(n);
        BitMap once = flatten(bits, f);
        c.expect(flatten(once, f) == once, "flatten not idempotent on case " + std::to_string(i));
    }
}

void harmonizer(Check& c) {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    std::mt19937_64 rng(99);
    std::size_t nested_pairs = 0;
    for (const auto& m : x.mapping_sets) {
        auto recs = support::random_records(rng, m, 200);
        auto corpus = harmonize(recs, m, t, true);
        for (const auto& u : corpus.records) {
            std::map<std::string, int> per_dim;
            for (const auto& f : u.facets) ++per_dim[f.dimension];
            for (const auto& k : u.conflicts)
                if (k.dimension) ++per_dim[*k.dimension];
            for (const auto& [d, n] : per_dim) c.expect(n <= 1, m.dataset_id + "/" + u.record_id + " dimension " + d);
        }
        std::string text = serialize_corpus(corpus);
        c.expect(serialize_corpus(parse_corpus(text)) == text, m.dataset_id + " corpus round trip");

        // Any two labels whose classes are ancestor and descendant never conflict.
        for (const auto& a : m.associations)
            for (const auto& b : m.associations) {
                if (a.label == b.label || !t.is_ancestor(a.class_id, b.class_id)) continue;
                NormalizedRecord r{"pair", m.dataset_id, {}};
                for (const auto& l : m.labels) r.bits[l] = Bit::Zero;
                r.bits[a.label] = Bit::One;
                r.bits[b.label] = Bit::One;
                // Other classes carried by the same labels may clash on their own.
                std::set<std::string> classes;
                for (const auto& z : m.associations)
                    if (z.label == a.label || z.label == b.label) classes.insert(z.class_id);
                if (classes.size() != 2) continue;
                ++nested_pairs;
                auto u = harmonize_record(r, m, t);
                c.expect(u.conflicts.empty(), m.dataset_id + ": " + a.class_id + " with " + b.class_id + " conflicts");
            }
    }

    c.expect(nested_pairs > 0, "no nested label pairs exercised");

    const auto& gab = mapping_of(x, "gabhc");
    auto recs = apply_pipeline(descriptor_of(x, "gabhc"),
                               parse_raw_records("record_id,HD,CV,VO,REL,RAE,SXO,GEN,IDL,NAT,POL,MPH,EX,IM,Hate\n"
                                                 "r1,0,0,0,0,0,0,0,0,0,0,0,1,1,1\n"))
                    .records;
    auto u = harmonize_record(recs.at(0), gab, t);
    bool directness = std::any_of(u.conflicts.begin(), u.conflicts.end(), [](const Conflict& k) {
        return k.dimension == std::optional<std::string>("directness") &&
               k.nodes == std::vector<std::string>{"directness.explicit", "directness.implicit"};
    });
    c.expect(directness, "explicit and implicit do not conflict on directness");
    c.expect(u.facet("directness") == nullptr, "conflicted directness still has a facet");
}

void devloop_replay(Check& c) {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    Session s = start_session(Taxonomy(t.name(), t.version(), {}), x.descriptors, QueueOrder::ReverseChronological,
                              "reconstruction");
    for (std::size_t i = 1; i < s.queue.size(); ++i)
        c.expect(s.queue[i - 1].year >= s.queue[i].year, "queue not reverse chronological");
    for (const auto& e : load_bundled_log()) {
        s = replay(std::move(s), {e});
        c.expect(!check_ending(s).met, "ending met before attestations at seq " + std::to_string(s.log.size()));
    }
    c.expect(s.done(), "labels left after replay");
    auto by_id = [](std::vector<TaxonNode> v) {
        std::sort(v.begin(), v.end(), [](const TaxonNode& a, const TaxonNode& b) { return a.id < b.id; });
        return v;
    };
    c.expect(by_id(s.taxonomy.nodes()) == by_id(t.nodes()), "replayed taxonomy differs from the bundle");

    std::map<std::string, int> introduced;
    for (const auto& a : s.element_additions) introduced.emplace(a.node_id, a.iteration);
    for (const auto& [name, want] : kIterationRow) {
        std::string id = support::class_by_name(s.taxonomy, name);
        auto it = introduced.find(id);
        int got = it == introduced.end() ? -1 : it->second;
        c.expect(got == want, name + " introduced at " + std::to_string(got) + ", expected " + std::to_string(want));
    }

    for (std::size_t i = 0; i < kSubjectiveConditions.size(); ++i) {
        c.expect(!check_ending(s).met, "met with " + std::to_string(i) + " attestations");
        s = attest(std::move(s), Attest{kSubjectiveConditions[i], Attestation::Affirmed, "acceptance", "", ""});
    }
    c.expect(check_ending(s).met, "not met after all labels and five attestations");

    // Attestations alone do not suffice while labels remain.
    Session partial = start_session(Taxonomy(t.name(), t.version(), {}), x.descriptors, QueueOrder::ReverseChronological);
    auto log = load_bundled_log();
    partial = replay(std::move(partial), std::vector<Json>(log.begin(), log.end() - 1));
    for (const char* cond : kSubjectiveConditions)
        partial = attest(std::move(partial), Attest{cond, Attestation::Affirmed, "acceptance", "", ""});
    c.expect(!check_ending(partial).met, "met with one label unexamined");
}

void orthogonality_flags(Check& c) {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto m = orthogonality(x, t);
    std::set<std::string> scope;
    for (const char* dim : {"context", "target"})
        for (const auto& d : t.descendants(dim)) scope.insert(d);
    std::vector<std::pair<std::string, std::string>> hits;
    for (const auto& [a, b] : m.flagged(t))
        if (scope.count(a) && scope.count(b)) hits.emplace_back(t.node(a).name, t.node(b).name);
    std::set<std::string> names;
    for (const auto& [a, b] : hits) names.insert(a + " / " + b);
    std::string listed;
    for (const auto& n : names) listed += (listed.empty() ? "" : ", ") + n;
    bool ok = hits.size() == 1 && std::set<std::string>{hits[0].first, hits[0].second} ==
                                      std::set<std::string>{"To the author", "Reaction"};
    c.expect(ok, "flagged: " + (listed.empty() ? std::string("none") : listed));
}

void cli_api_consistency(Check& c) {
    Taxonomy t = load_bundled();
    Crosswalk x = load_bundled_crosswalk(t);
    auto log = load_bundled_log();
    Service service(t, x);
    std::mt19937_64 rng(4242);
    auto root = support::temp_dir("acceptance");
    for (int i = 0; i < 50; ++i) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(1, log.size())(rng);
        Session s = start_session(Taxonomy(t.name(), t.version(), {}), x.descriptors, QueueOrder::ReverseChronological,
                                  "snap" + std::to_string(i));
        s = replay(std::move(s), std::vector<Json>(log.begin(), log.begin() + static_cast<std::ptrdiff_t>(n)));
        for (const char* cond : kSubjectiveConditions)
            if (rng() % 2) s = attest(std::move(s), Attest{cond, Attestation::Affirmed, "acceptance", "", ""});

        auto created = service.handle(ApiRequest{"POST", "/sessions", {}, dump(Json{{"snapshot", snapshot_to_json(s)}})});
        if (created.status != 201) {
            c.expect(false, "snapshot " + std::to_string(i) + " rejected: " + created.body);
            continue;
        }
        std::string id = parse_json(created.body)["session_id"];
        std::string scope = rng() % 2 ? "explicit_only" : "explicit_and_inferred";
        std::string class_scope = rng() % 2 ? "all" : "categories_and_characteristics";
        std::string precision = std::to_string(rng() % 7);
        auto api = service.handle(
            ApiRequest{"GET", "/metrics", {{"session", id}, {"scope", scope}, {"class_scope", class_scope}, {"precision", precision}}, ""});

        auto dir = root / ("s" + std::to_string(i));
        export_files(s, dir);
        std::ostringstream out, err;
        std::istringstream in;
        int code = run({"metrics", "--crosswalk", dir.string(), "--scope", scope, "--class-scope", class_scope,
                        "--precision", precision, "--format", "json"},
                       out, err, in);
        std::string tag = "snapshot " + std::to_string(i) + " (" + std::to_string(n) + " entries)";
        c.expect(api.status == 200, tag + ": API status " + std::to_string(api.status));
        c.expect(code == kExitOk, tag + ": CLI exit " + std::to_string(code) + " " + err.str());
        c.expect(api.body == out.str(), tag + ": API and CLI disagree");
    }
    std::filesystem::remove_all(root);
}

}  // namespace

int main() {
    criterion(1, "bundled taxonomy: strict-valid, 5/17/100", 1.0, bundle_integrity);
    criterion(2, "bundled metrics: 1.00 / 0.85 / 0.99 / 0.96 with the 117/119 basis", 1.0, bundled_metrics);
    criterion(3, "metrics equal the brute-force oracle on 1000 random crosswalks", 30.0, oracle_agreement);
    criterion(4, "preprocessing laws: majority vote, binarize, one-hot, flatten", 0, preprocessing);
    criterion(5, "harmonizer: one outcome per dimension, directness conflict, ancestry, round trip", 0, harmonizer);
    criterion(6, "reconstruction replay: iteration row and ending conditions", 0, devloop_replay);
    criterion(7, "orthogonality: only To the author / Reaction flagged among Context and Target", 0, orthogonality_flags);
    criterion(8, "GET /metrics equals the CLI on 50 exported snapshots", 0, cli_api_consistency);
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << 8 - failed << "/8" << std::endl;
    return failed ? 1 : 0;
}

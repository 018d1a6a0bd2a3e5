#include "taxoforge/scheme.hpp"

#include <algorithm>

namespace taxoforge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::string> string_list(const Json& j, std::string_view key, const std::string& what) {
    const Json& arr = require(j, key, what);
    if (!arr.is_array()) throw Error(errc::format, what + ": \"" + std::string(key) + "\" must be an array");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string()) throw Error(errc::format, what + ": \"" + std::string(key) + "\" must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

Rational rational_field(const Json& j, std::string_view key, const std::string& what) {
    const Json& v = require(j, key, what);
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (v.is_number()) return parse_rational(v.dump());
    throw Error(errc::format, what + ": \"" + std::string(key) + "\" must be a number");
}

LabelDef label_from_json(const Json& j) {
    LabelDef l;
    l.name = require_string(j, "name", "label");
    const std::string what = "label " + l.name;
    std::string type = require_string(j, "type", what);
    if (type == "binary") {
        l.type = BinaryType{};
    } else if (type == "categorical") {
        l.type = CategoricalType{string_list(j, "categories", what)};
    } else if (type == "numeric") {
        l.type = NumericType{rational_field(j, "lo", what), rational_field(j, "hi", what)};
    } else {
        throw Error(errc::format, what + ": unknown type \"" + type + "\"", l.name);
    }
    if (auto it = j.find("per_annotator"); it != j.end()) {
        if (!it->is_boolean()) throw Error(errc::format, what + ": per_annotator must be boolean", l.name);
        l.per_annotator = it->get<bool>();
    }
    if (j.contains("aliases")) l.aliases = string_list(j, "aliases", what);
    return l;
}

Json label_to_json(const LabelDef& l) {
    Json j;
    j["name"] = l.name;
    std::visit(overloaded{[&](const BinaryType&) { j["type"] = "binary"; },
                          [&](const CategoricalType& c) {
                              j["type"] = "categorical";
                              j["categories"] = c.categories;
                          },
                          [&](const NumericType& n) {
                              j["type"] = "numeric";
                              j["lo"] = to_string(n.lo);
                              j["hi"] = to_string(n.hi);
                          }},
               l.type);
    if (l.per_annotator) j["per_annotator"] = true;
    if (!l.aliases.empty()) j["aliases"] = l.aliases;
    return j;
}

Directive directive_from_json(const Json& j) {
    std::string op = require_string(j, "op", "directive");
    const std::string what = "directive " + op;
    if (op == "merge_aliases") return MergeAliases{require_string(j, "canonical", what), string_list(j, "variants", what)};
    if (op == "majority_vote") return MajorityVote{require_string(j, "label", what)};
    if (op == "decompose") return Decompose{require_string(j, "compound", what), string_list(j, "parts", what)};
    if (op == "flatten") return Flatten{string_list(j, "group", what), require_string(j, "unified", what)};
    if (op == "binarize") return Binarize{require_string(j, "label", what)};
    if (op == "inject_common") {
        const Json& v = require(j, "value", what);
        if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
            throw Error(errc::format, what + ": value must be 0 or 1");
        return InjectCommon{require_string(j, "label", what), v.get<int>()};
    }
    throw Error(errc::format, "unknown directive op \"" + op + "\"");
}

Json directive_to_json(const Directive& d) {
    Json j;
    std::visit(overloaded{[&](const MergeAliases& x) {
                              j["op"] = "merge_aliases";
                              j["canonical"] = x.canonical;
                              j["variants"] = x.variants;
                          },
                          [&](const MajorityVote& x) {
                              j["op"] = "majority_vote";
                              j["label"] = x.label;
                          },
                          [&](const Decompose& x) {
                              j["op"] = "decompose";
                              j["compound"] = x.compound;
                              j["parts"] = x.parts;
                          },
                          [&](const Flatten& x) {
                              j["op"] = "flatten";
                              j["group"] = x.group;
                              j["unified"] = x.unified;
                          },
                          [&](const Binarize& x) {
                              j["op"] = "binarize";
                              j["label"] = x.label;
                          },
                          [&](const InjectCommon& x) {
                              j["op"] = "inject_common";
                              j["label"] = x.label;
                              j["value"] = x.value;
                          }},
               d);
    return j;
}

// Splits "<label>.<category>" at the first dot.
std::optional<std::pair<std::string, std::string>> split_qualified(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos) return std::nullopt;
    return std::make_pair(s.substr(0, dot), s.substr(dot + 1));
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

Bit parse_bit(const std::string& raw, const std::string& label) {
    std::string v = trim(raw);
    if (v == "1" || v == "true" || v == "True" || v == "TRUE") return Bit::One;
    if (v == "0" || v == "false" || v == "False" || v == "FALSE") return Bit::Zero;
    throw Error(errc::bad_value, "label " + label + ": \"" + raw + "\" is not a binary value", label);
}

Bit bit_or(Bit a, Bit b) {
    if (a == Bit::One || b == Bit::One) return Bit::One;
    if (a == Bit::Unresolved || b == Bit::Unresolved) return Bit::Unresolved;
    return Bit::Zero;
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

std::string describe(const Directive& d) {
    return std::visit(
        overloaded{[](const MergeAliases& x) { return "merge_aliases(" + x.canonical + ")"; },
                   [](const MajorityVote& x) { return "majority_vote(" + x.label + ")"; },
                   [](const Decompose& x) { return "decompose(" + x.compound + ")"; },
                   [](const Flatten& x) { return "flatten(" + x.unified + ")"; },
                   [](const Binarize& x) { return "binarize(" + x.label + ")"; },
                   [](const InjectCommon& x) { return "inject_common(" + x.label + "=" + std::to_string(x.value) + ")"; }},
        d);
}

DatasetDescriptor descriptor_from_json(const Json& j) {
    DatasetDescriptor d;
    d.dataset_id = require_string(j, "dataset_id", "descriptor");
    const std::string what = "descriptor " + d.dataset_id;
    d.name = require_string(j, "name", what);
    const Json& y = require(j, "year", what);
    if (!y.is_number_integer()) throw Error(errc::format, what + ": year must be an integer");
    d.year = y.get<int>();
    d.source = optional_string(j, "source", what);
    if (auto c = optional_string(j, "default_context", what); !c.empty()) d.default_context = c;
    const Json& labels = require(j, "labels", what);
    if (!labels.is_array()) throw Error(errc::format, what + ": labels must be an array");
    for (const auto& l : labels) d.labels.push_back(label_from_json(l));
    if (auto it = j.find("directives"); it != j.end()) {
        if (!it->is_array()) throw Error(errc::format, what + ": directives must be an array");
        for (const auto& x : *it) d.directives.push_back(directive_from_json(x));
    }
    if (auto it = j.find("excluded_labels"); it != j.end()) {
        if (!it->is_array()) throw Error(errc::format, what + ": excluded_labels must be an array");
        for (const auto& x : *it)
            d.excluded_labels.push_back({require_string(x, "name", what), optional_string(x, "reason", what)});
    }
    d.notes = optional_string(j, "notes", what);
    // Compiling checks every directive against the declared labels.
    Pipeline{d};
    return d;
}

DatasetDescriptor parse_descriptor(std::string_view text) { return descriptor_from_json(parse_json(text, "descriptor")); }

Json descriptor_to_json(const DatasetDescriptor& d) {
    Json j;
    j["dataset_id"] = d.dataset_id;
    j["name"] = d.name;
    j["year"] = d.year;
    j["source"] = d.source;
    j["default_context"] = d.default_context ? Json(*d.default_context) : Json(nullptr);
    j["labels"] = Json::array();
    for (const auto& l : d.labels) j["labels"].push_back(label_to_json(l));
    j["directives"] = Json::array();
    for (const auto& x : d.directives) j["directives"].push_back(directive_to_json(x));
    j["excluded_labels"] = Json::array();
    for (const auto& e : d.excluded_labels) j["excluded_labels"].push_back(Json{{"name", e.name}, {"reason", e.reason}});
    if (!d.notes.empty()) j["notes"] = d.notes;
    return j;
}

int binarize_numeric(const Rational& value, const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) throw Error(errc::bad_value, "numeric range requires lo < hi");
    if (value < lo || value > hi)
        throw Error(errc::out_of_range,
                    "value " + to_string(value) + " outside [" + to_string(lo) + ", " + to_string(hi) + "]");
    return value > (lo + hi) / 2 ? 1 : 0;
}

std::vector<int> expand_categorical(std::string_view value, const std::vector<std::string>& categories) {
    std::vector<int> out(categories.size(), 0);
    auto it = std::find(categories.begin(), categories.end(), value);
    if (it == categories.end()) throw Error(errc::unknown_category, "unknown category \"" + std::string(value) + "\"");
    out[static_cast<std::size_t>(it - categories.begin())] = 1;
    return out;
}

BitMap flatten(BitMap bits, const Flatten& f) {
    bool any = false;
    Bit merged = Bit::Zero;
    for (const auto& g : f.group) {
        auto it = bits.find(g);
        if (it == bits.end()) continue;
        any = true;
        merged = bit_or(merged, it->second);
        bits.erase(it);
    }
    if (any) {
        auto [it, fresh] = bits.emplace(f.unified, merged);
        if (!fresh) it->second = bit_or(it->second, merged);
    }
    return bits;
}

Pipeline::Pipeline(DatasetDescriptor d) : d_(std::move(d)) {
    const std::string what = "descriptor " + d_.dataset_id;
    auto fail = [&](const std::string& msg, const std::string& ref = {}) {
        throw Error(errc::directive, what + ": " + msg, ref);
    };

    std::map<std::string, const LabelDef*> declared;
    std::set<std::string> column_names;
    for (const auto& l : d_.labels) {
        if (l.name.empty() || l.name.find('.') != std::string::npos || l.name.front() == '@')
            throw Error(errc::format, what + ": invalid label name \"" + l.name + "\"", l.name);
        if (!declared.emplace(l.name, &l).second)
            throw Error(errc::duplicate_label, what + ": duplicate label " + l.name, l.name);
        if (auto* c = std::get_if<CategoricalType>(&l.type)) {
            if (c->categories.size() < 2) fail("categorical label " + l.name + " needs at least 2 categories", l.name);
            std::set<std::string> seen(c->categories.begin(), c->categories.end());
            if (seen.size() != c->categories.size()) fail("categorical label " + l.name + " repeats a category", l.name);
        }
        if (auto* n = std::get_if<NumericType>(&l.type); n && !(n->lo < n->hi))
            fail("numeric label " + l.name + " needs lo < hi", l.name);
        std::vector<std::string> cols{l.name};
        cols.insert(cols.end(), l.aliases.begin(), l.aliases.end());
        for (const auto& c : cols)
            if (!column_names.insert(c).second)
                throw Error(errc::duplicate_label, what + ": column name " + c + " used twice", c);
        columns_[l.name] = cols;
        if (std::holds_alternative<CategoricalType>(l.type)) aliases_[l.name];
    }
    if (column_names.count("record_id")) fail("\"record_id\" is reserved");

    auto categorical = [&](const std::string& qualified, const char* op) {
        auto q = split_qualified(qualified);
        if (!q || !declared.count(q->first))
            fail(std::string(op) + " references undeclared label " + qualified, qualified);
        const LabelDef* l = declared.at(q->first);
        if (!std::holds_alternative<CategoricalType>(l->type))
            fail(std::string(op) + ": " + q->first + " is not categorical", qualified);
        return *q;
    };
    auto binary = [&](const std::string& name, const char* op) {
        auto it = declared.find(name);
        if (it == declared.end()) fail(std::string(op) + " references undeclared label " + name, name);
        if (!std::holds_alternative<BinaryType>(it->second->type))
            fail(std::string(op) + ": " + name + " is not binary", name);
    };

    // Categories per label as they evolve through decompose and flatten;
    // binary names likewise.
    std::map<std::string, std::vector<std::string>> cats;
    for (const auto& l : d_.labels)
        if (auto* c = std::get_if<CategoricalType>(&l.type)) cats[l.name] = c->categories;
    std::set<std::string> binary_names;
    for (const auto& l : d_.labels)
        if (std::holds_alternative<BinaryType>(l.type)) binary_names.insert(l.name);

    for (std::size_t i = 0; i < d_.directives.size(); ++i) {
        std::visit(
            overloaded{
                [&](const MergeAliases& x) {
                    auto [label, cat] = categorical(x.canonical, "merge_aliases");
                    const auto& cs = std::get<CategoricalType>(declared.at(label)->type).categories;
                    if (std::find(cs.begin(), cs.end(), cat) == cs.end())
                        fail("merge_aliases: " + cat + " is not a category of " + label, x.canonical);
                    if (x.variants.empty()) fail("merge_aliases: no variants for " + x.canonical, x.canonical);
                    for (const auto& v : x.variants) {
                        if (std::find(cs.begin(), cs.end(), v) != cs.end())
                            fail("merge_aliases: variant " + v + " is itself a category of " + label, x.canonical);
                        if (!aliases_[label].emplace(v, Routed{cat, i}).second)
                            fail("merge_aliases: variant " + v + " listed twice for " + label, x.canonical);
                    }
                },
                [&](const MajorityVote& x) {
                    auto it = declared.find(x.label);
                    if (it == declared.end()) fail("majority_vote references undeclared label " + x.label, x.label);
                    if (!it->second->per_annotator) fail("majority_vote on non-per-annotator label " + x.label, x.label);
                    if (!votes_.emplace(x.label, i).second) fail("majority_vote repeated for " + x.label, x.label);
                },
                [&](const Decompose& x) {
                    if (x.parts.empty()) fail("decompose: no parts for " + x.compound, x.compound);
                    if (decompose_.count(x.compound)) fail("decompose repeated for " + x.compound, x.compound);
                    if (declared.count(x.compound)) {
                        binary(x.compound, "decompose");
                        if (!binary_names.erase(x.compound)) fail("decompose: " + x.compound + " already consumed");
                        for (const auto& p : x.parts) {
                            if (p.empty() || p.find('.') != std::string::npos || p.front() == '@')
                                fail("decompose: invalid part name \"" + p + "\"", x.compound);
                            binary_names.insert(p);
                        }
                    } else {
                        auto [label, cat] = categorical(x.compound, "decompose");
                        auto& cs = cats[label];
                        auto pos = std::find(cs.begin(), cs.end(), cat);
                        if (pos == cs.end()) fail("decompose: " + cat + " is not a category of " + label, x.compound);
                        cs.erase(pos);
                        for (const auto& p : x.parts) {
                            if (p.empty()) fail("decompose: empty part", x.compound);
                            push_unique(cs, p);
                        }
                    }
                    decompose_[x.compound] = {x.parts, i};
                },
                [&](const Flatten& x) {
                    if (x.group.size() < 2) fail("flatten needs at least 2 group members", x.unified);
                    bool qualified = split_qualified(x.group.front()).has_value();
                    if (qualified) {
                        std::string label;
                        for (const auto& g : x.group) {
                            auto [l, c] = categorical(g, "flatten");
                            if (!label.empty() && l != label) fail("flatten group spans several labels", g);
                            label = l;
                            auto& cs = cats[l];
                            auto pos = std::find(cs.begin(), cs.end(), c);
                            if (pos == cs.end()) fail("flatten: " + c + " is not a category of " + l, g);
                            cs.erase(pos);
                            flatten_[g] = Routed{x.unified, i};
                        }
                        if (x.unified.empty()) fail("flatten: empty unified name");
                        push_unique(cats[label], x.unified);
                    } else {
                        for (const auto& g : x.group) {
                            if (!binary_names.erase(g)) fail("flatten references unknown binary label " + g, g);
                            flatten_[g] = Routed{x.unified, i};
                        }
                        if (x.unified.empty() || x.unified.find('.') != std::string::npos || x.unified.front() == '@')
                            fail("flatten: invalid unified name \"" + x.unified + "\"");
                        binary_names.insert(x.unified);
                    }
                },
                [&](const Binarize& x) {
                    auto it = declared.find(x.label);
                    if (it == declared.end()) fail("binarize references undeclared label " + x.label, x.label);
                    if (!std::holds_alternative<NumericType>(it->second->type))
                        fail("binarize on non-numeric label " + x.label, x.label);
                    if (!binarize_.emplace(x.label, i).second) fail("binarize repeated for " + x.label, x.label);
                },
                [&](const InjectCommon& x) {
                    if (x.label.empty() || x.label.find('.') != std::string::npos || x.label.front() == '@')
                        fail("inject_common: invalid label name \"" + x.label + "\"", x.label);
                    injects_.emplace_back(x, i);
                }},
            d_.directives[i]);
    }

    for (const auto& l : d_.labels) {
        if (l.per_annotator && !votes_.count(l.name)) fail("per-annotator label " + l.name + " needs majority_vote", l.name);
        if (std::holds_alternative<NumericType>(l.type) && !binarize_.count(l.name))
            fail("numeric label " + l.name + " needs binarize", l.name);
    }

    // Final label order with the declared label each name came from.
    std::vector<std::pair<std::string, std::string>> named;
    auto add = [&](const std::string& n, const std::string& src) {
        for (const auto& [m, _] : named)
            if (m == n) return;
        named.emplace_back(n, src);
    };
    for (const auto& l : d_.labels) {
        if (auto* c = std::get_if<CategoricalType>(&l.type)) {
            std::vector<std::string> fin;
            for (const auto& cat : c->categories) {
                auto dec = decompose_.find(l.name + "." + cat);
                std::vector<std::string> parts = dec == decompose_.end() ? std::vector<std::string>{cat} : dec->second.first;
                for (const auto& p : parts) {
                    auto fl = flatten_.find(l.name + "." + p);
                    push_unique(fin, fl == flatten_.end() ? p : fl->second.target);
                }
            }
            for (const auto& cat : fin) add(l.name + "." + cat, l.name);
            final_categories_[l.name] = std::move(fin);
        } else if (std::holds_alternative<BinaryType>(l.type)) {
            auto dec = decompose_.find(l.name);
            std::vector<std::string> parts = dec == decompose_.end() ? std::vector<std::string>{l.name} : dec->second.first;
            for (const auto& p : parts) {
                auto fl = flatten_.find(p);
                add(fl == flatten_.end() ? p : fl->second.target, l.name);
            }
        } else {
            add(l.name, l.name);
        }
    }
    for (const auto& [inj, _] : injects_) {
        for (const auto& [m, __] : named)
            if (m == inj.label) fail("inject_common: label " + inj.label + " already exists", inj.label);
        add(inj.label, inj.label);
        if (inj.value == 1) common_.insert(inj.label);
    }
    if (d_.default_context) {
        add(std::string(kContextLabel), std::string(kContextLabel));
        common_.insert(std::string(kContextLabel));
    }

    for (const auto& e : d_.excluded_labels) {
        bool hit = false;
        for (const auto& [n, src] : named) {
            if (n == e.name || src == e.name) {
                excluded_.insert(n);
                hit = true;
            }
        }
        if (!hit) throw Error(errc::unknown_label, what + ": excluded label " + e.name + " does not exist", e.name);
    }
    for (const auto& [n, _] : named)
        if (!excluded_.count(n)) labels_.push_back(n);
    for (const auto& n : excluded_) common_.erase(n);
}

PipelineReport Pipeline::empty_report() const {
    PipelineReport r;
    r.dataset_id = d_.dataset_id;
    r.declared_labels = d_.labels.size();
    r.final_labels = labels_.size();
    for (const auto& x : d_.directives) r.directives.push_back({describe(x), 0});
    r.excluded.assign(excluded_.begin(), excluded_.end());
    return r;
}

NormalizedRecord Pipeline::apply(const RawRecord& raw, PipelineReport& report) const {
    NormalizedRecord out;
    out.record_id = raw.record_id;
    out.dataset_id = d_.dataset_id;
    std::vector<char> touched(d_.directives.size(), 0);
    auto mark = [&](std::size_t i) {
        if (i != kNone) touched[i] = 1;
    };
    auto set_or = [&](const std::string& name, Bit b) {
        auto [it, fresh] = out.bits.emplace(name, b);
        if (!fresh) it->second = bit_or(it->second, b);
    };

    for (const auto& l : d_.labels) {
        const std::vector<std::string>* values = nullptr;
        for (const auto& col : columns_.at(l.name)) {
            auto it = raw.cells.find(col);
            if (it != raw.cells.end()) {
                values = &it->second;
                break;
            }
        }
        if (!values)
            throw Error(errc::missing_column, "record " + raw.record_id + ": missing column " + l.name, l.name);
        std::vector<std::string> vals;
        if (l.per_annotator && values->size() == 1 && values->front().find('|') != std::string::npos) {
            std::string_view s = values->front();
            std::size_t start = 0;
            while (true) {
                auto bar = s.find('|', start);
                vals.push_back(trim(s.substr(start, bar - start)));
                if (bar == std::string_view::npos) break;
                start = bar + 1;
            }
        } else {
            for (const auto& v : *values) vals.push_back(trim(v));
        }
        if (vals.empty()) throw Error(errc::bad_value, "record " + raw.record_id + ": no value for " + l.name, l.name);
        if (!l.per_annotator && vals.size() != 1)
            throw Error(errc::bad_value, "record " + raw.record_id + ": several values for " + l.name, l.name);

        if (std::holds_alternative<BinaryType>(l.type)) {
            std::vector<Bit> bits;
            for (const auto& v : vals) bits.push_back(parse_bit(v, l.name));
            Bit b = bits.front();
            if (l.per_annotator) {
                mark(votes_.at(l.name));
                auto m = majority_vote(bits);
                if (!m) ++report.unresolved_ties;
                b = m.value_or(Bit::Unresolved);
            }
            std::vector<std::string> parts{l.name};
            if (auto dec = decompose_.find(l.name); dec != decompose_.end()) {
                parts = dec->second.first;
                if (b == Bit::One) mark(dec->second.second);
            }
            for (const auto& p : parts) {
                auto fl = flatten_.find(p);
                if (fl != flatten_.end() && b == Bit::One) mark(fl->second.directive);
                set_or(fl == flatten_.end() ? p : fl->second.target, b);
            }
        } else if (auto* ct = std::get_if<CategoricalType>(&l.type)) {
            const auto& alias = aliases_.at(l.name);
            std::vector<std::string> cats;
            for (auto v : vals) {
                if (auto a = alias.find(v); a != alias.end()) {
                    mark(a->second.directive);
                    v = a->second.target;
                }
                if (std::find(ct->categories.begin(), ct->categories.end(), v) == ct->categories.end())
                    throw Error(errc::unknown_category,
                                "record " + raw.record_id + ": unknown category \"" + v + "\" for " + l.name, l.name);
                cats.push_back(v);
            }
            std::optional<std::string> cat = cats.front();
            if (l.per_annotator) {
                mark(votes_.at(l.name));
                cat = majority_vote(cats);
                if (!cat) ++report.unresolved_ties;
            }
            std::set<std::string> present;
            if (cat) {
                std::vector<std::string> parts{*cat};
                if (auto dec = decompose_.find(l.name + "." + *cat); dec != decompose_.end()) {
                    parts = dec->second.first;
                    mark(dec->second.second);
                }
                for (const auto& p : parts) {
                    auto fl = flatten_.find(l.name + "." + p);
                    if (fl != flatten_.end()) mark(fl->second.directive);
                    present.insert(fl == flatten_.end() ? p : fl->second.target);
                }
            }
            for (const auto& c : final_categories_.at(l.name))
                set_or(l.name + "." + c, !cat ? Bit::Unresolved : present.count(c) ? Bit::One : Bit::Zero);
        } else {
            const auto& nt = std::get<NumericType>(l.type);
            std::vector<Rational> nums;
            for (const auto& v : vals) {
                Rational r;
                try {
                    r = parse_rational(v);
                } catch (const Error&) {
                    throw Error(errc::bad_value, "record " + raw.record_id + ": \"" + v + "\" is not a number for " + l.name,
                                l.name);
                }
                if (r < nt.lo || r > nt.hi)
                    throw Error(errc::out_of_range,
                                "record " + raw.record_id + ": " + v + " outside the range of " + l.name, l.name);
                nums.push_back(r);
            }
            std::optional<Rational> num = nums.front();
            if (l.per_annotator) {
                mark(votes_.at(l.name));
                num = majority_vote(nums);
                if (!num) ++report.unresolved_ties;
            }
            mark(binarize_.at(l.name));
            set_or(l.name, num ? (binarize_numeric(*num, nt.lo, nt.hi) ? Bit::One : Bit::Zero) : Bit::Unresolved);
        }
    }
    for (const auto& [inj, i] : injects_) {
        mark(i);
        out.bits[inj.label] = inj.value ? Bit::One : Bit::Zero;
    }
    if (d_.default_context) out.bits[std::string(kContextLabel)] = Bit::One;
    for (const auto& e : excluded_) out.bits.erase(e);

    ++report.records;
    for (std::size_t i = 0; i < touched.size(); ++i)
        if (touched[i]) ++report.directives[i].applied;
    return out;
}

PipelineResult apply_pipeline(const DatasetDescriptor& d, const std::vector<RawRecord>& records) {
    Pipeline p(d);
    PipelineResult res;
    res.labels = p.labels();
    res.report = p.empty_report();
    res.records.reserve(records.size());
    for (const auto& r : records) res.records.push_back(p.apply(r, res.report));
    return res;
}

std::vector<std::string> label_set(const DatasetDescriptor& d) { return Pipeline(d).labels(); }

Json pipeline_report_to_json(const PipelineReport& r) {
    Json j;
    j["dataset_id"] = r.dataset_id;
    j["records"] = r.records;
    j["declared_labels"] = r.declared_labels;
    j["final_labels"] = r.final_labels;
    j["unresolved_ties"] = r.unresolved_ties;
    j["directives"] = Json::array();
    for (const auto& d : r.directives) j["directives"].push_back(Json{{"directive", d.directive}, {"applied", d.applied}});
    j["excluded"] = r.excluded;
    return j;
}

}  // namespace taxoforge

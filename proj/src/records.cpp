#include <algorithm>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "taxoforge/scheme.hpp"

namespace taxoforge {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(std::move(line));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

std::vector<std::string> split_row(const std::string& line, char sep, std::size_t lineno) {
    using Sep = boost::escaped_list_separator<char>;
    // Backslash is not an escape in ordinary CSV.
    Sep sp(std::string(), std::string(1, sep), std::string("\""));
    try {
        boost::tokenizer<Sep> tok(line, sp);
        return {tok.begin(), tok.end()};
    } catch (const boost::escaped_list_error& e) {
        throw Error(errc::syntax, "line " + std::to_string(lineno) + ": " + e.what());
    }
}

std::string scalar_text(const Json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number()) return v.dump();
    throw Error(errc::bad_value, where + ": unsupported value " + v.dump());
}

std::vector<RawRecord> parse_jsonl(std::string_view text) {
    std::vector<RawRecord> out;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const std::string where = "line " + std::to_string(i + 1);
        Json j = parse_json(lines[i], where);
        if (!j.is_object()) throw Error(errc::format, where + ": expected an object");
        RawRecord r;
        r.record_id = std::to_string(out.size() + 1);
        for (const auto& [k, v] : j.items()) {
            if (k == "record_id") {
                r.record_id = scalar_text(v, where);
                continue;
            }
            auto& cell = r.cells[k];
            if (v.is_array()) {
                for (const auto& x : v) cell.push_back(scalar_text(x, where + " column " + k));
            } else if (!v.is_null()) {
                cell.push_back(scalar_text(v, where + " column " + k));
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RawRecord> parse_delimited(std::string_view text) {
    auto lines = split_lines(text);
    std::size_t h = 0;
    while (h < lines.size() && blank(lines[h])) ++h;
    if (h == lines.size()) return {};
    char sep = lines[h].find('\t') != std::string::npos ? '\t' : ',';
    auto header = split_row(lines[h], sep, h + 1);
    for (auto& c : header) {
        c.erase(0, c.find_first_not_of(" \t"));
        c.erase(c.find_last_not_of(" \t") + 1);
    }
    std::vector<RawRecord> out;
    for (std::size_t i = h + 1; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        auto row = split_row(lines[i], sep, i + 1);
        if (row.size() != header.size())
            throw Error(errc::format, "line " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) +
                                          " fields, found " + std::to_string(row.size()));
        RawRecord r;
        r.record_id = std::to_string(out.size() + 1);
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == "record_id")
                r.record_id = row[c];
            else
                r.cells[header[c]] = {row[c]};
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

void near_pairs(const std::string& scope, const std::vector<std::string>& names, std::vector<AliasSuggestion>& out) {
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            if (names[i].size() < 4 || names[j].size() < 4) continue;
            auto d = edit_distance(lower(names[i]), lower(names[j]));
            if (d <= 2) out.push_back({scope, names[i], names[j], d});
        }
}

}  // namespace

std::vector<RawRecord> parse_raw_records(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') return parse_jsonl(text);
    return parse_delimited(text);
}

Json record_to_json(const NormalizedRecord& r) {
    Json j;
    j["record_id"] = r.record_id;
    j["dataset_id"] = r.dataset_id;
    Json bits = Json::object();
    for (const auto& [k, b] : r.bits) bits[k] = b == Bit::Unresolved ? Json(nullptr) : Json(b == Bit::One ? 1 : 0);
    j["labels"] = std::move(bits);
    return j;
}

NormalizedRecord record_from_json(const Json& j) {
    NormalizedRecord r;
    r.record_id = require_string(j, "record_id", "record");
    r.dataset_id = require_string(j, "dataset_id", "record " + r.record_id);
    const Json& bits = require(j, "labels", "record " + r.record_id);
    if (!bits.is_object()) throw Error(errc::format, "record " + r.record_id + ": labels must be an object");
    for (const auto& [k, v] : bits.items()) {
        if (v.is_null())
            r.bits[k] = Bit::Unresolved;
        else if (v == 0)
            r.bits[k] = Bit::Zero;
        else if (v == 1)
            r.bits[k] = Bit::One;
        else
            throw Error(errc::bad_value, "record " + r.record_id + ": label " + k + " must be 0, 1 or null", k);
    }
    return r;
}

std::string serialize_records(const std::vector<NormalizedRecord>& rs) {
    std::string out;
    for (const auto& r : rs) out += dump_line(record_to_json(r)) + "\n";
    return out;
}

std::vector<NormalizedRecord> parse_normalized_records(std::string_view jsonl) {
    std::vector<NormalizedRecord> out;
    auto lines = split_lines(jsonl);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        out.push_back(record_from_json(parse_json(lines[i], "line " + std::to_string(i + 1))));
    }
    return out;
}

std::vector<AliasSuggestion> suggest_aliases(const DatasetDescriptor& d) {
    std::vector<AliasSuggestion> out;
    std::vector<std::string> names;
    for (const auto& l : d.labels) names.push_back(l.name);
    near_pairs("labels", names, out);
    for (const auto& l : d.labels)
        if (auto* c = std::get_if<CategoricalType>(&l.type)) near_pairs(l.name, c->categories, out);
    return out;
}

}  // namespace taxoforge

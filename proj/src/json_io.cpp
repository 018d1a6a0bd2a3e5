#include "taxoforge/json_io.hpp"

#include <fstream>
#include <sstream>

#include "taxoforge/error.hpp"

namespace taxoforge {

namespace {

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        // e.byte is 1-based and points just past the offending character
        auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        std::ostringstream msg;
        msg << what << ": syntax error at line " << line << ", column " << col;
        throw Error(errc::syntax, msg.str());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string dump_line(const Json& j) { return j.dump(); }

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(errc::io, "cannot read " + p.string(), p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& p, std::string_view content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + p.string(), p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(errc::io, "write failed for " + p.string(), p.string());
}

const Json& require(const Json& obj, std::string_view key, std::string_view what) {
    if (!obj.is_object()) throw Error(errc::format, std::string(what) + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(errc::format, std::string(what) + ": missing field \"" + std::string(key) + "\"");
    return *it;
}

std::string require_string(const Json& obj, std::string_view key, std::string_view what) {
    const Json& v = require(obj, key, what);
    if (!v.is_string())
        throw Error(errc::format, std::string(what) + ": field \"" + std::string(key) + "\" must be a string");
    return v.get<std::string>();
}

std::string optional_string(const Json& obj, std::string_view key, std::string_view what) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string())
        throw Error(errc::format, std::string(what) + ": field \"" + std::string(key) + "\" must be a string");
    return it->get<std::string>();
}

}  // namespace taxoforge

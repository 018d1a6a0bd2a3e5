#include "taxoforge/rational.hpp"

#include <charconv>
#include <cstdlib>

#include "taxoforge/error.hpp"

namespace taxoforge {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view whole) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw Error(errc::bad_value, "not a number: \"" + std::string(whole) + "\"");
    return v;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) throw Error(errc::bad_value, "empty number");

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        std::int64_t den = parse_int(s.substr(slash + 1), text);
        if (den == 0) throw Error(errc::bad_value, "zero denominator: \"" + std::string(text) + "\"");
        return Rational(parse_int(s.substr(0, slash), text), den);
    }
    bool neg = false;
    std::string_view body = s;
    if (body.front() == '-' || body.front() == '+') {
        neg = body.front() == '-';
        body.remove_prefix(1);
    }
    auto dot = body.find('.');
    std::string_view ip = body.substr(0, dot);
    std::string_view fp = dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if (fp.size() > 15) throw Error(errc::bad_value, "too many decimals: \"" + std::string(text) + "\"");
    if (ip.empty() && fp.empty()) throw Error(errc::bad_value, "not a number: \"" + std::string(text) + "\"");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    std::int64_t num = (ip.empty() ? 0 : parse_int(ip, text)) * scale + (fp.empty() ? 0 : parse_int(fp, text));
    return Rational(neg ? -num : num, scale);
}

std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string to_decimal(const Rational& r, int places) {
    std::int64_t scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    bool neg = r < 0;
    std::int64_t n = neg ? -r.numerator() : r.numerator();
    std::int64_t d = r.denominator();
    // round half away from zero: floor((2*n*scale + d) / (2*d))
    std::int64_t scaled = (2 * n * scale + d) / (2 * d);
    std::string digits = std::to_string(scaled / scale);
    if (places > 0) {
        std::string frac = std::to_string(scaled % scale);
        digits += "." + std::string(static_cast<std::size_t>(places) - frac.size(), '0') + frac;
    }
    return (neg && scaled != 0 ? "-" : "") + digits;
}

}  // namespace taxoforge

#pragma once

// Deterministic JSON emission: fixed member order (ordered_json), doubles at
// 17 significant digits so that parse -> emit reproduces the same bytes.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fispca/text.hpp"

namespace fispca::json_io {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string format_float(double v) {
    std::string s = text::format_exact(v);
    if (s.find_first_of(".eEni") == std::string::npos) s += ".0";
    return s;
}

inline void emit(const Json& j, std::string& out, int indent, int depth) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(d * indent), ' ');
    };
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                newline(depth + 1);
                out += Json(it.key()).dump();
                out += indent < 0 ? ":" : ": ";
                emit(it.value(), out, indent, depth + 1);
            }
            newline(depth);
            out += '}';
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Numeric arrays stay on one line.
            bool scalar = true;
            for (const auto& e : j) scalar = scalar && e.is_primitive();
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += scalar ? ", " : ",";
                if (!scalar) newline(depth + 1);
                emit(j[i], out, indent, depth + 1);
            }
            if (!scalar) newline(depth);
            out += ']';
            return;
        }
        case Json::value_t::number_float:
            out += format_float(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

}  // namespace detail

inline std::string dump(const Json& j, int indent = 2) {
    std::string out;
    detail::emit(j, out, indent, 0);
    return out;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fispca::json_io

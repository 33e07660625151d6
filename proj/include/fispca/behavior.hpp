#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "fispca/error.hpp"

namespace fispca {

/// Driving style. Declaration order is the tie-break order.
enum class BehaviorClass : int { drowsy = 0, normal = 1, aggressive = 2 };

inline constexpr std::size_t kClassCount = 3;
inline constexpr std::array<BehaviorClass, kClassCount> kAllClasses = {
    BehaviorClass::drowsy, BehaviorClass::normal, BehaviorClass::aggressive};

constexpr std::size_t index_of(BehaviorClass c) noexcept { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(BehaviorClass c) noexcept {
    switch (c) {
        case BehaviorClass::drowsy: return "drowsy";
        case BehaviorClass::normal: return "normal";
        case BehaviorClass::aggressive: return "aggressive";
    }
    return "?";
}

/// Single-letter tag used in report headers (FISd, D2n, ...).
constexpr char short_tag(BehaviorClass c) noexcept {
    constexpr std::array<char, kClassCount> tags = {'d', 'n', 'a'};
    return tags[index_of(c)];
}

inline std::optional<BehaviorClass> parse_behavior(std::string_view s) {
    std::string lower(s);
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lower == "drowsy" || lower == "d") return BehaviorClass::drowsy;
    if (lower == "normal" || lower == "n") return BehaviorClass::normal;
    if (lower == "aggressive" || lower == "a") return BehaviorClass::aggressive;
    return std::nullopt;
}

/// Feature set: A includes the road speed limit, B drops it.
enum class Variant { A, B };

constexpr std::string_view to_string(Variant v) noexcept { return v == Variant::A ? "A" : "B"; }

inline Variant parse_variant(std::string_view s) {
    if (s == "A" || s == "a") return Variant::A;
    if (s == "B" || s == "b") return Variant::B;
    throw UsageError("unknown variant '" + std::string(s) + "' (expected A or B)");
}

constexpr std::size_t feature_count(Variant v) noexcept { return v == Variant::A ? 8 : 7; }

}  // namespace fispca

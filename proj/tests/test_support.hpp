#pragma once

#include "crs/random.hpp"

#include <string>

namespace crs::test {

inline std::string data_path(const std::string& relative) {
    return std::string(CRS_DEFAULT_DATA_DIR) + "/" + relative;
}

/// Random UTF-8 text over an alphabet that exercises folding: letters in both
/// cases, substitutable symbols, backticks, whitespace and multi-byte code points.
inline std::string random_text(Rng& rng, std::size_t max_chars) {
    static const char* const kPieces[] = {
        "a", "b", "e", "i", "o", "s", "t", "h", "l", "A", "S", "T", "I", " ", " ", "  ", "\n", "$", "@", "0", "1",
        "3", "!", "+", "`", "```", ".", ",", "?", "'", "*", "-", "é", "ü", "\xE2\x80\x94", "🙂", "’", "Ж", "x", "y", "z"};
    constexpr std::size_t kCount = sizeof(kPieces) / sizeof(kPieces[0]);
    std::string out;
    auto n = static_cast<std::size_t>(rng.index(max_chars + 1));
    for (std::size_t i = 0; i < n; ++i) {
        // occasionally repeat a piece to exercise run collapsing
        const char* piece = kPieces[rng.index(kCount)];
        auto reps = rng.index(8) == 0 ? 1 + rng.index(6) : 1;
        for (std::uint64_t r = 0; r < reps; ++r) out += piece;
    }
    return out;
}

}  // namespace crs::test

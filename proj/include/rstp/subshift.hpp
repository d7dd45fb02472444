// Combinatorics of the random subshift of finite type along a realized orbit.
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rstp/environment.hpp"

namespace rstp {

// Symbols are 1-based: 1 <= symbols[k] <= l(state at start_offset + k).
struct Word {
    std::vector<int> symbols;
    std::size_t start_offset = 0;

    std::size_t size() const noexcept { return symbols.size(); }
    bool empty() const noexcept { return symbols.empty(); }
    int back() const { return symbols.back(); }
    // v* : the word with its last symbol dropped
    Word star() const;
    Word prefix(std::size_t n) const;
    Word extended(int symbol) const;

    friend auto operator<=>(const Word&, const Word&) = default;
};

// "1,2,1"
std::string to_string(const Word& word);
Word parse_word(const std::string& text, std::size_t start_offset = 0);

struct MixingCertificate {
    int m = 0;
    std::size_t offset = 0;
};

inline constexpr std::size_t kDefaultCylinderCap = 10'000'000;

bool is_admissible(const OmegaPath& path, const Word& word);

// Visits admissible words of length n at offset in lexicographic order.
void for_each_cylinder(const OmegaPath& path, std::size_t offset, std::size_t n,
                       const std::function<void(const Word&)>& visit);

std::vector<Word> enumerate_cylinders(const OmegaPath& path, std::size_t offset, std::size_t n,
                                      std::size_t cap = kDefaultCylinderCap);

// 1^T A(sigma^offset omega) ... A(sigma^{offset+n-2} omega) 1
std::uint64_t count_cylinders(const OmegaPath& path, std::size_t offset, std::size_t n);

MixingCertificate mixing_index(const OmegaPath& path, std::size_t offset, int max_m);

// Lexicographically smallest connector of gap-1 symbols placed after `last` (at junction)
// and before `first` (at junction + gap).
std::vector<int> bridge_word(const OmegaPath& path, std::size_t junction, int last, int first, std::size_t gap);

// w * w2: w2 must start at w.start_offset + |w| + gap - 1; the result has length |w| + |w2| + gap - 1.
Word join_words(const OmegaPath& path, const Word& w, const Word& w2, std::size_t gap);

} // namespace rstp

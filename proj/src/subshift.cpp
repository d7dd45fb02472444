#include "rstp/subshift.hpp"

#include <limits>
#include <sstream>

#include "rstp/error.hpp"

namespace rstp {

Word Word::star() const
{
    Word w = *this;
    if (!w.symbols.empty()) w.symbols.pop_back();
    return w;
}

Word Word::prefix(std::size_t n) const
{
    Word w;
    w.start_offset = start_offset;
    w.symbols.assign(symbols.begin(), symbols.begin() + static_cast<std::ptrdiff_t>(std::min(n, symbols.size())));
    return w;
}

Word Word::extended(int symbol) const
{
    Word w = *this;
    w.symbols.push_back(symbol);
    return w;
}

std::string to_string(const Word& word)
{
    std::string out;
    for (std::size_t i = 0; i < word.symbols.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(word.symbols[i]);
    }
    return out;
}

Word parse_word(const std::string& text, std::size_t start_offset)
{
    Word w;
    w.start_offset = start_offset;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw Error(ErrorKind::OutOfRange, "not a symbol: '" + item + "'");
        }
        if (used != item.size() || v < 1) throw Error(ErrorKind::OutOfRange, "not a symbol: '" + item + "'");
        w.symbols.push_back(v);
    }
    return w;
}

namespace {

void require_fits(const OmegaPath& path, std::size_t offset, std::size_t n)
{
    if (offset + n > path.horizon())
        throw Error(ErrorKind::OutOfHorizon, "offset " + std::to_string(offset) + " + length " + std::to_string(n) +
                                                 " exceeds horizon " + std::to_string(path.horizon()));
}

void dfs(const OmegaPath& path, std::size_t offset, std::size_t n, Word& current,
         const std::function<void(const Word&)>& visit)
{
    const std::size_t k = current.symbols.size();
    if (k == n) {
        visit(current);
        return;
    }
    const int l = path.alphabet(offset + k);
    for (int s = 1; s <= l; ++s) {
        if (k > 0 && !path.transition(offset + k - 1).at(current.symbols.back() - 1, s - 1)) continue;
        current.symbols.push_back(s);
        dfs(path, offset, n, current, visit);
        current.symbols.pop_back();
    }
}

} // namespace

bool is_admissible(const OmegaPath& path, const Word& word)
{
    require_fits(path, word.start_offset, word.size());
    const std::size_t o = word.start_offset;
    for (std::size_t k = 0; k < word.size(); ++k) {
        const int s = word.symbols[k];
        if (s < 1 || s > path.alphabet(o + k)) return false;
        if (k + 1 < word.size()) {
            const int t = word.symbols[k + 1];
            if (t < 1 || t > path.alphabet(o + k + 1)) return false;
            if (!path.transition(o + k).at(s - 1, t - 1)) return false;
        }
    }
    return true;
}

void for_each_cylinder(const OmegaPath& path, std::size_t offset, std::size_t n,
                       const std::function<void(const Word&)>& visit)
{
    require_fits(path, offset, n);
    Word current;
    current.start_offset = offset;
    current.symbols.reserve(n);
    dfs(path, offset, n, current, visit);
}

std::vector<Word> enumerate_cylinders(const OmegaPath& path, std::size_t offset, std::size_t n, std::size_t cap)
{
    require_fits(path, offset, n);
    const auto count = count_cylinders(path, offset, n);
    if (count > cap)
        throw Error(ErrorKind::ExplosionGuard, std::to_string(count) + " cylinders of length " + std::to_string(n) +
                                                   " exceed the cap " + std::to_string(cap));
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(count));
    for_each_cylinder(path, offset, n, [&](const Word& w) { out.push_back(w); });
    return out;
}

std::uint64_t count_cylinders(const OmegaPath& path, std::size_t offset, std::size_t n)
{
    require_fits(path, offset, n);
    if (n == 0) return 1;
    // row vector of path counts ending in each symbol
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(path.alphabet(offset)), 1);
    for (std::size_t k = 1; k < n; ++k) {
        const auto& a = path.transition(offset + k - 1);
        std::vector<std::uint64_t> next(static_cast<std::size_t>(a.cols()), 0);
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c)
                if (a.at(r, c)) {
                    auto& dst = next[static_cast<std::size_t>(c)];
                    const auto add = ways[static_cast<std::size_t>(r)];
                    if (dst > std::numeric_limits<std::uint64_t>::max() - add)
                        throw Error(ErrorKind::Overflow, "cylinder count overflows 64 bits");
                    dst += add;
                }
        ways = std::move(next);
    }
    std::uint64_t total = 0;
    for (auto w : ways) {
        if (total > std::numeric_limits<std::uint64_t>::max() - w)
            throw Error(ErrorKind::Overflow, "cylinder count overflows 64 bits");
        total += w;
    }
    return total;
}

MixingCertificate mixing_index(const OmegaPath& path, std::size_t offset, int max_m)
{
    if (max_m < 1) throw Error(ErrorKind::NotMixingWithinBound, "max_m must be positive");
    require_fits(path, offset, static_cast<std::size_t>(max_m));
    BinaryMatrix product = path.transition(offset);
    for (int m = 1; m <= max_m; ++m) {
        if (product.positive()) return {m, offset};
        if (m < max_m) product = product * path.transition(offset + static_cast<std::size_t>(m));
    }
    throw Error(ErrorKind::NotMixingWithinBound,
                "no positive product of at most " + std::to_string(max_m) + " matrices at offset " +
                    std::to_string(offset));
}

std::vector<int> bridge_word(const OmegaPath& path, std::size_t junction, int last, int first, std::size_t gap)
{
    if (gap < 1) throw Error(ErrorKind::GapTooSmall, "gap must be at least 1");
    if (junction + gap > path.horizon()) throw Error(ErrorKind::OutOfHorizon, "bridge runs past the horizon");
    // reach[k][s]: symbol s at position junction+k can still reach `first` at junction+gap
    std::vector<std::vector<bool>> reach(gap + 1);
    reach[gap].assign(static_cast<std::size_t>(path.alphabet(junction + gap)), false);
    reach[gap][static_cast<std::size_t>(first - 1)] = true;
    for (std::size_t k = gap; k-- > 0;) {
        const auto& a = path.transition(junction + k);
        reach[k].assign(static_cast<std::size_t>(a.rows()), false);
        for (int r = 0; r < a.rows(); ++r)
            for (int c = 0; c < a.cols(); ++c)
                if (a.at(r, c) && reach[k + 1][static_cast<std::size_t>(c)]) {
                    reach[k][static_cast<std::size_t>(r)] = true;
                    break;
                }
    }
    if (!reach[0][static_cast<std::size_t>(last - 1)])
        throw Error(ErrorKind::NoBridge, "no admissible connector of gap " + std::to_string(gap) + " at offset " +
                                             std::to_string(junction));
    std::vector<int> bridge;
    int prev = last;
    for (std::size_t k = 1; k < gap; ++k) {
        const auto& a = path.transition(junction + k - 1);
        for (int s = 1; s <= a.cols(); ++s)
            if (a.at(prev - 1, s - 1) && reach[k][static_cast<std::size_t>(s - 1)]) {
                bridge.push_back(s);
                prev = s;
                break;
            }
    }
    return bridge;
}

Word join_words(const OmegaPath& path, const Word& w, const Word& w2, std::size_t gap)
{
    if (gap < 1) throw Error(ErrorKind::GapTooSmall, "gap must be at least 1");
    if (w.empty() || w2.empty()) throw Error(ErrorKind::NotAdmissible, "join needs two nonempty words");
    const std::size_t junction = w.start_offset + w.size() - 1;
    if (w2.start_offset != junction + gap)
        throw Error(ErrorKind::NotAdmissible, "second word starts at offset " + std::to_string(w2.start_offset) +
                                                  ", expected " + std::to_string(junction + gap));
    if (!is_admissible(path, w) || !is_admissible(path, w2))
        throw Error(ErrorKind::NotAdmissible, "join operands must be admissible");
    const auto bridge = bridge_word(path, junction, w.back(), w2.symbols.front(), gap);
    Word out = w;
    out.symbols.insert(out.symbols.end(), bridge.begin(), bridge.end());
    out.symbols.insert(out.symbols.end(), w2.symbols.begin(), w2.symbols.end());
    return out;
}

} // namespace rstp

#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "rstp/error.hpp"
#include "rstp/subshift.hpp"

using namespace rstp;

namespace {

Word word(std::vector<int> s, std::size_t offset = 0) { return Word{std::move(s), offset}; }

// brute force over all symbol strings in range
std::size_t brute_count(const OmegaPath& p, std::size_t offset, std::size_t n)
{
    std::size_t count = 0;
    std::vector<int> s(n, 1);
    while (true) {
        if (is_admissible(p, word(s, offset))) ++count;
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (s[k] < p.alphabet(offset + k)) {
                ++s[k];
                break;
            }
            s[k] = 1;
            if (k == 0) return count;
        }
        if (n == 0) return count;
    }
}

} // namespace

TEST_CASE("admissibility")
{
    const auto full = fixtures::path_of(fixtures::full_shift(3), 10);
    CHECK(is_admissible(full, word({1, 3, 2, 2})));
    CHECK_FALSE(is_admissible(full, word({1, 4})));
    CHECK_FALSE(is_admissible(full, word({0})));
    const auto gm = fixtures::path_of(fixtures::golden_mean(), 10);
    CHECK_FALSE(is_admissible(gm, word({2, 2})));
    CHECK(is_admissible(gm, word({2, 1, 2})));
    CHECK_THROWS_AS(is_admissible(gm, word({1, 1}, 9)), Error);
}

TEST_CASE("enumeration and counting")
{
    const auto full2 = fixtures::path_of(fixtures::full_shift(2), 12);
    CHECK(enumerate_cylinders(full2, 0, 3).size() == 8);
    const auto gm = fixtures::path_of(fixtures::golden_mean(), 12);
    CHECK(enumerate_cylinders(gm, 0, 4).size() == 8);
    CHECK(count_cylinders(gm, 0, 4) == 8);
    const auto alt = fixtures::path_of(fixtures::alternating_2_3(), 12);
    CHECK(enumerate_cylinders(alt, 0, 2).size() == 6);
    CHECK(count_cylinders(fixtures::path_of(fixtures::full_shift(3), 6), 0, 5) == 243);
    CHECK(count_cylinders(alt, 1, 1) == 3);

    for (const auto* p : {&full2, &gm, &alt})
        for (std::size_t n = 0; n <= 12; ++n) {
            const auto words = enumerate_cylinders(*p, 0, n);
            CHECK(words.size() == count_cylinders(*p, 0, n));
            if (n <= 8) CHECK(words.size() == brute_count(*p, 0, n));
            CHECK(std::is_sorted(words.begin(), words.end()));
            if (n > 0) {
                const auto shorter = enumerate_cylinders(*p, 0, n - 1);
                const std::set<Word> prefixes(shorter.begin(), shorter.end());
                for (const auto& w : words) CHECK(prefixes.count(w.star()) == 1);
            }
        }
    CHECK_THROWS_AS(enumerate_cylinders(full2, 0, 12, 100), Error);
    CHECK_THROWS_AS(enumerate_cylinders(full2, 5, 8), Error);
}

TEST_CASE("mixing index")
{
    CHECK(mixing_index(fixtures::path_of(fixtures::full_shift(2), 5), 0, 3).m == 1);
    CHECK(mixing_index(fixtures::path_of(fixtures::golden_mean(), 5), 0, 3).m == 2);
    const auto perm = std::make_shared<const EnvironmentModel>(
        EnvironmentModel::constant(2, BinaryMatrix::from_rows({{0, 1}, {1, 0}})));
    try {
        mixing_index(fixtures::path_of(perm, 10), 0, 8);
        FAIL("expected NotMixingWithinBound");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotMixingWithinBound);
    }
    // adding ones to the golden mean gives the full shift, whose index is smaller
    CHECK(mixing_index(fixtures::path_of(fixtures::full_shift(2), 5), 0, 3).m <=
          mixing_index(fixtures::path_of(fixtures::golden_mean(), 5), 0, 3).m);
}

TEST_CASE("joining words")
{
    const auto gm = fixtures::path_of(fixtures::golden_mean(), 20);
    const Word w = word({1, 2});
    const Word w2 = word({2, 1}, 3); // junction at 1, gap 2
    const Word j = join_words(gm, w, w2, 2);
    CHECK(j.symbols == std::vector<int>{1, 2, 1, 2, 1});
    CHECK(j.size() == w.size() + w2.size() + 2 - 1);
    CHECK(is_admissible(gm, j));
    CHECK(join_words(gm, w, w2, 2) == j);

    const auto full = fixtures::path_of(fixtures::full_shift(2), 20);
    const Word c = join_words(full, word({2, 2}), word({1}, 2), 1);
    CHECK(c.symbols == std::vector<int>{2, 2, 1});

    try {
        join_words(gm, word({2}), word({2}, 2), 1);
        FAIL("expected a misplaced second word to be rejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotAdmissible);
    }
    try {
        bridge_word(gm, 0, 2, 2, 1);
        FAIL("expected NoBridge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoBridge);
    }
    CHECK_THROWS_AS(bridge_word(gm, 0, 1, 1, 0), Error);

    // round trip: every join of random admissible pieces is admissible with the right prefix and suffix
    for (const auto& a : enumerate_cylinders(gm, 0, 3))
        for (const auto& b : enumerate_cylinders(gm, 4, 2)) {
            const Word r = join_words(gm, a, b, 2);
            CHECK(is_admissible(gm, r));
            CHECK(r.prefix(3) == a);
            CHECK(std::equal(b.symbols.begin(), b.symbols.end(), r.symbols.end() - 2));
        }
}

TEST_CASE("word text round trip")
{
    const Word w = word({1, 2, 1});
    CHECK(to_string(w) == "1,2,1");
    CHECK(parse_word("1,2,1") == w);
    CHECK_THROWS_AS(parse_word("1,x"), Error);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "jocot/errors.hpp"
#include "jocot/rng.hpp"
#include "jocot/selection.hpp"
#include "support/selection_oracle.hpp"

using namespace jocot;

TEST_CASE("remember rate examples") {
    for (double tau : {0.0, 0.2, 0.45, 0.8}) CHECK(remember_rate(0, 10, tau) == 1.0);
    CHECK(remember_rate(5, 10, 0.5) == 0.75);
    CHECK(remember_rate(300, 10, 0.4) == 0.6);
    CHECK(remember_rate(10, 10, 0.4) == 0.6);
    CHECK(remember_rate(3, 10, 0.0) == 1.0);
}

TEST_CASE("remember rate is monotone and clamps") {
    for (int t = 1; t <= 8; ++t) {
        const double tau = t / 10.0;
        double prev = 1.0;
        for (int e = 0; e <= 20; ++e) {
            const double r = remember_rate(e, 10, tau);
            CHECK(r <= prev);
            CHECK(r >= 1.0 - tau);
            prev = r;
        }
        CHECK(remember_rate(20, 10, tau) == 1.0 - tau);
    }
}

TEST_CASE("remember rate argument checks") {
    CHECK_THROWS_AS(remember_rate(-1, 10, 0.2), ArgumentError);
    CHECK_THROWS_AS(remember_rate(0, 0, 0.2), ArgumentError);
    CHECK_THROWS_AS(remember_rate(0, 10, 1.0), ArgumentError);
    CHECK_THROWS_AS(remember_rate(0, 10, -0.1), ArgumentError);
}

TEST_CASE("kept count") {
    CHECK(kept_count(0.5, 4) == 2);
    CHECK(kept_count(1.0, 7) == 7);
    CHECK(kept_count(0.01, 5) == 1);
    CHECK(kept_count(0.6, 128) == 77);
    CHECK(kept_count(0.7, 10) == 7);
}

TEST_CASE("small-loss selection examples") {
    const std::vector<IndexedLoss> losses{{0, 0.1}, {1, 5.0}, {2, 0.2}, {3, 3.0}};
    CHECK(small_loss_select(losses, 0.5).indices() == std::vector<std::size_t>{0, 2});
    CHECK(small_loss_select(losses, 1.0).indices() == std::vector<std::size_t>{0, 1, 2, 3});
    // Ties resolve to the smaller global index.
    const std::vector<IndexedLoss> ties{{40, 1.0}, {12, 1.0}, {30, 1.0}};
    CHECK(small_loss_select(ties, 0.5).indices() == std::vector<std::size_t>{12, 30});
}

TEST_CASE("small-loss selection argument checks") {
    CHECK_THROWS_AS(small_loss_select(std::vector<IndexedLoss>{}, 0.5), ArgumentError);
    const std::vector<IndexedLoss> one{{0, 1.0}};
    CHECK_THROWS_AS(small_loss_select(one, 0.0), ArgumentError);
    CHECK_THROWS_AS(small_loss_select(one, 1.5), ArgumentError);
    const std::vector<IndexedLoss> nan{{0, std::nan("")}};
    CHECK_THROWS_AS(small_loss_select(nan, 0.5), ArgumentError);
}

TEST_CASE("small-loss selection matches exhaustive subset enumeration") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.index(10));
        std::vector<IndexedLoss> items;
        for (std::size_t i = 0; i < n; ++i) items.push_back({static_cast<std::size_t>(rng.index(1000)) * 16 + i, rng.uniform(0, 4)});
        const double keep = 0.05 + 0.95 * rng.uniform();
        const auto got = small_loss_select(items, keep);
        const auto opt = oracle::exhaustive_min_subsets(items, kept_count(keep, n));
        REQUIRE(opt.minimizers.size() == 1);
        CHECK(got.indices() == opt.minimizers.front());
    }
}

TEST_CASE("set intersection examples") {
    const SelectionSet a({1, 2, 3}), b({2, 3, 4});
    CHECK(inner_consensus(a, b).indices() == std::vector<std::size_t>{2, 3});
    CHECK(inner_consensus(a, a) == a);
    CHECK(inner_consensus(a, SelectionSet({7, 8})).empty());
    CHECK_THROWS_AS(inner_consensus(a, b.with_scope(SelectionScope::epoch)), ArgumentError);
}

TEST_CASE("two-level consensus") {
    const SelectionSet p1({1, 2, 3}), p2({2, 3}), q1({2, 3, 4}), q2({2, 4});
    const auto ip = inner_consensus(p1, p2), iq = inner_consensus(q1, q2);
    CHECK(ip.indices() == std::vector<std::size_t>{2, 3});
    CHECK(iq.indices() == std::vector<std::size_t>{2, 4});
    const auto icon = outer_consensus(ip, iq);
    CHECK(icon.indices() == std::vector<std::size_t>{2});
    for (const auto* s : {&p1, &p2, &q1, &q2}) CHECK(icon.is_subset_of(*s));
    CHECK(outer_consensus(inner_consensus(p1, p1), inner_consensus(p1, p1)) == p1);
}

TEST_CASE("consensus composition equals the four-way intersection") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::vector<std::size_t>> raw(4);
        for (auto& s : raw)
            for (std::size_t i = 0; i < 30; ++i)
                if (rng.uniform() < 0.6) s.push_back(i);
        const auto icon = outer_consensus(inner_consensus(SelectionSet(raw[0]), SelectionSet(raw[1])),
                                          inner_consensus(SelectionSet(raw[2]), SelectionSet(raw[3])));
        std::vector<std::size_t> direct;
        for (std::size_t i = 0; i < 30; ++i) {
            bool all = true;
            for (const auto& s : raw) all = all && std::find(s.begin(), s.end(), i) != s.end();
            if (all) direct.push_back(i);
        }
        CHECK(icon.indices() == direct);
    }
}

TEST_CASE("selection set basics") {
    const SelectionSet s({5, 1, 5, 3});
    CHECK(s.indices() == std::vector<std::size_t>{1, 3, 5});
    CHECK(s.contains(3));
    CHECK_FALSE(s.contains(2));
    CHECK(SelectionSet({1, 5}).is_subset_of(s));
    CHECK_FALSE(SelectionSet({1, 2}).is_subset_of(s));
    CHECK(set_union(SelectionSet({1, 2}), SelectionSet({2, 9})).indices() == std::vector<std::size_t>{1, 2, 9});
}

TEST_CASE("selection CSV round trip") {
    const SelectionSet s({4, 8, 15, 16, 23, 42}, SelectionScope::final);
    const auto path = std::filesystem::temp_directory_path() / "jocot_test_selection.csv";
    write_selection_csv(s, path);
    CHECK(read_selection_csv(path) == s);
    std::filesystem::remove(path);
}

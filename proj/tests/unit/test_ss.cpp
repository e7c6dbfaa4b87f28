#include <doctest.h>

#include <set>
#include <tuple>

#include "ltforge/errors.hpp"
#include "ltforge/ss/ledger.hpp"

using namespace ltforge;
using namespace ltforge::ss;

namespace {

using Pair = std::tuple<unsigned, Bidegree, Bidegree>;

// every ordered pair of supported entries in one copy whose bidegrees differ by (r, r - 1), r >= 1
std::set<Pair> pair_oracle(const BigradedPage& page, unsigned max_r) {
    std::set<Pair> out;
    for (const auto& [a, ea] : page.entries) {
        if (ea.dimension && *ea.dimension == 0) continue;
        for (const auto& [b, eb] : page.entries) {
            if (eb.dimension && *eb.dimension == 0) continue;
            int ds = b.first - a.first, dt = b.second - a.second;
            if (ds < 1 || dt != ds - 1 || static_cast<unsigned>(ds) > max_r) continue;
            if (ea.copy != eb.copy) continue;
            out.insert({static_cast<unsigned>(ds), a, b});
        }
    }
    return out;
}

std::set<Pair> as_pairs(const CollapseReport& r) {
    std::set<Pair> out;
    for (const auto& o : r.obstructions) out.insert({o.r, o.source, o.target});
    return out;
}

BigradedPage page_of(std::initializer_list<Bidegree> support) {
    BigradedPage p;
    for (auto b : support) p.entries[b] = Entry{"E", std::nullopt, Copy::none};
    return p;
}

} // namespace

TEST_CASE("differential bidegrees and the window") {
    CHECK(differential_target(1, 0, 0) == Bidegree{1, 0});
    CHECK(differential_target(2, 1, 3) == Bidegree{3, 4});
    for (unsigned r = 1; r <= 12; ++r)
        for (int s = 0; s < 5; ++s)
            for (int t = -4; t < 5; ++t) {
                auto [s2, t2] = differential_target(r, s, t);
                CHECK((t2 - s2) == (t - s) - 1);
            }
    CHECK_THROWS_AS(differential_target(0, 0, 0), DomainError);
    CHECK(vanishing_window(1) == std::pair<int, int>{0, 0});
    CHECK(vanishing_window(2) == std::pair<int, int>{1, 2});
    for (unsigned n = 1; n <= 8; ++n) {
        auto [lo, hi] = vanishing_window(n);
        CHECK(hi - lo + 1 == static_cast<int>(n));
    }
}

TEST_CASE("collapse checker against pair enumeration") {
    CHECK(parity_collapse_check(BigradedPage{}).collapses);
    auto hit = parity_collapse_check(page_of({{0, 0}, {1, 0}}));
    CHECK_FALSE(hit.collapses);
    REQUIRE(hit.obstructions.size() == 1);
    CHECK(hit.obstructions[0].r == 1);
    CHECK(hit.obstructions[0].target == Bidegree{1, 0});
    // a known-zero entry does not obstruct
    auto zeroed = page_of({{0, 0}, {1, 0}});
    zeroed.entries[{1, 0}].dimension = 0;
    CHECK(parity_collapse_check(zeroed).collapses);

    for (unsigned n = 1; n <= 6; ++n) {
        CAPTURE(n);
        auto [lo, hi] = vanishing_window(n);
        std::vector<Bidegree> grid;
        for (int s = lo; s <= hi; ++s)
            for (int t : {0, 2}) grid.push_back({s, t});
        unsigned obstructed = 0;
        for (unsigned long mask = 0; mask < (1UL << grid.size()); ++mask) {
            BigradedPage base;
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (mask >> i & 1) base.entries[grid[i]] = Entry{"E", std::nullopt, Copy::none};
            auto two = two_copy_page(base);
            auto rep = parity_collapse_check(two, 2 * n);
            auto oracle = pair_oracle(two, 2 * n);
            CHECK(as_pairs(rep) == oracle);
            CHECK(rep.collapses == oracle.empty());
            for (const auto& o : rep.obstructions) {
                CHECK(o.r % 2 == 1);
                CHECK(o.source.first >= lo);
                CHECK(o.target.first <= hi);
            }
            if (!rep.collapses) ++obstructed;
            // one-row supports always collapse
            std::set<int> rows;
            for (const auto& [b, e] : base.entries) rows.insert(b.first);
            if (rows.size() <= 1) CHECK(rep.collapses);
        }
        if (n == 1) CHECK(obstructed == 0);
        if (n >= 2) CHECK(obstructed > 0);
    }
    // d_1 inside the bottom copy whenever two adjacent rows share an even t
    auto adj = parity_collapse_check(two_copy_page(page_of({{1, 0}, {2, 0}})));
    CHECK_FALSE(adj.collapses);
    CHECK(adj.obstructions.size() == 2);
}

TEST_CASE("explicit splitting and coverage") {
    auto p = page_of({{0, 0}, {1, 0}});
    Splitting apart{{{0, 0}, "a"}, {{1, 0}, "b"}};
    CHECK(parity_collapse_check(p, apart).collapses);
    Splitting partial{{{0, 0}, "a"}};
    CHECK_THROWS_AS(parity_collapse_check(p, partial), DomainError);
    auto bad = page_of({{-1, 0}});
    CHECK_THROWS_AS(parity_collapse_check(bad), DomainError);
}

TEST_CASE("strong convergence band") {
    for (unsigned n = 1; n <= 6; ++n) {
        auto page = window_page(n, 6);
        CHECK(strong_convergence_check(page, 0, 2 * static_cast<int>(n) - 2).converges);
        page.entries[{2 * static_cast<int>(n) - 1, 0}] = Entry{"x", std::nullopt, Copy::none};
        auto rep = strong_convergence_check(page, 0, 2 * static_cast<int>(n) - 2);
        CHECK_FALSE(rep.converges);
        CHECK(rep.outside.size() == 1);
    }
    CHECK(strong_convergence_check(page_of({{0, 0}, {0, 4}}), 0, 0).converges);
    CHECK_FALSE(strong_convergence_check(page_of({{0, 0}, {1, 4}}), 0, 0).converges);
    // monotone under shrinking support
    auto big = page_of({{0, 0}, {1, 2}, {2, 0}, {3, 1}});
    for (unsigned long mask = 0; mask < 16; ++mask) {
        BigradedPage sub;
        unsigned i = 0;
        for (const auto& [b, e] : big.entries)
            if (mask >> i++ & 1) sub.entries[b] = e;
        for (int M = 0; M <= 4; ++M)
            if (strong_convergence_check(big, 0, M).converges) CHECK(strong_convergence_check(sub, 0, M).converges);
    }
}

TEST_CASE("filtration ledger rows") {
    auto l1 = jl_filtration_ledger(1);
    REQUIRE(l1.rows.size() == 1);
    CHECK(l1.rows[0].s == 0);
    CHECK(l1.rows[0].w == 0);
    CHECK(l1.rows[0].supercuspidal);
    auto l2 = jl_filtration_ledger(2);
    REQUIRE(l2.rows.size() == 2);
    CHECK(l2.rows[0].s == 1);
    CHECK(l2.rows[1].s == 2);
    CHECK(l2.rows[0].w == 0);
    CHECK(l2.rows[1].w == 0);
    auto l4 = jl_filtration_ledger(4);
    std::vector<std::pair<int, int>> got;
    for (const auto& r : l4.rows) got.push_back({r.s, r.w});
    CHECK(got == std::vector<std::pair<int, int>>{{3, 0}, {4, 0}, {5, 1}, {6, 1}});
    for (unsigned n = 1; n <= 6; ++n) {
        auto L = jl_filtration_ledger(n);
        REQUIRE(L.rows.size() == n);
        CHECK(L.rows.front().s == static_cast<int>(n) - 1);
        CHECK(L.rows.back().s == 2 * static_cast<int>(n) - 2);
        for (std::size_t i = 0; i < L.rows.size(); ++i) {
            const auto& r = L.rows[i];
            // displayed pattern: n-1, n -> 0; n+1, n+2 -> 1; n+3, n+4 -> 2
            int k = r.s - static_cast<int>(n);
            int expected = k <= 0 ? 0 : (k + 1) / 2;
            CHECK(r.w == expected);
            CHECK(r.supercuspidal == (i == 0));
            if (i > 0) CHECK(r.w >= L.rows[i - 1].w);
            CHECK(r.copy == ((r.s - static_cast<int>(n) + 1) % 2 == 0 ? Copy::bottom : Copy::top));
        }
    }
    CHECK(l2.to_json()["rows"][1]["label"] == "colim_m H^2_c(Def^degen_{lvl p^m}; Z_l(0))");
    CHECK(tate_twist(-3, 0) == -1);
    CHECK(l4.chart().find("[supercuspidal]") != std::string::npos);
}

TEST_CASE("two-copy pages") {
    auto base = page_of({{1, 0}, {1, 2}});
    auto two = two_copy_page(base);
    CHECK(two.entries.size() == 4);
    CHECK(two.entries.at({1, 0}).copy == Copy::bottom);
    CHECK(two.entries.at({1, 1}).copy == Copy::top);
    CHECK(two.entries.at({1, 3}).copy == Copy::top);
    CHECK(two_copy_page(BigradedPage{}).entries.empty());
    CHECK_THROWS_AS(two_copy_page(page_of({{0, 1}})), DomainError);
    auto h1 = window_page(1, 4, 3, 2);
    CHECK(h1.entries.at({0, 2}).dimension == Integer(9));
    CHECK_FALSE(window_page(2, 0).entries.at({1, 0}).dimension.has_value());
    CHECK(parity_collapse_check(two_copy_page(h1)).collapses);
    CHECK(two.chart().find("?b") != std::string::npos);
}

TEST_CASE("height-one multiplicities") {
    auto t0 = ht1_component_multiplicity(0);
    CHECK(t0.at_level == std::vector<unsigned>{1});
    CHECK(t0.cumulative == std::vector<unsigned>{1});
    auto t2 = ht1_component_multiplicity(2);
    CHECK(t2.at_level == std::vector<unsigned>{1, 1, 1});
    for (unsigned m = 0; m <= 6; ++m) {
        auto t = ht1_component_multiplicity(m);
        CHECK(t.cumulative[0] == m + 1);
        for (unsigned j = 0; j <= m; ++j) CHECK(t.cumulative[j] == m - j + 1);
    }
}

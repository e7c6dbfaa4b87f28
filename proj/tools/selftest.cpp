#include <random>

#include "cli.hpp"
#include "ltforge/errors.hpp"
#include "ltforge/fgl/law.hpp"
#include "ltforge/level/level.hpp"
#include "ltforge/level/quotient_tower.hpp"
#include "ltforge/ss/ledger.hpp"
#include "ltforge/tower/tower.hpp"
#include "ltforge/zeta/zeta.hpp"

namespace ltforge::cli::detail {

using exact::BigRational;
using exact::CoefficientRing;
using exact::Integer;
using ojson = nlohmann::ordered_json;

namespace {

// Akiyama-Tanigawa, independent of the cached recursion
BigRational bernoulli_oracle(unsigned n) {
    std::vector<BigRational> a(n + 1);
    for (unsigned m = 0; m <= n; ++m) {
        a[m] = BigRational(1, m + 1);
        for (unsigned j = m; j >= 1; --j) {
            a[j - 1] = BigRational(j) * (a[j - 1] - a[j]);
            a[j - 1].canonicalize();
        }
    }
    return n == 1 ? -a[0] : a[0];
}

struct Checks {
    ojson list = ojson::array();
    bool all = true;

    template <class F>
    void run(const std::string& name, F&& f) {
        ojson c;
        c["name"] = name;
        std::string detail;
        bool ok = false;
        try {
            ok = f(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        c["passed"] = ok;
        if (!detail.empty()) c["detail"] = detail;
        all = all && ok;
        list.push_back(c);
    }
};

} // namespace

ojson selftest(const RunConfig& config, bool& passed) {
    std::mt19937_64 rng(config.seed);
    auto pick = [&](unsigned lo, unsigned hi) { return std::uniform_int_distribution<unsigned>(lo, hi)(rng); };
    Checks C;

    C.run("bernoulli", [&](std::string& d) {
        note("bernoulli");
        note("zeta_negative");
        for (unsigned j = 0; j <= 30; ++j)
            if (zeta::bernoulli(j) != bernoulli_oracle(j)) {
                d = "B_" + std::to_string(j) + " = " + zeta::rational_string(zeta::bernoulli(j));
                return false;
            }
        return zeta::zeta_negative(1) == BigRational(-1, 12);
    });

    C.run("a-series composition", [&](std::string& d) {
        note("fgl_multiplicative");
        note("a_series");
        note("series_compose");
        auto F = fgl::fgl_multiplicative(CoefficientRing::integers(), 10);
        for (int i = 0; i < 4; ++i) {
            unsigned a = pick(1, 12), b = pick(1, 12);
            if (exact::series_compose(F.a_series(a), F.a_series(b)) != F.a_series(a * b)) {
                d = "a=" + std::to_string(a) + " b=" + std::to_string(b);
                return false;
            }
        }
        return true;
    });

    C.run("honda height", [&](std::string& d) {
        note("honda_law");
        note("a_height");
        unsigned long p = pick(0, 1) ? 2 : 3;
        unsigned n = pick(1, 2);
        auto h = fgl::a_height(fgl::honda_law(n, p, static_cast<unsigned>(exact::integer_pow(p, n).get_ui()) + 1));
        d = "p=" + std::to_string(p) + " n=" + std::to_string(n);
        return !h.height.infinite && h.height.value == n;
    });

    C.run("tower rank", [&](std::string& d) {
        note("degen_ring_presentation");
        unsigned m = pick(1, 2);
        auto t = tower::degen_ring_presentation(1, m, 2);
        d = "m=" + std::to_string(m) + " rank=" + t.rank.get_str();
        return t.verified;
    });

    C.run("cyclotomic product", [&](std::string& d) {
        note("ht1_cyclotomic_decomposition");
        unsigned long p = pick(0, 1) ? 2 : 3;
        unsigned m = pick(1, 3);
        auto prod = tower::component_product(tower::ht1_cyclotomic_decomposition(p, m));
        tower::IntPoly expect(exact::integer_pow(p, m).get_ui() + 1, Integer(0));
        expect.front() = -1;
        expect.back() = 1;
        d = tower::intpoly_format(prod);
        return prod == expect;
    });

    C.run("strata counts", [&](std::string& d) {
        note("strata_level1");
        note("gaussian_binomial");
        unsigned n = pick(1, 4);
        unsigned long p = pick(0, 1) ? 2 : 3;
        auto r = tower::strata_level1(n, p);
        for (unsigned k = 0; k <= n; ++k)
            if (r.counts[k] != tower::gaussian_binomial(n, k, p)) {
                d = "n=" + std::to_string(n) + " d=" + std::to_string(k);
                return false;
            }
        return true;
    });

    C.run("height-one collapse", [&](std::string&) {
        note("two_copy_page");
        note("parity_collapse_check");
        return ss::parity_collapse_check(ss::two_copy_page(ss::window_page(1, 2 * static_cast<int>(pick(1, 4)))))
            .collapses;
    });

    C.run("euler factors", [&](std::string& d) {
        note("global_l");
        note("local_l_factor");
        auto prof = zeta::BettiProfile::cp(pick(0, 3));
        auto g = zeta::global_l(prof);
        for (unsigned long p : {2ul, 3ul, 5ul, 7ul, 11ul})
            if (g.euler_factor(p).factors != zeta::local_l_factor(p, prof).factors) {
                d = "p=" + std::to_string(p);
                return false;
            }
        return true;
    });

    C.run("drinfeld counts", [&](std::string& d) {
        note("enumerate_drinfeld");
        note("drinfeld_check");
        auto eps = CoefficientRing::nilpotent_extension(CoefficientRing::prime_field(3), "e", 2);
        auto F = fgl::fgl_multiplicative(eps, level::exact_check_degree(eps, 3, 1, 1));
        auto maps = level::enumerate_drinfeld(F, 1, 1);
        d = "count=" + std::to_string(maps.size());
        for (const auto& phi : level::enumerate_level_maps(F, 1, 1)) {
            auto rep = level::drinfeld_report(F, phi);
            if (rep.form1.divides != rep.form2.divides) return false;
        }
        return maps.size() == 3;
    });

    C.run("degeneration endpoints", [&](std::string& d) {
        note("degenerating_check");
        unsigned long p = pick(0, 1) ? 2 : 3;
        auto R = CoefficientRing::nilpotent_extension(CoefficientRing::prime_field(p), "e", 2);
        auto F = fgl::fgl_multiplicative(R, level::exact_check_degree(R, p, 1, 2));
        auto shape = level::make_shape(p, 1, 2);
        auto full = level::DegenerationType::full(shape), empty = level::DegenerationType::empty(shape);
        d = "p=" + std::to_string(p);
        for (const auto& phi : level::enumerate_level_maps(F, 1, 2)) {
            if (!level::degenerating_check(F, phi, full)) return false;
            if (level::degenerating_check(F, phi, empty) != level::drinfeld_check(F, phi)) return false;
        }
        return true;
    });

    C.run("quotient tower", [&](std::string& d) {
        note("drinfeld_quotient_tower");
        level::QuotientTowerOptions o;
        o.p = 2;
        o.n = 2;
        o.depth = 2;
        o.max_height = config.guards.max_height;
        o.max_degree = config.guards.max_degree;
        auto t = level::drinfeld_quotient_tower(o);
        d = "total rank " + t.total_rank().get_str();
        return t.total_rank() == 6 && t.steps.size() == 2 && t.steps[0].rank == 3 && t.steps[1].rank == 2;
    });

    C.run("ledger shape", [&](std::string& d) {
        note("jl_filtration_ledger");
        note("strong_convergence_check");
        for (unsigned n = 1; n <= 6; ++n) {
            auto L = ss::jl_filtration_ledger(n);
            if (L.rows.size() != n) return false;
            for (unsigned i = 0; i < n; ++i) {
                int s = static_cast<int>(n - 1 + i);
                if (L.rows[i].s != s || L.rows[i].w != ss::tate_twist(s, n)) {
                    d = "n=" + std::to_string(n);
                    return false;
                }
            }
            auto M = static_cast<int>(2 * n - 2);
            if (!ss::strong_convergence_check(ss::two_copy_page(ss::window_page(n, 4)), 0, M).converges) return false;
        }
        return true;
    });

    C.run("special values", [&](std::string& d) {
        note("special_value");
        note("predicted_homotopy_order");
        auto s2 = zeta::special_value(zeta::BettiProfile::sphere0(), 2);
        auto s6 = zeta::special_value(zeta::BettiProfile::sphere0(), 6);
        d = "k=2: " + zeta::rational_string(s2.value) + ", k=6: " + zeta::rational_string(s6.value);
        return s2.odd_regular_part == Integer(3) && s6.odd_regular_part == Integer(63) &&
               zeta::predicted_homotopy_order(zeta::BettiProfile::sphere0(), 36).oracle_agrees == true;
    });

    passed = C.all;
    ojson out;
    out["command"] = "selftest";
    out["seed"] = config.seed;
    out["checks"] = C.list;
    out["passed"] = C.all;
    return out;
}

} // namespace ltforge::cli::detail

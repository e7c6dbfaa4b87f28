#include "ltforge/level/quotient_tower.hpp"

#include <algorithm>
#include <map>

#include "ltforge/errors.hpp"
#include "ltforge/level/module.hpp"

namespace ltforge::level {

using exact::CoefficientRing;
using exact::Exponents;
using exact::Integer;
using exact::MonicPolynomial;
using exact::RingElement;
using exact::RingHom;
using exact::TruncatedSeries;

namespace {

RingElement eval_univariate(const CoefficientRing& R, const TruncatedSeries& s, const RingElement& x) {
    RingElement out = R.zero();
    RingElement power = R.one();
    unsigned at = 0;
    for (const auto& [e, c] : s.coefficients()) {
        while (at < e.e[0]) {
            power = R.mul(power, x);
            ++at;
            if (power.is_zero()) return out;
        }
        out = R.add(out, R.mul(c, power));
    }
    return out;
}

RingElement eval_bivariate(const CoefficientRing& R, const TruncatedSeries& F, const RingElement& x,
                           const RingElement& y) {
    std::vector<RingElement> px{R.one()}, py{R.one()};
    auto pw = [&R](std::vector<RingElement>& cache, const RingElement& base, unsigned k) -> const RingElement& {
        while (cache.size() <= k) cache.push_back(R.mul(cache.back(), base));
        return cache[k];
    };
    RingElement out = R.zero();
    for (const auto& [e, c] : F.coefficients()) {
        const RingElement& a = pw(px, x, e.e[0]);
        if (a.is_zero()) continue;
        const RingElement& b = pw(py, y, e.e[1]);
        if (b.is_zero()) continue;
        out = R.add(out, R.mul(c, R.mul(a, b)));
    }
    return out;
}

// phi(a) = sum_F [a_i](t_i) for every a in F_p^{thetas.size()}, computed in L
std::vector<RingElement> level_points(const fgl::FormalModuleLaw& law, const CoefficientRing& L,
                                      const std::vector<RingElement>& thetas, unsigned long p, unsigned e) {
    RingHom into = RingHom::by_name(law.ring(), L);
    const unsigned D = std::max(1u, e - 1);
    std::map<unsigned long, TruncatedSeries> a_series;
    auto act = [&](unsigned long a, const RingElement& x) {
        if (a == 0) return L.zero();
        auto it = a_series.find(a);
        if (it == a_series.end())
            it = a_series.emplace(a, series_change_ring(law.a_series_via_log(a, D), into)).first;
        return eval_univariate(L, it->second, x);
    };
    std::optional<TruncatedSeries> F;
    auto sum = [&](const RingElement& x, const RingElement& y) {
        if (x.is_zero()) return y;
        if (y.is_zero()) return x;
        if (!F) F = series_change_ring(fgl::law_series_through(law, 2 * D), into);
        return eval_bivariate(L, *F, x, y);
    };
    std::vector<RingElement> out;
    if (thetas.empty()) return {L.zero()};
    ModuleShape shape{p, 1, static_cast<unsigned>(thetas.size())};
    for (const auto& a : all_elements(shape, Integer(1) << 20)) {
        RingElement v = L.zero();
        for (std::size_t i = 0; i < thetas.size(); ++i) v = sum(v, act(a[i], thetas[i]));
        out.push_back(v);
    }
    return out;
}

} // namespace

Integer QuotientTower::total_rank() const {
    Integer r = 1;
    for (const auto& s : steps) r *= s.rank;
    return r;
}

nlohmann::ordered_json QuotientTower::to_json() const {
    nlohmann::ordered_json j;
    j["p"] = deformation.base.prime().get_ui();
    j["n"] = deformation.height;
    j["base"] = base.description();
    j["deformation"] = deformation.to_json();
    auto& arr = j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : steps) {
        nlohmann::ordered_json o;
        o["j"] = s.j;
        o["variable"] = s.variable;
        o["relationDegree"] = s.relation.degree();
        o["rank"] = s.rank;
        o["divisorDegree"] = s.divisor_degree;
        o["seriesDegree"] = s.series_degree;
        o["exact"] = s.exact;
        arr.push_back(o);
    }
    j["totalRank"] = total_rank().get_str();
    return j;
}

QuotientTower drinfeld_quotient_tower(const QuotientTowerOptions& o) {
    if (!exact::is_prime(o.p)) throw DomainError("quotient tower: p must be prime");
    if (o.n == 0) throw DomainError("quotient tower: height must be positive");
    if (o.n > o.max_height)
        throw GuardExceeded("quotient tower: height " + std::to_string(o.n) + " is above the guard " +
                            std::to_string(o.max_height));
    if (o.depth > o.n) throw DomainError("quotient tower: depth exceeds the height");
    if (o.precision == 0) throw DomainError("quotient tower: precision must be positive");
    const unsigned n = o.n;
    Integer pn_big = exact::integer_pow(o.p, n);
    if (pn_big > 4096) throw GuardExceeded("quotient tower: p^n too large");
    const unsigned pn = static_cast<unsigned>(pn_big.get_ui());

    auto U = fgl::universal_deformation(n, o.p, o.precision, pn, n > 1 ? o.nilpotency : 0);
    const fgl::FormalModuleLaw& law = U.law;
    const CoefficientRing& L0 = U.presentation.ring;
    QuotientTower tower{U.presentation, L0, {}};

    CoefficientRing L = L0;
    std::vector<RingElement> thetas;
    unsigned k = 1;
    for (unsigned j = 1; j <= o.depth; ++j, k *= static_cast<unsigned>(o.p)) {
        auto e = L.maximal_ideal_nilpotency();
        if (!e) throw InvariantError("quotient tower: " + L.description() + " has no nilpotent maximal ideal");
        // the expected rank only sizes the truncation; exactness is re-derived below
        const unsigned r = pn - k;
        // exact division by a degree-k divisor and exact preparation of a degree-r quotient
        const unsigned D = std::max(k * *e, r * *e + k);
        if (D > o.max_degree)
            throw GuardExceeded("quotient tower: step " + std::to_string(j) + " needs series degree " +
                                std::to_string(D) + ", above the guard " + std::to_string(o.max_degree));
        const std::string var = "t" + std::to_string(j);

        auto roots = level_points(law, L, thetas, o.p, *e);
        MonicPolynomial g = MonicPolynomial::from_roots(L, var, roots);
        TruncatedSeries f = series_rename(
            series_change_ring(law.a_series_via_log(o.p, D), RingHom::by_name(L0, L)), {var});
        auto div = exact::monic_divide(g, f);
        if (!div.divides)
            throw InvariantError("quotient tower: the level product does not divide [p](" + var + ") at step " +
                                 std::to_string(j));
        auto W = exact::weierstrass_prepare(div.quotient);
        const unsigned rank = W.distinguished.degree();
        CoefficientRing next = CoefficientRing::adjoin_root(L, var, W.distinguished.lower_coefficients());
        tower.steps.push_back(QuotientStep{j, next, var, MonicPolynomial(L, var, W.distinguished.lower_coefficients()),
                                           rank, g.degree(), D, div.exact && W.exact});
        RingHom up = RingHom::by_name(L, next);
        std::vector<RingElement> moved;
        for (const auto& t : thetas) moved.push_back(up(t));
        moved.push_back(next.generator(var));
        thetas = std::move(moved);
        L = next;
    }
    return tower;
}

} // namespace ltforge::level

#include "ltforge/tower/tower.hpp"

#include <algorithm>

#include "ltforge/errors.hpp"
#include "ltforge/level/quotient_tower.hpp"

namespace ltforge::tower {

namespace {

unsigned long checked_power(unsigned long p, unsigned long k, unsigned long cap, const char* what) {
    Integer q = exact::integer_pow(p, k);
    if (q > cap) throw GuardExceeded(std::string(what) + " " + q.get_str() + " is above the limit " + std::to_string(cap));
    return q.get_ui();
}

void require_prime(unsigned long p) {
    if (!exact::is_prime(p)) throw DomainError("p must be prime");
}

} // namespace

nlohmann::ordered_json TowerRingPresentation::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["m"] = m;
    j["p"] = p;
    j["base"] = base.to_json();
    j["factors"] = factors;
    j["factorRank"] = factor_rank;
    j["rank"] = rank.get_str();
    j["verified"] = verified;
    j["D"] = D;
    return j;
}

TowerRingPresentation degen_ring_presentation(unsigned n, unsigned m, unsigned long p, const PresentationOptions& opts) {
    require_prime(p);
    if (n == 0) throw DomainError("degen_ring_presentation: height must be positive");
    const unsigned long pn = checked_power(p, n, opts.max_degree, "p^n");
    const unsigned long pmn = checked_power(p, static_cast<unsigned long>(m) * n, opts.max_degree, "p^{mn}");
    const unsigned D = opts.D == 0 ? static_cast<unsigned>(std::max(pmn, 1UL)) : opts.D;
    if (D < pmn) throw DomainError("degen_ring_presentation: need D >= p^{mn} = " + std::to_string(pmn));
    if (D > opts.max_degree) throw GuardExceeded("degen_ring_presentation: D above the guard");

    auto U = fgl::universal_deformation(n, p, opts.precision, static_cast<unsigned>(pn), n > 1 ? opts.nilpotency : 0);
    const unsigned long q = checked_power(p, m, 1UL << 40, "p^m");
    auto series = U.law.a_series_via_log(q, D);
    auto wd = exact::weierstrass_degree(series);
    if (!wd.degree)
        throw DomainError("degen_ring_presentation: precision exhausted, [p^m] has no unit coefficient through degree " +
                          std::to_string(D));

    TowerRingPresentation t{n, m, p, U.presentation, {}, 0, Integer(0), false, 0};
    t.D = D;
    t.factor_rank = *wd.degree;
    t.rank = exact::integer_pow(Integer(t.factor_rank), n);
    t.verified = t.rank == exact::integer_pow(Integer(p), static_cast<unsigned long>(m) * n * n);
    const std::string pm = std::to_string(p) + "^" + std::to_string(m);
    for (unsigned i = 1; i <= n; ++i) {
        const std::string x = "X" + std::to_string(i);
        t.factors.push_back(U.presentation.ring.description() + "[[" + x + "]]/[" + pm + "](" + x + ")");
    }
    return t;
}

IntPoly intpoly_mul(const IntPoly& a, const IntPoly& b) {
    if (a.empty() || b.empty()) return {};
    IntPoly r(a.size() + b.size() - 1, Integer(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    while (r.size() > 1 && r.back() == 0) r.pop_back();
    return r;
}

std::string intpoly_format(const IntPoly& a, const std::string& var) {
    std::string out;
    for (std::size_t k = a.size(); k-- > 0;) {
        if (a[k] == 0) continue;
        Integer c = a[k];
        bool neg = c < 0;
        if (neg) c = -c;
        std::string mono = k == 0 ? "" : (k == 1 ? var : var + "^" + std::to_string(k));
        std::string piece = mono.empty() ? c.get_str() : (c == 1 ? mono : c.get_str() + "*" + mono);
        if (out.empty())
            out = (neg ? "-" : "") + piece;
        else
            out += (neg ? " - " : " + ") + piece;
    }
    return out.empty() ? "0" : out;
}

std::vector<CyclotomicComponent> ht1_cyclotomic_decomposition(unsigned long p, unsigned m) {
    require_prime(p);
    checked_power(p, m, 1UL << 20, "p^m");
    std::vector<CyclotomicComponent> out;
    for (unsigned j = 0; j <= m; ++j) {
        CyclotomicComponent c;
        c.j = j;
        if (j == 0) {
            c.polynomial = {Integer(-1), Integer(1)};
        } else {
            // Phi_{p^j}(Y) = sum_{i<p} Y^{i p^{j-1}}
            const unsigned long step = exact::integer_pow(p, j - 1).get_ui();
            c.polynomial.assign((p - 1) * step + 1, Integer(0));
            for (unsigned long i = 0; i < p; ++i) c.polynomial[i * step] = 1;
        }
        c.degree = static_cast<unsigned>(c.polynomial.size() - 1);
        c.label = "Def(G)_{lvl p^" + std::to_string(j) + "}";
        out.push_back(std::move(c));
    }
    return out;
}

IntPoly component_product(const std::vector<CyclotomicComponent>& components) {
    IntPoly r{Integer(1)};
    for (const auto& c : components) r = intpoly_mul(r, c.polynomial);
    return r;
}

nlohmann::ordered_json cyclotomic_to_json(unsigned long p, unsigned m, const std::vector<CyclotomicComponent>& comps) {
    nlohmann::ordered_json j;
    j["p"] = p;
    j["m"] = m;
    auto& arr = j["components"] = nlohmann::ordered_json::array();
    unsigned total = 0;
    for (const auto& c : comps) {
        nlohmann::ordered_json o;
        o["j"] = c.j;
        o["label"] = c.label;
        o["degree"] = c.degree;
        o["polynomial"] = intpoly_format(c.polynomial);
        arr.push_back(o);
        total += c.degree;
    }
    j["degrees"] = nlohmann::ordered_json::array();
    for (const auto& c : comps) j["degrees"].push_back(c.degree);
    j["totalDegree"] = total;
    j["product"] = intpoly_format(component_product(comps));
    return j;
}

TowerMap ht1_tower_map(unsigned m) {
    if (m == 0) throw DomainError("ht1_tower_map: level must be at least 1");
    TowerMap t;
    t.from_level = m;
    t.to_level = m - 1;
    for (unsigned j = 0; j <= m; ++j) t.image.push_back(j == 0 ? 0 : j - 1);
    return t;
}

TowerMap compose(const TowerMap& first, const TowerMap& second) {
    if (second.from_level != first.to_level) throw DomainError("tower maps do not compose");
    TowerMap t;
    t.from_level = first.from_level;
    t.to_level = second.to_level;
    for (unsigned j : first.image) t.image.push_back(second.image.at(j));
    return t;
}

Integer gaussian_binomial(unsigned n, unsigned d, const Integer& q) {
    if (d > n) throw DomainError("gaussian_binomial: need d <= n");
    Integer num = 1, den = 1;
    for (unsigned i = 0; i < d; ++i) {
        num *= exact::integer_pow(q, n - i) - 1;
        den *= exact::integer_pow(q, i + 1) - 1;
    }
    return num / den;
}

nlohmann::ordered_json StrataReport::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["p"] = p;
    j["counts"] = nlohmann::ordered_json::array();
    for (const auto& c : counts) j["counts"].push_back(c.get_str());
    j["total"] = total.get_str();
    auto& arr = j["strata"] = nlohmann::ordered_json::array();
    for (const auto& s : strata) {
        nlohmann::ordered_json o;
        o["d"] = s.d;
        o["rref"] = s.rref;
        o["label"] = s.label;
        o["openAndClosed"] = s.open_and_closed;
        arr.push_back(o);
    }
    return j;
}

StrataReport strata_level1(unsigned n, unsigned long p, const Integer& guard) {
    require_prime(p);
    if (n == 0) throw DomainError("strata_level1: n must be positive");
    StrataReport r;
    r.n = n;
    r.p = p;
    Integer total = 0;
    for (unsigned d = 0; d <= n; ++d) total += gaussian_binomial(n, d, p);
    if (total > guard)
        throw GuardExceeded("strata_level1: " + total.get_str() + " subspaces, above the guard " + guard.get_str());
    for (unsigned d = 0; d <= n; ++d) {
        std::vector<Stratum> block;
        // pivot columns as an increasing d-subset, free entries right of each pivot off the pivot columns
        std::vector<unsigned> piv(d);
        for (unsigned i = 0; i < d; ++i) piv[i] = i;
        while (true) {
            std::vector<std::pair<unsigned, unsigned>> free;
            for (unsigned i = 0; i < d; ++i)
                for (unsigned c = piv[i] + 1; c < n; ++c)
                    if (!std::binary_search(piv.begin(), piv.end(), c)) free.emplace_back(i, c);
            std::vector<unsigned long> digits(free.size(), 0);
            while (true) {
                Stratum s;
                s.d = d;
                s.rref.assign(d, std::vector<unsigned long>(n, 0));
                for (unsigned i = 0; i < d; ++i) s.rref[i][piv[i]] = 1;
                for (std::size_t k = 0; k < free.size(); ++k) s.rref[free[k].first][free[k].second] = digits[k];
                s.label = "Def^{partial(p^{-1}A/A)^" + std::to_string(n - d) + "}_{lvl p}";
                s.open_and_closed = d == 0;
                block.push_back(std::move(s));
                std::size_t k = 0;
                while (k < digits.size() && ++digits[k] == p) digits[k++] = 0;
                if (k == digits.size()) break;
            }
            int i = static_cast<int>(d) - 1;
            while (i >= 0 && piv[i] == n - d + static_cast<unsigned>(i)) --i;
            if (i < 0) break;
            ++piv[i];
            for (unsigned k = static_cast<unsigned>(i) + 1; k < d; ++k) piv[k] = piv[k - 1] + 1;
        }
        std::sort(block.begin(), block.end(), [](const Stratum& a, const Stratum& b) { return a.rref < b.rref; });
        r.counts.push_back(Integer(static_cast<unsigned long>(block.size())));
        for (auto& s : block) r.strata.push_back(std::move(s));
    }
    r.total = Integer(static_cast<unsigned long>(r.strata.size()));
    return r;
}

nlohmann::ordered_json Ht2Report::to_json() const {
    nlohmann::ordered_json j;
    j["p"] = p;
    auto& arr = j["blocks"] = nlohmann::ordered_json::array();
    for (const auto& b : blocks) {
        nlohmann::ordered_json o;
        o["degenerationRank"] = b.degeneration_rank;
        o["component"] = b.component;
        o["copies"] = b.copies.get_str();
        if (b.ring_rank)
            o["ringRank"] = b.ring_rank->get_str();
        else
            o["ringRank"] = nullptr;
        o["openAndClosed"] = b.open_and_closed;
        arr.push_back(o);
    }
    j["totalStrata"] = total_strata.get_str();
    return j;
}

Ht2Report ht2_level1_report(unsigned long p) {
    require_prime(p);
    level::QuotientTowerOptions o;
    o.p = p;
    o.n = 2;
    o.depth = 2;
    auto tower = level::drinfeld_quotient_tower(o);
    Ht2Report r;
    r.p = p;
    r.blocks.push_back(DecompositionBlock{2, "Def(G)", 1, Integer(1), false});
    r.blocks.push_back(DecompositionBlock{1, "Spf L_1, L_1 = Def(G)[[t]]/([p](t)/t)", gaussian_binomial(2, 1, p),
                                          Integer(tower.steps[0].rank), false});
    r.blocks.push_back(DecompositionBlock{0, "Def(G)_{lvl p}", 1, tower.total_rank(), true});
    r.total_strata = 0;
    for (const auto& b : r.blocks) r.total_strata += b.copies;
    return r;
}

H0Dimensions ht1_h0_dimensions(unsigned long p, unsigned m) {
    H0Dimensions h;
    for (const auto& c : ht1_cyclotomic_decomposition(p, m)) {
        h.dimensions.push_back(c.degree);
        h.total += c.degree;
    }
    return h;
}

} // namespace ltforge::tower

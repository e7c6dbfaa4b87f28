#include "ltforge/ss/ledger.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "ltforge/errors.hpp"
#include "ltforge/tower/tower.hpp"

namespace ltforge::ss {

namespace {

nlohmann::ordered_json bidegree_json(const Bidegree& b) { return nlohmann::ordered_json::array({b.first, b.second}); }

} // namespace

std::string copy_name(Copy c) {
    switch (c) {
    case Copy::bottom:
        return "bottom";
    case Copy::top:
        return "top";
    default:
        return "none";
    }
}

void BigradedPage::validate() const {
    if (r == 0) throw DomainError("page index must be at least 1");
    for (const auto& [b, e] : entries)
        if (b.first < 0) throw DomainError("page entry at s = " + std::to_string(b.first) + " < 0");
}

nlohmann::ordered_json BigradedPage::to_json() const {
    nlohmann::ordered_json j;
    j["r"] = r;
    auto& arr = j["entries"] = nlohmann::ordered_json::array();
    for (const auto& [b, e] : entries) {
        nlohmann::ordered_json o;
        o["s"] = b.first;
        o["t"] = b.second;
        o["label"] = e.label;
        if (e.dimension)
            o["dimension"] = e.dimension->get_str();
        else
            o["dimension"] = "unknown";
        o["copy"] = copy_name(e.copy);
        arr.push_back(o);
    }
    return j;
}

std::string BigradedPage::chart() const {
    if (entries.empty()) return "(empty page)\n";
    int s0 = entries.begin()->first.first, s1 = s0, t0 = entries.begin()->first.second, t1 = t0;
    for (const auto& [b, e] : entries) {
        s0 = std::min(s0, b.first);
        s1 = std::max(s1, b.first);
        t0 = std::min(t0, b.second);
        t1 = std::max(t1, b.second);
    }
    auto cell = [&](int s, int t) -> std::string {
        auto it = entries.find({s, t});
        if (it == entries.end()) return ".";
        std::string d = it->second.dimension ? it->second.dimension->get_str() : "?";
        if (it->second.copy == Copy::bottom) return d + "b";
        if (it->second.copy == Copy::top) return d + "t";
        return d;
    };
    std::size_t width = 3;
    for (int t = t0; t <= t1; ++t)
        for (int s = s0; s <= s1; ++s) width = std::max(width, cell(s, t).size() + 1);
    std::ostringstream os;
    for (int t = t1; t >= t0; --t) {
        os << "t=" << std::setw(3) << t << " |";
        for (int s = s0; s <= s1; ++s) os << std::setw(static_cast<int>(width)) << cell(s, t);
        os << "\n";
    }
    os << "      +" << std::string(width * static_cast<std::size_t>(s1 - s0 + 1), '-') << "\n       ";
    for (int s = s0; s <= s1; ++s) os << std::setw(static_cast<int>(width)) << s;
    os << "  (s)\n";
    return os.str();
}

Bidegree differential_target(unsigned r, int s, int t) {
    if (r == 0) throw DomainError("differential_target: r must be at least 1");
    return {s + static_cast<int>(r), t + static_cast<int>(r) - 1};
}

std::pair<int, int> vanishing_window(unsigned n) {
    if (n == 0) throw DomainError("vanishing_window: n must be positive");
    return {static_cast<int>(n) - 1, 2 * static_cast<int>(n) - 2};
}

nlohmann::ordered_json CollapseReport::to_json() const {
    nlohmann::ordered_json j;
    j["collapses"] = collapses;
    j["maxR"] = max_r;
    auto& arr = j["obstructions"] = nlohmann::ordered_json::array();
    for (const auto& o : obstructions) {
        nlohmann::ordered_json x;
        x["r"] = o.r;
        x["source"] = bidegree_json(o.source);
        x["target"] = bidegree_json(o.target);
        x["copy"] = o.copy;
        arr.push_back(x);
    }
    return j;
}

Splitting splitting_from_tags(const BigradedPage& page) {
    Splitting s;
    for (const auto& [b, e] : page.entries) s[b] = copy_name(e.copy);
    return s;
}

CollapseReport parity_collapse_check(const BigradedPage& page, const Splitting& splitting, unsigned max_r) {
    page.validate();
    CollapseReport rep;
    std::vector<Bidegree> live;
    for (const auto& [b, e] : page.entries)
        if (e.possibly_nonzero()) live.push_back(b);
    if (max_r == 0 && !live.empty()) {
        auto [lo, hi] = std::minmax_element(live.begin(), live.end(),
                                            [](const Bidegree& a, const Bidegree& b) { return a.first < b.first; });
        max_r = static_cast<unsigned>(hi->first - lo->first);
    }
    rep.max_r = max_r;
    auto copy_of = [&](const Bidegree& b) {
        auto it = splitting.find(b);
        if (it == splitting.end()) throw DomainError("splitting does not cover the support");
        return it->second;
    };
    std::set<Bidegree> support(live.begin(), live.end());
    for (unsigned r = 1; r <= max_r; ++r)
        for (const auto& src : live) {
            Bidegree tgt = differential_target(r, src.first, src.second);
            if (!support.count(tgt)) continue;
            const std::string c = copy_of(src);
            if (c != copy_of(tgt)) continue;
            rep.obstructions.push_back(Obstruction{r, src, tgt, c});
        }
    rep.collapses = rep.obstructions.empty();
    return rep;
}

CollapseReport parity_collapse_check(const BigradedPage& page, unsigned max_r) {
    return parity_collapse_check(page, splitting_from_tags(page), max_r);
}

ConvergenceReport strong_convergence_check(const BigradedPage& page, int lower_homotopy_bound, int M) {
    ConvergenceReport rep;
    rep.lower_homotopy_bound = lower_homotopy_bound;
    rep.cohomological_dimension = M;
    for (const auto& [b, e] : page.entries)
        if (e.possibly_nonzero() && (b.first < 0 || b.first > M)) rep.outside.push_back(b);
    rep.converges = rep.outside.empty();
    return rep;
}

int tate_twist(int s, unsigned n) {
    int d = s - static_cast<int>(n);
    // ceiling division by 2 for either sign
    return d >= 0 ? (d + 1) / 2 : -((-d) / 2);
}

nlohmann::ordered_json JlLedger::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["homotopyDegree"] = 1 - static_cast<int>(n);
    auto& arr = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["s"] = r.s;
        o["w"] = r.w;
        o["copy"] = copy_name(r.copy);
        o["label"] = r.label;
        o["supercuspidal"] = r.supercuspidal;
        arr.push_back(o);
    }
    j["annotations"] = annotations;
    return j;
}

std::string JlLedger::chart() const {
    std::ostringstream os;
    os << "pi_{" << 1 - static_cast<int>(n) << "}(JL_l(G)), height " << n << "\n";
    os << std::setw(4) << "s" << std::setw(4) << "w" << std::setw(8) << "copy" << "  summand\n";
    for (const auto& r : rows) {
        os << std::setw(4) << r.s << std::setw(4) << r.w << std::setw(8) << copy_name(r.copy) << "  " << r.label;
        if (r.supercuspidal) os << "  [supercuspidal]";
        os << "\n";
    }
    return os.str();
}

JlLedger jl_filtration_ledger(unsigned n) {
    auto [lo, hi] = vanishing_window(n);
    JlLedger L;
    L.n = n;
    for (int s = lo; s <= hi; ++s) {
        LedgerRow r;
        r.s = s;
        r.w = tate_twist(s, n);
        // total degree t - s = 1 - n, bottom copy at even t
        const int t = s + 1 - static_cast<int>(n);
        r.copy = t % 2 == 0 ? Copy::bottom : Copy::top;
        r.label = "colim_m H^" + std::to_string(s) + "_c(Def^degen_{lvl p^m}; Z_l(" + std::to_string(r.w) + "))";
        r.supercuspidal = s == lo;
        L.rows.push_back(std::move(r));
    }
    L.annotations = {
        "twist w = ceil((s-n)/2) is pattern-derived from the displayed rows",
        "lim^1 terms vanish on towers of finite groups",
        "rationally the filtration splits GL_n x Aut(G)-equivariantly (recorded, not computed)",
        "dimensions of colim H^s_c at height >= 2 are unknown",
    };
    return L;
}

BigradedPage two_copy_page(const BigradedPage& base) {
    base.validate();
    BigradedPage out;
    out.r = base.r;
    for (const auto& [b, e] : base.entries) {
        if (b.second % 2 != 0)
            throw DomainError("two_copy_page: base entry at odd t = " + std::to_string(b.second));
        Entry lo = e, hi = e;
        lo.copy = Copy::bottom;
        hi.copy = Copy::top;
        hi.label = "Sigma " + e.label;
        out.entries[b] = lo;
        out.entries[{b.first, b.second + 1}] = hi;
    }
    return out;
}

BigradedPage window_page(unsigned n, int t_max, unsigned long p, unsigned m) {
    auto [lo, hi] = vanishing_window(n);
    BigradedPage page;
    std::optional<Integer> dim;
    if (n == 1) dim = Integer(tower::ht1_h0_dimensions(p, m).total);
    for (int s = lo; s <= hi; ++s)
        for (int t = 0; t <= t_max; t += 2)
            page.entries[{s, t}] =
                Entry{"colim R^" + std::to_string(s) + "Phi pi_" + std::to_string(t), dim, Copy::none};
    return page;
}

nlohmann::ordered_json MultiplicityTable::to_json() const {
    nlohmann::ordered_json j;
    j["m"] = m;
    j["atLevel"] = at_level;
    j["cumulative"] = cumulative;
    return j;
}

MultiplicityTable ht1_component_multiplicity(unsigned m) {
    MultiplicityTable t;
    t.m = m;
    // one component per sublevel at each level; sublevel j first appears at level j
    std::vector<unsigned> cum(m + 1, 0);
    for (unsigned level = 0; level <= m; ++level)
        for (unsigned j = 0; j <= level; ++j) ++cum[j];
    t.at_level.assign(m + 1, 1);
    t.cumulative = cum;
    return t;
}

} // namespace ltforge::ss

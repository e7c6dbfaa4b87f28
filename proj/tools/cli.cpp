#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ltforge/errors.hpp"
#include "ltforge/exact/series.hpp"
#include "ltforge/fgl/law.hpp"
#include "ltforge/level/level.hpp"
#include "ltforge/level/quotient_tower.hpp"
#include "ltforge/ss/ledger.hpp"
#include "ltforge/tower/tower.hpp"
#include "ltforge/zeta/zeta.hpp"

namespace ltforge::cli {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using exact::CoefficientRing;
using exact::Integer;

namespace {

thread_local std::set<std::string>* g_trace = nullptr;

// command parameters with type coercion from CLI strings; unread keys are rejected
class Params {
public:
    Params(const json& j, std::string command) : j_(j), command_(std::move(command)) {
        if (!j_.is_object()) throw DomainError(command_ + ": parameters must be a JSON object");
    }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    long get_int(const std::string& key, long fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_number_integer()) return v.get<long>();
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            std::size_t used = 0;
            long x = 0;
            try {
                x = std::stol(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == s.size() && !s.empty()) return x;
        }
        throw DomainError(command_ + ": parameter '" + key + "' must be an integer");
    }

    unsigned long get_uint(const std::string& key, unsigned long fallback) {
        long x = get_int(key, static_cast<long>(fallback));
        if (x < 0) throw DomainError(command_ + ": parameter '" + key + "' must be nonnegative");
        return static_cast<unsigned long>(x);
    }

    std::optional<unsigned long> opt_uint(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return get_uint(key, 0);
    }

    std::string get_string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long>());
        throw DomainError(command_ + ": parameter '" + key + "' must be a string");
    }

    bool get_bool(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_boolean()) return v.get<bool>();
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "true" || s == "1") return true;
            if (s == "false" || s == "0") return false;
        }
        throw DomainError(command_ + ": parameter '" + key + "' must be a boolean");
    }

    // structured values may arrive as JSON text from the command line
    std::optional<json> get_json(const std::string& key) {
        if (!has(key)) return std::nullopt;
        const json& v = j_.at(key);
        if (!v.is_string()) return std::optional<json>(std::in_place, v);
        try {
            return json::parse(v.get<std::string>());
        } catch (const json::parse_error&) {
            throw DomainError(command_ + ": parameter '" + key + "' is not valid JSON");
        }
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw DomainError(command_ + ": unknown parameter '" + k + "'");
    }

private:
    json j_;
    std::string command_;
    std::set<std::string> used_;
};

CoefficientRing make_ring(const std::string& name, unsigned long p, unsigned N, unsigned K) {
    if (name == "Z") return CoefficientRing::integers();
    if (name == "Q") return CoefficientRing::rationals();
    if (name == "Fp") return CoefficientRing::prime_field(p);
    if (name == "ZpN") return CoefficientRing::integers_mod_prime_power(p, N);
    if (name == "eps") return CoefficientRing::nilpotent_extension(CoefficientRing::prime_field(p), "e", K);
    throw DomainError("unknown ring '" + name + "' (expected Z, Q, Fp, ZpN or eps)");
}

ojson height_json(const fgl::HeightReport& h) {
    ojson j;
    j["height"] = h.height.infinite ? ojson("infinity") : ojson(h.height.value);
    j["weierstrassDegree"] = h.weierstrass_degree ? ojson(*h.weierstrass_degree) : ojson(nullptr);
    j["testedDegree"] = h.tested_degree;
    return j;
}

ojson series_block(const exact::TruncatedSeries& s) {
    ojson j;
    j["series"] = exact::series_to_json(s);
    j["formatted"] = exact::format_series(s);
    return j;
}

ojson divisibility_json(const level::DivisibilityVerdict& v) {
    ojson j;
    j["divides"] = v.divides;
    j["exact"] = v.exact;
    j["divisorDegree"] = v.divisor_degree;
    j["testedDegree"] = v.tested_degree;
    return j;
}

// ---- fgl

ojson cmd_fgl(Params& P, const RunConfig& cfg) {
    const std::string law_name = P.get_string("law", "multiplicative");
    const unsigned long p = P.get_uint("p", 2);
    const unsigned height = static_cast<unsigned>(P.get_uint("height", 1));
    const unsigned N = static_cast<unsigned>(P.get_uint("N", 2));
    const unsigned K = static_cast<unsigned>(P.get_uint("K", 0));
    const std::string ring_name = P.get_string("ring", law_name == "from-log" ? "Q" : "Z");
    if (height > cfg.guards.max_height) throw GuardExceeded("fgl: height above the guard");
    unsigned long default_D = 8;
    if (law_name == "honda" || law_name == "universal" || law_name == "ptypical")
        default_D = std::max<unsigned long>(8, exact::integer_pow(Integer(p), height).get_ui());
    const unsigned D = static_cast<unsigned>(P.get_uint("D", default_D));
    if (D > cfg.guards.max_degree) throw GuardExceeded("fgl: D above the guard");

    ojson out;
    out["command"] = "fgl";
    std::optional<fgl::FormalModuleLaw> law;
    std::optional<fgl::DeformationRingPresentation> pres;
    if (law_name == "additive") {
        detail::note("fgl_additive");
        law = fgl::fgl_additive(make_ring(ring_name, p, N, std::max(K, 2u)), D);
    } else if (law_name == "multiplicative") {
        detail::note("fgl_multiplicative");
        law = fgl::fgl_multiplicative(make_ring(ring_name, p, N, std::max(K, 2u)), D);
    } else if (law_name == "honda") {
        detail::note("honda_law");
        law = fgl::honda_law(height, p, D);
    } else if (law_name == "universal") {
        detail::note("universal_deformation");
        auto U = fgl::universal_deformation(height, p, N, D, K);
        pres = U.presentation;
        law = U.law;
    } else if (law_name == "ptypical") {
        detail::note("ptypical_universal");
        CoefficientRing R = make_ring(ring_name, p, N, std::max(K, 2u));
        std::vector<exact::RingElement> v;
        if (auto vj = P.get_json("v")) {
            if (!vj->is_array()) throw DomainError("fgl: v must be an array of ring elements");
            for (const auto& x : *vj) v.push_back(R.parse(x.is_string() ? x.get<std::string>() : x.dump()));
        }
        law = fgl::ptypical_universal(height, p, v, R, D);
    } else if (law_name == "from-log") {
        detail::note("fgl_from_log");
        detail::note("fgl_log");
        CoefficientRing Q = make_ring(ring_name, p, N, 2);
        law = fgl::fgl_from_log(fgl::fgl_log(fgl::fgl_multiplicative(Q, D)), D);
    } else {
        throw DomainError("fgl: unknown law '" + law_name + "'");
    }
    out["law"] = law->to_json();
    out["formatted"] = exact::format_series(law->F());
    if (pres) out["presentation"] = pres->to_json();

    auto a = P.opt_uint("a");
    if (a) {
        detail::note("a_series");
        ojson j = series_block(law->a_series(*a));
        j["a"] = *a;
        out["aSeries"] = j;
    }
    if (auto b = P.opt_uint("b")) {
        if (!a) throw DomainError("fgl: --b needs --a");
        detail::note("a_series");
        detail::note("series_compose");
        auto comp = exact::series_compose(law->a_series(*a), law->a_series(*b));
        ojson j;
        j["a"] = *a;
        j["b"] = *b;
        j["matches"] = comp == law->a_series(*a * *b);
        out["composition"] = j;
    }
    if (auto m = P.opt_uint("m")) {
        detail::note("a_series");
        ojson j = series_block(law->pm_series(Integer(p), static_cast<unsigned>(*m)));
        j["m"] = *m;
        out["pmSeries"] = j;
    }
    if (P.get_bool("heightCheck", false)) {
        detail::note("a_height");
        detail::note("weierstrass_degree");
        if (pres)
            out["height"] = height_json(fgl::a_height(law->base_change(fgl::closed_fibre(*pres))));
        else if (law->ring().description() == CoefficientRing::prime_field(p).description())
            out["height"] = height_json(fgl::a_height(*law));
        else
            out["height"] = height_json(fgl::a_height(law->base_change(
                exact::RingHom::by_name(law->ring(), CoefficientRing::prime_field(p), true))));
    }
    if (P.get_bool("closedForm", false)) {
        detail::note("series_add");
        detail::note("series_mul");
        const auto& R = law->ring();
        auto X = exact::TruncatedSeries::variable(R, law->F().vars(), 0, D);
        auto Y = exact::TruncatedSeries::variable(R, law->F().vars(), 1, D);
        exact::TruncatedSeries expected = exact::series_add(X, Y);
        if (law_name == "multiplicative" || law_name == "from-log")
            expected = exact::series_add(expected, exact::series_mul(X, Y));
        else if (law_name != "additive")
            throw DomainError("fgl: closed form known only for additive, multiplicative and from-log laws");
        out["closedFormMatches"] = expected == law->F();
    }
    const bool hx = P.has("x"), hy = P.has("y");
    if (hx || hy) {
        if (!(hx && hy)) throw DomainError("fgl: --x and --y go together");
        detail::note("formal_sum");
        const auto& R = law->ring();
        auto x = R.parse(P.get_string("x", "0"));
        auto y = R.parse(P.get_string("y", "0"));
        ojson j;
        j["x"] = R.format(x);
        j["y"] = R.format(y);
        j["sum"] = R.format(law->formal_sum(x, y));
        out["formalSum"] = j;
    }
    return out;
}

// ---- level

ojson cmd_level(Params& P, const RunConfig& cfg) {
    const std::string law_name = P.get_string("law", "multiplicative");
    const unsigned long p = P.get_uint("p", 2);
    const std::string ring_name = P.get_string("ring", "eps");
    const unsigned N = static_cast<unsigned>(P.get_uint("N", 2));
    const unsigned K = static_cast<unsigned>(P.get_uint("K", 2));
    const unsigned m = static_cast<unsigned>(P.get_uint("m", 1));
    const unsigned n = static_cast<unsigned>(P.get_uint("n", 1));
    const unsigned law_height = static_cast<unsigned>(P.get_uint("lawHeight", 1));
    const std::string mode = P.get_string("mode", "drinfeld");
    if (m == 0 || n == 0) throw DomainError("level: m and n must be positive");
    CoefficientRing R = make_ring(ring_name, p, N, K);
    const unsigned D = static_cast<unsigned>(P.get_uint("D", level::exact_check_degree(R, p, m, n)));
    if (D > cfg.guards.max_degree) throw GuardExceeded("level: series degree above the guard");

    std::optional<fgl::FormalModuleLaw> law;
    if (law_name == "multiplicative") {
        detail::note("fgl_multiplicative");
        law = fgl::fgl_multiplicative(R, D);
    } else if (law_name == "additive") {
        detail::note("fgl_additive");
        law = fgl::fgl_additive(R, D);
    } else if (law_name == "honda") {
        detail::note("honda_law");
        if (law_height > cfg.guards.max_height) throw GuardExceeded("level: law height above the guard");
        auto H = fgl::honda_law(law_height, p, D);
        law = H.base_change(exact::RingHom(H.ring(), R, {}));
    } else {
        throw DomainError("level: unknown law '" + law_name + "'");
    }

    const level::ModuleShape shape = level::make_shape(p, m, n);
    std::optional<level::DegenerationType> S;
    std::optional<level::Submodule> domain;
    if (mode == "degenerating") S = level::parse_degeneration_type(shape, P.get_string("S", "empty"));
    else if (mode == "partial") domain = level::parse_submodule(shape, P.get_string("domain", "<>"));
    else if (mode != "drinfeld" && mode != "maps")
        throw DomainError("level: unknown mode '" + mode + "' (drinfeld, degenerating, partial or maps)");
    std::optional<level::ModuleElement> at;
    if (P.has("at")) at = level::parse_element(shape, P.get_string("at", ""));

    level::EnumerationOptions opts{cfg.guards.enumeration, cfg.threads};
    detail::note("enumerate_level_maps");
    auto maps = level::enumerate_level_maps(*law, m, n, opts);

    ojson out;
    out["command"] = "level";
    out["ring"] = R.description();
    out["law"] = law->name();
    out["p"] = p;
    out["m"] = m;
    out["n"] = n;
    out["mode"] = mode;
    if (S) out["type"] = S->format();
    if (domain) out["domain"] = domain->format();
    out["D"] = D;
    ojson jm = ojson::array(), jv = ojson::array();
    std::size_t passing = 0;
    for (const auto& phi : maps) {
        ojson mj = phi.to_json(R);
        if (at) {
            detail::note("eval_level_map");
            mj["at"] = level::format_element(*at);
            mj["value"] = R.format(level::eval_level_map(*law, phi, *at));
        }
        jm.push_back(mj);
        ojson v;
        bool ok = true;
        if (mode == "drinfeld") {
            detail::note("drinfeld_check");
            detail::note("monic_divides");
            auto rep = level::drinfeld_report(*law, phi);
            ok = rep.form2.divides;
            v["divides"] = ok;
            v["form1"] = divisibility_json(rep.form1);
            v["form2"] = divisibility_json(rep.form2);
        } else if (mode == "degenerating") {
            detail::note("degenerating_check");
            detail::note("monic_divides");
            auto rep = level::degenerating_report(*law, phi, *S);
            ok = rep.divides;
            v = divisibility_json(rep);
        } else if (mode == "partial") {
            detail::note("partial_drinfeld_check");
            detail::note("monic_divides");
            auto rep = level::partial_drinfeld_report(*law, phi, *domain);
            ok = rep.divides;
            v = divisibility_json(rep);
        } else {
            v["divides"] = true;
        }
        passing += ok;
        jv.push_back(v);
    }
    std::size_t count = passing;
    if (mode == "drinfeld") {
        detail::note("enumerate_drinfeld");
        count = level::enumerate_drinfeld(*law, m, n, opts).size();
    } else if (mode == "degenerating") {
        detail::note("enumerate_degenerating");
        count = level::enumerate_degenerating(*law, m, n, *S, opts).size();
    }
    if (count != passing)
        throw InvariantError("level: enumeration count " + std::to_string(count) + " disagrees with per-map verdicts " +
                             std::to_string(passing));
    out["count"] = count;
    out["total"] = maps.size();
    out["maps"] = jm;
    out["verdicts"] = jv;
    return out;
}

// ---- tower

ojson cmd_tower(Params& P, const RunConfig& cfg) {
    const unsigned n = static_cast<unsigned>(P.get_uint("height", 1));
    const unsigned m = static_cast<unsigned>(P.get_uint("level", 1));
    const unsigned long p = P.get_uint("p", 2);
    tower::PresentationOptions po;
    po.precision = static_cast<unsigned>(P.get_uint("precision", 2));
    po.nilpotency = static_cast<unsigned>(P.get_uint("nilpotency", 2));
    po.D = static_cast<unsigned>(P.get_uint("D", 0));
    po.max_degree = cfg.guards.max_degree;
    const bool quotient = P.get_bool("quotient", false);
    const unsigned depth = static_cast<unsigned>(P.get_uint("depth", n));
    if (n > cfg.guards.max_height) throw GuardExceeded("tower: height above the guard");

    ojson out;
    out["command"] = "tower";
    detail::note("degen_ring_presentation");
    auto pres = tower::degen_ring_presentation(n, m, p, po);
    if (!pres.verified)
        throw InvariantError("tower: rank " + pres.rank.get_str() + " differs from p^{m n^2}");
    out["presentation"] = pres.to_json();
    out["rank"] = pres.rank.get_str();
    if (n == 1) {
        detail::note("ht1_cyclotomic_decomposition");
        auto comps = tower::ht1_cyclotomic_decomposition(p, m);
        ojson degrees = ojson::array();
        unsigned total = 0;
        for (const auto& c : comps) {
            degrees.push_back(c.degree);
            total += c.degree;
        }
        if (Integer(total) != pres.rank) throw InvariantError("tower: cyclotomic degrees do not sum to the rank");
        out["components"] = degrees;
        out["cyclotomic"] = tower::cyclotomic_to_json(p, m, comps);
        detail::note("ht1_h0_dimensions");
        auto h0 = tower::ht1_h0_dimensions(p, m);
        out["h0"] = {{"dimensions", h0.dimensions}, {"total", h0.total}};
        if (m >= 1) {
            detail::note("ht1_tower_map");
            auto t = tower::ht1_tower_map(m);
            out["towerMap"] = {{"fromLevel", t.from_level}, {"toLevel", t.to_level}, {"image", t.image}};
        }
    }
    if (n == 2 && m == 1) {
        detail::note("ht2_level1_report");
        detail::note("drinfeld_quotient_tower");
        out["ht2"] = tower::ht2_level1_report(p).to_json();
    }
    if (quotient) {
        detail::note("drinfeld_quotient_tower");
        level::QuotientTowerOptions qo;
        qo.p = p;
        qo.n = n;
        qo.depth = depth;
        qo.precision = po.precision;
        qo.nilpotency = po.nilpotency;
        qo.max_height = cfg.guards.max_height;
        qo.max_degree = cfg.guards.max_degree;
        out["quotientTower"] = level::drinfeld_quotient_tower(qo).to_json();
    }
    return out;
}

// ---- strata

std::string strata_chart(const tower::StrataReport& r) {
    std::ostringstream os;
    os << "level-1 strata of F_" << r.p << "^" << r.n << "\n";
    for (unsigned d = 0; d < r.counts.size(); ++d)
        os << "  d=" << d << "  count=" << r.counts[d].get_str() << "  Def^{partial(p^{-1}A/A)^" << r.n - d
           << "}_{lvl p}" << (d == 0 ? "  [open and closed]" : "") << "\n";
    os << "  total=" << r.total.get_str() << "\n";
    return os.str();
}

ojson cmd_strata(Params& P, const RunConfig& cfg, std::string* text) {
    const unsigned n = static_cast<unsigned>(P.get_uint("n", 2));
    const unsigned long p = P.get_uint("p", 2);
    const unsigned m = static_cast<unsigned>(P.get_uint("level", 1));
    ojson out;
    out["command"] = "strata";
    out["n"] = n;
    out["p"] = p;
    out["level"] = m;
    if (m == 0) throw DomainError("strata: level must be positive");
    if (m == 1) {
        detail::note("strata_level1");
        detail::note("gaussian_binomial");
        auto r = tower::strata_level1(n, p, cfg.guards.enumeration);
        out["status"] = "enumerated";
        out["report"] = r.to_json();
        ojson g = ojson::array();
        for (unsigned d = 0; d <= n; ++d) g.push_back(tower::gaussian_binomial(n, d, p).get_str());
        out["gaussianBinomials"] = g;
        if (n == 2) {
            detail::note("ht2_level1_report");
            out["ht2"] = tower::ht2_level1_report(p).to_json();
        }
        if (text) *text = strata_chart(r);
    } else if (n == 1) {
        detail::note("ht1_cyclotomic_decomposition");
        auto comps = tower::ht1_cyclotomic_decomposition(p, m);
        out["status"] = "height-one sublevels";
        out["cyclotomic"] = tower::cyclotomic_to_json(p, m, comps);
        if (text) {
            std::ostringstream os;
            for (const auto& c : comps) os << "  " << c.label << "  degree " << c.degree << "\n";
            *text = os.str();
        }
    } else {
        out["status"] = "not enumerated";
        out["reason"] = "no closed-form stratum list at level >= 2 and height >= 2";
        out["rankFormula"] = exact::integer_pow(Integer(p), static_cast<unsigned long>(m) * n * n).get_str();
        if (text) *text = "not enumerated: level >= 2 at height >= 2\n";
    }
    return out;
}

// ---- ledger

ss::BigradedPage page_from_json(const json& j) {
    ss::BigradedPage page;
    const json& entries = j.is_object() && j.contains("entries") ? j.at("entries") : j;
    if (!entries.is_array()) throw DomainError("ledger: page must be an array of entries");
    for (const auto& e : entries) {
        if (!e.is_object() || !e.contains("s") || !e.contains("t"))
            throw DomainError("ledger: page entries need s and t");
        ss::Entry entry;
        entry.label = e.value("label", "E");
        if (e.contains("dimension")) {
            const json& d = e.at("dimension");
            if (d.is_number_integer()) entry.dimension = Integer(d.get<long>());
            else if (d.is_string() && d.get<std::string>() != "unknown") entry.dimension = Integer(d.get<std::string>());
        }
        page.entries[{e.at("s").get<int>(), e.at("t").get<int>()}] = entry;
    }
    return page;
}

ojson cmd_ledger(Params& P, const RunConfig& cfg, std::string* text) {
    const unsigned n = static_cast<unsigned>(P.get_uint("height", 2));
    const int tmax = static_cast<int>(P.get_int("tmax", 2));
    const unsigned long p = P.get_uint("p", 2);
    const unsigned m = static_cast<unsigned>(P.get_uint("level", 1));
    const unsigned max_r = static_cast<unsigned>(P.get_uint("maxR", 2 * n));
    const int lower = static_cast<int>(P.get_int("lowerBound", 0));
    const int M = static_cast<int>(P.get_int("cohDim", 2 * static_cast<int>(n) - 2));
    auto page_json = P.get_json("page");
    auto mult = P.opt_uint("multiplicity");
    if (n == 0) throw DomainError("ledger: height must be positive");
    if (n > 64 || max_r > cfg.guards.max_degree) throw GuardExceeded("ledger: height or r range above the guard");

    detail::note("jl_filtration_ledger");
    auto L = ss::jl_filtration_ledger(n);
    detail::note("vanishing_window");
    auto [lo, hi] = ss::vanishing_window(n);
    ss::BigradedPage base = page_json ? page_from_json(*page_json) : ss::window_page(n, tmax, p, m);
    if (n == 1 && !page_json) detail::note("ht1_h0_dimensions");
    detail::note("two_copy_page");
    auto two = ss::two_copy_page(base);
    detail::note("parity_collapse_check");
    auto collapse = ss::parity_collapse_check(two, max_r);
    detail::note("strong_convergence_check");
    auto conv = ss::strong_convergence_check(two, lower, M);
    detail::note("differential_target");
    ojson targets = ojson::array();
    for (unsigned r = 1; r <= max_r; ++r) {
        auto [s, t] = ss::differential_target(r, lo, 0);
        targets.push_back({{"r", r}, {"source", {lo, 0}}, {"target", {s, t}}});
    }

    ojson out;
    out["command"] = "ledger";
    out["ledger"] = L.to_json();
    out["window"] = {lo, hi};
    out["page"] = two.to_json();
    out["collapse"] = collapse.to_json();
    ojson cj;
    cj["converges"] = conv.converges;
    cj["lowerHomotopyBound"] = conv.lower_homotopy_bound;
    cj["cohomologicalDimension"] = conv.cohomological_dimension;
    cj["outside"] = ojson::array();
    for (const auto& b : conv.outside) cj["outside"].push_back({b.first, b.second});
    out["convergence"] = cj;
    out["differentialTargets"] = targets;
    if (mult) {
        detail::note("ht1_component_multiplicity");
        out["multiplicity"] = ss::ht1_component_multiplicity(static_cast<unsigned>(*mult)).to_json();
    }
    if (text) {
        std::ostringstream os;
        os << L.chart() << "\nE_1 page (b = bottom copy, t = top copy, ? = unknown dimension)\n" << two.chart();
        os << "\ncollapse: " << (collapse.collapses ? "yes" : "no") << " (r <= " << collapse.max_r << ")\n";
        for (const auto& o : collapse.obstructions)
            os << "  d_" << o.r << ": (" << o.source.first << "," << o.source.second << ") -> (" << o.target.first
               << "," << o.target.second << ") in " << o.copy << "\n";
        os << "strong convergence in 0 <= s <= " << M << ": " << (conv.converges ? "yes" : "no") << "\n";
        *text = os.str();
    }
    return out;
}

// ---- zeta

ojson cmd_zeta(Params& P, const RunConfig&) {
    zeta::BettiProfile profile = zeta::BettiProfile::sphere0();
    if (auto pj = P.get_json("profile")) profile = zeta::BettiProfile::from_json(*pj);
    ojson out;
    out["command"] = "zeta";
    out["profile"] = profile.to_json();
    detail::note("global_l");
    out["global"] = zeta::global_l(profile).to_json();
    if (auto prime = P.opt_uint("prime")) {
        detail::note("local_l_factor");
        auto lf = zeta::local_l_factor(Integer(*prime), profile);
        out["local"] = lf.to_json();
        if (P.has("s")) {
            long s = P.get_int("s", 0);
            auto v = lf.evaluate_at(s);
            ojson lv;
            lv["s"] = s;
            lv["pole"] = v.pole;
            lv["value"] = v.value ? ojson(zeta::rational_string(*v.value)) : ojson(nullptr);
            if (v.pole_weight) lv["poleWeight"] = *v.pole_weight;
            out["localValue"] = lv;
        }
    } else if (P.has("s")) {
        throw DomainError("zeta: --s needs --prime");
    }
    const bool compare = P.get_bool("compareOracle", false);
    if (P.has("specialK")) {
        long k = P.get_int("specialK", 0);
        detail::note("special_value");
        detail::note("bernoulli");
        detail::note("zeta_negative");
        auto sv = zeta::special_value(profile, k);
        out["value"] = zeta::rational_string(sv.value);
        out["special"] = sv.to_json();
        if (compare) {
            detail::note("predicted_homotopy_order");
            detail::note("image_of_j_denominator");
            out["homotopy"] = zeta::predicted_homotopy_order(profile, k).to_json();
        }
    } else if (compare) {
        throw DomainError("zeta: --compare-oracle needs --special-k");
    }
    if (auto j = P.opt_uint("bernoulli")) {
        detail::note("bernoulli");
        if (*j > 4096) throw GuardExceeded("zeta: Bernoulli index above the guard");
        out["bernoulli"] = {{"j", *j}, {"value", zeta::rational_string(zeta::bernoulli(static_cast<unsigned>(*j)))}};
    }
    if (auto j = P.opt_uint("zetaNegative")) {
        detail::note("zeta_negative");
        if (*j > 4096) throw GuardExceeded("zeta: argument above the guard");
        out["zetaNegative"] = {{"j", *j},
                               {"value", zeta::rational_string(zeta::zeta_negative(static_cast<unsigned>(*j)))}};
    }
    if (P.has("imageOfJ")) {
        long t = P.get_int("imageOfJ", 0);
        detail::note("image_of_j_denominator");
        auto ij = zeta::image_of_j_denominator(t);
        out["imageOfJ"] = {{"t", t}, {"value", ij.value.get_str()}, {"note", ij.note}};
    }
    return out;
}

int exit_for(const std::exception_ptr& e, std::string& kind, std::string& message) {
    try {
        std::rethrow_exception(e);
    } catch (const DomainError& x) {
        kind = "domain";
        message = x.what();
        return kExitDomain;
    } catch (const GuardExceeded& x) {
        kind = "guard";
        message = x.what();
        return kExitGuard;
    } catch (const InvariantError& x) {
        kind = "invariant";
        message = x.what();
        return kExitInvariant;
    } catch (const json::exception& x) {
        kind = "domain";
        message = x.what();
        return kExitDomain;
    } catch (const std::exception& x) {
        kind = "invariant";
        message = x.what();
        return kExitInvariant;
    }
}

Integer json_guard(const json& v, const std::string& name) {
    Integer g;
    if (v.is_number_integer())
        g = v.get<long>();
    else if (v.is_string()) {
        if (g.set_str(v.get<std::string>(), 10) != 0) throw DomainError("guard '" + name + "' is not an integer");
    } else
        throw DomainError("guard '" + name + "' is not an integer");
    return g;
}

void check_guards(const Guards& g) {
    if (g.enumeration <= 0) throw GuardExceeded("guard enumeration must be positive");
    if (g.max_degree == 0) throw GuardExceeded("guard maxDegree must be positive");
    if (g.max_height == 0) throw GuardExceeded("guard maxHeight must be positive");
}

} // namespace

void detail::note(const std::string& op) {
    if (g_trace) g_trace->insert(op);
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"fgl", "level", "tower", "strata", "ledger", "zeta", "selftest"};
    return c;
}

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw DomainError("config must be a JSON object");
    RunConfig c;
    for (const auto& [k, v] : j.items()) {
        if (k == "command") {
            c.command = v.get<std::string>();
        } else if (k == "parameters") {
            if (!v.is_object()) throw DomainError("config parameters must be an object");
            c.parameters = v;
        } else if (k == "seed") {
            if (!v.is_number_integer()) throw DomainError("config seed must be an integer");
            c.seed = v.get<std::uint64_t>();
        } else if (k == "guards") {
            if (!v.is_object()) throw DomainError("config guards must be an object");
            for (const auto& [gk, gv] : v.items()) {
                Integer g = json_guard(gv, gk);
                if (g <= 0) throw GuardExceeded("guard '" + gk + "' must be positive");
                if (gk == "enumeration")
                    c.guards.enumeration = g;
                else if (gk == "maxDegree" || gk == "maxHeight") {
                    if (!g.fits_uint_p()) throw DomainError("guard '" + gk + "' is too large");
                    (gk == "maxDegree" ? c.guards.max_degree : c.guards.max_height) = static_cast<unsigned>(g.get_ui());
                } else
                    throw DomainError("unknown guard '" + gk + "'");
            }
        } else {
            throw DomainError("unknown config field '" + k + "'");
        }
    }
    return c;
}

RunResult run(const RunConfig& config) {
    RunResult res;
    std::set<std::string> trace;
    g_trace = &trace;
    detail::note("run");
    std::string text;
    try {
        check_guards(config.guards);
        if (config.threads == 0) throw DomainError("threads must be positive");
        Params P(config.parameters, config.command);
        ojson out;
        std::string* tp = config.text ? &text : nullptr;
        if (config.command == "fgl")
            out = cmd_fgl(P, config);
        else if (config.command == "level")
            out = cmd_level(P, config);
        else if (config.command == "tower")
            out = cmd_tower(P, config);
        else if (config.command == "strata")
            out = cmd_strata(P, config, tp);
        else if (config.command == "ledger")
            out = cmd_ledger(P, config, tp);
        else if (config.command == "zeta")
            out = cmd_zeta(P, config);
        else if (config.command == "selftest") {
            detail::note("selftest");
            const std::string fault = P.get_string("injectFault", "");
            if (!fault.empty() && fault != "bernoulli") throw DomainError("selftest: unknown fault '" + fault + "'");
            if (fault == "bernoulli") zeta::testing::corrupt_bernoulli(2, exact::BigRational(1, 5));
            bool passed = true;
            try {
                out = detail::selftest(config, passed);
            } catch (...) {
                zeta::testing::reset_bernoulli_cache();
                throw;
            }
            zeta::testing::reset_bernoulli_cache();
            P.finish();
            if (!passed) res.exit_code = kExitInvariant;
        } else {
            throw DomainError("unknown command '" + config.command + "'");
        }
        P.finish();
        if (config.trace) {
            ojson ops = ojson::array();
            for (const auto& o : trace) ops.push_back(o);
            out["operations"] = ops;
        }
        res.output = config.text && !text.empty() ? text : out.dump(2) + "\n";
    } catch (...) {
        std::string kind, message;
        res.exit_code = exit_for(std::current_exception(), kind, message);
        ojson err;
        err["error"] = {{"kind", kind}, {"message", message}};
        res.output = err.dump(2) + "\n";
        res.error = "lt-forge: " + message + "\n";
    }
    g_trace = nullptr;
    res.operations = std::move(trace);
    return res;
}

namespace {

struct OptionDef {
    const char* flag;
    const char* key;
    bool is_flag;
    const char* help;
};

const std::map<std::string, std::pair<std::string, std::vector<OptionDef>>>& subcommand_table() {
    static const std::map<std::string, std::pair<std::string, std::vector<OptionDef>>> table{
        {"fgl",
         {"formal group and module laws: series, a-series, heights",
          {{"--law", "law", false, "additive, multiplicative, honda, universal, ptypical or from-log"},
           {"--p", "p", false, "prime"},
           {"--ring", "ring", false, "Z, Q, Fp, ZpN or eps"},
           {"--N", "N", false, "coefficient precision for ZpN and the universal deformation"},
           {"--K", "K", false, "nilpotency of eps / deformation variables (0 = formal)"},
           {"--height", "height", false, "height for honda, universal and ptypical"},
           {"--D", "D", false, "truncation degree"},
           {"--a", "a", false, "print [a](X)"},
           {"--b", "b", false, "check [a]([b](X)) = [ab](X)"},
           {"--m", "m", false, "print [p^m](X)"},
           {"--x", "x", false, "formal sum left argument"},
           {"--y", "y", false, "formal sum right argument"},
           {"--v", "v", false, "JSON array of Hazewinkel generators for ptypical"},
           {"--height-check", "heightCheck", true, "compute the A-height"},
           {"--closed-form", "closedForm", true, "compare with the closed-form law"}}}},
        {"level",
         {"level-structure verification and enumeration",
          {{"--law", "law", false, "multiplicative, additive or honda"},
           {"--law-height", "lawHeight", false, "height of the honda law"},
           {"--p", "p", false, "prime"},
           {"--ring", "ring", false, "test ring: eps, ZpN, Fp"},
           {"--N", "N", false, "exponent for ZpN"},
           {"--K", "K", false, "nilpotency for eps"},
           {"--m", "m", false, "level exponent"},
           {"--n", "n", false, "rank of the source module"},
           {"--mode", "mode", false, "drinfeld, degenerating, partial or maps"},
           {"--S", "S", false, "degeneration type: {(1),(2)}, cancel(<(1,0)>), empty, full"},
           {"--domain", "domain", false, "partial domain generators <(1,0)>"},
           {"--at", "at", false, "evaluate every map at this element"},
           {"--D", "D", false, "series degree (default: exact check degree)"}}}},
        {"tower",
         {"tower-ring presentations, ranks, cyclotomic decomposition",
          {{"--height", "height", false, "height n"},
           {"--level", "level", false, "level m"},
           {"--p", "p", false, "prime"},
           {"--precision", "precision", false, "coefficient precision N"},
           {"--nilpotency", "nilpotency", false, "u_i^K = 0"},
           {"--D", "D", false, "series degree (default p^{mn})"},
           {"--quotient", "quotient", true, "build the Drinfeld quotient tower"},
           {"--depth", "depth", false, "quotient tower depth"}}}},
        {"strata",
         {"stratification by degeneration type",
          {{"--n", "n", false, "height n"}, {"--p", "p", false, "prime"}, {"--level", "level", false, "level m"}}}},
        {"ledger",
         {"spectral-sequence filtration ledger and collapse report",
          {{"--height", "height", false, "height n"},
           {"--tmax", "tmax", false, "largest even t of the default page"},
           {"--p", "p", false, "prime for height-one dimensions"},
           {"--level", "level", false, "level for height-one dimensions"},
           {"--page", "page", false, "JSON base page [{s,t,dimension,label}]"},
           {"--max-r", "maxR", false, "largest r checked (default 2n)"},
           {"--lower-bound", "lowerBound", false, "lower homotopy bound N"},
           {"--coh-dim", "cohDim", false, "cohomological dimension M (default 2n-2)"},
           {"--multiplicity", "multiplicity", false, "height-one multiplicity table up to this level"}}}},
        {"zeta",
         {"L-factors and exact zeta special values",
          {{"--profile", "profile", false, "JSON Betti profile {\"betti\": {\"0\": 1}} keyed by degree"},
           {"--prime", "prime", false, "local factor at this prime"},
           {"--s", "s", false, "evaluate the local factor at s"},
           {"--special-k", "specialK", false, "special value at 1 - k"},
           {"--compare-oracle", "compareOracle", true, "compare denominators with the image-of-J oracle"},
           {"--bernoulli", "bernoulli", false, "print B_j"},
           {"--zeta-negative", "zetaNegative", false, "print zeta(-j)"},
           {"--image-of-j", "imageOfJ", false, "print the image-of-J denominator for t"}}}},
        {"selftest",
         {"run the invariant suite", {{"--inject-fault", "injectFault", false, "fault injection: bernoulli"}}}},
    };
    return table;
}

} // namespace

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"lt-forge: exact computations for the degenerating Lubin-Tate tower", "lt-forge"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    std::string config_path;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string guard, max_degree, max_height;
    bool trace = false, text = false;
    auto* o_config = app.add_option("--config", config_path, "JSON RunConfig file");
    auto* o_seed = app.add_option("--seed", seed, "seed for randomized checks");
    auto* o_threads = app.add_option("--threads", threads, "worker threads for enumerations");
    auto* o_guard = app.add_option("--guard", guard, "enumeration guard");
    auto* o_maxdeg = app.add_option("--max-degree", max_degree, "series degree guard");
    auto* o_maxh = app.add_option("--max-height", max_height, "height guard");
    app.add_flag("--trace", trace, "list the module operations invoked");
    app.add_flag("--text", text, "text charts instead of JSON where available");

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> registered;
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : subcommand_table()) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        subs[name] = sub;
        for (const auto& o : entry.second) {
            CLI::Option* opt = o.is_flag ? sub->add_flag(o.flag, flags[name][o.key], o.help)
                                         : sub->add_option(o.flag, raw[name][o.key], o.help);
            registered[name].emplace_back(o.key, opt);
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "lt-forge: " << e.what() << "\n";
        return kExitDomain;
    }

    RunConfig cfg;
    try {
        if (*o_config) {
            std::ifstream in(config_path);
            if (!in) throw DomainError("cannot read config '" + config_path + "'");
            cfg = RunConfig::from_json(json::parse(in));
        }
        std::string chosen;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) chosen = name;
        if (!chosen.empty()) {
            if (!cfg.command.empty() && cfg.command != chosen)
                throw DomainError("subcommand '" + chosen + "' conflicts with config command '" + cfg.command + "'");
            cfg.command = chosen;
            for (const auto& [key, opt] : registered[chosen]) {
                if (opt->count() == 0) continue;
                auto f = flags[chosen].find(key);
                if (f != flags[chosen].end())
                    cfg.parameters[key] = f->second;
                else
                    cfg.parameters[key] = raw[chosen][key];
            }
        }
        if (cfg.command.empty()) {
            out << app.help();
            return kExitDomain;
        }
        if (*o_seed) cfg.seed = seed;
        if (*o_threads) cfg.threads = threads;
        auto guard_value = [](const std::string& s, const char* name) {
            Integer g;
            if (g.set_str(s, 10) != 0) throw DomainError(std::string("guard ") + name + " is not an integer");
            if (g <= 0) throw GuardExceeded(std::string("guard ") + name + " must be positive");
            return g;
        };
        if (*o_guard) cfg.guards.enumeration = guard_value(guard, "--guard");
        if (*o_maxdeg) cfg.guards.max_degree = static_cast<unsigned>(guard_value(max_degree, "--max-degree").get_ui());
        if (*o_maxh) cfg.guards.max_height = static_cast<unsigned>(guard_value(max_height, "--max-height").get_ui());
        cfg.trace = trace;
        cfg.text = text;
    } catch (...) {
        std::string kind, message;
        int code = exit_for(std::current_exception(), kind, message);
        ojson e;
        e["error"] = {{"kind", kind}, {"message", message}};
        out << e.dump(2) << "\n";
        err << "lt-forge: " << message << "\n";
        return code;
    }
    RunResult r = run(cfg);
    out << r.output;
    err << r.error;
    return r.exit_code;
}

} // namespace ltforge::cli

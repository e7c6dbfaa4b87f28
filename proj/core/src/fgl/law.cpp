#include "ltforge/fgl/law.hpp"

#include <utility>

#include "ltforge/errors.hpp"

namespace ltforge::fgl {

using exact::Exponents;
using exact::ScalarKind;

namespace {

const std::vector<std::string> kXY{"X", "Y"};
const std::vector<std::string> kX{"X"};

Exponents xy(unsigned i, unsigned j) {
    Exponents e;
    e.e[0] = static_cast<std::uint16_t>(i);
    e.e[1] = static_cast<std::uint16_t>(j);
    return e;
}

TruncatedSeries sum_of_logs(const TruncatedSeries& log) {
    auto lx = series_rename(log, {"X"});
    auto ex = series_embed(lx, kXY, {0});
    auto ey = series_embed(lx, kXY, {1});
    return series_add(ex, ey);
}

FormalModuleLaw checked(TruncatedSeries F, std::string name, std::optional<Height> h,
                        std::optional<LawLogarithm> log) {
    try {
        return FormalModuleLaw(std::move(F), std::move(name), h, std::move(log));
    } catch (const DomainError& e) {
        throw InvariantError(std::string("built-in law failed validation: ") + e.what());
    }
}

std::optional<Height> height_if_char_p_field(const CoefficientRing& R, unsigned h) {
    if (R.scalar_kind() == ScalarKind::IntegersModPN) return Height{false, h};
    return std::nullopt;
}

} // namespace

std::optional<std::string> law_axiom_failure(const TruncatedSeries& F) {
    if (F.vars().size() != 2) return "law must have exactly two variables";
    const CoefficientRing& R = F.ring();
    const unsigned D = F.max_degree();
    if (D == 0) return "truncation degree must be positive";
    for (const auto& [e, c] : F.coefficients()) {
        if (e.e[1] == 0 && !(e.e[0] == 1 && c == R.one())) return "F(X, 0) != X";
        if (e.e[0] == 0 && !(e.e[1] == 1 && c == R.one())) return "F(0, Y) != Y";
    }
    if (F.coefficient(xy(1, 0)).is_zero()) return "F(X, 0) != X";
    if (F.coefficient(xy(0, 1)).is_zero()) return "F(0, Y) != Y";
    for (const auto& [e, c] : F.coefficients())
        if (!(F.coefficient(xy(e.e[1], e.e[0])) == c)) return "F is not commutative";

    const std::vector<std::string> xyz{"X", "Y", "Z"};
    auto Fxy = series_embed(F, xyz, {0, 1});
    auto Fyz = series_embed(F, xyz, {1, 2});
    auto X = TruncatedSeries::variable(R, xyz, 0, D);
    auto Z = TruncatedSeries::variable(R, xyz, 2, D);
    // F(F(X,Y),Z) against F(X,F(Y,Z)) = F(F(Y,Z),X)
    auto lhs = series_substitute(F, {Fxy, Z});
    auto rhs = series_substitute(F, {Fyz, X});
    if (!(lhs == rhs)) return "F is not associative through degree " + std::to_string(D);
    return std::nullopt;
}

FormalModuleLaw::FormalModuleLaw(TruncatedSeries F, std::string name, std::optional<Height> known_height,
                                 std::optional<LawLogarithm> logarithm)
    : FormalModuleLaw(Unchecked{}, std::move(F), std::move(name), known_height, std::move(logarithm)) {
    if (auto failure = law_axiom_failure(F_)) throw DomainError("invalid formal group law: " + *failure);
}

FormalModuleLaw::FormalModuleLaw(Unchecked, TruncatedSeries F, std::string name,
                                 std::optional<Height> known_height, std::optional<LawLogarithm> logarithm)
    : F_(series_rename(F, kXY)),
      name_(std::move(name)),
      known_height_(known_height),
      logarithm_(std::move(logarithm)),
      cache_(std::make_shared<Cache>()) {
    if (F.vars().size() != 2) throw DomainError("law must have exactly two variables");
}

TruncatedSeries FormalModuleLaw::apply(const TruncatedSeries& f, const TruncatedSeries& g) const {
    if (f.vars().size() != 1 || g.vars() != f.vars()) throw DomainError("apply: need univariate series in one variable");
    return series_substitute(F_, {f, g});
}

TruncatedSeries FormalModuleLaw::a_series_through(unsigned long a, unsigned D) const {
    const auto key = std::make_pair(a, D);
    {
        std::lock_guard lock(cache_->mutex);
        auto it = cache_->a_series.find(key);
        if (it != cache_->a_series.end()) return it->second;
    }
    const TruncatedSeries law = D == this->D() ? F_ : F_.truncate(D);
    TruncatedSeries x = TruncatedSeries::variable(ring(), kX, 0, D);
    TruncatedSeries r(ring(), kX, D);
    if (a != 0) {
        // addition chain over the binary digits of a
        int top = 63;
        while (!((a >> top) & 1UL)) --top;
        r = x;
        for (int b = top - 1; b >= 0; --b) {
            r = series_substitute(law, {r, r});
            if ((a >> b) & 1UL) r = series_substitute(law, {r, x});
        }
    }
    std::lock_guard lock(cache_->mutex);
    return cache_->a_series.emplace(key, std::move(r)).first->second;
}

TruncatedSeries FormalModuleLaw::a_series(unsigned long a) const { return a_series_through(a, D()); }

TruncatedSeries FormalModuleLaw::pm_series(const Integer& p, unsigned m) const {
    if (p <= 0 || !p.fits_ulong_p()) throw DomainError("pm_series: p must be a positive machine integer");
    if (m == 0) return TruncatedSeries::variable(ring(), kX, 0, D());
    TruncatedSeries base = a_series(p.get_ui());
    TruncatedSeries r = base;
    for (unsigned i = 1; i < m; ++i) r = series_compose(base, r);
    return r;
}

TruncatedSeries FormalModuleLaw::a_series_via_log(const Integer& a, unsigned D) const {
    if (!logarithm_) throw DomainError("law has no logarithm");
    TruncatedSeries ell = series_rename(logarithm_->at(D), kX);
    const CoefficientRing& L = ell.ring();
    TruncatedSeries g = solve_composition(ell, series_scale(ell, L.from_integer(a)));
    try {
        return series_change_ring(g, logarithm_->reduction);
    } catch (const DomainError& e) {
        throw InvariantError(std::string("[a]-series is not integral: ") + e.what());
    }
}

RingElement FormalModuleLaw::formal_sum(const RingElement& x, const RingElement& y) const {
    const CoefficientRing& R = ring();
    auto ox = R.nilpotency_order(x);
    auto oy = R.nilpotency_order(y);
    if (!ox || !oy) throw DomainError("formal_sum: arguments must be nilpotent");
    if ((*ox - 1) + (*oy - 1) > D())
        throw DomainError("formal_sum: truncation degree " + std::to_string(D()) + " too small for nilpotency orders");
    std::vector<RingElement> px{R.one()}, py{R.one()};
    while (px.size() < *ox) px.push_back(R.mul(px.back(), x));
    while (py.size() < *oy) py.push_back(R.mul(py.back(), y));
    std::vector<RingElement> partial;
    std::vector<std::pair<const RingElement*, const RingElement*>> pairs;
    partial.reserve(F_.coefficients().size());
    for (const auto& [e, c] : F_.coefficients()) {
        if (e.e[0] >= *ox || e.e[1] >= *oy) continue;
        partial.push_back(R.mul(c, px[e.e[0]]));
        pairs.emplace_back(&partial.back(), &py[e.e[1]]);
    }
    return R.sum_of_products(pairs);
}

RingElement FormalModuleLaw::formal_act(unsigned long a, const RingElement& x) const {
    const CoefficientRing& R = ring();
    auto o = R.nilpotency_order(x);
    if (!o) throw DomainError("formal_act: argument must be nilpotent");
    if (*o - 1 > D()) throw DomainError("formal_act: truncation degree too small for nilpotency order");
    if (a == 0 || x.is_zero()) return R.zero();
    TruncatedSeries s = a_series_through(a, std::max(1u, *o - 1));
    RingElement out = R.zero();
    RingElement power = R.one();
    for (unsigned k = 1; k < *o; ++k) {
        power = R.mul(power, x);
        RingElement c = s.coefficient(k);
        if (!c.is_zero()) out = R.add(out, R.mul(c, power));
    }
    return out;
}

FormalModuleLaw FormalModuleLaw::base_change(const RingHom& hom) const {
    std::optional<LawLogarithm> log;
    if (logarithm_) log = LawLogarithm{logarithm_->at, logarithm_->reduction.then(hom)};
    return FormalModuleLaw(Unchecked{}, series_change_ring(F_, hom), name_, known_height_, std::move(log));
}

nlohmann::ordered_json FormalModuleLaw::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name_;
    j["ring"] = ring().description();
    j["D"] = D();
    j["F"] = series_to_json(F_);
    if (!known_height_)
        j["knownHeight"] = nullptr;
    else if (known_height_->infinite)
        j["knownHeight"] = "infinity";
    else
        j["knownHeight"] = known_height_->value;
    return j;
}

FormalModuleLaw fgl_additive(const CoefficientRing& ring, unsigned D) {
    TruncatedSeries F = series_add(TruncatedSeries::variable(ring, kXY, 0, D), TruncatedSeries::variable(ring, kXY, 1, D));
    std::optional<Height> h;
    if (ring.scalar_kind() == ScalarKind::IntegersModPN && ring.prime_exponent() == 1) h = Height{true, 0};
    CoefficientRing lift = ring.rational_lift();
    LawLogarithm log{[lift](unsigned d) { return TruncatedSeries::variable(lift, kX, 0, d); },
                     RingHom::from_rational_lift(ring)};
    return checked(std::move(F), "additive", h, std::move(log));
}

FormalModuleLaw fgl_multiplicative(const CoefficientRing& ring, unsigned D) {
    TruncatedSeries F = series_add(TruncatedSeries::variable(ring, kXY, 0, D), TruncatedSeries::variable(ring, kXY, 1, D));
    F.accumulate(xy(1, 1), ring.one());
    CoefficientRing lift = ring.rational_lift();
    // log(1 + X)
    auto log_at = [lift](unsigned d) {
        TruncatedSeries l(lift, kX, d);
        for (unsigned k = 1; k <= d; ++k)
            l.set(exact::unit_exponents(0, k), lift.from_rational(BigRational(k % 2 ? 1 : -1, k)));
        return l;
    };
    return checked(std::move(F), "multiplicative", height_if_char_p_field(ring, 1),
                   LawLogarithm{log_at, RingHom::from_rational_lift(ring)});
}

FormalModuleLaw fgl_from_log(const TruncatedSeries& log, unsigned D) {
    const CoefficientRing& R = log.ring();
    if (!R.is_q_algebra()) throw DomainError("fgl_from_log: the ring must be a Q-algebra");
    if (log.vars().size() != 1) throw DomainError("fgl_from_log: logarithm must be univariate");
    if (log.max_degree() < D) throw DomainError("fgl_from_log: logarithm known only through degree " +
                                                std::to_string(log.max_degree()));
    if (!log.has_zero_constant_term()) throw DomainError("fgl_from_log: logarithm must vanish at 0");
    if (!R.is_unit(log.coefficient(1u))) throw DomainError("fgl_from_log: linear coefficient must be a unit");
    TruncatedSeries ell = series_rename(log, kX);
    TruncatedSeries inv = series_reversion(ell.truncate(D));
    TruncatedSeries F = series_compose(inv, sum_of_logs(ell.truncate(D)));
    std::vector<RingElement> gens;
    for (std::size_t i = 0; i < R.generator_count(); ++i) gens.push_back(R.generator(i));
    const unsigned known = log.max_degree();
    auto at = [ell, known](unsigned d) {
        if (d > known) throw DomainError("logarithm known only through degree " + std::to_string(known));
        return ell.truncate(d);
    };
    return FormalModuleLaw(std::move(F), "from-log", std::nullopt, LawLogarithm{at, RingHom(R, R, gens)});
}

TruncatedSeries fgl_log(const FormalModuleLaw& F) {
    const CoefficientRing& R = F.ring();
    if (!R.is_q_algebra()) throw DomainError("fgl_log: the ring must be a Q-algebra");
    const unsigned D = F.D();
    // l'(X) = 1 / (dF/dY)(X, 0)
    TruncatedSeries h(R, kX, D - 1);
    for (const auto& [e, c] : F.F().coefficients())
        if (e.e[1] == 1 && e.e[0] <= D - 1) h.set(exact::unit_exponents(0, e.e[0]), c);
    TruncatedSeries dl = series_inverse(h);
    TruncatedSeries l(R, kX, D);
    for (const auto& [e, c] : dl.coefficients())
        l.set(exact::unit_exponents(0, e.e[0] + 1u), R.scale(c, BigRational(1, e.e[0] + 1u)));
    return l;
}

TruncatedSeries law_series_through(const FormalModuleLaw& F, unsigned D) {
    if (D <= F.D()) return F.F().truncate(D);
    if (!F.logarithm()) throw DomainError("law_series_through: law has no logarithm");
    TruncatedSeries ell = series_rename(F.logarithm()->at(D), kX);
    TruncatedSeries FL = series_compose(series_reversion(ell), sum_of_logs(ell));
    try {
        return series_change_ring(FL, F.logarithm()->reduction);
    } catch (const DomainError& e) {
        throw InvariantError(std::string("law is not integral: ") + e.what());
    }
}

std::vector<RingElement> hazewinkel_log_coefficients(const CoefficientRing& ring, const Integer& p,
                                                     const std::vector<RingElement>& v, unsigned count) {
    if (!ring.is_q_algebra()) throw DomainError("hazewinkel_log_coefficients: the ring must be a Q-algebra");
    if (!exact::is_prime(p)) throw DomainError("hazewinkel_log_coefficients: p must be prime");
    if (!p.fits_ulong_p()) throw DomainError("hazewinkel_log_coefficients: p too large");
    std::vector<RingElement> m;
    if (count == 0) return m;
    m.push_back(ring.one());
    const BigRational inv_p(1, p);
    for (unsigned k = 1; k < count; ++k) {
        RingElement s = ring.zero();
        for (unsigned i = 1; i <= k && i <= v.size(); ++i) {
            if (v[i - 1].is_zero() || m[k - i].is_zero()) continue;
            Integer e = exact::integer_pow(p, k - i);
            if (!e.fits_ulong_p()) throw DomainError("hazewinkel_log_coefficients: exponent overflow");
            s = ring.add(s, ring.mul(m[k - i], ring.pow(v[i - 1], e.get_ui())));
        }
        m.push_back(ring.scale(s, inv_p));
    }
    return m;
}

namespace {

FormalModuleLaw ptypical_named(unsigned n, const Integer& p, const std::vector<RingElement>& v,
                               const CoefficientRing& ring, unsigned D, std::string name,
                               std::optional<Height> forced_height) {
    if (n == 0) throw DomainError("ptypical_universal: height must be positive");
    if (!exact::is_prime(p)) throw DomainError("ptypical_universal: p must be prime");
    if (ring.scalar_kind() == ScalarKind::IntegersModPN && ring.prime() != p)
        throw DomainError("ptypical_universal: coefficient ring has the wrong residue characteristic");
    if (Integer(D) < exact::integer_pow(p, n))
        throw DomainError("ptypical_universal: need D >= p^n to see the height");

    CoefficientRing lift = ring.rational_lift();
    std::vector<RingElement> vl;
    for (const auto& x : v) vl.push_back(ring.transport(x, lift));
    const unsigned long pu = p.get_ui();
    auto log_at = [lift, vl, pu](unsigned d) {
        unsigned count = 0;
        for (unsigned long q = 1; q <= d; q *= pu) ++count;
        auto m = hazewinkel_log_coefficients(lift, Integer(pu), vl, count);
        TruncatedSeries l(lift, kX, d);
        unsigned long q = 1;
        for (unsigned k = 0; k < count; ++k, q *= pu) l.set(exact::unit_exponents(0, static_cast<unsigned>(q)), m[k]);
        return l;
    };
    TruncatedSeries ell = log_at(D);
    TruncatedSeries FL = series_compose(series_reversion(ell), sum_of_logs(ell));
    RingHom red = RingHom::from_rational_lift(ring);
    TruncatedSeries F(ring, kXY, D);
    try {
        F = series_change_ring(FL, red);
    } catch (const DomainError& e) {
        throw InvariantError(std::string("p-typical law is not integral: ") + e.what());
    }

    std::optional<Height> h;
    if (ring.scalar_kind() == ScalarKind::IntegersModPN && ring.is_local() && v.size() >= n) {
        bool ok = ring.is_unit(v[n - 1]);
        for (unsigned i = 0; ok && i + 1 < n; ++i) ok = !ring.is_unit(v[i]);
        if (ok) h = Height{false, n};
    }
    if (forced_height) h = forced_height;
    return checked(std::move(F), std::move(name), h, LawLogarithm{log_at, red});
}

} // namespace

FormalModuleLaw ptypical_universal(unsigned n, const Integer& p, const std::vector<RingElement>& v,
                                   const CoefficientRing& ring, unsigned D) {
    return ptypical_named(n, p, v, ring, D, "ptypical", std::nullopt);
}

FormalModuleLaw honda_law(unsigned n, const Integer& p, unsigned D) {
    CoefficientRing Fp = CoefficientRing::prime_field(p);
    std::vector<RingElement> v(n, Fp.zero());
    if (n > 0) v[n - 1] = Fp.one();
    return ptypical_named(n, p, v, Fp, D, "honda", Height{false, n});
}

nlohmann::ordered_json DeformationRingPresentation::to_json() const {
    nlohmann::ordered_json j;
    j["base"] = base.description();
    j["ring"] = ring.description();
    j["variables"] = variables;
    j["height"] = height;
    j["precision"] = precision;
    j["nilpotency"] = nilpotency;
    j["D"] = D;
    return j;
}

UniversalDeformation universal_deformation(unsigned n, const Integer& p, unsigned N, unsigned D, unsigned K) {
    if (n == 0) throw DomainError("universal_deformation: height must be positive");
    if (N == 0) throw DomainError("universal_deformation: precision must be positive");
    if (K == 1) throw DomainError("universal_deformation: nilpotency must be 0 (formal) or at least 2");
    CoefficientRing base = CoefficientRing::integers_mod_prime_power(p, N);
    CoefficientRing R = base;
    std::vector<std::string> names;
    for (unsigned i = 1; i < n; ++i) {
        names.push_back("u" + std::to_string(i));
        R = K == 0 ? CoefficientRing::formal_variable(R, names.back())
                   : CoefficientRing::nilpotent_extension(R, names.back(), K);
    }
    std::vector<RingElement> v;
    for (unsigned i = 0; i + 1 < n; ++i) v.push_back(R.generator(i));
    v.push_back(R.one());
    // the known height is that of the closed fibre
    FormalModuleLaw law = ptypical_named(n, p, v, R, D, "universal-deformation", Height{false, n});
    return UniversalDeformation{std::move(law), DeformationRingPresentation{base, R, names, n, N, K, D}};
}

RingHom closed_fibre(const DeformationRingPresentation& presentation) {
    CoefficientRing Fp = CoefficientRing::prime_field(presentation.base.prime());
    std::vector<RingElement> images(presentation.ring.generator_count(), Fp.zero());
    return RingHom(presentation.ring, Fp, std::move(images));
}

HeightReport a_height(const FormalModuleLaw& F) {
    const CoefficientRing& R = F.ring();
    if (R.scalar_kind() != ScalarKind::IntegersModPN || R.prime_exponent() != 1 || R.generator_count() != 0)
        throw DomainError("a_height: the law must be defined over F_p");
    const Integer& p = R.prime();
    if (!p.fits_ulong_p()) throw DomainError("a_height: p too large");
    TruncatedSeries s = F.a_series(p.get_ui());
    auto w = exact::weierstrass_degree(s);
    HeightReport report;
    report.tested_degree = w.tested_degree;
    report.weierstrass_degree = w.degree;
    if (!w.degree) {
        report.height = Height{true, 0};
        return report;
    }
    Integer q = 1;
    unsigned h = 0;
    while (q < *w.degree) {
        q *= p;
        ++h;
    }
    if (q != *w.degree)
        throw DomainError("a_height: Weierstrass degree " + std::to_string(*w.degree) + " of [p] is not a power of p");
    report.height = Height{false, h};
    return report;
}

} // namespace ltforge::fgl

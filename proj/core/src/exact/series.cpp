#include "ltforge/exact/series.hpp"

#include <algorithm>

#include "ltforge/errors.hpp"

namespace ltforge::exact {

namespace {

void check_compatible(const TruncatedSeries& a, const TruncatedSeries& b, const char* op) {
    if (!(a.ring() == b.ring()))
        throw DomainError(std::string(op) + ": ring mismatch (" + a.ring().description() + " vs " +
                          b.ring().description() + ")");
    if (a.vars() != b.vars()) throw DomainError(std::string(op) + ": variable-set mismatch");
}

void require_univariate(const TruncatedSeries& a, const char* op) {
    if (a.vars().size() != 1) throw DomainError(std::string(op) + " needs a series in one variable");
}

// Same coefficients, truncation degree raised or lowered without checking.
TruncatedSeries with_degree(const TruncatedSeries& a, unsigned D) {
    TruncatedSeries r(a.ring(), a.vars(), D);
    for (const auto& [e, c] : a.coefficients())
        if (e.total() <= D) r.set(e, c);
    return r;
}

} // namespace

TruncatedSeries::TruncatedSeries(CoefficientRing ring, std::vector<std::string> vars, unsigned max_degree)
    : ring_(std::move(ring)), vars_(std::move(vars)), max_degree_(max_degree) {
    if (vars_.empty()) throw DomainError("series needs at least one variable");
    if (vars_.size() > kMaxVariables) throw DomainError("too many series variables");
    for (std::size_t i = 0; i < vars_.size(); ++i)
        for (std::size_t j = i + 1; j < vars_.size(); ++j)
            if (vars_[i] == vars_[j]) throw DomainError("duplicate series variable '" + vars_[i] + "'");
}

TruncatedSeries TruncatedSeries::variable(const CoefficientRing& ring, const std::vector<std::string>& vars,
                                          std::size_t index, unsigned max_degree) {
    TruncatedSeries r(ring, vars, max_degree);
    if (index >= vars.size()) throw DomainError("variable index out of range");
    r.set(unit_exponents(index, 1), ring.one());
    return r;
}

TruncatedSeries TruncatedSeries::constant(const CoefficientRing& ring, const std::vector<std::string>& vars,
                                          const RingElement& c, unsigned max_degree) {
    TruncatedSeries r(ring, vars, max_degree);
    r.set(Exponents{}, c);
    return r;
}

TruncatedSeries TruncatedSeries::univariate(const CoefficientRing& ring, const std::string& var,
                                            const std::vector<RingElement>& coefficients, unsigned max_degree) {
    TruncatedSeries r(ring, {var}, max_degree);
    for (std::size_t k = 0; k < coefficients.size() && k <= max_degree; ++k)
        r.set(unit_exponents(0, static_cast<unsigned>(k)), coefficients[k]);
    return r;
}

RingElement TruncatedSeries::coefficient(const Exponents& e) const {
    auto it = coeffs_.find(e);
    return it == coeffs_.end() ? RingElement{} : it->second;
}

RingElement TruncatedSeries::coefficient(unsigned k) const {
    if (vars_.size() != 1) throw DomainError("coefficient(k) needs a univariate series");
    return coefficient(unit_exponents(0, k));
}

std::vector<RingElement> TruncatedSeries::dense() const {
    if (vars_.size() != 1) throw DomainError("dense() needs a univariate series");
    std::vector<RingElement> out(max_degree_ + 1);
    for (const auto& [e, c] : coeffs_) out[e.e[0]] = c;
    return out;
}

void TruncatedSeries::accumulate(const Exponents& e, const RingElement& c) {
    if (c.is_zero() || e.total() > max_degree_) return;
    auto it = coeffs_.find(e);
    if (it == coeffs_.end()) {
        coeffs_.emplace(e, c);
        return;
    }
    it->second = ring_.add(it->second, c);
    if (it->second.is_zero()) coeffs_.erase(it);
}

void TruncatedSeries::set(const Exponents& e, RingElement c) {
    for (std::size_t i = vars_.size(); i < kMaxVariables; ++i)
        if (e.e[i] != 0) throw DomainError("exponent uses an unknown series variable");
    if (e.total() > max_degree_) return;
    if (c.is_zero()) coeffs_.erase(e);
    else coeffs_[e] = std::move(c);
}

bool TruncatedSeries::has_zero_constant_term() const {
    return coeffs_.empty() || coeffs_.begin()->first.total() != 0;
}

unsigned TruncatedSeries::order() const {
    return coeffs_.empty() ? max_degree_ + 1 : coeffs_.begin()->first.total();
}

TruncatedSeries TruncatedSeries::truncate(unsigned max_degree) const {
    if (max_degree > max_degree_) throw DomainError("cannot raise the truncation degree of a series");
    return with_degree(*this, max_degree);
}

bool TruncatedSeries::operator==(const TruncatedSeries& other) const {
    if (!(ring_ == other.ring_) || vars_ != other.vars_ || max_degree_ != other.max_degree_) return false;
    if (coeffs_.size() != other.coeffs_.size()) return false;
    auto it = other.coeffs_.begin();
    for (const auto& [e, c] : coeffs_) {
        if (!(e == it->first) || !(c == it->second)) return false;
        ++it;
    }
    return true;
}

bool equal_through(const TruncatedSeries& a, const TruncatedSeries& b, unsigned D) {
    check_compatible(a, b, "equal_through");
    if (D > a.max_degree() || D > b.max_degree()) throw DomainError("equal_through beyond truncation degree");
    return with_degree(a, D) == with_degree(b, D);
}

TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b) {
    check_compatible(a, b, "series_add");
    TruncatedSeries r = with_degree(a, std::min(a.max_degree(), b.max_degree()));
    for (const auto& [e, c] : b.coefficients()) r.accumulate(e, c);
    return r;
}

TruncatedSeries series_neg(const TruncatedSeries& a) {
    TruncatedSeries r(a.ring(), a.vars(), a.max_degree());
    for (const auto& [e, c] : a.coefficients()) r.set(e, a.ring().neg(c));
    return r;
}

TruncatedSeries series_sub(const TruncatedSeries& a, const TruncatedSeries& b) {
    check_compatible(a, b, "series_sub");
    return series_add(a, series_neg(b));
}

TruncatedSeries series_scale(const TruncatedSeries& a, const RingElement& c) {
    TruncatedSeries r(a.ring(), a.vars(), a.max_degree());
    if (c.is_zero()) return r;
    for (const auto& [e, x] : a.coefficients()) r.set(e, a.ring().mul(x, c));
    return r;
}

TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b) {
    check_compatible(a, b, "series_mul");
    const unsigned D = std::min(a.max_degree(), b.max_degree());
    const CoefficientRing& R = a.ring();
    TruncatedSeries r(R, a.vars(), D);
    if (a.is_zero() || b.is_zero()) return r;
    using Pairs = std::vector<std::pair<const RingElement*, const RingElement*>>;
    if (a.vars().size() == 1) {
        std::vector<const RingElement*> A(D + 1, nullptr), B(D + 1, nullptr);
        for (const auto& [e, c] : a.coefficients())
            if (e.e[0] <= D) A[e.e[0]] = &c;
        for (const auto& [e, c] : b.coefficients())
            if (e.e[0] <= D) B[e.e[0]] = &c;
        std::vector<unsigned> an, bn;
        for (unsigned i = 0; i <= D; ++i) {
            if (A[i]) an.push_back(i);
            if (B[i]) bn.push_back(i);
        }
        Pairs pairs;
        for (unsigned n = a.order() + b.order(); n <= D; ++n) {
            pairs.clear();
            for (unsigned i : an) {
                if (i > n) break;
                if (B[n - i]) pairs.emplace_back(A[i], B[n - i]);
            }
            if (!pairs.empty()) r.set(unit_exponents(0, n), R.sum_of_products(pairs));
        }
        return r;
    }
    std::map<Exponents, Pairs, GradedLess> buckets;
    for (const auto& [ea, ca] : a.coefficients()) {
        const unsigned ta = ea.total();
        if (ta > D) break;
        for (const auto& [eb, cb] : b.coefficients()) {
            if (ta + eb.total() > D) break;
            buckets[ea + eb].emplace_back(&ca, &cb);
        }
    }
    for (const auto& [e, pairs] : buckets) r.set(e, R.sum_of_products(pairs));
    return r;
}

TruncatedSeries series_pow(const TruncatedSeries& a, unsigned long k) {
    TruncatedSeries result = TruncatedSeries::constant(a.ring(), a.vars(), a.ring().one(), a.max_degree());
    if (k == 0) return result;
    if (!a.has_zero_constant_term() || k * a.order() <= a.max_degree()) {
        TruncatedSeries base = a;
        bool first = true;
        while (k > 0) {
            if (k & 1UL) {
                result = first ? base : series_mul(result, base);
                first = false;
            }
            k >>= 1;
            if (k > 0) base = series_mul(base, base);
        }
        return result;
    }
    return TruncatedSeries(a.ring(), a.vars(), a.max_degree());
}

TruncatedSeries series_compose(const TruncatedSeries& g, const TruncatedSeries& f) {
    require_univariate(g, "series_compose");
    if (!(g.ring() == f.ring())) throw DomainError("series_compose: ring mismatch");
    if (!f.has_zero_constant_term()) throw DomainError("series_compose: inner series has a nonzero constant term");
    const unsigned D = std::min(g.max_degree(), f.max_degree());
    TruncatedSeries inner = with_degree(f, D);
    TruncatedSeries result(f.ring(), f.vars(), D);
    if (g.is_zero()) return result;
    std::vector<std::pair<unsigned, const RingElement*>> terms;
    for (const auto& [e, c] : g.coefficients())
        if (e.e[0] <= D) terms.emplace_back(e.e[0], &c);
    std::reverse(terms.begin(), terms.end());
    unsigned prev = terms.front().first;
    result = TruncatedSeries::constant(f.ring(), f.vars(), *terms.front().second, D);
    for (std::size_t i = 1; i < terms.size(); ++i) {
        unsigned k = terms[i].first;
        result = series_mul(result, series_pow(inner, prev - k));
        result.accumulate(Exponents{}, *terms[i].second);
        prev = k;
    }
    if (prev > 0) result = series_mul(result, series_pow(inner, prev));
    return result;
}

namespace {

using TermRef = std::pair<Exponents, const RingElement*>;
using PowerCache = std::vector<std::vector<TruncatedSeries>>;

const TruncatedSeries& cached_power(PowerCache& cache, const std::vector<TruncatedSeries>& f, std::size_t v,
                                    unsigned k) {
    auto& row = cache[v];
    if (row.empty()) row.push_back(TruncatedSeries::constant(f[v].ring(), f[v].vars(), f[v].ring().one(), f[v].max_degree()));
    while (row.size() <= k) {
        if (row.size() * std::size_t(f[v].order()) > f[v].max_degree())
            row.push_back(TruncatedSeries(f[v].ring(), f[v].vars(), f[v].max_degree()));
        else
            row.push_back(series_mul(row.back(), f[v]));
    }
    return row[k];
}

// sum over k of f_v^k * (coefficient of x_v^k, itself substituted in the later variables)
TruncatedSeries substitute_rec(const std::vector<TermRef>& terms, std::size_t v, const std::vector<TruncatedSeries>& f,
                               const TruncatedSeries& zero, PowerCache& cache) {
    if (v == f.size()) {
        TruncatedSeries r = zero;
        for (const auto& [e, c] : terms) r.accumulate(Exponents{}, *c);
        return r;
    }
    std::map<unsigned, std::vector<TermRef>> groups;
    for (const auto& t : terms) groups[t.first.e[v]].push_back(t);
    TruncatedSeries result = zero;
    for (const auto& [k, group] : groups) {
        const TruncatedSeries& pk = cached_power(cache, f, v, k);
        if (pk.is_zero()) continue;
        TruncatedSeries inner = substitute_rec(group, v + 1, f, zero, cache);
        if (inner.is_zero()) continue;
        result = series_add(result, k == 0 ? inner : series_mul(pk, inner));
    }
    return result;
}

} // namespace

TruncatedSeries series_substitute(const TruncatedSeries& g, const std::vector<TruncatedSeries>& f) {
    if (f.size() != g.vars().size()) throw DomainError("series_substitute: need one series per variable");
    if (f.empty()) throw DomainError("series_substitute: no variables");
    unsigned D = g.max_degree();
    for (const auto& fi : f) {
        check_compatible(fi, f.front(), "series_substitute");
        if (!(fi.ring() == g.ring())) throw DomainError("series_substitute: ring mismatch");
        if (!fi.has_zero_constant_term())
            throw DomainError("series_substitute: substituted series has a nonzero constant term");
        D = std::min(D, fi.max_degree());
    }
    std::vector<TruncatedSeries> inner;
    for (const auto& fi : f) inner.push_back(with_degree(fi, D));
    std::vector<TermRef> terms;
    for (const auto& [e, c] : g.coefficients())
        if (e.total() <= D) terms.emplace_back(e, &c);
    TruncatedSeries zero(g.ring(), f.front().vars(), D);
    if (terms.empty()) return zero;
    PowerCache cache(inner.size());
    return substitute_rec(terms, 0, inner, zero, cache);
}

TruncatedSeries series_derivative(const TruncatedSeries& a, std::size_t var) {
    if (var >= a.vars().size()) throw DomainError("derivative variable out of range");
    TruncatedSeries r(a.ring(), a.vars(), a.max_degree() == 0 ? 0 : a.max_degree() - 1);
    for (const auto& [e, c] : a.coefficients()) {
        if (e.e[var] == 0) continue;
        Exponents d = e;
        d.e[var] -= 1;
        r.set(d, a.ring().scale(c, BigRational(e.e[var])));
    }
    return r;
}

TruncatedSeries series_inverse(const TruncatedSeries& a) {
    const CoefficientRing& R = a.ring();
    const unsigned D = a.max_degree();
    RingElement c0 = a.coefficient(Exponents{});
    RingElement inv0 = R.inverse(c0);
    if (a.vars().size() == 1) {
        std::vector<RingElement> c = a.dense();
        std::vector<RingElement> b(D + 1);
        b[0] = inv0;
        RingElement minus_inv0 = R.neg(inv0);
        std::vector<unsigned> support;
        for (unsigned i = 1; i <= D; ++i)
            if (!c[i].is_zero()) support.push_back(i);
        std::vector<std::pair<const RingElement*, const RingElement*>> pairs;
        for (unsigned n = 1; n <= D; ++n) {
            pairs.clear();
            for (unsigned i : support) {
                if (i > n) break;
                if (!b[n - i].is_zero()) pairs.emplace_back(&c[i], &b[n - i]);
            }
            if (!pairs.empty()) b[n] = R.mul(minus_inv0, R.sum_of_products(pairs));
        }
        return TruncatedSeries::univariate(R, a.vars()[0], b, D);
    }
    // a = c0 (1 - t), t of positive order
    TruncatedSeries t = series_neg(series_scale(a, inv0));
    t.set(Exponents{}, RingElement{});
    TruncatedSeries sum = TruncatedSeries::constant(R, a.vars(), R.one(), D);
    TruncatedSeries power = sum;
    for (unsigned k = 1; k <= D; ++k) {
        power = series_mul(power, t);
        if (power.is_zero()) break;
        sum = series_add(sum, power);
    }
    return series_scale(sum, inv0);
}

TruncatedSeries series_change_ring(const TruncatedSeries& a, const RingHom& hom) {
    if (!(hom.source() == a.ring())) throw DomainError("series_change_ring: homomorphism source mismatch");
    TruncatedSeries r(hom.target(), a.vars(), a.max_degree());
    for (const auto& [e, c] : a.coefficients()) r.set(e, hom(c));
    return r;
}

TruncatedSeries series_rename(const TruncatedSeries& a, const std::vector<std::string>& vars) {
    if (vars.size() != a.vars().size()) throw DomainError("series_rename: wrong number of variables");
    TruncatedSeries r(a.ring(), vars, a.max_degree());
    for (const auto& [e, c] : a.coefficients()) r.set(e, c);
    return r;
}

TruncatedSeries series_embed(const TruncatedSeries& a, const std::vector<std::string>& vars,
                             const std::vector<std::size_t>& positions) {
    if (positions.size() != a.vars().size()) throw DomainError("series_embed: wrong number of positions");
    TruncatedSeries r(a.ring(), vars, a.max_degree());
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (positions[i] >= vars.size()) throw DomainError("series_embed: position out of range");
    for (const auto& [e, c] : a.coefficients()) {
        Exponents n;
        for (std::size_t i = 0; i < positions.size(); ++i) n.e[positions[i]] = e.e[i];
        r.set(n, c);
    }
    return r;
}

TruncatedSeries solve_composition(const TruncatedSeries& ell, const TruncatedSeries& target) {
    require_univariate(ell, "solve_composition");
    require_univariate(target, "solve_composition");
    if (!(ell.ring() == target.ring())) throw DomainError("solve_composition: ring mismatch");
    if (!ell.has_zero_constant_term() || !target.has_zero_constant_term())
        throw DomainError("solve_composition: constant terms must vanish");
    const CoefficientRing& R = ell.ring();
    const unsigned D = std::min(ell.max_degree(), target.max_degree());
    RingElement inv1;
    try {
        inv1 = R.inverse(ell.coefficient(1u));
    } catch (const DomainError&) {
        throw DomainError("solve_composition: linear coefficient is not invertible");
    }
    const std::string& var = target.vars()[0];
    TruncatedSeries g = TruncatedSeries::univariate(R, var, {RingElement{}, R.mul(target.coefficient(1u), inv1)},
                                                    std::min(D, 1u));
    unsigned c = 1;
    while (c < D) {
        const unsigned P = std::min(2 * c + 1, D);
        TruncatedSeries gP = with_degree(g, P);
        TruncatedSeries ellP = ell.truncate(P);
        TruncatedSeries value = series_sub(series_compose(ellP, gP), target.truncate(P));
        // the correction has order > c, so the derivative is only needed through P - 1
        TruncatedSeries slope = with_degree(series_compose(series_derivative(ellP, 0), with_degree(gP, P - 1)), P);
        g = series_sub(gP, series_mul(value, series_inverse(slope)));
        c = P;
    }
    return g;
}

TruncatedSeries series_reversion(const TruncatedSeries& f) {
    require_univariate(f, "series_reversion");
    return solve_composition(f, TruncatedSeries::variable(f.ring(), f.vars(), 0, f.max_degree()));
}

namespace {

std::string coefficient_string(const CoefficientRing& R, const RingElement& c) { return R.format(c); }

} // namespace

nlohmann::ordered_json series_to_json(const TruncatedSeries& a) {
    nlohmann::ordered_json j;
    j["ring"] = a.ring().description();
    j["vars"] = a.vars();
    j["maxTotalDegree"] = a.max_degree();
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [e, c] : a.coefficients()) {
        nlohmann::ordered_json ex = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < a.vars().size(); ++i) ex.push_back(e.e[i]);
        terms.push_back(nlohmann::ordered_json::array({ex, coefficient_string(a.ring(), c)}));
    }
    j["terms"] = terms;
    return j;
}

TruncatedSeries series_from_json(const nlohmann::json& j, const CoefficientRing& ring) {
    try {
        if (j.at("ring").get<std::string>() != ring.description())
            throw DomainError("series ring '" + j.at("ring").get<std::string>() + "' does not match " +
                              ring.description());
        auto vars = j.at("vars").get<std::vector<std::string>>();
        TruncatedSeries r(ring, vars, j.at("maxTotalDegree").get<unsigned>());
        for (const auto& t : j.at("terms")) {
            const auto& ex = t.at(0);
            if (ex.size() != vars.size()) throw DomainError("series term has the wrong exponent length");
            Exponents e;
            for (std::size_t i = 0; i < vars.size(); ++i) e.e[i] = ex.at(i).get<std::uint16_t>();
            r.accumulate(e, ring.parse(t.at(1).get<std::string>()));
        }
        return r;
    } catch (const nlohmann::json::exception& err) {
        throw DomainError(std::string("malformed series JSON: ") + err.what());
    }
}

std::string format_series(const TruncatedSeries& a) {
    if (a.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : a.coefficients()) {
        std::string mono;
        for (std::size_t i = 0; i < a.vars().size(); ++i) {
            if (e.e[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += a.vars()[i];
            if (e.e[i] > 1) mono += "^" + std::to_string(e.e[i]);
        }
        std::string s = a.ring().format(c);
        bool composite = c.terms().size() > 1 || (c.terms().size() == 1 && c.terms()[0].exps.total() > 0);
        std::string piece;
        if (mono.empty()) piece = composite ? "(" + s + ")" : s;
        else if (s == "1") piece = mono;
        else if (s == "-1") piece = "-" + mono;
        else if (composite) piece = "(" + s + ")*" + mono;
        else piece = s + "*" + mono;
        if (first) out = piece;
        else if (piece[0] == '-') out += " - " + piece.substr(1);
        else out += " + " + piece;
        first = false;
    }
    return out;
}

MonicPolynomial::MonicPolynomial(CoefficientRing ring, std::string var, std::vector<RingElement> lower)
    : ring_(std::move(ring)), var_(std::move(var)), lower_(std::move(lower)) {}

MonicPolynomial MonicPolynomial::from_roots(const CoefficientRing& ring, const std::string& var,
                                            const std::vector<RingElement>& roots) {
    std::vector<RingElement> full{ring.one()};
    for (const auto& r : roots) {
        // (X - r) * sum full[i] X^i
        std::vector<RingElement> next(full.size() + 1);
        RingElement minus_r = ring.neg(r);
        for (std::size_t i = 0; i < full.size(); ++i) {
            next[i + 1] = ring.add(next[i + 1], full[i]);
            next[i] = ring.add(next[i], ring.mul(minus_r, full[i]));
        }
        full = std::move(next);
    }
    full.pop_back();
    return MonicPolynomial(ring, var, std::move(full));
}

MonicPolynomial MonicPolynomial::power_of_variable(const CoefficientRing& ring, const std::string& var, unsigned d) {
    return MonicPolynomial(ring, var, std::vector<RingElement>(d));
}

std::vector<RingElement> MonicPolynomial::coefficients() const {
    std::vector<RingElement> c = lower_;
    c.push_back(ring_.one());
    return c;
}

MonicPolynomial MonicPolynomial::multiply(const MonicPolynomial& other) const {
    if (!(ring_ == other.ring_)) throw DomainError("polynomial ring mismatch");
    auto a = coefficients();
    auto b = other.coefficients();
    std::vector<RingElement> c(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = ring_.add(c[i + j], ring_.mul(a[i], b[j]));
    c.pop_back();
    return MonicPolynomial(ring_, var_, std::move(c));
}

TruncatedSeries MonicPolynomial::to_series(unsigned max_degree) const {
    if (max_degree < degree()) throw DomainError("truncation degree below polynomial degree");
    return TruncatedSeries::univariate(ring_, var_, coefficients(), max_degree);
}

RingElement MonicPolynomial::evaluate(const RingElement& x) const {
    RingElement acc = ring_.one();
    for (std::size_t i = lower_.size(); i-- > 0;) acc = ring_.add(ring_.mul(acc, x), lower_[i]);
    return acc;
}

std::string MonicPolynomial::format() const {
    return format_series(to_series(degree()));
}

bool MonicPolynomial::operator==(const MonicPolynomial& other) const {
    return ring_ == other.ring_ && var_ == other.var_ && lower_ == other.lower_;
}

namespace {

DivisionResult divide_dense(const MonicPolynomial& d, std::vector<RingElement> r, unsigned D, const std::string& var) {
    const CoefficientRing& R = d.ring();
    const unsigned k = d.degree();
    std::vector<RingElement> q(D - k + 1);
    const auto& low = d.lower_coefficients();
    for (unsigned i = D + 1; i-- > k;) {
        if (r[i].is_zero()) continue;
        RingElement qi = r[i];
        for (unsigned j = 0; j < k; ++j)
            if (!low[j].is_zero()) r[i - k + j] = R.sub(r[i - k + j], R.mul(qi, low[j]));
        r[i] = RingElement{};
        q[i - k] = std::move(qi);
    }
    bool divides = true;
    for (unsigned i = 0; i < k; ++i)
        if (!r[i].is_zero()) divides = false;
    r.resize(k);
    return DivisionResult{divides, TruncatedSeries::univariate(R, var, q, D - k),
                          TruncatedSeries::univariate(R, var, r, D), D, false};
}

} // namespace

DivisionResult monic_divide(const MonicPolynomial& d, const TruncatedSeries& f) {
    require_univariate(f, "monic_divide");
    if (!(d.ring() == f.ring())) throw DomainError("monic_divide: ring mismatch");
    const unsigned D = f.max_degree();
    const unsigned k = d.degree();
    if (k > D) throw DomainError("monic_divide: truncation degree " + std::to_string(D) + " is below divisor degree " +
                                 std::to_string(k));
    DivisionResult res = divide_dense(d, f.dense(), D, f.vars()[0]);
    const CoefficientRing& R = f.ring();
    if (k == 0) {
        res.exact = true;
    } else if (R.is_finite() && R.is_local()) {
        auto e = R.maximal_ideal_nilpotency();
        bool distinguished = std::none_of(d.lower_coefficients().begin(), d.lower_coefficients().end(),
                                          [&](const RingElement& c) { return R.is_unit(c); });
        res.exact = e && distinguished && (D + 1) / k >= *e;
    }
    return res;
}

DivisionResult monic_divide(const MonicPolynomial& d, const MonicPolynomial& f) {
    if (!(d.ring() == f.ring())) throw DomainError("monic_divide: ring mismatch");
    const unsigned n = f.degree();
    if (d.degree() > n) {
        TruncatedSeries fs = f.to_series(std::max(n, 1u));
        return DivisionResult{false, TruncatedSeries(d.ring(), {f.variable()}, 0), fs, n, true};
    }
    DivisionResult res = divide_dense(d, f.coefficients(), n, f.variable());
    res.exact = true;
    return res;
}

WeierstrassDegree weierstrass_degree(const TruncatedSeries& f) {
    require_univariate(f, "weierstrass_degree");
    const CoefficientRing& R = f.ring();
    if (!R.is_local()) throw DomainError("weierstrass_degree: " + R.description() + " is a non-local ring");
    for (const auto& [e, c] : f.coefficients())
        if (R.is_unit(c)) return WeierstrassDegree{e.e[0], f.max_degree()};
    return WeierstrassDegree{std::nullopt, f.max_degree()};
}

WeierstrassPreparation weierstrass_prepare(const TruncatedSeries& f) {
    WeierstrassDegree wd = weierstrass_degree(f);
    if (!wd.degree)
        throw DomainError("weierstrass_prepare: no unit coefficient through degree " + std::to_string(wd.tested_degree));
    const CoefficientRing& R = f.ring();
    const std::string& var = f.vars()[0];
    const unsigned d = *wd.degree;
    const unsigned D = f.max_degree();
    if (d == 0)
        return WeierstrassPreparation{MonicPolynomial(R, var, {}), f, true, D};
    std::vector<RingElement> c = f.dense();
    TruncatedSeries P = TruncatedSeries::univariate(R, var, std::vector<RingElement>(c.begin(), c.begin() + d), D);
    TruncatedSeries E = TruncatedSeries::univariate(R, var, std::vector<RingElement>(c.begin() + d, c.end()), D - d);
    TruncatedSeries Einv = series_inverse(E);
    // X^d = q f + g mod X^(D+1); push the part of g at degree >= d into q until none is left
    std::vector<RingElement> g(D + 1);
    g[d] = R.one();
    TruncatedSeries q(R, {var}, D - d);
    auto e = R.maximal_ideal_nilpotency();
    const unsigned cap = e ? *e + 1 : 64;
    bool converged = false;
    for (unsigned iter = 0; iter <= cap; ++iter) {
        TruncatedSeries high = TruncatedSeries::univariate(R, var, std::vector<RingElement>(g.begin() + d, g.end()), D - d);
        if (high.is_zero()) {
            converged = true;
            break;
        }
        TruncatedSeries h = series_mul(high, Einv);
        q = series_add(q, h);
        TruncatedSeries hP = series_mul(with_degree(h, D), P);
        for (unsigned i = d; i <= D; ++i) g[i] = RingElement{};
        for (const auto& [ex, v] : hP.coefficients()) g[ex.e[0]] = R.sub(g[ex.e[0]], v);
    }
    if (!converged) throw DomainError("weierstrass_prepare: iteration did not converge in " + R.description());
    std::vector<RingElement> lower(d);
    for (unsigned i = 0; i < d; ++i) lower[i] = R.neg(g[i]);
    MonicPolynomial W(R, var, std::move(lower));
    TruncatedSeries U = series_inverse(with_degree(q, D));
    bool exact = false;
    if (R.is_finite() && e) exact = (D + 1) / d >= *e;
    if (exact) {
        DivisionResult check = monic_divide(W, f);
        if (!check.divides) throw InvariantError("weierstrass_prepare: distinguished factor does not divide");
    }
    return WeierstrassPreparation{std::move(W), std::move(U), exact, D};
}

} // namespace ltforge::exact

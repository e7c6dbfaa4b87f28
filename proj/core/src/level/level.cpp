#include "ltforge/level/level.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "ltforge/errors.hpp"

namespace ltforge::level {

using exact::MonicPolynomial;
using exact::ScalarKind;
using exact::TruncatedSeries;

namespace {

unsigned long prime_of(const FormalModuleLaw& F) {
    const CoefficientRing& R = F.ring();
    if (R.scalar_kind() != ScalarKind::IntegersModPN || !R.is_finite() || !R.is_local())
        throw DomainError("level structures need a law over a finite local ring, not " + R.description());
    return R.prime().get_ui();
}

unsigned long power(unsigned long p, unsigned m) {
    unsigned long q = 1;
    while (m--) q *= p;
    return q;
}

// runs body(i) for i in [0, count) on up to `threads` workers
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

template <class Pred>
std::vector<LevelMap> filter_maps(std::vector<LevelMap> maps, unsigned threads, Pred pred) {
    std::vector<char> keep(maps.size(), 0);
    parallel_for(maps.size(), threads, [&](std::size_t i) { keep[i] = pred(maps[i]) ? 1 : 0; });
    std::vector<LevelMap> out;
    for (std::size_t i = 0; i < maps.size(); ++i)
        if (keep[i]) out.push_back(std::move(maps[i]));
    return out;
}

const Integer kPointGuard = Integer(1) << 24;

} // namespace

LevelMap::LevelMap(const FormalModuleLaw& F, unsigned m, std::vector<RingElement> images)
    : shape_(make_shape(prime_of(F), m, static_cast<unsigned>(images.size()))), images_(std::move(images)) {
    const CoefficientRing& R = F.ring();
    const unsigned long q = shape_.modulus();
    for (const auto& x : images_) {
        if (!R.nilpotency_order(x)) throw DomainError("level map image " + R.format(x) + " is not in the maximal ideal");
        if (!F.formal_act(q, x).is_zero())
            throw DomainError("level map image " + R.format(x) + " is not killed by [p^" + std::to_string(m) + "]");
    }
}

nlohmann::ordered_json LevelMap::to_json(const CoefficientRing& ring) const {
    nlohmann::ordered_json j;
    j["m"] = shape_.m;
    j["n"] = shape_.n;
    auto& imgs = j["images"] = nlohmann::ordered_json::array();
    for (const auto& x : images_) imgs.push_back(ring.format(x));
    return j;
}

RingElement eval_level_map(const FormalModuleLaw& F, const LevelMap& phi, const ModuleElement& a) {
    check_element(phi.shape(), a);
    const CoefficientRing& R = F.ring();
    RingElement sum = R.zero();
    for (unsigned i = 0; i < phi.n(); ++i) {
        if (a[i] == 0) continue;
        RingElement term = F.formal_act(a[i], phi.images()[i]);
        sum = sum.is_zero() ? term : F.formal_sum(sum, term);
    }
    return sum;
}

DegenerationType DegenerationType::explicit_subset(const ModuleShape& s, std::vector<ModuleElement> elements) {
    for (const auto& a : elements) check_element(s, a);
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    return DegenerationType(s, ExplicitSubset{std::move(elements)});
}

DegenerationType DegenerationType::complement_of(const Submodule& V) {
    return DegenerationType(V.shape(), SubmoduleComplement{V});
}

DegenerationType DegenerationType::empty(const ModuleShape& s) { return explicit_subset(s, {}); }

DegenerationType DegenerationType::full(const ModuleShape& s) { return explicit_subset(s, all_elements(s, kPointGuard)); }

bool DegenerationType::contains(const ModuleElement& a) const {
    check_element(shape_, a);
    if (auto* e = std::get_if<ExplicitSubset>(&value_))
        return std::binary_search(e->elements.begin(), e->elements.end(), a);
    return !std::get<SubmoduleComplement>(value_).V.contains(a);
}

std::vector<ModuleElement> DegenerationType::excluded(const Integer& guard) const {
    if (auto* c = std::get_if<SubmoduleComplement>(&value_)) return c->V.elements(guard);
    std::vector<ModuleElement> out;
    for (auto& a : all_elements(shape_, guard))
        if (!contains(a)) out.push_back(std::move(a));
    return out;
}

bool DegenerationType::is_subset_of(const DegenerationType& other, const Integer& guard) const {
    if (!(shape_ == other.shape_)) throw DomainError("degeneration types live in different modules");
    for (const auto& a : all_elements(shape_, guard))
        if (contains(a) && !other.contains(a)) return false;
    return true;
}

std::string DegenerationType::format() const {
    if (auto* c = std::get_if<SubmoduleComplement>(&value_)) return "cancel(" + c->V.format() + ")";
    std::string s = "{";
    const auto& el = std::get<ExplicitSubset>(value_).elements;
    for (std::size_t i = 0; i < el.size(); ++i) s += (i ? "," : "") + format_element(el[i]);
    return s + "}";
}

DegenerationType parse_degeneration_type(const ModuleShape& s, const std::string& text) {
    std::string t;
    for (char c : text)
        if (c != ' ') t += c;
    if (t == "empty") return DegenerationType::empty(s);
    if (t == "full") return DegenerationType::full(s);
    if (t.rfind("cancel(", 0) == 0 && t.back() == ')')
        return DegenerationType::complement_of(parse_submodule(s, t.substr(7, t.size() - 8)));
    if (t.size() >= 2 && t.front() == '{' && t.back() == '}')
        return DegenerationType::explicit_subset(s, parse_element_list(s, t.substr(1, t.size() - 2)));
    throw DomainError("cannot parse degeneration type '" + text + "'");
}

nlohmann::ordered_json DegenerationType::to_json() const {
    nlohmann::ordered_json j;
    if (auto* c = std::get_if<SubmoduleComplement>(&value_)) {
        j["kind"] = "complement";
        j["submodule"] = c->V.to_json();
    } else {
        j["kind"] = "subset";
        j["elements"] = std::get<ExplicitSubset>(value_).elements;
    }
    return j;
}

DivisibilityVerdict product_divides(const FormalModuleLaw& F, const LevelMap& phi,
                                    const std::vector<ModuleElement>& points, const TruncatedSeries& f) {
    std::vector<RingElement> roots;
    roots.reserve(points.size());
    for (const auto& a : points) roots.push_back(eval_level_map(F, phi, a));
    MonicPolynomial d = MonicPolynomial::from_roots(F.ring(), f.vars()[0], roots);
    if (d.degree() > f.max_degree())
        throw DomainError("truncation degree " + std::to_string(f.max_degree()) + " is smaller than the product degree " +
                          std::to_string(d.degree()));
    auto res = exact::monic_divide(d, f);
    return DivisibilityVerdict{res.divides, res.exact, d.degree(), res.tested_degree};
}

DrinfeldReport drinfeld_report(const FormalModuleLaw& F, const LevelMap& phi) {
    const ModuleShape& s = phi.shape();
    DrinfeldReport r;
    r.form1 = product_divides(F, phi, p_torsion_submodule(s).elements(kPointGuard), F.a_series(s.p));
    r.form2 = product_divides(F, phi, all_elements(s, kPointGuard), F.a_series(s.modulus()));
    if (r.form1.exact && r.form2.exact && r.form1.divides != r.form2.divides)
        throw InvariantError("the two forms of the Drinfeld condition disagree");
    return r;
}

bool drinfeld_check(const FormalModuleLaw& F, const LevelMap& phi) { return drinfeld_report(F, phi).form1.divides; }

DivisibilityVerdict degenerating_report(const FormalModuleLaw& F, const LevelMap& phi, const DegenerationType& S) {
    if (!(S.shape() == phi.shape())) throw DomainError("degeneration type and level map have different shapes");
    return product_divides(F, phi, S.excluded(kPointGuard), F.a_series(phi.shape().modulus()));
}

bool degenerating_check(const FormalModuleLaw& F, const LevelMap& phi, const DegenerationType& S) {
    return degenerating_report(F, phi, S).divides;
}

DivisibilityVerdict partial_drinfeld_report(const FormalModuleLaw& F, const LevelMap& phi, const PartialDomain& D) {
    if (!(D.shape() == phi.shape())) throw DomainError("partial domain and level map have different shapes");
    if (!D.is_p_torsion()) throw DomainError("partial domain " + D.format() + " is not killed by p");
    return product_divides(F, phi, D.elements(kPointGuard), F.a_series(phi.shape().p));
}

bool partial_drinfeld_check(const FormalModuleLaw& F, const LevelMap& phi, const PartialDomain& D) {
    return partial_drinfeld_report(F, phi, D).divides;
}

std::vector<RingElement> torsion_points(const FormalModuleLaw& F, unsigned m, const EnumerationOptions& opts) {
    const unsigned long q = power(prime_of(F), m);
    std::vector<RingElement> ideal = F.ring().maximal_ideal(opts.guard);
    std::vector<char> keep(ideal.size(), 0);
    parallel_for(ideal.size(), opts.threads, [&](std::size_t i) { keep[i] = F.formal_act(q, ideal[i]).is_zero(); });
    std::vector<RingElement> out;
    for (std::size_t i = 0; i < ideal.size(); ++i)
        if (keep[i]) out.push_back(ideal[i]);
    return out;
}

std::vector<LevelMap> enumerate_level_maps(const FormalModuleLaw& F, unsigned m, unsigned n,
                                           const EnumerationOptions& opts) {
    if (n == 0) throw DomainError("enumerate_level_maps: n must be positive");
    std::vector<RingElement> T = torsion_points(F, m, opts);
    Integer count = exact::integer_pow(Integer(static_cast<unsigned long>(T.size())), n);
    if (count > opts.guard)
        throw GuardExceeded("there are " + count.get_str() + " level maps, above the guard " + opts.guard.get_str());
    std::vector<LevelMap> out;
    out.reserve(count.get_ui());
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        std::vector<RingElement> images;
        for (std::size_t i : idx) images.push_back(T[i]);
        out.emplace_back(F, m, std::move(images));
        int i = static_cast<int>(n) - 1;
        while (i >= 0 && idx[i] + 1 == T.size()) idx[i--] = 0;
        if (i < 0) break;
        ++idx[i];
    }
    return out;
}

std::vector<LevelMap> enumerate_drinfeld(const FormalModuleLaw& F, unsigned m, unsigned n,
                                         const EnumerationOptions& opts) {
    return filter_maps(enumerate_level_maps(F, m, n, opts), opts.threads,
                       [&](const LevelMap& phi) { return drinfeld_check(F, phi); });
}

std::vector<LevelMap> enumerate_degenerating(const FormalModuleLaw& F, unsigned m, unsigned n,
                                             const DegenerationType& S, const EnumerationOptions& opts) {
    return filter_maps(enumerate_level_maps(F, m, n, opts), opts.threads,
                       [&](const LevelMap& phi) { return degenerating_check(F, phi, S); });
}

unsigned exact_check_degree(const CoefficientRing& ring, unsigned long p, unsigned m, unsigned n) {
    auto e = ring.maximal_ideal_nilpotency();
    if (!e) throw DomainError("exact_check_degree: " + ring.description() + " has no nilpotent maximal ideal");
    const unsigned long k = power(p, m * n);
    return static_cast<unsigned>(std::max<unsigned long>(k, *e * k - 1));
}

} // namespace ltforge::level

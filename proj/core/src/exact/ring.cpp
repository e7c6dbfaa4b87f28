#include "ltforge/exact/ring.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>

#include "ltforge/errors.hpp"

namespace ltforge::exact {

unsigned Exponents::total() const noexcept {
    unsigned s = 0;
    for (auto v : e) s += v;
    return s;
}

Exponents operator+(const Exponents& a, const Exponents& b) {
    Exponents r;
    for (std::size_t i = 0; i < kMaxVariables; ++i) {
        unsigned v = unsigned(a.e[i]) + unsigned(b.e[i]);
        if (v > 0xFFFFu) throw DomainError("exponent overflow");
        r.e[i] = static_cast<std::uint16_t>(v);
    }
    return r;
}

Exponents unit_exponents(std::size_t index, unsigned power) {
    if (index >= kMaxVariables) throw DomainError("variable index out of range");
    if (power > 0xFFFFu) throw DomainError("exponent overflow");
    Exponents r;
    r.e[index] = static_cast<std::uint16_t>(power);
    return r;
}

bool GradedLess::operator()(const Exponents& a, const Exponents& b) const noexcept {
    unsigned ta = a.total(), tb = b.total();
    if (ta != tb) return ta < tb;
    for (std::size_t i = 0; i < kMaxVariables; ++i)
        if (a.e[i] != b.e[i]) return a.e[i] > b.e[i];
    return false;
}

bool RingElement::operator==(const RingElement& other) const {
    if (terms_.size() != other.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i)
        if (!(terms_[i].exps == other.terms_[i].exps) || terms_[i].coeff != other.terms_[i].coeff) return false;
    return true;
}

Integer integer_pow(const Integer& base, unsigned long k) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), k);
    return r;
}

bool is_prime(const Integer& n) {
    if (n < 2) return false;
    return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}

unsigned valuation(const Integer& n, const Integer& p) {
    if (n == 0) throw DomainError("valuation of zero");
    Integer m = abs(n);
    unsigned v = 0;
    while (mpz_divisible_p(m.get_mpz_t(), p.get_mpz_t())) {
        m /= p;
        ++v;
    }
    return v;
}

std::string to_string(const BigRational& q) { return q.get_str(); }

namespace {

using TermMap = std::map<Exponents, BigRational, GradedLess>;

enum class GenKind { Nilpotent, Formal, Root };

struct Generator {
    std::string name;
    GenKind kind = GenKind::Formal;
    std::optional<unsigned> degree;
    // name^degree = tail; tail only involves this and earlier generators
    RingElement tail;
    // lower relation coefficients as elements of the prefix ring (Root only)
    std::vector<RingElement> lower;
    // powers[i] = name^(degree + i), reduced
    std::vector<RingElement> powers;
};

} // namespace

struct CoefficientRing::Impl {
    ScalarKind kind = ScalarKind::Integers;
    Integer p = 0;
    unsigned N = 0;
    Integer modulus = 0;
    std::vector<Generator> gens;
    std::string description;
    bool local = false;

    mutable std::once_flag nil_once;
    mutable std::optional<unsigned> m_nil;
    mutable std::once_flag gen_nil_once;
    mutable std::optional<unsigned> gen_nil;

    Impl() = default;
    Impl(const Impl& o)
        : kind(o.kind), p(o.p), N(o.N), modulus(o.modulus), gens(o.gens), description(o.description),
          local(o.local) {}
};

namespace {

std::string scalar_description(ScalarKind kind, const Integer& p, unsigned N) {
    switch (kind) {
    case ScalarKind::Integers: return "Z";
    case ScalarKind::Rationals: return "Q";
    case ScalarKind::IntegersModPN:
        if (N == 1) return "F" + p.get_str();
        return "Z/" + p.get_str() + "^" + std::to_string(N);
    }
    return "?";
}

bool all_relations(const std::vector<Generator>& gens) {
    return std::all_of(gens.begin(), gens.end(), [](const Generator& g) { return g.degree.has_value(); });
}

} // namespace

std::shared_ptr<CoefficientRing::Impl> CoefficientRing::finish(std::shared_ptr<Impl> impl) {
    if (impl->gens.size() > kMaxVariables) throw DomainError("too many generators");
    for (auto& g : impl->gens) g.powers.clear();
    CoefficientRing view{std::shared_ptr<const Impl>(impl)};
    const std::size_t G = impl->gens.size();
    for (std::size_t j = 0; j < G; ++j) {
        auto& g = impl->gens[j];
        if (!g.degree) continue;
        const unsigned d = *g.degree;
        const std::size_t limit = (2 + (G - 1 - j)) * std::size_t(d);
        g.powers.push_back(g.tail);
        RingElement x = view.from_terms({Term{unit_exponents(j, 1), BigRational(1)}});
        for (std::size_t k = d + 1; k < limit; ++k) {
            RingElement next = view.mul(x, impl->gens[j].powers.back());
            impl->gens[j].powers.push_back(std::move(next));
        }
    }
    // local: every non-leading relation coefficient lies in (p, earlier generators)
    bool local = impl->kind != ScalarKind::Integers;
    for (std::size_t j = 0; j < G && local; ++j) {
        const auto& g = impl->gens[j];
        if (!g.degree) continue;
        for (const auto& t : g.tail.terms()) {
            bool pure = true;
            for (std::size_t i = 0; i < kMaxVariables; ++i)
                if (i != j && t.exps.e[i] != 0) pure = false;
            if (!pure) continue;
            if (impl->kind == ScalarKind::Rationals) {
                local = false;
            } else if (!mpz_divisible_p(t.coeff.get_num_mpz_t(), impl->p.get_mpz_t())) {
                local = false;
            }
        }
    }
    impl->local = local;
    return impl;
}

CoefficientRing CoefficientRing::integers() {
    static const CoefficientRing z = [] {
        auto impl = std::make_shared<Impl>();
        impl->kind = ScalarKind::Integers;
        impl->description = "Z";
        return CoefficientRing(finish(impl));
    }();
    return z;
}

CoefficientRing CoefficientRing::rationals() {
    static const CoefficientRing q = [] {
        auto impl = std::make_shared<Impl>();
        impl->kind = ScalarKind::Rationals;
        impl->description = "Q";
        return CoefficientRing(finish(impl));
    }();
    return q;
}

CoefficientRing CoefficientRing::integers_mod_prime_power(const Integer& p, unsigned exponent) {
    if (!is_prime(p)) throw DomainError("modulus base " + p.get_str() + " is not prime");
    if (exponent < 1) throw DomainError("prime exponent must be at least 1");
    auto impl = std::make_shared<Impl>();
    impl->kind = ScalarKind::IntegersModPN;
    impl->p = p;
    impl->N = exponent;
    impl->modulus = integer_pow(p, exponent);
    impl->description = scalar_description(impl->kind, p, exponent);
    return CoefficientRing(finish(impl));
}

CoefficientRing CoefficientRing::prime_field(const Integer& p) { return integers_mod_prime_power(p, 1); }

namespace {

void check_new_name(const CoefficientRing& base, const std::string& name) {
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
        throw DomainError("invalid generator name '" + name + "'");
    for (char c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            throw DomainError("invalid generator name '" + name + "'");
    if (base.generator_index(name)) throw DomainError("generator '" + name + "' already present");
    if (base.generator_count() >= kMaxVariables) throw DomainError("too many generators");
}

} // namespace

CoefficientRing CoefficientRing::nilpotent_extension(const CoefficientRing& base, const std::string& name,
                                                     unsigned k) {
    if (k < 2) throw DomainError("nilpotency degree must be at least 2");
    check_new_name(base, name);
    auto impl = std::make_shared<Impl>(*base.impl_);
    Generator g;
    g.name = name;
    g.kind = GenKind::Nilpotent;
    g.degree = k;
    impl->gens.push_back(std::move(g));
    impl->description = base.description() + "[" + name + "]/(" + name + "^" + std::to_string(k) + ")";
    return CoefficientRing(finish(impl));
}

CoefficientRing CoefficientRing::formal_variable(const CoefficientRing& base, const std::string& name) {
    check_new_name(base, name);
    auto impl = std::make_shared<Impl>(*base.impl_);
    Generator g;
    g.name = name;
    g.kind = GenKind::Formal;
    impl->gens.push_back(std::move(g));
    impl->description = base.description() + "[[" + name + "]]";
    return CoefficientRing(finish(impl));
}

CoefficientRing CoefficientRing::adjoin_root(const CoefficientRing& base, const std::string& name,
                                             const std::vector<RingElement>& lower_coefficients) {
    if (lower_coefficients.empty()) throw DomainError("relation must have degree at least 1");
    check_new_name(base, name);
    const std::size_t j = base.generator_count();
    const unsigned d = static_cast<unsigned>(lower_coefficients.size());
    // tail = -sum c_i name^i
    std::vector<Term> tail;
    std::string poly = d == 1 ? name : name + "^" + std::to_string(d);
    for (unsigned i = d; i-- > 0;) {
        const RingElement& c = lower_coefficients[i];
        for (const auto& t : c.terms()) {
            if (t.exps.e[j] != 0) throw DomainError("relation coefficient uses the new generator");
            Exponents ex = t.exps;
            ex.e[j] = static_cast<std::uint16_t>(i);
            tail.push_back(Term{ex, -t.coeff});
        }
        if (c.is_zero()) continue;
        std::string s = base.format(c);
        bool composite = c.terms().size() > 1 || s.find('*') != std::string::npos;
        std::string piece;
        if (i == 0) {
            piece = c.terms().size() > 1 ? "(" + s + ")" : s;
        } else {
            std::string mono = i == 1 ? name : name + "^" + std::to_string(i);
            if (s == "1") piece = mono;
            else if (composite) piece = "(" + s + ")*" + mono;
            else piece = s + "*" + mono;
        }
        poly += " + " + piece;
    }
    auto impl = std::make_shared<Impl>(*base.impl_);
    Generator g;
    g.name = name;
    g.kind = GenKind::Root;
    g.degree = d;
    g.lower = lower_coefficients;
    impl->gens.push_back(std::move(g));
    impl->description = base.description() + "[" + name + "]/(" + poly + ")";
    // normalize the tail in the extended ring view (no relation on the new generator yet applies
    // because every exponent of it is below d)
    {
        auto probe = std::make_shared<Impl>(*impl);
        probe->gens.back().degree.reset();
        CoefficientRing view{finish(probe)};
        impl->gens.back().tail = view.from_terms(std::move(tail));
    }
    return CoefficientRing(finish(impl));
}

ScalarKind CoefficientRing::scalar_kind() const noexcept { return impl_->kind; }
const Integer& CoefficientRing::prime() const noexcept { return impl_->p; }
unsigned CoefficientRing::prime_exponent() const noexcept { return impl_->N; }
const Integer& CoefficientRing::modulus() const noexcept { return impl_->modulus; }
std::size_t CoefficientRing::generator_count() const noexcept { return impl_->gens.size(); }

const std::string& CoefficientRing::generator_name(std::size_t i) const {
    if (i >= impl_->gens.size()) throw DomainError("generator index out of range");
    return impl_->gens[i].name;
}

std::optional<std::size_t> CoefficientRing::generator_index(std::string_view name) const {
    for (std::size_t i = 0; i < impl_->gens.size(); ++i)
        if (impl_->gens[i].name == name) return i;
    return std::nullopt;
}

std::optional<unsigned> CoefficientRing::relation_degree(std::size_t i) const {
    if (i >= impl_->gens.size()) throw DomainError("generator index out of range");
    return impl_->gens[i].degree;
}

CoefficientRing CoefficientRing::prefix(std::size_t count) const {
    if (count > impl_->gens.size()) throw DomainError("prefix longer than generator list");
    if (count == impl_->gens.size()) return *this;
    CoefficientRing r = impl_->kind == ScalarKind::Integers    ? integers()
                        : impl_->kind == ScalarKind::Rationals ? rationals()
                                                               : integers_mod_prime_power(impl_->p, impl_->N);
    for (std::size_t j = 0; j < count; ++j) {
        const auto& g = impl_->gens[j];
        switch (g.kind) {
        case GenKind::Nilpotent: r = nilpotent_extension(r, g.name, *g.degree); break;
        case GenKind::Formal: r = formal_variable(r, g.name); break;
        case GenKind::Root: {
            std::vector<RingElement> lower;
            for (const auto& c : g.lower) lower.push_back(r.from_terms(c.terms()));
            r = adjoin_root(r, g.name, lower);
            break;
        }
        }
    }
    return r;
}

bool CoefficientRing::is_finite() const noexcept {
    return impl_->kind == ScalarKind::IntegersModPN && all_relations(impl_->gens);
}
bool CoefficientRing::is_local() const noexcept { return impl_->local; }
bool CoefficientRing::is_field() const noexcept {
    return impl_->gens.empty() &&
           (impl_->kind == ScalarKind::Rationals || (impl_->kind == ScalarKind::IntegersModPN && impl_->N == 1));
}
bool CoefficientRing::is_q_algebra() const noexcept { return impl_->kind == ScalarKind::Rationals; }
const std::string& CoefficientRing::description() const noexcept { return impl_->description; }
bool CoefficientRing::operator==(const CoefficientRing& other) const noexcept {
    return impl_ == other.impl_ || impl_->description == other.impl_->description;
}

BigRational CoefficientRing::normalize_scalar(const BigRational& c) const {
    switch (impl_->kind) {
    case ScalarKind::Integers:
        if (c.get_den() != 1) throw DomainError("non-integral scalar " + c.get_str() + " in " + impl_->description);
        return c;
    case ScalarKind::Rationals: return c;
    case ScalarKind::IntegersModPN: {
        Integer num = c.get_num();
        if (c.get_den() != 1) {
            Integer inv;
            if (mpz_invert(inv.get_mpz_t(), c.get_den_mpz_t(), impl_->modulus.get_mpz_t()) == 0)
                throw DomainError("denominator of " + c.get_str() + " is not invertible in " + impl_->description);
            num *= inv;
        }
        Integer r;
        mpz_fdiv_r(r.get_mpz_t(), num.get_mpz_t(), impl_->modulus.get_mpz_t());
        return BigRational(r);
    }
    }
    return c;
}

RingElement CoefficientRing::generator_power(std::size_t j, unsigned k) const {
    const auto& g = impl_->gens[j];
    if (!g.degree || k < *g.degree) {
        RingElement r;
        r.terms_.push_back(Term{unit_exponents(j, k), BigRational(1)});
        return r;
    }
    const unsigned d = *g.degree;
    std::size_t idx = k - d;
    if (idx < g.powers.size()) return g.powers[idx];
    const unsigned last = static_cast<unsigned>(d + g.powers.size() - 1);
    return mul(g.powers.back(), generator_power(j, k - last));
}

RingElement CoefficientRing::reduce_terms(std::vector<Term> raw) const {
    RingElement out;
    if (impl_->gens.empty()) {
        BigRational s = 0;
        for (const auto& t : raw) s += t.coeff;
        s = normalize_scalar(s);
        if (s != 0) out.terms_.push_back(Term{Exponents{}, s});
        return out;
    }
    TermMap acc;
    for (auto& t : raw) {
        for (std::size_t i = impl_->gens.size(); i < kMaxVariables; ++i)
            if (t.exps.e[i] != 0) throw DomainError("monomial uses an unknown generator");
        auto [it, inserted] = acc.try_emplace(t.exps, t.coeff);
        if (!inserted) it->second += t.coeff;
    }
    for (std::size_t j = impl_->gens.size(); j-- > 0;) {
        const auto& g = impl_->gens[j];
        if (!g.degree) continue;
        const unsigned d = *g.degree;
        std::vector<std::pair<Exponents, BigRational>> hits;
        for (auto it = acc.begin(); it != acc.end();) {
            if (it->first.e[j] >= d) {
                hits.emplace_back(it->first, std::move(it->second));
                it = acc.erase(it);
            } else {
                ++it;
            }
        }
        for (auto& [ex, c] : hits) {
            if (c == 0) continue;
            const unsigned k = ex.e[j];
            Exponents rest = ex;
            rest.e[j] = 0;
            RingElement tmp;
            const RingElement* pw;
            if (k - d < g.powers.size()) {
                pw = &g.powers[k - d];
            } else {
                tmp = generator_power(j, k);
                pw = &tmp;
            }
            for (const auto& t : pw->terms_) {
                auto [it, inserted] = acc.try_emplace(rest + t.exps, c * t.coeff);
                if (!inserted) it->second += c * t.coeff;
            }
        }
    }
    out.terms_.reserve(acc.size());
    for (auto& [ex, c] : acc) {
        if (c == 0) continue;
        BigRational n = normalize_scalar(c);
        if (n != 0) out.terms_.push_back(Term{ex, std::move(n)});
    }
    return out;
}

RingElement CoefficientRing::zero() const { return RingElement{}; }
RingElement CoefficientRing::one() const { return from_integer(1); }
RingElement CoefficientRing::from_integer(const Integer& n) const { return from_rational(BigRational(n)); }
RingElement CoefficientRing::from_int(long n) const { return from_rational(BigRational(n)); }

RingElement CoefficientRing::from_rational(const BigRational& q) const {
    RingElement r;
    BigRational c = normalize_scalar(q);
    if (c != 0) r.terms_.push_back(Term{Exponents{}, c});
    return r;
}

RingElement CoefficientRing::generator(std::size_t i) const {
    if (i >= impl_->gens.size()) throw DomainError("generator index out of range");
    return from_terms({Term{unit_exponents(i, 1), BigRational(1)}});
}

RingElement CoefficientRing::generator(std::string_view name) const {
    auto idx = generator_index(name);
    if (!idx) throw DomainError("unknown generator '" + std::string(name) + "' in " + impl_->description);
    return generator(*idx);
}

RingElement CoefficientRing::from_terms(std::vector<Term> terms) const { return reduce_terms(std::move(terms)); }

RingElement CoefficientRing::add(const RingElement& a, const RingElement& b) const {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    RingElement r;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    GradedLess less;
    std::size_t i = 0, j = 0;
    while (i < a.terms_.size() || j < b.terms_.size()) {
        if (j == b.terms_.size() || (i < a.terms_.size() && less(a.terms_[i].exps, b.terms_[j].exps))) {
            r.terms_.push_back(a.terms_[i++]);
        } else if (i == a.terms_.size() || less(b.terms_[j].exps, a.terms_[i].exps)) {
            r.terms_.push_back(b.terms_[j++]);
        } else {
            BigRational c = normalize_scalar(a.terms_[i].coeff + b.terms_[j].coeff);
            if (c != 0) r.terms_.push_back(Term{a.terms_[i].exps, std::move(c)});
            ++i;
            ++j;
        }
    }
    return r;
}

RingElement CoefficientRing::neg(const RingElement& a) const {
    RingElement r;
    r.terms_.reserve(a.terms_.size());
    for (const auto& t : a.terms_) {
        BigRational c = normalize_scalar(-t.coeff);
        if (c != 0) r.terms_.push_back(Term{t.exps, std::move(c)});
    }
    return r;
}

RingElement CoefficientRing::sub(const RingElement& a, const RingElement& b) const { return add(a, neg(b)); }

RingElement CoefficientRing::scale(const RingElement& a, const BigRational& c) const {
    RingElement r;
    if (c == 0) return r;
    BigRational cn = normalize_scalar(c);
    r.terms_.reserve(a.terms_.size());
    for (const auto& t : a.terms_) {
        BigRational v = normalize_scalar(t.coeff * cn);
        if (v != 0) r.terms_.push_back(Term{t.exps, std::move(v)});
    }
    return r;
}

RingElement CoefficientRing::mul(const RingElement& a, const RingElement& b) const {
    if (a.is_zero() || b.is_zero()) return RingElement{};
    if (impl_->gens.empty()) return from_rational(a.terms_[0].coeff * b.terms_[0].coeff);
    if (a.terms_.size() == 1 && a.terms_[0].exps.total() == 0) return scale(b, a.terms_[0].coeff);
    if (b.terms_.size() == 1 && b.terms_[0].exps.total() == 0) return scale(a, b.terms_[0].coeff);
    std::vector<Term> raw;
    raw.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& s : a.terms_)
        for (const auto& t : b.terms_) raw.push_back(Term{s.exps + t.exps, s.coeff * t.coeff});
    return reduce_terms(std::move(raw));
}

RingElement CoefficientRing::sum_of_products(
    const std::vector<std::pair<const RingElement*, const RingElement*>>& pairs) const {
    if (pairs.empty()) return RingElement{};
    if (pairs.size() == 1) return mul(*pairs[0].first, *pairs[0].second);
    if (impl_->gens.empty()) {
        BigRational s = 0;
        for (const auto& [a, b] : pairs)
            if (!a->is_zero() && !b->is_zero()) s += a->terms_[0].coeff * b->terms_[0].coeff;
        return from_rational(s);
    }
    std::vector<Term> raw;
    for (const auto& [a, b] : pairs)
        for (const auto& s : a->terms_)
            for (const auto& t : b->terms_) raw.push_back(Term{s.exps + t.exps, s.coeff * t.coeff});
    return reduce_terms(std::move(raw));
}

RingElement CoefficientRing::pow(const RingElement& a, unsigned long k) const {
    RingElement result = one();
    RingElement base = a;
    while (k > 0) {
        if (k & 1UL) result = mul(result, base);
        k >>= 1;
        if (k > 0) base = mul(base, base);
    }
    return result;
}

BigRational CoefficientRing::constant_term(const RingElement& a) const {
    if (!a.terms_.empty() && a.terms_[0].exps.total() == 0) return a.terms_[0].coeff;
    return BigRational(0);
}

bool CoefficientRing::is_unit(const RingElement& a) const {
    BigRational c = constant_term(a);
    switch (impl_->kind) {
    case ScalarKind::Rationals: return c != 0;
    case ScalarKind::IntegersModPN: return !mpz_divisible_p(c.get_num_mpz_t(), impl_->p.get_mpz_t());
    case ScalarKind::Integers:
        if (!impl_->gens.empty())
            throw DomainError("unit test needs a local ring; " + impl_->description + " is not local");
        return c == 1 || c == -1;
    }
    return false;
}

namespace {

// Smallest e with every product of e elements drawn from `gens` equal to zero.
// Products are enumerated as monotone index sequences, deduplicated by exponent tuple.
std::optional<unsigned> product_nilpotency(const CoefficientRing& R, const std::vector<RingElement>& gens,
                                           unsigned cap) {
    if (gens.empty()) return 1;
    struct Node {
        std::size_t last;
        RingElement value;
    };
    std::vector<Node> layer;
    for (std::size_t i = 0; i < gens.size(); ++i)
        if (!gens[i].is_zero()) layer.push_back(Node{i, gens[i]});
    unsigned e = 1;
    while (!layer.empty()) {
        if (e >= cap) return std::nullopt;
        std::vector<Node> next;
        for (const auto& node : layer)
            for (std::size_t i = node.last; i < gens.size(); ++i) {
                RingElement v = R.mul(node.value, gens[i]);
                if (!v.is_zero()) next.push_back(Node{i, std::move(v)});
            }
        layer = std::move(next);
        ++e;
    }
    return e;
}

} // namespace

std::optional<unsigned> CoefficientRing::maximal_ideal_nilpotency() const noexcept {
    std::call_once(impl_->nil_once, [this] {
        if (impl_->kind == ScalarKind::Integers || !all_relations(impl_->gens) || !impl_->local) return;
        try {
            std::vector<RingElement> gens;
            if (impl_->kind == ScalarKind::IntegersModPN) gens.push_back(from_integer(impl_->p));
            for (std::size_t i = 0; i < impl_->gens.size(); ++i) gens.push_back(generator(i));
            std::size_t basis = monomial_basis().size();
            unsigned length = (impl_->kind == ScalarKind::IntegersModPN ? impl_->N : 1u) * unsigned(basis);
            impl_->m_nil = product_nilpotency(*this, gens, length + 2);
        } catch (...) {
            impl_->m_nil.reset();
        }
    });
    return impl_->m_nil;
}

RingElement CoefficientRing::inverse(const RingElement& a) const {
    BigRational c = constant_term(a);
    const bool scalar = a.terms_.empty() || (a.terms_.size() == 1 && a.terms_[0].exps.total() == 0);
    if (impl_->gens.empty() || scalar) {
        if (c == 0) throw DomainError("zero is not invertible");
        if (impl_->kind == ScalarKind::Integers && c != 1 && c != -1)
            throw DomainError(c.get_str() + " is not invertible in Z");
        if (impl_->kind == ScalarKind::IntegersModPN && !is_unit(a))
            throw DomainError(c.get_str() + " is not invertible in " + impl_->description);
        return from_rational(1 / c);
    }
    bool unit = impl_->kind == ScalarKind::Integers ? (c == 1 || c == -1) : is_unit(a);
    if (!unit) throw DomainError("element " + format(a) + " is not a unit in " + impl_->description);
    std::call_once(impl_->gen_nil_once, [this] {
        if (!all_relations(impl_->gens)) return;
        try {
            std::vector<RingElement> gens;
            for (std::size_t i = 0; i < impl_->gens.size(); ++i) gens.push_back(generator(i));
            std::size_t basis = monomial_basis().size();
            unsigned length = (impl_->kind == ScalarKind::IntegersModPN ? impl_->N : 1u) * unsigned(basis);
            impl_->gen_nil = product_nilpotency(*this, gens, length + 2);
        } catch (...) {
            impl_->gen_nil.reset();
        }
    });
    if (!impl_->gen_nil)
        throw DomainError("cannot invert " + format(a) + ": generators of " + impl_->description +
                          " are not nilpotent");
    // a = c (1 - t) with t = -(a - c)/c nilpotent
    BigRational cinv = normalize_scalar(1 / c);
    RingElement t = scale(sub(a, from_rational(c)), -cinv);
    RingElement sum = one();
    RingElement power = one();
    for (unsigned i = 1;; ++i) {
        power = mul(power, t);
        if (power.is_zero()) break;
        if (i >= *impl_->gen_nil) throw InvariantError("geometric series for inverse did not terminate");
        sum = add(sum, power);
    }
    return scale(sum, cinv);
}

std::optional<unsigned> CoefficientRing::nilpotency_order(const RingElement& a) const {
    if (a.is_zero()) return 1;
    if (impl_->kind != ScalarKind::Integers && is_unit(a)) return std::nullopt;
    unsigned cap = 64;
    if (auto e = maximal_ideal_nilpotency()) cap = *e;
    RingElement power = a;
    for (unsigned k = 1; k <= cap; ++k) {
        if (power.is_zero()) return k;
        power = mul(power, a);
    }
    if (power.is_zero()) return cap + 1;
    return std::nullopt;
}

std::vector<Exponents> CoefficientRing::monomial_basis() const {
    if (!all_relations(impl_->gens)) throw DomainError(impl_->description + " has a formal generator; no finite basis");
    std::vector<Exponents> basis{Exponents{}};
    for (std::size_t j = 0; j < impl_->gens.size(); ++j) {
        std::vector<Exponents> next;
        for (const auto& b : basis)
            for (unsigned k = 0; k < *impl_->gens[j].degree; ++k) {
                Exponents ex = b;
                ex.e[j] = static_cast<std::uint16_t>(k);
                next.push_back(ex);
            }
        basis = std::move(next);
    }
    std::sort(basis.begin(), basis.end(), GradedLess{});
    return basis;
}

Integer CoefficientRing::cardinality() const {
    if (!is_finite()) throw DomainError(impl_->description + " is not finite");
    return integer_pow(impl_->modulus, monomial_basis().size());
}

std::vector<RingElement> CoefficientRing::elements(const Integer& guard) const {
    Integer card = cardinality();
    if (card > guard)
        throw GuardExceeded("ring " + impl_->description + " has " + card.get_str() + " elements, guard is " +
                            guard.get_str());
    auto basis = monomial_basis();
    const unsigned long q = impl_->modulus.get_ui();
    std::vector<unsigned long> digits(basis.size(), 0);
    std::vector<RingElement> out;
    out.reserve(card.get_ui());
    bool done = false;
    while (!done) {
        RingElement r;
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (digits[i] != 0) r.terms_.push_back(Term{basis[i], BigRational(digits[i])});
        out.push_back(std::move(r));
        done = true;
        for (std::size_t pos = basis.size(); pos-- > 0;) {
            if (++digits[pos] < q) {
                done = false;
                break;
            }
            digits[pos] = 0;
        }
    }
    std::sort(out.begin(), out.end(), [this](const RingElement& x, const RingElement& y) { return compare(x, y) < 0; });
    return out;
}

std::vector<RingElement> CoefficientRing::maximal_ideal(const Integer& guard) const {
    if (!impl_->local) throw DomainError(impl_->description + " is not local");
    std::vector<RingElement> out;
    for (auto& x : elements(guard))
        if (!is_unit(x)) out.push_back(std::move(x));
    return out;
}

BigRational CoefficientRing::coefficient(const RingElement& a, const Exponents& monomial) const {
    for (const auto& t : a.terms_)
        if (t.exps == monomial) return t.coeff;
    return BigRational(0);
}

int CoefficientRing::compare(const RingElement& a, const RingElement& b) const {
    GradedLess less;
    for (std::size_t i = 0;; ++i) {
        if (i == a.terms_.size()) return i == b.terms_.size() ? 0 : -1;
        if (i == b.terms_.size()) return 1;
        const auto& s = a.terms_[i];
        const auto& t = b.terms_[i];
        if (less(s.exps, t.exps)) return -1;
        if (less(t.exps, s.exps)) return 1;
        int c = cmp(s.coeff, t.coeff);
        if (c != 0) return c < 0 ? -1 : 1;
    }
}

std::string CoefficientRing::format(const RingElement& a) const {
    if (a.is_zero()) return "0";
    std::string out;
    for (std::size_t k = 0; k < a.terms_.size(); ++k) {
        const auto& t = a.terms_[k];
        std::string mono;
        for (std::size_t i = 0; i < impl_->gens.size(); ++i) {
            if (t.exps.e[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += impl_->gens[i].name;
            if (t.exps.e[i] > 1) mono += "^" + std::to_string(t.exps.e[i]);
        }
        std::string piece;
        if (mono.empty()) piece = t.coeff.get_str();
        else if (t.coeff == 1) piece = mono;
        else if (t.coeff == -1) piece = "-" + mono;
        else piece = t.coeff.get_str() + "*" + mono;
        if (k == 0) out = piece;
        else if (piece[0] == '-') out += " - " + piece.substr(1);
        else out += " + " + piece;
    }
    return out;
}

namespace {

class ElementParser {
public:
    ElementParser(const CoefficientRing& ring, std::string_view text) : R(ring), s(text) {}

    RingElement run() {
        RingElement r = expr();
        skip();
        if (i != s.size()) fail("unexpected character");
        return r;
    }

private:
    const CoefficientRing& R;
    std::string_view s;
    std::size_t i = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw DomainError("cannot parse element '" + std::string(s) + "' at offset " + std::to_string(i) + ": " + why);
    }
    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    Integer number() {
        skip();
        std::size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (start == i) fail("expected a number");
        return Integer(std::string(s.substr(start, i - start)));
    }
    RingElement expr() {
        bool negate = false;
        if (eat('-')) negate = true;
        else eat('+');
        RingElement acc = term();
        if (negate) acc = R.neg(acc);
        while (true) {
            if (eat('+')) acc = R.add(acc, term());
            else if (eat('-')) acc = R.sub(acc, term());
            else break;
        }
        return acc;
    }
    RingElement term() {
        RingElement acc = factor();
        while (eat('*')) acc = R.mul(acc, factor());
        return acc;
    }
    RingElement factor() {
        skip();
        RingElement base;
        if (eat('(')) {
            base = expr();
            if (!eat(')')) fail("expected ')'");
        } else if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            Integer num = number();
            if (eat('/')) {
                Integer den = number();
                if (den == 0) fail("zero denominator");
                base = R.from_rational(BigRational(num, den));
            } else {
                base = R.from_integer(num);
            }
        } else if (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_')) {
            std::size_t start = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            base = R.generator(s.substr(start, i - start));
        } else {
            fail("expected a factor");
        }
        if (eat('^')) {
            Integer k = number();
            if (!k.fits_ulong_p()) fail("exponent too large");
            base = R.pow(base, k.get_ui());
        }
        return base;
    }
};

} // namespace

RingElement CoefficientRing::parse(std::string_view text) const { return ElementParser(*this, text).run(); }

CoefficientRing CoefficientRing::rational_lift() const {
    if (impl_->kind == ScalarKind::Rationals) return *this;
    CoefficientRing r = rationals();
    for (const auto& g : impl_->gens) {
        switch (g.kind) {
        case GenKind::Nilpotent: r = nilpotent_extension(r, g.name, *g.degree); break;
        case GenKind::Formal: r = formal_variable(r, g.name); break;
        case GenKind::Root: {
            std::vector<RingElement> lower;
            for (const auto& c : g.lower) lower.push_back(r.from_terms(c.terms()));
            r = adjoin_root(r, g.name, lower);
            break;
        }
        }
    }
    return r;
}

RingElement CoefficientRing::transport(const RingElement& a, const CoefficientRing& other) const {
    if (other.generator_count() != generator_count())
        throw DomainError("cannot transport between " + impl_->description + " and " + other.description());
    return other.from_terms(a.terms());
}

RingHom::RingHom(CoefficientRing source, CoefficientRing target, std::vector<RingElement> generator_images)
    : source_(std::move(source)), target_(std::move(target)), images_(std::move(generator_images)) {
    if (images_.size() != source_.generator_count())
        throw DomainError("homomorphism needs one image per generator of " + source_.description());
    if (source_.scalar_kind() == ScalarKind::IntegersModPN) {
        if (target_.scalar_kind() != ScalarKind::IntegersModPN || target_.prime() != source_.prime() ||
            target_.prime_exponent() > source_.prime_exponent())
            throw DomainError("no scalar map from " + source_.description() + " to " + target_.description());
    }
    for (std::size_t j = 0; j < images_.size(); ++j) {
        auto d = source_.relation_degree(j);
        if (!d) continue;
        RingElement x = source_.generator(j);
        RingElement tail = source_.pow(x, *d);
        // x^d reduces to the tail; the image of x^d - tail must vanish
        RingElement lhs = target_.pow(images_[j], *d);
        RingElement rhs = (*this)(tail);
        if (!(lhs == rhs))
            throw DomainError("generator images do not satisfy the relation of '" + source_.generator_name(j) + "'");
    }
}

RingHom RingHom::by_name(const CoefficientRing& source, const CoefficientRing& target, bool missing_to_zero) {
    std::vector<RingElement> images;
    for (std::size_t j = 0; j < source.generator_count(); ++j) {
        const auto& name = source.generator_name(j);
        if (target.generator_index(name)) images.push_back(target.generator(name));
        else if (missing_to_zero) images.push_back(target.zero());
        else throw DomainError("generator '" + name + "' missing from " + target.description());
    }
    return RingHom(source, target, std::move(images));
}

RingHom RingHom::from_rational_lift(const CoefficientRing& original) {
    CoefficientRing lift = original.rational_lift();
    std::vector<RingElement> images;
    for (std::size_t j = 0; j < original.generator_count(); ++j) images.push_back(original.generator(j));
    return RingHom(lift, original, std::move(images));
}

RingElement RingHom::operator()(const RingElement& a) const {
    std::map<std::pair<std::size_t, unsigned>, RingElement> cache;
    auto power = [&](std::size_t i, unsigned k) -> const RingElement& {
        auto key = std::make_pair(i, k);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        return cache.emplace(key, target_.pow(images_[i], k)).first->second;
    };
    RingElement out = target_.zero();
    for (const auto& t : a.terms()) {
        RingElement v = target_.from_rational(t.coeff);
        if (v.is_zero()) continue;
        for (std::size_t i = 0; i < images_.size(); ++i)
            if (t.exps.e[i] != 0) v = target_.mul(v, power(i, t.exps.e[i]));
        out = target_.add(out, v);
    }
    return out;
}

RingHom RingHom::then(const RingHom& next) const {
    if (!(next.source_ == target_)) throw DomainError("cannot compose homomorphisms with mismatched rings");
    std::vector<RingElement> images;
    for (const auto& x : images_) images.push_back(next(x));
    return RingHom(source_, next.target_, std::move(images));
}

} // namespace ltforge::exact

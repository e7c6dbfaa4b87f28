#include "ltforge/zeta/zeta.hpp"

#include <algorithm>
#include <mutex>

#include "ltforge/errors.hpp"

namespace ltforge::zeta {

namespace {

std::mutex g_bernoulli_mutex;
std::vector<BigRational>& bernoulli_cache() {
    static std::vector<BigRational> cache{BigRational(1)};
    return cache;
}

std::mutex g_kummer_mutex;
std::map<unsigned long, bool>& kummer_cache() {
    static std::map<unsigned long, bool> cache;
    return cache;
}

BigRational qpow(const BigRational& q, unsigned long e) {
    BigRational r = 1;
    for (unsigned long i = 0; i < e; ++i) r *= q;
    return r;
}

BigRational qpow_signed(const BigRational& q, const Integer& e) {
    if (e < 0) {
        BigRational inv = 1 / q;
        return qpow(inv, Integer(-e).get_ui());
    }
    return qpow(q, e.get_ui());
}

Integer strip(Integer n, const Integer& p) {
    while (n % p == 0) n /= p;
    return n;
}

} // namespace

BettiProfile::BettiProfile(const std::map<int, Integer>& by_weight) {
    for (const auto& [w, b] : by_weight) {
        if (w < 0) throw DomainError("Betti profile: weight " + std::to_string(w) + " is negative");
        if (b < 0) throw DomainError("Betti profile: Betti number at weight " + std::to_string(w) + " is negative");
        if (b != 0) beta_[w] = b;
    }
}

BettiProfile BettiProfile::from_degrees(const std::map<int, Integer>& by_degree) {
    std::map<int, Integer> w;
    for (const auto& [d, b] : by_degree) {
        if (d < 0 || d % 2 != 0)
            throw DomainError("Betti profile: degree " + std::to_string(d) + " is not a nonnegative even integer");
        w[d / 2] += b;
    }
    return BettiProfile(w);
}

BettiProfile BettiProfile::from_json(const nlohmann::json& j) {
    const nlohmann::json& inner = j.is_object() && j.contains("betti") ? j.at("betti") : j;
    if (!inner.is_object()) throw DomainError("Betti profile: expected an object of degree -> Betti number");
    std::map<int, Integer> by_degree;
    for (const auto& [key, value] : inner.items()) {
        std::size_t used = 0;
        int d = 0;
        try {
            d = std::stoi(key, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != key.size() || key.empty()) throw DomainError("Betti profile: degree key '" + key + "' is not an integer");
        Integer b;
        if (value.is_number_unsigned())
            b = value.get<unsigned long>();
        else if (value.is_number_integer())
            b = value.get<long>();
        else if (value.is_string()) {
            if (b.set_str(value.get<std::string>(), 10) != 0) throw DomainError("Betti profile: bad Betti number");
        } else
            throw DomainError("Betti profile: Betti numbers must be integers");
        by_degree[d] = b;
    }
    return from_degrees(by_degree);
}

BettiProfile BettiProfile::sphere0() { return BettiProfile({{0, Integer(1)}}); }

BettiProfile BettiProfile::cp(unsigned n) {
    std::map<int, Integer> w;
    for (unsigned i = 0; i <= n; ++i) w[static_cast<int>(i)] = 1;
    return BettiProfile(w);
}

BettiProfile BettiProfile::even_sphere(unsigned w) {
    std::map<int, Integer> m{{0, Integer(1)}};
    m[static_cast<int>(w)] += 1;
    return BettiProfile(m);
}

std::optional<int> BettiProfile::b() const {
    if (beta_.empty()) return std::nullopt;
    return beta_.rbegin()->first;
}

BettiProfile BettiProfile::disjoint_union(const BettiProfile& other) const {
    std::map<int, Integer> m = beta_;
    for (const auto& [w, b] : other.beta_) m[w] += b;
    return BettiProfile(m);
}

nlohmann::ordered_json BettiProfile::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [w, b] : beta_) j[std::to_string(2 * w)] = b.get_str();
    return j;
}

BigRational bernoulli(unsigned j) {
    std::lock_guard lock(g_bernoulli_mutex);
    auto& cache = bernoulli_cache();
    while (cache.size() <= j) {
        const unsigned m = static_cast<unsigned>(cache.size());
        // sum_{i<m} C(m+1, i) B_i + (m+1) B_m = 0
        BigRational s = 0;
        Integer c = 1;
        for (unsigned i = 0; i < m; ++i) {
            s += BigRational(c) * cache[i];
            c = c * (m + 1 - i) / (i + 1);
        }
        BigRational b = -s / BigRational(m + 1);
        b.canonicalize();
        cache.push_back(b);
    }
    return cache[j];
}

BigRational zeta_negative(unsigned j) {
    if (j == 0) return BigRational(-1, 2);
    BigRational z = -bernoulli(j + 1) / BigRational(j + 1);
    z.canonicalize();
    return z;
}

namespace testing {

void corrupt_bernoulli(unsigned j, const BigRational& value) {
    bernoulli(j);
    std::lock_guard lock(g_bernoulli_mutex);
    bernoulli_cache()[j] = value;
}

void reset_bernoulli_cache() {
    std::lock_guard lock(g_bernoulli_mutex);
    bernoulli_cache().assign(1, BigRational(1));
}

} // namespace testing

LocalValue LocalLFactor::evaluate_at(long s) const {
    LocalValue out;
    BigRational v = 1;
    for (const auto& [w, beta] : factors) {
        if (s == w) {
            out.pole = true;
            out.pole_weight = w;
            return out;
        }
        BigRational f = 1 - qpow_signed(BigRational(p), Integer(static_cast<long>(w) - s));
        v *= qpow_signed(f, -beta);
    }
    v.canonicalize();
    out.value = v;
    return out;
}

std::string LocalLFactor::format() const {
    if (factors.empty()) return "1";
    std::string out;
    for (const auto& [w, beta] : factors) {
        if (!out.empty()) out += " ";
        std::string e = w == 0 ? "-s" : std::to_string(w) + "-s";
        out += "(1 - " + p.get_str() + "^(" + e + "))^(-" + beta.get_str() + ")";
    }
    return out;
}

nlohmann::ordered_json LocalLFactor::to_json() const {
    nlohmann::ordered_json j;
    j["p"] = p.get_str();
    auto& arr = j["factors"] = nlohmann::ordered_json::array();
    for (const auto& [w, beta] : factors) arr.push_back({{"w", w}, {"multiplicity", beta.get_str()}});
    j["symbolic"] = format();
    return j;
}

LocalLFactor local_l_factor(const Integer& p, const BettiProfile& profile) {
    if (!exact::is_prime(p)) throw DomainError("local_l_factor: p must be prime");
    LocalLFactor f;
    f.p = p;
    for (const auto& [w, b] : profile.beta()) f.factors.emplace_back(w, b);
    return f;
}

LocalLFactor GlobalLFunction::euler_factor(const Integer& p) const {
    if (!exact::is_prime(p)) throw DomainError("euler_factor: p must be prime");
    // zeta(s - w) has p-factor (1 - p^{-(s - w)})^{-1}
    LocalLFactor f;
    f.p = p;
    for (const auto& [w, e] : zeta_factors) f.factors.emplace_back(w, e);
    return f;
}

std::string GlobalLFunction::format() const {
    if (zeta_factors.empty()) return "1";
    std::string out;
    for (const auto& [w, e] : zeta_factors) {
        if (!out.empty()) out += " ";
        out += w == 0 ? "zeta(s)" : "zeta(s-" + std::to_string(w) + ")";
        if (e != 1) out += "^" + e.get_str();
    }
    return out;
}

nlohmann::ordered_json GlobalLFunction::to_json() const {
    nlohmann::ordered_json j;
    j["profile"] = profile.to_json();
    auto& arr = j["factors"] = nlohmann::ordered_json::array();
    for (const auto& [w, e] : zeta_factors) arr.push_back({{"shift", w}, {"exponent", e.get_str()}});
    j["symbolic"] = format();
    return j;
}

GlobalLFunction global_l(const BettiProfile& profile) {
    GlobalLFunction g;
    g.profile = profile;
    for (const auto& [w, b] : profile.beta()) g.zeta_factors[w] += b;
    return g;
}

std::map<unsigned long, unsigned> factorize(Integer n) {
    if (n <= 0) throw DomainError("factorize: need a positive integer");
    std::map<unsigned long, unsigned> out;
    for (unsigned long p = 2; Integer(p) * p <= n; p += p == 2 ? 1 : 2) {
        while (n % p == 0) {
            ++out[p];
            n /= p;
        }
    }
    if (n > 1) {
        if (!n.fits_ulong_p()) throw GuardExceeded("factorize: cofactor does not fit a machine word");
        ++out[n.get_ui()];
    }
    return out;
}

std::string rational_string(const BigRational& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

bool is_irregular_prime(unsigned long p) {
    if (!exact::is_prime(p)) throw DomainError("is_irregular_prime: p must be prime");
    if (p < 5) return false;
    {
        std::lock_guard lock(g_kummer_mutex);
        auto it = kummer_cache().find(p);
        if (it != kummer_cache().end()) return it->second;
    }
    bool irregular = false;
    for (unsigned long t = 2; t + 3 <= p && !irregular; t += 2)
        if (bernoulli(static_cast<unsigned>(t)).get_num() % p == 0) irregular = true;
    std::lock_guard lock(g_kummer_mutex);
    kummer_cache()[p] = irregular;
    return irregular;
}

nlohmann::ordered_json ExactSpecialValue::to_json() const {
    nlohmann::ordered_json j;
    j["k"] = k;
    j["value"] = rational_string(value);
    j["zero"] = zero;
    j["vanishingArguments"] = vanishing_arguments;
    auto opt = [](const std::optional<Integer>& x) -> nlohmann::ordered_json {
        return x ? nlohmann::ordered_json(x->get_str()) : nlohmann::ordered_json(nullptr);
    };
    j["denominator"] = opt(denominator);
    j["oddPart"] = opt(odd_part);
    j["oddRegularPart"] = opt(odd_regular_part);
    auto& v = j["valuations"] = nlohmann::ordered_json::object();
    for (const auto& [p, e] : valuations) v[std::to_string(p)] = e;
    j["irregularPrimes"] = irregular_primes;
    return j;
}

ExactSpecialValue special_value(const BettiProfile& profile, long k) {
    if (auto b = profile.b(); b && k < *b + 1)
        throw DomainError("special_value: need k >= b + 1 = " + std::to_string(*b + 1) + " (pole of zeta at 1)");
    if (k < 1) throw DomainError("special_value: need k >= 1");
    ExactSpecialValue out;
    out.k = k;
    BigRational v = 1;
    for (const auto& [w, beta] : profile.beta()) {
        const long arg = 1 - k - w;
        const unsigned j = static_cast<unsigned>(-arg);
        BigRational z = zeta_negative(j);
        if (z == 0) out.vanishing_arguments.push_back(arg);
        v *= qpow(z, beta.get_ui());
    }
    v.canonicalize();
    out.value = v;
    out.zero = v == 0;
    if (out.zero) return out;
    const Integer den = v.get_den();
    out.denominator = den;
    out.valuations = factorize(den);
    Integer check = 1;
    for (const auto& [p, e] : out.valuations) check *= exact::integer_pow(Integer(p), e);
    if (check != den) throw InvariantError("special_value: valuation table does not multiply back");
    out.odd_part = strip(den, 2);
    Integer regular = *out.odd_part;
    for (const auto& [p, e] : out.valuations)
        if (p != 2 && is_irregular_prime(p)) {
            out.irregular_primes.push_back(p);
            regular = strip(regular, p);
        }
    out.odd_regular_part = regular;
    return out;
}

ImageOfJ image_of_j_denominator(long t) {
    if (t < 1) throw DomainError("image_of_j_denominator: need t >= 1");
    if (t % 2 != 0) return {Integer(1), "odd t: no odd denominator predicted"};
    Integer v = 1;
    for (unsigned long p = 3; p <= static_cast<unsigned long>(t) + 1; p += 2) {
        if (!exact::is_prime(p) || t % static_cast<long>(p - 1) != 0) continue;
        v *= exact::integer_pow(Integer(p), 1 + exact::valuation(Integer(t), Integer(p)));
    }
    return {v, ""};
}

nlohmann::ordered_json HomotopyOrderReport::to_json() const {
    nlohmann::ordered_json j;
    j["special"] = special.to_json();
    j["predictedOrder"] = predicted_order ? nlohmann::ordered_json(predicted_order->get_str()) : nlohmann::ordered_json(nullptr);
    j["oracle"] = oracle ? nlohmann::ordered_json(oracle->get_str()) : nlohmann::ordered_json(nullptr);
    j["oracleAgrees"] = oracle_agrees ? nlohmann::ordered_json(*oracle_agrees) : nlohmann::ordered_json(nullptr);
    j["note"] = note;
    return j;
}

HomotopyOrderReport predicted_homotopy_order(const BettiProfile& profile, long k) {
    HomotopyOrderReport r;
    r.special = special_value(profile, k);
    if (r.special.zero) {
        r.note = "special value is zero; its denominator is undefined";
        return r;
    }
    r.predicted_order = r.special.odd_regular_part;
    Integer oracle = 1;
    for (const auto& [w, beta] : profile.beta())
        oracle *= exact::integer_pow(image_of_j_denominator(k + w).value, beta.get_ui());
    for (const auto& [p, e] : factorize(oracle))
        if (p != 2 && is_irregular_prime(p)) oracle = strip(oracle, Integer(p));
    r.oracle = oracle;
    r.oracle_agrees = oracle == *r.predicted_order;
    r.note = "up to powers of 2 and of irregular primes";
    return r;
}

} // namespace ltforge::zeta

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/exact/ring.hpp"

namespace ltforge::zeta {

using exact::BigRational;
using exact::Integer;

/// Even Betti numbers: weight w maps to beta_{2w} > 0.
class BettiProfile {
public:
    BettiProfile() = default;
    /// Keys are weights w >= 0; zero multiplicities are dropped.
    explicit BettiProfile(const std::map<int, Integer>& by_weight);
    /// Keys are cohomological degrees 2w; odd or negative degrees are a DomainError.
    static BettiProfile from_degrees(const std::map<int, Integer>& by_degree);
    /// {"betti": {"0": 1, "2": 1}} or the bare inner object.
    static BettiProfile from_json(const nlohmann::json& j);

    static BettiProfile sphere0();
    static BettiProfile cp(unsigned n);
    /// S^{2w} with beta_0 = beta_{2w} = 1.
    static BettiProfile even_sphere(unsigned w);

    const std::map<int, Integer>& beta() const noexcept { return beta_; }
    bool empty() const noexcept { return beta_.empty(); }
    /// Largest supported weight.
    std::optional<int> b() const;
    BettiProfile disjoint_union(const BettiProfile& other) const;

    nlohmann::ordered_json to_json() const;
    bool operator==(const BettiProfile& o) const { return beta_ == o.beta_; }

private:
    std::map<int, Integer> beta_;
};

/// B_j with B_1 = -1/2, from sum_{i<=j} C(j+1, i) B_i = 0.
BigRational bernoulli(unsigned j);
/// zeta(-j); zeta(0) = -1/2.
BigRational zeta_negative(unsigned j);

namespace testing {
/// Overwrites a cached Bernoulli number. Fault injection only.
void corrupt_bernoulli(unsigned j, const BigRational& value);
void reset_bernoulli_cache();
} // namespace testing

struct LocalValue {
    std::optional<BigRational> value;
    bool pole = false;
    /// Weight whose factor vanishes at a pole.
    std::optional<int> pole_weight;
};

/// prod_w (1 - p^{w-s})^{-beta_{2w}}
struct LocalLFactor {
    Integer p;
    /// (w, beta_{2w}), ascending w.
    std::vector<std::pair<int, Integer>> factors;

    LocalValue evaluate_at(long s) const;
    std::string format() const;
    nlohmann::ordered_json to_json() const;
};

LocalLFactor local_l_factor(const Integer& p, const BettiProfile& profile);

/// prod_w zeta(s - w)^{beta_{2w}}
struct GlobalLFunction {
    BettiProfile profile;
    /// Shift w to exponent.
    std::map<int, Integer> zeta_factors;

    LocalLFactor euler_factor(const Integer& p) const;
    std::string format() const;
    nlohmann::ordered_json to_json() const;
};

GlobalLFunction global_l(const BettiProfile& profile);

struct ExactSpecialValue {
    long k = 0;
    BigRational value;
    bool zero = false;
    /// zeta arguments 1 - k - w with a trivial zero.
    std::vector<long> vanishing_arguments;
    /// Undefined for a zero value.
    std::optional<Integer> denominator;
    std::optional<Integer> odd_part;
    std::optional<Integer> odd_regular_part;
    std::map<unsigned long, unsigned> valuations;
    std::vector<unsigned long> irregular_primes;

    nlohmann::ordered_json to_json() const;
};

/// prod_w zeta(1 - k - w)^{beta_{2w}}; needs k >= b + 1.
ExactSpecialValue special_value(const BettiProfile& profile, long k);

/// Odd primes p with (p - 1) | t contribute p^{1 + v_p(t)}.
struct ImageOfJ {
    Integer value;
    std::string note;
};
ImageOfJ image_of_j_denominator(long t);

/// Kummer: p divides the numerator of some B_{2t}, 2t <= p - 3.
bool is_irregular_prime(unsigned long p);

struct HomotopyOrderReport {
    ExactSpecialValue special;
    /// Predicted |pi_{-2k-1}(L_KU DX)| up to powers of 2 and irregular primes; unset for a zero value.
    std::optional<Integer> predicted_order;
    /// prod_w image_of_j(k + w)^{beta}, stripped of irregular primes.
    std::optional<Integer> oracle;
    std::optional<bool> oracle_agrees;
    std::string note;

    nlohmann::ordered_json to_json() const;
};

HomotopyOrderReport predicted_homotopy_order(const BettiProfile& profile, long k);

/// Sorted prime factorisation by trial division.
std::map<unsigned long, unsigned> factorize(Integer n);
std::string rational_string(const BigRational& q);

} // namespace ltforge::zeta

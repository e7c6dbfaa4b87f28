#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace ltforge::exact {

using Integer = mpz_class;
using BigRational = mpq_class;

inline constexpr std::size_t kMaxVariables = 8;

/// Exponent vector shared by ring generators and series variables.
struct Exponents {
    std::array<std::uint16_t, kMaxVariables> e{};

    unsigned total() const noexcept;
    bool operator==(const Exponents&) const = default;
};

Exponents operator+(const Exponents& a, const Exponents& b);
Exponents unit_exponents(std::size_t index, unsigned power = 1);

/// Graded lexicographic order: lower total degree first, then larger
/// exponents on earlier variables first (X^2 < XY < Y^2).
struct GradedLess {
    bool operator()(const Exponents& a, const Exponents& b) const noexcept;
};

enum class ScalarKind { Integers, Rationals, IntegersModPN };

struct Term {
    Exponents exps;
    BigRational coeff;
};

/// An element in canonical form: terms sorted by GradedLess, no zero
/// coefficients, all relations applied. Only CoefficientRing builds these.
class RingElement {
public:
    RingElement() = default;

    const std::vector<Term>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    bool operator==(const RingElement& other) const;

private:
    friend class CoefficientRing;
    std::vector<Term> terms_;
};

/// Exact coefficient ring: a scalar domain (Z, Q or Z/p^N) with a tower of
/// adjoined generators. Each generator is either formal (no relation, thought
/// of as a power-series variable in the maximal ideal) or satisfies a monic
/// relation over the previously adjoined ones. Handles are cheap to copy and
/// immutable.
class CoefficientRing {
public:
    static CoefficientRing integers();
    static CoefficientRing rationals();
    static CoefficientRing integers_mod_prime_power(const Integer& p, unsigned exponent);
    static CoefficientRing prime_field(const Integer& p);

    /// base[name]/(name^k), k >= 2.
    static CoefficientRing nilpotent_extension(const CoefficientRing& base, const std::string& name, unsigned k);
    /// base[[name]]; elements are stored as polynomials in name.
    static CoefficientRing formal_variable(const CoefficientRing& base, const std::string& name);
    /// base[name]/(name^d + c_{d-1} name^{d-1} + ... + c_0), lower_coefficients = {c_0, ..., c_{d-1}}.
    static CoefficientRing adjoin_root(const CoefficientRing& base, const std::string& name,
                                       const std::vector<RingElement>& lower_coefficients);

    ScalarKind scalar_kind() const noexcept;
    /// p for Z/p^N, 0 otherwise.
    const Integer& prime() const noexcept;
    unsigned prime_exponent() const noexcept;
    const Integer& modulus() const noexcept;

    std::size_t generator_count() const noexcept;
    const std::string& generator_name(std::size_t i) const;
    std::optional<std::size_t> generator_index(std::string_view name) const;
    std::optional<unsigned> relation_degree(std::size_t i) const;
    /// The ring made of the scalars and the first `count` generators.
    CoefficientRing prefix(std::size_t count) const;

    bool is_finite() const noexcept;
    bool is_local() const noexcept;
    bool is_field() const noexcept;
    bool is_q_algebra() const noexcept;

    const std::string& description() const noexcept;
    bool operator==(const CoefficientRing& other) const noexcept;

    RingElement zero() const;
    RingElement one() const;
    RingElement from_integer(const Integer& n) const;
    RingElement from_int(long n) const;
    RingElement from_rational(const BigRational& q) const;
    RingElement generator(std::size_t i) const;
    RingElement generator(std::string_view name) const;
    RingElement from_terms(std::vector<Term> terms) const;

    RingElement add(const RingElement& a, const RingElement& b) const;
    RingElement sub(const RingElement& a, const RingElement& b) const;
    RingElement neg(const RingElement& a) const;
    RingElement mul(const RingElement& a, const RingElement& b) const;
    RingElement scale(const RingElement& a, const BigRational& c) const;
    RingElement pow(const RingElement& a, unsigned long k) const;
    /// sum of a_i * b_i with a single reduction pass.
    RingElement sum_of_products(const std::vector<std::pair<const RingElement*, const RingElement*>>& pairs) const;

    BigRational constant_term(const RingElement& a) const;
    /// Unit in the local ring whose maximal ideal is (p, generators).
    bool is_unit(const RingElement& a) const;
    RingElement inverse(const RingElement& a) const;

    /// Smallest k with a^k = 0, if a is nilpotent.
    std::optional<unsigned> nilpotency_order(const RingElement& a) const;
    /// Smallest e with m^e = 0 for the maximal ideal m, when one exists.
    std::optional<unsigned> maximal_ideal_nilpotency() const noexcept;

    Integer cardinality() const;
    std::vector<Exponents> monomial_basis() const;
    std::vector<RingElement> elements(const Integer& guard) const;
    std::vector<RingElement> maximal_ideal(const Integer& guard) const;

    /// Coefficient of a basis monomial (0 if absent).
    BigRational coefficient(const RingElement& a, const Exponents& monomial) const;

    int compare(const RingElement& a, const RingElement& b) const;
    std::string format(const RingElement& a) const;
    RingElement parse(std::string_view text) const;

    /// Same generators and relations over Q, relation coefficients lifted to integers.
    CoefficientRing rational_lift() const;
    /// Copy of a with scalar coefficients reinterpreted in `other` (which must
    /// share this ring's generator layout). Not a homomorphism in general.
    RingElement transport(const RingElement& a, const CoefficientRing& other) const;

private:
    struct Impl;
    explicit CoefficientRing(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    BigRational normalize_scalar(const BigRational& c) const;
    RingElement reduce_terms(std::vector<Term> raw) const;
    RingElement generator_power(std::size_t j, unsigned k) const;
    static std::shared_ptr<Impl> finish(std::shared_ptr<Impl> impl);

    std::shared_ptr<const Impl> impl_;
};

/// Ring homomorphism determined by the images of the generators.
class RingHom {
public:
    RingHom(CoefficientRing source, CoefficientRing target, std::vector<RingElement> generator_images);

    /// Matches generators by name; source generators missing from the target map to 0
    /// only when `missing_to_zero` is set.
    static RingHom by_name(const CoefficientRing& source, const CoefficientRing& target,
                           bool missing_to_zero = false);
    /// Reduction from rational_lift() back to the original ring (partial: p-integral elements).
    static RingHom from_rational_lift(const CoefficientRing& original);

    const CoefficientRing& source() const noexcept { return source_; }
    const CoefficientRing& target() const noexcept { return target_; }

    RingElement operator()(const RingElement& a) const;
    RingHom then(const RingHom& next) const;

private:
    CoefficientRing source_;
    CoefficientRing target_;
    std::vector<RingElement> images_;
};

Integer integer_pow(const Integer& base, unsigned long k);
bool is_prime(const Integer& n);
/// p-adic valuation of a nonzero integer.
unsigned valuation(const Integer& n, const Integer& p);
std::string to_string(const BigRational& q);

} // namespace ltforge::exact

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/exact/ring.hpp"

namespace ltforge::exact {

/// Multivariate power series truncated at total degree D. Terms of degree > D
/// are never stored; zero coefficients are never stored.
class TruncatedSeries {
public:
    using Coefficients = std::map<Exponents, RingElement, GradedLess>;

    TruncatedSeries(CoefficientRing ring, std::vector<std::string> vars, unsigned max_degree);

    static TruncatedSeries variable(const CoefficientRing& ring, const std::vector<std::string>& vars,
                                    std::size_t index, unsigned max_degree);
    static TruncatedSeries constant(const CoefficientRing& ring, const std::vector<std::string>& vars,
                                    const RingElement& c, unsigned max_degree);
    /// c_0 + c_1 X + c_2 X^2 + ... in one variable.
    static TruncatedSeries univariate(const CoefficientRing& ring, const std::string& var,
                                      const std::vector<RingElement>& coefficients, unsigned max_degree);

    const CoefficientRing& ring() const noexcept { return ring_; }
    const std::vector<std::string>& vars() const noexcept { return vars_; }
    unsigned max_degree() const noexcept { return max_degree_; }
    const Coefficients& coefficients() const noexcept { return coeffs_; }

    RingElement coefficient(const Exponents& e) const;
    /// Coefficient of X^k for a univariate series.
    RingElement coefficient(unsigned k) const;
    /// Dense coefficient list c_0..c_D of a univariate series.
    std::vector<RingElement> dense() const;

    /// Adds c to the coefficient at e (dropped if e exceeds D).
    void accumulate(const Exponents& e, const RingElement& c);
    void set(const Exponents& e, RingElement c);

    bool is_zero() const noexcept { return coeffs_.empty(); }
    bool has_zero_constant_term() const;
    /// Lowest total degree carrying a nonzero term; D + 1 for the zero series.
    unsigned order() const;
    TruncatedSeries truncate(unsigned max_degree) const;

    /// Same ring, variables, truncation degree and coefficients.
    bool operator==(const TruncatedSeries& other) const;

private:
    CoefficientRing ring_;
    std::vector<std::string> vars_;
    unsigned max_degree_;
    Coefficients coeffs_;
};

/// Equality of all coefficients of total degree <= D (rings and variables must match).
bool equal_through(const TruncatedSeries& a, const TruncatedSeries& b, unsigned D);

TruncatedSeries series_add(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries series_sub(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries series_neg(const TruncatedSeries& a);
TruncatedSeries series_mul(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries series_scale(const TruncatedSeries& a, const RingElement& c);
TruncatedSeries series_pow(const TruncatedSeries& a, unsigned long k);
/// g(f) for univariate g and f with zero constant term.
TruncatedSeries series_compose(const TruncatedSeries& g, const TruncatedSeries& f);
/// g(f_1, ..., f_r) for g in r variables; every f_i has zero constant term and the same variables.
TruncatedSeries series_substitute(const TruncatedSeries& g, const std::vector<TruncatedSeries>& f);
TruncatedSeries series_derivative(const TruncatedSeries& a, std::size_t var);
/// Multiplicative inverse; the constant term must be a unit.
TruncatedSeries series_inverse(const TruncatedSeries& a);
TruncatedSeries series_change_ring(const TruncatedSeries& a, const RingHom& hom);
/// Same coefficients under new variable names.
TruncatedSeries series_rename(const TruncatedSeries& a, const std::vector<std::string>& vars);
/// Embeds a series into a larger variable list; positions[i] is the new index of old variable i.
TruncatedSeries series_embed(const TruncatedSeries& a, const std::vector<std::string>& vars,
                             const std::vector<std::size_t>& positions);

/// Solves ell(g) = target for g with zero constant term, by Newton iteration with
/// precision doubling. ell is univariate with ell(0) = 0 and unit linear coefficient.
TruncatedSeries solve_composition(const TruncatedSeries& ell, const TruncatedSeries& target);
/// Compositional inverse of a univariate series with unit linear coefficient.
TruncatedSeries series_reversion(const TruncatedSeries& f);

nlohmann::ordered_json series_to_json(const TruncatedSeries& a);
TruncatedSeries series_from_json(const nlohmann::json& j, const CoefficientRing& ring);
std::string format_series(const TruncatedSeries& a);

/// Monic polynomial X^d + c_{d-1} X^{d-1} + ... + c_0.
class MonicPolynomial {
public:
    MonicPolynomial(CoefficientRing ring, std::string var, std::vector<RingElement> lower);

    static MonicPolynomial from_roots(const CoefficientRing& ring, const std::string& var,
                                      const std::vector<RingElement>& roots);
    /// X^d.
    static MonicPolynomial power_of_variable(const CoefficientRing& ring, const std::string& var, unsigned d);

    const CoefficientRing& ring() const noexcept { return ring_; }
    const std::string& variable() const noexcept { return var_; }
    unsigned degree() const noexcept { return static_cast<unsigned>(lower_.size()); }
    const std::vector<RingElement>& lower_coefficients() const noexcept { return lower_; }
    /// Full coefficient list c_0..c_d with c_d = 1.
    std::vector<RingElement> coefficients() const;

    MonicPolynomial multiply(const MonicPolynomial& other) const;
    TruncatedSeries to_series(unsigned max_degree) const;
    RingElement evaluate(const RingElement& x) const;
    std::string format() const;
    bool operator==(const MonicPolynomial& other) const;

private:
    CoefficientRing ring_;
    std::string var_;
    std::vector<RingElement> lower_;
};

struct DivisionResult {
    bool divides = false;
    TruncatedSeries quotient;
    TruncatedSeries remainder;
    unsigned tested_degree = 0;
    /// The truncated verdict is provably the verdict for every series agreeing with f through D.
    bool exact = false;
};

/// Long division of the degree-D truncation of f by a monic d.
DivisionResult monic_divide(const MonicPolynomial& d, const TruncatedSeries& f);
/// Exact polynomial division.
DivisionResult monic_divide(const MonicPolynomial& d, const MonicPolynomial& f);

struct WeierstrassDegree {
    std::optional<unsigned> degree;
    unsigned tested_degree = 0;
};

/// Smallest exponent whose coefficient is a unit of the local coefficient ring.
WeierstrassDegree weierstrass_degree(const TruncatedSeries& f);

struct WeierstrassPreparation {
    MonicPolynomial distinguished;
    TruncatedSeries unit;
    bool exact = false;
    unsigned tested_degree = 0;
};

/// f = unit * distinguished with distinguished monic of the Weierstrass degree and
/// non-leading coefficients in the maximal ideal.
WeierstrassPreparation weierstrass_prepare(const TruncatedSeries& f);

} // namespace ltforge::exact

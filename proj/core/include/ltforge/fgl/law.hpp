#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/exact/series.hpp"

namespace ltforge::fgl {

using exact::BigRational;
using exact::CoefficientRing;
using exact::Integer;
using exact::RingElement;
using exact::RingHom;
using exact::TruncatedSeries;

struct Height {
    bool infinite = false;
    unsigned value = 0;
    bool operator==(const Height&) const = default;
};

/// A logarithm over a Q-algebra together with the reduction map from that
/// algebra back to the ring of the law (defined on p-integral elements).
struct LawLogarithm {
    /// Logarithm through the requested degree (DomainError if unavailable).
    std::function<TruncatedSeries(unsigned)> at;
    RingHom reduction;
};

/// One-dimensional formal group law F(X, Y) truncated at total degree D.
class FormalModuleLaw {
public:
    /// Validates unit, commutativity and associativity through D; DomainError otherwise.
    FormalModuleLaw(TruncatedSeries F, std::string name = "custom", std::optional<Height> known_height = {},
                    std::optional<LawLogarithm> logarithm = {});

    const CoefficientRing& ring() const noexcept { return F_.ring(); }
    const TruncatedSeries& F() const noexcept { return F_; }
    unsigned D() const noexcept { return F_.max_degree(); }
    const std::string& name() const noexcept { return name_; }
    const std::optional<Height>& known_height() const noexcept { return known_height_; }
    const std::optional<LawLogarithm>& logarithm() const noexcept { return logarithm_; }

    /// F(f, g) for univariate f, g with zero constant term.
    TruncatedSeries apply(const TruncatedSeries& f, const TruncatedSeries& g) const;
    /// [a](X) through D; cached.
    TruncatedSeries a_series(unsigned long a) const;
    /// [p^m](X) as the m-fold composite of [p].
    TruncatedSeries pm_series(const Integer& p, unsigned m) const;
    /// [a](X) through an arbitrary degree, solved from the logarithm.
    TruncatedSeries a_series_via_log(const Integer& a, unsigned D) const;

    /// F(x, y) evaluated at nilpotent ring elements.
    RingElement formal_sum(const RingElement& x, const RingElement& y) const;
    /// [a](x) evaluated at a nilpotent ring element.
    RingElement formal_act(unsigned long a, const RingElement& x) const;

    /// Homomorphic image; the axioms are preserved so no revalidation happens.
    FormalModuleLaw base_change(const RingHom& hom) const;

    nlohmann::ordered_json to_json() const;

private:
    struct Unchecked {};
    FormalModuleLaw(Unchecked, TruncatedSeries F, std::string name, std::optional<Height> known_height,
                    std::optional<LawLogarithm> logarithm);

    struct Cache {
        std::mutex mutex;
        std::map<std::pair<unsigned long, unsigned>, TruncatedSeries> a_series;
    };
    TruncatedSeries a_series_through(unsigned long a, unsigned D) const;

    TruncatedSeries F_;
    std::string name_;
    std::optional<Height> known_height_;
    std::optional<LawLogarithm> logarithm_;
    std::shared_ptr<Cache> cache_;
};

/// Checks the law axioms through D; returns a description of the first failure.
std::optional<std::string> law_axiom_failure(const TruncatedSeries& F);

FormalModuleLaw fgl_additive(const CoefficientRing& ring, unsigned D);
FormalModuleLaw fgl_multiplicative(const CoefficientRing& ring, unsigned D);
/// F = exp(log X + log Y) over a Q-algebra.
FormalModuleLaw fgl_from_log(const TruncatedSeries& log, unsigned D);
/// Logarithm of a law over a Q-algebra.
TruncatedSeries fgl_log(const FormalModuleLaw& F);
/// F(X, Y) through an arbitrary degree, rebuilt from the law's logarithm.
TruncatedSeries law_series_through(const FormalModuleLaw& F, unsigned D);

/// Log coefficients m_k (of X^{p^k}) from p m_k = sum_{i=1}^k m_{k-i} v_i^{p^{k-i}}, m_0 = 1.
std::vector<RingElement> hazewinkel_log_coefficients(const CoefficientRing& ring, const Integer& p,
                                                     const std::vector<RingElement>& v, unsigned count);

/// p-typical law with Hazewinkel generators v_1, v_2, ... (missing ones are 0) specialized in `ring`.
FormalModuleLaw ptypical_universal(unsigned n, const Integer& p, const std::vector<RingElement>& v,
                                   const CoefficientRing& ring, unsigned D);
FormalModuleLaw honda_law(unsigned n, const Integer& p, unsigned D);

struct DeformationRingPresentation {
    CoefficientRing base;
    CoefficientRing ring;
    std::vector<std::string> variables;
    unsigned height = 0;
    unsigned precision = 0;
    /// u_i^K = 0 when K > 0; formal variables when K = 0.
    unsigned nilpotency = 0;
    unsigned D = 0;

    nlohmann::ordered_json to_json() const;
};

struct UniversalDeformation {
    FormalModuleLaw law;
    DeformationRingPresentation presentation;
};

UniversalDeformation universal_deformation(unsigned n, const Integer& p, unsigned N, unsigned D, unsigned K = 0);
/// Reduction map Z/p^N[u_1..] -> F_p sending every u_i to 0.
RingHom closed_fibre(const DeformationRingPresentation& presentation);

struct HeightReport {
    Height height;
    std::optional<unsigned> weierstrass_degree;
    unsigned tested_degree = 0;
};

/// log_p of the Weierstrass degree of [p](X) over a field of characteristic p.
HeightReport a_height(const FormalModuleLaw& F);

} // namespace ltforge::fgl

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/fgl/law.hpp"

namespace ltforge::level {

struct QuotientTowerOptions {
    unsigned long p = 2;
    /// Height.
    unsigned n = 1;
    /// Number of steps L_1 .. L_d, at most n.
    unsigned depth = 1;
    /// The base W(k)[[u]] is truncated to Z/p^N[u_i]/(u_i^K).
    unsigned precision = 2;
    unsigned nilpotency = 2;
    /// Guards on the height and on the series truncation needed for exact division.
    unsigned max_height = 2;
    unsigned max_degree = 512;
};

struct QuotientStep {
    unsigned j = 0;
    exact::CoefficientRing ring;
    std::string variable;
    /// Distinguished polynomial of [p](t)/prod(t - phi(a)) over the previous ring.
    exact::MonicPolynomial relation;
    unsigned rank = 0;
    unsigned divisor_degree = 0;
    unsigned series_degree = 0;
    bool exact = false;
};

struct QuotientTower {
    fgl::DeformationRingPresentation deformation;
    exact::CoefficientRing base;
    std::vector<QuotientStep> steps;

    exact::Integer total_rank() const;
    nlohmann::ordered_json to_json() const;
};

/// L_j = L_{j-1}[[t_j]] / ([p](t_j) / prod over a in span(e_1..e_{j-1}) of (t_j - phi_{j-1}(a))),
/// with phi_{j-1}(e_i) = t_i; each relation is brought to Weierstrass form before adjoining.
QuotientTower drinfeld_quotient_tower(const QuotientTowerOptions& opts);

} // namespace ltforge::level

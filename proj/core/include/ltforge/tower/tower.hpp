#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/fgl/law.hpp"

namespace ltforge::tower {

using exact::Integer;

/// n-fold tensor power of base[[X]]/[p^m](X) over the deformation ring.
struct TowerRingPresentation {
    unsigned n = 0;
    unsigned m = 0;
    unsigned long p = 0;
    fgl::DeformationRingPresentation base;
    std::vector<std::string> factors;
    /// Weierstrass degree of [p^m] over the base.
    unsigned factor_rank = 0;
    Integer rank;
    /// rank == p^{m n^2}.
    bool verified = false;
    unsigned D = 0;

    nlohmann::ordered_json to_json() const;
};

struct PresentationOptions {
    unsigned precision = 2;
    /// u_i^K = 0 in the truncated base.
    unsigned nilpotency = 2;
    /// Series truncation; 0 means p^{mn}.
    unsigned D = 0;
    unsigned max_degree = 4096;
};

TowerRingPresentation degen_ring_presentation(unsigned n, unsigned m, unsigned long p,
                                              const PresentationOptions& opts = {});

/// Integer polynomial, coefficients from the constant term up.
using IntPoly = std::vector<Integer>;

IntPoly intpoly_mul(const IntPoly& a, const IntPoly& b);
std::string intpoly_format(const IntPoly& a, const std::string& var = "Y");

struct CyclotomicComponent {
    unsigned j = 0;
    IntPoly polynomial;
    unsigned degree = 0;
    std::string label;
};

/// phi_0 = Y - 1 and phi_j = Phi_{p^j}(Y); the product is Y^{p^m} - 1.
std::vector<CyclotomicComponent> ht1_cyclotomic_decomposition(unsigned long p, unsigned m);
IntPoly component_product(const std::vector<CyclotomicComponent>& components);

/// Component map from level m to level m - 1: j -> j - 1 for j >= 1, 0 -> 0.
struct TowerMap {
    unsigned from_level = 0;
    unsigned to_level = 0;
    std::vector<unsigned> image;
};
TowerMap ht1_tower_map(unsigned m);
/// first then second.
TowerMap compose(const TowerMap& first, const TowerMap& second);

struct Stratum {
    /// Degeneration rank, the dimension of V.
    unsigned d = 0;
    /// V in reduced row echelon form.
    std::vector<std::vector<unsigned long>> rref;
    std::string label;
    /// The non-degenerate (d = 0) stratum is open and closed.
    bool open_and_closed = false;
};

struct StrataReport {
    unsigned n = 0;
    unsigned long p = 0;
    std::vector<Stratum> strata;
    std::vector<Integer> counts;
    Integer total;

    nlohmann::ordered_json to_json() const;
};

Integer gaussian_binomial(unsigned n, unsigned d, const Integer& q);
/// Every V in Gr_d(F_p^n), d = 0..n; GuardExceeded when there are more than `guard`.
StrataReport strata_level1(unsigned n, unsigned long p, const Integer& guard = Integer(1) << 20);

struct DecompositionBlock {
    unsigned degeneration_rank = 0;
    std::string component;
    Integer copies;
    /// Rank of the component's ring over Def(G) when known.
    std::optional<Integer> ring_rank;
    bool open_and_closed = false;
};

struct Ht2Report {
    unsigned long p = 0;
    std::vector<DecompositionBlock> blocks;
    Integer total_strata;

    nlohmann::ordered_json to_json() const;
};

Ht2Report ht2_level1_report(unsigned long p);

struct H0Dimensions {
    std::vector<unsigned> dimensions;
    unsigned total = 0;
};

/// Dimension of H^0 of each height-1 component at level p^m.
H0Dimensions ht1_h0_dimensions(unsigned long p, unsigned m);

nlohmann::ordered_json cyclotomic_to_json(unsigned long p, unsigned m, const std::vector<CyclotomicComponent>& comps);

} // namespace ltforge::tower

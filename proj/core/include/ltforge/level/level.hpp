#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/fgl/law.hpp"
#include "ltforge/level/module.hpp"

namespace ltforge::level {

using exact::CoefficientRing;
using exact::RingElement;
using fgl::FormalModuleLaw;

/// Homomorphism (Z/p^m)^n -> G(m_B) given by the images of e_1..e_n.
class LevelMap {
public:
    /// Checks that every image is nilpotent and killed by [p^m].
    LevelMap(const FormalModuleLaw& F, unsigned m, std::vector<RingElement> images);

    const ModuleShape& shape() const noexcept { return shape_; }
    unsigned m() const noexcept { return shape_.m; }
    unsigned n() const noexcept { return shape_.n; }
    const std::vector<RingElement>& images() const noexcept { return images_; }

    nlohmann::ordered_json to_json(const CoefficientRing& ring) const;

private:
    ModuleShape shape_;
    std::vector<RingElement> images_;
};

/// phi(a) = sum of [a_i](x_i) under the formal sum.
RingElement eval_level_map(const FormalModuleLaw& F, const LevelMap& phi, const ModuleElement& a);

/// Either an explicit subset S of (Z/p^m)^n or the complement of a submodule V.
class DegenerationType {
public:
    struct ExplicitSubset {
        std::vector<ModuleElement> elements;
    };
    struct SubmoduleComplement {
        Submodule V;
    };

    static DegenerationType explicit_subset(const ModuleShape& s, std::vector<ModuleElement> elements);
    static DegenerationType complement_of(const Submodule& V);
    static DegenerationType empty(const ModuleShape& s);
    static DegenerationType full(const ModuleShape& s);

    const ModuleShape& shape() const noexcept { return shape_; }
    const std::variant<ExplicitSubset, SubmoduleComplement>& value() const noexcept { return value_; }

    bool contains(const ModuleElement& a) const;
    /// Elements outside S, lexicographic.
    std::vector<ModuleElement> excluded(const Integer& guard) const;
    bool is_subset_of(const DegenerationType& other, const Integer& guard) const;

    std::string format() const;
    nlohmann::ordered_json to_json() const;

private:
    DegenerationType(ModuleShape s, std::variant<ExplicitSubset, SubmoduleComplement> v)
        : shape_(s), value_(std::move(v)) {}
    ModuleShape shape_;
    std::variant<ExplicitSubset, SubmoduleComplement> value_;
};

/// Domain of a partial level structure.
/// "{(1),(2)}", "cancel(<(1,0)>)", "empty" or "full".
DegenerationType parse_degeneration_type(const ModuleShape& s, const std::string& text);

using PartialDomain = Submodule;

struct DivisibilityVerdict {
    bool divides = false;
    /// The verdict holds for the untruncated series (see monic_divide).
    bool exact = false;
    unsigned divisor_degree = 0;
    unsigned tested_degree = 0;
};

/// Whether prod over `points` of (X - phi(a)) divides f.
DivisibilityVerdict product_divides(const FormalModuleLaw& F, const LevelMap& phi,
                                    const std::vector<ModuleElement>& points, const exact::TruncatedSeries& f);

struct DrinfeldReport {
    /// Product over the p-torsion divides [p](X).
    DivisibilityVerdict form1;
    /// Product over all of (Z/p^m)^n divides [p^m](X).
    DivisibilityVerdict form2;
};

/// Both forms; InvariantError if two exact verdicts disagree.
DrinfeldReport drinfeld_report(const FormalModuleLaw& F, const LevelMap& phi);
bool drinfeld_check(const FormalModuleLaw& F, const LevelMap& phi);
DivisibilityVerdict degenerating_report(const FormalModuleLaw& F, const LevelMap& phi, const DegenerationType& S);
bool degenerating_check(const FormalModuleLaw& F, const LevelMap& phi, const DegenerationType& S);
/// Product over a p-torsion domain D divides [p](X).
DivisibilityVerdict partial_drinfeld_report(const FormalModuleLaw& F, const LevelMap& phi, const PartialDomain& D);
bool partial_drinfeld_check(const FormalModuleLaw& F, const LevelMap& phi, const PartialDomain& D);

struct EnumerationOptions {
    /// Upper bound on ring sizes and on the number of maps.
    Integer guard = Integer(1) << 20;
    unsigned threads = 1;
};

/// [p^m]-torsion points of G(m_B), ordered by the ring's canonical order.
std::vector<RingElement> torsion_points(const FormalModuleLaw& F, unsigned m, const EnumerationOptions& opts = {});
/// All n-tuples of torsion points, lexicographic in that order.
std::vector<LevelMap> enumerate_level_maps(const FormalModuleLaw& F, unsigned m, unsigned n,
                                           const EnumerationOptions& opts = {});
std::vector<LevelMap> enumerate_drinfeld(const FormalModuleLaw& F, unsigned m, unsigned n,
                                         const EnumerationOptions& opts = {});
std::vector<LevelMap> enumerate_degenerating(const FormalModuleLaw& F, unsigned m, unsigned n,
                                             const DegenerationType& S, const EnumerationOptions& opts = {});

/// Truncation degree at which checks of maps of this shape are exact for laws over `ring`.
unsigned exact_check_degree(const CoefficientRing& ring, unsigned long p, unsigned m, unsigned n);

} // namespace ltforge::level

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/exact/ring.hpp"

namespace ltforge::ss {

using exact::Integer;

/// (s, t)
using Bidegree = std::pair<int, int>;

enum class Copy { none, bottom, top };
std::string copy_name(Copy c);

struct Entry {
    std::string label;
    /// Unset means unknown; unknown entries count as possibly nonzero.
    std::optional<Integer> dimension;
    Copy copy = Copy::none;

    bool possibly_nonzero() const { return !dimension || *dimension != 0; }
};

struct BigradedPage {
    unsigned r = 1;
    std::map<Bidegree, Entry> entries;

    /// Throws DomainError when an entry has s < 0 or r == 0.
    void validate() const;
    nlohmann::ordered_json to_json() const;
    /// Text chart: rows t descending, columns s ascending.
    std::string chart() const;
};

Bidegree differential_target(unsigned r, int s, int t);
/// Inclusive s-range [n-1, 2n-2].
std::pair<int, int> vanishing_window(unsigned n);

struct Obstruction {
    unsigned r = 0;
    Bidegree source;
    Bidegree target;
    std::string copy;
};

struct CollapseReport {
    bool collapses = true;
    unsigned max_r = 0;
    std::vector<Obstruction> obstructions;

    nlohmann::ordered_json to_json() const;
};

/// Copy tag of every supported bidegree.
using Splitting = std::map<Bidegree, std::string>;
/// Splitting from the entries' own copy tags.
Splitting splitting_from_tags(const BigradedPage& page);

/// Every (r, source, target) with both ends possibly nonzero in the same copy, 1 <= r <= max_r.
/// max_r = 0 uses the s-span of the support, beyond which no target can be supported.
CollapseReport parity_collapse_check(const BigradedPage& page, const Splitting& splitting, unsigned max_r = 0);
CollapseReport parity_collapse_check(const BigradedPage& page, unsigned max_r = 0);

struct ConvergenceReport {
    bool converges = true;
    int lower_homotopy_bound = 0;
    int cohomological_dimension = 0;
    std::vector<Bidegree> outside;
};

/// Support inside the band 0 <= s <= M.
ConvergenceReport strong_convergence_check(const BigradedPage& page, int lower_homotopy_bound, int M);

struct LedgerRow {
    int s = 0;
    int w = 0;
    std::string label;
    Copy copy = Copy::bottom;
    bool supercuspidal = false;
};

struct JlLedger {
    unsigned n = 0;
    std::vector<LedgerRow> rows;
    std::vector<std::string> annotations;

    nlohmann::ordered_json to_json() const;
    std::string chart() const;
};

/// ceil((s - n) / 2)
int tate_twist(int s, unsigned n);
JlLedger jl_filtration_ledger(unsigned n);

/// basePage plus its t + 1 shift; base entries become bottom, shifted ones top.
BigradedPage two_copy_page(const BigradedPage& base);

/// Even-t entries over the window, t in [0, t_max]. Height-1 entries carry the H^0 dimension p^m.
BigradedPage window_page(unsigned n, int t_max, unsigned long p = 2, unsigned m = 1);

struct MultiplicityTable {
    unsigned m = 0;
    /// Components at level m mapping to sublevel j.
    std::vector<unsigned> at_level;
    /// Copies of sublevel j across levels 0..m.
    std::vector<unsigned> cumulative;

    nlohmann::ordered_json to_json() const;
};

MultiplicityTable ht1_component_multiplicity(unsigned m);

} // namespace ltforge::ss

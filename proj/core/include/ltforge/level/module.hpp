#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltforge/exact/ring.hpp"

namespace ltforge::level {

using exact::Integer;

/// Element of (Z/p^m)^n; entries in [0, p^m).
using ModuleElement = std::vector<unsigned long>;

struct ModuleShape {
    unsigned long p = 2;
    unsigned m = 1;
    unsigned n = 1;

    /// p^m (throws DomainError if it does not fit a machine word).
    unsigned long modulus() const;
    /// p^{mn}.
    Integer size() const;
    bool operator==(const ModuleShape&) const = default;
};

ModuleShape make_shape(unsigned long p, unsigned m, unsigned n);

ModuleElement module_zero(const ModuleShape& s);
/// e_i.
ModuleElement module_basis(const ModuleShape& s, unsigned i);
ModuleElement module_add(const ModuleShape& s, const ModuleElement& a, const ModuleElement& b);
ModuleElement module_scale(const ModuleShape& s, unsigned long c, const ModuleElement& a);
/// Throws DomainError unless a has n entries in range.
void check_element(const ModuleShape& s, const ModuleElement& a);
/// Every element, lexicographic; GuardExceeded when p^{mn} > guard.
std::vector<ModuleElement> all_elements(const ModuleShape& s, const Integer& guard);
std::string format_element(const ModuleElement& a);
ModuleElement parse_element(const ModuleShape& s, const std::string& text);
/// "(1,0),(0,1)"; whitespace ignored, empty text gives no elements.
std::vector<ModuleElement> parse_element_list(const ModuleShape& s, const std::string& text);

/// Submodule of (Z/p^m)^n held in Howell normal form, so equal submodules have
/// equal rows. At m = 1 this is the reduced row echelon form.
class Submodule {
public:
    Submodule(ModuleShape shape, const std::vector<ModuleElement>& generators);

    static Submodule zero(const ModuleShape& s);
    static Submodule full(const ModuleShape& s);

    const ModuleShape& shape() const noexcept { return shape_; }
    const std::vector<ModuleElement>& rows() const noexcept { return rows_; }

    bool contains(const ModuleElement& a) const;
    bool is_subset_of(const Submodule& other) const;
    Integer size() const;
    /// log_p of the size.
    unsigned length() const;
    /// Every element, lexicographic; GuardExceeded when the size exceeds guard.
    std::vector<ModuleElement> elements(const Integer& guard) const;
    /// Killed by p.
    bool is_p_torsion() const;

    std::string format() const;
    nlohmann::ordered_json to_json() const;
    bool operator==(const Submodule& other) const { return shape_ == other.shape_ && rows_ == other.rows_; }

private:
    ModuleShape shape_;
    std::vector<ModuleElement> rows_;
    std::vector<unsigned> pivot_col_;
    std::vector<unsigned> pivot_val_;
};

/// p-torsion part p^{m-1} (Z/p^m)^n.
Submodule p_torsion_submodule(const ModuleShape& s);
/// "<(1,0),(0,1)>" or a bare generator list.
Submodule parse_submodule(const ModuleShape& s, const std::string& text);

} // namespace ltforge::level

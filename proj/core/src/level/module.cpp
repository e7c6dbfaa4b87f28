#include "ltforge/level/module.hpp"

#include <algorithm>
#include <sstream>

#include "ltforge/errors.hpp"

namespace ltforge::level {

unsigned long ModuleShape::modulus() const {
    Integer q = exact::integer_pow(p, m);
    if (!q.fits_ulong_p() || q > Integer(1UL << 40)) throw DomainError("module modulus p^m too large");
    return q.get_ui();
}

Integer ModuleShape::size() const { return exact::integer_pow(p, static_cast<unsigned long>(m) * n); }

ModuleShape make_shape(unsigned long p, unsigned m, unsigned n) {
    if (!exact::is_prime(p)) throw DomainError("module shape: p must be prime");
    if (n == 0) throw DomainError("module shape: n must be positive");
    ModuleShape s{p, m, n};
    (void)s.modulus();
    return s;
}

ModuleElement module_zero(const ModuleShape& s) { return ModuleElement(s.n, 0); }

ModuleElement module_basis(const ModuleShape& s, unsigned i) {
    if (i >= s.n) throw DomainError("basis index out of range");
    ModuleElement e(s.n, 0);
    e[i] = s.modulus() == 1 ? 0 : 1;
    return e;
}

ModuleElement module_add(const ModuleShape& s, const ModuleElement& a, const ModuleElement& b) {
    const unsigned long q = s.modulus();
    ModuleElement r(s.n);
    for (unsigned i = 0; i < s.n; ++i) r[i] = (a[i] + b[i]) % q;
    return r;
}

ModuleElement module_scale(const ModuleShape& s, unsigned long c, const ModuleElement& a) {
    const unsigned long q = s.modulus();
    ModuleElement r(s.n);
    for (unsigned i = 0; i < s.n; ++i)
        r[i] = static_cast<unsigned long>((static_cast<unsigned __int128>(c % q) * a[i]) % q);
    return r;
}

void check_element(const ModuleShape& s, const ModuleElement& a) {
    if (a.size() != s.n) throw DomainError("module element must have " + std::to_string(s.n) + " entries");
    const unsigned long q = s.modulus();
    for (unsigned long x : a)
        if (x >= q) throw DomainError("module element entry " + std::to_string(x) + " is not reduced mod " + std::to_string(q));
}

std::vector<ModuleElement> all_elements(const ModuleShape& s, const Integer& guard) {
    if (s.size() > guard)
        throw GuardExceeded("module has " + s.size().get_str() + " elements, above the guard " + guard.get_str());
    const unsigned long q = s.modulus();
    std::vector<ModuleElement> out;
    ModuleElement cur(s.n, 0);
    while (true) {
        out.push_back(cur);
        int i = static_cast<int>(s.n) - 1;
        while (i >= 0 && cur[i] + 1 == q) cur[i--] = 0;
        if (i < 0) break;
        ++cur[i];
    }
    return out;
}

std::string format_element(const ModuleElement& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
    return s + ")";
}

ModuleElement parse_element(const ModuleShape& s, const std::string& text) {
    std::string t;
    for (char c : text)
        if (c != ' ' && c != '(' && c != ')' && c != '[' && c != ']') t += c;
    ModuleElement a;
    std::stringstream ss(t);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        if (piece.empty() || piece.find_first_not_of("0123456789") != std::string::npos)
            throw DomainError("cannot parse module element '" + text + "'");
        a.push_back(std::stoul(piece) % s.modulus());
    }
    check_element(s, a);
    return a;
}

std::vector<ModuleElement> parse_element_list(const ModuleShape& s, const std::string& text) {
    std::vector<ModuleElement> out;
    std::string t;
    for (char c : text)
        if (c != ' ') t += c;
    std::size_t i = 0;
    while (i < t.size()) {
        if (t[i] == ',') {
            ++i;
            continue;
        }
        if (t[i] != '(') throw DomainError("cannot parse element list '" + text + "'");
        std::size_t close = t.find(')', i);
        if (close == std::string::npos) throw DomainError("unbalanced parenthesis in '" + text + "'");
        out.push_back(parse_element(s, t.substr(i, close - i + 1)));
        i = close + 1;
    }
    return out;
}

namespace {

unsigned vp(unsigned long x, unsigned long p, unsigned m) {
    if (x == 0) return m;
    unsigned v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

unsigned long inverse_mod(unsigned long a, unsigned long q) {
    Integer r;
    Integer A(a), Q(q);
    if (!mpz_invert(r.get_mpz_t(), A.get_mpz_t(), Q.get_mpz_t())) throw InvariantError("non-invertible pivot unit");
    return r.get_ui();
}

unsigned long pow_ul(unsigned long p, unsigned k) {
    unsigned long r = 1;
    while (k--) r *= p;
    return r;
}

} // namespace

Submodule::Submodule(ModuleShape shape, const std::vector<ModuleElement>& generators) : shape_(shape) {
    const unsigned long q = shape_.modulus();
    const unsigned long p = shape_.p;
    const unsigned m = shape_.m;
    std::vector<ModuleElement> work;
    for (const auto& g : generators) {
        check_element(shape_, g);
        if (std::any_of(g.begin(), g.end(), [](unsigned long x) { return x != 0; })) work.push_back(g);
    }
    auto axpy = [&](ModuleElement& row, unsigned long c, const ModuleElement& piv) {
        // row -= c * piv
        for (unsigned i = 0; i < shape_.n; ++i) {
            unsigned long t = static_cast<unsigned long>((static_cast<unsigned __int128>(c % q) * piv[i]) % q);
            row[i] = (row[i] + q - t) % q;
        }
    };
    std::size_t r = 0;
    for (unsigned c = 0; c < shape_.n && m > 0; ++c) {
        std::size_t best = work.size();
        unsigned best_v = m;
        for (std::size_t i = r; i < work.size(); ++i) {
            unsigned v = vp(work[i][c], p, m);
            if (v < best_v) {
                best_v = v;
                best = i;
            }
        }
        if (best == work.size()) continue;
        std::swap(work[r], work[best]);
        const unsigned long pv = pow_ul(p, best_v);
        const unsigned long unit = work[r][c] / pv;
        work[r] = module_scale(shape_, inverse_mod(unit, q), work[r]);
        for (std::size_t i = 0; i < work.size(); ++i) {
            if (i == r) continue;
            unsigned long x = work[i][c];
            if (x == 0) continue;
            // exact below the pivot, reduction into [0, p^v) above it
            axpy(work[i], x / pv, work[r]);
        }
        // Howell closure: p^{m-v} times the pivot row lives in the later columns
        if (best_v > 0) {
            ModuleElement extra = module_scale(shape_, pow_ul(p, m - best_v), work[r]);
            if (std::any_of(extra.begin(), extra.end(), [](unsigned long x) { return x != 0; }))
                work.push_back(extra);
        }
        pivot_col_.push_back(c);
        pivot_val_.push_back(best_v);
        ++r;
        std::vector<ModuleElement> rest(work.begin() + static_cast<long>(r), work.end());
        work.resize(r);
        for (auto& row : rest)
            if (std::any_of(row.begin(), row.end(), [](unsigned long x) { return x != 0; })) work.push_back(row);
    }
    work.resize(r);
    rows_ = std::move(work);
}

Submodule Submodule::zero(const ModuleShape& s) { return Submodule(s, {}); }

Submodule Submodule::full(const ModuleShape& s) {
    std::vector<ModuleElement> gens;
    for (unsigned i = 0; i < s.n; ++i) gens.push_back(module_basis(s, i));
    return Submodule(s, gens);
}

bool Submodule::contains(const ModuleElement& a) const {
    check_element(shape_, a);
    ModuleElement v = a;
    const unsigned long q = shape_.modulus();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const unsigned c = pivot_col_[i];
        const unsigned long pv = pow_ul(shape_.p, pivot_val_[i]);
        if (v[c] % pv != 0) return false;
        const unsigned long k = v[c] / pv;
        for (unsigned j = 0; j < shape_.n; ++j) {
            unsigned long t = static_cast<unsigned long>((static_cast<unsigned __int128>(k) * rows_[i][j]) % q);
            v[j] = (v[j] + q - t) % q;
        }
    }
    return std::all_of(v.begin(), v.end(), [](unsigned long x) { return x == 0; });
}

bool Submodule::is_subset_of(const Submodule& other) const {
    if (!(shape_ == other.shape_)) throw DomainError("submodules live in different modules");
    return std::all_of(rows_.begin(), rows_.end(), [&](const ModuleElement& r) { return other.contains(r); });
}

unsigned Submodule::length() const {
    unsigned l = 0;
    for (unsigned v : pivot_val_) l += shape_.m - v;
    return l;
}

Integer Submodule::size() const { return exact::integer_pow(shape_.p, length()); }

std::vector<ModuleElement> Submodule::elements(const Integer& guard) const {
    if (size() > guard) throw GuardExceeded("submodule has " + size().get_str() + " elements, above the guard " + guard.get_str());
    std::vector<ModuleElement> out{module_zero(shape_)};
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const unsigned long order = pow_ul(shape_.p, shape_.m - pivot_val_[i]);
        std::vector<ModuleElement> next;
        next.reserve(out.size() * order);
        ModuleElement step = module_zero(shape_);
        for (unsigned long k = 0; k < order; ++k) {
            for (const auto& x : out) next.push_back(module_add(shape_, x, step));
            step = module_add(shape_, step, rows_[i]);
        }
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Submodule::is_p_torsion() const {
    return std::all_of(rows_.begin(), rows_.end(), [&](const ModuleElement& r) {
        auto pr = module_scale(shape_, shape_.p, r);
        return std::all_of(pr.begin(), pr.end(), [](unsigned long x) { return x == 0; });
    });
}

std::string Submodule::format() const {
    std::string s = "<";
    for (std::size_t i = 0; i < rows_.size(); ++i) s += (i ? "," : "") + format_element(rows_[i]);
    return s + ">";
}

nlohmann::ordered_json Submodule::to_json() const {
    nlohmann::ordered_json j;
    j["p"] = shape_.p;
    j["m"] = shape_.m;
    j["n"] = shape_.n;
    j["rows"] = rows_;
    j["length"] = length();
    return j;
}

Submodule p_torsion_submodule(const ModuleShape& s) {
    std::vector<ModuleElement> gens;
    const unsigned long c = s.m == 0 ? 0 : pow_ul(s.p, s.m - 1);
    for (unsigned i = 0; i < s.n; ++i) gens.push_back(module_scale(s, c, module_basis(s, i)));
    return Submodule(s, gens);
}

Submodule parse_submodule(const ModuleShape& s, const std::string& text) {
    std::string t;
    for (char c : text)
        if (c != ' ') t += c;
    if (!t.empty() && t.front() == '<') {
        if (t.back() != '>') throw DomainError("cannot parse submodule '" + text + "'");
        t = t.substr(1, t.size() - 2);
    }
    return Submodule(s, parse_element_list(s, t));
}

} // namespace ltforge::level

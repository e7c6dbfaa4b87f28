#include <doctest.h>

#include <random>
#include <thread>

#include "ltforge/errors.hpp"
#include "ltforge/fgl/law.hpp"
#include "random.hpp"

using namespace ltforge;
using namespace ltforge::exact;
using namespace ltforge::fgl;
using testing_support::binomial_minus_one;
using testing_support::poly;

namespace {

TruncatedSeries monomial(const CoefficientRing& R, unsigned k, unsigned D) {
    TruncatedSeries s(R, {"X"}, D);
    s.set(unit_exponents(0, k), R.one());
    return s;
}

// log coefficients straight from the recursion, written out for two steps
BigRational m1(long v1, long p) { return BigRational(v1, p); }
BigRational m2(long v1, long v2, long p) {
    Integer v1p = integer_pow(v1, p);
    return BigRational(v2, p) + BigRational(Integer(v1) * v1p, p * p);
}

// Z/p^N[u1]: c_0 + c_1 u1 + ... lies in (p, u1)^2 iff p^2 | c_0 and p | c_1
bool in_square_of_maximal_ideal(const CoefficientRing& R, const RingElement& a, long p) {
    auto divisible = [](const BigRational& q, long d) { return mpz_divisible_ui_p(q.get_num_mpz_t(), d) != 0; };
    return divisible(R.coefficient(a, Exponents{}), p * p) && divisible(R.coefficient(a, unit_exponents(0, 1)), p);
}

} // namespace

TEST_CASE("additive law") {
    auto F3 = CoefficientRing::prime_field(3);
    auto law = fgl_additive(F3, 6);
    CHECK(law.a_series(3).is_zero());
    CHECK(law.a_series(2) == poly(F3, {0, 2}, 6));
    auto h = a_height(law);
    CHECK(h.height.infinite);
    CHECK(h.tested_degree == 6);
    CHECK(!law_axiom_failure(law.F()));
    REQUIRE(law.known_height());
    CHECK(law.known_height()->infinite);
}

TEST_CASE("multiplicative p-series is a shifted binomial") {
    auto Z = CoefficientRing::integers();
    auto law = fgl_multiplicative(Z, 4);
    CHECK(format_series(law.a_series(3)) == "3*X + 3*X^2 + X^3");
    CHECK(law.a_series(1) == monomial(Z, 1, 4));
    CHECK(law.a_series(0).is_zero());
    CHECK(law.a_series(4) == binomial_minus_one(Z, 4, 4));
    CHECK(law.pm_series(2, 2) == binomial_minus_one(Z, 4, 4));
    for (unsigned p : {2u, 3u, 5u}) {
        auto R = CoefficientRing::integers_mod_prime_power(p, 3);
        auto m = fgl_multiplicative(R, 12);
        CHECK(m.a_series(p) == binomial_minus_one(R, p, 12));
        auto Fp = CoefficientRing::prime_field(p);
        auto red = m.base_change(RingHom(R, Fp, {}));
        CHECK(red.a_series(p) == monomial(Fp, p, 12));
        auto h = a_height(fgl_multiplicative(Fp, 2 * p));
        CHECK(h.height == Height{false, 1});
        CHECK(h.weierstrass_degree == p);
    }
}

TEST_CASE("a-series addition and iteration identities") {
    std::mt19937_64 rng(7);
    auto R = CoefficientRing::integers_mod_prime_power(2, 4);
    auto G = universal_deformation(2, 2, 4, 8, 3).law;
    std::uniform_int_distribution<unsigned> small(0, 9);
    for (int trial = 0; trial < 4; ++trial) {
        unsigned a = small(rng), b = small(rng);
        CHECK(G.a_series(a + b) == G.apply(G.a_series(a), G.a_series(b)));
    }
    CHECK(G.pm_series(2, 2) == G.a_series(4));
    CHECK(G.pm_series(2, 3) == G.a_series(8));
    auto m = fgl_multiplicative(R, 9);
    CHECK(m.pm_series(2, 3) == binomial_minus_one(R, 8, 9));
    // the [a]-series is aX modulo X^2
    for (unsigned a : {3u, 5u, 6u}) CHECK(G.a_series(a).coefficient(1u) == G.ring().from_int(a));
}

TEST_CASE("a-series from the logarithm agrees with the addition chain") {
    auto R = CoefficientRing::integers_mod_prime_power(3, 2);
    auto m = fgl_multiplicative(R, 10);
    CHECK(m.a_series_via_log(3, 10) == m.a_series(3));
    CHECK(m.a_series_via_log(5, 14) == binomial_minus_one(R, 5, 14));
    auto h = honda_law(2, 2, 8);
    CHECK(h.a_series_via_log(2, 8) == h.a_series(2));
    auto big = h.a_series_via_log(2, 20);
    CHECK(big.coefficient(4u) == CoefficientRing::prime_field(2).one());
    CHECK(equal_through(big.truncate(8), h.a_series(2), 8));
    CHECK_THROWS_AS(FormalModuleLaw(m.F()).a_series_via_log(3, 6), DomainError);
}

TEST_CASE("laws from logarithms and back") {
    auto Q = CoefficientRing::rationals();
    auto x = monomial(Q, 1, 6);
    auto add = fgl_from_log(x, 6);
    CHECK(add.F() == series_add(TruncatedSeries::variable(Q, {"X", "Y"}, 0, 6),
                                TruncatedSeries::variable(Q, {"X", "Y"}, 1, 6)));
    // X + X^2/2 + X^4/4 at p = 2
    TruncatedSeries l(Q, {"X"}, 4);
    l.set(unit_exponents(0, 1), Q.one());
    l.set(unit_exponents(0, 2), Q.from_rational(BigRational(1, 2)));
    l.set(unit_exponents(0, 4), Q.from_rational(BigRational(1, 4)));
    auto G = fgl_from_log(l, 4);
    CHECK(G.F().coefficient(Exponents{{1, 1}}) == Q.from_int(-1));
    // oracle: l(F(X, Y)) = l(X) + l(Y)
    auto lx = series_embed(l, {"X", "Y"}, {0});
    auto ly = series_embed(l, {"X", "Y"}, {1});
    CHECK(series_compose(l, G.F()) == series_add(lx, ly));
    CHECK(fgl_log(G) == l);
    TruncatedSeries log1p(Q, {"X"}, 7);
    for (unsigned k = 1; k <= 7; ++k) log1p.set(unit_exponents(0, k), Q.from_rational(BigRational(k % 2 ? 1 : -1, k)));
    CHECK(fgl_log(fgl_multiplicative(Q, 7)) == log1p);
    CHECK(fgl_from_log(log1p, 7).F() == fgl_multiplicative(Q, 7).F());
    TruncatedSeries bad(Q, {"X"}, 4);
    bad.set(unit_exponents(0, 2), Q.one());
    CHECK_THROWS_AS(fgl_from_log(bad, 4), DomainError);
    CHECK_THROWS_AS(fgl_from_log(monomial(CoefficientRing::integers(), 1, 4), 4), DomainError);
}

TEST_CASE("validator rejects broken laws") {
    auto Z = CoefficientRing::integers();
    const std::vector<std::string> v{"X", "Y"};
    auto X = TruncatedSeries::variable(Z, v, 0, 4);
    auto Y = TruncatedSeries::variable(Z, v, 1, 4);
    auto sum = series_add(X, Y);
    CHECK_THROWS_AS(FormalModuleLaw(series_add(sum, series_mul(X, X))), DomainError);
    auto nc = sum;
    nc.set(Exponents{{1, 2}}, Z.one());
    CHECK(law_axiom_failure(nc) == std::optional<std::string>("F is not commutative"));
    auto na = sum;
    na.set(Exponents{{1, 1}}, Z.one());
    na.set(Exponents{{2, 2}}, Z.one());
    CHECK(law_axiom_failure(na).has_value());
    CHECK_NOTHROW(FormalModuleLaw(series_add(sum, series_mul(X, Y))));
}

TEST_CASE("Hazewinkel recursion against hand-expanded coefficients") {
    auto Q = CoefficientRing::rationals();
    for (long p : {2L, 3L}) {
        auto m = hazewinkel_log_coefficients(Q, p, {Q.from_int(5), Q.from_int(7)}, 3);
        CHECK(m[0] == Q.one());
        CHECK(m[1] == Q.from_rational(m1(5, p)));
        CHECK(m[2] == Q.from_rational(m2(5, 7, p)));
    }
}

TEST_CASE("p-typical laws") {
    for (unsigned p : {2u, 3u}) {
        auto R = CoefficientRing::integers_mod_prime_power(p, 3);
        auto Fp = CoefficientRing::prime_field(p);
        auto D = p * p;
        auto law = ptypical_universal(1, p, {R.one()}, R, D);
        CHECK(law.a_series(p).coefficient(1u) == R.from_int(p));
        CHECK(law.base_change(RingHom(R, Fp, {})).a_series(p) == monomial(Fp, p, D));
        auto zero = ptypical_universal(1, p, {}, R, D);
        CHECK(zero.F() == fgl_additive(R, D).F());
        CHECK_THROWS_AS(ptypical_universal(2, p, {R.one()}, R, D - 1), DomainError);
    }
    auto Z = CoefficientRing::integers();
    auto overZ = ptypical_universal(1, 2, {Z.one()}, Z, 6);
    CHECK(overZ.a_series(2).coefficient(1u) == Z.from_int(2));
}

TEST_CASE("Honda laws have p-power p-series") {
    auto F2 = CoefficientRing::prime_field(2);
    CHECK(honda_law(2, 2, 8).a_series(2) == monomial(F2, 4, 8));
    CHECK(honda_law(1, 3, 9).a_series(3) == monomial(CoefficientRing::prime_field(3), 3, 9));
    for (unsigned p : {2u, 3u})
        for (unsigned n = 1; n <= 3; ++n) {
            unsigned D = 1;
            for (unsigned i = 0; i < n; ++i) D *= p;
            auto h = honda_law(n, p, D);
            auto rep = a_height(h);
            CHECK(rep.height == Height{false, n});
            CHECK(rep.weierstrass_degree == D);
            CHECK(h.known_height() == Height{false, n});
        }
    auto h = honda_law(1, 2, 8);
    for (unsigned m = 1; m <= 3; ++m) CHECK(weierstrass_degree(h.pm_series(2, m)).degree == (1u << m));
    auto h2 = honda_law(2, 2, 16);
    CHECK(weierstrass_degree(h2.pm_series(2, 2)).degree == 16u);
    CHECK_THROWS_AS(honda_law(2, 2, 3), DomainError);
}

TEST_CASE("universal deformations reduce to Honda laws") {
    for (unsigned p : {2u, 3u}) {
        unsigned D = p * p;
        auto U = universal_deformation(2, p, 2, D);
        const auto& pres = U.presentation;
        CHECK(pres.variables == std::vector<std::string>{"u1"});
        auto closed = U.law.base_change(closed_fibre(pres));
        CHECK(closed.F() == honda_law(2, p, D).F());
        CHECK(a_height(closed).height == Height{false, 2});
        // [p](X) = pX + ... + u1 X^p + ... + X^{p^2} modulo (p, u1)^2
        auto s = U.law.a_series(p);
        const auto& R = pres.ring;
        CHECK(s.coefficient(1u) == R.from_int(p));
        CHECK(in_square_of_maximal_ideal(R, R.sub(s.coefficient(p), R.generator("u1")), p));
        CHECK(!in_square_of_maximal_ideal(R, s.coefficient(p), p));
        CHECK(R.is_unit(s.coefficient(D)));
        for (unsigned k = 2; k < D; ++k)
            if (k != p) CHECK(!R.is_unit(s.coefficient(k)));
    }
    auto U3 = universal_deformation(3, 2, 1, 8, 3);
    CHECK(U3.presentation.variables.size() == 2);
    CHECK(a_height(U3.law.base_change(closed_fibre(U3.presentation))).height == Height{false, 3});
    auto U1 = universal_deformation(1, 3, 2, 9);
    CHECK(U1.presentation.variables.empty());
    CHECK(U1.law.base_change(closed_fibre(U1.presentation)).a_series(3) ==
          monomial(CoefficientRing::prime_field(3), 3, 9));
}

TEST_CASE("formal sums in finite rings") {
    auto R = CoefficientRing::nilpotent_extension(CoefficientRing::prime_field(3), "e", 2);
    auto e = R.generator("e");
    auto m = fgl_multiplicative(R, 4);
    CHECK(m.formal_sum(e, R.zero()) == e);
    CHECK(m.formal_sum(e, e) == R.mul(R.from_int(2), e));
    CHECK(m.formal_act(3, e).is_zero());
    CHECK(m.formal_act(2, e) == R.mul(R.from_int(2), e));
    CHECK_THROWS_AS(m.formal_sum(R.one(), e), DomainError);
    auto S = CoefficientRing::nilpotent_extension(CoefficientRing::integers_mod_prime_power(2, 2), "t", 4);
    auto t = S.generator("t");
    auto ms = fgl_multiplicative(S, 6);
    // (1+t)(1+t) - 1 = 2t + t^2
    CHECK(ms.formal_sum(t, t) == S.add(S.mul(S.from_int(2), t), S.mul(t, t)));
    CHECK(ms.formal_act(4, t) == S.parse("4*t + 6*t^2 + 4*t^3"));
    CHECK_THROWS_AS(fgl_multiplicative(S, 2).formal_sum(t, t), DomainError);
}

TEST_CASE("concurrent a-series queries agree") {
    auto G = universal_deformation(2, 2, 3, 8, 3).law;
    std::vector<TruncatedSeries> out(4, TruncatedSeries(G.ring(), {"X"}, 8));
    std::vector<std::thread> threads;
    for (unsigned i = 0; i < 4; ++i) threads.emplace_back([&, i] { out[i] = G.a_series(5 + (i % 2)); });
    for (auto& th : threads) th.join();
    CHECK(out[0] == out[2]);
    CHECK(out[1] == out[3]);
    CHECK(out[0] == G.apply(G.a_series(2), G.a_series(3)));
}

TEST_CASE("law serialization") {
    auto law = fgl_multiplicative(CoefficientRing::prime_field(2), 2);
    auto j = law.to_json();
    CHECK(j["ring"] == "F2");
    CHECK(j["D"] == 2);
    CHECK(j["knownHeight"] == 1);
    CHECK(j["F"]["terms"].size() == 3);
    CHECK(fgl_additive(CoefficientRing::integers(), 2).to_json()["knownHeight"].is_null());
}

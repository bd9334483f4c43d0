#include <doctest.h>

#include <cmath>

#include "mixneu/error.hpp"
#include "mixneu/fields.hpp"
#include "mixneu/mesh.hpp"

using namespace mixneu;

namespace {

ErrorKind kind_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Config;
}

PiecewiseField field(std::vector<double> breaks, std::vector<double> values) {
    return {std::move(breaks), std::move(values), FieldRole::Weight};
}

}  // namespace

TEST_CASE("operator parameters") {
    validate(OperatorParams{1.0, 0.0, 0.5, 1});
    validate(OperatorParams{0.0, 1.0, 0.25, 1});
    CHECK(kind_of([] { validate(OperatorParams{0.0, 0.0, 0.5, 1}); }) == ErrorKind::Config);
    CHECK(kind_of([] { validate(OperatorParams{-1.0, 1.0, 0.5, 1}); }) == ErrorKind::Config);
    CHECK(kind_of([] { validate(OperatorParams{1.0, 1.0, 1.0, 1}); }) == ErrorKind::Config);
    CHECK(kind_of([] { validate(OperatorParams{1.0, 1.0, 0.0, 1}); }) == ErrorKind::Config);
}

TEST_CASE("piecewise fields") {
    const PiecewiseField m = field({0.0, 0.25, 1.0}, {1.0, -1.0});
    validate(m, 0.0, 1.0);
    CHECK(m(0.1) == 1.0);
    CHECK(m(0.5) == -1.0);
    CHECK(integral(m) == doctest::Approx(-0.5));
    CHECK(lq_norm(m, 2.0) == doctest::Approx(1.0));
    CHECK(lq_norm(m, kInfinity) == 1.0);
    const PiecewiseField g = field({0.0, 0.5, 1.0}, {2.0, 0.0});
    // (0.5 * 2^3)^(1/3)
    CHECK(lq_norm(g, 3.0) == doctest::Approx(std::cbrt(4.0)));
    CHECK(kind_of([&] { validate(m, 0.0, 2.0); }) == ErrorKind::Config);
    CHECK(kind_of([] { validate(field({0.0, 1.0}, {1.0, 2.0}), 0.0, 1.0); }) == ErrorKind::Config);
    CHECK(kind_of([] { validate(field({0.0, 0.7, 0.5, 1.0}, {1, 2, 3}), 0.0, 1.0); }) == ErrorKind::Config);
    CHECK(kind_of([] { validate(field({0.0, 1.0}, {NAN}), 0.0, 1.0); }) == ErrorKind::Config);
}

TEST_CASE("critical exponent by regime") {
    CHECK(critical_exponent({1.0, 0.0, 0.5, 3}) == doctest::Approx(1.5));
    CHECK(critical_exponent({0.0, 1.0, 0.25, 1}) == doctest::Approx(2.0));
    CHECK(critical_exponent({1.0, 1.0, 0.75, 1}) == doctest::Approx(1.0));
    CHECK(critical_exponent({1.0, 0.0, 0.5, 1}) == doctest::Approx(1.0));
}

TEST_CASE("Sobolev exponent") {
    CHECK(sobolev_exponent({0.0, 1.0, 0.25, 1}, 3.0) == doctest::Approx(4.0));
    CHECK(sobolev_exponent({1.0, 1.0, 0.75, 1}, 4.0) == doctest::Approx(11.0 / 3.0));
    CHECK(sobolev_exponent({1.0, 0.0, 0.5, 1}, 2.0) == doctest::Approx(5.0));
    CHECK(sobolev_exponent({1.0, 0.0, 0.5, 1}, kInfinity) == doctest::Approx(3.0));
    CHECK(kind_of([] { sobolev_exponent({0.0, 1.0, 0.25, 1}, 2.0); }) ==
          ErrorKind::InadmissibleIntegrability);
    CHECK(kind_of([] { sobolev_exponent({1.0, 0.0, 0.5, 1}, 0.5); }) ==
          ErrorKind::InadmissibleIntegrability);
}

TEST_CASE("exponent pack keeps a positive margin") {
    for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        for (double q : {1.5, 3.0, 10.0, kInfinity}) {
            const OperatorParams p{1.0, 1.0, s, 1};
            if (!(q > critical_exponent(p))) continue;
            const ExponentPack e = exponent_pack(p, q);
            CHECK(e.eps0 > 0.0);
            CHECK(e.eta > 2.0);
            CHECK(e.eta_prime > 1.0);
            CHECK(e.vartheta == doctest::Approx(2.0 / e.eta_prime));
            CHECK(e.eps0 == doctest::Approx(1.0 - 1.0 / q - 2.0 / e.eta));
        }
    }
}

TEST_CASE("weight diagnostics") {
    const Mesh1D mesh = build_mesh(0.0, 1.0, 8, 1.0, 2);
    const WeightDiagnostics one = weight_diagnostics(PiecewiseField::constant(0.0, 1.0, 1.0), mesh);
    CHECK(one.integral == 1.0);
    CHECK(one.plus_mass == 1.0);
    CHECK(one.minus_mass == 0.0);
    CHECK(one.minus_vanishes());
    CHECK(one.violations().size() == 1);

    const WeightDiagnostics sc = weight_diagnostics(field({0.0, 0.25, 1.0}, {1.0, -1.0}), mesh);
    CHECK(sc.integral == doctest::Approx(-0.5));
    CHECK(sc.plus_mass == doctest::Approx(0.25));
    CHECK(sc.minus_mass == doctest::Approx(0.75));
    CHECK(sc.violations().empty());

    const WeightDiagnostics bal = weight_diagnostics(field({0.0, 0.5, 1.0}, {1.0, -1.0}), mesh);
    CHECK(bal.integral == 0.0);
    CHECK(bal.integral_vanishes());
    CHECK_FALSE(bal.violations().empty());
}

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mixneu/mesh.hpp"

namespace mixneu {

/// Coefficients of -alpha * Laplacian + beta * (-Laplacian)^s in dimension n.
///
/// Only n = 1 is discretized; other n are accepted by the exponent
/// arithmetic, which is dimension-generic.
struct OperatorParams {
    double alpha = 1.0;
    double beta = 0.0;
    double s = 0.5;
    int n = 1;

    bool operator==(const OperatorParams&) const = default;
};

/// Throws Error(Config) unless alpha, beta >= 0, alpha + beta > 0, s in (0, 1).
void validate(const OperatorParams& params);

enum class FieldRole { Weight, Coefficient, Source };

/// Piecewise-constant function on [a, b]: value `values[i]` on
/// (breaks[i], breaks[i + 1]). breaks.front() == a, breaks.back() == b.
struct PiecewiseField {
    std::vector<double> breaks;
    std::vector<double> values;
    FieldRole role = FieldRole::Weight;

    static PiecewiseField constant(double a, double b, double value,
                                   FieldRole role = FieldRole::Weight);

    std::size_t pieces() const noexcept { return values.size(); }
    double operator()(double x) const;

    bool operator==(const PiecewiseField&) const = default;
};

/// Throws Error(Config) unless the field is well formed and spans exactly [a, b].
void validate(const PiecewiseField& field, double a, double b);

double integral(const PiecewiseField& field);

/// Closed-form L^q norm; q = +infinity gives the max |value| over pieces of
/// positive length.
double lq_norm(const PiecewiseField& field, double q);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Integrability threshold for weights and coefficients: n/2 (beta = 0,
/// n > 2), n/(2s) (beta != 0, n > 2s), 1 otherwise.
double critical_exponent(const OperatorParams& params);

/// Sobolev-type exponent eta used by the L-infinity estimate. In the
/// subcritical cases the exponent is pinned to 2q/(q-1) + 1.
double sobolev_exponent(const OperatorParams& params, double q);

struct ExponentPack {
    double q = 0.0;
    double q_bar = 0.0;
    double eta = 0.0;
    double eta_prime = 0.0;
    double vartheta = 0.0;
    double eps0 = 0.0;
};

/// eta' = 1 / (1 - 1/q - 1/eta), vartheta = 2 / eta', eps0 = 1 - 1/q - 2/eta.
ExponentPack exponent_pack(const OperatorParams& params, double q);

struct WeightDiagnostics {
    double integral = 0.0;
    double plus_mass = 0.0;
    double minus_mass = 0.0;

    bool plus_vanishes() const noexcept { return plus_mass == 0.0; }
    bool minus_vanishes() const noexcept { return minus_mass == 0.0; }
    bool integral_vanishes() const noexcept { return integral == 0.0; }

    /// Human-readable list of violated hypotheses for the two-sided
    /// spectrum (empty when all hold).
    std::vector<std::string> violations() const;

    bool operator==(const WeightDiagnostics&) const = default;
};

/// Exact integrals of m, m+ and m- over Omega.
WeightDiagnostics weight_diagnostics(const PiecewiseField& m, const Mesh1D& mesh);

}  // namespace mixneu

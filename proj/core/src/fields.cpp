#include "mixneu/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixneu/error.hpp"

namespace mixneu {

void validate(const OperatorParams& params) {
    std::ostringstream msg;
    if (!std::isfinite(params.alpha) || !std::isfinite(params.beta) || !std::isfinite(params.s)) {
        msg << "operator parameters must be finite";
    } else if (params.alpha < 0 || params.beta < 0) {
        msg << "alpha and beta must be nonnegative";
    } else if (!(params.alpha + params.beta > 0)) {
        msg << "alpha + beta must be positive";
    } else if (!(params.s > 0 && params.s < 1)) {
        msg << "s must lie in (0, 1), got " << params.s;
    } else if (params.n < 1) {
        msg << "dimension must be >= 1";
    } else {
        return;
    }
    throw Error(ErrorKind::Config, msg.str());
}

PiecewiseField PiecewiseField::constant(double a, double b, double value, FieldRole role) {
    return PiecewiseField{{a, b}, {value}, role};
}

double PiecewiseField::operator()(double x) const {
    auto it = std::upper_bound(breaks.begin() + 1, breaks.end() - 1, x);
    return values[static_cast<std::size_t>(it - breaks.begin() - 1)];
}

void validate(const PiecewiseField& field, double a, double b) {
    std::ostringstream msg;
    if (field.values.empty() || field.breaks.size() != field.values.size() + 1) {
        msg << "field needs k values and k+1 breakpoints";
    } else if (field.breaks.front() != a || field.breaks.back() != b) {
        msg << "field breakpoints must start at a and end at b";
    } else if (!std::is_sorted(field.breaks.begin(), field.breaks.end())) {
        msg << "field breakpoints must be sorted";
    } else if (std::any_of(field.values.begin(), field.values.end(),
                           [](double v) { return !std::isfinite(v); })) {
        msg << "field values must be finite";
    } else {
        return;
    }
    throw Error(ErrorKind::Config, msg.str());
}

double integral(const PiecewiseField& field) {
    double sum = 0.0;
    for (std::size_t i = 0; i < field.pieces(); ++i) {
        sum += field.values[i] * (field.breaks[i + 1] - field.breaks[i]);
    }
    return sum;
}

double lq_norm(const PiecewiseField& field, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (std::size_t i = 0; i < field.pieces(); ++i) {
            if (field.breaks[i + 1] > field.breaks[i]) m = std::max(m, std::abs(field.values[i]));
        }
        return m;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < field.pieces(); ++i) {
        sum += std::pow(std::abs(field.values[i]), q) * (field.breaks[i + 1] - field.breaks[i]);
    }
    return std::pow(sum, 1.0 / q);
}

double critical_exponent(const OperatorParams& params) {
    const double n = params.n;
    if (params.beta == 0.0) {
        return n > 2 ? n / 2.0 : 1.0;
    }
    return n > 2.0 * params.s ? n / (2.0 * params.s) : 1.0;
}

double sobolev_exponent(const OperatorParams& params, double q) {
    const double q_bar = critical_exponent(params);
    if (!(q > q_bar)) {
        std::ostringstream msg;
        msg << "integrability exponent q=" << q << " must exceed the critical exponent " << q_bar;
        throw Error(ErrorKind::InadmissibleIntegrability, msg.str());
    }
    const double n = params.n;
    if (params.beta != 0.0 && n > 2.0 * params.s) return 2.0 * n / (n - 2.0 * params.s);
    if (params.beta == 0.0 && n > 2) return 2.0 * n / (n - 2.0);
    const double floor = std::isinf(q) ? 2.0 : 2.0 * q / (q - 1.0);
    return floor + 1.0;
}

ExponentPack exponent_pack(const OperatorParams& params, double q) {
    ExponentPack pack;
    pack.q = q;
    pack.q_bar = critical_exponent(params);
    pack.eta = sobolev_exponent(params, q);
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    pack.eta_prime = 1.0 / (1.0 - inv_q - 1.0 / pack.eta);
    pack.vartheta = 2.0 / pack.eta_prime;
    pack.eps0 = 1.0 - inv_q - 2.0 / pack.eta;
    return pack;
}

std::vector<std::string> WeightDiagnostics::violations() const {
    std::vector<std::string> out;
    if (plus_vanishes()) out.emplace_back("m+ vanishes identically");
    if (minus_vanishes()) out.emplace_back("m- vanishes identically");
    if (integral_vanishes()) out.emplace_back("integral of m over Omega is zero");
    return out;
}

WeightDiagnostics weight_diagnostics(const PiecewiseField& m, const Mesh1D& mesh) {
    validate(m, mesh.a(), mesh.b());
    WeightDiagnostics d;
    for (std::size_t i = 0; i < m.pieces(); ++i) {
        const double len = m.breaks[i + 1] - m.breaks[i];
        const double v = m.values[i];
        if (v > 0) d.plus_mass += v * len;
        if (v < 0) d.minus_mass -= v * len;
    }
    d.integral = d.plus_mass - d.minus_mass;
    return d;
}

}  // namespace mixneu

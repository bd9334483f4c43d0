#include "mixneu/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "mixneu/error.hpp"
#include "mixneu/spectral.hpp"

namespace mixneu {

namespace {

constexpr double kRelSlack = 1e-12;

// int over a segment of length len of |l|^p where l is affine from A to B
// and does not change sign.
double one_signed_power(double A, double B, double len, double p) {
    A = std::abs(A);
    B = std::abs(B);
    const double lo = std::min(A, B);
    const double hi = std::max(A, B);
    if (hi == 0.0) return 0.0;
    if (lo < 0.5 * hi) {
        return len * (std::pow(hi, p + 1.0) - std::pow(lo, p + 1.0)) / ((p + 1.0) * (hi - lo));
    }
    static const QuadratureRule rule(16, 0);
    double sum = 0.0;
    for (int i = 0; i < rule.order(); ++i) {
        const double t = rule.points()[static_cast<std::size_t>(i)];
        sum += rule.weights()[static_cast<std::size_t>(i)] * std::pow(A + (B - A) * t, p);
    }
    return len * sum;
}

}  // namespace

double poincare_constant(const AssembledForms& forms) {
    if (forms.weight.integral_vanishes()) {
        throw Error(ErrorKind::DegenerateWeight,
                    "Poincare inequality on V requires int_Omega m != 0");
    }
    const VReduction red(forms);
    const Eigen::MatrixXd C = red.congruence(red.project(red.gather(forms.M)));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
    // max v^T M v / v^T B v over V, and [v]^2 = v^T B v / 2.
    return 2.0 * eig.eigenvalues().maxCoeff();
}

double interpolant_lp_power(const Mesh1D& mesh, const Eigen::VectorXd& v, double p) {
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        if (!mesh.interior_element(e)) continue;
        const double A = v(static_cast<Eigen::Index>(e));
        const double B = v(static_cast<Eigen::Index>(e) + 1);
        const double h = mesh.element_size(e);
        if ((A > 0 && B < 0) || (A < 0 && B > 0)) {
            const double t = A / (A - B);
            sum += one_signed_power(A, 0.0, t * h, p) + one_signed_power(0.0, B, (1.0 - t) * h, p);
        } else {
            sum += one_signed_power(A, B, h, p);
        }
    }
    return sum;
}

SobolevCheck sobolev_check(const AssembledForms& forms, double q, const Eigen::VectorXd& v) {
    if (v.size() != forms.B.rows()) {
        throw Error(ErrorKind::SizeMismatch, "vector size does not match the number of DOFs");
    }
    SobolevCheck out;
    out.eta = sobolev_exponent(forms.params, q);
    out.lhs = interpolant_lp_power(forms.mesh, v, out.eta);
    const double energy = std::max(0.0, v.dot(forms.B * v));
    out.rhs = std::pow(energy, 0.5 * out.eta);
    if (out.rhs > 0.0) {
        out.ratio = out.lhs / out.rhs;
    } else {
        out.ratio = 0.0;
        out.projection_failure = out.lhs > 0.0;
    }
    return out;
}

Eigen::VectorXd sample_in_v(const AssembledForms& forms, CounterRng& rng) {
    const auto active = forms.active_indices();
    const auto n = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd v(n);
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = rng.uniform(-1.0, 1.0);
        c(i) = forms.c_vec(static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)]));
    }
    v -= (c.dot(v) / c.squaredNorm()) * c;
    return scatter_active(forms, active, v);
}

std::optional<Eigen::VectorXd> sample_in_v_signed(const AssembledForms& forms, CounterRng& rng,
                                                  int sign, int max_tries) {
    const auto active = forms.active_indices();
    const auto n = static_cast<Eigen::Index>(active.size());
    const Mesh1D& mesh = forms.mesh;
    Eigen::VectorXd c(n);
    std::vector<char> favoured(active.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t node = active[static_cast<std::size_t>(i)];
        c(i) = forms.c_vec(static_cast<Eigen::Index>(node));
        const double x = mesh.node(node);
        favoured[static_cast<std::size_t>(i)] =
            x >= mesh.a() && x <= mesh.b() && sign * forms.weight_field(x) > 0.0;
    }
    for (int t = 0; t < max_tries; ++t) {
        const double tilt = rng.uniform(0.0, 20.0);
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v(i) = rng.uniform(-1.0, 1.0) * (favoured[static_cast<std::size_t>(i)] ? 1.0 + tilt : 1.0);
        }
        v -= (c.dot(v) / c.squaredNorm()) * c;
        Eigen::VectorXd full = scatter_active(forms, active, v);
        if (sign * full.dot(forms.W * full) > 0.0) return full;
    }
    return std::nullopt;
}

Eigen::VectorXd smooth_sample_in_v(const AssembledForms& forms, CounterRng& rng, int modes) {
    std::vector<double> ca(static_cast<std::size_t>(modes));
    std::vector<double> sa(static_cast<std::size_t>(modes));
    for (int k = 0; k < modes; ++k) {
        ca[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0) / (k + 1);
        sa[static_cast<std::size_t>(k)] = rng.uniform(-1.0, 1.0) / (k + 1);
    }
    const Mesh1D& mesh = forms.mesh;
    Eigen::VectorXd v(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        const double theta = std::numbers::pi * (mesh.node(i) - mesh.a()) / mesh.length();
        double value = 0.0;
        for (int k = 0; k < modes; ++k) {
            value += ca[static_cast<std::size_t>(k)] * std::cos((k + 1) * theta) +
                     sa[static_cast<std::size_t>(k)] * std::sin((k + 1) * theta);
        }
        v(static_cast<Eigen::Index>(i)) = value;
    }
    const double shift = forms.c_vec.dot(v) / forms.c_vec.sum();
    v.array() -= shift;
    return v;
}

MediantResult check_mediant(double a1, double a2, double b1, double b2) {
    if (!(a1 > 0 && a2 > 0 && b1 > 0 && b2 > 0)) {
        throw Error(ErrorKind::NonpositiveInput, "mediant inequality needs positive inputs");
    }
    MediantResult out;
    const double r1 = a1 / b1;
    const double r2 = a2 / b2;
    const double big = std::max(r1, r2);
    out.mediant = (a1 + a2) / (b1 + b2);
    if (std::abs(r1 - r2) <= kRelSlack * big) {
        out.kind = MediantCase::Equal;
        out.holds = std::abs(out.mediant - r1) <= kRelSlack * big &&
                    std::abs(out.mediant - r2) <= kRelSlack * big;
    } else {
        out.kind = MediantCase::Strict;
        out.holds = out.mediant < big;
    }
    return out;
}

InequalityCheck check_truncation(double ux, double uy, double k) {
    if (!(k >= 0)) throw Error(ErrorKind::NonpositiveInput, "truncation level must be >= 0");
    const double vx = std::max(ux - k, 0.0);
    const double vy = std::max(uy - k, 0.0);
    InequalityCheck out;
    out.lhs = (ux - uy) * (vx - vy);
    out.rhs = (vx - vy) * (vx - vy);
    out.violated = out.lhs < out.rhs - kRelSlack * std::max({1.0, std::abs(out.lhs), out.rhs});
    return out;
}

InequalityCheck check_product_bound(double ux, double k) {
    if (!(k >= 0)) throw Error(ErrorKind::NonpositiveInput, "truncation level must be >= 0");
    const double v = std::max(ux - k, 0.0);
    InequalityCheck out;
    out.lhs = std::abs(ux) * v;
    out.rhs = 4.0 * (v * v + k * k);
    out.violated = out.lhs > out.rhs + kRelSlack * std::max(1.0, out.rhs);
    return out;
}

DecompositionCheck check_decomposition(const GraphForm& g, std::span<const double> v) {
    std::vector<double> plus(v.size());
    std::vector<double> minus(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        plus[i] = std::max(v[i], 0.0);
        minus[i] = std::max(-v[i], 0.0);
    }
    DecompositionCheck out;
    out.lhs = g.value(v);
    out.rhs_plus = g.value(plus);
    out.rhs_minus = g.value(minus);
    out.ok = out.lhs >= out.rhs_plus + out.rhs_minus - kRelSlack * std::abs(out.lhs);
    return out;
}

AuditCounter audit_mediant(std::uint64_t samples, std::uint64_t seed) {
    CounterRng rng(seed, 1);
    AuditCounter out{"mediant", samples, 0};
    auto log_uniform = [&] { return std::exp(rng.uniform(-7.0, 7.0)); };
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double a1 = log_uniform();
        const double b1 = log_uniform();
        const double b2 = log_uniform();
        // Every tenth sample sits on the equality branch.
        const double a2 = (i % 10 == 0) ? (a1 / b1) * b2 : log_uniform();
        if (!check_mediant(a1, a2, b1, b2).holds) ++out.violations;
    }
    return out;
}

AuditCounter audit_truncation(std::uint64_t samples, std::uint64_t seed) {
    CounterRng rng(seed, 2);
    AuditCounter out{"truncation", samples, 0};
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double ux = rng.uniform(-10.0, 10.0);
        const double uy = (i % 50 == 0) ? ux : rng.uniform(-10.0, 10.0);
        const double k = rng.uniform(0.0, 10.0);
        if (check_truncation(ux, uy, k).violated) ++out.violations;
    }
    return out;
}

AuditCounter audit_product_bound(std::uint64_t samples, std::uint64_t seed) {
    CounterRng rng(seed, 3);
    AuditCounter out{"product_bound", samples, 0};
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double ux = rng.uniform(-10.0, 10.0);
        const double k = rng.uniform(0.0, 10.0);
        if (check_product_bound(ux, k).violated) ++out.violations;
    }
    return out;
}

AuditCounter audit_decomposition(const GraphForm& g, std::uint64_t samples, std::uint64_t seed) {
    CounterRng rng(seed, 4);
    AuditCounter out{"decomposition", samples, 0};
    std::vector<double> v(g.nodes());
    for (std::uint64_t i = 0; i < samples; ++i) {
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        if (!check_decomposition(g, v).ok) ++out.violations;
    }
    return out;
}

LevelSetData level_profile(const Mesh1D& mesh, const Eigen::VectorXd& u, double k) {
    LevelSetData out;
    out.k = k;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        if (!mesh.interior_element(e)) continue;
        const double A = u(static_cast<Eigen::Index>(e)) - k;
        const double B = u(static_cast<Eigen::Index>(e) + 1) - k;
        const double h = mesh.element_size(e);
        if (A > 0 && B > 0) {
            out.measure += h;
            out.phi += h * (A * A + A * B + B * B) / 3.0;
        } else if (A > 0) {
            const double len = h * A / (A - B);
            out.measure += len;
            out.phi += len * A * A / 3.0;
        } else if (B > 0) {
            const double len = h * B / (B - A);
            out.measure += len;
            out.phi += len * B * B / 3.0;
        }
    }
    return out;
}

DeGiorgiReport degiorgi_bound(const AssembledForms& forms, const Eigen::VectorXd& u,
                              const PiecewiseField& f, double q, double c_star, int max_iter) {
    const Mesh1D& mesh = forms.mesh;
    if (u.size() != static_cast<Eigen::Index>(mesh.node_count())) {
        throw Error(ErrorKind::SizeMismatch, "vector size does not match the number of nodes");
    }
    const double q_bar = critical_exponent(forms.params);
    if (!std::isfinite(q) || !(q > q_bar)) {
        std::ostringstream msg;
        msg << "the L-infinity estimate needs finite q > " << q_bar << ", got " << q;
        throw Error(ErrorKind::InadmissibleIntegrability, msg.str());
    }
    if (!(c_star > 0.0 && c_star <= mesh.length())) {
        throw Error(ErrorKind::Config, "c_star must lie in (0, b - a]");
    }
    validate(f, mesh.a(), mesh.b());

    DeGiorgiReport rep;
    rep.c_star = c_star;
    rep.u_plus_l2 = std::sqrt(level_profile(mesh, u, 0.0).phi);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (mesh.interior_node(i)) rep.sup_u_plus = std::max(rep.sup_u_plus, u(static_cast<Eigen::Index>(i)));
    }
    rep.f_norm = lq_norm(f, q);
    rep.kappa = rep.u_plus_l2 / std::sqrt(c_star);
    rep.K_level = rep.kappa + rep.f_norm;
    const double cu = forms.c_vec.dot(u);
    rep.in_v = std::abs(cu) <= 1e-8 * forms.c_vec.norm() * u.norm();

    double phi0 = 0.0;
    for (int ell = 0; ell <= max_iter; ++ell) {
        const double k = rep.kappa + rep.K_level * (1.0 - std::ldexp(1.0, -ell));
        const LevelSetData lv = level_profile(mesh, u, k);
        rep.ladder.push_back({ell, k, lv.phi, lv.measure});
        if (ell == 0) phi0 = lv.phi;
        if (lv.phi == 0.0 || lv.phi < 1e-12 * phi0) {
            rep.converged = true;
            break;
        }
    }
    if (rep.converged) rep.bound = rep.kappa + rep.K_level;
    const double denom = rep.u_plus_l2 + rep.f_norm;
    rep.C_emp = denom > 0.0 ? rep.sup_u_plus / denom : 0.0;
    return rep;
}

DeGiorgiReport degiorgi_search(const AssembledForms& forms, const Eigen::VectorXd& u,
                               const PiecewiseField& f, double q, int max_halvings, int max_iter) {
    double c_star = forms.mesh.length();
    DeGiorgiReport rep;
    for (int h = 0; h <= max_halvings; ++h) {
        rep = degiorgi_bound(forms, u, f, q, c_star, max_iter);
        rep.halvings = h;
        if (rep.converged) break;
        c_star *= 0.5;
    }
    return rep;
}

}  // namespace mixneu

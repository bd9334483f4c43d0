#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixneu/assembly.hpp"
#include "mixneu/random.hpp"

namespace mixneu {

// ---------------------------------------------------------------------------
// Poincare and Sobolev

/// Smallest C with int_Omega v^2 <= C [v]^2 on V (discrete). Throws
/// Error(DegenerateWeight) when int m = 0.
double poincare_constant(const AssembledForms& forms);

struct SobolevCheck {
    double eta = 0.0;
    double lhs = 0.0;    ///< int_Omega |v|^eta
    double rhs = 0.0;    ///< (v^T B v)^(eta/2)
    double ratio = 0.0;
    bool projection_failure = false;  ///< rhs = 0 while lhs > 0
};

SobolevCheck sobolev_check(const AssembledForms& forms, double q, const Eigen::VectorXd& v);

/// int_Omega |v|^p for the piecewise-linear interpolant.
double interpolant_lp_power(const Mesh1D& mesh, const Eigen::VectorXd& v, double p);

/// Nodal noise on the active DOFs, orthogonally projected onto V.
Eigen::VectorXd sample_in_v(const AssembledForms& forms, CounterRng& rng);

/// Random v in V with sign * vᵀWv > 0, drawn with extra amplitude where
/// sign * m > 0. Gives up after max_tries rejections.
std::optional<Eigen::VectorXd> sample_in_v_signed(const AssembledForms& forms, CounterRng& rng,
                                                  int sign, int max_tries = 1000);
/// A few random trigonometric modes evaluated at the nodes, shifted by a
/// constant into V; the law does not depend on the mesh.
Eigen::VectorXd smooth_sample_in_v(const AssembledForms& forms, CounterRng& rng, int modes = 6);

// ---------------------------------------------------------------------------
// Scalar inequalities from the L-infinity and simplicity arguments

enum class MediantCase { Equal, Strict };

struct MediantResult {
    MediantCase kind = MediantCase::Strict;
    double mediant = 0.0;
    bool holds = false;  ///< the dichotomy holds for this sample
};

/// Either (a1+a2)/(b1+b2) = a1/b1 = a2/b2, or it is strictly below
/// max(a1/b1, a2/b2). Throws Error(NonpositiveInput) for inputs <= 0.
MediantResult check_mediant(double a1, double a2, double b1, double b2);

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool violated = false;
};

/// (ux-uy)(v(ux)-v(uy)) >= (v(ux)-v(uy))^2 with v = (. - k)^+, k >= 0.
InequalityCheck check_truncation(double ux, double uy, double k);

/// |ux| (ux-k)^+ <= 4 ((ux-k)^+^2 + k^2), k >= 0.
InequalityCheck check_product_bound(double ux, double k);

struct DecompositionCheck {
    double lhs = 0.0;
    double rhs_plus = 0.0;
    double rhs_minus = 0.0;
    bool ok = false;
};

/// form(v) >= form(v+) + form(v-) for a nonnegative difference form.
DecompositionCheck check_decomposition(const GraphForm& g, std::span<const double> v);

struct AuditCounter {
    std::string name;
    std::uint64_t samples = 0;
    std::uint64_t violations = 0;

    bool operator==(const AuditCounter&) const = default;
};

AuditCounter audit_mediant(std::uint64_t samples, std::uint64_t seed);
AuditCounter audit_truncation(std::uint64_t samples, std::uint64_t seed);
AuditCounter audit_product_bound(std::uint64_t samples, std::uint64_t seed);
AuditCounter audit_decomposition(const GraphForm& g, std::uint64_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Level sets and the De Giorgi ladder

struct LevelSetData {
    double k = 0.0;
    double measure = 0.0;  ///< |{u > k}| within Omega
    double phi = 0.0;      ///< int_{u > k} (u - k)^2
};

/// Exact on the piecewise-linear interpolant over Omega.
LevelSetData level_profile(const Mesh1D& mesh, const Eigen::VectorXd& u, double k);

struct LadderStep {
    int ell = 0;
    double k = 0.0;
    double phi = 0.0;
    double measure = 0.0;

    bool operator==(const LadderStep&) const = default;
};

struct DeGiorgiReport {
    double kappa = 0.0;
    double K_level = 0.0;
    double c_star = 0.0;
    std::vector<LadderStep> ladder;
    bool converged = false;
    double bound = 0.0;      ///< kappa + K when converged
    double C_emp = 0.0;      ///< sup u+ / (||u+||_2 + ||f||_q)
    double sup_u_plus = 0.0;
    double u_plus_l2 = 0.0;
    double f_norm = 0.0;
    bool in_v = false;       ///< |int m u| small relative to ||m|| ||u||
    int halvings = 0;        ///< c_star halvings used by degiorgi_search

    bool certified(double tol = 1e-9) const { return converged && sup_u_plus <= bound + tol; }
    bool operator==(const DeGiorgiReport&) const = default;
};

/// Level ladder k_l = kappa + K (1 - 2^-l) with kappa = ||u+||_2 / sqrt(c_star)
/// and K = kappa + ||f||_q. Converged once phi(k_l) < 1e-12 phi(k_0)
/// (or vanishes) within max_iter levels.
DeGiorgiReport degiorgi_bound(const AssembledForms& forms, const Eigen::VectorXd& u,
                              const PiecewiseField& f, double q, double c_star, int max_iter = 60);

/// Halves c_star from |Omega| until the ladder converges (at most
/// max_halvings times); returns the last attempt.
DeGiorgiReport degiorgi_search(const AssembledForms& forms, const Eigen::VectorXd& u,
                               const PiecewiseField& f, double q, int max_halvings = 20,
                               int max_iter = 60);

}  // namespace mixneu

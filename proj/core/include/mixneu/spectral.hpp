#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixneu/assembly.hpp"

namespace mixneu {

/// One solution of B u = lambda W u. Nonzero lambda are normalized so that
/// int_Omega m u^2 = sign(lambda); the lambda = 0 pair has unit L^2(Omega)
/// norm. Orientation: int_Omega u >= 0.
struct EigenPair {
    double lambda = 0.0;
    Eigen::VectorXd u;
    double normalization = 0.0;  ///< int m u^2 for lambda != 0, ||u||_L2 for lambda = 0
    double residual = 0.0;       ///< relative weak residual
};

struct Spectrum {
    std::vector<EigenPair> negatives;  ///< lambda_{-1} >= lambda_{-2} >= ...
    EigenPair zero;
    std::vector<EigenPair> positives;  ///< lambda_1 <= lambda_2 <= ...
    int requested_pos = 0;
    int requested_neg = 0;
    double weight_integral = 0.0;
    std::vector<char> interior;  ///< node lies in [a, b]
    std::vector<std::string> warnings;
};

struct SolveOptions {
    /// Waive the m+/m- hypotheses (the zero-mean constraint still needs
    /// int m != 0). Used for classical-limit comparisons with m = const.
    bool diagnostic = false;
};

/// Orthonormal basis (columns) of the orthogonal complement of c, built from
/// one Householder reflector. Throws Error(DegenerateWeight) when c = 0.
Eigen::MatrixXd v_basis(const Eigen::VectorXd& c);

/// The constrained problem restricted to active DOFs: V = {c^T u = 0},
/// represented through a Householder reflector H with H c = -+|c| e_0, so
/// V = span of columns 1.. of H. B_V = L L^T.
class VReduction {
public:
    explicit VReduction(const AssembledForms& forms);

    const std::vector<std::size_t>& active() const noexcept { return active_; }
    Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(active_.size()) - 1; }

    /// Restrict a full DOF vector / matrix to the active DOFs.
    Eigen::VectorXd gather(const Eigen::VectorXd& full) const;
    Eigen::MatrixXd gather(const Eigen::MatrixXd& full) const;

    /// (H A H) without its first row and column, for active-DOF matrix A.
    Eigen::MatrixXd project(const Eigen::MatrixXd& A) const;
    /// H [0; y] for y in V coordinates.
    Eigen::VectorXd lift(const Eigen::VectorXd& y) const;

    /// L^-1 A_V L^-T for the Cholesky factor of B_V.
    Eigen::MatrixXd congruence(const Eigen::MatrixXd& A_V) const;
    /// z with B_V z = ... : returns L^-T y.
    Eigen::VectorXd back_substitute(const Eigen::VectorXd& y) const;

private:
    std::vector<std::size_t> active_;
    Eigen::VectorXd w_;
    double tau_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> chol_;
};

/// Scatter an active-DOF vector into a full nodal vector; inactive collar
/// nodes (beta = 0) take the value at the nearer endpoint of Omega.
Eigen::VectorXd scatter_active(const AssembledForms& forms, const std::vector<std::size_t>& active,
                               const Eigen::VectorXd& values);

/// Two-sided weighted spectrum by Cholesky reduction on V.
Spectrum solve_spectrum(const AssembledForms& forms, int k_pos, int k_neg,
                        const SolveOptions& options = {});

/// v^T B v / v^T W v. Throws Error(IndefiniteDirection) when v^T W v = 0.
double rayleigh(const AssembledForms& forms, const Eigen::VectorXd& v);

struct FirstEigenStructure {
    bool simple = false;
    double gap = 0.0;        ///< (|lambda_2| - |lambda_1|) / |lambda_1| on the relevant side
    bool signed_ = false;    ///< one-signed after orientation
    double min_over_max = 0.0;
    bool positive_side = true;
};

/// Simplicity and sign of the principal eigenfunction: lambda_1 when
/// int m < 0, lambda_{-1} when int m > 0. With `refined`, simplicity also
/// requires the gap to persist on that spectrum.
FirstEigenStructure first_eigen_structure(const Spectrum& spectrum,
                                          const Spectrum* refined = nullptr);

/// Zero-flux source problem B u = F with gauge int_Omega u = 0.
Eigen::VectorXd solve_source(const AssembledForms& forms, const PiecewiseField& f);

struct CollarValue {
    std::size_t node = 0;
    double x = 0.0;
    double value = 0.0;
};

struct NeumannResiduals {
    /// N_s u at collar nodes strictly outside [a, b]; absent when beta = 0.
    std::optional<std::vector<CollarValue>> ns_profile;
    /// Outward one-sided difference quotients at (a, b); absent when alpha = 0.
    std::optional<std::pair<double, double>> normal_deriv;

    double max_abs_ns() const;
};

/// N_s u(x) = int_Omega (u(x) - u(y)) / |x-y|^(1+2s) dy, exact for the
/// piecewise-linear interpolant.
NeumannResiduals neumann_residuals(const AssembledForms& forms, const Eigen::VectorXd& u);

}  // namespace mixneu

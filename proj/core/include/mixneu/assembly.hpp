#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mixneu/fields.hpp"
#include "mixneu/mesh.hpp"

namespace mixneu {

/// How u is continued past the truncated collar.
enum class TailModel {
    None,              ///< interaction with |y| beyond the collar is dropped
    ConstantExtension  ///< u frozen at its outermost collar value
};

/// Discrete quadratic forms on the hat-function basis of all mesh nodes.
///
///   K_loc  = alpha * int_Omega phi_i' phi_j'
///   K_frac = (beta/2) * iint_Q (phi_i(x)-phi_i(y)) (phi_j(x)-phi_j(y)) / |x-y|^(1+2s)
///   B      = K_loc + K_frac
///   W      = int_Omega m phi_i phi_j,    M = int_Omega phi_i phi_j
///   c_vec  = int_Omega m phi_i,          ones_mass = int_Omega phi_i
///
/// With ConstantExtension the two outermost hats are continued as 1 to
/// -infinity and +infinity, so the basis is a partition of unity on the whole
/// line and B annihilates constants.
struct AssembledForms {
    Mesh1D mesh;
    OperatorParams params;
    PiecewiseField weight_field;
    WeightDiagnostics weight;
    TailModel tail = TailModel::ConstantExtension;

    Eigen::MatrixXd K_loc;
    Eigen::MatrixXd K_frac;
    Eigen::MatrixXd B;
    Eigen::MatrixXd W;
    Eigen::MatrixXd M;
    Eigen::VectorXd c_vec;
    Eigen::VectorXd ones_mass;

    /// DOFs that carry energy: every node when beta > 0, nodes in [a, b]
    /// otherwise.
    std::vector<char> active;

    std::size_t dofs() const noexcept { return static_cast<std::size_t>(B.rows()); }
    std::vector<std::size_t> active_indices() const;
};

AssembledForms assemble(const OperatorParams& params, const Mesh1D& mesh,
                        const PiecewiseField& m, const QuadratureRule& quad = QuadratureRule{},
                        TailModel tail = TailModel::ConstantExtension);

/// [v]^2 = (alpha/2) int |v'|^2 + (beta/4) iint_Q |v(x)-v(y)|^2 / |x-y|^(1+2s),
/// i.e. half the weak-form energy v^T B v.
double seminorm_sq(const AssembledForms& forms, const Eigen::VectorXd& v);

/// Load vector F_i = int_Omega f phi_i, exact for piecewise-constant f.
Eigen::VectorXd load_vector(const Mesh1D& mesh, const PiecewiseField& f);

/// Nonnegative-weight difference form v -> sum_{i<j} w_ij (v_i - v_j)^2.
class GraphForm {
public:
    struct Edge {
        std::size_t i;
        std::size_t j;
        double w;
    };

    GraphForm(std::size_t nodes, std::vector<Edge> edges);

    std::size_t nodes() const noexcept { return nodes_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    double value(std::span<const double> v) const;

private:
    std::size_t nodes_;
    std::vector<Edge> edges_;
};

/// Node-collocation of the nonlocal form: w_ij = beta * omega_i omega_j /
/// |x_i - x_j|^(1+2s) for node pairs with at least one node in [a, b],
/// omega the trapezoid weights.
GraphForm graph_form(const OperatorParams& params, const Mesh1D& mesh);

}  // namespace mixneu

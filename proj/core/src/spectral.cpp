#include "mixneu/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mixneu/error.hpp"

namespace mixneu {

namespace {

double sign_or_one(double x) { return x < 0 ? -1.0 : 1.0; }

void householder(const Eigen::VectorXd& c, Eigen::VectorXd& w, double& tau) {
    const double norm = c.norm();
    if (!(norm > 0.0)) {
        throw Error(ErrorKind::DegenerateWeight,
                    "constraint vector vanishes: the weight has no mass on the active DOFs");
    }
    w = c;
    w(0) += sign_or_one(c(0)) * norm;
    tau = 2.0 / w.squaredNorm();
}

double relative_residual(const Eigen::MatrixXd& B, const Eigen::MatrixXd& W,
                         const Eigen::VectorXd& u, double lambda) {
    const Eigen::VectorXd Bu = B * u;
    const Eigen::VectorXd Wu = W * u;
    const double denom = Bu.norm() + std::abs(lambda) * Wu.norm();
    if (lambda == 0.0 || denom == 0.0) {
        const double scale = B.norm() * u.norm();
        return scale > 0 ? Bu.norm() / scale : 0.0;
    }
    return (Bu - lambda * Wu).norm() / denom;
}

void require_weight_hypotheses(const AssembledForms& forms, const SolveOptions& options) {
    const double sum = forms.c_vec.sum();
    if (forms.weight.integral_vanishes() ||
        std::abs(sum) <= 1e-14 * forms.c_vec.lpNorm<1>()) {
        throw Error(ErrorKind::DegenerateWeight,
                    "int_Omega m = 0: constants are not excluded from V and lambda_0 = 0 is not isolated");
    }
    if (options.diagnostic) return;
    if (forms.weight.plus_vanishes()) {
        throw Error(ErrorKind::HypothesisViolation,
                    "m+ vanishes identically, violating the two-sided spectrum hypotheses");
    }
    if (forms.weight.minus_vanishes()) {
        throw Error(ErrorKind::HypothesisViolation,
                    "m- vanishes identically, violating the two-sided spectrum hypotheses");
    }
}

}  // namespace

Eigen::MatrixXd v_basis(const Eigen::VectorXd& c) {
    Eigen::VectorXd w;
    double tau = 0.0;
    householder(c, w, tau);
    const Eigen::Index n = c.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - tau * w * w.transpose();
    return H.rightCols(n - 1);
}

VReduction::VReduction(const AssembledForms& forms) : active_(forms.active_indices()) {
    if (active_.size() < 2) throw Error(ErrorKind::SizeMismatch, "need at least two active DOFs");
    householder(gather(forms.c_vec), w_, tau_);
    chol_.compute(project(gather(forms.B)));
    if (chol_.info() != Eigen::Success) {
        throw Error(ErrorKind::PoincareViolation,
                    "energy form is not positive definite on V (discrete Poincare inequality fails)");
    }
}

Eigen::VectorXd VReduction::gather(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(active_.size()));
    for (std::size_t i = 0; i < active_.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = full(static_cast<Eigen::Index>(active_[i]));
    }
    return out;
}

Eigen::MatrixXd VReduction::gather(const Eigen::MatrixXd& full) const {
    const auto n = static_cast<Eigen::Index>(active_.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = full(static_cast<Eigen::Index>(active_[static_cast<std::size_t>(i)]),
                             static_cast<Eigen::Index>(active_[static_cast<std::size_t>(j)]));
        }
    }
    return out;
}

Eigen::MatrixXd VReduction::project(const Eigen::MatrixXd& A) const {
    const Eigen::VectorXd p = A * w_;
    const double wAw = w_.dot(p);
    Eigen::MatrixXd HAH = A;
    HAH.noalias() -= tau_ * w_ * p.transpose();
    HAH.noalias() -= tau_ * p * w_.transpose();
    HAH.noalias() += (tau_ * tau_ * wAw) * w_ * w_.transpose();
    const Eigen::Index m = A.rows() - 1;
    Eigen::MatrixXd out = HAH.bottomRightCorner(m, m);
    return 0.5 * (out + out.transpose());
}

Eigen::VectorXd VReduction::lift(const Eigen::VectorXd& y) const {
    Eigen::VectorXd v(y.size() + 1);
    v(0) = 0.0;
    v.tail(y.size()) = y;
    v -= (tau_ * w_.dot(v)) * w_;
    return v;
}

Eigen::MatrixXd VReduction::congruence(const Eigen::MatrixXd& A_V) const {
    Eigen::MatrixXd X = chol_.matrixL().solve(A_V);
    Eigen::MatrixXd Y = chol_.matrixL().solve(X.transpose());
    return 0.5 * (Y + Y.transpose());
}

Eigen::VectorXd VReduction::back_substitute(const Eigen::VectorXd& y) const {
    return chol_.matrixU().solve(y);
}

Eigen::VectorXd scatter_active(const AssembledForms& forms, const std::vector<std::size_t>& active,
                               const Eigen::VectorXd& values) {
    const Mesh1D& mesh = forms.mesh;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < active.size(); ++i) {
        full(static_cast<Eigen::Index>(active[i])) = values(static_cast<Eigen::Index>(i));
    }
    const auto ia = static_cast<Eigen::Index>(mesh.left_boundary_node());
    const auto ib = static_cast<Eigen::Index>(mesh.right_boundary_node());
    for (Eigen::Index i = 0; i < full.size(); ++i) {
        if (forms.active[static_cast<std::size_t>(i)]) continue;
        full(i) = i < ia ? full(ia) : full(ib);
    }
    return full;
}

Spectrum solve_spectrum(const AssembledForms& forms, int k_pos, int k_neg,
                        const SolveOptions& options) {
    if (k_pos < 0 || k_neg < 0) throw Error(ErrorKind::Config, "eigenvalue counts must be >= 0");
    require_weight_hypotheses(forms, options);

    const VReduction red(forms);
    const Eigen::MatrixXd B_a = red.gather(forms.B);
    const Eigen::MatrixXd W_a = red.gather(forms.W);
    const Eigen::MatrixXd C = red.congruence(red.project(W_a));
    if (!(C - C.transpose()).isZero(1e-12 * std::max(1.0, C.norm()))) {
        throw Error(ErrorKind::SingularSystem, "reduced weight operator is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorKind::SingularSystem, "symmetric eigensolver did not converge");
    }
    const Eigen::VectorXd& mu = eig.eigenvalues();  // ascending
    const double mu_max = mu.cwiseAbs().maxCoeff();
    const double tol = 1e-10 * mu_max;

    Spectrum spec;
    spec.requested_pos = k_pos;
    spec.requested_neg = k_neg;
    spec.weight_integral = forms.weight.integral;
    spec.interior.assign(forms.mesh.interior_mask().begin(), forms.mesh.interior_mask().end());

    const Eigen::VectorXd mass_a = red.gather(forms.ones_mass);
    auto make_pair = [&](Eigen::Index k) {
        const double lambda = 1.0 / mu(k);
        Eigen::VectorXd u_a = red.lift(red.back_substitute(eig.eigenvectors().col(k)));
        const double wuu = u_a.dot(W_a * u_a);
        u_a /= std::sqrt(std::abs(wuu));
        if (mass_a.dot(u_a) < 0) u_a = -u_a;
        EigenPair pair;
        pair.lambda = lambda;
        pair.normalization = u_a.dot(W_a * u_a);
        pair.residual = relative_residual(B_a, W_a, u_a, lambda);
        pair.u = scatter_active(forms, red.active(), u_a);
        return pair;
    };

    for (Eigen::Index k = mu.size() - 1; k >= 0 && static_cast<int>(spec.positives.size()) < k_pos;
         --k) {
        if (mu(k) <= tol) break;
        spec.positives.push_back(make_pair(k));
    }
    for (Eigen::Index k = 0; k < mu.size() && static_cast<int>(spec.negatives.size()) < k_neg; ++k) {
        if (mu(k) >= -tol) break;
        spec.negatives.push_back(make_pair(k));
    }
    if (static_cast<int>(spec.positives.size()) < k_pos) {
        std::ostringstream msg;
        msg << "reduced count: " << spec.positives.size() << " of " << k_pos
            << " positive eigenvalues available";
        spec.warnings.push_back(msg.str());
    }
    if (static_cast<int>(spec.negatives.size()) < k_neg) {
        std::ostringstream msg;
        msg << "reduced count: " << spec.negatives.size() << " of " << k_neg
            << " negative eigenvalues available";
        spec.warnings.push_back(msg.str());
    }

    // lambda_0 = 0 with constant eigenfunction; lambda is the measured
    // energy quotient of the constant.
    const double length = forms.mesh.length();
    EigenPair& zero = spec.zero;
    zero.u = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(forms.mesh.node_count()),
                                       1.0 / std::sqrt(length));
    const Eigen::VectorXd ones_a = red.gather(zero.u);
    zero.lambda = ones_a.dot(B_a * ones_a) / std::abs(ones_a.dot(W_a * ones_a));
    zero.normalization = std::sqrt(ones_a.dot(red.gather(forms.M) * ones_a));
    zero.residual = relative_residual(B_a, W_a, ones_a, 0.0);
    return spec;
}

double rayleigh(const AssembledForms& forms, const Eigen::VectorXd& v) {
    if (v.size() != forms.B.rows()) {
        throw Error(ErrorKind::SizeMismatch, "vector size does not match the number of DOFs");
    }
    const double num = v.dot(forms.B * v);
    const double den = v.dot(forms.W * v);
    if (den == 0.0 || std::abs(den) <= 1e-14 * forms.W.norm() * v.squaredNorm()) {
        throw Error(ErrorKind::IndefiniteDirection, "v^T W v vanishes: Rayleigh quotient undefined");
    }
    return num / den;
}

FirstEigenStructure first_eigen_structure(const Spectrum& spectrum, const Spectrum* refined) {
    FirstEigenStructure out;
    out.positive_side = spectrum.weight_integral < 0;
    auto side = [&](const Spectrum& s) -> const std::vector<EigenPair>& {
        return out.positive_side ? s.positives : s.negatives;
    };
    auto gap_of = [&](const Spectrum& s) {
        const auto& pairs = side(s);
        if (pairs.size() < 2) {
            throw Error(ErrorKind::InsufficientEigenvalues,
                        "need at least two eigenvalues on the principal side");
        }
        const double l1 = std::abs(pairs[0].lambda);
        const double l2 = std::abs(pairs[1].lambda);
        return (l2 - l1) / l1;
    };
    out.gap = gap_of(spectrum);
    out.simple = out.gap > 1e-6;
    if (refined != nullptr) out.simple = out.simple && gap_of(*refined) > 1e-6;

    const Eigen::VectorXd& u = side(spectrum).front().u;
    double mean = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    int count = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!spectrum.interior[static_cast<std::size_t>(i)]) continue;
        mean += u(i);
        ++count;
    }
    const double orient = mean / count < 0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!spectrum.interior[static_cast<std::size_t>(i)]) continue;
        lo = std::min(lo, orient * u(i));
        hi = std::max(hi, orient * u(i));
    }
    out.min_over_max = hi > 0 ? lo / hi : -1.0;
    out.signed_ = hi > 0 && lo >= -1e-8 * hi;
    return out;
}

Eigen::VectorXd solve_source(const AssembledForms& forms, const PiecewiseField& f) {
    const double total = integral(f);
    const double l1 = lq_norm(f, 1.0);
    if (std::abs(total) > 1e-10 * l1) {
        std::ostringstream msg;
        msg << "zero-flux condition violated: int_Omega f = " << total << " != 0";
        throw Error(ErrorKind::ZeroFluxViolation, msg.str());
    }
    const auto active = forms.active_indices();
    const auto n = static_cast<Eigen::Index>(active.size());
    const Eigen::VectorXd F_full = load_vector(forms.mesh, f);
    Eigen::VectorXd F(n);
    Eigen::VectorXd g(n);
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)]);
        F(i) = F_full(ii);
        g(i) = forms.ones_mass(ii);
        for (Eigen::Index j = 0; j < n; ++j) {
            A(i, j) = forms.B(ii, static_cast<Eigen::Index>(active[static_cast<std::size_t>(j)]));
        }
    }
    if (F.norm() == 0.0) return Eigen::VectorXd::Zero(forms.B.rows());

    // B + rho g g^T is SPD (g^T 1 = |Omega| > 0) and its solution satisfies
    // g^T u = 0 because 1^T B = 0 and 1^T F = int f = 0.
    const Eigen::MatrixXd B_a = A;
    const double rho = A.diagonal().maxCoeff() / g.squaredNorm();
    A.noalias() += rho * g * g.transpose();
    const Eigen::LLT<Eigen::MatrixXd> chol(A);
    if (chol.info() != Eigen::Success) {
        throw Error(ErrorKind::SingularSystem, "source system is singular");
    }
    Eigen::VectorXd u = chol.solve(F);
    for (int it = 0; it < 2; ++it) u += chol.solve(F - A * u);
    // Remove the rank-one gauge component exactly.
    u -= (g.dot(u) / g.sum()) * Eigen::VectorXd::Ones(n);
    const double res = (B_a * u - F).norm() / F.norm();
    if (!(res <= 1e-10)) {
        std::ostringstream msg;
        msg << "source solve residual " << res << " exceeds 1e-10";
        throw Error(ErrorKind::SingularSystem, msg.str());
    }
    return scatter_active(forms, active, u);
}

double NeumannResiduals::max_abs_ns() const {
    double m = 0.0;
    if (ns_profile) {
        for (const CollarValue& c : *ns_profile) m = std::max(m, std::abs(c.value));
    }
    return m;
}

NeumannResiduals neumann_residuals(const AssembledForms& forms, const Eigen::VectorXd& u) {
    const Mesh1D& mesh = forms.mesh;
    if (u.size() != static_cast<Eigen::Index>(mesh.node_count())) {
        throw Error(ErrorKind::SizeMismatch, "vector size does not match the number of nodes");
    }
    NeumannResiduals out;
    const double s = forms.params.s;
    if (forms.params.beta != 0.0) {
        std::vector<CollarValue> profile;
        const bool half = std::abs(1.0 - 2.0 * s) < 1e-12;
        for (std::size_t i = 0; i < mesh.node_count(); ++i) {
            const double x = mesh.node(i);
            if (x >= mesh.a() && x <= mesh.b()) continue;
            const bool right = x > mesh.b();
            const double ux = u(static_cast<Eigen::Index>(i));
            double total = 0.0;
            for (std::size_t e = 0; e < mesh.element_count(); ++e) {
                if (!mesh.interior_element(e)) continue;
                const double y0 = mesh.element_left(e);
                const double y1 = mesh.element_right(e);
                const double u0 = u(static_cast<Eigen::Index>(e));
                const double g = (u(static_cast<Eigen::Index>(e) + 1) - u0) / (y1 - y0);
                // u(x) - u(y) = c0 + c1 t with t = |x - y| in [t0, t1].
                const double c0 = ux - u0 - g * (x - y0);
                const double c1 = right ? g : -g;
                const double t0 = right ? x - y1 : y0 - x;
                const double t1 = right ? x - y0 : y1 - x;
                const double I0 = (std::pow(t0, -2.0 * s) - std::pow(t1, -2.0 * s)) / (2.0 * s);
                const double I1 = half ? std::log(t1 / t0)
                                       : (std::pow(t1, 1.0 - 2.0 * s) - std::pow(t0, 1.0 - 2.0 * s)) /
                                             (1.0 - 2.0 * s);
                total += c0 * I0 + c1 * I1;
            }
            profile.push_back({i, x, total});
        }
        out.ns_profile = std::move(profile);
    }
    if (forms.params.alpha != 0.0) {
        const auto ia = static_cast<Eigen::Index>(mesh.left_boundary_node());
        const auto ib = static_cast<Eigen::Index>(mesh.right_boundary_node());
        const double h = mesh.h();
        out.normal_deriv = std::make_pair(-(u(ia + 1) - u(ia)) / h, (u(ib) - u(ib - 1)) / h);
    }
    return out;
}

}  // namespace mixneu

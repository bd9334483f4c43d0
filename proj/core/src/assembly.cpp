#include "mixneu/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "mixneu/error.hpp"

namespace mixneu {

namespace {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

struct GaussRule {
    std::vector<double> x;  // on [0, 1]
    std::vector<double> w;

    explicit GaussRule(int n) {
        gauss_legendre(n, x, w);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = 0.5 * (x[i] + 1.0);
            w[i] *= 0.5;
        }
    }
};

const GaussRule& angular_rule() {
    static const GaussRule rule(20);
    return rule;
}

// int_0^1 g(t) dt where g has a pole at t = -A/B; geometric panels
// toward t = 0 keep each panel well separated from the pole.
template <typename Fn>
void graded_integrate(double A, double B, Fn&& fn) {
    const GaussRule& rule = angular_rule();
    double lo = 0.0;
    double hi = std::min(1.0, A / B);
    while (true) {
        const double len = hi - lo;
        for (std::size_t q = 0; q < rule.x.size(); ++q) fn(lo + len * rule.x[q], len * rule.w[q]);
        if (hi >= 1.0) break;
        lo = hi;
        hi = std::min(1.0, 2.0 * hi);
    }
}

class FracAssembler {
public:
    FracAssembler(const Mesh1D& mesh, double s, const QuadratureRule& quad)
        : mesh_(mesh), s_(s), p_(1.0 + 2.0 * s), quad_(quad) {}

    // iint_{E x E} (phi_i(x)-phi_i(y))(phi_j(x)-phi_j(y)) k: both hats are
    // affine on E so the integrand is g_i g_j |x-y|^(1-2s).
    Eigen::Matrix2d identical(std::size_t e) const {
        const double h = mesh_.element_size(e);
        const double I = 2.0 * std::pow(h, 3.0 - 2.0 * s_) / ((2.0 - 2.0 * s_) * (3.0 - 2.0 * s_));
        Eigen::Vector2d g(-1.0 / h, 1.0 / h);
        return g * g.transpose() * I;
    }

    // Element L = [x0, x1], R = [x1, x2]; local nodes (x0, x1, x2). Returns
    // the integral over L x R (one ordering). Each of the two triangles
    // {zeta <= xi}, {xi <= zeta} is mapped so the radial factor integrates
    // exactly to 1/(3-2s).
    Mat3 adjacent(std::size_t left) const {
        const double hL = mesh_.element_size(left);
        const double hR = mesh_.element_size(left + 1);
        const double scale = hL * hR / (3.0 - 2.0 * s_);
        Mat3 out = Mat3::Zero();
        graded_integrate(hL, hR, [&](double t, double w) {
            const Vec3 d(1.0, t - 1.0, -t);
            out += (w * std::pow(hL + hR * t, -p_)) * (d * d.transpose());
        });
        graded_integrate(hR, hL, [&](double t, double w) {
            const Vec3 d(t, 1.0 - t, -1.0);
            out += (w * std::pow(hL * t + hR, -p_)) * (d * d.transpose());
        });
        return scale * out;
    }

    // Element pair e < f without a shared node; local nodes
    // (e, e+1, f, f+1).
    Mat4 separated(std::size_t e, std::size_t f) const {
        Mat4 out = Mat4::Zero();
        separated_rec(e, f, mesh_.element_left(e), mesh_.element_right(e), mesh_.element_left(f),
                      mesh_.element_right(f), quad_.split_depth(), out);
        return out;
    }

private:
    void separated_rec(std::size_t e, std::size_t f, double xa, double xb, double ya, double yb,
                       int depth, Mat4& out) const {
        const double gap = ya - xb;
        const double lx = xb - xa;
        const double ly = yb - ya;
        if (depth > 0 && gap < std::max(lx, ly)) {
            const bool split_x = lx > gap;
            const bool split_y = ly > gap;
            const std::array<double, 3> xs{xa, split_x ? 0.5 * (xa + xb) : xb, xb};
            const std::array<double, 3> ys{ya, split_y ? 0.5 * (ya + yb) : yb, yb};
            for (int i = 0; i < (split_x ? 2 : 1); ++i) {
                for (int j = 0; j < (split_y ? 2 : 1); ++j) {
                    separated_rec(e, f, xs[static_cast<std::size_t>(i)],
                                  xs[static_cast<std::size_t>(i) + 1],
                                  ys[static_cast<std::size_t>(j)],
                                  ys[static_cast<std::size_t>(j) + 1], depth - 1, out);
                }
            }
            return;
        }
        const double ex0 = mesh_.element_left(e);
        const double ehx = mesh_.element_size(e);
        const double fy0 = mesh_.element_left(f);
        const double fhy = mesh_.element_size(f);
        const auto pts = quad_.points();
        const auto wts = quad_.weights();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double x = xa + lx * pts[i];
            const double tx = (x - ex0) / ehx;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                const double y = ya + ly * pts[j];
                const double ty = (y - fy0) / fhy;
                const Vec4 d(1.0 - tx, tx, ty - 1.0, -ty);
                const double w = wts[i] * wts[j] * lx * ly * std::pow(y - x, -p_);
                out.noalias() += w * (d * d.transpose());
            }
        }
    }

    const Mesh1D& mesh_;
    double s_;
    double p_;
    const QuadratureRule& quad_;
};

void add_block(Eigen::MatrixXd& K, std::span<const std::size_t> idx, const Eigen::MatrixXd& local,
               double factor) {
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < idx.size(); ++c) {
            K(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c])) +=
                factor * local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
    }
}

// Far field beyond the collar under constant extension: for x in Omega,
// int_{y > b+R} |x-y|^(-1-2s) dy = (b+R-x)^(-2s) / (2s), and likewise on
// the left. Both orderings of Q are included.
void add_tail(const Mesh1D& mesh, double s, const QuadratureRule& quad, Eigen::MatrixXd& K) {
    const std::size_t first = 0;
    const std::size_t last = mesh.node_count() - 1;
    const double left_end = mesh.node(first);
    const double right_end = mesh.node(last);
    const auto pts = quad.points();
    const auto wts = quad.weights();
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        if (!mesh.interior_element(e)) continue;
        const double x0 = mesh.element_left(e);
        const double h = mesh.element_size(e);
        Mat3 right = Mat3::Zero();
        Mat3 left = Mat3::Zero();
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double x = x0 + h * pts[q];
            const Vec3 d(1.0 - pts[q], pts[q], -1.0);
            const Mat3 ddt = d * d.transpose();
            right += (wts[q] * h * std::pow(right_end - x, -2.0 * s) / (2.0 * s)) * ddt;
            left += (wts[q] * h * std::pow(x - left_end, -2.0 * s) / (2.0 * s)) * ddt;
        }
        const std::array<std::size_t, 3> ir{e, e + 1, last};
        const std::array<std::size_t, 3> il{e, e + 1, first};
        add_block(K, ir, right, 2.0);
        add_block(K, il, left, 2.0);
    }
}

// int over [lo, hi] of (value) * basis products for the element [x0, x0+h]
// using the 2-point Gauss rule (exact for quadratics).
void add_weighted_element(double x0, double h, double lo, double hi, double value, std::size_t e,
                          Eigen::MatrixXd& mat, Eigen::VectorXd& vec) {
    static const double g = 0.5 / std::sqrt(3.0);
    const double mid = 0.5 * (lo + hi);
    const double len = hi - lo;
    for (const double off : {-g, g}) {
        const double x = mid + off * len;
        const double t = (x - x0) / h;
        const double phi[2] = {1.0 - t, t};
        const double w = 0.5 * len * value;
        for (int r = 0; r < 2; ++r) {
            vec(static_cast<Eigen::Index>(e) + r) += w * phi[r];
            for (int c = 0; c < 2; ++c) {
                mat(static_cast<Eigen::Index>(e) + r, static_cast<Eigen::Index>(e) + c) +=
                    w * phi[r] * phi[c];
            }
        }
    }
}

void assemble_weighted(const Mesh1D& mesh, const PiecewiseField& m, Eigen::MatrixXd& mat,
                       Eigen::VectorXd& vec) {
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        if (!mesh.interior_element(e)) continue;
        const double x0 = mesh.element_left(e);
        const double x1 = mesh.element_right(e);
        for (std::size_t p = 0; p < m.pieces(); ++p) {
            const double lo = std::max(x0, m.breaks[p]);
            const double hi = std::min(x1, m.breaks[p + 1]);
            if (hi <= lo) continue;
            add_weighted_element(x0, x1 - x0, lo, hi, m.values[p], e, mat, vec);
        }
    }
}

}  // namespace

std::vector<std::size_t> AssembledForms::active_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (active[i]) idx.push_back(i);
    }
    return idx;
}

Eigen::VectorXd load_vector(const Mesh1D& mesh, const PiecewiseField& f) {
    validate(f, mesh.a(), mesh.b());
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    Eigen::MatrixXd scratch = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
    assemble_weighted(mesh, f, scratch, F);
    return F;
}

AssembledForms assemble(const OperatorParams& params, const Mesh1D& mesh, const PiecewiseField& m,
                        const QuadratureRule& quad, TailModel tail) {
    if (!(params.s > 0 && params.s < 1)) {
        std::ostringstream msg;
        msg << "fractional order s must lie in (0, 1), got " << params.s;
        throw Error(ErrorKind::Assembly, msg.str());
    }
    validate(params);
    if (params.n != 1) throw Error(ErrorKind::Assembly, "only dimension n = 1 is discretized");

    AssembledForms forms{mesh, params, m, weight_diagnostics(m, mesh), tail, {}, {}, {}, {}, {},
                         {}, {}, {}};
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    forms.K_loc = Eigen::MatrixXd::Zero(n, n);
    forms.K_frac = Eigen::MatrixXd::Zero(n, n);
    forms.W = Eigen::MatrixXd::Zero(n, n);
    forms.M = Eigen::MatrixXd::Zero(n, n);
    forms.c_vec = Eigen::VectorXd::Zero(n);
    forms.ones_mass = Eigen::VectorXd::Zero(n);

    if (params.alpha != 0.0) {
        for (std::size_t e = 0; e < mesh.element_count(); ++e) {
            if (!mesh.interior_element(e)) continue;
            const double k = params.alpha / mesh.element_size(e);
            const auto i = static_cast<Eigen::Index>(e);
            forms.K_loc(i, i) += k;
            forms.K_loc(i + 1, i + 1) += k;
            forms.K_loc(i, i + 1) -= k;
            forms.K_loc(i + 1, i) -= k;
        }
    }

    if (params.beta != 0.0) {
        FracAssembler frac(mesh, params.s, quad);
        Eigen::MatrixXd& K = forms.K_frac;
        for (const ElementPair& pr : element_pairs(mesh)) {
            if (pr.first > pr.second) continue;  // mirror pair added with factor 2 below
            const std::size_t e = pr.first;
            const std::size_t f = pr.second;
            switch (pr.proximity) {
                case Proximity::Identical: {
                    const std::array<std::size_t, 2> idx{e, e + 1};
                    add_block(K, idx, frac.identical(e), 1.0);
                    break;
                }
                case Proximity::Adjacent: {
                    const std::array<std::size_t, 3> idx{e, e + 1, e + 2};
                    add_block(K, idx, frac.adjacent(e), 2.0);
                    break;
                }
                case Proximity::Separated: {
                    const std::array<std::size_t, 4> idx{e, e + 1, f, f + 1};
                    add_block(K, idx, frac.separated(e, f), 2.0);
                    break;
                }
            }
        }
        if (tail == TailModel::ConstantExtension) add_tail(mesh, params.s, quad, K);
        K *= 0.5 * params.beta;
        K = 0.5 * (K + K.transpose()).eval();
    }

    forms.B = forms.K_loc + forms.K_frac;
    if (!forms.B.allFinite()) throw Error(ErrorKind::Assembly, "non-finite entries in assembled form");

    assemble_weighted(mesh, m, forms.W, forms.c_vec);
    assemble_weighted(mesh, PiecewiseField::constant(mesh.a(), mesh.b(), 1.0), forms.M,
                      forms.ones_mass);
    forms.W = 0.5 * (forms.W + forms.W.transpose()).eval();
    forms.M = 0.5 * (forms.M + forms.M.transpose()).eval();

    forms.active.assign(mesh.node_count(), 1);
    if (params.beta == 0.0) {
        for (std::size_t i = 0; i < mesh.node_count(); ++i) forms.active[i] = mesh.interior_node(i);
    }
    return forms;
}

double seminorm_sq(const AssembledForms& forms, const Eigen::VectorXd& v) {
    if (v.size() != forms.B.rows()) {
        throw Error(ErrorKind::SizeMismatch, "vector size does not match the number of DOFs");
    }
    return 0.5 * v.dot(forms.B * v);
}

GraphForm::GraphForm(std::size_t nodes, std::vector<Edge> edges)
    : nodes_(nodes), edges_(std::move(edges)) {
    for (const Edge& e : edges_) {
        if (e.i == e.j || e.i >= nodes_ || e.j >= nodes_ || !(e.w >= 0.0)) {
            throw Error(ErrorKind::Config, "graph form edges need distinct in-range nodes and w >= 0");
        }
    }
}

double GraphForm::value(std::span<const double> v) const {
    if (v.size() != nodes_) throw Error(ErrorKind::SizeMismatch, "graph form size mismatch");
    double sum = 0.0;
    for (const Edge& e : edges_) {
        const double d = v[e.i] - v[e.j];
        sum += e.w * d * d;
    }
    return sum;
}

GraphForm graph_form(const OperatorParams& params, const Mesh1D& mesh) {
    const std::size_t n = mesh.node_count();
    std::vector<double> omega(n, 0.0);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        omega[e] += 0.5 * mesh.element_size(e);
        omega[e + 1] += 0.5 * mesh.element_size(e);
    }
    std::vector<GraphForm::Edge> edges;
    const double p = 1.0 + 2.0 * params.s;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!mesh.interior_node(i) && !mesh.interior_node(j)) continue;
            const double r = mesh.node(j) - mesh.node(i);
            edges.push_back({i, j, params.beta * omega[i] * omega[j] * std::pow(r, -p)});
        }
    }
    return GraphForm(n, std::move(edges));
}

}  // namespace mixneu

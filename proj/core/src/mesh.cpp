#include "mixneu/mesh.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mixneu/error.hpp"

namespace mixneu {

namespace {

void validate(double a, double b, int n_in, double R, int n_col) {
    std::ostringstream msg;
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(R)) {
        msg << "mesh endpoints and collar width must be finite";
    } else if (!(b > a)) {
        msg << "need b > a, got a=" << a << " b=" << b;
    } else if (n_in < 2) {
        msg << "need n_in >= 2, got " << n_in;
    } else if (!(R > 0)) {
        msg << "need R > 0, got " << R;
    } else if (n_col < 1) {
        msg << "need n_col >= 1, got " << n_col;
    } else {
        return;
    }
    throw Error(ErrorKind::InvalidGeometry, msg.str());
}

}  // namespace

Mesh1D::Mesh1D(double a, double b, int n_in, double R, int n_col)
    : a_(a), b_(b), n_in_(n_in), R_(R), n_col_(n_col) {
    validate(a, b, n_in, R, n_col);
    const double hc = R / n_col;
    const double h = (b - a) / n_in;
    nodes_.reserve(static_cast<std::size_t>(n_in + 1 + 2 * n_col));
    interior_.reserve(nodes_.capacity());
    for (int j = 0; j < n_col; ++j) {
        nodes_.push_back((a - R) + j * hc);
        interior_.push_back(0);
    }
    for (int i = 0; i < n_in; ++i) {
        nodes_.push_back(a + i * h);
        interior_.push_back(1);
    }
    nodes_.push_back(b);
    interior_.push_back(1);
    for (int j = 1; j < n_col; ++j) {
        nodes_.push_back(b + j * hc);
        interior_.push_back(0);
    }
    nodes_.push_back(b + R);
    interior_.push_back(0);
    nodes_.front() = a - R;
}

Region Mesh1D::region(std::size_t e) const {
    if (e < static_cast<std::size_t>(n_col_)) return Region::LeftCollar;
    if (e < static_cast<std::size_t>(n_col_ + n_in_)) return Region::Interior;
    return Region::RightCollar;
}

Mesh1D build_mesh(double a, double b, int n_in, double R, int n_col) {
    return Mesh1D(a, b, n_in, R, n_col);
}

std::vector<ElementPair> element_pairs(const Mesh1D& mesh) {
    const std::size_t ne = mesh.element_count();
    std::vector<ElementPair> pairs;
    pairs.reserve(ne * ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const bool e_in = mesh.interior_element(e);
        for (std::size_t f = 0; f < ne; ++f) {
            if (!e_in && !mesh.interior_element(f)) continue;
            Proximity p = Proximity::Separated;
            if (e == f) {
                p = Proximity::Identical;
            } else if (e + 1 == f || f + 1 == e) {
                p = Proximity::Adjacent;
            }
            pairs.push_back({e, f, p});
        }
    }
    return pairs;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[static_cast<std::size_t>(i)] = -z;
        x[static_cast<std::size_t>(n - 1 - i)] = z;
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[static_cast<std::size_t>(i)] = wi;
        w[static_cast<std::size_t>(n - 1 - i)] = wi;
    }
}

QuadratureRule::QuadratureRule(int order, int split_depth) : split_depth_(split_depth) {
    if (order < 2 || split_depth < 0) {
        throw Error(ErrorKind::Config, "quadrature order must be >= 2 and split depth >= 0");
    }
    gauss_legendre(order, points_, weights_);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        points_[i] = 0.5 * (points_[i] + 1.0);
        weights_[i] *= 0.5;
    }
}

}  // namespace mixneu

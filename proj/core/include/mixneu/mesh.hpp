#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mixneu {

/// Which part of the real line an element belongs to.
enum class Region { LeftCollar, Interior, RightCollar };

/// Uniform mesh of an interval Omega = (a, b) together with a truncated
/// exterior collar [a - R, a] and [b, b + R] on each side.
///
/// Nodes are stored left to right. The interior carries n_in elements of
/// width h = (b - a) / n_in, each collar carries n_col elements of width
/// R / n_col. No element straddles a or b.
class Mesh1D {
public:
    Mesh1D(double a, double b, int n_in, double R, int n_col);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int n_in() const noexcept { return n_in_; }
    double R() const noexcept { return R_; }
    int n_col() const noexcept { return n_col_; }

    double h() const noexcept { return (b_ - a_) / n_in_; }
    double collar_h() const noexcept { return R_ / n_col_; }
    double length() const noexcept { return b_ - a_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t element_count() const noexcept { return nodes_.size() - 1; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    double node(std::size_t i) const { return nodes_[i]; }

    /// True for nodes in [a, b].
    bool interior_node(std::size_t i) const { return interior_[i] != 0; }
    std::span<const char> interior_mask() const noexcept { return interior_; }

    /// Index of the node at a and at b.
    std::size_t left_boundary_node() const noexcept { return static_cast<std::size_t>(n_col_); }
    std::size_t right_boundary_node() const noexcept {
        return static_cast<std::size_t>(n_col_ + n_in_);
    }

    // Element e spans [node(e), node(e + 1)].
    double element_left(std::size_t e) const { return nodes_[e]; }
    double element_right(std::size_t e) const { return nodes_[e + 1]; }
    double element_size(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }
    Region region(std::size_t e) const;
    bool interior_element(std::size_t e) const { return region(e) == Region::Interior; }

private:
    double a_;
    double b_;
    int n_in_;
    double R_;
    int n_col_;
    std::vector<double> nodes_;
    std::vector<char> interior_;
};

/// Validating factory; throws Error(InvalidGeometry) on bad input.
Mesh1D build_mesh(double a, double b, int n_in, double R, int n_col);

enum class Proximity { Identical, Adjacent, Separated };

struct ElementPair {
    std::size_t first;
    std::size_t second;
    Proximity proximity;

    bool operator==(const ElementPair&) const = default;
};

/// Ordered element pairs whose product region meets the cross-shaped set
/// (Omega x Omega) u (Omega x Omega^c) u (Omega^c x Omega). Collar-collar
/// pairs are excluded; the result is symmetric under swapping the pair.
std::vector<ElementPair> element_pairs(const Mesh1D& mesh);

/// Gauss-Legendre rule on the reference interval [0, 1].
class QuadratureRule {
public:
    /// `order` is the number of Gauss points (>= 2); `split_depth` bounds the
    /// recursive subdivision of near-but-separated element pairs.
    explicit QuadratureRule(int order = 8, int split_depth = 6);

    int order() const noexcept { return static_cast<int>(points_.size()); }
    int split_depth() const noexcept { return split_depth_; }
    std::span<const double> points() const noexcept { return points_; }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    int split_depth_;
};

/// Gauss-Legendre points and weights on [-1, 1] (Newton on P_n).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace mixneu

#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pplab/geometry.hpp"

namespace pplab {

struct Tri {
    std::array<int, 3> v;
};

// Conforming P1 triangulation of a Domain2D. Built from a structured grid of
// square cells (spacing = target_h) clipped against the polygon, so the
// triangle union covers the domain exactly and node ordering is reproducible.
class TriMesh {
public:
    const Domain2D& domain() const { return *domain_; }
    std::shared_ptr<const Domain2D> domain_ptr() const { return domain_; }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int tri_count() const { return static_cast<int>(tris_.size()); }
    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Tri>& triangles() const { return tris_; }

    double h() const { return h_; }             // max edge length
    double spacing() const { return spacing_; } // structured grid pitch

    double tri_area(int t) const { return tri_area_[static_cast<std::size_t>(t)]; }
    // Gradient of the P1 basis function of local vertex k on triangle t.
    Point basis_gradient(int t, int k) const {
        return tri_grad_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
    }
    double total_area() const;

    bool is_boundary_node(int i) const { return is_boundary_[static_cast<std::size_t>(i)]; }
    bool node_on_gamma(int i) const { return on_gamma_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
    const std::vector<int>& interior_nodes() const { return interior_nodes_; }

    // Index of a triangle whose closure contains p, or -1.
    int locate(Point p) const;
    // P1 interpolation of nodal values at p; requires p inside the mesh.
    double interpolate(const Eigen::VectorXd& nodal, Point p) const;

    friend TriMesh build_mesh(const Domain2D& domain, double target_h);

private:
    std::shared_ptr<const Domain2D> domain_;
    std::vector<Point> nodes_;
    std::vector<Tri> tris_;
    std::vector<double> tri_area_;
    std::vector<std::array<Point, 3>> tri_grad_;
    std::vector<bool> is_boundary_;
    std::vector<bool> on_gamma_;
    std::vector<int> boundary_nodes_;
    std::vector<int> interior_nodes_;
    double h_ = 0;
    double spacing_ = 0;

    // point-location bins
    Rect loc_box_;
    double loc_cell_ = 0;
    int loc_nx_ = 0, loc_ny_ = 0;
    std::vector<std::vector<int>> loc_bins_;
    void build_locator();
};

// Deterministic structured mesh with grid pitch target_h; the resulting max
// edge length is at most sqrt(2) * target_h.
TriMesh build_mesh(const Domain2D& domain, double target_h);

} // namespace pplab

#ifndef FLAB_MESH_HPP
#define FLAB_MESH_HPP

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace flab {

// Structured cell-centered grid on an interval (dim 1) or rectangle (dim 2).
// Zero-flux Neumann topology: boundary faces simply carry no flux, so no
// ghost layer is stored. The stored extent is h*cells per axis, so the
// invariant h*n == L holds exactly in the representation.
struct BoxMesh {
    int dim = 1;
    std::array<double, 2> extent{1.0, 0.0};
    std::array<double, 2> origin{0.0, 0.0};
    std::array<int, 2> cells{1, 1};   // cells[1] == 1 in 1D
    std::array<double, 2> h{1.0, 0.0};
    double cell_volume = 1.0;

    int cell_count() const { return cells[0] * cells[1]; }
    double measure() const { return extent[0] * (dim == 2 ? extent[1] : 1.0); }

    int index(int ix, int iy = 0) const { return iy * cells[0] + ix; }

    std::array<double, 2> center(int i) const {
        const int ix = i % cells[0];
        const int iy = i / cells[0];
        return {origin[0] + (ix + 0.5) * h[0],
                dim == 2 ? origin[1] + (iy + 0.5) * h[1] : 0.0};
    }
};

BoxMesh make_box_mesh(int dim, std::span<const double> extents,
                      std::span<const double> origins,
                      std::span<const int> n_cells);

using MeshPtr = std::shared_ptr<const BoxMesh>;

// Cell-averaged solution snapshot.
struct Field {
    MeshPtr mesh;
    std::vector<double> values;
    double time = 0.0;
};

// cell_volume * sum(values): the exact discrete mass.
double integral(const Field& f);

using PointFn = std::function<double(std::array<double, 2>)>;

// Samples f at cell centers.
Field project_function(MeshPtr mesh, const PointFn& f, double time = 0.0);

}  // namespace flab

#endif

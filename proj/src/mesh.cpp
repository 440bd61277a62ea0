#include "flab/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace flab {

BoxMesh make_box_mesh(int dim, std::span<const double> extents,
                      std::span<const double> origins,
                      std::span<const int> n_cells) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("make_box_mesh: dim must be 1 or 2");
    if (extents.size() < size_t(dim) || origins.size() < size_t(dim) ||
        n_cells.size() < size_t(dim))
        throw std::invalid_argument("make_box_mesh: missing per-axis data");

    BoxMesh m;
    m.dim = dim;
    m.extent = {0.0, 0.0};
    m.h = {0.0, 0.0};
    m.cells = {1, 1};
    m.origin = {0.0, 0.0};
    for (int ax = 0; ax < dim; ++ax) {
        if (!(extents[ax] > 0.0))
            throw std::invalid_argument("make_box_mesh: extent must be positive");
        if (n_cells[ax] < 3)
            throw std::invalid_argument("make_box_mesh: need at least 3 cells per axis");
        m.cells[ax] = n_cells[ax];
        m.h[ax] = extents[ax] / n_cells[ax];
        m.extent[ax] = m.h[ax] * n_cells[ax];  // h * n == extent exactly as stored
        m.origin[ax] = origins[ax];
    }
    m.cell_volume = m.h[0] * (dim == 2 ? m.h[1] : 1.0);
    return m;
}

double integral(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return f.mesh->cell_volume * s;
}

Field project_function(MeshPtr mesh, const PointFn& fn, double time) {
    Field f;
    f.mesh = mesh;
    f.time = time;
    const int n = mesh->cell_count();
    f.values.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v = fn(mesh->center(i));
        if (!std::isfinite(v))
            throw std::domain_error("project_function: non-finite sample");
        f.values[i] = v;
    }
    return f;
}

}  // namespace flab

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "flab/mesh.hpp"

using namespace flab;

namespace {

MeshPtr mesh1d(double length, double origin, int n) {
    const double ext[] = {length};
    const double org[] = {origin};
    const int cells[] = {n};
    return std::make_shared<BoxMesh>(make_box_mesh(1, ext, org, cells));
}

}  // namespace

TEST_CASE("make_box_mesh examples") {
    const auto m = mesh1d(1.0, 0.0, 100);
    CHECK(m->h[0] == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(m->cell_count() == 100);

    const double ext2[] = {2.0, 1.0};
    const double org2[] = {0.0, 0.0};
    const int cells2[] = {40, 20};
    const auto m2 = make_box_mesh(2, ext2, org2, cells2);
    CHECK(m2.cell_volume == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK(m2.cell_count() == 800);

    const auto mpi = mesh1d(M_PI, 0.0, 64);
    CHECK(mpi->h[0] == doctest::Approx(M_PI / 64).epsilon(1e-16));
}

TEST_CASE("stored spacing times cell count reproduces the extent exactly") {
    for (int n : {3, 7, 100, 256, 333}) {
        const auto m = mesh1d(1.0, 0.0, n);
        CHECK(m->h[0] * n == m->extent[0]);
    }
    const auto mpi = mesh1d(M_PI, 0.0, 77);
    CHECK(mpi->h[0] * 77 == mpi->extent[0]);
}

TEST_CASE("construction rejects bad arguments") {
    const double ext[] = {1.0};
    const double org[] = {0.0};
    const int two[] = {2};
    CHECK_THROWS_AS(make_box_mesh(1, ext, org, two), std::invalid_argument);
    const double neg[] = {-1.0};
    const int ok[] = {10};
    CHECK_THROWS_AS(make_box_mesh(1, neg, org, ok), std::invalid_argument);
    CHECK_THROWS_AS(make_box_mesh(3, ext, org, ok), std::invalid_argument);
}

TEST_CASE("integral examples") {
    const auto m = mesh1d(2.0, -1.0, 50);
    Field c;
    c.mesh = m;
    c.values.assign(50, 3.0);
    CHECK(integral(c) == doctest::Approx(6.0).epsilon(1e-14));

    Field z;
    z.mesh = m;
    z.values.assign(50, 0.0);
    CHECK(integral(z) == 0.0);

    const auto m256 = mesh1d(1.0, 0.0, 256);
    const Field cosf = project_function(
        m256, [](std::array<double, 2> x) { return std::cos(M_PI * x[0]); });
    CHECK(std::fabs(integral(cosf)) <= 1e-12);
}

TEST_CASE("project_function samples cell centers") {
    const auto m = mesh1d(1.0, 0.0, 4);
    const Field f = project_function(m, [](std::array<double, 2> x) { return x[0]; });
    CHECK(f.values[0] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(f.values[3] == doctest::Approx(0.875).epsilon(1e-15));

    const Field ones = project_function(m, [](std::array<double, 2>) { return 1.0; });
    for (double v : ones.values) CHECK(v == 1.0);

    CHECK_THROWS_AS(project_function(m, [](std::array<double, 2>) {
                        return std::numeric_limits<double>::quiet_NaN();
                    }),
                    std::domain_error);
}

TEST_CASE("midpoint integration is second order for smooth integrands") {
    auto f = [](std::array<double, 2> x) { return std::exp(x[0]); };
    const double exact = std::exp(1.0) - 1.0;
    double prev_err = 0.0;
    for (int k = 0; k < 3; ++k) {
        const int n = 32 << k;
        const auto m = mesh1d(1.0, 0.0, n);
        const double err = std::fabs(integral(project_function(m, f)) - exact);
        if (k > 0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.15));
        prev_err = err;
    }
}

TEST_CASE("refinement by two per axis") {
    const double ext2[] = {2.0, 1.0};
    const double org2[] = {0.0, 0.0};
    const int cells[] = {10, 6};
    const int fine_cells[] = {20, 12};
    const auto coarse = make_box_mesh(2, ext2, org2, cells);
    const auto fine = make_box_mesh(2, ext2, org2, fine_cells);
    CHECK(fine.cell_count() == 4 * coarse.cell_count());
    CHECK(fine.h[0] == doctest::Approx(coarse.h[0] / 2).epsilon(1e-15));
    CHECK(fine.h[1] == doctest::Approx(coarse.h[1] / 2).epsilon(1e-15));
}

TEST_CASE("2D indexing round trip") {
    const double ext2[] = {1.0, 1.0};
    const double org2[] = {0.0, 0.0};
    const int cells2[] = {8, 5};
    const auto m = make_box_mesh(2, ext2, org2, cells2);
    for (int iy = 0; iy < 5; ++iy)
        for (int ix = 0; ix < 8; ++ix) {
            const int i = m.index(ix, iy);
            const auto c = m.center(i);
            CHECK(c[0] == doctest::Approx((ix + 0.5) * m.h[0]).epsilon(1e-15));
            CHECK(c[1] == doctest::Approx((iy + 0.5) * m.h[1]).epsilon(1e-15));
        }
}

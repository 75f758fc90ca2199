#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vin/rng.hpp"
#include "vin/types.hpp"

using namespace vin;

TEST_CASE("box_contains: unit cube basics") {
    BoundingBox7 cube; // unit cube at origin
    CHECK(box_contains(cube, {0, 0, 0}));
    CHECK(box_contains(cube, {0.5, 0, 0})); // boundary counts as inside
    CHECK(box_contains(cube, {0.5, 0.5, 0.5}));
    CHECK_FALSE(box_contains(cube, {0.51, 0, 0}));
}

TEST_CASE("box_contains: yawed box") {
    BoundingBox7 b;
    b.l = 2.0;
    b.w = 1.0;
    b.h = 1.0;
    b.yaw = std::numbers::pi / 2.0;
    // after the quarter turn the long axis points along y
    CHECK(box_contains(b, {0, 0.9, 0}));
    CHECK_FALSE(box_contains(b, {0.9, 0, 0}));
}

TEST_CASE("box_contains: yaw=0 agrees with axis-aligned interval oracle") {
    Rng rng(3, 0);
    for (int trial = 0; trial < 500; ++trial) {
        BoundingBox7 b;
        b.cx = rng.uniform(-5, 5);
        b.cy = rng.uniform(-5, 5);
        b.cz = rng.uniform(-5, 5);
        b.l = rng.uniform(0.2, 4);
        b.w = rng.uniform(0.2, 4);
        b.h = rng.uniform(0.2, 4);
        Point p{rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-8, 8)};
        bool oracle = std::abs(p.x - b.cx) <= 0.5 * b.l &&
                      std::abs(p.y - b.cy) <= 0.5 * b.w &&
                      std::abs(p.z - b.cz) <= 0.5 * b.h;
        CHECK(box_contains(b, p) == oracle);
    }
}

TEST_CASE("box_contains: invariant under rigid SE(2) x z-shift transforms") {
    Rng rng(4, 0);
    for (int trial = 0; trial < 500; ++trial) {
        BoundingBox7 b;
        b.cx = rng.uniform(-3, 3);
        b.cy = rng.uniform(-3, 3);
        b.cz = rng.uniform(-3, 3);
        b.l = rng.uniform(0.3, 3);
        b.w = rng.uniform(0.3, 3);
        b.h = rng.uniform(0.3, 3);
        b.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
        Point p{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        bool before = box_contains(b, p);

        double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
        double tx = rng.uniform(-10, 10), ty = rng.uniform(-10, 10);
        double tz = rng.uniform(-10, 10);
        double c = std::cos(theta), s = std::sin(theta);
        auto transform = [&](double x, double y, double z) {
            return Point{c * x - s * y + tx, s * x + c * y + ty, z + tz};
        };
        BoundingBox7 tb = b;
        Point tc = transform(b.cx, b.cy, b.cz);
        tb.cx = tc.x;
        tb.cy = tc.y;
        tb.cz = tc.z;
        tb.yaw = b.yaw + theta;
        Point tp = transform(p.x, p.y, p.z);

        // skip points too close to the boundary to survive rounding
        double dx = p.x - b.cx, dy = p.y - b.cy;
        double bc = std::cos(b.yaw), bs = std::sin(b.yaw);
        double lx = std::abs(bc * dx + bs * dy), ly = std::abs(-bs * dx + bc * dy);
        double margin = std::min({std::abs(lx - 0.5 * b.l), std::abs(ly - 0.5 * b.w),
                                  std::abs(std::abs(p.z - b.cz) - 0.5 * b.h)});
        if (margin < 1e-9) continue;
        CHECK(box_contains(tb, tp) == before);
    }
}

TEST_CASE("taxonomy: needs thing and stuff") {
    CHECK_THROWS(ClassTaxonomy({{"a", ClassKind::thing}}));
    ClassTaxonomy tax = ClassTaxonomy({{"car", ClassKind::thing}, {"road", ClassKind::stuff}});
    CHECK(tax.num_classes() == 2);
    CHECK(tax.is_thing(0));
    CHECK(tax.is_stuff(1));
    CHECK(tax.thing_ids() == std::vector<int>{0});
}

#include "doctest.h"

#include "filippov/geometry.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace filippov;

TEST_CASE("inflate widens every axis by eps") {
    const Box b{Interval(1.0, 3.0)};
    CHECK(inflate(b, 0.5) == Box{Interval(0.5, 3.5)});
    CHECK(inflate(b, 0.0) == b);

    const Box p = Box::from_point(std::vector<double>{0.0});
    const Box q = inflate(p, 0.1);
    CHECK(q[0].lo() == doctest::Approx(-0.1));
    CHECK(q[0].hi() == doctest::Approx(0.1));
    CHECK(q[0].lo() <= -0.1);
    CHECK(q[0].hi() >= 0.1);

    CHECK_THROWS_AS(inflate(b, -0.1), std::invalid_argument);
}

TEST_CASE("hull of value enclosures") {
    const std::vector<ValueEnclosure> points = {ValueEnclosure(Box{Interval(1.0)}), ValueEnclosure(Box{Interval(3.0)})};
    CHECK(hull(points).box() == Box{Interval(1.0, 3.0)});

    const std::vector<ValueEnclosure> single = {ValueEnclosure(Box{Interval(0.0, 1.0)})};
    CHECK(hull(single).box() == Box{Interval(0.0, 1.0)});

    const std::vector<ValueEnclosure> two = {ValueEnclosure(Box{Interval(0.0, 1.0)}), ValueEnclosure(Box{Interval(2.0, 3.0)})};
    CHECK(hull(two).box() == Box{Interval(0.0, 3.0)});

    CHECK(hull(std::vector<ValueEnclosure>{}).is_empty());
}

TEST_CASE("containment and distance") {
    CHECK(contains(Box{Interval(0.0, 4.0)}, Box{Interval(1.0, 3.0)}));
    CHECK_FALSE(contains(Box{Interval(1.0, 3.0)}, Box{Interval(0.0, 4.0)}));
    CHECK(distance(Box{Interval(1.0, 3.0)}, Box{Interval(1.0, 3.0)}) == 0.0);
    CHECK(distance(Box{Interval(1.0, 3.0)}, Box{Interval(-0.1)}) == doctest::Approx(1.1));

    CHECK_THROWS_AS(contains(Box{Interval(0.0, 1.0)}, Box{Interval(0.0, 1.0), Interval(0.0, 1.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(distance(Box{Interval(0.0, 1.0)}, Box{Interval(0.0, 1.0), Interval(0.0, 1.0)}),
                    std::invalid_argument);

    const auto empty = ValueEnclosure::empty(1);
    CHECK(contains(ValueEnclosure(Box{Interval(0.0, 1.0)}), empty));
    CHECK(distance(ValueEnclosure(Box{Interval(0.0, 1.0)}), empty) == 0.0);
}

TEST_CASE("interval constructor rejects inverted bounds") {
    CHECK_THROWS_AS(Interval(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Interval(std::nan(""), 1.0), std::invalid_argument);
    CHECK(Interval(1.0).is_point());
}

TEST_CASE("outward rounding keeps enclosures sound") {
    const Interval third = Interval(1.0) / Interval(3.0);
    CHECK(third.lo() < third.hi());
    CHECK(third.lo() * 3.0 <= 1.0);
    const Interval tenth = Interval(0.1) + Interval(0.2);
    CHECK(tenth.contains(0.3));
    CHECK((Interval(1.0) - Interval(0.5)) == Interval(0.5));
    CHECK(exp(Interval(0.0)).contains(1.0));
    CHECK(tanh(Interval::entire()) == Interval(-1.0, 1.0));
    CHECK(pow(Interval(-2.0, 1.0), 2) == Interval(0.0, 4.0));
    CHECK(pow(Interval(-2.0, 1.0), 3).contains(Interval(-8.0, 1.0)));
}

TEST_CASE("mollifier interval extension") {
    const Interval around_zero = mollifier(Interval(-0.5, 0.25));
    CHECK(around_zero.contains(std::exp(-1.0)));
    CHECK(around_zero.contains(mollifier(-0.5)));
    CHECK(mollifier(Interval(1.0, 2.0)).hi() <= 1e-300);
    CHECK(mollifier(0.0) == std::exp(-1.0));
    CHECK(mollifier(1.0) == 0.0);
    CHECK(mollifier(-3.0) == 0.0);
}

TEST_CASE("interval functions contain sampled point values") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int trial = 0; trial < 500; ++trial) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        const Interval x(a, b);
        for (int k = 0; k <= 20; ++k) {
            const double p = std::lerp(a, b, k / 20.0);
            CHECK(sin(x).contains(std::sin(p)));
            CHECK(cos(x).contains(std::cos(p)));
            CHECK(tanh(x).contains(std::tanh(p)));
            CHECK(exp(x).contains(std::exp(p)));
            CHECK(abs(x).contains(std::fabs(p)));
            CHECK(mollifier(x).contains(mollifier(p)));
            CHECK((x * x).contains(p * p));
            CHECK(pow(x, 3).contains(p * p * p));
        }
    }
}

TEST_CASE("inflation composes additively") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0), e(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        const Box box{Interval(a, b), Interval(a - 1.0, b + 1.0)};
        const double p = e(rng), q = e(rng);
        const Box twice = inflate(inflate(box, p), q);
        const Box once = inflate(box, p + q);
        for (std::size_t i = 0; i < box.dims(); ++i) {
            CHECK(twice[i].lo() == doctest::Approx(once[i].lo()).epsilon(1e-14));
            CHECK(twice[i].hi() == doctest::Approx(once[i].hi()).epsilon(1e-14));
        }
    }
}

TEST_CASE("hull contains its members and distance vanishes exactly on containment") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ValueEnclosure> values;
        for (int k = 0; k < 4; ++k) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            values.emplace_back(Box{Interval(a, b)});
        }
        const auto h = hull(values);
        for (const auto& v : values) {
            CHECK(contains(h, v));
            CHECK(distance(h.box(), v.box()) == 0.0);
        }
        const Box a = values[0].box(), b = values[1].box();
        CHECK((distance(a, b) == 0.0) == contains(a, b));
        CHECK(contains(inflate(a, distance(a, b)), b));
    }
}

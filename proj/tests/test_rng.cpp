#include <gsc/parallel.hpp>
#include <gsc/rng.hpp>

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace gsc;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using B = Philox4x32::Block;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    CounterRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    bool differ_stream = false, differ_seed = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ_stream |= x != c();
        differ_seed |= x != d();
    }
    CHECK(differ_stream);
    CHECK(differ_seed);
    CHECK(derive_seed(1, StreamTag::calibration) != derive_seed(1, StreamTag::test_support));
    CHECK(derive_seed(1, StreamTag::calibration) == derive_seed(1, StreamTag::calibration));
}

TEST_CASE("sampler moments") {
    CounterRng rng(11, 0);
    const int N = 200000;
    double su = 0, sn = 0, sn2 = 0, sg = 0, sp = 0, st2 = 0;
    for (int i = 0; i < N; ++i) {
        const double u = rng.uniform();
        CHECK_UNARY(u > 0.0 && u < 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        sg += rng.gamma(2.5);
        sp += static_cast<double>(rng.poisson(3.0));
        const double t = rng.student_t(6.0);
        st2 += t * t;
    }
    CHECK(su / N == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / N) < 0.01);
    CHECK(sn2 / N == doctest::Approx(1.0).epsilon(0.01));
    CHECK(sg / N == doctest::Approx(2.5).epsilon(0.01));
    CHECK(sp / N == doctest::Approx(3.0).epsilon(0.01));
    CHECK(st2 / N == doctest::Approx(6.0 / 4.0).epsilon(0.03));
}

TEST_CASE("poisson handles large rates") {
    CounterRng rng(5, 1);
    double s = 0;
    for (int i = 0; i < 20000; ++i) s += static_cast<double>(rng.poisson(900.0));
    CHECK(s / 20000 == doctest::Approx(900.0).epsilon(0.005));
}

TEST_CASE("replicate is identical serially and in parallel") {
    auto draw = [](std::size_t i) {
        CounterRng r(99, make_stream(StreamTag::test_support, i));
        double acc = 0;
        for (int k = 0; k < 100; ++k) acc += r.normal();
        return acc;
    };
    const auto a = replicate<double>(500, Execution::serial, draw);
    for (int threads : {1, 2, 4}) {
        set_thread_count(threads);
        CHECK(replicate<double>(500, Execution::parallel, draw) == a);
    }
    set_thread_count(max_threads());
}

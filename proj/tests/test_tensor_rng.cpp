#include <doctest.h>

#include <cmath>

#include "advd/parallel.hpp"
#include "advd/rng.hpp"
#include "advd/tensor.hpp"

using namespace advd;

TEST_CASE("tensor shape and data agree") {
    Tensor t({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.rank() == 2);
    CHECK_THROWS(Tensor({2, 3}, std::vector<double>(5)));
    t.reshape({3, 2});
    CHECK(t.dim(0) == 3);
    CHECK_THROWS(t.reshape({4, 2}));
}

TEST_CASE("validated construction rejects non-finite input") {
    CHECK_NOTHROW(Tensor::validated({2}, {1.0, -2.0}));
    CHECK_THROWS(Tensor::validated({2}, {1.0, std::nan("")}));
    CHECK_THROWS(Tensor::validated({2}, {1.0, INFINITY}));
}

TEST_CASE("batch_row copies the right slice") {
    Tensor b({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor r = batch_row(b, 1);
    CHECK(r.shape() == std::vector<std::size_t>{1, 3});
    CHECK(r[0] == 4);
    CHECK(r[2] == 6);
}

TEST_CASE("rng streams are deterministic and distinct") {
    RngStream a = RngStream::derive(42, "x", 0);
    RngStream b = RngStream::derive(42, "x", 0);
    RngStream c = RngStream::derive(42, "x", 1);
    RngStream d = RngStream::derive(42, "y", 0);
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
    CHECK(va != d.next_u64());
}

TEST_CASE("uniform and gaussian moments") {
    RngStream rng(123);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(std::fabs(sum / n - 0.5) < 0.005);
    CHECK(std::fabs(sum2 / n - 1.0 / 3.0) < 0.005);

    double gsum = 0, gsum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        gsum += g;
        gsum2 += g * g;
    }
    CHECK(std::fabs(gsum / n) < 0.01);
    CHECK(std::fabs(gsum2 / n - 1.0) < 0.02);
}

TEST_CASE("below is within range and covers values") {
    RngStream rng(7);
    std::vector<int> seen(10, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto v = rng.below(10);
        REQUIRE(v < 10);
        seen[std::size_t(v)]++;
    }
    for (int count : seen) CHECK(count > 50);
}

TEST_CASE("parallel_chunks covers every index exactly once") {
    std::vector<int> hit(1000, 0);
    parallel_chunks(1000, kReductionChunks, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) hit[i]++;
    });
    for (int h : hit) CHECK(h == 1);

    std::vector<int> hit2(17, 0);
    parallel_items(17, [&](std::size_t i) { hit2[i]++; });
    for (int h : hit2) CHECK(h == 1);
}

#include <doctest.h>

#include <set>
#include <vector>

#include "cbandit/rng.hpp"

using namespace cbandit;

TEST_CASE("identical keys give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("split streams are distinct and reproducible") {
    Rng master(7);
    Rng a = master.split(0);
    Rng b = master.split(1);
    Rng a2 = master.split(0);
    CHECK(a.next_u64() != b.next_u64());
    Rng a3 = Rng(7).split(0);
    CHECK(a2.next_u64() == a3.next_u64());
}

TEST_CASE("next_double lands in [0,1) and is roughly uniform") {
    Rng rng(123);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("next_below covers the range") {
    Rng rng(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        auto v = rng.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("sample_index follows the weights") {
    Rng rng(9);
    std::vector<double> w{0.9, 0.1};
    int first = 0;
    for (int i = 0; i < 10000; ++i)
        if (sample_index(w, rng) == 0) ++first;
    CHECK(first / 10000.0 == doctest::Approx(0.9).epsilon(0.02));
}

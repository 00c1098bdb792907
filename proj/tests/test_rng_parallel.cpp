#include <atomic>
#include <set>
#include <vector>

#include "doctest.h"
#include "klim/parallel.hpp"
#include "klim/rng.hpp"

using namespace klim;

TEST_CASE("substreams are pure functions of seed, domain and index") {
    const RngPolicy p{42};
    Substream a(p, StreamDomain::path_noise, 7);
    Substream b(p, StreamDomain::path_noise, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        seeds.insert(substream_seed(42, StreamDomain::path_noise, i));
        seeds.insert(substream_seed(42, StreamDomain::initial_law, i));
        seeds.insert(substream_seed(43, StreamDomain::path_noise, i));
    }
    CHECK(seeds.size() == 3000);
}

TEST_CASE("uniform draws lie in [0, 1)") {
    Substream s(RngPolicy{1}, StreamDomain::property_test, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}

TEST_CASE("parallel_for visits every index once at any worker count") {
    for (unsigned threads : {1u, 2u, 3u, 8u}) {
        std::vector<int> hits(1001, 0);
        parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
        for (int h : hits) CHECK(h == 1);
    }
    parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("parallel_for rethrows worker exceptions") {
    CHECK_THROWS_AS(parallel_for(100, 3,
                                 [](std::size_t i) {
                                     if (i == 57) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

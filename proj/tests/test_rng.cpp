// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "tailfit/rng.hpp"

using namespace tailfit;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the sequence") {
    RngStream a(123);
    RngStream b(123);
    for (int i = 0; i < 1000; ++i) CHECK_EQ(a.next_u64(), b.next_u64());
}

TEST_CASE("different seeds give different sequences") {
    RngStream a(1);
    RngStream b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK_LT(same, 2);
}

TEST_CASE("uniform lies in [0, 1)") {
    RngStream rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK_GE(u, 0.0);
        CHECK_LT(u, 1.0);
    }
}

TEST_CASE("ranged uniform respects its bounds") {
    RngStream rng(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform(-0.05, 0.05);
        CHECK_GE(u, -0.05);
        CHECK_LE(u, 0.05);
    }
}

TEST_CASE("uniform_index stays in range and covers all buckets") {
    RngStream rng(11);
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::size_t k = rng.uniform_index(7);
        CHECK_LT(k, 7);
        seen.insert(k);
    }
    CHECK_EQ(seen.size(), 7);
}

TEST_CASE("uniform moments match the flat distribution") {
    RngStream rng(13);
    const int n = 100000;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // 4-sigma bands: sd(mean) = sqrt(1/12/n) ~ 9.1e-4
    CHECK_LT(std::fabs(mean - 0.5), 0.004);
    CHECK_LT(std::fabs(var - 1.0 / 12.0), 0.004);
}

TEST_CASE("derive_seed separates streams") {
    const std::uint64_t m = 42;
    CHECK_NE(derive_seed(m, 0), derive_seed(m, 1));
    CHECK_NE(derive_seed(m, 1, 2), derive_seed(m, 2, 1));
    CHECK_EQ(derive_seed(m, 5, 9), derive_seed(m, 5, 9));

    // derived streams should not collide on their prefixes
    RngStream a(derive_seed(m, 2000, 0));
    RngStream b(derive_seed(m, 2000, 1));
    int same = 0;
    for (int i = 0; i < 64; ++i) {
        if (a.next_u64() == b.next_u64()) ++same;
    }
    CHECK_LT(same, 2);
}

}  // TEST_SUITE

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "agelab/parallel.hpp"
#include "doctest.h"

using agelab::parallel_for;
using agelab::thread_budget;

namespace {

// Restores AGELAB_THREADS when a test scope ends.
struct ThreadEnvGuard {
    std::string saved;
    bool had = false;
    ThreadEnvGuard() {
        if (const char* v = std::getenv("AGELAB_THREADS")) {
            saved = v;
            had = true;
        }
    }
    ~ThreadEnvGuard() {
        if (had)
            setenv("AGELAB_THREADS", saved.c_str(), 1);
        else
            unsetenv("AGELAB_THREADS");
    }
};

} // namespace

TEST_CASE("the thread budget follows AGELAB_THREADS and never drops below one") {
    ThreadEnvGuard guard;
    setenv("AGELAB_THREADS", "3", 1);
    CHECK(thread_budget() == 3);
    setenv("AGELAB_THREADS", "1", 1);
    CHECK(thread_budget() == 1);
    setenv("AGELAB_THREADS", "0", 1);
    CHECK(thread_budget() == 1);
    setenv("AGELAB_THREADS", "-4", 1);
    CHECK(thread_budget() == 1);
    setenv("AGELAB_THREADS", "nope", 1);
    CHECK(thread_budget() == 1);
    unsetenv("AGELAB_THREADS");
    CHECK(thread_budget() >= 1);
}

TEST_CASE("every index runs exactly once under any worker count") {
    ThreadEnvGuard guard;
    for (const char* workers : {"1", "2", "4", "7"}) {
        setenv("AGELAB_THREADS", workers, 1);
        const std::size_t n = 1001;
        std::vector<std::atomic<int>> hits(n);
        parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (std::size_t i = 0; i < n; ++i) CHECK(hits[i].load() == 1);
    }
}

TEST_CASE("per-slot results are identical to a serial run") {
    ThreadEnvGuard guard;
    const std::size_t n = 512;
    std::vector<double> serial(n), parallel(n);
    auto f = [](std::size_t i) { return std::sin(0.1 * static_cast<double>(i)) * (i + 1); };

    setenv("AGELAB_THREADS", "1", 1);
    parallel_for(n, [&](std::size_t i) { serial[i] = f(i); });
    setenv("AGELAB_THREADS", "4", 1);
    parallel_for(n, [&](std::size_t i) { parallel[i] = f(i); });
    CHECK(serial == parallel);
}

TEST_CASE("zero iterations is a no-op") {
    bool ran = false;
    parallel_for(0, [&](std::size_t) { ran = true; });
    CHECK_FALSE(ran);
}

TEST_CASE("an exception in a worker reaches the caller") {
    ThreadEnvGuard guard;
    for (const char* workers : {"1", "4"}) {
        setenv("AGELAB_THREADS", workers, 1);
        CHECK_THROWS_WITH_AS(parallel_for(100,
                                          [](std::size_t i) {
                                              if (i == 37) throw std::runtime_error("boom at 37");
                                          }),
                             "boom at 37", std::runtime_error);
    }
}

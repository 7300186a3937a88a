#include <doctest.h>

#include "ciris/gradcheck.hpp"

using namespace ciris;

TEST_CASE("every layer and loss passes the finite-difference check") {
    const auto results = run_gradcheck_suite();
    const std::vector<std::string> want{"gabor_conv",      "complex_conv",   "zrelu",
                                        "batchnorm_train", "batchnorm_zrelu", "spectral_pool",
                                        "dense_composite", "transition",     "fractional_distance",
                                        "shift_distance",  "triplet_loss"};
    REQUIRE(results.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(results[i].name == want[i]);
        CHECK(results[i].passed);
        CHECK(results[i].max_rel_error < 1e-4);
        CHECK(results[i].components > 0);
    }
    const auto report = format_report(results);
    for (const auto& n : want) CHECK(report.find(n) != std::string::npos);
}

TEST_CASE("a sign error in the conv backward is caught") {
    GradCheckOptions o;
    o.inject_conv_fault = true;
    const auto results = run_gradcheck_suite(o);
    bool gabor_failed = false;
    for (const auto& r : results)
        if (r.name == "gabor_conv") gabor_failed = !r.passed && r.max_rel_error > 1;
    CHECK(gabor_failed);
}

TEST_CASE("other seeds pass as well") {
    GradCheckOptions o;
    o.seed = 123;
    for (const auto& r : run_gradcheck_suite(o)) CHECK_MESSAGE(r.passed, r.name);
}

#include "doctest.h"
#include "mvlab/systems.hpp"

using namespace mvlab;

TEST_CASE("registry lists the three built-in systems") {
    auto names = builtin_names();
    REQUIRE(names.size() == 3);
    CHECK(names[0] == "ex5_1");
    CHECK(names[1] == "ex5_2");
    CHECK(names[2] == "ex5_3");
}

TEST_CASE("unknown system names raise an error listing the valid ones") {
    try {
        builtin("example9");
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("example9") != std::string::npos);
        CHECK(msg.find("ex5_1") != std::string::npos);
        CHECK(msg.find("ex5_3") != std::string::npos);
    }
}

TEST_CASE("built-ins carry their closed forms and certificates") {
    const NamedSystem& a = builtin("ex5_1");
    CHECK(a.certificate.kind == Certificate::Kind::H2);
    CHECK(a.certificate.lambda == 30.0);
    CHECK(a.closed_forms.count("generator") == 1);
    CHECK_FALSE(a.bar_field.has_value());

    const NamedSystem& b = builtin("ex5_2");
    CHECK(b.certificate.lambda == -6.0);
    CHECK(b.field.lipschitz == 3.0);
    CHECK(b.closed_forms.at("generator").find("-(3/2)(x-m)^4") != std::string::npos);

    const NamedSystem& c = builtin("ex5_3");
    CHECK(c.certificate.kind == Certificate::Kind::TwoPoint);
    CHECK(c.certificate.gamma == 3.0);
    CHECK(c.certificate.beta == 3.0);
    CHECK(c.certificate.gamma_bar == 2.0);
    CHECK(c.certificate.beta_bar == 0.5);
    CHECK_FALSE(c.certificate.strict_rates);
    REQUIRE(c.bar_field.has_value());
    REQUIRE(c.V2.has_value());
}

TEST_CASE("repeated lookups return the same registered instance") {
    const NamedSystem& a = builtin("ex5_1");
    const NamedSystem& b = builtin("ex5_1");
    CHECK(&a == &b);
}

#include <doctest.h>

#include "property_suites.hpp"

// Smaller case counts here keep the unit run snappy; the acceptance suite runs
// the full 1000-case versions.
TEST_CASE("law: structure idempotence") { CHECK(mcl::props::structure_idempotence(200, 101) == 0); }
TEST_CASE("law: representation uniqueness") { CHECK(mcl::props::representation_uniqueness(200, 102) == 0); }
TEST_CASE("law: self adaptedness") { CHECK(mcl::props::self_adaptedness(200, 103) == 0); }
TEST_CASE("law: level decomposition") { CHECK(mcl::props::level_decomposition(200, 104) == 0); }
TEST_CASE("law: additivity") { CHECK(mcl::props::additivity_laws(200, 105) == 0); }
TEST_CASE("law: separation") { CHECK(mcl::props::separation_laws(200, 106) == 0); }
TEST_CASE("law: kinship") { CHECK(mcl::props::kinship_laws(200, 107) == 0); }

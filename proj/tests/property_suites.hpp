#pragma once

// Randomized law suites shared by the unit tests and the acceptance runner.
// Each returns the number of failing cases (0 expected) after running `cases`
// randomized instances from the given seed.

namespace mcl::props {

int structure_idempotence(int cases, unsigned seed);
int representation_uniqueness(int cases, unsigned seed);
int self_adaptedness(int cases, unsigned seed);
int level_decomposition(int cases, unsigned seed);
int additivity_laws(int cases, unsigned seed);
int separation_laws(int cases, unsigned seed);
int kinship_laws(int cases, unsigned seed);

}  // namespace mcl::props

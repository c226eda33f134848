#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pfc/errors.hpp"
#include "pfc/logic.hpp"
#include "pfc/numbers.hpp"
#include "pfc/structures.hpp"

namespace pfc::counting {

using Assignment = std::map<std::string, structures::Element>;

struct CountOptions {
  // Every counting operation first checks that its enumeration space
  // (size^(#object vars + #parameter vars), or size^arity for partition
  // checks) stays within this many tuples and throws BudgetError otherwise.
  std::uint64_t budget = 1'000'000'000;
  // Worker cap for the enumeration kernels: 1 runs the serial reference
  // path, 0 uses the OpenMP default, n > 1 caps the workers at n. Results
  // are merged deterministically, so every setting produces identical
  // output; only wall time differs.
  int jobs = 0;
};

// Tarski satisfaction. The assignment must cover the free variables of f
// exactly (no missing names, no extras). Truth values of closed subformulas
// are resolved once per (structure, formula) and reused across the call.
bool evaluate(const structures::FiniteStructure& s, const logic::Formula& f,
              const Assignment& assignment);

// |{ object tuples a : s |= f[a, params] }|, enumerated lexicographically
// over universe indices. The partition must cover free(f) exactly and
// `params` must assign exactly the parameter variables.
Natural count_solutions(const structures::FiniteStructure& s, const logic::Formula& f,
                        const logic::VariablePartition& part, const Assignment& params,
                        const CountOptions& opts = {});

// One fiber class: all parameter tuples whose object-side solution count is
// `cardinality`. Tuples are in the order of part.parameter_vars, listed
// lexicographically; classes with zero cardinality are real classes.
struct FiberClass {
  Natural cardinality;
  std::vector<structures::Tuple> members;
};

// Classes sorted by descending cardinality (cardinalities are pairwise
// distinct by construction); the classes jointly cover every parameter
// tuple. total_pairs = sum of cardinality * |class| over all classes.
struct FiberSpectrum {
  std::vector<FiberClass> entries;
  Natural total_pairs;
};

// Groups all parameter tuples by their object-side count. Free variables of
// f not in the partition must be fixed by outer_params. A formula with no
// parameter variables yields one class containing the empty tuple.
FiberSpectrum fiber_spectrum(const structures::FiniteStructure& s, const logic::Formula& f,
                             const logic::VariablePartition& part,
                             const Assignment& outer_params = {}, const CountOptions& opts = {});

struct SumIdentityResult {
  bool holds = false;
  Natural combined_count;  // object and parameter variables counted jointly
  Natural spectrum_sum;    // sum of cardinality * |class| over the spectrum
};

// Checks that the spectrum's weighted class sizes add up to an independently
// enumerated joint count.
SumIdentityResult verify_sum_identity(const FiberSpectrum& spectrum,
                                      const structures::FiniteStructure& s,
                                      const logic::Formula& f,
                                      const logic::VariablePartition& part,
                                      const Assignment& outer_params = {},
                                      const CountOptions& opts = {});

struct QuotientIdentityResult {
  // True when the solution set is nonempty and all nonempty parameter-side
  // fibers over object tuples share one cardinality B.
  bool applicable = false;
  bool holds = false;
  Natural fiber_size;        // B, meaningful when applicable
  Natural projection_count;  // |{ object tuples with a nonempty fiber }|
  Natural combined_count;    // joint count over object and parameter tuples
};

// Checks the exact division identity: when every object tuple either has no
// parameter witnesses or exactly B of them, the projection count equals the
// joint count divided by B.
QuotientIdentityResult verify_quotient_identity(const structures::FiniteStructure& s,
                                                const logic::Formula& f,
                                                const logic::VariablePartition& part,
                                                const Assignment& outer_params = {},
                                                const CountOptions& opts = {});

}  // namespace pfc::counting

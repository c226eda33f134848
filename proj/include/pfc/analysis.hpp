#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfc/counting.hpp"
#include "pfc/errors.hpp"
#include "pfc/logic.hpp"
#include "pfc/numbers.hpp"
#include "pfc/polynomials.hpp"
#include "pfc/structures.hpp"

namespace pfc::analysis {

// How the size parameter q is measured on each family member. theta's first
// free variable is the counted one; its remaining free variables are
// instantiated at the lexicographically least tuple satisfying kappa. A null
// kappa admits every tuple. kappa's free variables must be a subset of
// theta's parameter variables.
struct QSelector {
  logic::FormulaPtr theta;
  logic::FormulaPtr kappa;  // may be null
};

// theta = "v = v": q is the member's universe size.
QSelector default_q_selector();

// Throws ConfigError when theta has no free variable or kappa mentions
// variables outside theta's parameter tuple.
void validate_selector(const QSelector& sel);

struct QSelection {
  structures::Tuple parameters;  // in theta's parameter-variable order
  Natural q;
};

// Picks the lexicographically least kappa-satisfying parameter tuple and
// counts theta's first free variable at it. Throws SelectorError when no
// tuple satisfies kappa or the selected instance is empty (callers skip the
// member); BudgetError when the kappa scan would exceed the budget.
QSelection select_q_parameters(const structures::FiniteStructure& member, const QSelector& sel,
                               const counting::CountOptions& opts = {});

// One aligned fiber class across the sampled members.
struct MecClass {
  // The exact polynomial with F(q_i) = cardinalities[i] at every usable
  // index, when one exists; fitting always holds at least one point out.
  std::optional<polynomials::RationalPolynomial> poly;
  bool positive_lead = false;            // zero polynomial counts as ok
  std::vector<Natural> cardinalities;    // per usable index
  std::vector<Natural> class_sizes;      // parameter tuples per usable index
  structures::Tuple witness;             // lex-least member at the first usable index
};

struct MecReport {
  std::string formula;
  std::vector<std::string> object_vars;
  std::vector<std::string> parameter_vars;
  std::vector<std::uint32_t> indices;  // usable sampled indices, ascending
  std::vector<std::uint32_t> skipped;  // indices the selector skipped
  std::vector<Natural> q_values;       // per usable index
  // Number of spectrum classes per usable index; classes are aligned and
  // fitted only when this is constant.
  std::vector<std::size_t> class_counts;
  bool class_count_stable = false;
  std::vector<MecClass> classes;  // descending cardinality rank; empty when unstable
  bool all_fitted = false;        // every class has an exact polynomial
  bool leads_ok = false;          // every fitted polynomial passes the sign check
};

// Computes each member's fiber spectrum, aligns classes across members by
// descending-cardinality rank (distinct cardinalities make the rank order
// unambiguous within a member; a rank crossing collapses two classes into
// one and surfaces as instability), and fits one exact rational polynomial
// in q per class. Duplicate q values must agree on the count, otherwise the
// class is reported unfitted. Throws AnalysisError when fewer than two
// usable members or fewer than two distinct q values remain.
MecReport fit_counting_polynomials(const structures::FamilySpec& family, const logic::Formula& f,
                                   const logic::VariablePartition& part, const QSelector& sel,
                                   const std::vector<std::uint32_t>& indices,
                                   const counting::CountOptions& opts = {});

struct NDimEntry {
  double mu = 0.0;
  std::optional<Rational> mu_exact;
  unsigned d = 0;
  std::vector<double> errors;  // relative error per usable index
};

struct NDimReport {
  unsigned N = 1;
  polynomials::RationalPolynomial universe_poly;
  std::vector<std::uint32_t> indices;
  std::vector<std::uint32_t> skipped;
  std::vector<NDimEntry> entries;  // one per aligned class of f
  double rel_tol = 0.0;
  bool pass = false;
};

// Certifies mu_i * |M|^(d_i / N) growth for every aligned class of f. The
// universe polynomial F is fitted from "x = x" with the same selector and
// must have degree N. Per class of degree N_i: d_i = N_i and mu_i =
// composed_leading(G_i, F) (constant classes take d_i = 0 with mu_i the
// constant itself). The relative error |count - mu_i * |M|^(d_i/N)| /
// |M|^(d_i/N) is computed in exact rationals whenever mu_i and the root are
// exactly rational. Passes iff every class's final error is within rel_tol
// and errors are nonincreasing over the last three indices. Throws
// AnalysisError when the fits fail, fewer than three usable indices remain,
// or the fitted universe degree contradicts N.
NDimReport ndim_certify(const structures::FamilySpec& family, const logic::Formula& f,
                        const logic::VariablePartition& part, const QSelector& sel,
                        const std::vector<std::uint32_t>& indices, unsigned N, double rel_tol,
                        const counting::CountOptions& opts = {});

struct ZeroOneResult {
  std::string sentence;
  std::vector<bool> values;  // per sampled index
  bool stabilized = false;
  bool value = false;                    // the stable truth value, when stabilized
  std::uint32_t first_stable_index = 0;  // family index starting the stable suffix
};

// Evaluates each sentence on every sampled member. A sentence stabilizes
// when its final constant run covers at least max(2, ceil(samples / 2))
// indices — a bare final value never counts as stable. Requires sentences
// only (EvalError) and at least three indices (AnalysisError).
std::vector<ZeroOneResult> zero_one_scan(const structures::FamilySpec& family,
                                         const std::vector<logic::FormulaPtr>& sentences,
                                         const std::vector<std::uint32_t>& indices,
                                         const counting::CountOptions& opts = {});

struct NumBoundResult {
  Natural bound;
  // Always set: the bound is an empirical lower estimate derived from the
  // sampled members, not the true theory-level value.
  bool caveat = true;
  bool class_count_stable = false;
};

// 1 + the largest fiber cardinality among classes whose fitted polynomial is
// constant (the "small" fibers), over the sampled members; 1 when no
// constant class exists or the class structure is unstable. Uses the
// universe-size selector internally — constant classes do not depend on how
// q is measured.
NumBoundResult num_bound(const structures::FamilySpec& family, const logic::Formula& f,
                         const logic::VariablePartition& part,
                         const std::vector<std::uint32_t>& indices,
                         const counting::CountOptions& opts = {});

// True iff the formulas' solution sets partition the member's arity-power:
// every tuple satisfies exactly one formula (empty solution sets are fine).
// The formulas' combined free variables, in first-occurrence order, must
// number exactly `arity` (EvalError otherwise).
bool check_partition(const structures::FiniteStructure& member,
                     const std::vector<logic::FormulaPtr>& formulas, unsigned arity,
                     const counting::CountOptions& opts = {});

// --- report rendering ------------------------------------------------------
// JSON is machine-readable with fixed key order (byte-identical across runs
// and worker counts); tables are aligned-column text; CSV rows are
// (index, q, per-class counts) for external plotting.

nlohmann::ordered_json mec_report_json(const MecReport& r);
std::string mec_report_table(const MecReport& r, bool full);  // full = per-index matrix
std::string mec_report_csv(const MecReport& r);

nlohmann::ordered_json ndim_report_json(const NDimReport& r);
std::string ndim_report_table(const NDimReport& r);
std::string ndim_report_csv(const NDimReport& r);

nlohmann::ordered_json zero_one_json(const std::vector<std::uint32_t>& indices,
                                     const std::vector<ZeroOneResult>& results);
std::string zero_one_table(const std::vector<std::uint32_t>& indices,
                           const std::vector<ZeroOneResult>& results);
std::string zero_one_csv(const std::vector<std::uint32_t>& indices,
                         const std::vector<ZeroOneResult>& results);

nlohmann::ordered_json num_bound_json(const NumBoundResult& r);
std::string num_bound_table(const NumBoundResult& r);
std::string num_bound_csv(const NumBoundResult& r);

}  // namespace pfc::analysis

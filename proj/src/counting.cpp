#include "pfc/counting.hpp"

#include <algorithm>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pfc::counting {

using structures::Element;
using structures::FiniteStructure;
using structures::RelationTable;
using structures::Tuple;

namespace {

int resolve_jobs(int jobs) {
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (jobs >= 1) return jobs;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// size^exp saturating at UINT64_MAX.
std::uint64_t pow_saturating(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base) return UINT64_MAX;
    r *= base;
  }
  return r;
}

std::uint64_t checked_space(std::uint64_t size, unsigned nvars, std::uint64_t budget) {
  const std::uint64_t space = pow_saturating(size, nvars);
  if (space > budget)
    throw BudgetError("enumeration space " + std::to_string(size) + "^" +
                      std::to_string(nvars) + " exceeds the budget of " +
                      std::to_string(budget) + " tuples");
  return space;
}

// ---------------------------------------------------------------------------
// Compiled evaluator. A formula is flattened against one structure: terms
// resolve to environment slots or literal elements, atoms bind their relation
// table, and subformulas that read no slot bound outside themselves are
// evaluated once and replaced by boolean literals (this realizes the
// once-per-structure resolution of closed subformulas). Programs are
// immutable after compilation and shared across threads.
// ---------------------------------------------------------------------------

struct Node {
  enum class Op : std::uint8_t { False, True, Atom, Equal, Not, And, Or, Implies, ForAll, Exists };
  Op op = Op::False;
  std::int32_t a = -1, b = -1;
  std::uint32_t slot = 0;  // quantifier environment slot
  const RelationTable* table = nullptr;
  std::int32_t dense_id = -1;      // index into Program::dense when the table fits
  std::vector<std::int32_t> args;  // >= 0: env slot; < 0: literal element -(e+1)
  // Smallest environment slot read anywhere in the subtree (UINT32_MAX when
  // none) and the quantifier depth the node was compiled at. The node is
  // closed — safe to fold — iff min_slot >= n_free + depth, i.e. every slot
  // it reads is bound by a quantifier inside the subtree itself.
  std::uint32_t min_slot = UINT32_MAX;
  std::uint32_t depth = 0;
  // Bit i set iff the subtree reads environment slot i from outside (a
  // quantifier clears its own slot's bit). Slots >= 63 share bit 63, which
  // readers treat as "might read any high slot".
  std::uint64_t slot_mask = 0;
};

inline std::uint64_t slot_bit(std::uint32_t slot) {
  return std::uint64_t(1) << (slot < 63 ? slot : 63);
}

struct Program {
  std::vector<Node> nodes;
  std::int32_t root = -1;
  std::uint32_t n_free = 0;
  std::uint32_t n_slots = 0;
  std::uint32_t size = 0;
  unsigned max_arity = 0;
  // Row-major membership bitmaps for relations with size^arity at most
  // kDenseLimit entries, turning atom tests into one indexed load.
  std::vector<std::vector<std::uint8_t>> dense;
};

constexpr std::uint64_t kDenseLimit = std::uint64_t(1) << 22;

struct EvalCtx {
  const Program& pr;
  std::vector<Element> env;
  std::vector<Element> atom_buf;

  explicit EvalCtx(const Program& p) : pr(p), env(p.n_slots, 0), atom_buf(p.max_arity, 0) {}
};

bool eval_node(EvalCtx& ctx, std::int32_t id) {
  const Node& n = ctx.pr.nodes[static_cast<std::size_t>(id)];
  switch (n.op) {
    case Node::Op::False:
      return false;
    case Node::Op::True:
      return true;
    case Node::Op::Atom: {
      if (n.dense_id >= 0) {
        std::uint64_t idx = 0;
        for (const std::int32_t a : n.args)
          idx = idx * ctx.pr.size +
                (a >= 0 ? ctx.env[static_cast<std::size_t>(a)] : static_cast<Element>(-(a + 1)));
        return ctx.pr.dense[static_cast<std::size_t>(n.dense_id)][idx] != 0;
      }
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        const std::int32_t a = n.args[i];
        ctx.atom_buf[i] = a >= 0 ? ctx.env[static_cast<std::size_t>(a)]
                                 : static_cast<Element>(-(a + 1));
      }
      return n.table->contains({ctx.atom_buf.data(), n.args.size()});
    }
    case Node::Op::Equal: {
      const auto val = [&](std::int32_t a) {
        return a >= 0 ? ctx.env[static_cast<std::size_t>(a)] : static_cast<Element>(-(a + 1));
      };
      return val(n.args[0]) == val(n.args[1]);
    }
    case Node::Op::Not:
      return !eval_node(ctx, n.a);
    case Node::Op::And:
      return eval_node(ctx, n.a) && eval_node(ctx, n.b);
    case Node::Op::Or:
      return eval_node(ctx, n.a) || eval_node(ctx, n.b);
    case Node::Op::Implies:
      return !eval_node(ctx, n.a) || eval_node(ctx, n.b);
    case Node::Op::ForAll: {
      // An implication antecedent that never reads the loop slot has one
      // value across all iterations: false makes the whole loop vacuously
      // true, true reduces the body to the consequent.
      std::int32_t body = n.a;
      while (true) {
        const Node& b = ctx.pr.nodes[static_cast<std::size_t>(body)];
        if (b.op != Node::Op::Implies) break;
        if (ctx.pr.nodes[static_cast<std::size_t>(b.a)].slot_mask & slot_bit(n.slot)) break;
        if (!eval_node(ctx, b.a)) return true;
        body = b.b;
      }
      for (Element e = 0; e < ctx.pr.size; ++e) {
        ctx.env[n.slot] = e;
        if (!eval_node(ctx, body)) return false;
      }
      return true;
    }
    case Node::Op::Exists: {
      // Dual hoist: a false conjunct that never reads the loop slot
      // falsifies every iteration at once.
      std::int32_t body = n.a;
      while (true) {
        const Node& b = ctx.pr.nodes[static_cast<std::size_t>(body)];
        if (b.op != Node::Op::And) break;
        if (ctx.pr.nodes[static_cast<std::size_t>(b.a)].slot_mask & slot_bit(n.slot)) break;
        if (!eval_node(ctx, b.a)) return false;
        body = b.b;
      }
      for (Element e = 0; e < ctx.pr.size; ++e) {
        ctx.env[n.slot] = e;
        if (eval_node(ctx, body)) return true;
      }
      return false;
    }
  }
  return false;
}

struct Compiler {
  const FiniteStructure& s;
  Program pr;
  std::map<std::string, std::uint32_t> free_slot;
  std::vector<std::pair<std::string, std::uint32_t>> scope;
  std::uint32_t depth = 0;
  // Relations absent from the structure resolve to empty tables of the
  // formula's arity, kept alive alongside the program.
  std::vector<std::unique_ptr<RelationTable>> empty_tables;
  std::map<const RelationTable*, std::int32_t> dense_of;

  explicit Compiler(const FiniteStructure& st) : s(st) { pr.size = st.size; }

  // Builds (or reuses) the dense membership bitmap for a table; -1 when the
  // tuple space does not fit the limit.
  std::int32_t dense_for(const RelationTable& table) {
    if (const auto it = dense_of.find(&table); it != dense_of.end()) return it->second;
    std::uint64_t cells = 1;
    for (unsigned i = 0; i < table.arity(); ++i) {
      if (pr.size == 0 || cells > kDenseLimit / pr.size) {
        dense_of[&table] = -1;
        return -1;
      }
      cells *= pr.size;
    }
    // Unvalidated structures may hold out-of-range tuples; those tables stay
    // on the binary-search path, which treats them as ordinary non-matches.
    const std::vector<Element>& flat = table.flat();
    for (const Element e : flat) {
      if (e >= pr.size) {
        dense_of[&table] = -1;
        return -1;
      }
    }
    std::vector<std::uint8_t> bits(cells, 0);
    const unsigned arity = table.arity();
    for (std::size_t t = 0; t < table.tuple_count(); ++t) {
      std::uint64_t idx = 0;
      for (unsigned i = 0; i < arity; ++i) idx = idx * pr.size + flat[t * arity + i];
      bits[idx] = 1;
    }
    const auto id = static_cast<std::int32_t>(pr.dense.size());
    pr.dense.push_back(std::move(bits));
    dense_of[&table] = id;
    return id;
  }

  std::int32_t add(Node n) {
    n.depth = depth;
    pr.nodes.push_back(std::move(n));
    return static_cast<std::int32_t>(pr.nodes.size() - 1);
  }

  std::uint32_t min_slot_of(std::int32_t id) const {
    return pr.nodes[static_cast<std::size_t>(id)].min_slot;
  }

  std::uint64_t mask_of(std::int32_t id) const {
    return pr.nodes[static_cast<std::size_t>(id)].slot_mask;
  }

  // Implies(And(p, q), b) evaluates identically to Implies(p, Implies(q, b))
  // — same subterms, same short-circuit order — but the curried shape exposes
  // antecedents one at a time, so quantifier loops can hoist the invariant
  // ones. Orphaned And nodes stay in the vector unused.
  std::int32_t curried_implies(std::int32_t a, std::int32_t b) {
    if (pr.nodes[static_cast<std::size_t>(a)].op == Node::Op::And) {
      const std::int32_t p = pr.nodes[static_cast<std::size_t>(a)].a;
      const std::int32_t q = pr.nodes[static_cast<std::size_t>(a)].b;
      return curried_implies(p, curried_implies(q, b));
    }
    Node n;
    n.op = Node::Op::Implies;
    n.a = a;
    n.b = b;
    n.min_slot = std::min(min_slot_of(a), min_slot_of(b));
    n.slot_mask = mask_of(a) | mask_of(b);
    return add(std::move(n));
  }

  std::int32_t term_ref(const logic::Term& t, Node& n) {
    if (t.kind == logic::Term::Kind::Constant) {
      auto it = s.constants.find(t.name);
      if (it == s.constants.end())
        throw EvalError("constant '" + t.name + "' is not interpreted in the structure");
      return -static_cast<std::int32_t>(it->second) - 1;
    }
    for (auto sc = scope.rbegin(); sc != scope.rend(); ++sc)
      if (sc->first == t.name) {
        n.min_slot = std::min(n.min_slot, sc->second);
        n.slot_mask |= slot_bit(sc->second);
        return static_cast<std::int32_t>(sc->second);
      }
    auto it = free_slot.find(t.name);
    if (it == free_slot.end())
      throw EvalError("free variable '" + t.name + "' is not covered by the assignment");
    n.min_slot = std::min(n.min_slot, it->second);
    n.slot_mask |= slot_bit(it->second);
    return static_cast<std::int32_t>(it->second);
  }

  std::int32_t compile(const logic::Formula& f) {
    using K = logic::Formula::Kind;
    Node n;
    switch (f.kind()) {
      case K::Atom: {
        n.op = Node::Op::Atom;
        auto it = s.relations.find(f.relation());
        if (it != s.relations.end()) {
          n.table = &it->second;
        } else {
          empty_tables.push_back(std::make_unique<RelationTable>(
              static_cast<unsigned>(f.terms().size()), std::vector<Tuple>{}));
          n.table = empty_tables.back().get();
        }
        if (n.table->arity() != f.terms().size())
          throw EvalError("relation '" + f.relation() + "' has arity " +
                          std::to_string(n.table->arity()) + " in the structure, formula uses " +
                          std::to_string(f.terms().size()));
        for (const auto& t : f.terms()) n.args.push_back(term_ref(t, n));
        // Literal (constant) arguments outside the universe would overflow
        // the dense index; such atoms keep the binary-search path.
        bool literals_ok = true;
        for (const std::int32_t a : n.args)
          if (a < 0 && static_cast<Element>(-(a + 1)) >= pr.size) literals_ok = false;
        n.dense_id = literals_ok ? dense_for(*n.table) : -1;
        pr.max_arity = std::max<unsigned>(pr.max_arity, static_cast<unsigned>(n.args.size()));
        return add(std::move(n));
      }
      case K::Equality: {
        n.op = Node::Op::Equal;
        n.args.push_back(term_ref(f.terms()[0], n));
        n.args.push_back(term_ref(f.terms()[1], n));
        return add(std::move(n));
      }
      case K::Not: {
        n.op = Node::Op::Not;
        n.a = compile(*f.lhs());
        n.min_slot = min_slot_of(n.a);
        n.slot_mask = mask_of(n.a);
        return add(std::move(n));
      }
      case K::And:
      case K::Or: {
        n.op = f.kind() == K::And ? Node::Op::And : Node::Op::Or;
        n.a = compile(*f.lhs());
        n.b = compile(*f.rhs());
        n.min_slot = std::min(min_slot_of(n.a), min_slot_of(n.b));
        n.slot_mask = mask_of(n.a) | mask_of(n.b);
        return add(std::move(n));
      }
      case K::Implies: {
        const std::int32_t a = compile(*f.lhs());
        const std::int32_t b = compile(*f.rhs());
        return curried_implies(a, b);
      }
      case K::ForAll:
      case K::Exists: {
        n.op = f.kind() == K::ForAll ? Node::Op::ForAll : Node::Op::Exists;
        n.slot = pr.n_free + depth;
        scope.emplace_back(f.variable(), n.slot);
        ++depth;
        pr.n_slots = std::max(pr.n_slots, pr.n_free + depth);
        n.a = compile(*f.body());
        --depth;
        scope.pop_back();
        n.min_slot = min_slot_of(n.a);
        n.slot_mask = mask_of(n.a);
        if (n.slot < 63) n.slot_mask &= ~(std::uint64_t(1) << n.slot);
        return add(std::move(n));
      }
    }
    throw Error("unreachable formula kind");
  }
};

struct CompiledFormula {
  Program pr;
  std::vector<std::unique_ptr<RelationTable>> empty_tables;  // keep-alive for Atom pointers
};

// Compiles f against s with free variables bound to slots 0..|free_order|-1
// in the given order, then folds closed subformulas to boolean literals.
CompiledFormula compile_formula(const FiniteStructure& s, const logic::Formula& f,
                                const std::vector<std::string>& free_order) {
  Compiler c(s);
  c.pr.n_free = static_cast<std::uint32_t>(free_order.size());
  c.pr.n_slots = c.pr.n_free;
  for (std::size_t i = 0; i < free_order.size(); ++i)
    c.free_slot[free_order[i]] = static_cast<std::uint32_t>(i);
  c.pr.root = c.compile(f);

  // Children precede parents in node order, so one ascending pass folds
  // bottom-up. A closed node's value cannot depend on the environment, so
  // evaluating it against the zeroed scratch context is sound.
  EvalCtx ctx(c.pr);
  for (std::size_t i = 0; i < c.pr.nodes.size(); ++i) {
    Node& n = c.pr.nodes[i];
    if (n.op == Node::Op::True || n.op == Node::Op::False) continue;
    if (n.min_slot < c.pr.n_free + n.depth) continue;  // reads an outside slot
    const bool value = eval_node(ctx, static_cast<std::int32_t>(i));
    const std::uint32_t depth = n.depth;
    n = Node{};
    n.op = value ? Node::Op::True : Node::Op::False;
    n.depth = depth;
  }
  return {std::move(c.pr), std::move(c.empty_tables)};
}

// Throws unless `values` maps every name in `order` to an element in range.
// All kernels call this before entering a parallel region; preload() below
// assumes it has run and therefore cannot throw on a worker thread.
void validate_values(const Program& pr, const std::vector<std::string>& order,
                     const Assignment& values) {
  for (const auto& name : order) {
    auto it = values.find(name);
    if (it == values.end())
      throw EvalError("assignment does not cover variable '" + name + "'");
    if (pr.size == 0)
      throw EvalError("cannot assign variables over an empty universe");
    if (it->second >= pr.size)
      throw EvalError("assignment maps '" + name + "' to " + std::to_string(it->second) +
                      ", out of range for universe size " + std::to_string(pr.size));
  }
}

// Writes values for `order` into contiguous env slots starting at `first`.
// Requires a prior validate_values call; missing names are skipped.
void preload(const std::vector<std::string>& order, std::uint32_t first,
             const Assignment& values, std::vector<Element>& env) {
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = values.find(order[i]);
    if (it != values.end()) env[first + static_cast<std::uint32_t>(i)] = it->second;
  }
}

// Writes the tuple with the given lexicographic rank into contiguous env
// slots [first, first + nvars).
void decompose(std::uint64_t rank, std::uint32_t size, std::uint32_t first, unsigned nvars,
               std::vector<Element>& env) {
  for (unsigned i = nvars; i-- > 0;) {
    env[first + i] = static_cast<Element>(rank % size);
    rank /= size;
  }
}

// Advances env slots [first, first + nvars) to the lexicographic successor.
void advance(std::uint32_t size, std::uint32_t first, unsigned nvars, std::vector<Element>& env) {
  for (unsigned i = nvars; i-- > 0;) {
    if (++env[first + i] < size) return;
    env[first + i] = 0;
  }
}

// Counts satisfying assignments for tuple ranks [begin, end) over the slots
// [first, first + nvars); other env slots must be preloaded by the caller.
std::uint64_t count_range(EvalCtx& ctx, std::uint32_t first, unsigned nvars, std::uint64_t begin,
                          std::uint64_t end) {
  if (begin >= end) return 0;
  decompose(begin, ctx.pr.size, first, nvars, ctx.env);
  std::uint64_t count = 0;
  for (std::uint64_t i = begin; i < end; ++i) {
    if (eval_node(ctx, ctx.pr.root)) ++count;
    advance(ctx.pr.size, first, nvars, ctx.env);
  }
  return count;
}

void require_exact_keys(const Assignment& a, const std::vector<std::string>& expected,
                        const char* what) {
  if (a.size() != expected.size())
    throw EvalError(std::string(what) + " must assign exactly the expected variables");
  for (const auto& v : expected)
    if (!a.count(v)) throw EvalError(std::string(what) + " is missing variable '" + v + "'");
}

// Free variables of f not covered by the partition, in first-occurrence order.
std::vector<std::string> remaining_vars(const logic::Formula& f,
                                        const logic::VariablePartition& part) {
  std::vector<std::string> out;
  for (const auto& v : f.free_variables()) {
    const bool in_obj =
        std::find(part.object_vars.begin(), part.object_vars.end(), v) != part.object_vars.end();
    const bool in_par = std::find(part.parameter_vars.begin(), part.parameter_vars.end(), v) !=
                        part.parameter_vars.end();
    if (!in_obj && !in_par) out.push_back(v);
  }
  return out;
}

// The partition may not have come from make_partition; re-validate namewise.
void validate_partition_vars(const logic::Formula& f, const logic::VariablePartition& part) {
  (void)logic::make_partition(f, part.object_vars, part.parameter_vars, false);
}

// Environment slot order shared by all kernels: object variables, then
// parameter variables, then leftover (outer) free variables.
std::vector<std::string> slot_order(const logic::VariablePartition& part,
                                    const std::vector<std::string>& outer) {
  std::vector<std::string> order = part.object_vars;
  order.insert(order.end(), part.parameter_vars.begin(), part.parameter_vars.end());
  order.insert(order.end(), outer.begin(), outer.end());
  return order;
}

Tuple tuple_from_rank(std::uint64_t rank, std::uint32_t size, unsigned nvars) {
  Tuple t(nvars);
  for (unsigned i = nvars; i-- > 0;) {
    t[i] = static_cast<Element>(rank % size);
    rank /= size;
  }
  return t;
}

// Chunked parallel count over slots [first, first + nvars), all other env
// slots fixed to `fixed` (the variables listed in fixed_order, starting at
// slot fixed_first). jobs = 1 is the serial reference; every setting returns
// the same total because addition of per-chunk exact counts commutes.
std::uint64_t parallel_count(const CompiledFormula& cf, std::uint32_t first, unsigned nvars,
                             std::uint64_t space, const std::vector<std::string>& fixed_order,
                             std::uint32_t fixed_first, const Assignment& fixed, int jobs) {
  const Program& pr = cf.pr;
  if (space == 0) return 0;
  const int nt = resolve_jobs(jobs);
  const std::uint64_t chunk =
      std::max<std::uint64_t>(1, space / (16u * static_cast<std::uint64_t>(nt)));
  const auto n_chunks = static_cast<long long>((space + chunk - 1) / chunk);
  std::uint64_t total = 0;
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
#endif
  {
    EvalCtx ctx(pr);
    preload(fixed_order, fixed_first, fixed, ctx.env);
    std::uint64_t local = 0;
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
    for (long long c = 0; c < n_chunks; ++c) {
      const std::uint64_t begin = static_cast<std::uint64_t>(c) * chunk;
      local += count_range(ctx, first, nvars, begin, std::min(space, begin + chunk));
    }
#ifdef _OPENMP
#pragma omp atomic
#endif
    total += local;
  }
  (void)nt;
  return total;
}

}  // namespace

bool evaluate(const FiniteStructure& s, const logic::Formula& f, const Assignment& assignment) {
  const auto& free = f.free_variables();
  require_exact_keys(assignment, free, "assignment");
  CompiledFormula cf = compile_formula(s, f, free);
  validate_values(cf.pr, free, assignment);
  EvalCtx ctx(cf.pr);
  preload(free, 0, assignment, ctx.env);
  return eval_node(ctx, cf.pr.root);
}

Natural count_solutions(const FiniteStructure& s, const logic::Formula& f,
                        const logic::VariablePartition& part, const Assignment& params,
                        const CountOptions& opts) {
  validate_partition_vars(f, part);
  if (!remaining_vars(f, part).empty())
    throw EvalError("partition does not cover the formula's free variables");
  require_exact_keys(params, part.parameter_vars, "parameter assignment");

  const auto n_obj = static_cast<unsigned>(part.object_vars.size());
  const std::uint64_t obj_space = checked_space(s.size, n_obj, opts.budget);
  CompiledFormula cf = compile_formula(s, f, slot_order(part, {}));
  if (s.size == 0) return 0;
  validate_values(cf.pr, part.parameter_vars, params);
  return Natural(
      parallel_count(cf, 0, n_obj, obj_space, part.parameter_vars, n_obj, params, opts.jobs));
}

FiberSpectrum fiber_spectrum(const FiniteStructure& s, const logic::Formula& f,
                             const logic::VariablePartition& part, const Assignment& outer_params,
                             const CountOptions& opts) {
  validate_partition_vars(f, part);
  const std::vector<std::string> outer = remaining_vars(f, part);
  require_exact_keys(outer_params, outer, "outer parameter assignment");

  const auto n_obj = static_cast<unsigned>(part.object_vars.size());
  const auto n_par = static_cast<unsigned>(part.parameter_vars.size());
  checked_space(s.size, n_obj + n_par, opts.budget);
  const std::uint64_t obj_space = pow_saturating(s.size, n_obj);
  const std::uint64_t par_space = pow_saturating(s.size, n_par);

  CompiledFormula cf = compile_formula(s, f, slot_order(part, outer));
  if (s.size > 0) validate_values(cf.pr, outer, outer_params);

  // Object-side count for every parameter tuple; entries are independent, so
  // any worker count produces the identical vector.
  std::vector<std::uint64_t> counts(s.size > 0 ? par_space : 0, 0);
  if (!counts.empty()) {
    const int nt = resolve_jobs(opts.jobs);
    const auto par_count = static_cast<long long>(counts.size());
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
#endif
    {
      EvalCtx ctx(cf.pr);
      preload(outer, n_obj + n_par, outer_params, ctx.env);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
      for (long long pi = 0; pi < par_count; ++pi) {
        decompose(static_cast<std::uint64_t>(pi), cf.pr.size, n_obj, n_par, ctx.env);
        counts[static_cast<std::size_t>(pi)] = count_range(ctx, 0, n_obj, 0, obj_space);
      }
    }
    (void)nt;
  }

  // Deterministic serial merge: group by cardinality; each class collects its
  // parameter tuples in ascending rank order, i.e. lexicographically.
  std::map<std::uint64_t, std::vector<std::uint64_t>> groups;
  for (std::uint64_t pi = 0; pi < counts.size(); ++pi) groups[counts[pi]].push_back(pi);

  FiberSpectrum spectrum;
  spectrum.total_pairs = 0;
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {  // descending cardinality
    FiberClass cls;
    cls.cardinality = Natural(it->first);
    cls.members.reserve(it->second.size());
    for (std::uint64_t pi : it->second) cls.members.push_back(tuple_from_rank(pi, s.size, n_par));
    spectrum.total_pairs += cls.cardinality * Natural(cls.members.size());
    spectrum.entries.push_back(std::move(cls));
  }
  return spectrum;
}

SumIdentityResult verify_sum_identity(const FiberSpectrum& spectrum, const FiniteStructure& s,
                                      const logic::Formula& f,
                                      const logic::VariablePartition& part,
                                      const Assignment& outer_params, const CountOptions& opts) {
  validate_partition_vars(f, part);
  const std::vector<std::string> outer = remaining_vars(f, part);
  require_exact_keys(outer_params, outer, "outer parameter assignment");

  const auto n_obj = static_cast<unsigned>(part.object_vars.size());
  const auto n_par = static_cast<unsigned>(part.parameter_vars.size());
  const std::uint64_t joint_space = checked_space(s.size, n_obj + n_par, opts.budget);

  // One flat enumeration over object and parameter variables together,
  // independent of the spectrum's per-fiber grouping.
  SumIdentityResult r;
  r.combined_count = 0;
  if (s.size > 0) {
    CompiledFormula cf = compile_formula(s, f, slot_order(part, outer));
    validate_values(cf.pr, outer, outer_params);
    r.combined_count = Natural(parallel_count(cf, 0, n_obj + n_par, joint_space, outer,
                                              n_obj + n_par, outer_params, opts.jobs));
  }

  r.spectrum_sum = 0;
  for (const auto& cls : spectrum.entries)
    r.spectrum_sum += cls.cardinality * Natural(cls.members.size());
  r.holds = r.combined_count == r.spectrum_sum;
  return r;
}

QuotientIdentityResult verify_quotient_identity(const FiniteStructure& s, const logic::Formula& f,
                                                const logic::VariablePartition& part,
                                                const Assignment& outer_params,
                                                const CountOptions& opts) {
  validate_partition_vars(f, part);
  const std::vector<std::string> outer = remaining_vars(f, part);
  require_exact_keys(outer_params, outer, "outer parameter assignment");

  const auto n_obj = static_cast<unsigned>(part.object_vars.size());
  const auto n_par = static_cast<unsigned>(part.parameter_vars.size());
  checked_space(s.size, n_obj + n_par, opts.budget);
  const std::uint64_t obj_space = pow_saturating(s.size, n_obj);
  const std::uint64_t par_space = pow_saturating(s.size, n_par);

  // Parameter-side fiber size for every object tuple, reduced on the fly to
  // the aggregates the identity needs; memory stays O(1) in the object space.
  std::uint64_t total = 0, projection = 0;
  std::uint64_t min_nonzero = UINT64_MAX, max_nonzero = 0;
  if (s.size > 0) {
    CompiledFormula cf = compile_formula(s, f, slot_order(part, outer));
    validate_values(cf.pr, outer, outer_params);
    const int nt = resolve_jobs(opts.jobs);
    const auto obj_count = static_cast<long long>(obj_space);
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
#endif
    {
      EvalCtx ctx(cf.pr);
      preload(outer, n_obj + n_par, outer_params, ctx.env);
      std::uint64_t l_total = 0, l_proj = 0, l_min = UINT64_MAX, l_max = 0;
#ifdef _OPENMP
#pragma omp for schedule(static) nowait
#endif
      for (long long oi = 0; oi < obj_count; ++oi) {
        decompose(static_cast<std::uint64_t>(oi), cf.pr.size, 0, n_obj, ctx.env);
        const std::uint64_t fiber = count_range(ctx, n_obj, n_par, 0, par_space);
        l_total += fiber;
        if (fiber > 0) {
          ++l_proj;
          l_min = std::min(l_min, fiber);
          l_max = std::max(l_max, fiber);
        }
      }
#ifdef _OPENMP
#pragma omp critical(pfc_quotient_merge)
#endif
      {
        total += l_total;
        projection += l_proj;
        min_nonzero = std::min(min_nonzero, l_min);
        max_nonzero = std::max(max_nonzero, l_max);
      }
    }
    (void)nt;
  }

  QuotientIdentityResult r;
  r.combined_count = Natural(total);
  r.projection_count = Natural(projection);
  if (projection == 0 || min_nonzero != max_nonzero) {
    r.applicable = false;
    r.holds = false;
    r.fiber_size = 0;
    return r;
  }
  r.applicable = true;
  r.fiber_size = Natural(min_nonzero);
  r.holds = Natural(total) == r.fiber_size * r.projection_count;
  return r;
}

}  // namespace pfc::counting

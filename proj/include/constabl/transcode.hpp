#pragma once

// Turns fired transitions into executable step code built from Seq/Conc
// nodes over code blocks. Conflict checks and control-point navigation live here too.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "constabl/program.hpp"
#include "constabl/structural.hpp"

namespace constabl {

template <class T>
struct Tree {
  T value{};
  std::vector<Tree> children;

  bool operator==(const Tree&) const = default;
};

using StateTree = Tree<StateId>;
using CfgTree = Tree<CodeBlockId>;

template <class T, class F>
auto treemap(const Tree<T>& t, F&& f) -> Tree<decltype(f(t.value))> {
  Tree<decltype(f(t.value))> out{f(t.value), {}};
  out.children.reserve(t.children.size());
  for (const auto& c : t.children) out.children.push_back(treemap(c, f));
  return out;
}

template <class T>
void collect_leaves(const Tree<T>& t, std::vector<T>& out) {
  if (t.children.empty()) {
    out.push_back(t.value);
    return;
  }
  for (const auto& c : t.children) collect_leaves(c, out);
}

template <class T>
std::vector<T> leaves(const Tree<T>& t) {
  std::vector<T> out;
  collect_leaves(t, out);
  return out;
}

template <class T>
void collect_preorder(const Tree<T>& t, std::vector<T>& out) {
  out.push_back(t.value);
  for (const auto& c : t.children) collect_preorder(c, out);
}

template <class T>
std::vector<T> preorder(const Tree<T>& t) {
  std::vector<T> out;
  collect_preorder(t, out);
  return out;
}

/// "A(B,C(D))" rendering with state names.
std::string to_string(const Model& model, const StateTree& t);

class EmptySliceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotEnabledError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

StateTree subtree(const Model& model, StateId n);
/// Keeps the paths of subtree(n) that end in a member of c.
StateTree sliced_subtree(const Model& model, StateId n, const StateSet& c);
StateTree initial_subtree(const Model& model, StateId n);

/// Configuration state tree: members of c and all their ancestors.
StateTree cst(const Model& model, const StateSet& c);
std::set<StateId> cst_states(const Model& model, const StateSet& c);

StateTree source_state_tree(const Model& model, TransitionId t, const StateSet& c);
StateTree dest_state_tree(const Model& model, TransitionId t);

CfgTree cfg_tree_source(const Program& program, TransitionId t, const StateSet& c);
CfgTree cfg_tree_dest(const Program& program, TransitionId t);

/// Step code value. Seq children are ordered, Conc children unordered.
struct Code {
  enum class Kind { seq, conc, leaf };
  Kind kind = Kind::seq;
  std::vector<Code> children;
  CodeBlockId block;

  static Code leaf(CodeBlockId b) { return Code{Kind::leaf, {}, b}; }
  /// Builds a Seq, splicing nested Seqs into it.
  static Code seq(std::vector<Code> parts);
  static Code conc(std::vector<Code> parts);

  bool empty() const { return kind != Kind::leaf && children.empty(); }
  bool operator==(const Code&) const = default;
};

Code code_of(const CfgTree& t);
Code rev(const Code& c);
Code transition_code(const Program& program, TransitionId t, const StateSet& c);

/// Code blocks of c in leaf order.
std::vector<CodeBlockId> code_blocks(const Code& c);

/// Blocks that both transitions would execute; empty when they do not conflict.
std::vector<CodeBlockId> shared_blocks(const Program& program, TransitionId t1, TransitionId t2,
                                       const StateSet& c);
bool conflict(const Program& program, TransitionId t1, TransitionId t2, const StateSet& c);

class ConflictError : public std::runtime_error {
 public:
  ConflictError(const std::string& what, TransitionId a, TransitionId b, std::vector<CodeBlockId> shared)
      : std::runtime_error(what), first(a), second(b), blocks(std::move(shared)) {}
  TransitionId first;
  TransitionId second;
  std::vector<CodeBlockId> blocks;
};

/// Conc of the transition codes, ordered by transition id. A singleton set
/// yields its transition code, the empty set the empty code. Throws
/// ConflictError for the first conflicting pair.
Code step_code(const Program& program, std::vector<TransitionId> ts, const StateSet& c);

/// Abbreviated rendering: ⟨a, b⟩ for Seq and [a | b] for Conc, with compact
/// separators below the outermost level.
std::string to_string(const Program& program, const Code& c);

/// A CFG node inside a fixed step code: the leaf (preorder index among the
/// code's CFGCode leaves) and the node id in that leaf's CFG.
struct ControlPoint {
  std::uint32_t leaf = 0;
  NodeId node = 0;
  auto operator<=>(const ControlPoint&) const = default;
};

/// Navigation over one step code value.
class CodeNavigator {
 public:
  CodeNavigator(const Program& program, Code code);

  const Code& code() const { return code_; }
  const Program& program() const { return *program_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  CodeBlockId block(std::uint32_t leaf) const { return leaves_.at(leaf); }
  const Cfg& cfg(std::uint32_t leaf) const { return program_->cfg(leaves_.at(leaf)); }
  const CfgNode& node(ControlPoint cp) const { return cfg(cp.leaf).node(cp.node); }
  bool is_exit(ControlPoint cp) const { return cfg(cp.leaf).exit == cp.node; }
  ControlPoint entry_point(std::uint32_t leaf) const { return {leaf, cfg(leaf).entry}; }
  ControlPoint exit_point(std::uint32_t leaf) const { return {leaf, cfg(leaf).exit}; }

  /// Index of the top-level Conc branch holding the leaf (0 when the code is not a Conc).
  std::uint32_t branch_of(std::uint32_t leaf) const { return branch_.at(leaf); }

  /// Entry control points of the initial leaves.
  std::vector<ControlPoint> first() const;
  /// Leaves that start once the given leaf has finished.
  const std::vector<std::uint32_t>& next_cfg_codes(std::uint32_t leaf) const { return next_.at(leaf); }
  /// Leaves whose completion leads into the given leaf.
  const std::vector<std::uint32_t>& predecessors(std::uint32_t leaf) const { return pred_.at(leaf); }

  /// Successor control points of cp. `decide` evaluates decision conditions.
  std::vector<ControlPoint> next_cp(ControlPoint cp, const std::function<bool(const CfgNode&)>& decide) const;

  /// "A.exit#0"
  std::string label(ControlPoint cp) const;
  std::optional<ControlPoint> parse(std::string_view label) const;

 private:
  void link(const Code& c, std::uint32_t base, const std::vector<std::uint32_t>& after);
  std::vector<std::uint32_t> first_of(const Code& c, std::uint32_t base) const;

  const Program* program_;
  Code code_;
  std::vector<CodeBlockId> leaves_;
  std::vector<std::uint32_t> branch_;
  std::vector<std::vector<std::uint32_t>> next_;
  std::vector<std::vector<std::uint32_t>> pred_;
  std::map<CodeBlockId, std::uint32_t> leaf_of_block_;
};

}  // namespace constabl

#pragma once

// Control-flow graphs of action blocks.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "constabl/model.hpp"
#include "constabl/structural.hpp"

namespace constabl {

using NodeId = std::uint32_t;

/// Binds a variable name used by a node to its declaration. Filled in when a
/// CFG is compiled into a Program; empty for freshly built graphs.
struct VarBinding {
  std::string name;
  VarRef ref;
};

struct CfgNode {
  enum class Kind { instruction, decision };

  NodeId id = 0;
  Kind kind = Kind::instruction;
  // Instruction nodes: an assignment (target non-empty) or a skip (target empty).
  std::string target;
  // Assignment right-hand side or decision condition.
  Expr expr;
  std::optional<NodeId> succ;
  NodeId then_succ = 0;
  NodeId else_succ = 0;
  SourceSpan span;
  std::vector<VarBinding> bindings;

  bool is_skip() const { return kind == Kind::instruction && target.empty(); }
  std::vector<NodeId> successors() const;
  std::string label() const;
};

struct Cfg {
  std::vector<CfgNode> nodes;  // nodes[i].id == i
  NodeId entry = 0;
  NodeId exit = 0;

  const CfgNode& node(NodeId id) const { return nodes.at(id); }
  std::size_t instruction_count() const;
};

/// Builds the CFG of a block. Straight-line statements chain through succ;
/// a skip node is appended as the exit whenever the block does not end in a
/// single dangling instruction, e.g. when it is empty or ends in a branch.
Cfg build_cfg(const Block& block);

/// `id kind "label" -> succ...` lines followed by `entry N exit M`.
std::string dump(const Cfg& cfg);

}  // namespace constabl

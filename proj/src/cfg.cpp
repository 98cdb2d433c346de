#include "constabl/cfg.hpp"

#include <sstream>

#include "constabl/parser.hpp"

namespace constabl {

std::vector<NodeId> CfgNode::successors() const {
  if (kind == Kind::decision) return {then_succ, else_succ};
  if (succ) return {*succ};
  return {};
}

std::string CfgNode::label() const {
  if (kind == Kind::decision) return to_source(expr);
  if (target.empty()) return "skip";
  return target + " := " + to_source(expr);
}

std::size_t Cfg::instruction_count() const {
  std::size_t n = 0;
  for (const auto& nd : nodes) n += nd.kind == CfgNode::Kind::instruction;
  return n;
}

namespace {

enum class Slot { succ, then_, else_ };

struct Dangling {
  NodeId node;
  Slot slot;
};

class Builder {
 public:
  Cfg finish(const Block& b) {
    std::vector<Dangling> open;
    block(b, open);
    if (open.size() == 1 && open.front().slot == Slot::succ) {
      cfg_.exit = open.front().node;
    } else {
      NodeId skip = add_instruction("", Expr{}, {});
      connect(open, skip);
      cfg_.exit = skip;
    }
    return std::move(cfg_);
  }

 private:
  NodeId add(CfgNode n) {
    n.id = static_cast<NodeId>(cfg_.nodes.size());
    if (!has_entry_) {
      cfg_.entry = n.id;
      has_entry_ = true;
    }
    cfg_.nodes.push_back(std::move(n));
    return cfg_.nodes.back().id;
  }

  NodeId add_instruction(std::string target, Expr e, SourceSpan sp) {
    CfgNode n;
    n.kind = CfgNode::Kind::instruction;
    n.target = std::move(target);
    n.expr = std::move(e);
    n.span = sp;
    return add(std::move(n));
  }

  NodeId add_decision(const Expr& cond, SourceSpan sp) {
    CfgNode n;
    n.kind = CfgNode::Kind::decision;
    n.expr = cond;
    n.span = sp;
    return add(std::move(n));
  }

  void connect(const std::vector<Dangling>& open, NodeId to) {
    for (const auto& d : open) {
      CfgNode& n = cfg_.nodes[d.node];
      switch (d.slot) {
        case Slot::succ: n.succ = to; break;
        case Slot::then_: n.then_succ = to; break;
        case Slot::else_: n.else_succ = to; break;
      }
    }
  }

  // Appends the statements of b; `open` holds the edges waiting for the next node.
  void block(const Block& b, std::vector<Dangling>& open) {
    for (const auto& s : b) stmt(s, open);
  }

  void stmt(const Stmt& s, std::vector<Dangling>& open) {
    switch (s.kind) {
      case Stmt::Kind::assign:
      case Stmt::Kind::skip: {
        NodeId n = add_instruction(s.kind == Stmt::Kind::assign ? s.var : "",
                                   s.kind == Stmt::Kind::assign ? s.expr : Expr{}, s.span);
        connect(open, n);
        open = {{n, Slot::succ}};
        return;
      }
      case Stmt::Kind::if_: {
        NodeId d = add_decision(s.expr, s.span);
        connect(open, d);
        std::vector<Dangling> then_open{{d, Slot::then_}};
        block(s.body, then_open);
        std::vector<Dangling> else_open{{d, Slot::else_}};
        block(s.else_body, else_open);
        open = std::move(then_open);
        open.insert(open.end(), else_open.begin(), else_open.end());
        return;
      }
      case Stmt::Kind::while_: {
        NodeId d = add_decision(s.expr, s.span);
        connect(open, d);
        std::vector<Dangling> body_open{{d, Slot::then_}};
        block(s.body, body_open);
        connect(body_open, d);
        open = {{d, Slot::else_}};
        return;
      }
    }
  }

  Cfg cfg_;
  bool has_entry_ = false;
};

}  // namespace

Cfg build_cfg(const Block& block) { return Builder().finish(block); }

std::string dump(const Cfg& cfg) {
  std::ostringstream os;
  for (const auto& n : cfg.nodes) {
    os << n.id << ' ' << (n.kind == CfgNode::Kind::decision ? "decision" : "instr") << " \"" << n.label()
       << "\" ->";
    for (NodeId s : n.successors()) os << ' ' << s;
    os << '\n';
  }
  os << "entry " << cfg.entry << " exit " << cfg.exit << '\n';
  return os.str();
}

}  // namespace constabl
